# %% [markdown]
# Optimizing probes for all labels at once
#
# For one-step schemes we search for the probe maximizing sum_x sqrt(F_x)
# and compare it with 2 sqrt(N) times the best single-label value.  The
# ratio stays below one in every case we tried.

# %%
from metrosearch.probeopt import conjecture_check
from metrosearch.protocol import SchemeConfig

for N in (2, 3, 4):
    for gamma in (0.0, 0.3):
        cfg = SchemeConfig(N=N, M=1, tau=1.0, omega=1.0, gamma=gamma, v_sequence="Identity")
        chk = conjecture_check(cfg, restarts=20, seed=0)
        print(f"N={N} gamma={gamma}: sum sqrt F = {chk.lhs:.5f}, ratio {chk.ratio:.4f}, "
              f"converged {chk.summed.converged_fraction:.0%}")

# %% [markdown]
# For N = 2 without noise the optimum is exactly 2: the |+> state gives
# F = 1 for each label.
