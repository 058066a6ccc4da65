# %% [markdown]
# How dephasing caps the Fisher information
#
# M two-level atoms sense in parallel for one step of length tau while each
# dephases at rate gamma.  No probe beats tau^2 M / (e^{2 gamma tau} - 1);
# shrinking tau at fixed total time T drives that cap towards T / (2 gamma).

# %%
import numpy as np

from metrosearch import bounds
from metrosearch.geometry import qfi_sld
from metrosearch.protocol import SchemeConfig, run_scheme
from metrosearch.states import haar_random_state

rng = np.random.default_rng(1)
for M in (1, 2, 3):
    for gt in (0.1, 0.5, 1.0):
        cfg = SchemeConfig(N=2, M=M, tau=1.0, omega=0.5, gamma=gt, v_sequence="SwapParallel")
        best = 0.0
        for _ in range(100):
            tr = run_scheme(cfg, haar_random_state(cfg.dim, rng), 2)
            best = max(best, qfi_sld(tr.final_state, tr.final_derivative).value)
        cap = bounds.dephasing_qfi_bound(M, 1.0, gt)
        print(f"M={M} gamma*tau={gt:.1f}: best random probe {best:.4f} <= cap {cap:.4f}")

# %%
rows, limit = bounds.fundamental_bound_convergence(T=2.0, gamma=0.5, tau0=1.0, halvings=8)
for tau, M, cap in rows:
    print(f"tau={tau:.5f} M={M:4d} cap={cap:.5f}")
print("limit T/(2 gamma) =", limit)

# %% [markdown]
# The cap above is a two-level statement.  With N > 2 levels the dephasing
# also damps coherences that do not involve |x>, and a single label can do
# slightly better than the two-level formula (see the README).

# %%
from metrosearch.probeopt import optimize_sum_sqrt_qfi

for N in (2, 3, 4):
    cfg = SchemeConfig(N=N, M=1, tau=1.0, omega=1.0, gamma=1.0, v_sequence="Identity")
    best = optimize_sum_sqrt_qfi(cfg, restarts=6, seed=0, labels=(1,)).best_value ** 2
    print(f"N={N}: best single-label QFI {best:.4f} vs two-level cap {bounds.dephasing_qfi_bound(1, 1.0, 1.0):.4f}")
