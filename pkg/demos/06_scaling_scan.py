# %% [markdown]
# How the summed distance scales with N and T
#
# D_bar_T / sqrt(T N) is tabulated on a grid.  Without noise the distance
# grows linearly in T at first; with dephasing it stays below the summed
# frequency-way cap.

# %%
import math

from metrosearch.probeopt import conjecture_scaling_scan
from metrosearch.protocol import SchemeConfig

clean = conjecture_scaling_scan([16, 64], [1, 2, 3], SchemeConfig(N=2, M=0, tau=1.0, omega=math.pi))
print("noiseless exponent in T:", round(clean.beta, 4))

noisy = conjecture_scaling_scan([2, 4, 8, 16], [0.5, 1, 2, 4, 8],
                                SchemeConfig(N=2, M=0, tau=0.5, omega=1.0, gamma=0.5))
for r in noisy.rows:
    print(f"N={r['N']:2d} T={r['T']:3.1f} D_bar={r['D_bar']:.4f} cap={r['envelope']:.3f}")
print("all rows under the cap:", noisy.within_envelope)
