# %% [markdown]
# Three lower bounds on search time
#
# Noiseless search needs (pi / 4 omega) sqrt(N).  With dephasing the bound
# becomes linear in N, N pi^2 gamma / (8 omega^2), and it always exceeds the
# bound known for sequential strategies without ancillas.

# %%
import numpy as np

from metrosearch import bounds

omega, gamma = np.pi, 1.0
table = bounds.crossover_scan([2**k for k in range(11)], omega, gamma)
print(" ".join(f"{c:>11s}" for c in table.columns))
for row in table.rows:
    print(" ".join(f"{v:11.4g}" for v in row))
print("dephasing bound takes over at N =", table.crossover_N)

# %%
grid = np.logspace(-3, 3, 25)
ratio = np.array([[bounds.dephasing_query_bound(8, w, g) / bounds.temme_bound(8, w, g) for w in grid]
                  for g in grid])
print("smallest ratio on the grid:", ratio.min(), "(limit pi^2 / 4 ~ 2.47 as gamma -> 0)")
