"""Regenerate the synthetic log-return example shipped with the package.

Five correlated series, multivariate t(3) innovations with AR(1) log-volatility,
50 trading days.
"""

import numpy as np

rng = np.random.Generator(np.random.PCG64(20200607))
d, n, nu = 5, 50, 3
C = 0.6 * np.ones((d, d)) + 0.4 * np.eye(d)
L = np.linalg.cholesky(C)
h = np.empty(n)
h[0] = 0.0
for i in range(1, n):
    h[i] = 0.9 * h[i - 1] + 0.5 * rng.standard_normal()
z = rng.standard_normal((n, d)) @ L.T
w = rng.chisquare(nu, n)
eps = z / np.sqrt(w / nu)[:, None] * np.sqrt((nu - 2) / nu)
r = 0.01 * np.exp(h / 2)[:, None] * eps + 0.0003
names = ["idx_a", "idx_b", "idx_c", "idx_d", "idx_e"]
with open("src/steinmvn/data/example_returns.csv", "w") as fh:
    fh.write(",".join(names) + "\n")
    for row in r:
        fh.write(",".join(f"{v:.6f}" for v in row) + "\n")
