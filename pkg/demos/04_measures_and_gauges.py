"""Convolution powers, the three-measure chain and the drift gauge."""

from fractions import Fraction

import numpy as np

from nilgrowth.groups import Lattice
from nilgrowth.measures import (
    FiniteMeasure,
    convolution_growth_series,
    direct_theorem_check,
    donk_bounds,
    solve_drift_gauge,
)
from nilgrowth.nilprog import Nilprogression

Z = Lattice(1)
coin = FiniteMeasure.from_masses(Z, {(1,): "1/2", (-1,): "1/2"})

# l2 growth of a symmetric walk: exact rationals, never decreasing
s = convolution_growth_series(coin, 6)
for n, l2, sup in s.rows:
    print(f"n={n}: ||mu^n||^-2 = {l2}, sup = {sup}")

# %% the chain sup mu_1*...*mu_n <= mu^{*n}(0) <= mu~_1*...*mu~_n(0)
t = donk_bounds([coin])
print("chain on the coin:", t.lhs, "<=", t.mid, "<=", round(t.rhs, 6))
lazy = FiniteMeasure.from_masses(Z, {(0,): "1/3", (2,): "1/3", (-2,): "1/3"})
t = donk_bounds([coin, lazy, coin])
print("chain on three measures:", t.lhs, "<=", t.mid, "<=", round(t.rhs, 6))

# %% drift gauge for a small chain
p = np.array([[0.5, 0.25, 0.25], [0.25, 0.5, 0.25], [0.25, 0.25, 0.5]])
a = np.array([[0.0, 0.3, -0.1], [-0.3, 0.0, 0.2], [0.1, -0.2, 0.0]])
g = solve_drift_gauge(p, a)
print("t =", np.round(g.t, 6), "residual", f"{g.residual:.1e}")

# %% the direct theorem on Z
mu = FiniteMeasure.uniform(Z, [(k,) for k in range(-5, 6)])
r = direct_theorem_check(mu, Nilprogression(Z, [(1,)], [50]), [(0,)], 100)
print("integral", r.integral, " n * integral", r.measured_M, " |HP|", r.hp_size,
      " ratio", round(float(r.ratio), 4))
assert r.integral == Fraction(1, 250)
