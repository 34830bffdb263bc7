"""Growth of |A^n| and the fitted log-log profile.

The box A = [-2,2] x [-8,8] x [-2,2] in the Heisenberg group grows like m^3
at first and like m^4 later.  We enumerate A^m for m <= 8 (a few seconds on
the numpy path) and fit a piecewise linear profile.
"""

import itertools

from nilgrowth.growth import fit_profile, polynomial_growth_check, product_set_series, stability_constant
from nilgrowth.groups import Lattice, heisenberg

H = heisenberg()
A = list(itertools.product(range(-2, 3), range(-8, 9), range(-2, 3)))
series = product_set_series(H, A, n_max=8)
print("|A^m|:", series.cardinalities())

fit = fit_profile(series, max_pieces=2)
print("fitted slopes", fit.profile.slopes, "breakpoints", [round(b, 3) for b in fit.profile.breakpoints])
print("max deviation", round(fit.deviation, 4))

# %% polynomial growth and doubling
Z2 = product_set_series(Lattice(2), [(1, 0), (0, 1)], n_max=12)
print("Z^2 |A^12| <= 12^2 |A| ?", polynomial_growth_check(Z2, 12, 2))
print("stability constant of the Z^2 ball series:", round(stability_constant(Z2), 4))
