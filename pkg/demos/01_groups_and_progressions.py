"""Groups, nilprogressions and their dilation norms.

Run with ``python demos/01_groups_and_progressions.py``.
"""

from fractions import Fraction

from nilgrowth.groups import InfiniteDihedral, Lattice, heisenberg
from nilgrowth.nilprog import Nilprogression, as_coset, check_normal_form, enumerate_dilate, norm_HPX, norm_P

# %% Heisenberg arithmetic
# Elements of the integer Heisenberg group are upper unitriangular 3x3
# matrices, stored as (a, b, c) with b the central corner.
H = heisenberg()
x, y = (1, 0, 0), (0, 0, 1)
print("xy =", H.mul(x, y), " yx =", H.mul(y, x))
print("[x, y] =", H.commutator(x, y))

# %% A nilprogression and its dilates
# P(x, y; 2, 2): words using x^{+-1} at most twice and y^{+-1} at most twice.
P = Nilprogression(H, [x, y], [2, 2])
for t in ("1/2", 1, 2):
    print(f"|P^{t}| =", len(enumerate_dilate(P, t)))

# %% Norms
# ||g||_P is the smallest t with g in P^t; on Z it is |k| / N.
Z = Nilprogression(Lattice(1), [(1,)], [10])
print("||7||_P on Z with N = 10:", norm_P(Z, (7,)))
print("||[x, y]||_P in Heisenberg:", norm_P(P, H.commutator(x, y)))

# The infinite dihedral group is not nilpotent, but the translation
# subgroup carries a progression; conjugating by the reflection through
# X = {1, s} folds b and -b together.
D = InfiniteDihedral()
T = as_coset(Nilprogression(D, [(1, 1)], [10]))
X = [(1, 0), (-1, 0)]
for b in (-7, 0, 13):
    print(f"||(+1,{b})||_HP,X = {norm_HPX(T, X, (1, b))}")

# %% Normal form
rep = check_normal_form(Nilprogression(H, [x, y, (0, 1, 0)], [3, 3, 9]), Fraction(16))
print("Heisenberg box in 16-normal form:", rep.holds, f"(|P| = {rep.size}, volume {rep.volume})")
