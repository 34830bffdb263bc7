"""From Lie words to a predicted growth profile.

The generators' logs span a nilpotent Lie algebra; commutator words give the
extra directions, the alpha matrix expresses them in the generators, and the
volume polynomial V(m) collects r x r minors.  Its log-log envelope is the
predicted profile.
"""

import math

from nilgrowth.growth import predict_volume_polynomial, tropicalize
from nilgrowth.liealg import E, alpha_coeffs, enumerate_words

for N in (2, 3, 4):
    table = enumerate_words([E(3, 1, 2), E(3, 2, 3), E(3, 1, 3)], [N, N, N**3])
    V = predict_volume_polynomial(table, alpha_coeffs(table))
    f = tropicalize(V)
    terms = " + ".join(f"{c}*m^{d}" for c, d in V.terms)
    print(f"N = {N}: V(m) = {terms}")
    print(f"   slopes {f.slopes}, breakpoint {f.breakpoints[1]:.4f} (log N = {math.log(N):.4f})")

# UT(4): the six elementary generators span the whole algebra, and the
# words of length two and three show up as extra rows of alpha.
gens = [E(4, i, j) for i in range(1, 5) for j in range(i + 1, 5)]
table = enumerate_words(gens, [1] * 6)
print("UT(4) words:", [str(w) for w in table.words])
print("UT(4) V(m) degrees:", [d for _, d in predict_volume_polynomial(table, alpha_coeffs(table)).terms])
