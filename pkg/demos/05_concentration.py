"""Concentration of signed sums and random products, and growth degrees."""

from nilgrowth.groups import Lattice, semidirect_cyclic
from nilgrowth.liealg import E
from nilgrowth.lo import LOInstance, bass_guivarch_degree, bernoulli_concentration, mam_experiment

Z = Lattice(1)
for v in ([1, 1, 1, 1], [1, 2, 4, 8], [1, 1, 2, 3, 5]):
    rho, x = bernoulli_concentration(LOInstance(Z, tuple((k,) for k in v)))
    print(f"rho{tuple(v)} = {rho} at {x[0]}")

# %% a planted subgroup
# 64 steps from the rotation subgroup of order 4 in Z/8 x| Z/2.
G = semidirect_cyclic(8, 2, 7)
planted = tuple([4, 12] * 32)
r = mam_experiment(LOInstance(G, planted), "1/2", fraction_target="9/10")
print(f"planted: sup = {r.sup} against 1/(eps sqrt n) = {r.threshold:.4f}; hypothesis {r.hypothesis}")
print("   subgroup of order", r.subgroup.order, "holds", r.subgroup.fraction, "of the steps")

# A handful of stray reflections spreads the walk over the whole group:
# the subgroup is still there, but the concentration hypothesis is lost.
strays = planted[:60] + (1, 3, 5, 9)
r = mam_experiment(LOInstance(G, strays), "1/2", fraction_target="9/10")
print(f"with strays: sup ~ {float(r.sup):.4f}; hypothesis {r.hypothesis}")
print("   subgroup of order", r.subgroup.order, "holds", r.subgroup.fraction, "of the steps")

# %% Bass-Guivarc'h degrees
print("Heisenberg:", bass_guivarch_degree([E(3, 1, 2), E(3, 2, 3)]))
print("UT(4):", bass_guivarch_degree([E(4, 1, 2), E(4, 2, 3), E(4, 3, 4)]))
