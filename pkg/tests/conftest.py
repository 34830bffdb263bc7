from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from nilgrowth.groups import (
    CyclicProduct,
    InfiniteDihedral,
    Lattice,
    Unitriangular,
    dihedral_cayley,
    heisenberg,
    semidirect_cyclic,
)

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

small = st.integers(-20, 20)

BACKENDS = {
    "lattice": (Lattice(3), st.tuples(small, small, small)),
    "cyclic": (CyclicProduct([6, 10]), st.tuples(st.integers(0, 5), st.integers(0, 9))),
    "dihedral": (InfiniteDihedral(), st.tuples(st.sampled_from([1, -1]), small)),
    "heisenberg": (heisenberg(), st.tuples(small, small, small)),
    "ut4": (Unitriangular(4), st.tuples(*[small] * 6)),
    "ut3q": (Unitriangular(3, "rational"),
             st.tuples(*[st.fractions(min_value=-5, max_value=5, max_denominator=7)] * 3)),
    "cayley_d12": (dihedral_cayley(12), st.integers(0, 23)),
    "cayley_semi": (semidirect_cyclic(7, 3, 2), st.integers(0, 20)),
}

NAMES = sorted(BACKENDS)
