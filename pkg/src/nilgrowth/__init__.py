"""Growth of product sets and convolution powers in groups of polynomial growth."""

from .groups import (
    BackendMismatch,
    CapExceeded,
    CayleyGroup,
    CyclicProduct,
    InfiniteDihedral,
    Lattice,
    Unitriangular,
    cyclic_cayley,
    dihedral_cayley,
    heisenberg,
    oracle_from_spec,
    semidirect_cyclic,
)
from .nilprog import (
    CosetNilprogression,
    DilationNorm,
    Nilprogression,
    check_normal_form,
    enumerate_dilate,
    norm_HP,
    norm_HPX,
    norm_P,
)

__version__ = "0.1.0"

__all__ = [
    "BackendMismatch", "CapExceeded", "CayleyGroup", "CyclicProduct", "InfiniteDihedral", "Lattice",
    "Unitriangular", "cyclic_cayley", "dihedral_cayley", "heisenberg", "oracle_from_spec",
    "semidirect_cyclic", "CosetNilprogression", "DilationNorm", "Nilprogression", "check_normal_form",
    "enumerate_dilate", "norm_HP", "norm_HPX", "norm_P",
]
