"""Exact group arithmetic behind a uniform oracle interface.

Elements are plain hashable Python values (tuples of ints or Fractions, or
an int index for Cayley tables).  Each backend keeps them in a canonical
form, so equality of elements is equality of payloads and they can be used
directly as dict keys and set members.

Backends that encode elements as fixed-length integer vectors also offer
``to_array`` / ``from_array`` / ``mul_arrays`` so that product-set
enumeration can run on numpy arrays.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import reduce

import numpy as np

from .rational import as_fraction, fmt


class BackendMismatch(ValueError):
    """An element payload does not belong to the oracle it was passed to."""


class CapExceeded(RuntimeError):
    """An enumeration grew past its state cap.

    ``partial`` holds whatever was computed before aborting (a count or a
    partial result, depending on the caller).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


DEFAULT_CAP = 10**7


class GroupOracle:
    tag = "abstract"
    abelian = False
    finite = False
    # length of the integer vector encoding, or None if no array path
    array_dim = None

    def identity(self):
        raise NotImplementedError

    def mul(self, g, h):
        raise NotImplementedError

    def inv(self, g):
        raise NotImplementedError

    def validate(self, g):
        raise NotImplementedError

    def commutator(self, g, h):
        """[g, h] = g^-1 h^-1 g h, so that gh = hg[g, h]."""
        return self.mul(self.mul(self.inv(g), self.inv(h)), self.mul(g, h))

    def power(self, g, n: int):
        if n < 0:
            g, n = self.inv(g), -n
        result = self.identity()
        base = g
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def product(self, elems):
        return reduce(self.mul, elems, self.identity())

    def conjugate(self, x, g):
        """x g x^-1."""
        return self.mul(self.mul(x, g), self.inv(x))

    def order(self, g, limit=4096):
        """Order of g, or None if it exceeds ``limit``."""
        e = self.identity()
        x = g
        for n in range(1, limit + 1):
            if x == e:
                return n
            x = self.mul(x, g)
        return None

    def sort_key(self, g):
        return g

    # -- serialization -------------------------------------------------
    def spec(self) -> dict:
        raise NotImplementedError

    def encode_value(self, g):
        return list(g)

    def decode_value(self, v):
        return tuple(v)

    def encode(self, g) -> dict:
        self.validate(g)
        return {"backend": self.tag, "value": self.encode_value(g)}

    def decode(self, obj):
        if obj.get("backend") != self.tag:
            raise BackendMismatch(f"expected {self.tag} element, got {obj.get('backend')!r}")
        g = self.decode_value(obj["value"])
        self.validate(g)
        return g

    # -- array path ----------------------------------------------------
    def to_array(self, elems) -> np.ndarray:
        return np.array([list(e) for e in elems], dtype=np.int64).reshape(-1, self.array_dim)

    def from_array(self, arr: np.ndarray):
        return [tuple(int(v) for v in row) for row in arr]

    def mul_arrays(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.spec()})"

    def __eq__(self, other):
        return type(self) is type(other) and self.spec() == other.spec()

    def __hash__(self):
        return hash((type(self).__name__, repr(sorted(self.spec().items()))))


def _check_int_tuple(g, n, tag):
    if not isinstance(g, tuple) or len(g) != n or not all(type(v) is int for v in g):
        raise BackendMismatch(f"{g!r} is not a {tag} element of length {n}")


class Lattice(GroupOracle):
    """The free abelian group Z^rank."""

    tag = "lattice"
    abelian = True

    def __init__(self, rank: int):
        if rank < 0:
            raise ValueError("rank must be nonnegative")
        self.rank = rank
        self.array_dim = rank

    def identity(self):
        return (0,) * self.rank

    def validate(self, g):
        _check_int_tuple(g, self.rank, self.tag)

    def mul(self, g, h):
        if len(g) != self.rank or len(h) != self.rank:
            raise BackendMismatch(f"lattice of rank {self.rank} got {g!r}, {h!r}")
        return tuple(a + b for a, b in zip(g, h))

    def inv(self, g):
        return tuple(-a for a in g)

    def spec(self):
        return {"backend": self.tag, "rank": self.rank}

    def mul_arrays(self, x, y):
        return x + y


class CyclicProduct(GroupOracle):
    """Z/q_1 x ... x Z/q_k with residues stored in [0, q_i)."""

    tag = "cyclic"
    abelian = True
    finite = True

    def __init__(self, moduli):
        self.moduli = tuple(int(q) for q in moduli)
        if any(q < 1 for q in self.moduli):
            raise ValueError("moduli must be positive")
        self.array_dim = len(self.moduli)
        self._q = np.array(self.moduli, dtype=np.int64)

    def identity(self):
        return (0,) * len(self.moduli)

    def validate(self, g):
        _check_int_tuple(g, len(self.moduli), self.tag)
        if any(not 0 <= a < q for a, q in zip(g, self.moduli)):
            raise BackendMismatch(f"{g!r} is not reduced modulo {self.moduli}")

    def element(self, *coords):
        return tuple(int(a) % q for a, q in zip(coords, self.moduli))

    def mul(self, g, h):
        if len(g) != len(self.moduli) or len(h) != len(self.moduli):
            raise BackendMismatch(f"cyclic product {self.moduli} got {g!r}, {h!r}")
        return tuple((a + b) % q for a, b, q in zip(g, h, self.moduli))

    def inv(self, g):
        return tuple((-a) % q for a, q in zip(g, self.moduli))

    def size(self):
        return int(np.prod(self.moduli, dtype=object))

    def elements(self):
        return list(itertools.product(*(range(q) for q in self.moduli)))

    def spec(self):
        return {"backend": self.tag, "moduli": list(self.moduli)}

    def mul_arrays(self, x, y):
        return (x + y) % self._q


class InfiniteDihedral(GroupOracle):
    """Maps x -> a x + b of Z, a in {-1, +1}; payload (a, b).

    The product is composition: (g h)(x) = g(h(x)).
    """

    tag = "dihedral"
    array_dim = 2

    def identity(self):
        return (1, 0)

    def validate(self, g):
        _check_int_tuple(g, 2, self.tag)
        if g[0] not in (1, -1):
            raise BackendMismatch(f"{g!r}: sign must be +1 or -1")

    def mul(self, g, h):
        if len(g) != 2 or len(h) != 2:
            raise BackendMismatch(f"dihedral got {g!r}, {h!r}")
        a, b = g
        c, d = h
        return (a * c, a * d + b)

    def inv(self, g):
        a, b = g
        # x = a y + b  =>  y = a x - a b
        return (a, -a * b)

    def apply(self, g, x: int) -> int:
        return g[0] * x + g[1]

    def spec(self):
        return {"backend": self.tag}

    def mul_arrays(self, x, y):
        out = np.empty_like(x)
        out[:, 0] = x[:, 0] * y[:, 0]
        out[:, 1] = x[:, 0] * y[:, 1] + x[:, 1]
        return out


class Unitriangular(GroupOracle):
    """k x k upper unitriangular matrices over Z or Q.

    Payload: the strictly upper entries in row-major order, as ints
    (``ring="integer"``) or Fractions (``ring="rational"``).  For k = 3 the
    payload (a, b, c) is the matrix [[1, a, b], [0, 1, c], [0, 0, 1]].
    """

    tag = "unitriangular"

    def __init__(self, k: int, ring: str = "integer"):
        if k < 1:
            raise ValueError("k must be >= 1")
        if ring not in ("integer", "rational"):
            raise ValueError("ring must be 'integer' or 'rational'")
        self.k = k
        self.ring = ring
        self.positions = [(i, j) for i in range(k) for j in range(i + 1, k)]
        self.index = {p: n for n, p in enumerate(self.positions)}
        self.abelian = k <= 2
        self._scalar = int if ring == "integer" else Fraction
        if ring == "integer":
            self.array_dim = len(self.positions)
        # for each position (i, j): list of (index of (i, l), index of (l, j))
        self._terms = [
            [(self.index[(i, l)], self.index[(l, j)]) for l in range(i + 1, j)]
            for (i, j) in self.positions
        ]

    def identity(self):
        return (self._scalar(0),) * len(self.positions)

    def validate(self, g):
        if not isinstance(g, tuple) or len(g) != len(self.positions):
            raise BackendMismatch(f"{g!r} is not a UT({self.k}) payload")
        want = int if self.ring == "integer" else Fraction
        if not all(type(v) is want for v in g):
            raise BackendMismatch(f"{g!r}: entries must be {want.__name__}")

    def element(self, entries=None):
        """Build an element from a dict {(i, j): value} (0-based, i < j)."""
        vals = [self._scalar(0)] * len(self.positions)
        for (i, j), v in (entries or {}).items():
            vals[self.index[(i, j)]] = self._scalar(as_fraction(v)) if self.ring == "rational" else int(v)
        return tuple(vals)

    def from_matrix(self, m):
        k = self.k
        conv = (lambda v: as_fraction(v)) if self.ring == "rational" else int
        if len(m) != k or any(len(row) != k for row in m):
            raise BackendMismatch(f"expected a {k}x{k} matrix")
        for i in range(k):
            for j in range(i + 1):
                if conv(m[i][j]) != (1 if i == j else 0):
                    raise BackendMismatch("matrix is not upper unitriangular")
        g = tuple(conv(m[i][j]) for (i, j) in self.positions)
        self.validate(g)
        return g

    def to_matrix(self, g):
        k = self.k
        one, zero = self._scalar(1), self._scalar(0)
        m = [[one if i == j else zero for j in range(k)] for i in range(k)]
        for (i, j), v in zip(self.positions, g):
            m[i][j] = v
        return m

    def mul(self, g, h):
        n = len(self.positions)
        if len(g) != n or len(h) != n:
            raise BackendMismatch(f"UT({self.k}) got {g!r}, {h!r}")
        return tuple(
            g[p] + h[p] + sum(g[a] * h[b] for a, b in terms)
            for p, terms in enumerate(self._terms)
        )

    def inv(self, g):
        # solve g * y = I column by column, processing entries by increasing j - i
        y = [self._scalar(0)] * len(self.positions)
        order = sorted(range(len(self.positions)), key=lambda p: self.positions[p][1] - self.positions[p][0])
        for p in order:
            y[p] = -g[p] - sum(g[a] * y[b] for a, b in self._terms[p])
        return tuple(y)

    def spec(self):
        return {"backend": self.tag, "k": self.k, "ring": self.ring}

    def encode_value(self, g):
        m = self.to_matrix(g)
        if self.ring == "integer":
            return [[int(v) for v in row] for row in m]
        return [[fmt(v) for v in row] for row in m]

    def decode_value(self, v):
        return self.from_matrix(v)

    def mul_arrays(self, x, y):
        out = x + y
        for p, terms in enumerate(self._terms):
            for a, b in terms:
                out[:, p] += x[:, a] * y[:, b]
        return out


def heisenberg() -> Unitriangular:
    """Integer Heisenberg group, payload (a, b, c) for [[1,a,b],[0,1,c],[0,0,1]]."""
    return Unitriangular(3, "integer")


class CayleyGroup(GroupOracle):
    """A finite group given by its multiplication table on indices 0..n-1."""

    tag = "cayley"
    finite = True
    MAX_ORDER = 512

    def __init__(self, table, name: str = "cayley", params: dict | None = None, labels=None):
        t = np.asarray(table, dtype=np.int64)
        n = t.shape[0]
        if t.shape != (n, n):
            raise ValueError("Cayley table must be square")
        if n > self.MAX_ORDER:
            raise ValueError(f"Cayley groups are limited to order {self.MAX_ORDER}")
        if not all(sorted(row) == list(range(n)) for row in t.tolist()):
            raise ValueError("Cayley table rows must be permutations (Latin square)")
        self.table = t
        self._rows = [tuple(row) for row in t.tolist()]
        self.name = name
        self.params = dict(params or {})
        self.labels = list(labels) if labels is not None else None
        e = [i for i in range(n) if self._rows[i] == tuple(range(n))]
        if len(e) != 1:
            raise ValueError("Cayley table has no two-sided identity")
        self._e = e[0]
        self._inv = [self._rows[i].index(self._e) for i in range(n)]
        if any(self._rows[self._inv[i]][i] != self._e for i in range(n)):
            raise ValueError("Cayley table inverses are not two-sided")
        self.abelian = bool(np.array_equal(t, t.T))
        self.array_dim = None

    def check_associative(self, samples=None, seed=0):
        """Exhaustive for small orders, random triples otherwise."""
        n = len(self._rows)
        rows = self._rows
        if samples is None and n <= 64:
            triples = itertools.product(range(n), repeat=3)
        else:
            rng = np.random.default_rng(seed)
            triples = rng.integers(0, n, size=(samples or 20000, 3)).tolist()
        return all(rows[rows[a][b]][c] == rows[a][rows[b][c]] for a, b, c in triples)

    def __len__(self):
        return len(self._rows)

    def size(self):
        return len(self._rows)

    def elements(self):
        return list(range(len(self._rows)))

    def identity(self):
        return self._e

    def validate(self, g):
        if type(g) is not int or not 0 <= g < len(self._rows):
            raise BackendMismatch(f"{g!r} is not an index of {self.name}")

    def mul(self, g, h):
        return self._rows[g][h]

    def inv(self, g):
        return self._inv[g]

    def spec(self):
        if self.params.get("family"):
            return {"backend": self.tag, **self.params}
        return {"backend": self.tag, "table": self.table.tolist()}

    def encode_value(self, g):
        return int(g)

    def decode_value(self, v):
        return int(v)

    def __eq__(self, other):
        return isinstance(other, CayleyGroup) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash(self.table.tobytes())


def semidirect_cyclic(n: int, m: int, a: int) -> CayleyGroup:
    """Z/n x| Z/m where the generator of Z/m acts on Z/n by x -> a x.

    Element (x, y) has index x * m + y; (x, y)(x', y') = (x + a^y x', y + y').
    ``a = n - 1, m = 2`` is the dihedral group of order 2n.
    """
    if pow(a, m, n) != 1 % n:
        raise ValueError(f"{a}^{m} is not 1 modulo {n}")
    size = n * m
    table = np.empty((size, size), dtype=np.int64)
    for x, y, x2, y2 in itertools.product(range(n), range(m), range(n), range(m)):
        table[x * m + y, x2 * m + y2] = ((x + pow(a, y, n) * x2) % n) * m + (y + y2) % m
    labels = [(x, y) for x in range(n) for y in range(m)]
    return CayleyGroup(table, name=f"Z{n}xZ{m}[{a}]", labels=labels,
                       params={"family": "semidirect", "n": n, "m": m, "a": a})


def dihedral_cayley(n: int) -> CayleyGroup:
    """Dihedral group of order 2n: index 2x is the rotation r^x, 2x + 1 is r^x s."""
    g = semidirect_cyclic(n, 2, n - 1 if n > 2 else 1)
    g.params = {"family": "dihedral", "n": n}
    g.name = f"D{n}"
    return g


def cyclic_cayley(n: int) -> CayleyGroup:
    table = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    return CayleyGroup(table, name=f"Z{n}", params={"family": "cyclic", "n": n})


def subgroup_closure(oracle: GroupOracle, gens, cap: int = DEFAULT_CAP) -> frozenset:
    """The subgroup generated by ``gens`` (must be finite within ``cap``)."""
    e = oracle.identity()
    gens = list(gens) + [oracle.inv(g) for g in gens]
    seen = {e}
    frontier = [e]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = oracle.mul(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > cap:
                        raise CapExceeded(f"subgroup closure passed {cap} elements", len(seen))
        frontier = nxt
    return frozenset(seen)


def is_subgroup(oracle: GroupOracle, elems) -> bool:
    s = set(elems)
    if oracle.identity() not in s:
        return False
    return all(oracle.inv(x) in s for x in s) and all(oracle.mul(x, y) in s for x in s for y in s)


def oracle_from_spec(spec: dict) -> GroupOracle:
    """Build an oracle from its JSON description (see ``GroupOracle.spec``)."""
    spec = dict(spec)
    kind = spec.pop("backend", None)
    if kind == "lattice":
        return Lattice(int(spec.pop("rank")))
    if kind == "cyclic":
        return CyclicProduct(spec.pop("moduli"))
    if kind == "dihedral":
        return InfiniteDihedral()
    if kind == "heisenberg":
        return heisenberg()
    if kind == "unitriangular":
        return Unitriangular(int(spec.pop("k")), spec.pop("ring", "integer"))
    if kind == "cayley":
        family = spec.pop("family", None)
        if family == "dihedral":
            return dihedral_cayley(int(spec["n"]))
        if family == "cyclic":
            return cyclic_cayley(int(spec["n"]))
        if family == "semidirect":
            return semidirect_cyclic(int(spec["n"]), int(spec["m"]), int(spec["a"]))
        if "table" in spec:
            return CayleyGroup(spec["table"])
        raise ValueError(f"unknown Cayley family {family!r}")
    raise ValueError(f"unknown backend {kind!r}")


def parse_element(oracle: GroupOracle, value):
    """Element from a config value: a bare payload or a backend-tagged dict."""
    if isinstance(value, dict):
        return oracle.decode(value)
    if isinstance(oracle, Unitriangular) and value and isinstance(value[0], list):
        return oracle.from_matrix(value)
    if isinstance(oracle, CayleyGroup):
        g = int(value)
    elif isinstance(oracle, CyclicProduct):
        g = oracle.element(*value)
    elif isinstance(oracle, Unitriangular) and oracle.ring == "rational":
        g = tuple(as_fraction(v) for v in value)
    else:
        g = tuple(int(v) for v in value)
    oracle.validate(g)
    return g
