"""Exact nilpotent Lie machinery on strictly upper triangular rational matrices.

A NilMatrix stores the strictly upper entries of a k x k matrix in the same
row-major order as the payload of ``Unitriangular(k, "rational")``, so
``mat_exp`` and ``mat_log`` move between the two without reshuffling.
exp and log are finite series because X^k = 0.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Union

from .groups import BackendMismatch, Unitriangular
from .rational import as_fraction, fmt, nullspace_vector, solve_in_span


@dataclass(frozen=True)
class NilMatrix:
    k: int
    entries: tuple

    @classmethod
    def zero(cls, k):
        return cls(k, (Fraction(0),) * (k * (k - 1) // 2))

    @classmethod
    def from_dense(cls, m):
        k = len(m)
        for i in range(k):
            for j in range(i + 1):
                if m[i][j] != 0:
                    raise ValueError("matrix is not strictly upper triangular")
        return cls(k, tuple(as_fraction(m[i][j]) for i in range(k) for j in range(i + 1, k)))

    @classmethod
    def from_dict(cls, k, entries):
        """From {(i, j): value} with 1-based indices, as in E_12."""
        m = [[Fraction(0)] * k for _ in range(k)]
        for (i, j), v in entries.items():
            m[i - 1][j - 1] = as_fraction(v)
        return cls.from_dense(m)

    def dense(self):
        k = self.k
        m = [[Fraction(0)] * k for _ in range(k)]
        it = iter(self.entries)
        for i in range(k):
            for j in range(i + 1, k):
                m[i][j] = next(it)
        return m

    def is_zero(self):
        return not any(self.entries)

    def __add__(self, other):
        return NilMatrix(self.k, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other):
        return NilMatrix(self.k, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self):
        return NilMatrix(self.k, tuple(-a for a in self.entries))

    def __mul__(self, c):
        c = as_fraction(c)
        return NilMatrix(self.k, tuple(c * a for a in self.entries))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return NilMatrix.from_dense(_matmul(self.dense(), other.dense()))

    def bracket(self, other):
        """Matrix Lie bracket XY - YX."""
        return self @ other - other @ self

    def __str__(self):
        parts = [f"{fmt(v)}*E{i + 1}{j + 1}"
                 for (i, j), v in zip(_positions(self.k), self.entries) if v != 0]
        return " + ".join(parts) or "0"


def E(k, i, j) -> NilMatrix:
    """Elementary matrix E_ij (1-based) of size k."""
    return NilMatrix.from_dict(k, {(i, j): 1})


def _positions(k):
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


def _matmul(a, b):
    n = len(a)
    return [[sum((a[i][l] * b[l][j] for l in range(n)), Fraction(0)) for j in range(n)] for i in range(n)]


def rational_ut(k) -> Unitriangular:
    return Unitriangular(k, "rational")


def mat_exp(X: NilMatrix):
    """exp X = sum_{j<k} X^j / j!, returned as a UT(k, Q) payload."""
    k = X.k
    ident = [[Fraction(int(i == j)) for j in range(k)] for i in range(k)]
    total = [row[:] for row in ident]
    power = ident
    d = X.dense()
    for j in range(1, k):
        power = _matmul(power, d)
        c = Fraction(1, factorial(j))
        total = [[t + c * p for t, p in zip(tr, pr)] for tr, pr in zip(total, power)]
    return rational_ut(k).from_matrix(total)


def mat_log(g, k=None) -> NilMatrix:
    """log g = sum_{j>=1} (-1)^{j+1} (g - I)^j / j for a unitriangular payload."""
    if k is None:
        n = len(g)
        k = next((k for k in range(1, n + 3) if k * (k - 1) // 2 == n), None)
        if k is None:
            raise BackendMismatch(f"{g!r} is not a unitriangular payload")
    if len(g) != k * (k - 1) // 2:
        raise BackendMismatch(f"{g!r} is not a UT({k}) payload")
    Y = NilMatrix(k, tuple(as_fraction(v) for v in g))
    yd = Y.dense()
    total = NilMatrix.zero(k)
    power = yd
    for j in range(1, k):
        term = NilMatrix.from_dense(power) * Fraction((-1) ** (j + 1), j)
        total = total + term
        power = _matmul(power, yd)
    return total


def group_commutator_log(X: NilMatrix, Y: NilMatrix) -> NilMatrix:
    """log [exp X, exp Y] with [g, h] = g^-1 h^-1 g h."""
    G = rational_ut(X.k)
    return mat_log(G.commutator(mat_exp(X), mat_exp(Y)), X.k)


# -- formal commutator words -----------------------------------------------

@dataclass(frozen=True)
class Leaf:
    index: int  # 1-based generator index
    sign: int = 1

    @property
    def length(self):
        return 1

    def inverse(self):
        return Leaf(self.index, -self.sign)

    def __str__(self):
        return f"{self.index}" + ("^-1" if self.sign < 0 else "")


@dataclass(frozen=True)
class Bracket:
    left: "Word"
    right: "Word"
    sign: int = 1

    @property
    def length(self):
        return self.left.length + self.right.length

    def inverse(self):
        return Bracket(self.left, self.right, -self.sign)

    def __str__(self):
        return f"[{self.left},{self.right}]" + ("^-1" if self.sign < 0 else "")


Word = Union[Leaf, Bracket]

_TOKEN = re.compile(r"\s*(\[|\]|,|\^-1|\d+)")


def parse_word(text: str) -> Word:
    """Parse bracket notation such as ``[[1,2^-1],[1^-1,3]]^-1``."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse word at {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()

    def at(i):
        if i >= len(tokens):
            raise ValueError(f"unexpected end of {text!r}")
        return tokens[i]

    def parse(i):
        tok = at(i)
        if tok == "[":
            left, i = parse(i + 1)
            if at(i) != ",":
                raise ValueError(f"expected ',' in {text!r}")
            right, i = parse(i + 1)
            if at(i) != "]":
                raise ValueError(f"expected ']' in {text!r}")
            w, i = Bracket(left, right), i + 1
        elif tok.isdigit():
            w, i = Leaf(int(tok)), i + 1
        else:
            raise ValueError(f"unexpected {tok!r} in {text!r}")
        if i < len(tokens) and tokens[i] == "^-1":
            w, i = w.inverse(), i + 1
        return w, i

    w, end = parse(0)
    if end != len(tokens):
        raise ValueError(f"trailing input in {text!r}")
    return w


def eval_word(w: Word, gens) -> NilMatrix:
    """X_w: X_i for i, -X_i for i^-1, log[exp X_w1, exp X_w2] for [w1, w2],
    and the negative of that for [w1, w2]^-1."""
    if isinstance(w, Leaf):
        if not 1 <= w.index <= len(gens):
            raise IndexError(f"generator {w.index} out of range 1..{len(gens)}")
        x = gens[w.index - 1]
    else:
        x = group_commutator_log(eval_word(w.left, gens), eval_word(w.right, gens))
    return -x if w.sign < 0 else x


def weight(w: Word, N) -> Fraction:
    """N^w: N_i on leaves, multiplicative over brackets, sign-blind."""
    if isinstance(w, Leaf):
        return as_fraction(N[w.index - 1])
    return weight(w.left, N) * weight(w.right, N)


@dataclass(frozen=True)
class WordTable:
    words: tuple
    X: tuple
    weights: tuple
    lengths: tuple
    r: int

    def __len__(self):
        return len(self.words)

    def to_json(self):
        return {
            "r": self.r,
            "words": [
                {"word": str(w), "length": n, "weight": fmt(c), "X": [[fmt(v) for v in row] for row in x.dense()]}
                for w, x, c, n in zip(self.words, self.X, self.weights, self.lengths)
            ],
        }

    @classmethod
    def from_json(cls, obj):
        words, X, weights, lengths = [], [], [], []
        for row in obj["words"]:
            words.append(parse_word(row["word"]))
            X.append(NilMatrix.from_dense([[as_fraction(v) for v in r] for r in row["X"]]))
            weights.append(as_fraction(row["weight"]))
            lengths.append(int(row["length"]))
        return cls(tuple(words), tuple(X), tuple(weights), tuple(lengths), int(obj["r"]))


def enumerate_words(gens, N) -> WordTable:
    """All canonical words with X_w != 0, in non-decreasing length.

    Canonical words have positive leaves and positive bracket signs, and a
    bracket [w_a, w_b] is only formed for table positions a < b: the other
    orientation and the sign variants give +-X_w of the same weight.  Words of
    length >= k vanish in UT(k), which bounds the search.
    """
    gens = list(gens)
    if not gens:
        return WordTable((), (), (), (), 0)
    k = gens[0].k
    words, X, lengths = [], [], []
    for i, x in enumerate(gens, start=1):
        if x.is_zero():
            raise ValueError(f"generator {i} is zero")
        words.append(Leaf(i))
        X.append(x)
        lengths.append(1)
    for L in range(2, k):
        level = []
        n = len(words)
        for a, b in itertools.combinations(range(n), 2):
            if lengths[a] + lengths[b] != L:
                continue
            x = group_commutator_log(X[a], X[b])
            if not x.is_zero():
                level.append((Bracket(words[a], words[b]), x))
        for w, x in level:
            words.append(w)
            X.append(x)
            lengths.append(L)
    weights = [weight(w, N) for w in words]
    return WordTable(tuple(words), tuple(X), tuple(weights), tuple(lengths), len(gens))


class DependentGenerators(ValueError):
    def __init__(self, certificate):
        super().__init__(f"generator logs are linearly dependent: coefficients {certificate}")
        self.certificate = certificate


class OutsideSpan(ValueError):
    def __init__(self, word):
        super().__init__(f"X_{word} is not in the span of the generators")
        self.word = word


@dataclass(frozen=True)
class AlphaMatrix:
    rows: tuple  # rows[i][j] = alpha_{i,j}

    def to_json(self):
        return [[fmt(v) for v in row] for row in self.rows]


def alpha_coeffs(table: WordTable) -> AlphaMatrix:
    """alpha_{i,j} with X_{w_i} = sum_j alpha_{i,j} X_j, solved exactly."""
    r = table.r
    basis = [list(x.entries) for x in table.X[:r]]
    cert = nullspace_vector(basis)
    if cert is not None:
        raise DependentGenerators(cert)
    rows = []
    for w, x in zip(table.words, table.X):
        c = solve_in_span(basis, list(x.entries))
        if c is None:
            raise OutsideSpan(w)
        rows.append(tuple(c))
    return AlphaMatrix(tuple(rows))
