"""Exact rational helpers: "p/q" strings and small Fraction linear algebra."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to a Fraction.

    Floats are rejected on purpose: every length and mass that enters an
    exact computation must be given exactly.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def fmt(x) -> str:
    x = as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(row_echelon(rows)[1])


def row_echelon(rows):
    """Reduced row echelon form over Q.

    Returns (matrix, pivot_columns).
    """
    m = [[as_fraction(v) for v in r] for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant of a square matrix by fraction-exact elimination."""
    m = [list(r) for r in rows]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        piv = m[c][c]
        d *= piv
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / piv
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return d


def solve_in_span(basis: Sequence[Sequence[Fraction]], target: Sequence[Fraction]):
    """Coefficients c with sum_j c_j basis[j] == target, or None if target is
    outside the span. ``basis`` must be linearly independent."""
    r = len(basis)
    n = len(target)
    # augmented system: columns are basis vectors
    aug = [[basis[j][i] for j in range(r)] + [target[i]] for i in range(n)]
    red, piv = row_echelon(aug)
    if r in piv:
        return None
    coeffs = [Fraction(0)] * r
    for row, c in zip(red, piv):
        coeffs[c] = row[r]
    return coeffs


def nullspace_vector(vectors: Sequence[Sequence[Fraction]]):
    """A nonzero rational relation sum_j c_j v_j = 0, or None if independent."""
    r = len(vectors)
    if r == 0:
        return None
    n = len(vectors[0])
    mat = [[vectors[j][i] for j in range(r)] for i in range(n)]
    red, piv = row_echelon(mat)
    free = [c for c in range(r) if c not in piv]
    if not free:
        return None
    f = free[0]
    coeffs = [Fraction(0)] * r
    coeffs[f] = Fraction(1)
    for row, c in zip(red, piv):
        coeffs[c] = -row[f]
    return coeffs
