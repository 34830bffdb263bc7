import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilgrowth.groups import CapExceeded, CyclicProduct, InfiniteDihedral, Lattice, heisenberg
from nilgrowth.nilprog import (
    CosetNilprogression,
    DilationNorm,
    Nilprogression,
    as_coset,
    check_normal_form,
    enumerate_dilate,
    iterated_product,
    nilpotency_class,
    norm_HP,
    norm_HPX,
    norm_P,
    pareto_ball,
)


def word_oracle(G, gens, budgets):
    """Independent oracle: evaluate every word obeying the per-generator budgets."""
    letters = [(i, s) for i in range(len(gens)) for s in (1, -1)]
    out = set()

    def walk(g, used):
        out.add(g)
        for i, s in letters:
            if used[i] < budgets[i]:
                x = gens[i] if s == 1 else G.inv(gens[i])
                walk(G.mul(g, x), used[:i] + (used[i] + 1,) + used[i + 1:])

    walk(G.identity(), (0,) * len(gens))
    return out


def test_integer_progression_half_dilate():
    P = Nilprogression(Lattice(1), [(1,)], [10])
    assert enumerate_dilate(P, "1/2") == {(k,) for k in range(-5, 6)}
    assert norm_P(P, (5,)) == Fraction(1, 2)
    assert norm_P(P, (7,)) == Fraction(7, 10)
    assert norm_P(P, (-5,)) == Fraction(1, 2)
    assert norm_P(P, (0,)) == 0


def test_heisenberg_progression_matches_word_oracle():
    H = heisenberg()
    gens = [(1, 0, 0), (0, 0, 1)]
    P = Nilprogression(H, gens, [2, 2])
    got = enumerate_dilate(P, 1)
    assert len(got) == 87
    assert got == word_oracle(H, gens, (2, 2))


def test_small_dilate_is_trivial():
    P = Nilprogression(heisenberg(), [(1, 0, 0), (0, 0, 1)], [3, 3])
    assert enumerate_dilate(P, "1/4") == {(0, 0, 0)}
    with pytest.raises(ValueError):
        P.dilate(0)


def test_nilpotency_class():
    H = heisenberg()
    assert nilpotency_class(Lattice(2), [(1, 0), (0, 1)]) == 1
    assert nilpotency_class(H, [(1, 0, 0), (0, 0, 1)]) == 2
    # the infinite dihedral group is not nilpotent
    assert nilpotency_class(InfiniteDihedral(), [(-1, 0), (-1, 1)], depth_cap=6) is None
    with pytest.raises(ValueError):
        Nilprogression(InfiniteDihedral(), [(-1, 0), (-1, 1)], [1, 1])


def test_lengths_validated():
    with pytest.raises(ValueError):
        Nilprogression(Lattice(1), [(1,)], [0])
    with pytest.raises(ValueError):
        Nilprogression(Lattice(1), [(1,)], [1, 2])


def test_normal_form_examples():
    box = check_normal_form(Nilprogression(Lattice(2), [(1, 0), (0, 1)], [5, 7]), 1)
    assert box.holds and box.size == box.volume == 11 * 15

    bad = check_normal_form(Nilprogression(Lattice(1), [(1,), (2,)], [4, 4]), 1)
    assert not bad.holds_ii
    a, b, g = bad.witnesses["ii"]
    assert a != b and a[0] + 2 * a[1] == b[0] + 2 * b[1] == g[0]

    H = heisenberg()
    heis = check_normal_form(Nilprogression(H, [(1, 0, 0), (0, 0, 1), (0, 1, 0)], [3, 3, 9]), 16)
    assert heis.holds and heis.size == 1237 and heis.volume == 931
    cube = check_normal_form(Nilprogression(H, [(1, 0, 0), (0, 0, 1), (0, 1, 0)], [3, 3, 27]), 16)
    assert cube.holds and cube.volume == 7 * 7 * 55 and cube.size == 3001
    tight = check_normal_form(Nilprogression(H, [(1, 0, 0), (0, 0, 1), (0, 1, 0)], [3, 3, 9]), 1)
    assert tight.holds_i and tight.holds_ii and not tight.holds_iii


def test_dihedral_translation_norms():
    P = Nilprogression(InfiniteDihedral(), [(1, 1)], [10])
    assert [norm_P(P, (1, b)) for b in (0, 3, -7, 10)] == [0, Fraction(3, 10), Fraction(7, 10), 1]
    hp = as_coset(P)
    X = [(1, 0), (-1, 0)]
    assert norm_HPX(hp, X, (-1, 0)) == 0
    assert norm_HPX(hp, X, (1, 4)) == Fraction(2, 5)
    assert norm_HPX(hp, X, (-1, 3)) == Fraction(3, 10)
    assert norm_HPX(hp, X, (1, 7)) == Fraction(7, 10)
    assert norm_HPX(hp, X, (1, 0)) == 0


def test_coset_norm_vanishes_on_H():
    C = CyclicProduct([6, 10])
    HP = CosetNilprogression([(0, 0), (3, 0)], Nilprogression(C, [(0, 1)], [5]))
    assert norm_HP(HP, (3, 0)) == 0
    assert norm_HP(HP, (3, 2)) == Fraction(2, 5)
    assert norm_HP(HP, (0, 7)) == Fraction(3, 5)
    assert norm_HP(HP, (1, 0)) == math.inf
    assert len(enumerate_dilate(HP, 1)) == 20
    assert norm_HPX(HP, [(0, 0), (1, 0)], (1, 0)) == math.inf


def test_coset_progression_validation():
    D = InfiniteDihedral()
    P = Nilprogression(D, [(1, 1)], [10])
    with pytest.raises(ValueError):
        CosetNilprogression([(1, 0), (-1, 0)], P)  # not normalized
    C = CyclicProduct([6, 10])
    with pytest.raises(ValueError):
        CosetNilprogression([(0, 0), (2, 0)], Nilprogression(C, [(0, 1)], [5]))  # not a subgroup


def test_norm_outside_span_in_infinite_group_hits_cap():
    P = Nilprogression(Lattice(2), [(1, 0)], [1])
    with pytest.raises(CapExceeded):
        norm_P(P, (0, 1), cap=2000)
    assert norm_P(P, (0, 1), t_max=8) == math.inf


def test_pareto_ball_cap():
    with pytest.raises(CapExceeded):
        pareto_ball(heisenberg(), [(1, 0, 0), (0, 0, 1)], (20, 20), cap=500)


def test_json_roundtrip():
    P = Nilprogression(heisenberg(), [(1, 0, 0), (0, 0, 1)], ["5/2", 3])
    assert Nilprogression.from_json(P.to_json()) == P
    C = CyclicProduct([6, 10])
    HP = CosetNilprogression([(0, 0), (3, 0)], Nilprogression(C, [(0, 1)], [5]))
    assert CosetNilprogression.from_json(HP.to_json()) == HP


# -- properties -----------------------------------------------------------------

HEIS = heisenberg()
HP_HEIS = Nilprogression(HEIS, [(1, 0, 0), (0, 0, 1)], [2, 3])
CALC = DilationNorm(HP_HEIS)
small = st.integers(-3, 3)
heis_elem = st.tuples(small, st.integers(-4, 4), small)


@settings(max_examples=150)
@given(heis_elem, heis_elem)
def test_norm_axioms_heisenberg(g, h):
    n = CALC.norm
    assert n(HEIS.identity()) == 0
    assert n(g) == n(HEIS.inv(g))
    assert n(HEIS.mul(g, h)) <= n(g) + n(h)


@settings(max_examples=60)
@given(st.fractions(min_value=Fraction(1, 4), max_value=3, max_denominator=4),
       st.fractions(min_value=Fraction(1, 4), max_value=3, max_denominator=4))
def test_dilation_monotone(s, t):
    s, t = sorted((s, t))
    a, b = enumerate_dilate(HP_HEIS, s), enumerate_dilate(HP_HEIS, t)
    assert a <= b


@settings(max_examples=40)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=2, unique=True),
       st.lists(st.integers(1, 3), min_size=2, max_size=2), st.integers(1, 3))
def test_abelian_dilate_is_iterated_product(gens, lengths, t):
    Z2 = Lattice(2)
    gens = [g for g in gens if g != (0, 0)]
    if not gens:
        return
    P = Nilprogression(Z2, gens, lengths[: len(gens)])
    base = enumerate_dilate(P, 1)
    assert enumerate_dilate(P, t) == iterated_product(Z2, base, t)


@settings(max_examples=60)
@given(st.integers(-40, 40))
def test_integer_norm_closed_form(k):
    P = Nilprogression(Lattice(1), [(1,)], [7])
    assert norm_P(P, (k,)) == Fraction(abs(k), 7)


@settings(max_examples=40)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 9)), min_size=1, max_size=3))
def test_norm_ball_membership(gs):
    # ||g|| <= t exactly when g lies in HP^t
    C = CyclicProduct([6, 10])
    HP = CosetNilprogression([(0, 0), (3, 0)], Nilprogression(C, [(0, 1), (2, 0)], [3, 1]))
    for t in (Fraction(1, 3), Fraction(2, 3), 1, 2):
        ball = enumerate_dilate(HP, t)
        for g in gs:
            assert (norm_HP(HP, g) <= t) == (g in ball)


def test_heisenberg_dilate_exceeds_iterated_product():
    # a word of P^2 need not split into two words of P; only containment holds
    H = heisenberg()
    P = Nilprogression(H, [(1, 0, 0), (0, 0, 1)], [1, 1])
    prod = iterated_product(H, enumerate_dilate(P, 1), 2)
    dil = enumerate_dilate(P, 2)
    assert prod < dil
    assert (len(prod), len(dil)) == (79, 87)
