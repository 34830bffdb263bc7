"""Nilprogressions, coset nilprogressions, dilations and their norms.

A nilprogression P(v_1..v_r; N_1..N_r) is the set of values of words in the
v_i^{+-1} that use v_i (either sign) at most N_i times.  Words are budgeted
per generator rather than bounded in total length, so enumeration tracks a
usage vector per element and keeps only the Pareto-minimal usage vectors of
each element: a dominated vector can never reach anything its dominator
cannot.

The same Pareto table gives the dilation norm for free:
||g||_P = min over minimal usage vectors u of max_i u_i / N_i.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .groups import DEFAULT_CAP, CapExceeded, GroupOracle, is_subgroup, oracle_from_spec
from .rational import as_fraction, fmt

INF = math.inf
NILPOTENCY_DEPTH_CAP = 12


def nilpotency_class(oracle: GroupOracle, gens, depth_cap=NILPOTENCY_DEPTH_CAP, key=None):
    """Class of the group generated by ``gens`` (modulo ``key``'s kernel).

    Uses left-normed commutators [x_1, ..., x_{s+1}] in the generators and
    their inverses; these generate the (s+1)-th term of the lower central
    series, so the class is the first s at which all of them are trivial.
    Returns None if they have not vanished by ``depth_cap``.
    """
    key = key or (lambda g: g)
    e = key(oracle.identity())
    letters = list(gens) + [oracle.inv(g) for g in gens]
    level = {key(g): g for g in letters if key(g) != e}
    s = 0
    while level:
        if s >= depth_cap:
            return None
        s += 1
        nxt = {}
        for x in level.values():
            for g in letters:
                c = oracle.commutator(x, g)
                k = key(c)
                if k != e and k not in nxt:
                    nxt[k] = c
                    if len(nxt) > 100_000:
                        return None
        level = nxt
    return s


@dataclass(frozen=True)
class Nilprogression:
    oracle: GroupOracle
    generators: tuple
    lengths: tuple
    nilpotency: Optional[int] = field(default=None, compare=False)

    def __init__(self, oracle, generators, lengths, check_nilpotent=True):
        gens = tuple(generators)
        lens = tuple(as_fraction(n) for n in lengths)
        if len(gens) != len(lens):
            raise ValueError("need one length per generator")
        if any(n <= 0 for n in lens):
            raise ValueError("lengths must be positive")
        for g in gens:
            oracle.validate(g)
        object.__setattr__(self, "oracle", oracle)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "lengths", lens)
        s = None
        if check_nilpotent:
            s = nilpotency_class(oracle, gens)
            if s is None:
                raise ValueError("generators do not generate a nilpotent group within the depth cap")
        object.__setattr__(self, "nilpotency", s)

    @property
    def rank(self):
        return len(self.generators)

    def budgets(self, t=1):
        t = as_fraction(t)
        return tuple(math.floor(t * n) for n in self.lengths)

    def dilate(self, t) -> "Nilprogression":
        t = as_fraction(t)
        if t <= 0:
            raise ValueError("dilation parameter must be positive")
        return Nilprogression(self.oracle, self.generators, [t * n for n in self.lengths],
                              check_nilpotent=False)

    def to_json(self) -> dict:
        return {
            "group": self.oracle.spec(),
            "generators": [self.oracle.encode(g) for g in self.generators],
            "lengths": [fmt(n) for n in self.lengths],
        }

    @classmethod
    def from_json(cls, obj) -> "Nilprogression":
        oracle = oracle_from_spec(obj["group"])
        gens = [oracle.decode(g) for g in obj["generators"]]
        return cls(oracle, gens, [as_fraction(n) for n in obj["lengths"]])


@dataclass(frozen=True)
class CosetNilprogression:
    H: frozenset
    P: Nilprogression

    def __init__(self, H, P: Nilprogression, check=True):
        oracle = P.oracle
        H = frozenset(H) if H else frozenset([oracle.identity()])
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "P", P)
        if check:
            if not is_subgroup(oracle, H):
                raise ValueError("H is not a subgroup")
            for v in P.generators:
                if {oracle.conjugate(v, h) for h in H} != H:
                    raise ValueError(f"generator {v!r} does not normalize H")
            if nilpotency_class(oracle, P.generators, key=self.coset_key) is None:
                raise ValueError("generators are not nilpotent modulo H")

    @property
    def oracle(self):
        return self.P.oracle

    def coset_key(self, g):
        """Canonical representative of the coset Hg."""
        if len(self.H) == 1:
            return g
        mul = self.oracle.mul
        return min((mul(h, g) for h in self.H), key=self.oracle.sort_key)

    def dilate(self, t) -> "CosetNilprogression":
        return CosetNilprogression(self.H, self.P.dilate(t), check=False)

    def to_json(self) -> dict:
        d = self.P.to_json()
        d["H"] = [self.oracle.encode(h) for h in sorted(self.H, key=self.oracle.sort_key)]
        return d

    @classmethod
    def from_json(cls, obj):
        P = Nilprogression.from_json(obj)
        H = [P.oracle.decode(h) for h in obj.get("H", [])]
        return cls(H, P)


def as_coset(prog) -> CosetNilprogression:
    if isinstance(prog, CosetNilprogression):
        return prog
    return CosetNilprogression(None, prog, check=False)


def pareto_ball(oracle: GroupOracle, gens, budgets, key=None, cap=DEFAULT_CAP):
    """Map each reachable element (or coset representative under ``key``) to
    its list of Pareto-minimal usage vectors, for words whose usage of
    generator i is at most ``budgets[i]``.

    States are expanded layer by layer in total usage, so a vector added later
    can never strictly dominate one added earlier.
    """
    key = key or (lambda g: g)
    r = len(gens)
    e = key(oracle.identity())
    zero = (0,) * r
    table = {e: [zero]}
    letters = [(i, x) for i, v in enumerate(gens) for x in dict.fromkeys((v, oracle.inv(v)))]
    mul = oracle.mul
    layer = [(e, zero)]
    states = 1
    while layer:
        nxt = []
        for g, u in layer:
            for i, x in letters:
                if u[i] >= budgets[i]:
                    continue
                u2 = u[:i] + (u[i] + 1,) + u[i + 1:]
                h = key(mul(g, x))
                vecs = table.get(h)
                if vecs is None:
                    table[h] = [u2]
                elif any(all(a <= b for a, b in zip(w, u2)) for w in vecs):
                    continue
                else:
                    vecs.append(u2)
                nxt.append((h, u2))
                states += 1
                if states > cap:
                    raise CapExceeded(
                        f"dilate enumeration passed {cap} states ({len(table)} elements so far)",
                        len(table))
        layer = nxt
    return table


def _expand_cosets(hp: CosetNilprogression, reps):
    if len(hp.H) == 1:
        return frozenset(reps)
    mul = hp.oracle.mul
    return frozenset(mul(h, g) for g in reps for h in hp.H)


def enumerate_dilate(prog, t=1, cap=DEFAULT_CAP) -> frozenset:
    """The set P^t (or HP^t): all evaluations of words using v_i^{+-1} at most
    floor(t N_i) times each, pulled back through H for coset progressions."""
    hp = as_coset(prog)
    P = hp.P
    table = pareto_ball(P.oracle, P.generators, P.budgets(t), key=hp.coset_key, cap=cap)
    return _expand_cosets(hp, table)


def _min_norm(vecs, lengths):
    return min(max((Fraction(u) / n for u, n in zip(w, lengths)), default=Fraction(0)) for w in vecs)


class DilationNorm:
    """Exact ||g||_{HP} queries with cached Pareto balls at doubling radii."""

    def __init__(self, prog, cap=DEFAULT_CAP):
        self.hp = as_coset(prog)
        self.cap = cap
        self._levels = {}
        self._saturated = None

    @property
    def P(self):
        return self.hp.P

    def ball(self, T) -> dict:
        """Representative -> exact norm, for every element of HP^T."""
        T = as_fraction(T)
        if T not in self._levels:
            table = pareto_ball(self.P.oracle, self.P.generators, self.P.budgets(T),
                                key=self.hp.coset_key, cap=self.cap)
            self._levels[T] = {g: _min_norm(v, self.P.lengths) for g, v in table.items()}
        return self._levels[T]

    def _start(self):
        # smallest power of two with T * N_i >= 1 for all i
        T = Fraction(1)
        while any(T * n < 1 for n in self.P.lengths):
            T *= 2
        return T

    def search(self, done, t_max=None):
        """Grow the radius until ``done(ball)`` returns a value other than None.

        ``ball`` maps coset representatives to exact norms for every element
        of HP^T.  Returns (value, ball); value is None when the ball stopped
        growing under one more use of every generator (it is then all of
        <P>H) or when ``t_max`` was reached.  Hitting the cap raises.
        """
        if t_max is not None:
            b = self.ball(t_max)
            return done(b), b
        # any cached ball already holds exact norms for all of its elements
        T = max(self._levels) if self._levels else self._start()
        while True:
            b = self.ball(T)
            v = done(b)
            if v is not None:
                return v, b
            if self._saturated is not None and T >= self._saturated:
                return None, b
            b2 = self.ball(2 * T)
            if len(b2) == len(b):
                self._saturated = T
                return None, b
            self._levels.pop(T, None)
            T *= 2

    def norm(self, g, t_max=None):
        """||g||_{HP}.

        Without ``t_max`` the radius doubles until g is found, or the ball
        stops growing (g lies outside <P>H, norm +inf), or the cap is hit
        (CapExceeded).  With ``t_max``, +inf means "larger than t_max".
        """
        k = self.hp.coset_key(g)
        v, _ = self.search(lambda b: b.get(k), t_max)
        return INF if v is None else v


def norm_P(P: Nilprogression, g, cap=DEFAULT_CAP, t_max=None):
    return DilationNorm(P, cap).norm(g, t_max)


def norm_HP(HP: CosetNilprogression, g, cap=DEFAULT_CAP, t_max=None):
    return DilationNorm(HP, cap).norm(g, t_max)


MAX_X = 8


def norm_HPX(HP, X, g, cap=DEFAULT_CAP, calculator: DilationNorm | None = None, t_max=None):
    """inf over permutations sigma of X of max_x ||sigma(x)^-1 g x||_{HP}.

    Brute force over all |X|! permutations.  The radius grows until some
    permutation has all of its pairs inside the current ball, so pairs with
    infinite norm (outside <P>H) never need to be resolved on their own.
    """
    X = list(dict.fromkeys(X))
    if not X:
        raise ValueError("X must be non-empty")
    if len(X) > MAX_X:
        raise ValueError(f"|X| = {len(X)} exceeds the factorial-search limit {MAX_X}")
    calc = calculator or DilationNorm(HP, cap)
    oracle = calc.hp.oracle
    n = len(X)
    key = calc.hp.coset_key
    pair = [[key(oracle.mul(oracle.mul(oracle.inv(y), g), x)) for y in X] for x in X]
    perms = list(itertools.permutations(range(n)))

    def best(ball):
        out = None
        for perm in perms:
            vals = [ball.get(pair[i][perm[i]]) for i in range(n)]
            if None in vals:
                continue
            worst = max(vals)
            if out is None or worst < out:
                out = worst
        return out

    v, _ = calc.search(best, t_max)
    return INF if v is None else v


@dataclass
class NormalFormReport:
    C: Fraction
    holds_i: bool
    holds_ii: bool
    holds_iii: bool
    witnesses: dict = field(default_factory=dict)
    size: int = 0
    volume: int = 0

    @property
    def holds(self):
        return self.holds_i and self.holds_ii and self.holds_iii


def check_normal_form(P: Nilprogression, C, cap=DEFAULT_CAP) -> NormalFormReport:
    C = as_fraction(C)
    oracle = P.oracle
    u, N, r = P.generators, P.lengths, P.rank
    witnesses = {}

    # (i) upper-triangular form
    holds_i = True
    for i in range(r):
        for j in range(i + 1, r):
            tail_gens = u[j + 1:]
            tail_budgets = tuple(math.floor(C * N[k] / (N[i] * N[j])) for k in range(j + 1, r))
            tail = frozenset(pareto_ball(oracle, tail_gens, tail_budgets, cap=cap))
            for si, sj in itertools.product((1, -1), repeat=2):
                c = oracle.commutator(oracle.power(u[i], si), oracle.power(u[j], sj))
                if c not in tail:
                    holds_i = False
                    witnesses.setdefault("i", []).append((i + 1, j + 1, si, sj, c))

    # (ii) local properness
    holds_ii = True
    ranges = [range(-math.floor(n / C), math.floor(n / C) + 1) for n in N]
    total = math.prod(len(rg) for rg in ranges)
    if total > cap:
        raise CapExceeded(f"local properness needs {total} products", 0)
    powers = [{n: oracle.power(v, n) for n in rg} for v, rg in zip(u, ranges)]
    seen = {}
    for exps in itertools.product(*ranges):
        g = oracle.product(powers[k][n] for k, n in enumerate(exps))
        if g in seen:
            holds_ii = False
            witnesses["ii"] = (seen[g], exps, g)
            break
        seen[g] = exps

    # (iii) volume bound
    size = len(enumerate_dilate(P, 1, cap=cap))
    volume = math.prod(2 * math.floor(n) + 1 for n in N)
    holds_iii = volume / C <= size <= C * volume
    if not holds_iii:
        witnesses["iii"] = (size, volume)
    return NormalFormReport(C, holds_i, holds_ii, holds_iii, witnesses, size, volume)


def product_set(oracle: GroupOracle, A, B) -> frozenset:
    mul = oracle.mul
    return frozenset(mul(a, b) for a in A for b in B)


def iterated_product(oracle: GroupOracle, A, n: int) -> frozenset:
    result = frozenset([oracle.identity()])
    for _ in range(n):
        result = product_set(oracle, result, A)
    return result
