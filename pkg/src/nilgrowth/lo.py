"""Concentration of signed sums and symmetrized random products.

Everything probabilistic here is computed exactly by convolving finitely
supported measures; nothing is sampled.  The inverse theorems only come with
ineffective constants, so the experiments report measured constants instead
of checking them against a fixed C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .groups import DEFAULT_CAP, CapExceeded, GroupOracle, Lattice, Unitriangular, subgroup_closure
from .liealg import NilMatrix, mat_log
from .measures import FiniteMeasure, convolution_power, convolve, linf
from .rational import as_fraction, rank, row_echelon


@dataclass(frozen=True)
class LOInstance:
    oracle: GroupOracle
    elements: tuple

    def __post_init__(self):
        if not self.elements:
            raise ValueError("need n >= 1 elements")
        for g in self.elements:
            self.oracle.validate(g)

    @property
    def n(self):
        return len(self.elements)


def _argmax(mu: FiniteMeasure):
    top = max(mu.weights.values())
    return min((x for x, w in mu.weights.items() if w == top), key=mu.oracle.sort_key)


def bernoulli_concentration(inst: LOInstance, cap=DEFAULT_CAP):
    """rho = sup_x P(xi_1 v_1 + ... + xi_n v_n = x) with independent signs.

    Returns (rho, witness x).
    """
    G = inst.oracle
    if not G.abelian:
        raise ValueError("signed sums need an abelian group")
    mu = FiniteMeasure.dirac(G)
    for v in inst.elements:
        w = G.inv(v)
        step = FiniteMeasure.dirac(G, v) if v == w else FiniteMeasure(G, {v: 1, w: 1}, 2)
        mu = convolve(mu, step, cap)
    return linf(mu), _argmax(mu)


def symmetrized_measure(inst: LOInstance) -> FiniteMeasure:
    """Uniform on the 2n-element multiset {A_1, ..., A_n, A_1^-1, ..., A_n^-1}."""
    G = inst.oracle
    return FiniteMeasure.uniform(G, list(inst.elements) + [G.inv(a) for a in inst.elements])


def symmetrized_walk_concentration(inst: LOInstance, n_steps: int, cap=DEFAULT_CAP):
    """sup_B P(A'_1 ... A'_{n_steps} = B) = ||mu^{*n_steps}||_inf. Returns (value, witness)."""
    mu = convolution_power(symmetrized_measure(inst), n_steps, cap)
    return linf(mu), _argmax(mu)


# -- subgroup search ----------------------------------------------------------

@dataclass(frozen=True)
class SubgroupReport:
    subgroup: frozenset | None
    order: int | None
    fraction: Fraction | None
    generators: tuple = ()

    @property
    def found(self):
        return self.subgroup is not None


def _covered(H, elements):
    return Fraction(sum(a in H for a in elements), len(elements))


def find_small_subgroup(inst: LOInstance, order_cap: int, fraction_target) -> SubgroupReport:
    """Smallest subgroup generated by at most three of the A_i (or by all of
    them) containing at least ``fraction_target`` of the A_i.

    Closures are grown level by level (H, then <H, a>) and deduplicated, which
    visits the same subgroups as closing every subset of size <= 3.  Ties in
    order go to the subgroup whose sorted element list is smallest.
    """
    G = inst.oracle
    if not G.finite:
        raise ValueError("subgroup search needs a finite backend")
    target = as_fraction(fraction_target) if not isinstance(fraction_target, float) else \
        Fraction(fraction_target).limit_denominator(10**6)
    distinct = sorted(set(inst.elements), key=G.sort_key)
    e = G.identity()
    seen = {}

    def add(H, gens):
        if H not in seen or _gen_key(G, gens) < _gen_key(G, seen[H]):
            seen[H] = gens

    level = {frozenset([e]): ()}
    add(frozenset([e]), ())
    for _ in range(3):
        nxt = {}
        for H, gens in level.items():
            for a in distinct:
                if a in H:
                    continue
                try:
                    K = subgroup_closure(G, list(gens) + [a], cap=order_cap)
                except CapExceeded:
                    continue
                if K not in nxt and K not in seen:
                    nxt[K] = gens + (a,)
        for K, gens in nxt.items():
            add(K, gens)
        level = nxt
    try:
        full = subgroup_closure(G, distinct, cap=order_cap)
        add(full, tuple(distinct))
    except CapExceeded:
        pass

    best = None
    for H, gens in seen.items():
        frac = _covered(H, inst.elements)
        if frac < target:
            continue
        key = (len(H), sorted(map(G.sort_key, H)))
        if best is None or key < best[0]:
            best = (key, H, frac, gens)
    if best is None:
        return SubgroupReport(None, None, None)
    _, H, frac, gens = best
    report = SubgroupReport(H, len(H), frac, gens)
    _verify(G, report, inst.elements)
    return report


def _gen_key(G, gens):
    return (len(gens), [G.sort_key(g) for g in gens])


def _verify(G, report, elements):
    H = report.subgroup
    if G.identity() not in H or any(G.inv(x) not in H for x in H):
        raise AssertionError("search returned a set not closed under inverses")
    if any(G.mul(x, y) not in H for x in H for y in H):
        raise AssertionError("search returned a set not closed under products")
    if _covered(H, elements) != report.fraction:
        raise AssertionError("covered fraction does not re-verify")


# -- symmetrized product experiment ---------------------------------------------

@dataclass
class MamReport:
    n: int
    eps: Fraction
    sup: Fraction
    threshold: float
    hypothesis: bool
    subgroup: SubgroupReport
    order_constant: float | None = None
    outlier_constant: float | None = None

    def to_json(self, oracle):
        H = self.subgroup
        return {
            "n": self.n,
            "eps": f"{self.eps.numerator}/{self.eps.denominator}",
            "sup": f"{self.sup.numerator}/{self.sup.denominator}",
            "threshold": self.threshold,
            "hypothesis": self.hypothesis,
            "subgroup_found": H.found,
            "subgroup_order": H.order,
            "subgroup_fraction": None if H.fraction is None else f"{H.fraction.numerator}/{H.fraction.denominator}",
            "subgroup": None if not H.found else [oracle.encode(x) for x in sorted(H.subgroup, key=oracle.sort_key)],
            "order_constant": self.order_constant,
            "outlier_constant": self.outlier_constant,
        }


def exceeds_inverse_sqrt(rho: Fraction, eps: Fraction, n: int) -> bool:
    """rho > 1 / (eps sqrt n), decided exactly as (rho eps)^2 n > 1."""
    return (rho * eps) ** 2 * n > 1


def mam_experiment(inst: LOInstance, eps, order_cap=None, fraction_target=None, cap=DEFAULT_CAP) -> MamReport:
    """Evaluate sup_B P(A'_1...A'_n = B) > 1/(eps sqrt n) and look for the
    small subgroup the conclusion promises.

    Defaults: order_cap = |G|, fraction_target = 1 - eps^2.  The report
    carries h / (eps sqrt n) and (1 - fraction) / eps^2 as measured constants.
    """
    n = inst.n
    if n < 2:
        raise ValueError("the experiment needs n >= 2")
    eps = as_fraction(eps)
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    G = inst.oracle
    if not G.finite:
        raise ValueError("the experiment needs a finite backend")
    rho, _ = symmetrized_walk_concentration(inst, n, cap)
    hyp = exceeds_inverse_sqrt(rho, eps, n)
    threshold = 1 / (float(eps) * math.sqrt(n))
    target = 1 - eps * eps if fraction_target is None else fraction_target
    sub = find_small_subgroup(inst, order_cap or G.size(), target)
    report = MamReport(n, eps, rho, threshold, hyp, sub)
    if hyp and sub.found:
        report.order_constant = sub.order / (float(eps) * math.sqrt(n))
        report.outlier_constant = float(1 - sub.fraction) / float(eps) ** 2
    return report


# -- growth degree ----------------------------------------------------------------

def _span_basis(vectors):
    m, piv = row_echelon(vectors) if vectors else ([], [])
    return [tuple(r) for r in m[: len(piv)]]


def _as_nil(oracle, g):
    if isinstance(g, NilMatrix):
        return g
    if isinstance(oracle, Unitriangular):
        return mat_log(tuple(as_fraction(v) for v in g), oracle.k)
    raise ValueError("generators must be unitriangular")


def lower_central_dimensions(logs):
    """dim L_1, dim L_2, ... for the rational Lie algebra generated by ``logs``."""
    if not logs:
        return []
    k = logs[0].k

    def vec(x):
        return list(x.entries)

    def mat(v):
        return NilMatrix(k, tuple(v))

    basis = _span_basis([vec(x) for x in logs])
    while True:
        new = basis + [vec(mat(a).bracket(mat(b))) for i, a in enumerate(basis) for b in basis[i + 1:]]
        nb = _span_basis(new)
        if len(nb) == len(basis):
            break
        basis = nb
    dims = []
    current = basis
    while current:
        dims.append(len(current))
        current = _span_basis([vec(mat(a).bracket(mat(b))) for a in basis for b in current])
    return dims


def bass_guivarch_degree(generators, oracle=None) -> int:
    """D = sum_j j (dim L_j - dim L_{j+1}) for the lower central series of the
    Lie algebra spanned by the logs of the generators."""
    if oracle is None:
        if generators and not isinstance(generators[0], NilMatrix):
            raise ValueError("pass the oracle when generators are payloads")
    logs = [_as_nil(oracle, g) for g in generators]
    logs = [x for x in logs if not x.is_zero()]
    dims = lower_central_dimensions(logs) + [0]
    return sum(j * (dims[j - 1] - dims[j]) for j in range(1, len(dims)))


def support_degree(oracle: GroupOracle, support) -> int | None:
    """Growth degree of <support> when the backend makes it computable."""
    if isinstance(oracle, Unitriangular):
        return bass_guivarch_degree(list(support), oracle)
    if isinstance(oracle, Lattice):
        return rank([list(g) for g in support]) if support else 0
    if oracle.finite:
        return 0
    return None


@dataclass
class Mam2Report:
    n: int
    d: int
    eps: Fraction
    sup: Fraction
    threshold: float
    hypothesis: bool
    degree: int | None
    consistent: bool | None
    decay: list = field(default_factory=list)
    decay_slope: float | None = None


def loglog_slope(xs, ys):
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def mam2_experiment(mu: FiniteMeasure, d: int, eps, n: int, cap=DEFAULT_CAP, slope_from=None) -> Mam2Report:
    """||mu^{*n}||_inf against n^{-(d+1-eps)/2}, with the growth degree of
    <supp mu> as the consistency side.

    ``decay`` lists (m, ||mu^{*m}||_inf) for m = 1..n; ``decay_slope`` fits
    its log-log slope over m >= slope_from (default n // 2).
    """
    if not mu.is_symmetric():
        raise ValueError("mu must be symmetric")
    eps = as_fraction(eps)
    decay = []
    cur = None
    for m in range(1, n + 1):
        cur = mu if cur is None else convolve(cur, mu, cap)
        decay.append((m, linf(cur)))
    sup = decay[-1][1]
    expo = Fraction(d + 1, 2) - eps / 2
    threshold = float(n) ** (-float(expo))
    # sup >= n^-expo  <=>  sup^q n^p >= 1 with expo = p/q
    p, q = expo.numerator, expo.denominator
    hyp = sup ** q * Fraction(n) ** p >= 1
    degree = support_degree(mu.oracle, mu.support)
    consistent = None if degree is None else (not hyp or degree <= d)
    start = slope_from if slope_from is not None else max(1, n // 2)
    tail = [(m, v) for m, v in decay if m >= start]
    slope = loglog_slope([m for m, _ in tail], [float(v) for _, v in tail]) if len(tail) >= 2 else None
    return Mam2Report(n, d, eps, sup, threshold, hyp, degree, consistent, decay, slope)
