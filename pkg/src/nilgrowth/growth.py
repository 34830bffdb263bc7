"""Product-set growth, the predicted volume polynomial and log-log profiles.

Cardinalities are exact integers throughout; logarithms are doubles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .groups import DEFAULT_CAP, CapExceeded, GroupOracle
from .liealg import AlphaMatrix, WordTable, weight
from .nilprog import as_coset, enumerate_dilate
from .rational import as_fraction, det, fmt

LOG_TOL = 1e-9


@dataclass
class GrowthSeries:
    descriptor: str
    entries: list  # (n, cardinality)
    partial: bool = False

    def __post_init__(self):
        self._index = dict(self.entries)

    def __getitem__(self, n):
        return self._index[n]

    def __contains__(self, n):
        return n in self._index

    def ns(self):
        return [n for n, _ in self.entries]

    def cardinalities(self):
        return [c for _, c in self.entries]


def symmetrize(oracle: GroupOracle, A):
    """A u {1} u A^-1, keeping first-seen order."""
    out = dict.fromkeys(A)
    out[oracle.identity()] = None
    for a in list(A):
        out[oracle.inv(a)] = None
    return list(out)


def product_set_series(oracle: GroupOracle, A, symmetrize_set=True, n_max=8, cap=DEFAULT_CAP,
                       descriptor="A", keep_sets=False, chunk=4_000_000):
    """|A^n| for n = 1..n_max (A replaced by A u {1} u A^-1 if requested).

    When the base set contains the identity the layers are nested and only
    the newest layer needs multiplying: A^{n+1} = A^n u (A^n minus A^{n-1}) A.
    Backends with an integer array encoding run on numpy.  On cap overflow a
    CapExceeded is raised whose ``partial`` is the truncated series.

    With ``keep_sets`` the return value is (series, [A^1, A^2, ...]).
    """
    base = symmetrize(oracle, A) if symmetrize_set else list(dict.fromkeys(A))
    if not base:
        raise ValueError("empty base set")
    if oracle.array_dim and not keep_sets and _array_ok(oracle, base):
        return _series_arrays(oracle, base, n_max, cap, descriptor, chunk)
    nested = oracle.identity() in base
    mul = oracle.mul
    current = set(base)
    frontier = list(current)
    entries = [(1, len(current))]
    sets = [frozenset(current)] if keep_sets else None
    for n in range(2, n_max + 1):
        if nested:
            new = set()
            for x in frontier:
                for a in base:
                    y = mul(x, a)
                    if y not in current and y not in new:
                        new.add(y)
                if len(current) + len(new) > cap:
                    raise CapExceeded(f"|A^{n}| passed the cap {cap}",
                                      GrowthSeries(descriptor, entries, partial=True))
            current |= new
            frontier = list(new)
        else:
            current = {mul(x, a) for x in current for a in base}
            if len(current) > cap:
                raise CapExceeded(f"|A^{n}| passed the cap {cap}",
                                  GrowthSeries(descriptor, entries, partial=True))
        entries.append((n, len(current)))
        if keep_sets:
            sets.append(frozenset(current))
    series = GrowthSeries(descriptor, entries)
    return (series, sets) if keep_sets else series


def _array_ok(oracle, base):
    try:
        arr = oracle.to_array(base)
    except (TypeError, ValueError, OverflowError):
        return False
    return arr.size == 0 or np.abs(arr).max() < 2**20


class _Keyspace:
    """Packs integer rows into int64 keys; widens (and re-packs) on demand."""

    def __init__(self, d):
        self.lo = None
        self.hi = None
        self.d = d

    def fits(self, arr):
        return self.lo is not None and (arr.min(axis=0) >= self.lo).all() and (arr.max(axis=0) <= self.hi).all()

    def widen(self, arr):
        lo, hi = arr.min(axis=0), arr.max(axis=0)
        if self.lo is not None:
            lo, hi = np.minimum(lo, self.lo), np.maximum(hi, self.hi)
        span = hi - lo + 1
        # leave room to grow on both sides
        self.lo = lo - span
        self.hi = hi + span
        self.mult = np.ones(self.d, dtype=np.int64)
        total = 1
        for j in range(self.d - 1, -1, -1):
            self.mult[j] = total
            total *= int(self.hi[j] - self.lo[j] + 1)
        if total >= 2**62:
            raise OverflowError("coordinates too large to pack into int64 keys")

    def keys(self, arr):
        return ((arr - self.lo) * self.mult).sum(axis=1)


def _series_arrays(oracle, base, n_max, cap, descriptor, chunk):
    A = oracle.to_array(base)
    ks = _Keyspace(A.shape[1])
    nested = oracle.identity() in set(base)
    ks.widen(A)
    known = A.copy()
    known_keys = np.sort(ks.keys(known))
    frontier = A
    entries = [(1, len(known))]
    m = len(A)
    for n in range(2, n_max + 1):
        src = frontier if nested else known
        new_rows = []
        new_keys = np.empty(0, dtype=np.int64)
        step = max(1, chunk // m)
        for s in range(0, len(src), step):
            F = src[s:s + step]
            cand = oracle.mul_arrays(np.repeat(F, m, axis=0), np.tile(A, (len(F), 1)))
            if not ks.fits(cand):
                ks.widen(np.vstack([cand, known]))
                known_keys = np.sort(ks.keys(known))
                if new_rows:
                    new_keys = ks.keys(np.vstack(new_rows))
            keys = ks.keys(cand)
            keys, idx = np.unique(keys, return_index=True)
            if nested:
                keep = ~np.isin(keys, known_keys, assume_unique=True)
            else:
                keep = np.ones(len(keys), dtype=bool)
            keep &= ~np.isin(keys, new_keys, assume_unique=True)
            if keep.any():
                new_rows.append(cand[idx[keep]])
                new_keys = np.concatenate([new_keys, keys[keep]])
            total = (len(known) if nested else 0) + len(new_keys)
            if total > cap:
                raise CapExceeded(f"|A^{n}| passed the cap {cap}",
                                  GrowthSeries(descriptor, entries, partial=True))
        new = np.vstack(new_rows) if new_rows else np.empty((0, A.shape[1]), dtype=np.int64)
        if nested:
            known = np.vstack([known, new])
            known_keys = np.sort(np.concatenate([known_keys, new_keys]))
            frontier = new
        else:
            known = new
            known_keys = np.sort(new_keys)
        entries.append((n, len(known)))
    return GrowthSeries(descriptor, entries)


def polynomial_growth_check(series: GrowthSeries, n: int, d):
    """Is |A^n| <= n^d |A|?  Returns (holds, slack) with slack = n^d |A| / |A^n|.

    Exact for integer d; a float comparison otherwise.
    """
    if n not in series or 1 not in series:
        raise KeyError(f"series lacks index {n} or 1")
    if isinstance(d, int):
        bound = n**d * series[1]
        return series[n] <= bound, Fraction(bound, series[n])
    bound = n ** float(d) * series[1]
    return series[n] <= bound, bound / series[n]


def stability_constant(series: GrowthSeries) -> float:
    """Smallest C with |A^{km}| <= C^k |A^m| over all available k >= 2, m."""
    if len(series.entries) < 3:
        raise ValueError("need at least 3 entries")
    best = 1.0
    for m in series.ns():
        for k in itertools.count(2):
            if k * m not in series:
                if k * m > max(series.ns()):
                    break
                continue
            ratio = series[k * m] / series[m]
            best = max(best, ratio ** (1.0 / k))
    return best


# -- volume polynomial and its tropicalization -------------------------------

@dataclass(frozen=True)
class GrowthPolynomial:
    terms: tuple  # ((coefficient, degree), ...) by increasing degree

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a growth polynomial needs at least one term")
        degs = [d for _, d in self.terms]
        if len(set(degs)) != len(degs):
            raise ValueError("degrees must be distinct")
        if any(c < 0 for c, _ in self.terms):
            raise ValueError("coefficients must be nonnegative")

    @classmethod
    def from_dict(cls, coeffs):
        return cls(tuple(sorted(((c, d) for d, c in coeffs.items() if c != 0), key=lambda t: t[1])))

    def __call__(self, m):
        return sum(c * m**d for c, d in self.terms)

    @property
    def degree(self):
        return max(d for _, d in self.terms)

    def log_at(self, x: float) -> float:
        """log V(e^x), computed stably."""
        vals = [math.log(c) + d * x for c, d in self.terms if c > 0]
        top = max(vals)
        return top + math.log(sum(math.exp(v - top) for v in vals))

    def to_json(self):
        return {"terms": [{"coefficient": fmt(c) if isinstance(c, (int, Fraction)) else c, "degree": d}
                          for c, d in self.terms]}


def predict_volume_polynomial(table: WordTable, alpha: AlphaMatrix, N=None) -> GrowthPolynomial:
    """V(m) = sum over r-subsets S of |det(alpha_i, i in S)| prod N^{w_i} m^{sum |w_i|}."""
    r, k = table.r, len(table.words)
    if k < r:
        raise ValueError("table has fewer words than generators")
    weights = table.weights if N is None else tuple(weight(w, N) for w in table.words)
    coeffs = {}
    for S in itertools.combinations(range(k), r):
        D = det([alpha.rows[i] for i in S])
        if D == 0:
            continue
        c = abs(D) * math.prod((weights[i] for i in S), start=Fraction(1))
        deg = sum(table.lengths[i] for i in S)
        coeffs[deg] = coeffs.get(deg, Fraction(0)) + c
    return GrowthPolynomial.from_dict(coeffs)


@dataclass(frozen=True)
class PiecewiseLinearProfile:
    """Continuous nondecreasing f on [0, inf) with f(0) = 0 and natural slopes.

    ``breakpoints[0] == 0``; piece p has slope ``slopes[p]`` on
    [breakpoints[p], breakpoints[p + 1]) (the last piece is unbounded).
    """

    breakpoints: tuple
    slopes: tuple

    def __post_init__(self):
        if len(self.breakpoints) != len(self.slopes) or not self.slopes:
            raise ValueError("need one breakpoint per piece")
        if self.breakpoints[0] != 0:
            raise ValueError("first breakpoint must be 0")
        if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must increase")
        if any(int(s) != s or s < 0 for s in self.slopes):
            raise ValueError("slopes must be natural numbers")

    def __call__(self, x: float) -> float:
        f = 0.0
        for p, (b, s) in enumerate(zip(self.breakpoints, self.slopes)):
            end = self.breakpoints[p + 1] if p + 1 < len(self.breakpoints) else math.inf
            if x <= b:
                break
            f += s * (min(x, end) - b)
        return f

    def to_json(self):
        return {"breakpoints": list(self.breakpoints), "slopes": list(self.slopes)}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(obj["breakpoints"]), tuple(obj["slopes"]))


def _log(c) -> float:
    if isinstance(c, Fraction):
        return math.log(c.numerator) - math.log(c.denominator)
    return math.log(c)


def tropicalize(V: GrowthPolynomial) -> PiecewiseLinearProfile:
    """f(x) = max_terms(log c + d x) - max_terms(log c) on x >= 0.

    The upper envelope is walked with exact comparisons when coefficients are
    rational: the line (c_j, d_j) overtakes (c, d) at x = log(c / c_j) / (d_j - d).
    """
    terms = [(as_fraction(c) if isinstance(c, (int, Fraction)) else c, d) for c, d in V.terms if c > 0]
    exact = all(isinstance(c, Fraction) for c, _ in terms)
    # active line at x = 0: largest coefficient, ties to the larger degree
    c, d = max(terms, key=lambda t: (t[0], t[1]))
    breakpoints, slopes = [0.0], [d]
    while True:
        steeper = [(cj, dj) for cj, dj in terms if dj > d]
        if not steeper:
            break

        def crossing(t):
            cj, dj = t
            return (c / cj, dj - d)

        def earlier(a, b):
            # log(ra)/da < log(rb)/db  <=>  ra^db < rb^da  (ratios >= 1 after the first piece)
            (ra, da), (rb, db) = a, b
            if exact:
                return ra ** db < rb ** da
            return math.log(ra) * db < math.log(rb) * da

        best = None
        for t in steeper:
            x = crossing(t)
            if best is None or earlier(x, crossing(best)) or (
                    not earlier(crossing(best), x) and t[1] > best[1]):
                best = t
        ratio, dd = crossing(best)
        xb = _log(ratio) / dd if exact else math.log(ratio) / dd
        if xb <= breakpoints[-1]:
            # crossing at (or before) the current breakpoint: switch lines in place
            slopes[-1] = best[1]
        else:
            breakpoints.append(xb)
            slopes.append(best[1])
        c, d = best
    return PiecewiseLinearProfile(tuple(breakpoints), tuple(slopes))


# -- fitting -----------------------------------------------------------------

def log_growth_samples(series: GrowthSeries, n=1, ms=None):
    """(m, log|A^{mn}| - log|A^n|) for the sampled m."""
    if n not in series:
        raise KeyError(f"series lacks base index {n}")
    if ms is None:
        ms = [k // n for k in series.ns() if k % n == 0 and k >= n]
    ms = sorted(set(ms))
    if not ms or ms[0] != 1:
        raise ValueError("samples must include m = 1")
    missing = [m for m in ms if m * n not in series]
    if missing:
        raise KeyError(f"series lacks m*n for m in {missing[:5]}")
    base = math.log(series[n])
    return ms, [math.log(series[m * n]) - base for m in ms]


def geometric_samples(m_max: int, dense_upto=16, ratio=1.1):
    """All m <= dense_upto, then roughly geometric spacing up to m_max."""
    ms = list(range(1, min(dense_upto, m_max) + 1))
    x = float(ms[-1])
    while True:
        x *= ratio
        m = int(round(x))
        if m > m_max:
            break
        if m > ms[-1]:
            ms.append(m)
    if ms[-1] != m_max:
        ms.append(m_max)
    return ms


@dataclass
class ProfileFit:
    profile: PiecewiseLinearProfile
    deviation: float
    samples: list = field(default_factory=list)


def fit_samples(xs, ys, max_pieces=3, max_slope=6) -> ProfileFit:
    """Minimax fit of a continuous nondecreasing integer-slope piecewise
    linear f with f(0) = 0 and breakpoints at sample abscissae.

    Exhaustive over piece counts, breakpoint positions and slope vectors
    (consecutive slopes distinct), vectorized over slope vectors.  Ties within
    LOG_TOL go to fewer pieces, then the lexicographically smallest slope
    vector, then the earliest breakpoints.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs[0] != 0:
        raise ValueError("first sample must be at x = 0 (m = 1)")
    K = len(xs)
    if K < 2:
        raise ValueError("need at least two samples")
    best = None  # (deviation, pieces, slopes, breaks)
    for p in range(1, max_pieces + 1):
        slope_vecs = [s for s in itertools.product(range(max_slope + 1), repeat=p)
                      if all(a != b for a, b in zip(s, s[1:]))]
        if not slope_vecs:
            continue
        S = np.array(slope_vecs, dtype=float)  # (V, p)
        for breaks in itertools.combinations(range(1, K - 1), p - 1):
            edges = [0.0] + [xs[b] for b in breaks] + [math.inf]
            # overlap of [0, x_k] with each piece
            M = np.empty((K, p))
            for q in range(p):
                M[:, q] = np.clip(np.minimum(xs, edges[q + 1]) - edges[q], 0, None)
            dev = np.abs(ys[:, None] - M @ S.T).max(axis=0)
            i = int(np.argmin(dev))
            cand = (float(dev[i]), p, slope_vecs[i], breaks)
            if best is None or cand[0] < best[0] - LOG_TOL:
                best = cand
            elif abs(cand[0] - best[0]) <= LOG_TOL and (cand[1], cand[2], cand[3]) < (best[1], best[2], best[3]):
                # argmin already picks the lexicographically first slope vector
                best = cand
    if best is None:
        raise ValueError("no admissible profile (check max_pieces / max_slope)")
    dev, p, slopes, breaks = best
    profile = PiecewiseLinearProfile((0.0,) + tuple(float(xs[b]) for b in breaks), tuple(slopes))
    return ProfileFit(profile, dev)


def fit_profile(series: GrowthSeries, n=1, max_pieces=3, max_slope=6, ms=None) -> ProfileFit:
    ms, ys = log_growth_samples(series, n, ms)
    fit = fit_samples([math.log(m) for m in ms], ys, max_pieces, max_slope)
    fit.samples = list(zip(ms, ys))
    return fit


def profile_rows(fit: ProfileFit, series: GrowthSeries, n=1, predicted=None):
    """CSV rows (m, cardinality, log_cardinality, f_fitted, f_predicted, deviation)."""
    rows = []
    for m, y in fit.samples:
        x = math.log(m)
        f = fit.profile(x)
        card = series[m * n]
        rows.append({
            "m": m,
            "cardinality": card,
            "log_cardinality": math.log(card),
            "f_fitted": f,
            "f_predicted": predicted(x) if predicted else "",
            "deviation": abs(y - f),
        })
    return rows


# -- sandwich ----------------------------------------------------------------

@dataclass
class SandwichReport:
    C: int
    n: int
    results: dict  # m -> {"lower": bool, "upper": bool, "witness": ...}

    @property
    def holds(self):
        return all(r["lower"] and r["upper"] for r in self.results.values())


def check_control_sandwich(oracle: GroupOracle, A, HP, X, n: int, C: int, ms=(1, 2, 3), cap=DEFAULT_CAP):
    """HP^m in S^{Cmn} and S^{Cmn} in X HP^{C^2 m}, S = A u {1} u A^-1, by
    exact containment of fully materialized sets."""
    hp = as_coset(HP)
    top = C * max(ms) * n
    _, sets = product_set_series(oracle, A, True, top, cap=cap, keep_sets=True)
    results = {}
    for m in ms:
        S = sets[C * m * n - 1]
        inner = enumerate_dilate(hp, m, cap=cap)
        outer_base = enumerate_dilate(hp, C * C * m, cap=cap)
        outer = {oracle.mul(x, g) for x in X for g in outer_base}
        lower_w = next((g for g in inner if g not in S), None)
        upper_w = next((g for g in sorted(S, key=oracle.sort_key) if g not in outer), None)
        results[m] = {"lower": lower_w is None, "upper": upper_w is None,
                      "lower_witness": lower_w, "upper_witness": upper_w,
                      "sizes": (len(inner), len(S), len(outer))}
    return SandwichReport(C, n, results)
