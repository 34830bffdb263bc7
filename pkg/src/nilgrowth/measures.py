"""Finitely supported probability measures on a group oracle.

Rational measures keep integer weights over one common denominator, so a
convolution is integer multiply-adds and the denominators multiply; the
result stays exact without per-entry Fraction normalization.  Float
measures hold plain double masses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from .groups import DEFAULT_CAP, CapExceeded, GroupOracle
from .nilprog import DilationNorm, as_coset, enumerate_dilate, norm_HPX
from .rational import as_fraction, fmt

FLOAT_MASS_TOL = 1e-12


class InvariantViolation(AssertionError):
    """A property that must hold mathematically failed on computed values."""


class ModeMismatch(ValueError):
    pass


class FiniteMeasure:
    """mu(x) = weights[x] / denominator (rational mode) or weights[x] (float)."""

    __slots__ = ("oracle", "weights", "denominator", "mode")

    def __init__(self, oracle: GroupOracle, weights: dict, denominator=1, mode="rational"):
        self.oracle = oracle
        self.mode = mode
        if mode == "rational":
            w = {x: int(v) for x, v in weights.items() if v}
            if any(v < 0 for v in w.values()):
                raise ValueError("masses must be nonnegative")
            if sum(w.values()) != denominator:
                raise ValueError("weights do not sum to the denominator")
            self.weights = w
            self.denominator = int(denominator)
        elif mode == "float":
            w = {x: float(v) for x, v in weights.items() if v > 0}
            if abs(sum(w.values()) - 1.0) > 1e-9:
                raise ValueError("float masses must sum to 1")
            self.weights = w
            self.denominator = 1
        else:
            raise ValueError(f"unknown mode {mode!r}")

    # -- constructors ----------------------------------------------------
    @classmethod
    def from_masses(cls, oracle, masses: dict):
        fr = {x: as_fraction(v) for x, v in masses.items()}
        den = reduce(math.lcm, (f.denominator for f in fr.values()), 1)
        w = {x: f.numerator * (den // f.denominator) for x, f in fr.items()}
        if sum(w.values()) != den:
            raise ValueError(f"masses sum to {Fraction(sum(w.values()), den)}, not 1")
        return cls(oracle, w, den)

    @classmethod
    def dirac(cls, oracle, g=None):
        g = oracle.identity() if g is None else g
        return cls(oracle, {g: 1}, 1)

    @classmethod
    def uniform(cls, oracle, elems):
        """Uniform over a list; repeated entries count with multiplicity."""
        elems = list(elems)
        if not elems:
            raise ValueError("empty support")
        w = {}
        for x in elems:
            w[x] = w.get(x, 0) + 1
        return cls(oracle, w, len(elems))

    @classmethod
    def from_floats(cls, oracle, masses: dict):
        return cls(oracle, masses, 1, mode="float")

    # -- access ----------------------------------------------------------
    def mass(self, x):
        if self.mode == "rational":
            return Fraction(self.weights.get(x, 0), self.denominator)
        return self.weights.get(x, 0.0)

    def masses(self) -> dict:
        return {x: self.mass(x) for x in self.weights}

    @property
    def support(self):
        return list(self.weights)

    def __len__(self):
        return len(self.weights)

    def is_symmetric(self):
        inv = self.oracle.inv
        if self.mode == "rational":
            return all(self.weights.get(inv(x), 0) == w for x, w in self.weights.items())
        return all(abs(self.weights.get(inv(x), 0.0) - w) <= FLOAT_MASS_TOL for x, w in self.weights.items())

    def reduced(self):
        if self.mode != "rational":
            return self
        g = reduce(math.gcd, self.weights.values(), self.denominator)
        if g == 1:
            return self
        return FiniteMeasure(self.oracle, {x: w // g for x, w in self.weights.items()}, self.denominator // g)

    def to_float(self):
        if self.mode == "float":
            return self
        d = self.denominator
        return FiniteMeasure(self.oracle, {x: w / d for x, w in self.weights.items()}, mode="float")

    def mix(self, other, p):
        """p * self + (1 - p) * other (rational p for rational measures)."""
        if self.mode != other.mode:
            raise ModeMismatch("cannot mix rational and float measures")
        if self.mode == "float":
            p = float(p)
            w = {x: p * v for x, v in self.weights.items()}
            for x, v in other.weights.items():
                w[x] = w.get(x, 0.0) + (1 - p) * v
            return FiniteMeasure(self.oracle, w, mode="float")
        p = as_fraction(p)
        den = p.denominator * self.denominator * other.denominator
        a = p.numerator * other.denominator
        b = (p.denominator - p.numerator) * self.denominator
        w = {x: a * v for x, v in self.weights.items()}
        for x, v in other.weights.items():
            w[x] = w.get(x, 0) + b * v
        return FiniteMeasure(self.oracle, w, den).reduced()

    def __eq__(self, other):
        if not isinstance(other, FiniteMeasure) or self.mode != other.mode:
            return NotImplemented
        return self.masses() == other.masses()

    def __repr__(self):
        return f"FiniteMeasure({len(self)} atoms, {self.mode})"

    def to_json(self):
        enc = self.oracle.encode
        items = sorted(self.weights, key=self.oracle.sort_key)
        if self.mode == "rational":
            return {"group": self.oracle.spec(), "mode": "rational",
                    "atoms": [[enc(x), fmt(self.mass(x))] for x in items]}
        return {"group": self.oracle.spec(), "mode": "float",
                "atoms": [[enc(x), repr(self.weights[x])] for x in items]}

    @classmethod
    def from_json(cls, obj, oracle=None):
        from .groups import oracle_from_spec

        oracle = oracle or oracle_from_spec(obj["group"])
        atoms = {oracle.decode(e): v for e, v in obj["atoms"]}
        if obj.get("mode", "rational") == "float":
            return cls.from_floats(oracle, {x: float(v) for x, v in atoms.items()})
        return cls.from_masses(oracle, atoms)


def convolve(mu: FiniteMeasure, nu: FiniteMeasure, cap=DEFAULT_CAP) -> FiniteMeasure:
    """(mu * nu)(x) = sum_y mu(y) nu(y^-1 x)."""
    if mu.mode != nu.mode:
        raise ModeMismatch("cannot convolve rational with float measures")
    if mu.oracle != nu.oracle:
        raise ValueError("measures live on different groups")
    mul = mu.oracle.mul
    out = {}
    get = out.get
    for y, a in mu.weights.items():
        for z, b in nu.weights.items():
            x = mul(y, z)
            out[x] = get(x, 0) + a * b
        if len(out) > cap:
            raise CapExceeded(f"convolution support passed {cap}", len(out))
    if mu.mode == "float":
        return FiniteMeasure(mu.oracle, out, mode="float")
    return FiniteMeasure(mu.oracle, out, mu.denominator * nu.denominator)


def convolve_all(measures, cap=DEFAULT_CAP) -> FiniteMeasure:
    return reduce(lambda a, b: convolve(a, b, cap), measures)


def convolution_power(mu: FiniteMeasure, n: int, cap=DEFAULT_CAP) -> FiniteMeasure:
    """mu^{*n} by repeated single convolution (mu^{*0} is the Dirac mass)."""
    out = FiniteMeasure.dirac(mu.oracle) if mu.mode == "rational" else \
        FiniteMeasure.from_floats(mu.oracle, {mu.oracle.identity(): 1.0})
    for _ in range(n):
        out = convolve(out, mu, cap)
    return out


def l2_inv_sq(mu: FiniteMeasure):
    """(sum_x mu(x)^2)^-1; equals |A| for the uniform measure on A."""
    if mu.mode == "rational":
        return Fraction(mu.denominator**2, sum(w * w for w in mu.weights.values()))
    return 1.0 / sum(w * w for w in mu.weights.values())


def linf(mu: FiniteMeasure):
    if mu.mode == "rational":
        return Fraction(max(mu.weights.values()), mu.denominator)
    return max(mu.weights.values())


@dataclass
class ConvolutionSeries:
    rows: list  # (n, l2_inv_sq, linf)

    def l2(self):
        return [r[1] for r in self.rows]

    def sup(self):
        return [r[2] for r in self.rows]


def convolution_growth_series(mu: FiniteMeasure, n_max: int, cap=DEFAULT_CAP, check=True):
    """||mu^{*n}||_2^{-2} and ||mu^{*n}||_inf for n = 1..n_max.

    The l2 series is non-decreasing in n (Young's inequality); a decrease
    raises InvariantViolation.
    """
    rows = []
    cur = mu
    for n in range(1, n_max + 1):
        if n > 1:
            cur = convolve(cur, mu, cap)
        rows.append((n, l2_inv_sq(cur), linf(cur)))
    if check:
        slack = 0 if mu.mode == "rational" else 1e-12
        for (n0, a, _), (n1, b, _) in zip(rows, rows[1:]):
            if b < a - slack * abs(a):
                raise InvariantViolation(f"l2 growth decreased from n={n0} to n={n1}: {a} > {b}")
    return ConvolutionSeries(rows)


# -- the three-measure inequality chain on abelian groups ---------------------

@dataclass
class DonkTriple:
    lhs: Fraction
    mid: Fraction
    rhs: float

    def holds(self, slack=1e-12):
        return self.lhs <= self.mid and float(self.mid) <= self.rhs + slack


def donk_bounds(measures, cap=DEFAULT_CAP, slack=1e-12) -> DonkTriple:
    """(sup_x mu_1*...*mu_n(x), mu^{*n}(0), mu~_1*...*mu~_n(0)) where
    mu = delta/2 + (1/2n) sum_j mu_j*mu_j and
    mu~_j = e^{-1/2} delta + (1 - e^{-1/2}) mu_j*mu_j.

    lhs and mid are exact; rhs is a double because e^{-1/2} is irrational.
    """
    measures = list(measures)
    if not measures:
        raise ValueError("need at least one measure")
    oracle = measures[0].oracle
    if not oracle.abelian:
        raise ValueError("the chain is stated for abelian groups")
    for m in measures:
        if m.mode != "rational":
            raise ModeMismatch("donk_bounds takes rational measures")
        if not m.is_symmetric():
            raise ValueError("all measures must be symmetric")
    n = len(measures)
    e = oracle.identity()
    lhs = linf(convolve_all(measures, cap))
    squares = [convolve(m, m, cap) for m in measures]
    avg = reduce(lambda a, b: a.mix(b, Fraction(1, 2)), squares) if n == 1 else _average(squares)
    mu = FiniteMeasure.dirac(oracle).mix(avg, Fraction(1, 2))
    mid = convolution_power(mu, n, cap).mass(e)
    c = math.exp(-0.5)
    delta = FiniteMeasure.from_floats(oracle, {e: 1.0})
    tilde = [delta.mix(s.to_float(), c) for s in squares]
    rhs = convolve_all(tilde, cap).mass(e)
    triple = DonkTriple(lhs, mid, rhs)
    if not triple.holds(slack):
        raise InvariantViolation(f"chain fails: {lhs} <= {mid} <= {rhs}")
    return triple


def _average(ms):
    den = reduce(math.lcm, (m.denominator for m in ms), 1)
    w = {}
    for m in ms:
        f = den // m.denominator
        for x, v in m.weights.items():
            w[x] = w.get(x, 0) + v * f
    return FiniteMeasure(ms[0].oracle, w, den * len(ms)).reduced()


# -- drift gauge ---------------------------------------------------------------

class DefectiveChain(ValueError):
    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


@dataclass
class StochasticGauge:
    d: int
    p: np.ndarray
    a: np.ndarray
    t: np.ndarray
    residual: float
    condition: float
    sabr_constant: float = float("nan")


def _check_gauge_inputs(p, a, tol=1e-12):
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    d = p.shape[0]
    if p.shape != (d, d) or a.shape != (d, d):
        raise ValueError("p and a must be square of the same size")
    if d > 64:
        raise ValueError("dimension limited to 64")
    if (p < -tol).any() or not np.allclose(p, p.T, atol=tol) or not np.allclose(p.sum(axis=1), 1, atol=1e-10):
        raise ValueError("p must be symmetric, nonnegative and stochastic")
    if not np.allclose(a, -a.T, atol=tol):
        raise ValueError("a must be antisymmetric")
    return p, a


def drift_vector(p, a):
    """b_i = sum_j a_ij p_ij."""
    return (np.asarray(a) * np.asarray(p)).sum(axis=1)


def solve_drift_gauge(p, a, delta=None, gap_tol=1e-10) -> StochasticGauge:
    """Mean-zero t with sum_j a_ij p_ij = t_i - sum_j p_ij t_j.

    Solved as (I - p) t = b on the complement of the constant vector by a
    least-squares solve of the bordered system [I - p; 1^T] t = [b; 0].
    """
    p, a = _check_gauge_inputs(p, a)
    d = p.shape[0]
    b = drift_vector(p, a)
    lam = np.linalg.eigvalsh(p)
    gap = 1.0 - lam[-2] if d > 1 else 1.0
    condition = 1.0 / gap if gap > 0 else math.inf
    if gap < gap_tol:
        raise DefectiveChain(f"p is (nearly) reducible: spectral gap {gap:.3e}", condition)
    M = np.vstack([np.eye(d) - p, np.ones((1, d))])
    t, *_ = np.linalg.lstsq(M, np.append(b, 0.0), rcond=None)
    t -= t.mean()
    residual = float(np.abs((np.eye(d) - p) @ t - b).max())
    g = StochasticGauge(d, p, a, t, residual, condition)
    if delta:
        diffs = np.sqrt(p) * np.abs(t[:, None] - t[None, :])
        g.sabr_constant = float(diffs.max() / delta)
    return g


def drift_gauge_eigen(p, a):
    """The eigen-expansion t_i = sum_{k>=2} (b . u_k) u_k,i / (1 - lambda_k)."""
    p, a = _check_gauge_inputs(p, a)
    b = drift_vector(p, a)
    lam, U = np.linalg.eigh(p)
    order = np.argsort(lam)[::-1]
    lam, U = lam[order], U[:, order]
    t = np.zeros(len(b))
    for k in range(1, len(b)):
        t += (b @ U[:, k]) / (1 - lam[k]) * U[:, k]
    return t


# -- direct theorem ------------------------------------------------------------

@dataclass
class DirectTheoremReport:
    integral: Fraction
    measured_M: Fraction
    hp_size: int
    l2_inv_sq: Fraction
    ratio: Fraction
    norms: dict = field(default_factory=dict)


def direct_theorem_check(mu: FiniteMeasure, HP, X, n: int, cap=DEFAULT_CAP) -> DirectTheoremReport:
    """Hypothesis integral sum_g mu(g) ||g||_{HP,X}^2 and conclusion ratio
    ||mu^{*n}||_2^{-2} / |HP|, both exact."""
    hp = as_coset(HP)
    calc = DilationNorm(hp, cap)
    norms = {g: norm_HPX(hp, X, g, calculator=calc) for g in mu.support}
    if any(v == math.inf for v in norms.values()):
        integral = math.inf
    else:
        integral = sum((mu.mass(g) * v * v for g, v in norms.items()), Fraction(0))
    hp_size = len(enumerate_dilate(hp, 1, cap))
    l2 = l2_inv_sq(convolution_power(mu, n, cap))
    return DirectTheoremReport(integral, integral * n, hp_size, l2, l2 / hp_size, norms)
