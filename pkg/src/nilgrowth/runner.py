"""Scenario execution: config in, named checks and text artifacts out.

Artifacts are rendered to strings here and written by the CLI, so a run is
a pure function of (config, seed) and two runs produce identical bytes.
Nothing time-dependent goes into an artifact.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import growth, liealg, lo, measures, nilprog
from .config import ConfigError
from .groups import DEFAULT_CAP, CapExceeded, CyclicProduct, Lattice, oracle_from_spec, parse_element
from .rational import as_fraction, fmt


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Outcome:
    name: str
    kind: str
    checks: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # filename -> (header, rows)
    partial: bool = False

    def check(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def artifacts(self) -> dict:
        summary = {
            "name": self.name,
            "kind": self.kind,
            "partial": self.partial,
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
            "results": jsonable(self.results),
        }
        out = {"summary.json": json.dumps(summary, indent=2) + "\n"}
        for fname, (header, rows) in self.tables.items():
            out[fname] = render_csv(header, rows)
        return out


def jsonable(x):
    if isinstance(x, Fraction):
        return fmt(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


def _cell(v):
    if isinstance(v, Fraction):
        return fmt(v)
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return v


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


# -- config helpers ---------------------------------------------------------------

def _oracle(spec):
    try:
        return oracle_from_spec(spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad group spec {spec!r}: {exc}") from None


def _elems(G, values):
    try:
        return [parse_element(G, v) for v in values]
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"bad element for {G!r}: {exc}") from None


def _progression(G, spec):
    gens = _elems(G, spec.generators)
    lengths = [as_fraction(n) for n in spec.lengths]
    P = nilprog.Nilprogression(G, gens, lengths)
    if spec.H is None:
        return P
    return nilprog.CosetNilprogression(frozenset(_elems(G, spec.H)), P)


_ELEM = re.compile(r"^E(\d)(\d)$")


def lie_generator(k, g):
    """"E12"-style names (sums with '+' allowed) or dense matrices."""
    if isinstance(g, str):
        total = liealg.NilMatrix.zero(k)
        for part in g.replace(" ", "").split("+"):
            m = _ELEM.match(part)
            if not m:
                raise ConfigError(f"cannot read Lie generator {g!r}")
            i, j = int(m.group(1)), int(m.group(2))
            if not 1 <= i < j <= k:
                raise ConfigError(f"{part} is not strictly upper triangular in size {k}")
            total = total + liealg.E(k, i, j)
        return total
    try:
        return liealg.NilMatrix.from_dense([[as_fraction(v) for v in row] for row in g])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad Lie generator {g!r}: {exc}") from None


def volume_polynomial(k, gens, lengths):
    X = [lie_generator(k, g) for g in gens]
    N = [as_fraction(n) for n in lengths]
    if len(N) != len(X):
        raise ConfigError("one length per generator")
    table = liealg.enumerate_words(X, N)
    alpha = liealg.alpha_coeffs(table)
    return table, growth.predict_volume_polynomial(table, alpha)


def _rng(cfg):
    return np.random.default_rng(cfg.seed)


def _cap(cfg):
    return cfg.cap or DEFAULT_CAP


# -- profile ----------------------------------------------------------------------

def _check_profile(out, label, profile, run, expect):
    if expect is None:
        return
    if expect.slopes is not None:
        out.check(f"{label}: slopes", tuple(profile.slopes) == tuple(expect.slopes),
                  f"got {list(profile.slopes)}, want {expect.slopes}")
    if expect.breakpoint_args is not None and run < len(expect.breakpoint_args):
        want = [math.log(float(as_fraction(a))) for a in expect.breakpoint_args[run]]
        got = list(profile.breakpoints[1:])
        if len(got) != len(want):
            ok = False
        elif expect.breakpoint_tol == 0:
            ok = all(g == w for g, w in zip(got, want))
        else:
            ok = all(abs(g - w) <= expect.breakpoint_tol for g, w in zip(got, want))
        out.check(f"{label}: breakpoints", ok,
                  f"got {[round(g, 6) for g in got]}, want {[round(w, 6) for w in want]}"
                  f" (tol {expect.breakpoint_tol})")


def abelian_box_series(N, m_max):
    """|mA| for A = {-N..N} x {-N^2..N^2} in (Z/N^3)^2, in closed form."""
    q = N**3
    return growth.GrowthSeries(
        f"abelian_box(N={N})",
        [(m, min(2 * m * N + 1, q) * min(2 * m * N * N + 1, q)) for m in range(1, m_max + 1)])


def run_profile(cfg, out):
    run = 0
    rows = []
    if cfg.predict is not None:
        p = cfg.predict
        runs = []
        for lengths in p.lengths:
            table, V = volume_polynomial(p.k, p.generators, lengths)
            f = growth.tropicalize(V)
            label = "predict N=(" + ",".join(fmt(as_fraction(n)).removesuffix("/1") for n in lengths) + ")"
            runs.append({"lengths": [as_fraction(n) for n in lengths], "words": [str(w) for w in table.words],
                         "polynomial": V.to_json(), "profile": f.to_json()})
            for piece, (b, s) in enumerate(zip(f.breakpoints, f.slopes)):
                rows.append([label, piece, b, s])
            _check_profile(out, label, f, run, cfg.expect)
            run += 1
        out.results["predicted"] = runs
    if cfg.closed_form is not None:
        c = cfg.closed_form
        fits = []
        prof_rows = []
        for N in c.N:
            m_max = c.m_max_factor * N * N
            series = abelian_box_series(N, m_max)
            ms = growth.geometric_samples(m_max, cfg.fit.dense_upto, cfg.fit.ratio)
            fit = growth.fit_profile(series, 1, cfg.fit.max_pieces, cfg.fit.max_slope, ms=ms)
            label = f"abelian_box N={N}"
            fits.append({"N": N, "m_max": m_max, "profile": fit.profile.to_json(), "deviation": fit.deviation})
            for piece, (b, s) in enumerate(zip(fit.profile.breakpoints, fit.profile.slopes)):
                rows.append([label, piece, b, s])
            for r in growth.profile_rows(fit, series):
                prof_rows.append([label] + list(r.values()))
            _check_profile(out, label, fit.profile, run, cfg.expect)
            run += 1
        out.results["closed_form"] = fits
        out.tables["series.csv"] = (["series", "m", "cardinality", "log_cardinality", "f_fitted",
                                     "f_predicted", "deviation"], prof_rows)
    if run == 0:
        raise ConfigError("profile scenario needs 'predict' or 'closed_form'")
    out.tables["profile.csv"] = (["run", "piece", "breakpoint", "slope"], rows)


# -- grow -------------------------------------------------------------------------

def _base_set(cfg, G):
    given = [x is not None for x in (cfg.elements, cfg.coordinate_box, cfg.progression)]
    if sum(given) != 1:
        raise ConfigError("give exactly one of 'elements', 'coordinate_box', 'progression'")
    if cfg.elements is not None:
        return _elems(G, cfg.elements)
    if cfg.coordinate_box is not None:
        ranges = [range(lo_, hi + 1) for lo_, hi in cfg.coordinate_box]
        pts = itertools.product(*ranges)
        if isinstance(G, CyclicProduct):
            return list(dict.fromkeys(G.element(*p) for p in pts))
        return _elems(G, [list(p) for p in pts])
    P = _progression(G, cfg.progression)
    return sorted(nilprog.enumerate_dilate(P, 1, _cap(cfg)), key=G.sort_key)


def run_grow(cfg, out, prefix=""):
    G = _oracle(cfg.group)
    A = _base_set(cfg, G)
    exp = cfg.expect
    if exp and exp.base_size is not None:
        out.check(f"{prefix}|A|", len(A) == exp.base_size, f"got {len(A)}, want {exp.base_size}")
    try:
        series = growth.product_set_series(G, A, cfg.symmetrize, cfg.n_max, cap=_cap(cfg), descriptor=cfg.name)
    except CapExceeded as exc:
        s = exc.partial
        out.partial = True
        out.tables[prefix + "series.csv"] = (["n", "cardinality"], s.entries)
        raise
    out.results[prefix + "base_size"] = len(A)
    out.results[prefix + "series"] = series.entries
    predicted = None
    V = None
    if cfg.predict is not None:
        if len(cfg.predict.lengths) != 1:
            raise ConfigError("grow.predict takes exactly one lengths list")
        _, V = volume_polynomial(cfg.predict.k, cfg.predict.generators, cfg.predict.lengths[0])
        predicted = growth.tropicalize(V)
        out.results[prefix + "polynomial"] = V.to_json()
        out.results[prefix + "predicted_profile"] = predicted.to_json()
    if cfg.fit is not None:
        fit = growth.fit_profile(series, 1, cfg.fit.max_pieces, cfg.fit.max_slope)
        out.results[prefix + "fitted_profile"] = fit.profile.to_json()
        out.results[prefix + "deviation"] = fit.deviation
        rows = [list(r.values()) for r in growth.profile_rows(fit, series, 1, predicted)]
        out.tables[prefix + "profile.csv"] = (["m", "cardinality", "log_cardinality", "f_fitted",
                                               "f_predicted", "deviation"], rows)
        if exp and exp.slopes is not None:
            out.check(f"{prefix}fitted slopes", tuple(fit.profile.slopes) == tuple(exp.slopes),
                      f"got {list(fit.profile.slopes)}, want {exp.slopes}")
    else:
        out.tables[prefix + "series.csv"] = (["n", "cardinality"], series.entries)
    if V is not None:
        ratios = [(m, Fraction(c) / V(m)) for m, c in series.entries]
        out.tables[prefix + "ratio.csv"] = (["m", "cardinality", "V", "ratio"],
                                            [[m, series[m], V(m), float(r)] for m, r in ratios])
        if exp and exp.ratio_band is not None:
            r1 = ratios[0][1]
            band = as_fraction(Fraction(exp.ratio_band).limit_denominator(10**6))
            worst = max(max(r / r1, r1 / r) for _, r in ratios)
            out.check(f"{prefix}|A^m|/V(m) band", worst <= band,
                      f"max drift from m=1 is a factor {float(worst):.4f} (band {exp.ratio_band})")
    if exp and exp.loglog_slope is not None:
        lo_, hi = exp.loglog_range or [1, cfg.n_max]
        pts = [(m, c) for m, c in series.entries if lo_ <= m <= hi]
        slope = lo.loglog_slope([m for m, _ in pts], [c for _, c in pts])
        out.results[prefix + "loglog_slope"] = slope
        out.check(f"{prefix}log-log slope on [{lo_},{hi}]", abs(slope - exp.loglog_slope) <= exp.loglog_tol,
                  f"got {slope:.4f}, want {exp.loglog_slope} +- {exp.loglog_tol}")


# -- norm -------------------------------------------------------------------------

def _random_word(rng, G, letters, length):
    g = G.identity()
    for _ in range(length):
        g = G.mul(g, letters[int(rng.integers(len(letters)))])
    return g


def run_norm(cfg, out):
    rng = _rng(cfg) if cfg.axioms else None
    cap = _cap(cfg)
    rows = []
    for inst in cfg.instances:
        G = _oracle(inst.group)
        prog = _progression(G, inst.progression)
        hp = nilprog.as_coset(prog)
        X = _elems(G, inst.X) if inst.X is not None else [G.identity()]
        calc = nilprog.DilationNorm(hp, cap)
        calc_p = nilprog.DilationNorm(hp.P, cap)
        norms = {
            "P": lambda g: calc_p.norm(g),
            "HP": lambda g: calc.norm(g),
            "HPX": lambda g: nilprog.norm_HPX(hp, X, g, calculator=calc),
        }
        elems = _elems(G, inst.elements)
        vals = [norms[inst.norm](g) for g in elems]
        for g, v in zip(elems, vals):
            rows.append([inst.name, inst.norm, json.dumps(G.encode_value(g)), v])
        if inst.expected is not None:
            want = [as_fraction(v) for v in inst.expected]
            bad = [(G.encode_value(g), v, w) for g, v, w in zip(elems, vals, want) if v != w]
            out.check(f"{inst.name}: exact norm values", len(want) == len(vals) and not bad,
                      f"{len(vals)} elements, {len(bad)} mismatches" + (f", first {bad[0]}" if bad else ""))
        if cfg.axioms is not None:
            # ||.||_P and ||.||_HP are only finite on <P> and <P>H, so X joins
            # the alphabet for ||.||_{HP,X} alone
            p_letters = list(hp.P.generators) + [G.inv(v) for v in hp.P.generators]
            alphabets = {"P": p_letters}
            alphabets["HP"] = p_letters + [h for h in sorted(hp.H, key=G.sort_key) if h != G.identity()]
            alphabets["HPX"] = alphabets["HP"] + [x for x in X if x != G.identity()]
            for kind, nf in norms.items():
                letters = alphabets[kind]
                fails = []
                zero = nf(G.identity())
                for _ in range(cfg.axioms.pairs):
                    g = _random_word(rng, G, letters, int(rng.integers(1, cfg.axioms.radius + 1)))
                    h = _random_word(rng, G, letters, int(rng.integers(1, cfg.axioms.radius + 1)))
                    ng, nh, ngi, ngh = nf(g), nf(h), nf(G.inv(g)), nf(G.mul(g, h))
                    if ngi != ng:
                        fails.append(("inverse", g))
                    if not ngh <= ng + nh:
                        fails.append(("triangle", g, h))
                out.check(f"{inst.name}: ||.||_{kind} axioms on {cfg.axioms.pairs} pairs",
                          zero == 0 and not fails,
                          f"||1|| = {zero}; {len(fails)} failures" + (f", first {fails[0]}" if fails else ""))
    out.tables["norms.csv"] = (["instance", "norm", "element", "value"], rows)


# -- measures -----------------------------------------------------------------------

def _measure(G, spec):
    try:
        masses = {}
        for elem, mass in spec.atoms:
            g = parse_element(G, elem)
            masses[g] = masses.get(g, Fraction(0)) + as_fraction(mass)
        return measures.FiniteMeasure.from_masses(G, masses)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad measure: {exc}") from None


def _random_symmetric(rng, G, support_max, radius):
    """Symmetric measure with integer weights 1..4 on at most support_max atoms."""
    weights = {}
    budget = int(rng.integers(1, support_max + 1))
    if budget % 2 == 1 or rng.integers(2) == 0:
        weights[G.identity()] = int(rng.integers(1, 5))
    while len(weights) + 2 <= budget:
        x = _random_small(rng, G, radius)
        xi = G.inv(x)
        if x in weights or xi in weights:
            break
        w = int(rng.integers(1, 5))
        weights[x] = w
        weights[xi] = w
    if not weights:
        weights[G.identity()] = 1
    return measures.FiniteMeasure(G, weights, sum(weights.values())).reduced()


def _random_small(rng, G, radius):
    if isinstance(G, Lattice):
        return tuple(int(v) for v in rng.integers(-radius, radius + 1, G.rank))
    if isinstance(G, CyclicProduct):
        return tuple(int(rng.integers(q)) for q in G.moduli)
    if G.finite:
        return int(rng.integers(G.size()))
    raise ConfigError(f"no random element generator for {G!r}")


def run_measure_grow(cfg, out):
    cap = _cap(cfg)
    rows = []
    mus = []
    if cfg.measure is not None:
        if cfg.group is None:
            raise ConfigError("'measure' needs 'group'")
        G = _oracle(cfg.group)
        mus.append(("given", _measure(G, cfg.measure)))
    if cfg.random is not None:
        rng = _rng(cfg)
        groups = [_oracle(s) for s in cfg.random.groups]
        for i in range(cfg.random.count):
            G = groups[i % len(groups)]
            mus.append((f"random{i}", _random_symmetric(rng, G, cfg.random.support_max, cfg.random.radius)))
    monotone = 0
    for label, mu in mus:
        try:
            series = measures.convolution_growth_series(mu, cfg.n_max, cap)
            monotone += 1
        except measures.InvariantViolation as exc:
            out.check(f"{label}: l2 growth non-decreasing", False, str(exc))
            continue
        for n, l2, sup in series.rows:
            rows.append([label, n, l2, sup])
    if mus:
        out.check(f"l2 growth non-decreasing for all {len(mus)} measures", monotone == len(mus),
                  f"{monotone}/{len(mus)} monotone up to n={cfg.n_max}")
        out.tables["series.csv"] = (["measure", "n", "l2_inv_sq", "linf"], rows)
    if cfg.direct is not None:
        d = cfg.direct
        G = _oracle(cfg.group) if cfg.group else None
        if G is None:
            raise ConfigError("'direct' needs 'group'")
        HP = _progression(G, d.progression)
        X = _elems(G, d.X)
        mu = _measure(G, d.measure)
        rep = measures.direct_theorem_check(mu, HP, X, d.n, cap)
        out.results["direct"] = {"integral": rep.integral, "measured_M": rep.measured_M, "hp_size": rep.hp_size,
                                 "l2_inv_sq": rep.l2_inv_sq, "ratio": rep.ratio, "ratio_float": float(rep.ratio)}
        exp = cfg.expect
        if exp and exp.M_max is not None:
            M = as_fraction(exp.M_max)
            out.check("hypothesis integral <= M/n", rep.measured_M <= M,
                      f"n * integral = {fmt(rep.measured_M)} (M = {fmt(M)})")
        if exp and exp.ratio_max is not None:
            R = as_fraction(exp.ratio_max)
            out.check("conclusion ratio bounded", rep.ratio <= R,
                      f"ratio = {float(rep.ratio):.6f} (bound {fmt(R)})")


def run_donk(cfg, out):
    rows = []
    cap = _cap(cfg)
    for i, inst in enumerate(cfg.instances):
        G = _oracle(inst.group)
        t = measures.donk_bounds([_measure(G, m) for m in inst.measures], cap, cfg.tolerance)
        rows.append([f"given{i}", json.dumps(G.spec()), len(inst.measures), t.lhs, t.mid, t.rhs, t.holds(cfg.tolerance)])
        if inst.expected is not None:
            want = [float(as_fraction(v)) if not isinstance(v, float) else v for v in inst.expected]
            got = [float(t.lhs), float(t.mid), t.rhs]
            out.check(f"given instance {i} values", all(abs(a - b) <= cfg.tolerance for a, b in zip(got, want)),
                      f"got {got}, want {want}")
    if cfg.trials:
        rng = _rng(cfg)
        groups = [Lattice(1)] + [CyclicProduct([q]) for q in cfg.moduli]
        ok = 0
        for trial in range(cfg.trials):
            G = groups[int(rng.integers(len(groups)))]
            n = int(rng.integers(1, cfg.n_max + 1))
            ms = [_random_symmetric(rng, G, cfg.support_max, cfg.radius) for _ in range(n)]
            try:
                t = measures.donk_bounds(ms, cap, cfg.tolerance)
                held = True
            except measures.InvariantViolation:
                held = False
                t = None
            ok += held
            if t is not None:
                rows.append([trial, json.dumps(G.spec()), n, t.lhs, t.mid, t.rhs, held])
            else:
                rows.append([trial, json.dumps(G.spec()), n, "", "", "", held])
        out.check(f"chain holds on {cfg.trials} random instances", ok == cfg.trials, f"{ok}/{cfg.trials}")
    out.tables["donk.csv"] = (["instance", "group", "n", "lhs", "mid", "rhs", "holds"], rows)


def _random_gauge(rng, d):
    W = rng.random((d, d)) + 0.05
    W = (W + W.T) / 2
    np.fill_diagonal(W, 0.0)
    c = W.sum(axis=1).max() * (1 + rng.random())
    p = W / c
    p[np.diag_indices(d)] = 1 - p.sum(axis=1)
    a = rng.normal(size=(d, d))
    a = (a - a.T) / 2
    return p, a


def run_gauge(cfg, out):
    rows = []
    tol = cfg.tolerance
    for i, inst in enumerate(cfg.instances):
        g = measures.solve_drift_gauge(inst.p, inst.a)
        rows.append([f"given{i}", g.d, g.residual, g.condition, json.dumps([round(float(v), 12) for v in g.t])])
        if inst.expected_t is not None:
            err = float(np.abs(g.t - np.asarray(inst.expected_t)).max())
            out.check(f"given instance {i} t", err <= tol, f"t = {[round(float(v), 12) for v in g.t]}, max error {err:.2e}")
    if cfg.trials:
        rng = _rng(cfg)
        worst_res = 0.0
        worst_eig = 0.0
        for trial in range(cfg.trials):
            d = int(rng.integers(2, cfg.d_max + 1))
            p, a = _random_gauge(rng, d)
            g = measures.solve_drift_gauge(p, a)
            te = measures.drift_gauge_eigen(p, a)
            eig = float(np.abs(g.t - te).max())
            worst_res = max(worst_res, g.residual)
            worst_eig = max(worst_eig, eig)
            rows.append([trial, d, g.residual, g.condition, json.dumps([round(float(v), 12) for v in g.t])])
        out.check(f"residual <= {tol} on {cfg.trials} random instances", worst_res <= tol, f"worst residual {worst_res:.3e}")
        out.check("agrees with eigen-expansion", worst_eig <= tol, f"worst difference {worst_eig:.3e}")
    out.tables["gauge.csv"] = (["instance", "d", "residual", "condition", "t"], rows)


# -- lo -----------------------------------------------------------------------------

def run_lo(cfg, out):
    cap = _cap(cfg)
    rows = []
    for i, case in enumerate(cfg.bernoulli):
        G = _oracle(case.group)
        inst = lo.LOInstance(G, tuple(_elems(G, case.v)))
        rho, x = lo.bernoulli_concentration(inst, cap)
        rows.append([i, json.dumps(case.v), rho, json.dumps(G.encode_value(x))])
        if case.expected is not None:
            want = as_fraction(case.expected)
            out.check(f"rho{tuple(case.v)}".replace(" ", ""), rho == want, f"got {fmt(rho)}, want {fmt(want)}")
    if rows:
        out.tables["bernoulli.csv"] = (["case", "v", "rho", "witness"], rows)
    if cfg.walk_equality is not None:
        w = cfg.walk_equality
        rng = _rng(cfg)
        groups = [_oracle(s) for s in w.groups]
        eq_rows = []
        agree = 0
        for trial in range(w.trials):
            G = groups[trial % len(groups)]
            n = int(rng.integers(1, w.n_max + 1))
            A = tuple(_random_small(rng, G, w.radius) for _ in range(n))
            inst = lo.LOInstance(G, A)
            val, _ = lo.symmetrized_walk_concentration(inst, n, cap)
            # the same quantity through the measures module, built from explicit masses
            masses = {}
            for a in A:
                for b in (a, G.inv(a)):
                    masses[b] = masses.get(b, Fraction(0)) + Fraction(1, 2 * n)
            mu = measures.FiniteMeasure.from_masses(G, masses)
            ref = measures.linf(measures.convolve_all([mu] * n, cap))
            agree += val == ref
            eq_rows.append([trial, json.dumps(G.spec()), n, val, ref, val == ref])
        out.check(f"walk concentration equals ||mu^*n||_inf on {w.trials} instances", agree == w.trials,
                  f"{agree}/{w.trials} exact matches")
        out.tables["walk_equality.csv"] = (["trial", "group", "n", "walk", "measures", "equal"], eq_rows)


def run_mam(cfg, out):
    rows = []
    rng = _rng(cfg) if any(c.random_elements for c in cfg.cases) else None
    reports = {}
    for case in cfg.cases:
        G = _oracle(case.group)
        if (case.elements is None) == (case.random_elements is None):
            raise ConfigError(f"case {case.label}: give exactly one of 'elements' and 'random_elements'")
        if case.elements is not None:
            A = tuple(_elems(G, case.elements))
        else:
            A = tuple(int(x) for x in rng.integers(0, G.size(), case.random_elements))
        rep = lo.mam_experiment(lo.LOInstance(G, A), case.eps, case.order_cap,
                                None if case.fraction_target is None else as_fraction(case.fraction_target),
                                _cap(cfg))
        reports[case.label] = rep.to_json(G)
        rows.append([case.label, rep.n, fmt(rep.eps), rep.sup, float(rep.sup), rep.threshold, rep.hypothesis,
                     rep.subgroup.order or "", rep.subgroup.fraction if rep.subgroup.found else "",
                     rep.order_constant if rep.order_constant is not None else "",
                     rep.outlier_constant if rep.outlier_constant is not None else ""])
        if case.expect_hypothesis is not None:
            out.check(f"{case.label}: hypothesis", rep.hypothesis == case.expect_hypothesis,
                      f"sup = {float(rep.sup):.6f} vs 1/(eps sqrt n) = {rep.threshold:.6f}")
        if case.expect_order is not None:
            out.check(f"{case.label}: subgroup order", rep.subgroup.order == case.expect_order,
                      f"got {rep.subgroup.order}, want {case.expect_order}")
        if case.expect_fraction_min is not None:
            fmin = as_fraction(case.expect_fraction_min)
            out.check(f"{case.label}: covered fraction", rep.subgroup.found and rep.subgroup.fraction >= fmin,
                      f"got {None if not rep.subgroup.found else fmt(rep.subgroup.fraction)}, want >= {fmt(fmin)}")
    out.results["cases"] = reports
    out.tables["mam.csv"] = (["case", "n", "eps", "sup", "sup_float", "threshold", "hypothesis", "subgroup_order",
                              "fraction", "order_constant", "outlier_constant"], rows)


def run_mam2(cfg, out):
    G = _oracle(cfg.group)
    mu = _measure(G, cfg.measure)
    rep = lo.mam2_experiment(mu, cfg.d, cfg.eps, cfg.n, _cap(cfg))
    out.results.update({"n": rep.n, "d": rep.d, "eps": rep.eps, "sup": rep.sup, "sup_float": float(rep.sup),
                        "threshold": rep.threshold, "hypothesis": rep.hypothesis, "degree": rep.degree,
                        "consistent": rep.consistent, "decay_slope": rep.decay_slope})
    out.tables["decay.csv"] = (["n", "linf", "log_linf"], [[m, v, math.log(v)] for m, v in rep.decay])
    if cfg.expect_consistent is not None:
        out.check("degree side consistent with the decay side", rep.consistent == cfg.expect_consistent,
                  f"hypothesis {rep.hypothesis}, degree {rep.degree}, d = {cfg.d}")


def run_bass(cfg, out):
    rows = []
    for case in cfg.cases:
        gens = [lie_generator(case.k, g) for g in case.generators]
        D = lo.bass_guivarch_degree(gens)
        dims = lo.lower_central_dimensions([g for g in gens if not g.is_zero()])
        rows.append([case.label, D, json.dumps(dims)])
        if case.expected is not None:
            out.check(f"{case.label}: degree", D == case.expected, f"got {D}, want {case.expected}")
    out.tables["degrees.csv"] = (["case", "degree", "lower_central_dims"], rows)
    if cfg.slope_check is not None:
        sub = cfg.slope_check
        if sub.cap is None and cfg.cap is not None:
            sub = sub.model_copy(update={"cap": cfg.cap})
        run_grow(sub, out, prefix="slope_")


def run_sandwich(cfg, out):
    G = _oracle(cfg.group)
    A = _elems(G, cfg.A)
    HP = _progression(G, cfg.progression)
    cap = _cap(cfg)
    rows = []

    def one(label, X):
        rep = growth.check_control_sandwich(G, A, HP, X, cfg.n, cfg.C, tuple(cfg.ms), cap)
        for m, r in rep.results.items():
            w = r["upper_witness"] if r["upper_witness"] is not None else r["lower_witness"]
            rows.append([label, m, r["lower"], r["upper"], *r["sizes"],
                         "" if w is None else json.dumps(G.encode_value(w))])
        return rep

    rep = one("X", _elems(G, cfg.X))
    out.check(f"inclusions hold for m in {cfg.ms}", rep.holds,
              "; ".join(f"m={m}: lower {r['lower']}, upper {r['upper']}" for m, r in rep.results.items()))
    if cfg.control_X is not None:
        ctrl = one("control", _elems(G, cfg.control_X))
        wit = next((r["upper_witness"] or r["lower_witness"] for r in ctrl.results.values()
                    if not (r["lower"] and r["upper"])), None)
        out.check("corrupted X fails with a witness", not ctrl.holds and wit is not None,
                  f"witness {None if wit is None else G.encode_value(wit)}")
    out.tables["sandwich.csv"] = (["X", "m", "lower", "upper", "inner_size", "S_size", "outer_size", "witness"], rows)


RUNNERS = {
    "profile": run_profile,
    "grow": run_grow,
    "norm": run_norm,
    "measure-grow": run_measure_grow,
    "donk": run_donk,
    "gauge": run_gauge,
    "lo": run_lo,
    "mam": run_mam,
    "mam2": run_mam2,
    "bass": run_bass,
    "sandwich": run_sandwich,
}


def execute(cfg) -> Outcome:
    """Run a parsed config.  CapExceeded propagates with ``outcome`` attached
    so the caller can write the partial artifacts."""
    out = Outcome(cfg.name or cfg.kind, cfg.kind)
    try:
        RUNNERS[cfg.kind](cfg, out)
    except CapExceeded as exc:
        out.partial = True
        exc.outcome = out
        raise
    return out
