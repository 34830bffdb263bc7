"""Command line entry point.

    nilgrowth run CONFIG [CONFIG ...] [--out DIR] [--jobs N] [--cap STATES] [--seed S] [--trials T]
    nilgrowth plot-series ARTIFACT_DIR [...] [--out FILE]

Exit codes: 0 all checks passed, 1 some scenario check failed, 2 config
error, 3 state cap exceeded (partial artifacts are written and flagged),
4 internal assertion failure.  With several configs the largest code wins.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, load_config
from .groups import CapExceeded
from .runner import Outcome, execute, render_csv

EXIT_OK, EXIT_CHECKS, EXIT_CONFIG, EXIT_CAP, EXIT_INTERNAL = 0, 1, 2, 3, 4


def atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def apply_overrides(cfg, cap=None, seed=None, trials=None):
    update = {}
    if cap is not None:
        update["cap"] = cap
    if seed is not None:
        update["seed"] = seed
    if trials is not None:
        if "trials" not in type(cfg).model_fields:
            raise ConfigError(f"--trials does not apply to scenario kind {cfg.kind!r}")
        update["trials"] = trials
    return cfg.model_copy(update=update) if update else cfg


def run_one(path, cap=None, seed=None, trials=None):
    """Returns (exit code, name, report lines, artifacts dict)."""
    t0 = time.perf_counter()
    try:
        cfg = apply_overrides(load_config(path), cap, seed, trials)
        outcome = execute(cfg)
        code = EXIT_OK if outcome.passed else EXIT_CHECKS
    except ConfigError as exc:
        return EXIT_CONFIG, Path(path).stem, [f"config error in {path}: {exc}"], {}
    except CapExceeded as exc:
        outcome = getattr(exc, "outcome", None) or Outcome(Path(path).stem, "?", partial=True)
        outcome.check("within state cap", False, str(exc))
        code = EXIT_CAP
    except AssertionError as exc:
        return EXIT_INTERNAL, Path(path).stem, [f"internal assertion failed in {path}: {exc}"], {}
    except (ValueError, TypeError, KeyError, IndexError) as exc:
        # library precondition errors (non-symmetric measure, dependent generators, ...)
        return EXIT_CONFIG, Path(path).stem, [f"invalid input in {path}: {type(exc).__name__}: {exc}"], {}
    elapsed = time.perf_counter() - t0
    lines = [f"== {outcome.name} ({outcome.kind}) {elapsed:.2f} s" + (" [partial]" if outcome.partial else "")]
    for c in outcome.checks:
        lines.append(f"  {'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    return code, outcome.name, lines, outcome.artifacts()


def cmd_run(args) -> int:
    jobs = max(1, args.jobs)
    calls = [(p, args.cap, args.seed, args.trials) for p in args.configs]
    if jobs > 1 and len(calls) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_star, calls))
    else:
        results = [run_one(*c) for c in calls]
    out = Path(args.out)
    code = EXIT_OK
    for rc, name, lines, artifacts in results:
        for line in lines:
            print(line)
        for fname, text in sorted(artifacts.items()):
            atomic_write(out / name / fname, text)
        code = max(code, rc)
    return code


def _run_star(call):
    return run_one(*call)


# -- plot series ---------------------------------------------------------------------

def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def plot_rows(artifact: Path):
    """Long-format (series, x, y) rows from the CSVs in one artifact directory."""
    tag = artifact.name
    rows = []
    prof = artifact / "profile.csv"
    if prof.exists():
        data = _read_csv(prof)
        if data and "m" in data[0]:
            for r in data:
                rows.append((f"{tag}:log_cardinality", r["m"], r["log_cardinality"]))
            for r in data:
                if r["f_predicted"] != "":
                    rows.append((f"{tag}:f_predicted", r["m"], r["f_predicted"]))
            for r in data:
                rows.append((f"{tag}:f_fitted", r["m"], r["f_fitted"]))
    series = artifact / "series.csv"
    if series.exists():
        data = _read_csv(series)
        if data and "series" in data[0]:
            for r in data:
                rows.append((f"{tag}:{r['series']}:log_cardinality", r["m"], r["log_cardinality"]))
        elif data and "cardinality" in data[0]:
            for r in data:
                rows.append((f"{tag}:log_cardinality", r["n"], repr(math.log(int(r["cardinality"])))))
        elif data and "l2_inv_sq" in data[0]:
            for r in data:
                rows.append((f"{tag}:{r['measure']}:l2_inv_sq", r["n"], r["l2_inv_sq"]))
    decay = artifact / "decay.csv"
    if decay.exists():
        for r in _read_csv(decay):
            rows.append((f"{tag}:log_linf", r["n"], r["log_linf"]))
    return rows


def cmd_plot_series(args) -> int:
    rows = []
    for a in args.artifacts:
        p = Path(a)
        if not p.is_dir():
            print(f"missing artifact directory {p}", file=sys.stderr)
            return EXIT_CONFIG
        got = plot_rows(p)
        if not got:
            print(f"no plottable CSV in {p}", file=sys.stderr)
            return EXIT_CONFIG
        rows.extend(got)
    text = render_csv(["series", "x", "y"], rows)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        atomic_write(Path(args.out), text)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="nilgrowth", description="Growth of product sets and convolution powers.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run scenario configs and write artifacts")
    r.add_argument("configs", nargs="+")
    r.add_argument("--out", default="out", help="artifact directory (default: out)")
    r.add_argument("--jobs", type=int, default=1, help="run independent configs in parallel")
    r.add_argument("--cap", type=int, default=None, help="state cap for enumerations")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--trials", type=int, default=None, help="override the number of random trials")
    r.set_defaults(func=cmd_run)
    p = sub.add_parser("plot-series", help="reshape artifacts into (series, x, y) CSV")
    p.add_argument("artifacts", nargs="+")
    p.add_argument("--out", default="-", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_plot_series)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
