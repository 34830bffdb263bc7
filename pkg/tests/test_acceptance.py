"""The thirteen acceptance criteria, one shipped scenario each.

Each scenario's own checks carry the stated tolerances; the runtime budgets
below are the stated ones (criteria without a budget share the five-minute
suite target).  One PASS/FAIL line per criterion is printed at the end of
the module, or by running this file directly.
"""

import sys
import time
from pathlib import Path

import pytest

from nilgrowth.config import load_config
from nilgrowth.runner import execute

SCEN = Path(__file__).resolve().parent.parent / "scenarios"

CRITERIA = [
    (1, "01_heisenberg_predicted_profile", "Heisenberg predicted profile", 1.0),
    (2, "02_heisenberg_empirical_profile", "Heisenberg empirical agreement", 120.0),
    (3, "03_abelian_closed_form_profile", "abelian closed-form profile", 5.0),
    (4, "04_dihedral_seminorm", "dihedral seminorm", None),
    (5, "05_donk_chain", "three-measure chain", 10.0),
    (6, "06_drift_gauge", "drift gauge", None),
    (7, "07_norm_axioms", "norm axioms", None),
    (8, "08_young_monotonicity", "Young monotonicity", None),
    (9, "09_direct_theorem", "direct theorem desk check", 5.0),
    (10, "10_littlewood_offord", "Littlewood-Offord", None),
    (11, "11_planted_subgroup", "planted subgroup", None),
    (12, "12_bass_guivarch", "Bass-Guivarc'h degrees", None),
    (13, "13_dihedral_sandwich", "dihedral sandwich", None),
]

RESULTS = {}


def run_criterion(stem, budget):
    cfg = load_config(SCEN / f"{stem}.json")
    t0 = time.perf_counter()
    outcome = execute(cfg)
    elapsed = time.perf_counter() - t0
    failed = [f"{c.name}: {c.detail}" for c in outcome.checks if not c.passed]
    if budget is not None and elapsed > budget:
        failed.append(f"runtime {elapsed:.2f} s over the {budget:g} s budget")
    return not failed, elapsed, failed, len(outcome.checks)


def line(num, title, ok, elapsed, failed):
    head = f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {title} ({elapsed:.2f} s)"
    return head if ok else head + "\n" + "\n".join(f"      {f}" for f in failed)


@pytest.fixture(scope="module", autouse=True)
def report(request):
    yield
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    if tr is None or not RESULTS:
        return
    tr.write_line("")
    tr.write_line("acceptance criteria")
    for num in sorted(RESULTS):
        tr.write_line(RESULTS[num])


@pytest.mark.parametrize("num,stem,title,budget", CRITERIA, ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(num, stem, title, budget):
    ok, elapsed, failed, nchecks = run_criterion(stem, budget)
    RESULTS[num] = line(num, title, ok, elapsed, failed)
    assert nchecks > 0
    assert ok, "\n".join(failed)


if __name__ == "__main__":
    bad = 0
    for num, stem, title, budget in CRITERIA:
        ok, elapsed, failed, _ = run_criterion(stem, budget)
        bad += not ok
        print(line(num, title, ok, elapsed, failed), flush=True)
    sys.exit(1 if bad else 0)
