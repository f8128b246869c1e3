"""Shared, cached fixtures for the expensive end-to-end computations."""

from __future__ import annotations

import functools

import numpy as np
import pytest

from unbounded3d.polyfield import linear_field, zoo
from unbounded3d.theorem import check_hypotheses, predict_structure, verify_prediction

THEOREM_SYSTEMS = {"bz": 1, "genesio": 1, "michelson": 1, "sprott_e_variant": 3}


@functools.lru_cache(maxsize=None)
def hypotheses(system: str):
    f = zoo(system)
    return f, check_hypotheses(f, THEOREM_SYSTEMS[system])


@functools.lru_cache(maxsize=None)
def pipeline(system: str):
    """(field, hypothesis report, prediction, verification) for a zoo system."""
    f, rep = hypotheses(system)
    pred = predict_structure(f, THEOREM_SYSTEMS[system], rep, allow_branched=True)
    return f, rep, pred, verify_prediction(f, pred)


@pytest.fixture
def identity_field():
    return linear_field(np.eye(3), name="identity")


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion (all parts must pass)."""
    import re
    outcome: dict[int, list[tuple[str, bool]]] = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", "call") != "call" and key == "passed":
                continue
            m = re.search(r"test_acceptance\.py::test_c(\d\d)_(\w+)(\[.*\])?", rep.nodeid)
            if m:
                outcome.setdefault(int(m.group(1)), []).append(
                    (m.group(2) + (m.group(3) or ""), key == "passed"))
    if not outcome:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcome):
        parts = outcome[n]
        failed = [p for p, ok in parts if not ok]
        line = f"criterion {n:2d}: {'PASS' if not failed else 'FAIL'} ({len(parts)} part(s)"
        line += f"; failing: {', '.join(failed)})" if failed else ")"
        terminalreporter.write_line(line)
