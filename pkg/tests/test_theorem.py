"""Hypothesis checks, structure prediction and verification of the conclusions."""

import math

import numpy as np
import pytest
from conftest import hypotheses, pipeline

from unbounded3d.polyfield import parse_system, zoo
from unbounded3d.theorem import (EVIDENCE, FAIL, HYPOTHESIS_IDS, PASS, PredictionError,
                                 TrappingRegion, check_hypotheses, predict_structure)


@pytest.mark.parametrize("sid", ["bz", "genesio", "michelson"])
def test_generic_systems_pass(sid):
    _, rep = hypotheses(sid)
    assert rep.verdict == PASS and rep.failed == []
    assert [e.id for e in rep.entries] == list(HYPOTHESIS_IDS)
    status = {e.id: e.status for e in rep.entries}
    assert status["h1"] == PASS
    # completeness of the equilibrium search and sampled tangency signs are evidence only
    assert status["h2"] == EVIDENCE and status["h3e"] == EVIDENCE
    assert all(status[h] == PASS for h in ("h3a", "h3b", "h3c", "h3d", "h3f"))


def test_sprott_fails_on_branched_tangency():
    _, rep = hypotheses("sprott_e_variant")
    assert rep.verdict == FAIL
    assert "h3b" in rep.failed
    assert set(rep.failed) <= {"h3b", "h3d", "h3f"}
    assert rep.branched_path_applicable
    assert rep.entry("h1").details["index"] == 1


def test_degenerate_genesio_fails_h2():
    rep = check_hypotheses(zoo("genesio", a=1, b=1), 1)
    assert rep.entry("h2").status == FAIL
    assert rep.verdict == FAIL and not rep.branched_path_applicable


def test_index_two_fails_h1():
    # (x + iy)^2 in the plane, times z: degree 2 on large spheres
    f = parse_system("dx = x^2 - y^2 + 1\ndy = 2*x*y\ndz = z")
    rep = check_hypotheses(f, 1, search_box=((-5, 5),) * 3)
    assert rep.entry("h1").status == FAIL
    with pytest.raises(PredictionError):
        predict_structure(f, 1, rep)


def test_verdict_monotone_under_any_failure():
    _, rep = hypotheses("bz")
    import copy
    broken = copy.deepcopy(rep)
    broken.entries[3].status = FAIL
    assert broken.verdict == FAIL


def test_predictions_extremal():
    for sid, (x1, x2) in {"bz": (-1.0, 0.0), "michelson": (-math.sqrt(2), math.sqrt(2)),
                          "genesio": (-1.0, 0.0)}.items():
        _, _, pred, _ = pipeline(sid)
        assert pred.x1.location[0] == pytest.approx(x1, abs=1e-10)
        assert pred.x2.location[0] == pytest.approx(x2, abs=1e-10)
        coords = [e.location[pred.i - 1] for e in pred.equilibria]
        assert pred.x1.location[pred.i - 1] == min(coords) < max(coords)
        assert pred.path == "generic"


def test_sprott_single_fixed_point_plays_both_roles():
    _, _, pred, _ = pipeline("sprott_e_variant")
    assert pred.path == "branched"
    np.testing.assert_allclose(pred.x1.location, [0.25, 1 / 16, -16], atol=1e-10)
    np.testing.assert_array_equal(pred.x1.location, pred.x2.location)
    # regions are {dz/dt >= 0} & {z <= -16} and {dz/dt <= 0} & {z >= -16}
    r1, r2 = pred.region1, pred.region2
    assert (r1.sign, r1.side, r2.sign, r2.side) == (1, -1, -1, 1)
    assert r1.bound == pytest.approx(-16) and r2.bound == pytest.approx(-16)


def test_branched_path_refused_without_permission():
    f, rep = hypotheses("sprott_e_variant")
    with pytest.raises(PredictionError):
        predict_structure(f, 3, rep, allow_branched=False)


@pytest.mark.parametrize("sid", ["bz", "michelson"])
def test_negation_swaps_case(sid):
    f, _, pred, _ = pipeline(sid)
    g = f.negated()
    rep = check_hypotheses(g, 1)
    assert rep.verdict == PASS
    neg = predict_structure(g, 1, rep)
    swap = {"A": "B", "B": "A"}
    assert neg.case1 == swap[pred.case1] and neg.case2 == swap[pred.case2]
    np.testing.assert_array_equal(neg.x1.location, pred.x1.location)


def test_trapping_region_violation():
    f = zoo("bz")
    region = TrappingRegion(1, +1, -1, -1.0)
    inside = np.array([[-2.0, 0.5, 0.0], [-1.5, 0.0, 3.0]])
    coord, wrong = region.violation(f, inside)
    assert coord <= 0 and wrong <= 0
    coord, wrong = region.violation(f, np.array([[0.5, -0.3, 0.0]]))
    assert coord == pytest.approx(1.5) and wrong == pytest.approx(0.3, rel=1e-6)


@pytest.mark.parametrize("sid", ["bz", "genesio", "michelson"])
def test_generic_verification(sid):
    _, _, pred, ver = pipeline(sid)
    assert ver.verified and not ver.inconclusive and ver.unknot_certified
    for gamma in (ver.gamma1, ver.gamma2):
        chosen = gamma.selected
        assert chosen.ok and chosen.escaped and chosen.coord_excursion <= 1e-6
    assert all(t.verdict == "transverse" for t in ver.transversality)


def test_report_serializable():
    import json
    from unbounded3d.cli import jsonable
    _, rep, pred, ver = pipeline("bz")
    for obj in (rep.to_dict(), pred.to_dict(), ver.to_dict()):
        json.dumps(jsonable(obj))
