"""Velocity level sets, tangency curves and crossing classification."""

import numpy as np
import pytest

from unbounded3d.level_sets import (DEGENERATE, H_MINUS, H_PLUS, STAYS_NONNEG, STAYS_NONPOS,
                                    TANGENCY, LevelSetError, NotOnLevelSetError,
                                    classify_crossing, crossing_class, level_set_analysis, lie_derivatives,
                                    tangency_local_behavior)
from unbounded3d.polyfield import TriPolynomial, X, Z, zoo

WINDOW = ((-10, 10),) * 3


@pytest.fixture(scope="module")
def bz_analysis():
    return level_set_analysis(zoo("bz"), 1, WINDOW)


@pytest.fixture(scope="module")
def sprott_analysis():
    return level_set_analysis(zoo("sprott_e_variant", a=1), 3, ((-20, 20),) * 3)


def check_residuals(field_, i, pts, tol=1e-9):
    fi, lf, _ = lie_derivatives(field_, i)
    assert np.max(np.abs(fi.evaluate(pts))) < tol
    assert np.max(np.abs(lf.evaluate(pts))) < tol


def test_bz_x_axis(bz_analysis):
    a = bz_analysis
    assert a.planar and a.topology == "single_line" and a.monotone
    assert a.L == Z
    pts = a.samples
    np.testing.assert_allclose(pts[:, 1:], 0, atol=1e-9)
    assert pts[:, 0].min() < -9 and pts[:, 0].max() > 9
    check_residuals(zoo("bz"), 1, pts, tol=1e-11)


def test_bz_second_lie_derivative(bz_analysis):
    xs = np.linspace(-3, 3, 13)
    pts = np.stack([xs, 0 * xs, 0 * xs], axis=1)
    np.testing.assert_allclose(bz_analysis.L2.evaluate(pts), xs * (1 + xs), atol=1e-12)


def test_monotone_segments_increase(bz_analysis):
    for seg in bz_analysis.segments:
        if seg.monotone:
            xs = seg.points[:, 0]
            assert np.all(np.diff(xs) > 0) or np.all(np.diff(xs) < 0)


def test_michelson_half_planes():
    f = zoo("michelson", c=1)
    a = level_set_analysis(f, 1, WINDOW)
    assert a.topology == "single_line" and a.two_half_planes
    assert classify_crossing(f, 1, [3.0, 0, 0.5]) == H_PLUS
    assert classify_crossing(f, 1, [-3.0, 0, -0.5]) == H_MINUS


def test_sprott_branched(sprott_analysis):
    a = sprott_analysis
    assert a.topology == "branched" and a.planar
    pts = a.samples
    np.testing.assert_allclose(pts[:, 0], 0.25, atol=1e-12)
    np.testing.assert_allclose(pts[:, 1] * pts[:, 2], -1.0, atol=1e-9)
    # split at the pole y = 0: one component per sign of y
    signs = sorted(int(np.sign(c.points[len(c.points) // 2, 1])) for c in a.components)
    assert signs == [-1, 1]
    # the component through the fixed point is split there
    at_fp = [s for s in a.segments if s.start_fixed_point is not None or
             s.end_fixed_point is not None]
    assert len(at_fp) == 2 and len(a.segments) == 3
    for s in at_fp:
        end = s.points[0] if s.start_fixed_point is not None else s.points[-1]
        np.testing.assert_allclose(end, [0.25, 1 / 16, -16], atol=1e-9)


def test_crossing_classification_bz():
    f = zoo("bz")
    assert classify_crossing(f, 1, [0, 0, 1]) == H_PLUS
    assert classify_crossing(f, 1, [0, 0, -1]) == H_MINUS
    assert classify_crossing(f, 1, [0.5, 0, 0]) == TANGENCY
    with pytest.raises(NotOnLevelSetError):
        classify_crossing(f, 1, [0, 1, 0])


def test_tangency_local_behavior():
    bz, mich = zoo("bz"), zoo("michelson", c=1)
    assert tangency_local_behavior(bz, 1, [-0.5, 0, 0]) == STAYS_NONPOS
    assert tangency_local_behavior(bz, 1, [1.0, 0, 0]) == STAYS_NONNEG
    assert tangency_local_behavior(mich, 1, [2.0, 0, 0]) == STAYS_NONPOS
    with pytest.raises(LevelSetError):
        tangency_local_behavior(bz, 1, [0, 0, 0])
    with pytest.raises(NotOnLevelSetError):
        tangency_local_behavior(bz, 1, [0, 0, 1])


@pytest.mark.parametrize("sid, i", [("bz", 1), ("genesio", 1), ("michelson", 1)])
def test_negation_properties(sid, i):
    f = zoo(sid)
    g = f.negated()
    xs = np.linspace(-4, 4, 9) + 0.123
    rng = np.random.default_rng(0)
    for x in xs:
        z = rng.uniform(0.2, 2) * rng.choice([-1, 1])
        s = [x, 0, z]
        # measured against the original F_i, negation reverses the crossing direction
        a = crossing_class(f, i, s)
        b = crossing_class(g, i, s, lf=g.lie_derivative(f[i - 1]))
        assert {a, b} == {H_PLUS, H_MINUS}
        # on each field's own level set, -F_i and -F give back the same Lie derivative
        assert classify_crossing(g, i, s) == classify_crossing(f, i, s)
        p = np.array([x, 0, 0])
        if np.linalg.norm(f(p)) > 1e-6:
            # same geometric side; labels are relative to each field's own F_i = -(-F_i)
            flip = {STAYS_NONNEG: STAYS_NONPOS, STAYS_NONPOS: STAYS_NONNEG}
            assert tangency_local_behavior(g, i, p) == flip[tangency_local_behavior(f, i, p)]


def test_linear_level_sets_are_transverse():
    for sid, i in [("bz", 1), ("genesio", 1), ("michelson", 1), ("sprott_e_variant", 3)]:
        a = level_set_analysis(zoo(sid), i, ((-20, 20),) * 3)
        assert a.planar and a.plane_transversal and a.plane_transversal_certified


def test_degenerate_tangency_on_pure_shear():
    # F = (y, 0, 1): L = 0 on H = {y = 0}; every point is a flat tangency
    from unbounded3d.polyfield import PolyVectorField, Y
    f = PolyVectorField((Y, TriPolynomial.zero(), TriPolynomial.constant(1)))
    assert tangency_local_behavior(f, 1, [0.3, 0, 0]) == DEGENERATE


def test_component_index_validated():
    with pytest.raises(ValueError):
        lie_derivatives(zoo("bz"), 4)
