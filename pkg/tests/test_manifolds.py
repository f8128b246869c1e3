"""One-dimensional invariant manifolds, sign records, shooting and invariant graphs."""

import numpy as np
import pytest

from unbounded3d.equilibria import classify_equilibrium, find_equilibria
from unbounded3d.flowkit import MICHELSON_REVERSOR
from unbounded3d.manifolds import (CONSTANT_NEGATIVE, CONSTANT_POSITIVE, ESCAPED,
                                   HETEROCLINIC_KNOT, IDENTICALLY_ZERO, MIXED, UNKNOT,
                                   UNRESOLVED, Connection, ManifoldError, NoSignChangeError,
                                   assemble_invariant_graph, connection_distance,
                                   default_epsilon, find_connection, is_weak_direction,
                                   michelson_family, parameterize_manifold, real_eigenvector,
                                   shooting_functional, sign_invariance, trace_1d_manifolds,
                                   trace_branch, transversality_2d)
from unbounded3d.polyfield import linear_field, zoo


@pytest.fixture(scope="module")
def saddle():
    f = linear_field(np.diag([1.0, -1.0, -1.0]), name="saddle")
    return f, classify_equilibrium(f, [0, 0, 0])


@pytest.fixture(scope="module")
def michelson():
    f = zoo("michelson", c=1)
    return f, find_equilibria(f, ((-5, 5),) * 3)


@pytest.fixture(scope="module")
def bz():
    f = zoo("bz")
    return f, find_equilibria(f, ((-5, 5),) * 3)


def test_linear_saddle_axis(saddle):
    f, eq = saddle
    plus, minus = trace_1d_manifolds(f, eq)
    for tr, sign in ((plus, CONSTANT_POSITIVE), (minus, CONSTANT_NEGATIVE)):
        assert tr.status == ESCAPED and tr.stability == "unstable"
        assert np.max(np.abs(tr.points[:, 1:])) == 0.0
        assert tr.signs[1].value == sign
        assert tr.signs[2].value == IDENTICALLY_ZERO
        assert np.linalg.norm(tr.exit_point) >= 999.0
        assert tr.exit_point @ f(tr.exit_point) > 0


def test_seed_on_eigenvector(saddle):
    f, eq = saddle
    lam, v = real_eigenvector(eq)
    tr = trace_branch(f, eq, "minus")
    assert lam == pytest.approx(1.0)
    np.testing.assert_allclose(tr.seed, -default_epsilon(eq) * v)


def test_reversed_time_is_negative_control(saddle):
    f, eq = saddle
    tr = trace_branch(f, eq, "plus", reverse_time=True, t_max=50.0)
    assert tr.status != ESCAPED
    assert np.linalg.norm(tr.trajectory.final) < default_epsilon(eq)


def test_sign_invariance_mixed_on_crossing_orbit(michelson):
    f, eqs = michelson
    from unbounded3d.flowkit import integrate
    from unbounded3d.manifolds import ManifoldTrace
    traj = integrate(f, [0, 0.1, 0], (0, 6))
    tr = ManifoldTrace(eqs[1], "plus", "stable", traj, ESCAPED, 1e-12, traj.ys[0], None, None,
                       {})
    rec = sign_invariance(tr, f, 1)
    assert rec.value == MIXED and rec.violation is not None


def test_michelson_stable_branches_escape(michelson):
    f, eqs = michelson
    for tr in trace_1d_manifolds(f, eqs[1], equilibria=eqs):
        assert tr.stability == "stable" and tr.status == ESCAPED


def test_michelson_reversibility_of_traces(michelson):
    f, eqs = michelson
    stable = trace_1d_manifolds(f, eqs[1], equilibria=eqs)
    unstable = trace_1d_manifolds(f, eqs[0], equilibria=eqs)
    for s in stable:
        img = MICHELSON_REVERSOR(s.points)
        best = min(unstable, key=lambda u: np.linalg.norm(u.exit_point - MICHELSON_REVERSOR(
            s.exit_point)))
        # pointwise after arclength alignment: compare at matched arclength fractions
        def resample(pts, n=200):
            seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
            arc = np.concatenate([[0], np.cumsum(seg)])
            grid = np.linspace(0, arc[-1], n)
            return np.stack([np.interp(grid, arc, pts[:, k]) for k in range(3)], axis=1)
        a, b = resample(img), resample(best.points)
        assert np.max(np.linalg.norm(a - b, axis=1)) < 1e-6 * 1e3


def test_seed_independence(bz):
    f, eqs = bz
    for eq in eqs:
        for br in ("plus", "minus"):
            t1 = trace_branch(f, eq, br, equilibria=eqs)
            if t1.status != ESCAPED:
                continue
            t2 = trace_branch(f, eq, br, eps=default_epsilon(eq) / 2, equilibria=eqs)
            assert np.linalg.norm(t1.exit_point - t2.exit_point) < 1e-4


def test_weak_direction_series():
    f = zoo("sprott_e_variant", a=1)
    eq = find_equilibria(f, ((-20, 20),) * 3)[0]
    assert is_weak_direction(eq)
    local = parameterize_manifold(f, eq)
    assert local.radius > 0
    np.testing.assert_allclose(local.point(0.0), eq.location)
    lam, v = real_eigenvector(eq)
    assert local.lam == pytest.approx(lam)
    for sigma in (1e-3, 0.1 * local.radius, 0.25 * local.radius):
        assert local.residual(f, sigma) < 1e-10 * (1 + np.linalg.norm(local.point(sigma)))


def test_strong_direction_not_weak(michelson):
    _, eqs = michelson
    assert not any(is_weak_direction(e) for e in eqs)


def test_transversality(michelson):
    f, eqs = michelson
    for eq in eqs:
        assert transversality_2d(f, eq, 1).verdict == "transverse"
    sp = zoo("sprott_e_variant", a=1)
    assert transversality_2d(sp, find_equilibria(sp, ((-20, 20),) * 3)[0], 3).verdict \
        == "transverse"
    diag = linear_field(np.diag([1.0, 1.0, -1.0]))
    assert transversality_2d(diag, classify_equilibrium(diag, [0, 0, 0]), 3).verdict == "tangent"


def test_transversality_requires_planar_h(bz):
    f, eqs = bz
    with pytest.raises(ManifoldError):
        transversality_2d(f, eqs[0], 3)


def test_connection_distance_michelson_c1(michelson):
    f, eqs = michelson
    d, tr = connection_distance(f, eqs[0], eqs[1], equilibria=eqs)
    assert 1e-3 < d < np.inf


def test_connection_distance_linear_no_return(saddle):
    f, eq = saddle
    d, _ = connection_distance(f, eq, eq)
    assert d >= 100 * default_epsilon(eq) * 0.999


def test_shooting_functional_signs():
    a = shooting_functional(michelson_family, 0.35)
    b = shooting_functional(michelson_family, 0.4)
    assert a.crossing is not None and b.crossing is not None
    assert np.sign(a.g) != np.sign(b.g)
    assert abs(a.crossing[0]) < 1e-9


def test_no_sign_change_reported():
    with pytest.raises(NoSignChangeError):
        find_connection(michelson_family, (0.2, 0.3), 0.05)


def test_graph_unknot_bz(bz):
    f, eqs = bz
    sink, sf = eqs
    lo = [t for t in trace_1d_manifolds(f, sink, equilibria=eqs) if t.status == ESCAPED]
    hi = [t for t in trace_1d_manifolds(f, sf, equilibria=eqs) if t.status == ESCAPED]
    ok = False
    for g1 in lo:
        for g2 in hi:
            g = assemble_invariant_graph(f, [g1, g2], unknot=(1, g1, g2))
            ok |= g.classification == UNKNOT
    assert ok


def test_graph_unresolved_and_connection(michelson):
    f, eqs = michelson
    traces = list(trace_1d_manifolds(f, eqs[1], equilibria=eqs))
    g = assemble_invariant_graph(f, traces)
    assert g.classification == UNRESOLVED
    assert all(e.target == "infinity" for e in g.edges)
    g2 = assemble_invariant_graph(f, traces + list(trace_1d_manifolds(f, eqs[0],
                                                                      equilibria=eqs)),
                                  connections=[Connection(1, 0, 0.0)])
    assert g2.classification == HETEROCLINIC_KNOT


def test_graph_rejects_foreign_traces(michelson, bz):
    f, eqs = michelson
    traces = trace_1d_manifolds(f, eqs[1], equilibria=eqs)
    with pytest.raises(ManifoldError):
        assemble_invariant_graph(bz[0], traces)
