"""Sphere-map degree, index at infinity, Poincare-Hopf audit and behaviour at infinity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unbounded3d.equilibria import find_equilibria
from unbounded3d.polyfield import TriPolynomial, X, Z, linear_field, zoo
from unbounded3d.sphere_degree import (FixedPointOnSphereError, ZeroRadialProductError,
                                       index_at_infinity, jacobian_range_probe,
                                       poincare_hopf_audit, radial_dominance,
                                       sphere_map_degree)


def test_identity_and_antipodal(identity_field):
    for r in (1.0, 37.0):
        assert sphere_map_degree(identity_field, r).degree == 1
        assert sphere_map_degree(identity_field.negated(), r).degree == -1


def test_regular_value_evidence_sums_to_degree():
    d = sphere_map_degree(zoo("sprott_e_variant"), 100.0)
    assert d.conclusive
    assert sum(p.sign for p in d.preimages) == d.degree


def test_bz_degree_zero():
    assert sphere_map_degree(zoo("bz"), 100.0).degree == 0


def test_michelson_omitted_direction():
    d = sphere_map_degree(zoo("michelson", c=1), 100.0, method="omitted_direction")
    assert d.conclusive and d.degree == 0
    np.testing.assert_allclose(d.witness, [0, 0, 1], atol=0.05)


def test_omitted_direction_inconclusive_when_surjective(identity_field):
    d = sphere_map_degree(identity_field, 10.0, method="omitted_direction")
    assert not d.conclusive and d.degree is None


def test_fixed_point_on_sphere_rejected():
    f = zoo("michelson", c=1)
    eqs = find_equilibria(f, ((-5, 5),) * 3)
    with pytest.raises(FixedPointOnSphereError):
        sphere_map_degree(f, np.sqrt(2.0), equilibria=eqs)


def test_bad_radius(identity_field):
    with pytest.raises(ValueError):
        sphere_map_degree(identity_field, 0.0)


@pytest.mark.parametrize("sid, index", [("bz", 0), ("genesio", 0), ("michelson", 0),
                                        ("sprott_e_variant", 1)])
def test_index_at_infinity(sid, index):
    rep = index_at_infinity(zoo(sid))
    assert rep.stable and rep.index == index
    assert rep.radii[1] == pytest.approx(4 * rep.radii[0])


def test_identity_index(identity_field):
    assert index_at_infinity(identity_field).index == -1


@pytest.mark.parametrize("sid", ["bz", "genesio", "michelson", "sprott_e_variant"])
def test_degree_radius_invariance(sid):
    f = zoo(sid)
    degs = {sphere_map_degree(f, r).degree for r in (60.0, 240.0, 960.0)}
    assert len(degs) == 1


@pytest.mark.parametrize("sid", ["bz", "genesio", "michelson", "sprott_e_variant"])
def test_poincare_hopf_residual_zero(sid):
    assert poincare_hopf_audit(zoo(sid)).residual == 0


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_linear_degree_is_sign_det(seed):
    a = np.random.default_rng(seed).normal(size=(3, 3))
    if abs(np.linalg.det(a)) < 0.05 or np.linalg.cond(a) > 1e3:
        return
    assert sphere_map_degree(linear_field(a), 5.0).degree == int(np.sign(np.linalg.det(a)))


def test_radial_dominance_identity(identity_field):
    rep = radial_dominance(identity_field)
    assert rep.top_degree == 2
    assert rep.P == X ** 2 + TriPolynomial({(0, 2, 0): 1.0, (0, 0, 2): 1.0})
    assert rep.fraction_positive == 1.0


def test_radial_dominance_top_components():
    m = radial_dominance(zoo("michelson", c=1))
    assert m.top_degree == 3 and m.g_k == -0.5 * X ** 2 * Z
    b = radial_dominance(zoo("bz", c=1))
    assert b.top_degree == 4 and b.g_k == -(X ** 2) * Z ** 2
    for rep in (m, b):
        total = TriPolynomial.zero()
        for comp in rep.components.values():
            total = total + comp
        assert total == rep.P


def test_radial_dominance_scaling_oracle():
    f = zoo("michelson", c=1)
    rep = radial_dominance(f)
    u = np.array([0.3, -0.5, 0.81])
    u /= np.linalg.norm(u)
    r = 1e6
    assert rep.P.evaluate(r * u) / r ** 3 == pytest.approx(rep.g_k.evaluate(u), rel=1e-5)


def test_radial_dominance_tangent_field_rejected():
    rot = linear_field([[0, -1, 0], [1, 0, 0], [0, 0, 0]])
    with pytest.raises(ZeroRadialProductError):
        radial_dominance(rot)


def test_jacobian_range_probe():
    dumm = jacobian_range_probe(zoo("dumm", eps=0.1, a=1), [100.0])
    lo, hi = dumm.ranges[0]
    assert lo == pytest.approx(-21.0, abs=1e-9) and hi == pytest.approx(19.0, abs=1e-9)
    ident = jacobian_range_probe(linear_field(np.eye(3)))
    assert all(r == pytest.approx((1.0, 1.0)) for r in ident.ranges)
    assert not ident.non_smooth_at_infinity
    mich = jacobian_range_probe(zoo("michelson", c=1))
    for rad, (lo, hi) in zip(mich.radii, mich.ranges):
        assert lo == pytest.approx(-rad) and hi == pytest.approx(rad)
    assert mich.non_smooth_at_infinity
