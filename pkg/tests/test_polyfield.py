"""Polynomial algebra, vector-field calculus and the system zoo."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unbounded3d.polyfield import (ParameterRangeError, PolyVectorField, TriPolynomial,
                                   UnknownSystemError, X, Y, Z, linear_field, parse_system,
                                   zoo, zoo_entry, zoo_ids)

exps = st.tuples(*(st.integers(0, 3),) * 3)
coefs = st.floats(-5, 5, allow_nan=False).filter(lambda c: abs(c) > 1e-3)
polys = st.dictionaries(exps, coefs, max_size=6).map(TriPolynomial)
points = st.tuples(*(st.floats(-2, 2, allow_nan=False),) * 3).map(np.array)


def random_field(seed):
    rng = np.random.default_rng(seed)
    comps = []
    for _ in range(3):
        terms = {tuple(rng.integers(0, 3, 3)): rng.uniform(-2, 2) for _ in range(5)}
        comps.append(TriPolynomial(terms))
    return PolyVectorField(tuple(comps))


# -- canonical form -------------------------------------------------------------


def test_small_coefficients_dropped_and_terms_sorted():
    p = TriPolynomial({(0, 1, 0): 1.0, (1, 0, 0): 2.0, (0, 0, 1): 1e-16})
    assert [e for e, _ in p.terms] == [(0, 1, 0), (1, 0, 0)]


def test_cancellation_gives_zero_polynomial():
    assert (X * Y - Y * X).is_zero()
    assert TriPolynomial.zero().terms == ()


@given(polys)
def test_canonicalization_idempotent(p):
    assert TriPolynomial(p.as_dict()) == p
    assert TriPolynomial(p.terms) == p


@given(polys, polys, points)
def test_arithmetic_matches_evaluation(p, q, s):
    scale = 1 + abs(p.evaluate(s)) * (1 + abs(q.evaluate(s)))
    assert math.isclose((p + q).evaluate(s), p.evaluate(s) + q.evaluate(s), abs_tol=1e-9 * scale)
    assert math.isclose((p * q).evaluate(s), p.evaluate(s) * q.evaluate(s),
                        abs_tol=1e-9 * scale)


@given(polys)
def test_mixed_partials_commute(p):
    assert p.diff(0).diff(1).allclose(p.diff(1).diff(0), atol=1e-9)


def test_division_by_constant_only():
    assert (X ** 2 / 2).allclose(TriPolynomial({(2, 0, 0): 0.5}))
    with pytest.raises((ValueError, ZeroDivisionError, TypeError)):
        X / Y


# -- field calculus -------------------------------------------------------------


def test_bz_on_x_axis_points_vertically():
    f = zoo("bz")
    np.testing.assert_allclose(f.evaluate([1.0, 0, 0]), [0, 0, 2])
    for x in np.linspace(-3, 3, 7):
        np.testing.assert_allclose(f.evaluate([x, 0, 0]), [0, 0, x * (x + 1)], atol=1e-12)


def test_sprott_on_tangency_hyperbola():
    f = zoo("sprott_e_variant", a=1)
    np.testing.assert_allclose(f.evaluate([0.25, 2.0, -0.5]), [0, -1.9375, 0], atol=1e-15)


def test_zero_field(identity_field):
    f = parse_system("dx=0\ndy=0\ndz=0")
    assert all(c.terms == () for c in f.components)
    np.testing.assert_array_equal(f.evaluate([3.0, -1.0, 2.0]), np.zeros(3))


def test_michelson_jacobian_at_fixed_point():
    for c in (0.5, 1.0, 2.0):
        f = zoo("michelson", c=c)
        j = f.jacobian_at([c * math.sqrt(2), 0, 0])
        np.testing.assert_allclose(j, [[0, 1, 0], [0, 0, 1], [-c * math.sqrt(2), -1, 0]],
                                   atol=1e-14)


def test_dumm_jacobian_determinant():
    eps = 0.1
    f = zoo("dumm", eps=eps, a=1.0)
    rng = np.random.default_rng(1)
    for s in rng.uniform(-50, 50, (10, 3)):
        assert math.isclose(np.linalg.det(f.jacobian_at(s)), -2 * eps * s[1] - 1,
                            rel_tol=1e-9, abs_tol=1e-9)


def test_identity_jacobian(identity_field):
    np.testing.assert_array_equal(identity_field.jacobian_at([4.0, 5.0, 6.0]), np.eye(3))


@pytest.mark.parametrize("seed", range(5))
def test_jacobian_matches_central_differences(seed):
    f = random_field(seed)
    rng = np.random.default_rng(100 + seed)
    s = rng.uniform(-1, 1, 3)
    h = rng.normal(size=3)
    h *= 1e-4 / np.linalg.norm(h)
    fd = (f.evaluate(s + h) - f.evaluate(s - h)) / 2
    np.testing.assert_allclose(f.jacobian_at(s) @ h, fd, atol=1e-6 * 1e-4)


def test_divergence_examples(identity_field):
    assert zoo("michelson").divergence().is_zero()
    b, c = 1.5, 0.7
    assert zoo("bz", b=b, c=c).divergence() == TriPolynomial.constant(-1) - b * X - c * X ** 2
    assert identity_field.divergence() == TriPolynomial.constant(3)


def test_lie_derivative_examples():
    m = zoo("michelson")
    assert m.lie_derivative(m[0]) == Z
    s = zoo("sprott_e_variant", a=1.0)
    assert s.lie_derivative(s[2]).allclose(-4 * (Y * Z + 1))
    assert m.lie_derivative(TriPolynomial.constant(7)).is_zero()


@pytest.mark.parametrize("seed", range(5))
def test_lie_derivative_is_gradient_dot_field(seed):
    f = random_field(seed)
    s = np.random.default_rng(seed).uniform(-1, 1, 3)
    for g in f.components:
        grad = np.array([d.evaluate(s) for d in g.gradient()])
        assert math.isclose(f.lie_derivative(g).evaluate(s), grad @ f.evaluate(s),
                            abs_tol=1e-9)


def test_negated_field():
    f = zoo("bz")
    s = np.array([0.3, -0.2, 1.1])
    np.testing.assert_allclose(f.negated().evaluate(s), -f.evaluate(s))


def test_linear_field_shape_check():
    with pytest.raises(ValueError):
        linear_field(np.eye(2))


# -- zoo ------------------------------------------------------------------------


def test_zoo_michelson_formula():
    f = zoo("michelson", c=1)
    assert f[0] == Y and f[1] == Z
    assert f[2] == TriPolynomial.constant(1) - Y - X ** 2 / 2


def test_zoo_bz_formula():
    f = zoo("bz", a=1, b=1, c=1)
    expected = X - 4 * Y - Z + X ** 2 - Y ** 2 - X * Z - X ** 2 * Z
    assert f[2] == expected


def test_zoo_genesio_formula():
    f = zoo("genesio", a=1, b=1)
    assert f[2] == -Z - Y - X - X ** 2


def test_zoo_sprott_formula():
    f = zoo("sprott_e_variant", a=1)
    assert f[0] == Y * Z + 1 and len(f[0].terms) == 2
    assert f[2] == 1 - 4 * X


def test_zoo_ids_and_entries():
    assert set(zoo_ids()) == {"bz", "genesio", "michelson", "sprott_e_variant", "dumm"}
    assert zoo_entry("sprott_e_variant").component == 3


def test_zoo_errors():
    with pytest.raises(UnknownSystemError):
        zoo("lorenz")
    with pytest.raises(ParameterRangeError):
        zoo("michelson", c=-1)
    with pytest.raises(ParameterRangeError):
        zoo("michelson", d=1)
    with pytest.raises(ParameterRangeError):
        zoo("sprott_e_variant", a=0)


def test_zoo_parameters_recorded():
    assert zoo("michelson", c=2.0).parameters == {"c": 2.0}
