"""System-definition grammar: parsing, errors and print/parse round trips."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from unbounded3d.polyfield import (ExponentError, ParameterOrderError, ParseError,
                                   TriPolynomial, UnknownIdentifierError, X, Y, parse_system)


def test_michelson_terms():
    f = parse_system("dx=y\ndy=z\ndz=c^2-y-x^2/2", {"c": 1.0})
    assert f[2].as_dict() == {(0, 0, 0): 1.0, (0, 1, 0): -1.0, (2, 0, 0): -0.5}


def test_param_lines_comments_and_blank_lines():
    text = """
    # Sprott-E variant
    param a = 2
    dx = y*z + a   # affine in a
    dy = x^2 - y
    dz = 1 - 4*x
    """
    f = parse_system(text)
    assert f[0] == Y * X * 0 + TriPolynomial({(0, 1, 1): 1.0, (0, 0, 0): 2.0})
    assert f.parameters == {"a": 2.0}


def test_override_beats_param_line():
    f = parse_system("param a = 2\ndx = a\ndy = 0\ndz = 0", {"a": 5})
    assert f[0] == TriPolynomial.constant(5)


def test_negative_param_and_unary_signs():
    f = parse_system("param k = -3\ndx = -x + k\ndy = -(y - 1)\ndz = +z")
    assert f[0] == -X - 3
    assert f[1] == 1 - Y


def test_parentheses_and_powers():
    f = parse_system("dx = (x + y)^2\ndy = 2*(x - 1)*3\ndz = x/4")
    assert f[0] == X ** 2 + 2 * X * Y + Y ** 2
    assert f[1] == 6 * X - 6


@pytest.mark.parametrize("text, exc, line", [
    ("dx = y +\ndy = 0\ndz = 0", ParseError, 1),
    ("dx = y\ndy = q\ndz = 0", UnknownIdentifierError, 2),
    ("dx = x^1.5\ndy = 0\ndz = 0", ExponentError, 1),
    ("dx = x^-1\ndy = 0\ndz = 0", ParseError, 1),
    ("dx = a\nparam a = 1\ndy = 0\ndz = 0", ParameterOrderError, 1),
    ("dx = y\ndy = z", ParseError, 3),
    ("dx = y\ndx = z\ndz = 0\ndy = 0", ParseError, 2),
    ("dx = x/y\ndy = 0\ndz = 0", ParseError, 1),
    ("dw = x\ndy = 0\ndz = 0", UnknownIdentifierError, 1),
    ("dx = 1 $ 2\ndy = 0\ndz = 0", ParseError, 1),
])
def test_errors_carry_location(text, exc, line):
    with pytest.raises(exc) as info:
        parse_system(text)
    assert info.value.line == line
    assert info.value.column >= 1


exps = st.tuples(*(st.integers(0, 4),) * 3)
coefs = st.floats(-1e3, 1e3, allow_nan=False).filter(lambda c: abs(c) > 1e-6)
polys = st.dictionaries(exps, coefs, max_size=6).map(TriPolynomial)


@given(polys, polys, polys)
def test_print_parse_round_trip(p, q, r):
    text = f"dx = {p.to_expr()}\ndy = {q.to_expr()}\ndz = {r.to_expr()}"
    f = parse_system(text)
    assert f.components == (p, q, r)


def test_field_to_text_round_trip():
    from unbounded3d.polyfield import zoo
    for sid in ("bz", "genesio", "michelson", "sprott_e_variant", "dumm"):
        f = zoo(sid)
        assert parse_system(f.to_text()) == f
