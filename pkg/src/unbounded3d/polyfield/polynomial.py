"""Sparse trivariate polynomials with real (binary64) coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

MAX_DEGREE = 16
DROP_TOL = 1e-14

Exponents = tuple[int, int, int]

VARIABLES = ("x", "y", "z")


@dataclass(frozen=True)
class Monomial:
    coefficient: float
    exponents: Exponents

    def __post_init__(self):
        if self.coefficient == 0:
            raise ValueError("monomial coefficient must be non-zero")
        if len(self.exponents) != 3 or any(e < 0 for e in self.exponents):
            raise ValueError(f"bad exponent triple {self.exponents!r}")
        if sum(self.exponents) > MAX_DEGREE:
            raise ValueError(
                f"monomial degree {sum(self.exponents)} exceeds MAX_DEGREE={MAX_DEGREE}")

    @property
    def degree(self) -> int:
        return sum(self.exponents)


def _format_number(c: float) -> str:
    if c.is_integer() and abs(c) < 1e15:
        return str(int(c))
    return repr(c)


def _monomial_body(exps: Exponents, pow_op: str) -> str:
    parts = []
    for var, e in zip(VARIABLES, exps):
        if e == 1:
            parts.append(var)
        elif e > 1:
            parts.append(f"{var}{pow_op}{e}")
    return "*".join(parts)


class TriPolynomial:
    """Immutable polynomial in x, y, z stored as a canonical term tuple.

    Terms are kept sorted lexicographically by exponent triple; coefficients
    with magnitude below ``DROP_TOL`` are discarded. The zero polynomial has
    no terms.
    """

    __slots__ = ("_terms", "_fn")

    def __init__(self, terms: Mapping[Exponents, float] | Iterable[tuple[Exponents, float]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Exponents, float] = {}
        for exps, coef in items:
            exps = tuple(int(e) for e in exps)
            acc[exps] = acc.get(exps, 0.0) + float(coef)
        kept = []
        for exps in sorted(acc):
            coef = acc[exps]
            if abs(coef) < DROP_TOL:
                continue
            Monomial(coef, exps)  # validates
            kept.append((exps, coef))
        self._terms = tuple(kept)
        self._fn = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, c: float) -> TriPolynomial:
        return cls({(0, 0, 0): c})

    @classmethod
    def variable(cls, index: int) -> TriPolynomial:
        exps = [0, 0, 0]
        exps[index] = 1
        return cls({tuple(exps): 1.0})

    @classmethod
    def zero(cls) -> TriPolynomial:
        return cls()

    # -- inspection ---------------------------------------------------------
    @property
    def terms(self) -> tuple[tuple[Exponents, float], ...]:
        return self._terms

    def monomials(self) -> list[Monomial]:
        return [Monomial(c, e) for e, c in self._terms]

    def as_dict(self) -> dict[Exponents, float]:
        return dict(self._terms)

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e, _ in self._terms), default=-1)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(e == (0, 0, 0) for e, _ in self._terms)

    def constant_value(self) -> float:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self._terms[0][1] if self._terms else 0.0

    def is_homogeneous(self, k: int) -> bool:
        return all(sum(e) == k for e, _ in self._terms)

    def linear_part(self) -> np.ndarray:
        """Coefficients of x, y, z (gradient of the degree-1 part)."""
        d = self.as_dict()
        return np.array([d.get((1, 0, 0), 0.0), d.get((0, 1, 0), 0.0), d.get((0, 0, 1), 0.0)])

    # -- algebra ------------------------------------------------------------
    @staticmethod
    def _coerce(other) -> TriPolynomial:
        if isinstance(other, TriPolynomial):
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return TriPolynomial.constant(float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TriPolynomial(list(self._terms) + list(other._terms))

    __radd__ = __add__

    def __neg__(self):
        return TriPolynomial([(e, -c) for e, c in self._terms])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = []
        for e1, c1 in self._terms:
            for e2, c2 in other._terms:
                out.append(((e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]), c1 * c2))
        return TriPolynomial(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TriPolynomial):
            if not other.is_constant():
                raise ValueError("division is only defined by constants")
            other = other.constant_value()
        other = float(other)
        if other == 0.0:
            raise ZeroDivisionError("polynomial division by zero")
        return TriPolynomial([(e, c / other) for e, c in self._terms])

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = TriPolynomial.constant(1.0)
        base = self
        n = int(n)
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            other = TriPolynomial.constant(float(other))
        if not isinstance(other, TriPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    def allclose(self, other: TriPolynomial, atol: float = 1e-12) -> bool:
        a, b = self.as_dict(), other.as_dict()
        return all(abs(a.get(k, 0.0) - b.get(k, 0.0)) <= atol for k in set(a) | set(b))

    # -- calculus -----------------------------------------------------------
    def diff(self, var: int) -> TriPolynomial:
        out = []
        for e, c in self._terms:
            if e[var] == 0:
                continue
            ne = list(e)
            ne[var] -= 1
            out.append((tuple(ne), c * e[var]))
        return TriPolynomial(out)

    def gradient(self) -> tuple[TriPolynomial, TriPolynomial, TriPolynomial]:
        return (self.diff(0), self.diff(1), self.diff(2))

    def homogeneous_components(self) -> dict[int, TriPolynomial]:
        groups: dict[int, list] = {}
        for e, c in self._terms:
            groups.setdefault(sum(e), []).append((e, c))
        return {k: TriPolynomial(v) for k, v in sorted(groups.items())}

    # -- evaluation ---------------------------------------------------------
    def to_python(self) -> str:
        """Python expression in x, y, z with exactly representable coefficients."""
        if not self._terms:
            return "0.0"
        pieces = []
        for e, c in self._terms:
            body = _monomial_body(e, "**")
            pieces.append(f"({c!r})*{body}" if body else f"({c!r})")
        return " + ".join(pieces)

    @property
    def fn(self) -> Callable:
        if self._fn is None:
            self._fn = eval(f"lambda x, y, z: {self.to_python()}", {})
        return self._fn

    def __call__(self, x, y, z):
        out = self.fn(x, y, z)
        if isinstance(x, np.ndarray) and not isinstance(out, np.ndarray):
            out = np.full(np.broadcast(x, y, z).shape, out, dtype=float)
        return out

    def evaluate(self, s) -> float | np.ndarray:
        s = np.asarray(s, dtype=float)
        return self(s[..., 0], s[..., 1], s[..., 2])

    # -- printing -----------------------------------------------------------
    def to_expr(self) -> str:
        """Expression in the system-definition grammar (round-trips through the parser)."""
        if not self._terms:
            return "0"
        out = []
        for idx, (e, c) in enumerate(self._terms):
            body = _monomial_body(e, "^")
            mag = abs(c)
            if body:
                text = body if mag == 1.0 else f"{_format_number(mag)}*{body}"
            else:
                text = _format_number(mag)
            if idx == 0:
                out.append(("-" if c < 0 else "") + text)
            else:
                out.append(("- " if c < 0 else "+ ") + text)
        return " ".join(out)

    def __str__(self):
        return self.to_expr()

    def __repr__(self):
        return f"TriPolynomial({self.to_expr()!r})"


X = TriPolynomial.variable(0)
Y = TriPolynomial.variable(1)
Z = TriPolynomial.variable(2)
