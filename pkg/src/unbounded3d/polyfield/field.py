"""Polynomial vector fields on R^3 and their formal calculus."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .polynomial import TriPolynomial, X, Y, Z


@dataclass(frozen=True, eq=False)
class PolyVectorField:
    """F = (F1, F2, F3) with parameters already substituted into the coefficients."""

    components: tuple[TriPolynomial, TriPolynomial, TriPolynomial]
    name: str = "custom"
    parameters: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.components) != 3:
            raise ValueError("a vector field on R^3 needs exactly three components")
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "parameters", dict(self.parameters))

    def __eq__(self, other):
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __getitem__(self, i: int) -> TriPolynomial:
        return self.components[i]

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.components)

    # -- evaluation ---------------------------------------------------------
    @cached_property
    def _rhs(self):
        src = ", ".join(c.to_python() for c in self.components)
        return eval(f"lambda x, y, z: ({src})", {})

    def __call__(self, s) -> np.ndarray:
        """Evaluate at a single point (fast path used by the integrator)."""
        return np.array(self._rhs(s[0], s[1], s[2]), dtype=float)

    def evaluate(self, s) -> np.ndarray:
        """Evaluate at a point or an array of points with trailing axis 3."""
        s = np.asarray(s, dtype=float)
        if s.ndim == 1:
            return self(s)
        return np.stack([c.evaluate(s) for c in self.components], axis=-1)

    # -- calculus -----------------------------------------------------------
    @cached_property
    def jacobian(self) -> tuple[tuple[TriPolynomial, ...], ...]:
        """Entry (i, j) is the formal partial derivative of F_i by variable j."""
        return tuple(tuple(c.diff(j) for j in range(3)) for c in self.components)

    @cached_property
    def _jac_fn(self):
        src = ", ".join(p.to_python() for row in self.jacobian for p in row)
        return eval(f"lambda x, y, z: ({src})", {})

    def jacobian_at(self, s) -> np.ndarray:
        """Numeric Jacobian; accepts (3,) or (..., 3) input."""
        s = np.asarray(s, dtype=float)
        if s.ndim == 1:
            return np.array(self._jac_fn(s[0], s[1], s[2]), dtype=float).reshape(3, 3)
        entries = [p.evaluate(s) for row in self.jacobian for p in row]
        return np.stack(entries, axis=-1).reshape(s.shape[:-1] + (3, 3))

    def divergence(self) -> TriPolynomial:
        return self.jacobian[0][0] + self.jacobian[1][1] + self.jacobian[2][2]

    def lie_derivative(self, g: TriPolynomial) -> TriPolynomial:
        """grad(g) . F as a polynomial."""
        out = TriPolynomial.zero()
        for j in range(3):
            out = out + g.diff(j) * self.components[j]
        return out

    def radial_product(self) -> TriPolynomial:
        """P(s) = F(s) . s."""
        return self.components[0] * X + self.components[1] * Y + self.components[2] * Z

    # -- derived fields -------------------------------------------------------
    def negated(self) -> PolyVectorField:
        return PolyVectorField(tuple(-c for c in self.components),
                               name=f"-({self.name})", parameters=self.parameters)

    def to_text(self) -> str:
        header = f"# {self.name}"
        if self.parameters:
            header += " " + " ".join(f"{k}={v!r}" for k, v in sorted(self.parameters.items()))
        lines = [header]
        for var, comp in zip(("dx", "dy", "dz"), self.components):
            lines.append(f"{var} = {comp.to_expr()}")
        return "\n".join(lines) + "\n"

    def __str__(self):
        return "; ".join(f"{v} = {c}" for v, c in zip(("dx", "dy", "dz"), self.components))


def linear_field(matrix: Sequence[Sequence[float]], name: str = "linear") -> PolyVectorField:
    """F(s) = A s."""
    a = np.asarray(matrix, dtype=float)
    if a.shape != (3, 3):
        raise ValueError("linear field needs a 3x3 matrix")
    comps = tuple(
        TriPolynomial({(1, 0, 0): a[i, 0], (0, 1, 0): a[i, 1], (0, 0, 1): a[i, 2]})
        for i in range(3))
    return PolyVectorField(comps, name=name)
