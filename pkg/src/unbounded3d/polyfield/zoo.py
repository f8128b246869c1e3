"""Built-in systems analysed in the literature on unbounded dynamics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .field import PolyVectorField
from .parser import parse_system


class UnknownSystemError(KeyError):
    pass


class ParameterRangeError(ValueError):
    pass


@dataclass(frozen=True)
class ZooEntry:
    system_id: str
    source: str
    defaults: Mapping[str, float]
    validity: Mapping[str, tuple[str, Callable[[float], bool]]]
    description: str
    component: int = 1
    box: Callable[[Mapping[str, float]], float] = field(default=lambda p: 10.0)

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return tuple(self.defaults)

    def search_box(self, params: Mapping[str, float]) -> tuple[tuple[float, float], ...]:
        h = self.box(params)
        return ((-h, h),) * 3


def _positive(v: float) -> bool:
    return v > 0


def _nonzero(v: float) -> bool:
    return v != 0


_ENTRIES = {
    "bz": ZooEntry(
        "bz",
        "dx = y\ndy = z\ndz = x - 4*y - z + x^2 - a*y^2 - b*x*z - c*x^2*z\n",
        {"a": 1.0, "b": 1.0, "c": 1.0},
        {k: ("> 0", _positive) for k in "abc"},
        "Belousov-Zhabotinsky reaction model (jerk form)",
    ),
    "genesio": ZooEntry(
        "genesio",
        "dx = y\ndy = z\ndz = -a*z - b*y - x*(1 + x)\n",
        # a = b = 1 puts the origin exactly on a Hopf point (eigenvalues -1, +-i)
        {"a": 1.2, "b": 2.92},
        {k: ("> 0", _positive) for k in "ab"},
        "Genesio-Tesi jerk system",
    ),
    "michelson": ZooEntry(
        "michelson",
        "dx = y\ndy = z\ndz = c^2 - y - x^2/2\n",
        {"c": 1.0},
        {"c": ("> 0", _positive)},
        "Michelson system (Kuramoto-Sivashinsky travelling waves)",
        box=lambda p: max(10.0, 2.0 * math.sqrt(2.0) * p["c"]),
    ),
    "sprott_e_variant": ZooEntry(
        "sprott_e_variant",
        "dx = y*z + a\ndy = x^2 - y\ndz = 1 - 4*x\n",
        {"a": 1.0},
        {"a": ("!= 0", _nonzero)},
        "Variant of the Sprott E system with a single equilibrium",
        component=3,
        box=lambda p: max(20.0, 20.0 * abs(p["a"])),
    ),
    "dumm": ZooEntry(
        "dumm",
        "dx = y + eps*x\ndy = z\ndz = -a*z + y^2 - x\n",
        {"eps": 0.1, "a": 1.0},
        {"eps": ("> 0", _positive), "a": ("> 0", _positive)},
        "Field whose Jacobian determinant is unbounded near infinity",
        # second equilibrium sits at (1/eps^2, -1/eps, 0)
        box=lambda p: max(10.0, 1.5 / p["eps"] ** 2),
    ),
}


def zoo_ids() -> list[str]:
    return list(_ENTRIES)


def zoo_entry(system_id: str) -> ZooEntry:
    try:
        return _ENTRIES[system_id]
    except KeyError:
        raise UnknownSystemError(
            f"unknown system {system_id!r}; known: {', '.join(_ENTRIES)}") from None


def resolve_params(system_id: str, params: Mapping[str, float] | None = None,
                   **kwargs: float) -> dict[str, float]:
    entry = zoo_entry(system_id)
    merged = dict(entry.defaults)
    for k, v in {**(params or {}), **kwargs}.items():
        if k not in entry.defaults:
            raise ParameterRangeError(f"{system_id} has no parameter {k!r}")
        merged[k] = float(v)
    for k, (desc, ok) in entry.validity.items():
        if not ok(merged[k]):
            raise ParameterRangeError(f"{system_id}: parameter {k}={merged[k]} must be {desc}")
    return merged


def zoo(system_id: str, params: Mapping[str, float] | None = None,
        **kwargs: float) -> PolyVectorField:
    """Build a zoo system with defaults overridden by ``params``/keywords."""
    merged = resolve_params(system_id, params, **kwargs)
    entry = zoo_entry(system_id)
    return parse_system(entry.source, merged, name=system_id)
