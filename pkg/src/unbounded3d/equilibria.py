"""Fixed points of polynomial fields: location, spectrum and type."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .polyfield import PolyVectorField, zoo_entry, zoo_ids

DET_TOL = 1e-10
IMAG_AXIS_TOL = 1e-10
COMPLEX_TOL = 1e-9

SADDLE_FOCUS = "saddle_focus"
COMPLEX_SINK = "complex_sink"
COMPLEX_SOURCE = "complex_source"
REAL_NODE = "real_node"
REAL_SADDLE = "real_saddle"
DEGENERATE = "degenerate"

Box = Sequence[tuple[float, float]]


class NotAnEquilibriumError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Equilibrium:
    location: np.ndarray
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex, complex]
    classification: str
    local_index: int | None
    shilnikov_ratio: float | None

    @property
    def has_complex_pair(self) -> bool:
        return _is_complex(self.eigenvalues[1])

    @property
    def real_eigenvalue(self) -> float | None:
        """The real eigenvalue when a complex pair exists, else None."""
        return self.eigenvalues[0].real if self.has_complex_pair else None

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.jacobian))

    def to_dict(self) -> dict:
        return {
            "location": [float(v) for v in self.location],
            "eigenvalues": [[float(l.real), float(l.imag)] for l in self.eigenvalues],
            "classification": self.classification,
            "local_index": self.local_index,
            "shilnikov_ratio": self.shilnikov_ratio,
            "jacobian": [[float(v) for v in row] for row in self.jacobian],
        }


def _is_complex(lam: complex) -> bool:
    return abs(lam.imag) > COMPLEX_TOL * (1.0 + abs(lam))


def characteristic_coefficients(a: np.ndarray) -> tuple[float, float, float]:
    """(c2, c1, c0) with det(lambda I - A) = lambda^3 + c2 lambda^2 + c1 lambda + c0."""
    tr = a[0, 0] + a[1, 1] + a[2, 2]
    minors = (a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
              + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
              + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
    det = float(np.linalg.det(a))
    return -float(tr), float(minors), -det


def cubic_roots(c2: float, c1: float, c0: float) -> list[complex]:
    """Roots of the monic cubic l^3 + c2 l^2 + c1 l + c0 in closed form.

    Depressed-cubic reduction with a discriminant branch (Cardano for one real
    root, trigonometric form for three), followed by two Newton polishing steps
    on the original cubic. Deterministic, no iteration to convergence.
    """
    shift = c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    disc_scale = (q / 2.0) ** 2 + abs(p / 3.0) ** 3
    size = max(1.0, abs(shift), abs(c1) ** 0.5, abs(c0) ** (1.0 / 3.0))
    if abs(p) <= 1e-12 * size ** 2 and abs(q) <= 1e-12 * size ** 3:
        roots = [0j, 0j, 0j]
    elif p != 0 and abs(disc) <= 1e-12 * disc_scale:
        # repeated real root: rounding would otherwise split it into a spurious pair
        roots = [complex(3.0 * q / p), complex(-1.5 * q / p), complex(-1.5 * q / p)]
    elif disc > 0:
        sq = math.sqrt(disc)
        # avoid cancellation: pick the larger-magnitude radicand first
        w = -q / 2.0 - sq if q > 0 else -q / 2.0 + sq
        u = float(np.cbrt(w))
        v = -p / (3.0 * u) if u != 0 else 0.0
        t_real = u + v
        re = -(u + v) / 2.0
        im = abs(u - v) * math.sqrt(3.0) / 2.0
        roots = [complex(t_real), complex(re, im), complex(re, -im)]
    elif p == 0:
        roots = [0j, 0j, 0j]
    else:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * r)
        arg = min(1.0, max(-1.0, arg))
        phi = math.acos(arg) / 3.0
        roots = [complex(r * math.cos(phi - 2.0 * math.pi * k / 3.0)) for k in range(3)]
    roots = [t - shift for t in roots]

    def f(l):
        return ((l + c2) * l + c1) * l + c0

    def df(l):
        return (3.0 * l + 2.0 * c2) * l + c1

    polished = []
    for lam in roots:
        for _ in range(2):
            d = df(lam)
            if d == 0:
                break
            step = f(lam) / d
            if not np.isfinite(step):
                break
            cand = lam - step
            if abs(f(cand)) <= abs(f(lam)):
                lam = cand
        polished.append(lam)
    return polished


def order_eigenvalues(roots: Sequence[complex]) -> tuple[complex, complex, complex]:
    """Real eigenvalue first (then +Im, -Im) when a pair exists; otherwise ascending."""
    roots = list(roots)
    cplx = [r for r in roots if _is_complex(r)]
    if len(cplx) >= 2:
        real = min(roots, key=lambda r: abs(r.imag))
        pair = [r for r in roots if r is not real]
        pos = max(pair, key=lambda r: r.imag)
        re, im = pos.real, abs(pos.imag)
        return (complex(real.real, 0.0), complex(re, im), complex(re, -im))
    return tuple(sorted((complex(r.real, 0.0) for r in roots), key=lambda r: r.real))


def spectrum(jac: np.ndarray) -> tuple[complex, complex, complex]:
    return order_eigenvalues(cubic_roots(*characteristic_coefficients(np.asarray(jac, float))))


def classify_spectrum(eigs: Sequence[complex], det: float) -> str:
    if abs(det) <= DET_TOL or any(abs(l.real) <= IMAG_AXIS_TOL for l in eigs):
        return DEGENERATE
    if _is_complex(eigs[1]):
        gamma, rho = eigs[0].real, eigs[1].real
        if gamma * rho < 0:
            return SADDLE_FOCUS
        return COMPLEX_SINK if rho < 0 else COMPLEX_SOURCE
    signs = {l.real > 0 for l in eigs}
    return REAL_NODE if len(signs) == 1 else REAL_SADDLE


def classify_matrix(location, jac) -> Equilibrium:
    jac = np.asarray(jac, dtype=float)
    eigs = spectrum(jac)
    det = float(np.linalg.det(jac))
    kind = classify_spectrum(eigs, det)
    index = int(np.sign(det)) if abs(det) > DET_TOL else None
    ratio = abs(eigs[1].real / eigs[0].real) if kind == SADDLE_FOCUS else None
    return Equilibrium(np.asarray(location, dtype=float), jac, eigs, kind, index, ratio)


def classify_equilibrium(field: PolyVectorField, location, check: bool = True) -> Equilibrium:
    """Classify the fixed point at ``location`` from its Jacobian spectrum."""
    loc = np.asarray(location, dtype=float)
    if check:
        res = np.linalg.norm(field(loc))
        if res >= 1e-10 * max(1.0, np.linalg.norm(loc)):
            raise NotAnEquilibriumError(f"|F| = {res:.3e} at {loc.tolist()}")
    return classify_matrix(loc, field.jacobian_at(loc))


def michelson_eigenvalues_closed_form(c: float) -> tuple[complex, complex, complex]:
    """Radical formulas for the spectrum of the Michelson Jacobian at (c*sqrt(2), 0, 0).

    Returned as (real, complex, conjugate). The real root uses the constant
    2^(1/3) / 3^(1/3) obtained from the Cardano reduction.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    k = c * math.sqrt(2.0)
    # sqrt(3) sqrt(27 k^2 + 4) - 9 k, rationalised to avoid cancellation at large k
    a = 12.0 / (math.sqrt(3.0) * math.sqrt(27.0 * k * k + 4.0) + 9.0 * k)
    a13 = a ** (1.0 / 3.0)
    s3 = math.sqrt(3.0)
    real = a13 / (2 ** (1 / 3) * 3 ** (2 / 3)) - 2 ** (1 / 3) / (3 ** (1 / 3) * a13)
    lam1 = ((1 + 1j * s3) / (2 ** (2 / 3) * 3 ** (1 / 3) * a13)
            - (1 - 1j * s3) * a13 / (2 ** (4 / 3) * 3 ** (2 / 3)))
    lam2 = ((1 - 1j * s3) / (2 ** (2 / 3) * 3 ** (1 / 3) * a13)
            - (1 + 1j * s3) * a13 / (2 ** (4 / 3) * 3 ** (2 / 3)))
    return (complex(real), complex(lam1), complex(lam2))


def _box_array(box: Box) -> np.ndarray:
    arr = np.asarray(box, dtype=float)
    if arr.shape != (3, 2) or np.any(arr[:, 1] <= arr[:, 0]):
        raise ValueError(f"degenerate search box {box!r}")
    return arr


def newton_polish(field: PolyVectorField, s, iters: int = 8) -> np.ndarray:
    s = np.asarray(s, dtype=float).copy()
    for _ in range(iters):
        f = field(s)
        if np.linalg.norm(f) == 0.0:
            break
        try:
            step = np.linalg.solve(field.jacobian_at(s), f)
        except np.linalg.LinAlgError:
            break
        cand = s - step
        if np.linalg.norm(field(cand)) > np.linalg.norm(f):
            break
        s = cand
    return s


def default_search_box(field_: PolyVectorField) -> tuple:
    """The zoo search box for built-in systems, [-10, 10]^3 otherwise."""
    if field_.name in zoo_ids():
        return zoo_entry(field_.name).search_box(field_.parameters)
    return ((-10.0, 10.0),) * 3


def find_equilibria(field: PolyVectorField, search_box: Box = ((-10, 10),) * 3,
                    grid_n: int = 21, max_iter: int = 60) -> list[Equilibrium]:
    """Multistart Newton from a grid_n^3 seed lattice; deduplicated and sorted."""
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    box = _box_array(search_box)
    diam = float(np.linalg.norm(box[:, 1] - box[:, 0]))
    axes = [np.linspace(lo, hi, grid_n) for lo, hi in box]
    s = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    alive = np.ones(len(s), dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        f = field.evaluate(s[idx])
        j = field.jacobian_at(s[idx])
        det = np.linalg.det(j)
        ok = np.isfinite(det) & (np.abs(det) > 1e-300) & np.all(np.isfinite(f), axis=1)
        alive[idx[~ok]] = False
        idx, f, j = idx[ok], f[ok], j[ok]
        if idx.size == 0:
            break
        step = np.linalg.solve(j, f[..., None])[..., 0]
        norm = np.linalg.norm(step, axis=1)
        scale = np.minimum(1.0, 0.5 * diam / np.maximum(norm, 1e-300))
        s[idx] -= step * scale[:, None]
        out = np.any((s[idx] < box[:, 0] - diam) | (s[idx] > box[:, 1] + diam), axis=1)
        alive[idx[out]] = False
        done = norm < 1e-14 * (1.0 + np.linalg.norm(s[idx], axis=1))
        alive[idx[done]] = False

    slack = 1e-9 * diam
    inside = np.all((s >= box[:, 0] - slack) & (s <= box[:, 1] + slack), axis=1)
    cands = s[inside & np.all(np.isfinite(s), axis=1)]
    if len(cands) == 0:
        return []
    res = np.linalg.norm(field.evaluate(cands), axis=1)
    cands = cands[res < 1e-6 * np.maximum(1.0, np.linalg.norm(cands, axis=1))]

    found: list[np.ndarray] = []
    radius = 1e-6 * diam
    for c in cands:
        if any(np.linalg.norm(c - f) < radius for f in found):
            continue
        c = newton_polish(field, c)
        r = np.linalg.norm(field(c))
        if r >= 1e-10 * max(1.0, np.linalg.norm(c)):
            continue
        if any(np.linalg.norm(c - f) < radius for f in found):
            continue
        found.append(c)
    found.sort(key=lambda p: tuple(np.round(p, 9)))
    return [classify_equilibrium(field, p, check=False) for p in found]
