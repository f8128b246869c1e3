"""Degree of s -> F(s)/|F(s)| on large spheres and the behaviour of F near infinity.

Two independent degree methods are provided:

* ``regular_value`` counts the preimages of a random direction with
  orientation signs (the regular-value definition of the Brouwer degree);
* ``omitted_direction`` looks for a direction that the normalised field never
  points in, which certifies degree 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .equilibria import Equilibrium, default_search_box, find_equilibria
from .polyfield import PolyVectorField, TriPolynomial

N_AZIMUTH = 128
N_POLAR = 64
REGULARITY_TOL = 1e-8
DEDUPE_ANGLE = 1e-5
DEFAULT_MARGIN = 0.2
MAX_RETRIES = 8


class DegreeError(RuntimeError):
    pass


class SingularPreimageError(DegreeError):
    """Every tried direction had a near-critical preimage."""


class FixedPointOnSphereError(DegreeError):
    pass


class ZeroRadialProductError(ValueError):
    pass


def sphere_grid(n_azimuth: int = N_AZIMUTH, n_polar: int = N_POLAR) -> np.ndarray:
    """Unit vectors on an azimuth x polar-midpoint grid plus the six axis points."""
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    theta = (np.arange(n_polar) + 0.5) * np.pi / n_polar
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    pts = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
    axes = np.vstack([np.eye(3), -np.eye(3)])
    return np.vstack([pts.reshape(-1, 3), axes])


def _tangent_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(t1, t2) with (t1, t2, n) a positively oriented orthonormal frame."""
    helper = np.eye(3)[int(np.argmin(np.abs(n)))]
    t1 = np.cross(helper, n)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return t1, t2


@dataclass
class Preimage:
    point: np.ndarray
    sign: int
    regularity: float

    def to_dict(self) -> dict:
        return {"point": self.point.tolist(), "sign": self.sign, "regularity": self.regularity}


@dataclass
class DegreeReport:
    radius: float
    method: str
    degree: int | None
    sample_resolution: tuple[int, int]
    preimages: list[Preimage] = field(default_factory=list)
    direction: np.ndarray | None = None
    witness: np.ndarray | None = None
    margin: float | None = None
    conclusive: bool = True
    attempts: int = 1
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "method": self.method,
            "degree": self.degree,
            "conclusive": self.conclusive,
            "sample_resolution": list(self.sample_resolution),
            "direction": None if self.direction is None else self.direction.tolist(),
            "preimages": [p.to_dict() for p in self.preimages],
            "witness": None if self.witness is None else self.witness.tolist(),
            "margin": self.margin,
            "attempts": self.attempts,
            "note": self.note,
        }


def _solve_preimages(field_: PolyVectorField, r: float, d: np.ndarray, seeds: np.ndarray,
                     max_iter: int = 60) -> list[np.ndarray]:
    """Points s on the sphere |s| = r with F(s) parallel to +d (batched Newton)."""
    e1, e2 = _tangent_basis(d)
    s = seeds * r
    alive = np.ones(len(s), dtype=bool)
    converged = np.zeros(len(s), dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        x = s[idx]
        f = field_.evaluate(x)
        j = field_.jacobian_at(x)
        fn = np.linalg.norm(f, axis=1)
        fn = np.where(fn > 0, fn, 1.0)
        # equations scaled by |F| so both rows are angle-like
        g = np.stack([f @ e1 / fn, f @ e2 / fn, (np.einsum("ij,ij->i", x, x) - r * r) / (2 * r)],
                     axis=1)
        rows = np.stack([np.einsum("k,nkj->nj", e1, j) / fn[:, None],
                         np.einsum("k,nkj->nj", e2, j) / fn[:, None], x / r], axis=1)
        with np.errstate(all="ignore"):
            det = np.linalg.det(rows)
        ok = np.isfinite(det) & (np.abs(det) > 1e-300) & np.all(np.isfinite(g), axis=1)
        alive[idx[~ok]] = False
        idx, g, rows, x = idx[ok], g[ok], rows[ok], x[ok]
        if idx.size == 0:
            break
        step = np.linalg.solve(rows, g[..., None])[..., 0]
        norm = np.linalg.norm(step, axis=1)
        scale = np.minimum(1.0, 0.2 * r / np.maximum(norm, 1e-300))
        x = x - step * scale[:, None]
        x *= (r / np.linalg.norm(x, axis=1))[:, None]
        s[idx] = x
        done = (norm < 1e-12 * r) & (np.linalg.norm(g[:, :2], axis=1) < 1e-9)
        converged[idx[done]] = True
        alive[idx[done]] = False

    found: list[np.ndarray] = []
    for x in s[converged]:
        f = field_(x)
        nf = np.linalg.norm(f)
        if nf == 0 or not np.all(np.isfinite(f)):
            continue
        u = f / nf
        if u @ d <= 0 or np.linalg.norm(np.cross(u, d)) > 1e-9:
            continue
        n = x / np.linalg.norm(x)
        if any(math.acos(min(1.0, float(n @ (p / r)))) < DEDUPE_ANGLE for p in found):
            continue
        found.append(x)
    return found


def _orientation(field_: PolyVectorField, s: np.ndarray, d: np.ndarray) -> tuple[int, float]:
    """Sign of the tangent map of F/|F| at a preimage of d, and its normalised determinant."""
    r = float(np.linalg.norm(s))
    n = s / r
    t1, t2 = _tangent_basis(n)
    e1, e2 = _tangent_basis(d)
    j = field_.jacobian_at(s)
    f = field_(s)
    m = np.array([[e1 @ j @ t1, e1 @ j @ t2], [e2 @ j @ t1, e2 @ j @ t2]])
    det = float(np.linalg.det(m))
    regularity = abs(det) * r * r / float(f @ f)
    return (1 if det > 0 else -1), regularity


def _check_no_fixed_point_on_sphere(r: float, equilibria: Sequence[Equilibrium] | None):
    if equilibria is None:
        return
    for eq in equilibria:
        if abs(np.linalg.norm(eq.location) - r) < 1e-6:
            raise FixedPointOnSphereError(f"fixed point {eq.location.tolist()} lies on |s|={r}")


def _degree_regular_value(field_, r, rng_seed, grid) -> DegreeReport:
    rng = np.random.default_rng(rng_seed)
    f_grid = field_.evaluate(grid * r)
    scale = float(np.median(np.linalg.norm(f_grid, axis=1)))
    for attempt in range(1, MAX_RETRIES + 1):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        pts = _solve_preimages(field_, r, d, grid)
        pre = []
        singular = False
        for p in pts:
            if np.linalg.norm(field_(p)) < 1e-12 * max(scale, 1e-300):
                raise FixedPointOnSphereError(f"F vanishes near {p.tolist()} on |s|={r}")
            sign, reg = _orientation(field_, p, d)
            if reg < REGULARITY_TOL:
                singular = True
                break
            pre.append(Preimage(p, sign, reg))
        if singular:
            continue
        degree = sum(p.sign for p in pre)
        return DegreeReport(r, "regular_value", degree, (N_AZIMUTH, N_POLAR), pre, d,
                            attempts=attempt)
    raise SingularPreimageError(
        f"near-critical preimage for {MAX_RETRIES} random directions at r={r}; "
        "try the omitted_direction method")


def _fibonacci_sphere(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    rho = np.sqrt(1 - z * z)
    phi = np.pi * (1 + 5 ** 0.5) * k
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


def _min_angle(images: np.ndarray, c: np.ndarray) -> float:
    return float(math.acos(min(1.0, float(np.max(images @ c)))))


def _degree_omitted_direction(field_, r, grid, margin) -> DegreeReport:
    f = field_.evaluate(grid * r)
    norms = np.linalg.norm(f, axis=1)
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        raise FixedPointOnSphereError(f"F vanishes or overflows on the sample grid at r={r}")
    images = f / norms[:, None]
    axes = np.vstack([np.eye(3), -np.eye(3)])
    cands = np.vstack([axes, _fibonacci_sphere(2000)])
    angles = np.arccos(np.clip(np.max(images @ cands.T, axis=0), -1.0, 1.0))
    # coordinate directions clearing the margin first, then the refined global best
    order = [int(k) for k in np.argsort(-angles[:6]) if angles[k] > margin]
    best = int(np.argmax(angles))

    def neg(v):
        return -_min_angle(images, v / np.linalg.norm(v))

    res = minimize(neg, cands[best], method="Nelder-Mead",
                   options={"xatol": 1e-6, "fatol": 1e-9, "maxiter": 400})
    refined = res.x / np.linalg.norm(res.x)
    trials = [(cands[k], float(angles[k])) for k in order]
    trials.append((refined, max(_min_angle(images, refined), float(angles[best]))
                   if _min_angle(images, refined) >= angles[best] else float(angles[best])))
    if _min_angle(images, refined) < angles[best]:
        trials[-1] = (cands[best], float(angles[best]))

    report = DegreeReport(r, "omitted_direction", None, (N_AZIMUTH, N_POLAR),
                          witness=trials[-1][0], margin=trials[-1][1], conclusive=False)
    notes = []
    for witness, sampled in trials:
        if sampled <= margin:
            notes.append(f"no direction clears the {margin} rad margin")
            continue
        if _solve_preimages(field_, r, witness, grid):
            notes.append(f"direction {np.round(witness, 6).tolist()} has a preimage")
            continue
        report.witness, report.margin = witness, sampled
        report.degree, report.conclusive = 0, True
        return report
    report.note = "; ".join(notes)
    return report


def sphere_map_degree(field_: PolyVectorField, r: float, method: str = "regular_value",
                      rng_seed: int = 0, margin: float = DEFAULT_MARGIN,
                      equilibria: Sequence[Equilibrium] | None = None) -> DegreeReport:
    """Degree of F/|F| restricted to the sphere of radius r."""
    if not r > 0:
        raise ValueError("radius must be positive")
    _check_no_fixed_point_on_sphere(r, equilibria)
    grid = sphere_grid()
    if method == "regular_value":
        return _degree_regular_value(field_, r, rng_seed, grid)
    if method == "omitted_direction":
        return _degree_omitted_direction(field_, r, grid, margin)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class IndexAtInfinityReport:
    index: int | None
    radii: list[float]
    degrees: list[int | None]
    stable: bool
    reports: list[DegreeReport]
    methods_agree: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "radii": self.radii,
            "degrees": self.degrees,
            "stable": self.stable,
            "methods_agree": self.methods_agree,
            "note": self.note,
            "reports": [r.to_dict() for r in self.reports],
        }


def reference_radius(equilibria: Sequence[Equilibrium]) -> float:
    far = max((float(np.linalg.norm(e.location)) for e in equilibria), default=0.0)
    return max(50.0, 10.0 * far)


def index_at_infinity(field_: PolyVectorField, equilibria: Sequence[Equilibrium] | None = None,
                      rng_seed: int = 0, search_box=None) -> IndexAtInfinityReport:
    """Poincare index of infinity, minus the sphere-map degree, checked at r and 4r."""
    if equilibria is None:
        equilibria = find_equilibria(field_, search_box or default_search_box(field_))
    r = reference_radius(equilibria)
    radii = [r, 4.0 * r]
    reports: list[DegreeReport] = []
    degrees: list[int | None] = []
    agree = True
    notes = []
    for rad in radii:
        rv = None
        try:
            rv = sphere_map_degree(field_, rad, "regular_value", rng_seed, equilibria=equilibria)
            reports.append(rv)
        except SingularPreimageError as exc:
            notes.append(str(exc))
        od = sphere_map_degree(field_, rad, "omitted_direction", rng_seed, equilibria=equilibria)
        reports.append(od)
        if rv is not None and od.conclusive and rv.degree != od.degree:
            agree = False
            notes.append(f"methods disagree at r={rad}: {rv.degree} vs {od.degree}")
        deg = rv.degree if rv is not None else (od.degree if od.conclusive else None)
        degrees.append(deg)
    stable = all(d is not None for d in degrees) and len(set(degrees)) == 1 and agree
    if not stable and not notes:
        notes.append(f"degree differs across radii: {degrees}")
    index = -degrees[0] if stable else None
    return IndexAtInfinityReport(index, radii, degrees, stable, reports, agree, "; ".join(notes))


@dataclass
class PoincareHopfAudit:
    residual: int | None
    local_indices: list[int | None]
    index_at_infinity: int | None
    outside_stated_range: bool
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def poincare_hopf_audit(field_: PolyVectorField, equilibria: Sequence[Equilibrium] | None = None,
                        infinity: IndexAtInfinityReport | None = None, rng_seed: int = 0,
                        search_box=None) -> PoincareHopfAudit:
    """Residual (sum of local indices) + (index at infinity); zero when consistent."""
    if equilibria is None:
        equilibria = find_equilibria(field_, search_box or default_search_box(field_))
    if infinity is None:
        infinity = index_at_infinity(field_, equilibria, rng_seed)
    local = [e.local_index for e in equilibria]
    if any(v is None for v in local):
        return PoincareHopfAudit(None, local, infinity.index, False, "degenerate equilibrium")
    if infinity.index is None:
        return PoincareHopfAudit(None, local, None, False, "index at infinity unstable")
    residual = int(sum(local) + infinity.index)
    outside = abs(infinity.index) > 1
    note = "degree outside {0, 1, -1}" if outside else ""
    return PoincareHopfAudit(residual, local, infinity.index, outside, note)


@dataclass
class RadialDominanceReport:
    P: TriPolynomial
    top_degree: int
    g_k: TriPolynomial
    components: dict[int, TriPolynomial]
    fraction_positive: float
    fraction_negative: float
    fraction_near_zero: float

    def to_dict(self) -> dict:
        return {
            "P": self.P.to_expr(),
            "top_degree": self.top_degree,
            "g_k": self.g_k.to_expr(),
            "fraction_positive": self.fraction_positive,
            "fraction_negative": self.fraction_negative,
            "fraction_near_zero": self.fraction_near_zero,
        }


def radial_dominance(field_: PolyVectorField) -> RadialDominanceReport:
    """Split P = F(s).s into homogeneous parts and sample the top one on the unit sphere."""
    p = field_.radial_product()
    if p.is_zero():
        raise ZeroRadialProductError("F(s).s vanishes identically: F is tangent to all spheres")
    comps = p.homogeneous_components()
    k = max(comps)
    gk = comps[k]
    vals = gk.evaluate(sphere_grid())
    tol = 1e-12 * max(1.0, float(np.max(np.abs(vals))))
    n = len(vals)
    return RadialDominanceReport(
        p, k, gk, comps,
        float(np.sum(vals > tol) / n), float(np.sum(vals < -tol) / n),
        float(np.sum(np.abs(vals) <= tol) / n))


@dataclass
class JacobianRangeReport:
    radii: list[float]
    ranges: list[tuple[float, float]]
    non_smooth_at_infinity: bool

    def to_dict(self) -> dict:
        return {"radii": self.radii, "ranges": [list(r) for r in self.ranges],
                "non_smooth_at_infinity": self.non_smooth_at_infinity}


def jacobian_range_probe(field_: PolyVectorField,
                         radii: Sequence[float] = (10.0, 100.0, 1000.0)) -> JacobianRangeReport:
    """(min, max) of det J on sampled spheres; flags a range that keeps growing with r."""
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    grid = sphere_grid()
    ranges = []
    for r in radii:
        det = np.linalg.det(field_.jacobian_at(grid * r))
        ranges.append((float(np.min(det)), float(np.max(det))))
    widths = [hi - lo for lo, hi in ranges]
    mags = max(max(abs(lo), abs(hi)) for lo, hi in ranges)
    non_smooth = False
    if len(radii) >= 2:
        order = np.argsort(radii)
        w0, w1 = widths[order[0]], widths[order[-1]]
        non_smooth = w1 > 1e-9 * (1.0 + mags) and w1 >= 10.0 * w0 * (1.0 - 1e-9)
    return JacobianRangeReport(radii, ranges, bool(non_smooth))
