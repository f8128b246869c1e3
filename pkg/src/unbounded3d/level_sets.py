"""The velocity level set H = {F_i = 0}, its tangency curve l and the local flow near them.

With L = F.grad(F_i) (first Lie derivative) and L2 = F.grad(L), the tangency
curve is l = {F_i = 0, L = 0}. Off l, the sign of L says in which direction
trajectories cross H (H_plus: into {F_i > 0}, H_minus: into {F_i < 0}); on l
the sign of L2 says on which side of H the trajectory stays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from .equilibria import Equilibrium
from .polyfield import PolyVectorField, TriPolynomial

H_PLUS = "H_plus"
H_MINUS = "H_minus"
TANGENCY = "tangency"
STAYS_NONNEG = "stays_nonneg"
STAYS_NONPOS = "stays_nonpos"
DEGENERATE = "degenerate"

RESIDUAL_TOL = 1e-9
SINGULAR_TOL = 1e-8


class LevelSetError(ValueError):
    pass


class NotOnLevelSetError(LevelSetError):
    pass


class EmptyLevelSetError(LevelSetError):
    pass


class ContinuationError(LevelSetError):
    def __init__(self, message: str, location):
        super().__init__(f"{message} at {np.asarray(location).tolist()}")
        self.location = np.asarray(location, dtype=float)


def _check_component(i: int) -> int:
    if i not in (1, 2, 3):
        raise ValueError("component index must be 1, 2 or 3")
    return i - 1


def lie_derivatives(field_: PolyVectorField, i: int) -> tuple[TriPolynomial, TriPolynomial,
                                                              TriPolynomial]:
    """(F_i, L, L2) for the 1-based component i."""
    fi = field_[_check_component(i)]
    lf = field_.lie_derivative(fi)
    return fi, lf, field_.lie_derivative(lf)


def _tol(s) -> float:
    return RESIDUAL_TOL * (1.0 + float(np.linalg.norm(s)))


def crossing_class(field_: PolyVectorField, i: int, s, lf: TriPolynomial | None = None) -> str:
    """Crossing class from the sign of L at s, without checking that s lies on H."""
    if lf is None:
        lf = field_.lie_derivative(field_[_check_component(i)])
    s = np.asarray(s, dtype=float)
    v = float(lf.evaluate(s))
    tol = _tol(s)
    if v > tol:
        return H_PLUS
    if v < -tol:
        return H_MINUS
    return TANGENCY


def classify_crossing(field_: PolyVectorField, i: int, s) -> str:
    """H_plus / H_minus / tangency for a point s of H = {F_i = 0}."""
    fi = field_[_check_component(i)]
    s = np.asarray(s, dtype=float)
    if abs(float(fi.evaluate(s))) >= RESIDUAL_TOL:
        raise NotOnLevelSetError(f"|F_{i}| = {abs(float(fi.evaluate(s))):.3e} at {s.tolist()}")
    return crossing_class(field_, i, s)


def tangency_local_behavior(field_: PolyVectorField, i: int, s, duration: float = 1e-3) -> str:
    """Side of H on which the orbit through a tangency point stays for short times.

    The sign of L2 is cross-checked against a two-sided integration of the
    given duration; disagreement is reported as degenerate.
    """
    from .flowkit import integrate

    s = np.asarray(s, dtype=float)
    if np.linalg.norm(field_(s)) < 1e-10 * max(1.0, float(np.linalg.norm(s))):
        raise LevelSetError(f"{s.tolist()} is a fixed point")
    fi, lf, l2f = lie_derivatives(field_, i)
    tol = _tol(s)
    if abs(float(fi.evaluate(s))) > tol or abs(float(lf.evaluate(s))) > tol:
        raise NotOnLevelSetError(f"{s.tolist()} is not on the tangency curve")
    second = float(l2f.evaluate(s))
    if abs(second) <= tol:
        return DEGENERATE
    sign = 1.0 if second > 0 else -1.0
    probe_times = duration * np.linspace(0.3, 1.0, 8)
    for t_end in (duration, -duration):
        traj = integrate(field_, s, (0.0, t_end), r_escape=None)
        if traj.termination != "t_end":
            return DEGENERATE
        for tau in probe_times:
            val = float(fi.evaluate(traj.sample(np.sign(t_end) * tau)))
            if sign * val <= 0:
                return DEGENERATE
    return STAYS_NONNEG if sign > 0 else STAYS_NONPOS


# ---------------------------------------------------------------------------
# curve continuation


class _CurveSystem:
    """G(s) = (F_i(s), L(s)) with its 2x3 Jacobian."""

    def __init__(self, fi: TriPolynomial, lf: TriPolynomial):
        self.fi, self.lf = fi, lf
        self.gfi = fi.gradient()
        self.glf = lf.gradient()

    def value(self, s):
        return np.stack([self.fi.evaluate(s), self.lf.evaluate(s)], axis=-1)

    def jac(self, s):
        a = np.stack([g.evaluate(s) for g in self.gfi], axis=-1)
        b = np.stack([g.evaluate(s) for g in self.glf], axis=-1)
        return np.stack([a, b], axis=-2)

    def tangent(self, s) -> np.ndarray | None:
        j = self.jac(s)
        t = np.cross(j[0], j[1])
        n = np.linalg.norm(t)
        if n == 0 or not np.isfinite(n):
            return None
        return t / n

    def sigma2(self, s) -> float:
        """Smallest singular value of the row-normalised 2x3 Jacobian."""
        j = self.jac(s)
        norms = np.linalg.norm(j, axis=1)
        if np.any(norms == 0):
            return 0.0
        return float(np.linalg.svd(j / norms[:, None], compute_uv=False)[-1])

    def project(self, s, iters: int = 30):
        """Minimum-norm Newton projection of a point onto the curve; None if it fails."""
        s = np.array(s, dtype=float)
        for _ in range(iters):
            g = self.value(s)
            j = self.jac(s)
            try:
                step = j.T @ np.linalg.solve(j @ j.T, g)
            except np.linalg.LinAlgError:
                return None
            s = s - step
            if not np.all(np.isfinite(s)):
                return None
            if np.linalg.norm(step) < 1e-15 * (1.0 + np.linalg.norm(s)):
                break
        if np.max(np.abs(self.value(s))) > RESIDUAL_TOL:
            return None
        return s

    def project_many(self, pts: np.ndarray, iters: int = 40) -> np.ndarray:
        """Batched minimum-norm Newton; returns the converged subset."""
        s = np.array(pts, dtype=float)
        with np.errstate(all="ignore"):
            for _ in range(iters):
                g = self.value(s)
                j = self.jac(s)
                jjt = j @ np.swapaxes(j, -1, -2)
                det = np.linalg.det(jjt)
                ok = np.isfinite(det) & (np.abs(det) > 1e-300)
                s = s[ok]
                if len(s) == 0:
                    return s
                g, j, jjt = g[ok], j[ok], jjt[ok]
                y = np.linalg.solve(jjt, g[..., None])
                step = (np.swapaxes(j, -1, -2) @ y)[..., 0]
                norm = np.linalg.norm(step, axis=1)
                cap = np.minimum(1.0, 10.0 / np.maximum(norm, 1e-300))
                s = s - step * cap[:, None]
                s = s[np.all(np.isfinite(s), axis=1)]
            res = np.max(np.abs(self.value(s)), axis=1) if len(s) else np.zeros(0)
        return s[res < RESIDUAL_TOL * 1e-2]

    def correct(self, pred, t, iters: int = 12):
        """Newton on G = 0 restricted to the hyperplane through pred normal to t."""
        s = np.array(pred, dtype=float)
        for k in range(iters):
            g = self.value(s)
            j = self.jac(s)
            a = np.vstack([j, t])
            rhs = np.array([g[0], g[1], float(t @ (s - pred))])
            try:
                step = np.linalg.solve(a, rhs)
            except np.linalg.LinAlgError:
                return None, k
            s = s - step
            if not np.all(np.isfinite(s)):
                return None, k
            if np.linalg.norm(step) < 1e-14 * (1.0 + np.linalg.norm(s)):
                if np.max(np.abs(self.value(s))) <= RESIDUAL_TOL * 1e-2:
                    return s, k + 1
        if np.max(np.abs(self.value(s))) <= RESIDUAL_TOL * 1e-2:
            return s, iters
        return None, iters


def _inside(s, lo, hi) -> bool:
    return bool(np.all(s >= lo) and np.all(s <= hi))


def _clip_to_box(a, b, lo, hi) -> np.ndarray:
    """Point where the segment a->b (a inside) leaves the box."""
    d = b - a
    tmax = 1.0
    for k in range(3):
        if d[k] > 0 and b[k] > hi[k]:
            tmax = min(tmax, (hi[k] - a[k]) / d[k])
        elif d[k] < 0 and b[k] < lo[k]:
            tmax = min(tmax, (lo[k] - a[k]) / d[k])
    return a + tmax * d


def _trace_direction(sys_, start, t0, lo, hi, h0, max_points):
    pts = [start]
    t_prev = t0
    h = h0
    hmin = 1e-8 * h0 * 100
    hmax = 5 * h0
    s = start
    while len(pts) < max_points:
        pred = s + h * t_prev
        new, iters = sys_.correct(pred, t_prev)
        ok = new is not None and np.linalg.norm(new - pred) < 0.5 * h
        t_new = sys_.tangent(new) if ok else None
        if ok and t_new is not None:
            if t_new @ t_prev < 0:
                t_new = -t_new
            if t_new @ t_prev < np.cos(0.35):
                ok = False
        else:
            ok = False
        if not ok:
            h *= 0.5
            if h < hmin:
                if sys_.sigma2(s) < SINGULAR_TOL * 1e4:
                    return pts, "singular"
                return pts, "step_failure"
            continue
        if not _inside(new, lo, hi):
            edge = _clip_to_box(s, new, lo, hi)
            proj = sys_.project(edge)
            pts.append(proj if proj is not None and np.linalg.norm(proj - edge) < h else edge)
            return pts, "boundary"
        if sys_.sigma2(new) < SINGULAR_TOL:
            pts.append(new)
            return pts, "singular"
        # loop closure
        if len(pts) > 8 and np.linalg.norm(new - start) < 0.75 * h and t_new @ t0 > 0:
            pts.append(start.copy())
            return pts, "closed"
        pts.append(new)
        s, t_prev = new, t_new
        if iters <= 3:
            h = min(h * 1.5, hmax)
    return pts, "max_points"


@dataclass
class TangencyComponent:
    """One connected piece of l inside the window, as an ordered polyline."""

    points: np.ndarray
    end_kinds: tuple[str, str]

    @property
    def closed(self) -> bool:
        return "closed" in self.end_kinds

    def to_dict(self) -> dict:
        return {"n_points": len(self.points), "end_kinds": list(self.end_kinds),
                "first": self.points[0].tolist(), "last": self.points[-1].tolist()}


@dataclass
class TangencySegment:
    """Piece of a component between consecutive fixed points / ends; no fixed point inside."""

    points: np.ndarray
    start_kind: str  # fixed_point | boundary | singular | closed | step_failure | max_points
    end_kind: str
    start_fixed_point: int | None = None  # index into the analysis' equilibria
    end_fixed_point: int | None = None
    component: int = 0
    l2_signs: tuple[int, ...] = ()
    monotone: bool = False

    def reversed(self) -> "TangencySegment":
        return TangencySegment(self.points[::-1].copy(), self.end_kind, self.start_kind,
                               self.end_fixed_point, self.start_fixed_point, self.component,
                               self.l2_signs[::-1], self.monotone)

    def arclength(self) -> np.ndarray:
        d = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(d)])

    def interior_samples(self, n: int) -> np.ndarray:
        """n points equally spaced in arclength, excluding both ends."""
        sl = self.arclength()
        if sl[-1] == 0:
            return np.repeat(self.points[:1], n, axis=0)
        targets = sl[-1] * (np.arange(1, n + 1) / (n + 1))
        return np.stack([np.interp(targets, sl, self.points[:, k]) for k in range(3)], axis=1)

    def to_dict(self) -> dict:
        return {"start_kind": self.start_kind, "end_kind": self.end_kind,
                "start_fixed_point": self.start_fixed_point,
                "end_fixed_point": self.end_fixed_point, "component": self.component,
                "n_points": len(self.points), "monotone": self.monotone,
                "first": self.points[0].tolist(), "last": self.points[-1].tolist(),
                "l2_signs": sorted(set(self.l2_signs))}


@dataclass
class LevelSetAnalysis:
    i: int
    planar: bool
    plane: tuple[np.ndarray, float] | None  # (normal, offset) with normal.s + offset = 0
    Fi: TriPolynomial
    L: TriPolynomial
    L2: TriPolynomial
    window: np.ndarray
    components: list[TangencyComponent]
    segments: list[TangencySegment]
    equilibria: list[Equilibrium]
    topology: str  # single_line | branched | empty
    monotone: bool
    plane_transversal: bool | None
    plane_transversal_certified: bool
    singleton_lc: bool
    singleton_counts: dict[float, int]
    crossing_regions: dict[str, int] | None
    notes: list[str] = field(default_factory=list)

    @property
    def samples(self) -> np.ndarray:
        if not self.components:
            return np.zeros((0, 3))
        return np.vstack([c.points for c in self.components])

    @property
    def two_half_planes(self) -> bool | None:
        if self.crossing_regions is None:
            return None
        return self.crossing_regions == {H_PLUS: 1, H_MINUS: 1}

    def to_dict(self) -> dict:
        return {
            "i": self.i,
            "planar": self.planar,
            "plane": None if self.plane is None else {
                "normal": self.plane[0].tolist(), "offset": self.plane[1]},
            "F_i": self.Fi.to_expr(),
            "L": self.L.to_expr(),
            "L2": self.L2.to_expr(),
            "window": self.window.tolist(),
            "topology": self.topology,
            "monotone": self.monotone,
            "plane_transversal": self.plane_transversal,
            "plane_transversal_certified": self.plane_transversal_certified,
            "singleton_lc": self.singleton_lc,
            "crossing_regions": self.crossing_regions,
            "components": [c.to_dict() for c in self.components],
            "segments": [s.to_dict() for s in self.segments],
            "notes": list(self.notes),
        }


def _window_array(window) -> np.ndarray:
    arr = np.asarray(window, dtype=float)
    if arr.shape == (2,):
        arr = np.tile(arr, (3, 1))
    if arr.shape != (3, 2) or np.any(arr[:, 1] <= arr[:, 0]):
        raise ValueError(f"degenerate window {window!r}")
    return arr


def trace_tangency_curve(field_: PolyVectorField, i: int, window, samples: int = 9,
                         extra_seeds: Sequence | None = None,
                         max_points: int = 20000) -> list[TangencyComponent]:
    """All components of {F_i = 0, L = 0} reachable from a seed lattice, by continuation."""
    fi, lf, _ = lie_derivatives(field_, i)
    box = _window_array(window)
    lo, hi = box[:, 0], box[:, 1]
    diam = float(np.linalg.norm(hi - lo))
    if lf.is_zero():
        raise ContinuationError("L vanishes identically (H is invariant); no tangency curve",
                                (lo + hi) / 2)
    sys_ = _CurveSystem(fi, lf)
    axes = [np.linspace(a, b, samples) for a, b in box]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    if extra_seeds is not None and len(extra_seeds):
        grid = np.vstack([np.asarray(extra_seeds, dtype=float).reshape(-1, 3), grid])
    seeds = sys_.project_many(grid)
    seeds = seeds[np.all((seeds >= lo) & (seeds <= hi), axis=1)]

    h0 = 1e-2 * diam
    components: list[TangencyComponent] = []
    covered = np.zeros((0, 3))
    for seed in seeds:
        if len(covered) and np.min(np.linalg.norm(covered - seed, axis=1)) < 2.5 * h0:
            continue
        seed = sys_.project(seed)
        if seed is None:
            continue
        t0 = sys_.tangent(seed)
        if t0 is None or sys_.sigma2(seed) < SINGULAR_TOL:
            components.append(TangencyComponent(seed[None, :], ("singular", "singular")))
            covered = np.vstack([covered, seed[None, :]])
            continue
        fwd, end_f = _trace_direction(sys_, seed, t0, lo, hi, h0, max_points)
        if end_f == "closed":
            pts, ends = fwd, ("closed", "closed")
        else:
            bwd, end_b = _trace_direction(sys_, seed, -t0, lo, hi, h0, max_points)
            pts, ends = bwd[::-1] + fwd[1:], (end_b, end_f)
        arr = np.asarray(pts)
        components.append(TangencyComponent(arr, ends))
        covered = np.vstack([covered, _densify(arr, h0)])
    return components


def _densify(pts: np.ndarray, h: float) -> np.ndarray:
    """Polyline resampled so consecutive points are at most h apart (for coverage tests)."""
    out = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        n = int(np.ceil(np.linalg.norm(b - a) / h))
        if n > 1:
            out.append(a + (b - a) * (np.arange(1, n + 1) / n)[:, None])
        else:
            out.append(b[None, :])
    return np.vstack(out)


def _split_segments(components, equilibria, diam) -> list[TangencySegment]:
    segs = []
    tol = 1e-6 * diam
    for ci, comp in enumerate(components):
        pts = comp.points
        if len(pts) < 2:
            continue
        # locate fixed points on the polyline: (position along polyline, eq index)
        cuts = []
        for ei, eq in enumerate(equilibria):
            p = eq.location
            best = None
            for k in range(len(pts) - 1):
                a, b = pts[k], pts[k + 1]
                d = b - a
                den = float(d @ d)
                u = 0.0 if den == 0 else min(1.0, max(0.0, float((p - a) @ d) / den))
                dist = float(np.linalg.norm(a + u * d - p))
                if best is None or dist < best[0]:
                    best = (dist, k + u)
            if best is not None and best[0] < tol:
                cuts.append((best[1], ei))
        cuts.sort()
        kinds = list(comp.end_kinds)
        if comp.closed and cuts:
            # rotate the loop so that it starts at the first fixed point
            pos0, e0 = cuts[0]
            k0 = int(np.floor(pos0))
            loop = np.vstack([pts[:-1][k0 + 1:], pts[:-1][:k0 + 1]])
            p0 = equilibria[e0].location
            pts = np.vstack([p0, loop, p0])
            new_cuts = []
            for pos, ei in cuts[1:]:
                shifted = pos - (k0 + 1) + 1
                if shifted < 1:
                    shifted += len(comp.points) - 1
                new_cuts.append((shifted, ei))
            cuts = [(0.0, e0)] + sorted(new_cuts) + [(float(len(pts) - 1), e0)]
        pieces = []
        start_pos, start_kind, start_eq = 0.0, kinds[0], None
        if cuts and cuts[0][0] == 0.0:
            start_eq = cuts[0][1]
            start_kind = "fixed_point"
            cuts = cuts[1:]
        for pos, ei in cuts:
            pieces.append((start_pos, pos, start_kind, "fixed_point", start_eq, ei))
            start_pos, start_kind, start_eq = pos, "fixed_point", ei
        if not (comp.closed and pieces and pieces[-1][1] == float(len(pts) - 1)):
            pieces.append((start_pos, float(len(pts) - 1), start_kind, kinds[1], start_eq, None))
        for a, b, ka, kb, ea, eb in pieces:
            segs.append(TangencySegment(_subpolyline(pts, a, b, equilibria, ea, eb), ka, kb,
                                        ea, eb, ci))
    return [s for s in segs if len(s.points) >= 2 and s.arclength()[-1] > 0]


def _subpolyline(pts, a, b, equilibria, ea, eb):
    ka, kb = int(np.floor(a)), int(np.floor(b))
    start = equilibria[ea].location if ea is not None else _at(pts, a)
    end = equilibria[eb].location if eb is not None else _at(pts, b)
    mid = pts[ka + 1:kb + 1] if kb >= ka + 1 else np.zeros((0, 3))
    out = [start[None, :]]
    if len(mid):
        # drop interior nodes that coincide with the cut points
        keep = [m for m in mid if np.linalg.norm(m - start) > 0 and np.linalg.norm(m - end) > 0]
        if keep:
            out.append(np.asarray(keep))
    out.append(end[None, :])
    return np.vstack(out)


def _at(pts, pos):
    k = min(int(np.floor(pos)), len(pts) - 2)
    u = pos - k
    return pts[k] + u * (pts[k + 1] - pts[k])


def _monotone(values: np.ndarray) -> int:
    """+1 strictly increasing, -1 strictly decreasing, 0 otherwise."""
    d = np.diff(values)
    if len(d) == 0:
        return 0
    if np.all(d > 0):
        return 1
    if np.all(d < 0):
        return -1
    return 0


def _plane_of(fi: TriPolynomial):
    if fi.degree != 1:
        return None
    normal = np.array([float(g.constant_value()) for g in fi.gradient()])
    offset = float(fi.evaluate(np.zeros(3)))
    return normal, offset


def _crossing_regions(fi, lf, plane, box, n: int = 201) -> dict[str, int]:
    """Count connected sign regions of L on the planar H over the window."""
    normal, offset = plane
    nn = normal / np.linalg.norm(normal)
    p0 = -offset * normal / float(normal @ normal)
    helper = np.eye(3)[int(np.argmin(np.abs(nn)))]
    u = np.cross(nn, helper)
    u /= np.linalg.norm(u)
    w = np.cross(nn, u)
    half = 0.5 * float(np.linalg.norm(box[:, 1] - box[:, 0]))
    center = 0.5 * (box[:, 0] + box[:, 1])
    c0 = p0 + nn * float(nn @ (center - p0))
    ax = np.linspace(-half, half, n)
    a, b = np.meshgrid(ax, ax, indexing="ij")
    pts = c0 + a[..., None] * u + b[..., None] * w
    inside = np.all((pts >= box[:, 0]) & (pts <= box[:, 1]), axis=-1)
    vals = lf.evaluate(pts)
    tol = RESIDUAL_TOL * (1.0 + np.linalg.norm(pts, axis=-1))
    pos_lab, npos = ndimage.label(inside & (vals > tol))
    neg_lab, nneg = ndimage.label(inside & (vals < -tol))
    return {H_PLUS: int(npos), H_MINUS: int(nneg)}


def level_set_analysis(field_: PolyVectorField, i: int, window=((-10, 10),) * 3,
                       samples: int = 9, equilibria: Sequence[Equilibrium] | None = None,
                       n_planes: int = 33) -> LevelSetAnalysis:
    """Tangency curve, its branches and the H_plus / H_minus structure of H = {F_i = 0}."""
    from .equilibria import find_equilibria

    k = _check_component(i)
    fi, lf, l2f = lie_derivatives(field_, i)
    if fi.is_zero():
        raise LevelSetError(f"F_{i} vanishes identically")
    box = _window_array(window)
    lo, hi = box[:, 0], box[:, 1]
    diam = float(np.linalg.norm(hi - lo))
    notes: list[str] = []

    axes = [np.linspace(a, b, 17) for a, b in box]
    probe = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    pv = fi.evaluate(probe)
    if not (np.any(pv > 0) and np.any(pv < 0)) and not np.any(pv == 0):
        raise EmptyLevelSetError(f"F_{i} has no zero in the window")

    if equilibria is None:
        equilibria = find_equilibria(field_, box)
    eq_in = [e for e in equilibria if _inside(e.location, lo - 1e-9, hi + 1e-9)]

    seeds = [e.location for e in eq_in]
    components = trace_tangency_curve(field_, i, box, samples, seeds)
    for c in components:
        if "step_failure" in c.end_kinds or "max_points" in c.end_kinds:
            where = c.points[-1] if c.end_kinds[1] in ("step_failure", "max_points") \
                else c.points[0]
            raise ContinuationError("continuation failed", where)
    segments = _split_segments(components, eq_in, diam)

    # per-segment L2 signs and monotonicity of s_i
    for seg in segments:
        v = l2f.evaluate(seg.points)
        tol = RESIDUAL_TOL * (1.0 + np.linalg.norm(seg.points, axis=1))
        seg.l2_signs = tuple(int(np.sign(x)) if abs(x) > t else 0 for x, t in zip(v, tol))
        seg.monotone = _monotone(seg.points[:, k]) != 0

    singular = any("singular" in c.end_kinds for c in components)
    if not components:
        topology = "empty"
    elif len(components) == 1 and not singular and not components[0].closed \
            and components[0].end_kinds == ("boundary", "boundary"):
        topology = "single_line"
    else:
        topology = "branched"
    if singular:
        notes.append("tangency curve has singular points (parallel gradients)")
    if len(components) > 1:
        notes.append(f"tangency curve has {len(components)} components in the window")

    monotone = False
    if topology == "single_line":
        comp = components[0]
        direction = _monotone(comp.points[:, k])
        if direction < 0:
            components[0] = TangencyComponent(comp.points[::-1].copy(), comp.end_kinds[::-1])
            segments = [s.reversed() for s in segments[::-1]]
        monotone = direction != 0
    # orient every segment along increasing s_i where it is monotone
    segments = [s.reversed() if s.monotone and s.points[-1, k] < s.points[0, k] else s
                for s in segments]

    plane = _plane_of(fi)
    planar = plane is not None
    e_i = np.eye(3)[k]
    if planar:
        normal = plane[0]
        plane_transversal = bool(np.linalg.norm(np.cross(normal, e_i))
                                 > 1e-12 * np.linalg.norm(normal))
        certified = True
    else:
        pts = np.vstack([c.points for c in components]) if components else np.zeros((0, 3))
        if len(pts):
            grads = np.stack([g.evaluate(pts) for g in fi.gradient()], axis=-1)
            cr = np.linalg.norm(np.cross(grads, e_i), axis=1)
            plane_transversal = bool(np.all(cr > 1e-8 * np.linalg.norm(grads, axis=1)))
        else:
            plane_transversal = None
        certified = False

    # singleton check for l_c = H_c intersect l
    counts: dict[float, int] = {}
    cs = np.linspace(lo[k], hi[k], n_planes + 2)[1:-1]
    for c in cs:
        n = 0
        for comp in components:
            d = comp.points[:, k] - c
            n += int(np.sum((d[:-1] < 0) & (d[1:] >= 0) | (d[:-1] > 0) & (d[1:] <= 0)))
        counts[float(c)] = n
    singleton = bool(components) and all(v == 1 for v in counts.values())

    regions = _crossing_regions(fi, lf, plane, box) if planar else None
    if not planar:
        notes.append("H is not planar: crossing-region structure not computed")

    return LevelSetAnalysis(i, planar, plane, fi, lf, l2f, box, components, segments,
                            list(eq_in), topology, monotone, plane_transversal, certified,
                            singleton, counts, regions, notes)
