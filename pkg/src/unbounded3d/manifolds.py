"""One-dimensional invariant manifolds of equilibria: tracing, sign records, connections.

A 1D manifold is seeded at ``location +- eps * v`` with ``v`` the unit real
eigenvector and integrated forward (unstable, real eigenvalue > 0) or backward
(stable, real eigenvalue < 0). Traces end by escaping, by converging to an
equilibrium, or at ``t_max``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .equilibria import Equilibrium, find_equilibria
from .flowkit import (R_ESCAPE, Event, Trajectory, concatenate, integrate, integrate_stiff,
                      stiffness_monitor)
from .polyfield import PolyVectorField

CONSTANT_POSITIVE = "constant_positive"
CONSTANT_NEGATIVE = "constant_negative"
MIXED = "mixed"
IDENTICALLY_ZERO = "identically_zero"

ESCAPED = "escaped"
CONVERGED = "converged_to"
BOUNDED_MAXTIME = "bounded_maxtime"
FAILED = "integration_failure"

CONVERGENCE_RADIUS = 1e-6
CONVERGENCE_WINDOW = 100
CONTAINMENT_SLACK = 1e-6
SERIES_TOL = 1e-10


class ManifoldError(ValueError):
    pass


class NoSignChangeError(ManifoldError):
    pass


def default_epsilon(eq: Equilibrium) -> float:
    return 1e-6 * (1.0 + float(np.linalg.norm(eq.location)))


def real_eigenvector(eq: Equilibrium) -> tuple[float, np.ndarray]:
    """(real eigenvalue, unit eigenvector) for the 1D invariant direction.

    The sign is fixed so that the first component that is not negligible is
    positive; ``plus`` branches are seeded along this vector.
    """
    if eq.has_complex_pair:
        lam = eq.eigenvalues[0].real
    else:
        # real spectrum: the 1D direction is the eigenvalue whose sign is unique
        reals = [l.real for l in eq.eigenvalues]
        pos = [l for l in reals if l > 0]
        neg = [l for l in reals if l < 0]
        if len(pos) == 1 and len(neg) == 2:
            lam = pos[0]
        elif len(neg) == 1 and len(pos) == 2:
            lam = neg[0]
        else:
            raise ManifoldError(f"{eq.classification} at {eq.location.tolist()} has no "
                                "one-dimensional invariant direction")
    if abs(lam) <= 1e-8:
        raise ManifoldError("real eigenvalue too close to zero")
    a = eq.jacobian - lam * np.eye(3)
    _, sv, vt = np.linalg.svd(a)
    if sv[1] <= 1e-8 * max(1.0, sv[0]):
        raise ManifoldError("real eigenvector is ill-conditioned")
    v = vt[-1]
    v = v / np.linalg.norm(v)
    for comp in v:
        if abs(comp) > 1e-12:
            if comp < 0:
                v = -v
            break
    return float(lam), v


def is_weak_direction(eq: Equilibrium) -> bool:
    """Node-like case: the real eigenvalue has the sign of the complex pair but is weaker.

    Then every nearby orbit enters the equilibrium tangent to ``v`` and a
    straight seed ``location + eps * v`` is swamped by the faster spiral when
    integrated away from the equilibrium; the smooth invariant curve is
    computed from its Taylor expansion instead.
    """
    lam = eq.eigenvalues[0].real
    mu = eq.eigenvalues[1].real
    return eq.has_complex_pair and lam * mu > 0 and abs(lam) < abs(mu)


@dataclass
class LocalManifold:
    """Taylor parameterization u(sigma) = sum a_k sigma^k of a 1D invariant curve.

    It conjugates the flow to sigma' = lam * sigma, i.e.
    F(u(sigma)) = lam * sigma * u'(sigma), with a_0 the equilibrium and a_1 = v.
    """

    lam: float
    coeffs: np.ndarray  # shape (3, order + 1)
    radius: float  # estimated radius of convergence

    def point(self, sigma: float) -> np.ndarray:
        return self.coeffs @ (sigma ** np.arange(self.coeffs.shape[1]))

    def derivative(self, sigma: float) -> np.ndarray:
        k = np.arange(1, self.coeffs.shape[1])
        return self.coeffs[:, 1:] @ (k * sigma ** (k - 1))

    def residual(self, field_: PolyVectorField, sigma: float) -> float:
        return float(np.linalg.norm(field_(self.point(sigma))
                                    - self.lam * sigma * self.derivative(sigma)))


def _compose_series(field_: PolyVectorField, coeffs: np.ndarray) -> np.ndarray:
    """Taylor coefficients of F(u(sigma)) truncated at the order of ``coeffs``."""
    n = coeffs.shape[1]
    one = np.zeros(n)
    one[0] = 1.0
    powers = [[one] for _ in range(3)]
    out = np.zeros((3, n))
    for comp in range(3):
        for exps, c in field_[comp].terms:
            acc = one
            for d, e in enumerate(exps):
                while len(powers[d]) <= e:
                    powers[d].append(np.convolve(powers[d][-1], coeffs[d])[:n])
                acc = np.convolve(acc, powers[d][e])[:n]
            out[comp] += c * acc
    return out


def parameterize_manifold(field_: PolyVectorField, eq: Equilibrium,
                          order: int = 40) -> LocalManifold:
    """Order-by-order solution of the invariance equation along the real eigenvector.

    At order k: (J - k*lam) a_k = -[F(u)]_k with a_k still zero on the right.
    """
    lam, v = real_eigenvector(eq)
    jac = eq.jacobian
    coeffs = np.zeros((3, order + 1))
    coeffs[:, 0] = eq.location
    coeffs[:, 1] = v
    for k in range(2, order + 1):
        rhs = _compose_series(field_, coeffs)[:, k]
        coeffs[:, k] = np.linalg.solve(jac - k * lam * np.eye(3), -rhs)
    norms = np.linalg.norm(coeffs, axis=0)
    tail = [norms[k] ** (-1.0 / k) for k in range(order // 2, order + 1) if norms[k] > 0]
    radius = float(np.min(tail)) if tail else np.inf
    return LocalManifold(lam, coeffs, radius)


def _series_leg(local: LocalManifold, sign: float, eps: float, sigma0: float,
                n_nodes: int = 200) -> Trajectory:
    """Trajectory along the parameterized curve from sigma = eps to sigma0 (flow time)."""
    lam = local.lam
    t_end = np.log(sigma0 / eps) / lam
    ts = np.linspace(0.0, t_end, n_nodes)

    def at(t):
        return local.point(sign * eps * np.exp(lam * t))

    ys = np.array([at(t) for t in ts])
    dense = [(float(a), float(b - a), at) for a, b in zip(ts[:-1], ts[1:])]
    return Trajectory(ts, ys, dense, "series")


@dataclass
class SignRecord:
    value: str
    violation: np.ndarray | None = None
    n_samples: int = 0

    def to_dict(self) -> dict:
        return {"value": self.value,
                "violation": None if self.violation is None else self.violation.tolist(),
                "n_samples": self.n_samples}


@dataclass
class ManifoldTrace:
    equilibrium: Equilibrium
    branch: str  # plus | minus
    stability: str  # stable | unstable
    trajectory: Trajectory = field(repr=False)
    status: str
    epsilon: float
    seed: np.ndarray
    converged_to: int | None = None  # index into the equilibria list used for tracing
    target_location: np.ndarray | None = None
    signs: dict[int, SignRecord] = field(default_factory=dict)

    @property
    def points(self) -> np.ndarray:
        return self.trajectory.ys

    @property
    def exit_point(self) -> np.ndarray:
        return self.trajectory.ys[-1]

    def outside_seed_ball(self, per_step: int = 4, factor: float = 10.0) -> np.ndarray:
        _, states = self.trajectory.dense_samples(per_step)
        d = np.linalg.norm(states - self.equilibrium.location, axis=1)
        return states[d > factor * self.epsilon]

    def to_dict(self) -> dict:
        return {
            "equilibrium": self.equilibrium.location.tolist(),
            "branch": self.branch,
            "stability": self.stability,
            "status": self.status,
            "converged_to": self.converged_to,
            "target_location": None if self.target_location is None
            else self.target_location.tolist(),
            "epsilon": self.epsilon,
            "seed": self.seed.tolist(),
            "n_nodes": len(self.trajectory),
            "t_final": self.trajectory.t_final,
            "exit_point": self.exit_point.tolist(),
            "signs": {str(k): v.to_dict() for k, v in self.signs.items()},
        }


def sign_invariance(trace: ManifoldTrace, field_: PolyVectorField, i: int) -> SignRecord:
    """Sign behaviour of F_i along a trace, outside the ball of radius 10*eps."""
    fi = field_[i - 1]
    pts = trace.outside_seed_ball()
    if len(pts) == 0:
        return SignRecord(IDENTICALLY_ZERO, None, 0)
    vals = fi.evaluate(pts)
    band = 1e-9 * (1.0 + np.linalg.norm(pts, axis=1))
    signs = np.where(vals > band, 1, np.where(vals < -band, -1, 0))
    nz = np.flatnonzero(signs)
    if nz.size == 0:
        return SignRecord(IDENTICALLY_ZERO, None, len(pts))
    first = signs[nz[0]]
    bad = np.flatnonzero(signs == -first)
    if bad.size:
        return SignRecord(MIXED, pts[bad[0]], len(pts))
    return SignRecord(CONSTANT_POSITIVE if first > 0 else CONSTANT_NEGATIVE, None, len(pts))


def _convergence_monitor(targets: Sequence[np.ndarray], origin: np.ndarray, eps: float):
    """Stop when the state sits within 1e-6 of a target and distance kept shrinking."""
    hist = [deque(maxlen=CONVERGENCE_WINDOW) for _ in targets]
    left_home = [False]
    state = {"hit": None}

    def monitor(t, s):
        if not left_home[0] and np.linalg.norm(s - origin) > 1e3 * eps:
            left_home[0] = True
        for k, p in enumerate(targets):
            if np.array_equal(p, origin) and not left_home[0]:
                continue
            d = float(np.linalg.norm(s - p))
            hist[k].append(d)
            if d < CONVERGENCE_RADIUS:
                h = hist[k]
                if len(h) == CONVERGENCE_WINDOW and all(b <= a for a, b in zip(h, list(h)[1:])):
                    state["hit"] = k
                    return "converged"
                if np.linalg.norm(s - p) < 1e-12 * (1.0 + np.linalg.norm(p)):
                    state["hit"] = k
                    return "converged"
        return None

    return monitor, state


def trace_branch(field_: PolyVectorField, eq: Equilibrium, branch: str,
                 eps: float | None = None, t_max: float = 200.0,
                 equilibria: Sequence[Equilibrium] | None = None,
                 r_escape: float = R_ESCAPE, rel_tol: float = 1e-10, abs_tol: float = 1e-12,
                 reverse_time: bool = False,
                 sign_components: Sequence[int] = (1, 2, 3)) -> ManifoldTrace:
    """Trace one branch of the 1D manifold of ``eq``.

    ``reverse_time`` flips the stability-appropriate time direction; it exists
    only as a negative control.
    """
    if branch not in ("plus", "minus"):
        raise ValueError("branch must be 'plus' or 'minus'")
    lam, v = real_eigenvector(eq)
    eps = default_epsilon(eq) if eps is None else float(eps)
    stability = "stable" if lam < 0 else "unstable"
    direction = -1.0 if stability == "stable" else 1.0
    if reverse_time:
        direction = -direction
    seed = eq.location + (eps if branch == "plus" else -eps) * v
    eqs = list(equilibria) if equilibria is not None else [eq]
    targets = [e.location for e in eqs]
    converged, state = _convergence_monitor(targets, eq.location, eps)
    stiff = stiffness_monitor(field_)

    def monitor(t, s):
        return converged(t, s) or stiff(t, s)

    head = None
    start, t0 = seed, 0.0
    if is_weak_direction(eq) and not reverse_time:
        local = parameterize_manifold(field_, eq)
        sigma0 = 0.5 * local.radius
        while sigma0 > 10 * eps and local.residual(field_, sigma0) > \
                SERIES_TOL * (1.0 + float(np.linalg.norm(local.point(sigma0)))):
            sigma0 *= 0.5
        if sigma0 > 10 * eps:
            head = _series_leg(local, 1.0 if branch == "plus" else -1.0, eps, sigma0)
            start, t0 = head.final, head.t_final
    traj = integrate(field_, start, (t0, t0 + direction * t_max), rel_tol, abs_tol,
                     r_escape=r_escape, monitor=monitor)
    if traj.termination == "stiff":
        # far-field stretch limited by stability: finish with the implicit solver
        tail = integrate_stiff(field_, traj.final, (traj.t_final, t0 + direction * t_max),
                               rel_tol, abs_tol, r_escape=r_escape)
        traj = concatenate(traj, tail)
    if head is not None:
        traj = concatenate(head, traj)
    conv = None
    target = None
    if traj.termination == "escape":
        status = ESCAPED
    elif traj.termination == "converged":
        status = CONVERGED
        conv = state["hit"]
        target = targets[conv]
    elif traj.termination == "t_end":
        status = BOUNDED_MAXTIME
    else:
        status = FAILED
    trace = ManifoldTrace(eq, branch, stability, traj, status, eps, seed, conv, target)
    for i in sign_components:
        trace.signs[i] = sign_invariance(trace, field_, i)
    return trace


def trace_1d_manifolds(field_: PolyVectorField, eq: Equilibrium, eps: float | None = None,
                       t_max: float = 200.0,
                       equilibria: Sequence[Equilibrium] | None = None,
                       **kw) -> tuple[ManifoldTrace, ManifoldTrace]:
    """Both branches (plus, minus) of the 1D invariant manifold of ``eq``."""
    return (trace_branch(field_, eq, "plus", eps, t_max, equilibria, **kw),
            trace_branch(field_, eq, "minus", eps, t_max, equilibria, **kw))


@dataclass
class TransversalityReport:
    verdict: str  # transverse | tangent
    conditioning: float
    normal_components: tuple[float, float]
    complex_pair: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def transversality_2d(field_: PolyVectorField, eq: Equilibrium, i: int) -> TransversalityReport:
    """Whether the Jacobian at ``eq`` moves the plane H = {F_i = 0} off itself."""
    fi = field_[i - 1]
    if fi.degree != 1:
        raise ManifoldError(f"H = {{F_{i} = 0}} is not a plane; unsupported")
    n = np.array([float(g.constant_value()) for g in fi.gradient()])
    n /= np.linalg.norm(n)
    helper = np.eye(3)[int(np.argmin(np.abs(n)))]
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    w = np.cross(n, u)
    j = eq.jacobian
    comps = (abs(float(n @ j @ u)), abs(float(n @ j @ w)))
    jn = float(np.linalg.norm(j, 2))
    cond = max(comps) / jn if jn > 0 else 0.0
    verdict = "transverse" if max(comps) > 1e-8 * jn else "tangent"
    return TransversalityReport(verdict, cond, comps, eq.has_complex_pair)


def connection_distance(field_: PolyVectorField, from_eq: Equilibrium, to_eq: Equilibrium,
                        eps: float | None = None, t_max: float = 200.0,
                        equilibria: Sequence[Equilibrium] | None = None
                        ) -> tuple[float, ManifoldTrace]:
    """Closest approach of the 1D manifold of ``from_eq`` to ``to_eq`` (both branches)."""
    eps = default_epsilon(from_eq) if eps is None else eps
    eqs = list(equilibria) if equilibria is not None else [from_eq, to_eq]
    best = (np.inf, None)
    for trace in trace_1d_manifolds(field_, from_eq, eps, t_max, eqs):
        _, pts = trace.trajectory.dense_samples(8)
        away = np.linalg.norm(pts - from_eq.location, axis=1) > 100 * eps
        if not np.any(away):
            continue
        first = int(np.argmax(away))
        d = float(np.min(np.linalg.norm(pts[first:] - to_eq.location, axis=1)))
        if d < best[0]:
            best = (d, trace)
    if best[1] is None:
        raise ManifoldError("trace never left the seed neighbourhood")
    return best


# ---------------------------------------------------------------------------
# heteroclinic shooting for reversible families


def michelson_family(c: float) -> PolyVectorField:
    from .polyfield import zoo

    return zoo("michelson", c=c)


def _unstable_source(field_: PolyVectorField) -> Equilibrium:
    """The equilibrium with a 1D unstable manifold and the smallest x (p_minus for Michelson)."""
    cands = [e for e in find_equilibria(field_)
             if e.has_complex_pair and e.eigenvalues[0].real > 0]
    if not cands:
        raise ManifoldError("no equilibrium with a one-dimensional unstable manifold")
    return min(cands, key=lambda e: e.location[0])


@dataclass
class ShotResult:
    c: float
    g: float | None
    crossing: np.ndarray | None
    trace: ManifoldTrace | None = field(repr=False, default=None)
    note: str = ""


def shooting_functional(family: Callable[[float], PolyVectorField], c: float,
                        t_max: float = 200.0, rel_tol: float = 1e-12,
                        abs_tol: float = 1e-14) -> ShotResult:
    """z at the first crossing of {x = 0} with dx/dt < 0 by the unstable branch of p_minus.

    The branch is the one leaving p_minus towards x > 0; it passes the plane
    upwards first, and the functional is read off where it comes back down.
    Later crossings are ignored. A zero is a crossing of the reversor's fixed
    line {x = 0, z = 0}, hence a symmetric orbit.
    """
    field_ = family(c)
    src = _unstable_source(field_)
    lam, v = real_eigenvector(src)
    branch = "plus" if v[0] > 0 else "minus"
    eps = default_epsilon(src)
    seed = src.location + (eps if branch == "plus" else -eps) * v
    ev = Event(lambda s: s[0], "symmetry_plane", -1, True)
    traj = integrate(field_, seed, (0.0, t_max), rel_tol, abs_tol, [ev])
    trace = ManifoldTrace(src, branch, "unstable", traj,
                          ESCAPED if traj.termination == "escape" else BOUNDED_MAXTIME,
                          eps, seed)
    if traj.termination != "event":
        return ShotResult(c, None, None, trace, f"no crossing ({traj.termination})")
    rec = traj.events[-1]
    return ShotResult(c, float(rec.s[2]), rec.s, trace)


@dataclass
class ConnectionCertificate:
    c_star: float
    g_at_c_star: float
    bracket: tuple[float, float]
    distance: float
    crossing: np.ndarray
    scan: list[tuple[float, float | None]]
    vector_field: PolyVectorField = field(repr=False)
    source: Equilibrium = field(repr=False)
    target: Equilibrium = field(repr=False)
    final_bracket: tuple[float, float] = (np.nan, np.nan)

    def to_dict(self) -> dict:
        return {"c_star": self.c_star, "g_at_c_star": self.g_at_c_star,
                "bracket": list(self.bracket), "final_bracket": list(self.final_bracket),
                "connection_distance": self.distance,
                "crossing": self.crossing.tolist(),
                "scan": [[c, g] for c, g in self.scan]}


def scan_connection(family, c_values: Sequence[float], **kw) -> list[ShotResult]:
    return [shooting_functional(family, float(c), **kw) for c in c_values]


def find_connection(family: Callable[[float], PolyVectorField] = michelson_family,
                    c_interval: tuple[float, float] = (0.2, 2.0), step: float = 0.05,
                    tol: float = 1e-8, g_tol: float = 1e-8,
                    t_max: float = 200.0) -> ConnectionCertificate:
    """Scan c for a sign change of the shooting functional and refine it to width ``tol``.

    A symmetric crossing (x = 0, z = 0) of the unstable branch of p_minus is
    mapped by the reversor onto the stable branch of p_plus, so a root of the
    functional is a heteroclinic connection p_minus -> p_plus.
    """
    lo, hi = c_interval
    n = int(round((hi - lo) / step))
    cs = lo + step * np.arange(n + 1)
    shots = scan_connection(family, cs, t_max=t_max)
    scan = [(float(s.c), s.g) for s in shots]
    brackets = [(a, b) for a, b in zip(shots[:-1], shots[1:])
                if a.g is not None and b.g is not None and np.sign(a.g) != np.sign(b.g)]
    if not brackets:
        raise NoSignChangeError(f"no sign change of the shooting functional on {c_interval}")
    notes = []
    for a, b in brackets:
        def g(c):
            r = shooting_functional(family, c, t_max=t_max)
            if r.g is None:
                raise ManifoldError(f"branch misses the symmetry plane at c={c}")
            return r.g
        try:
            c_star = brentq(g, a.c, b.c, xtol=min(tol, 1e-13), rtol=4 * np.finfo(float).eps,
                            maxiter=200)
        except ManifoldError as exc:
            notes.append(str(exc))
            continue
        shot = shooting_functional(family, c_star, t_max=t_max)
        if shot.g is None or abs(shot.g) >= g_tol:
            notes.append(f"bracket ({a.c}, {b.c}) is a jump, not a root")
            continue
        # explicit final bracket of width below tol around the root
        half = 0.25 * tol
        lo_c, hi_c = c_star - half, c_star + half
        try:
            g_lo, g_hi = g(lo_c), g(hi_c)
        except ManifoldError as exc:
            notes.append(str(exc))
            continue
        if np.sign(g_lo) == np.sign(g_hi):
            notes.append(f"no sign change across [{lo_c}, {hi_c}]")
            continue
        field_ = family(c_star)
        src = _unstable_source(field_)
        others = [e for e in find_equilibria(field_) if e is not src
                  and not np.allclose(e.location, src.location)]
        # the reversor image of the source: mirror in x and z
        mirror = src.location * np.array([-1.0, 1.0, -1.0])
        target = min(others, key=lambda e: np.linalg.norm(e.location - mirror))
        dist, _ = connection_distance(field_, src, target, t_max=t_max,
                                      equilibria=[src, target])
        return ConnectionCertificate(float(c_star), float(shot.g), (float(a.c), float(b.c)),
                                     dist, shot.crossing, scan, field_, src, target,
                                     (float(lo_c), float(hi_c)))
    raise NoSignChangeError("; ".join(notes) or "no usable bracket")


# ---------------------------------------------------------------------------
# invariant graph


HETEROCLINIC_KNOT = "heteroclinic_knot_candidate"
HOMOCLINIC_NOOSE = "homoclinic_noose_candidate"
UNKNOT = "unknot_certified"
UNRESOLVED = "unresolved"


@dataclass
class Connection:
    """A bounded orbit joining two equilibria (given by index), e.g. from shooting."""

    source: int
    target: int
    distance: float


@dataclass
class GraphEdge:
    source: int
    target: int | str  # equilibrium index, "infinity" or "unresolved"
    kind: str  # escaped | converged_to | connection | bounded_maxtime | integration_failure
    branch: str | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class InvariantGraph:
    nodes: list[np.ndarray]
    edges: list[GraphEdge]
    classification: str
    reasons: list[str] = field(default_factory=list)
    unknot_details: dict | None = None

    def to_dict(self) -> dict:
        return {"nodes": [n.tolist() for n in self.nodes] + ["infinity"],
                "edges": [e.to_dict() for e in self.edges],
                "classification": self.classification,
                "reasons": list(self.reasons),
                "unknot": self.unknot_details}


def _node_index(nodes, loc):
    for k, n in enumerate(nodes):
        if np.linalg.norm(n - loc) <= 1e-9 * (1.0 + np.linalg.norm(loc)):
            return k
    nodes.append(np.asarray(loc, dtype=float))
    return len(nodes) - 1


def _half_space_check(field_, i, gamma_lo, gamma_hi, c1, a1):
    k = i - 1
    details = {"i": i, "c1": c1, "a1": a1}
    ok = True
    for name, tr, bound, side in (("gamma1", gamma_lo, c1, -1), ("gamma2", gamma_hi, a1, +1)):
        rec = sign_invariance(tr, field_, i)
        pts = tr.outside_seed_ball()
        coord = pts[:, k] if len(pts) else np.array([bound])
        excess = float(np.max(side * (bound - coord))) if len(coord) else 0.0
        contained = excess <= CONTAINMENT_SLACK
        details[name] = {"status": tr.status, "sign": rec.value, "contained": contained,
                         "max_excursion": excess}
        ok &= tr.status == ESCAPED and rec.value in (CONSTANT_POSITIVE, CONSTANT_NEGATIVE) \
            and contained
    return ok, details


def assemble_invariant_graph(field_: PolyVectorField, traces: Sequence[ManifoldTrace],
                             connections: Sequence[Connection] = (),
                             unknot: tuple[int, ManifoldTrace, ManifoldTrace] | None = None
                             ) -> InvariantGraph:
    """Graph of equilibria, infinity and traced 1D branches, with a structural verdict.

    ``unknot`` = (i, gamma1, gamma2) requests the monotone-coordinate
    certificate: both traces escape, F_i keeps a constant sign on each, and they
    lie in the disjoint half-spaces {s_i <= c1} and {s_i >= a1} determined by
    their equilibria (the straight segment between the two equilibria closes
    the curve). Both assignments of the traces to the two sides are tried.
    """
    nodes: list[np.ndarray] = []
    edges: list[GraphEdge] = []
    reasons: list[str] = []
    for tr in traces:
        if tr.trajectory is None:
            raise ManifoldError("empty trace")
        src = _node_index(nodes, tr.equilibrium.location)
        if tr.status == ESCAPED:
            edges.append(GraphEdge(src, "infinity", ESCAPED, tr.branch))
        elif tr.status == CONVERGED:
            edges.append(GraphEdge(src, _node_index(nodes, tr.target_location), CONVERGED,
                                   tr.branch))
        else:
            edges.append(GraphEdge(src, "unresolved", tr.status, tr.branch))
    for c in connections:
        edges.append(GraphEdge(c.source, c.target, "connection"))
    for tr in traces:
        fv = field_(tr.equilibrium.location)
        if np.linalg.norm(fv) > 1e-8 * (1.0 + np.linalg.norm(tr.equilibrium.location)):
            raise ManifoldError("trace equilibrium is not a fixed point of this field")

    # branches covered by a supplied connection are resolved
    covered = {(c.source, "connection") for c in connections} | \
        {(c.target, "connection") for c in connections}
    open_edges = [e for e in edges if e.target == "unresolved"]
    unresolved = []
    for e in open_edges:
        if (e.source, "connection") in covered:
            continue
        unresolved.append(e)
    graph = InvariantGraph(nodes, edges, UNRESOLVED, reasons)
    if unresolved:
        reasons.append(f"{len(unresolved)} branch(es) ended without reaching a node")
        return graph
    if connections:
        homo = any(c.source == c.target for c in connections)
        graph.classification = HOMOCLINIC_NOOSE if homo else HETEROCLINIC_KNOT
        reasons.append("every branch ends at an equilibrium or at infinity; "
                       f"{len(connections)} bounded connection(s) supplied")
        return graph
    if unknot is not None:
        i, g1, g2 = unknot
        k = i - 1
        tries = []
        for lo_tr, hi_tr in ((g1, g2), (g2, g1)):
            c1 = float(lo_tr.equilibrium.location[k])
            a1 = float(hi_tr.equilibrium.location[k])
            if c1 > a1 + 1e-12:
                tries.append((False, {"reason": "c1 > a1"}))
                continue
            tries.append(_half_space_check(field_, i, lo_tr, hi_tr, c1, a1))
            if tries[-1][0]:
                break
        ok, details = next(((o, d) for o, d in tries if o), tries[-1])
        graph.unknot_details = details
        if ok:
            graph.classification = UNKNOT
            reasons.append("monotone coordinate with disjoint half-spaces")
        else:
            reasons.append("monotone-coordinate unknot argument does not apply")
        return graph
    reasons.append("no connection supplied and no unknot certificate requested")
    return graph
