"""Adaptive Dormand-Prince 5(4) integration with dense output and event location.

Also hosts the first-hit map from tangency points and the symmetry
(reversibility) deviation check.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .polyfield import PolyVectorField

R_ESCAPE = 1e3

# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# dense output (Hairer's contd5)
_D = (-12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
      -10690763975 / 1880347072, 701980252875 / 199316789632,
      -1453857185 / 822651844, 69997945 / 29380423)


class IntegrationError(RuntimeError):
    pass


@dataclass
class Event:
    """Scalar function of the state whose zero crossings are located.

    ``direction`` +1 only reports crossings where the function increases along
    the integration, -1 where it decreases, 0 both.
    """

    fn: Callable[[np.ndarray], float]
    name: str
    direction: int = 0
    terminal: bool = True


@dataclass
class EventRecord:
    name: str
    t: float
    s: np.ndarray


@dataclass
class Trajectory:
    ts: np.ndarray
    ys: np.ndarray
    dense: list = field(repr=False, default_factory=list)
    termination: str = "t_end"
    events: list[EventRecord] = field(default_factory=list)
    message: str = ""

    @property
    def t_final(self) -> float:
        return float(self.ts[-1])

    @property
    def final(self) -> np.ndarray:
        return self.ys[-1]

    def __len__(self):
        return len(self.ts)

    def sample(self, t: float) -> np.ndarray:
        """Dense-output state at time t (within the integrated span)."""
        ts = self.ts
        forward = ts[-1] >= ts[0]
        if forward:
            k = int(np.searchsorted(ts, t, side="right")) - 1
        else:
            k = int(np.searchsorted(-ts, -t, side="right")) - 1
        k = min(max(k, 0), len(self.dense) - 1)
        if not self.dense:
            return self.ys[0].copy()
        t0, h, rc = self.dense[k]
        return _dense_eval(t0, h, rc, (t - t0) / h)

    def dense_samples(self, per_step: int = 4) -> tuple[np.ndarray, np.ndarray]:
        """Node states plus ``per_step - 1`` interior dense-output points per step."""
        if not self.dense:
            return self.ts.copy(), self.ys.copy()
        thetas = np.arange(per_step) / per_step
        times, states = [], []
        for k, (t0, h, rc) in enumerate(self.dense):
            # the last step may be cut short by a terminal event
            frac = (self.ts[k + 1] - t0) / h
            for th in thetas * frac:
                times.append(t0 + th * h)
                states.append(_dense_eval(t0, h, rc, th))
        times.append(self.ts[-1])
        states.append(self.ys[-1])
        return np.asarray(times), np.asarray(states)

    def to_csv(self, path, vector_field: PolyVectorField) -> None:
        """Write ``t,x,y,z,F1,F2,F3`` rows, one per accepted node, 17 significant digits."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y", "z", "F1", "F2", "F3"])
            for t, s in zip(self.ts, self.ys):
                f = vector_field(s)
                w.writerow([f"{v:.17g}" for v in (t, *s, *f)])


def _dense_eval(t0, h, rc, theta):
    """Dense output on one step: DOPRI coefficients or a callable interpolant of t."""
    if callable(rc):
        return np.asarray(rc(t0 + theta * h), dtype=float)
    return _interpolate(rc, theta)


def _interpolate(rc, theta):
    r1, r2, r3, r4, r5 = rc
    return r1 + theta * (r2 + (1 - theta) * (r3 + theta * (r4 + (1 - theta) * r5)))


def _stages(f, t, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        acc = y.copy()
        for a, k in zip(_A[i], ks):
            if a:
                acc += (h * a) * k
        ks.append(f(acc))
    y_new = y.copy()
    for b, k in zip(_B, ks):
        if b:
            y_new += (h * b) * k
    return ks, y_new


def _single_step(f, y, h, k1):
    """5th-order solution after one step of size h (no error control)."""
    return _stages(f, 0.0, y, h, k1)[1]


def _initial_step(f, t0, y0, f0, direction, rtol, atol):
    scale = atol + np.abs(y0) * rtol
    d0 = np.linalg.norm(y0 / scale) / math.sqrt(3)
    d1 = np.linalg.norm(f0 / scale) / math.sqrt(3)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = f(y1)
    d2 = np.linalg.norm((f1 - f0) / scale) / math.sqrt(3) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def _crossed(g0, g1, direction):
    up = g0 < 0 <= g1
    down = g0 > 0 >= g1
    if direction > 0:
        return up
    if direction < 0:
        return down
    return up or down


def integrate(vector_field: PolyVectorField | Callable, s0, t_span: tuple[float, float],
              rel_tol: float = 1e-10, abs_tol: float = 1e-12,
              events: Sequence[Event] = (), r_escape: float | None = R_ESCAPE,
              max_steps: int = 10_000_000, fixed_step: float | None = None,
              monitor: Callable[[float, np.ndarray], str | None] | None = None) -> Trajectory:
    """Integrate ds/dt = F(s) from s0 over t_span (backward if t1 < t0).

    Terminates at t_end, at the first terminal event, at escape past
    ``r_escape`` with outward radial velocity, on step-size underflow or a
    non-finite state (``stiff_failure``), or when ``monitor`` returns a reason.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t0 == t1:
        raise ValueError("degenerate time span")
    if fixed_step is None and not (1e-14 <= rel_tol <= 1e-2 and 1e-14 <= abs_tol <= 1e-2):
        raise ValueError("tolerances must lie in [1e-14, 1e-2]")
    f = vector_field
    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    y = np.array(s0, dtype=float)
    t = t0
    k1 = f(y)

    evs = list(events)
    if r_escape is not None:
        r2 = r_escape * r_escape
        evs.append(Event(lambda s: float(s @ s) - r2, "escape", +1, True))
    g_prev = [ev.fn(y) for ev in evs]

    ts, ys, dense, records = [t], [y.copy()], [], []
    termination, message = "t_end", ""

    if fixed_step is not None:
        h = abs(fixed_step)
    else:
        h = _initial_step(f, t0, y, k1, direction, rel_tol, abs_tol)
    steps = 0
    while True:
        if steps >= max_steps:
            termination, message = "stiff_failure", "maximum number of steps reached"
            break
        remaining = abs(t1 - t)
        if remaining <= 1e-15 * max(1.0, abs(t1)):
            break
        h = min(h, remaining)
        if h <= 16 * np.finfo(float).eps * max(1.0, abs(t)):
            termination, message = "stiff_failure", f"step size underflow at t={t}"
            break
        hs = direction * h
        ks, y_new = _stages(f, t, y, hs, k1)
        if fixed_step is None:
            err_vec = hs * sum(e * k for e, k in zip(_E, ks) if e)
            scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))
            if not math.isfinite(err):
                h *= 0.2
                continue
            if err > 1.0:
                h *= max(0.2, 0.9 * err ** -0.2)
                continue
            h_next = h * min(10.0, max(0.2, 0.9 * err ** -0.2 if err > 0 else 10.0))
        else:
            h_next = h
        if not np.all(np.isfinite(y_new)):
            termination, message = "stiff_failure", f"non-finite state at t={t}"
            break
        steps += 1
        k7 = ks[6]
        rc2 = y_new - y
        rc3 = hs * ks[0] - rc2
        rc4 = rc2 - hs * k7 - rc3
        rc5 = hs * sum(d * k for d, k in zip(_D, ks) if d)
        rc = (y.copy(), rc2, rc3, rc4, rc5)

        # event scan on the accepted step
        hit = None
        g_new = [ev.fn(y_new) for ev in evs]
        for idx, ev in enumerate(evs):
            if not _crossed(g_prev[idx], g_new[idx], ev.direction):
                continue
            y_start, k_start, g_start = y, ks[0], g_prev[idx]

            def gfun(tau, ev=ev, y_start=y_start, k_start=k_start):
                if tau == 0.0:
                    return g_start
                return ev.fn(_single_step(f, y_start, direction * tau, k_start))

            g_end = gfun(h)
            if g_end == 0.0:
                tau = h
            elif np.sign(g_end) == np.sign(g_start):
                tau = h  # cancellation between the two evaluations; accept step end
            else:
                tau = brentq(gfun, 0.0, h, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                             maxiter=200)
            if ev.name == "escape":
                s_hit = _single_step(f, y_start, direction * tau, k_start)
                if direction * float(s_hit @ f(s_hit)) <= 0:
                    continue
            if hit is None or tau < hit[0]:
                hit = (tau, idx)
        g_prev = g_new

        if hit is not None:
            tau, idx = hit
            ev = evs[idx]
            s_hit = _single_step(f, y, direction * tau, ks[0])
            t_hit = t + direction * tau
            records.append(EventRecord(ev.name, t_hit, s_hit))
            if ev.terminal:
                dense.append((t, hs, rc))
                ts.append(t_hit)
                ys.append(s_hit)
                termination = "escape" if ev.name == "escape" else "event"
                break

        dense.append((t, hs, rc))
        t = t + hs
        y = y_new
        k1 = k7
        ts.append(t)
        ys.append(y.copy())
        h = h_next
        if monitor is not None:
            reason = monitor(t, y)
            if reason:
                termination = reason
                break
    return Trajectory(np.asarray(ts), np.asarray(ys), dense, termination, records, message)


def integrate_stiff(vector_field: PolyVectorField, s0, t_span: tuple[float, float],
                    rel_tol: float = 1e-10, abs_tol: float = 1e-12,
                    events: Sequence[Event] = (), r_escape: float | None = R_ESCAPE) -> Trajectory:
    """Implicit Radau IIA (order 5) leg, for far-field stretches where DOPRI5 is
    stability-limited. Same events, escape rule and Trajectory format."""
    from scipy.integrate import solve_ivp

    t0, t1 = float(t_span[0]), float(t_span[1])
    direction = 1.0 if t1 > t0 else -1.0
    evs = list(events)
    if r_escape is not None:
        r2 = r_escape * r_escape
        evs.append(Event(lambda s: float(s @ s) - r2, "escape", +1, True))
    wrapped = []
    for ev in evs:
        def g(t, y, ev=ev):
            return ev.fn(y)
        g.terminal = ev.terminal
        g.direction = ev.direction  # along the integration, as in integrate()
        wrapped.append(g)
    sol = solve_ivp(lambda t, y: vector_field(y), (t0, t1), np.asarray(s0, dtype=float),
                    method="Radau", rtol=max(rel_tol, 1e-13), atol=abs_tol,
                    jac=lambda t, y: vector_field.jacobian_at(y), events=wrapped or None,
                    dense_output=True)
    ts, ys = sol.t, sol.y.T
    dense = [(float(a), float(b - a), interp)
             for a, b, interp in zip(ts[:-1], ts[1:], sol.sol.interpolants)]
    records, termination, message = [], "t_end", ""
    if sol.status == -1:
        termination, message = "stiff_failure", sol.message
    hits = [(abs(te[0] - t0), k) for k, te in enumerate(sol.t_events or []) if len(te)]
    for k, te in enumerate(sol.t_events or []):
        for t_hit, s_hit in zip(te, sol.y_events[k]):
            records.append(EventRecord(evs[k].name, float(t_hit), np.asarray(s_hit)))
    if sol.status == 1 and hits:
        k = min(hits)[1]
        ev = evs[k]
        s_hit = sol.y_events[k][-1]
        if ev.name == "escape" and direction * float(s_hit @ vector_field(s_hit)) <= 0:
            message = "inward crossing of the escape sphere"
        termination = "escape" if ev.name == "escape" else "event"
    return Trajectory(np.asarray(ts), np.asarray(ys), dense, termination, records, message)


def concatenate(first: Trajectory, second: Trajectory) -> Trajectory:
    """Join two legs where ``second`` starts at the end of ``first``."""
    return Trajectory(np.concatenate([first.ts, second.ts[1:]]),
                      np.vstack([first.ys, second.ys[1:]]),
                      first.dense + second.dense, second.termination,
                      first.events + second.events, second.message or first.message)


def stiffness_monitor(vector_field: PolyVectorField, threshold: float = 1.0,
                      patience: int = 200):
    """Monitor reporting ``stiff`` once h * |J| stays above ``threshold`` for
    ``patience`` consecutive steps (the DOPRI5 step is then stability-limited)."""
    state = {"t": None, "count": 0}

    def monitor(t, s):
        prev = state["t"]
        state["t"] = t
        if prev is None:
            return None
        h = abs(t - prev)
        if h * float(np.linalg.norm(vector_field.jacobian_at(s), 2)) > threshold:
            state["count"] += 1
        else:
            state["count"] = 0
        return "stiff" if state["count"] >= patience else None

    return monitor


# ---------------------------------------------------------------------------
# first-hit map


class DegenerateStartError(ValueError):
    pass


@dataclass
class HitRecord:
    start: np.ndarray
    hit_point: np.ndarray | None
    hit_time: float | None
    # H_minus | H_plus | tangency | half_plane_H1 | fixed_point | none_escaped | none_maxtime
    target: str
    side: int
    trajectory: Trajectory = field(repr=False)
    min_side_value: float = 0.0

    def to_dict(self) -> dict:
        return {
            "start": self.start.tolist(),
            "hit_point": None if self.hit_point is None else self.hit_point.tolist(),
            "hit_time": self.hit_time,
            "target": self.target,
            "side": self.side,
            "min_side_value": self.min_side_value,
        }


CONTAINMENT_SLACK = 1e-7
FIXED_POINT_TOL = 1e-8


def first_hit(vector_field: PolyVectorField, i: int, s0, x1_coord: float,
              direction: str = "forward", t_max: float = 200.0,
              rel_tol: float = 1e-10, abs_tol: float = 1e-12) -> HitRecord:
    """Follow the flow from a tangency point to its first hit of H or {s_i = x1_coord}.

    ``i`` is the 1-based velocity component defining H = {F_i = 0}. The side of
    H the orbit enters is read from the second Lie derivative at s0; the two
    armed events are the return to H (leaving that side) and the crossing of
    the plane {s_i = x1_coord} while still on that side. An orbit that runs
    into a fixed point before either event is reported with target
    ``fixed_point``.
    """
    from .level_sets import crossing_class, lie_derivatives

    k = i - 1
    s0 = np.asarray(s0, dtype=float)
    fv = vector_field(s0)
    if np.linalg.norm(fv) < 1e-10 * max(1.0, np.linalg.norm(s0)):
        raise DegenerateStartError("start point is a fixed point")
    fi, lf, l2f = lie_derivatives(vector_field, i)
    second = float(l2f.evaluate(s0))
    if abs(second) <= 1e-9 * (1 + np.linalg.norm(s0)):
        raise DegenerateStartError("second Lie derivative vanishes at the start point")
    side = 1 if second > 0 else -1
    t_sign = 1.0 if direction == "forward" else -1.0

    events = [
        Event(lambda s: side * fi(s[0], s[1], s[2]), "H", -1, True),
        Event(lambda s: s[k] - x1_coord, "plane", +1 if s0[k] < x1_coord else -1, True),
    ]
    def near_fixed_point(t, s):
        if np.linalg.norm(vector_field(s)) < FIXED_POINT_TOL * (1.0 + np.linalg.norm(s)):
            return "converged"
        return None

    traj = integrate(vector_field, s0, (0.0, t_sign * t_max), rel_tol, abs_tol, events,
                     monitor=near_fixed_point)
    _, states = traj.dense_samples(4)
    vals = side * fi.evaluate(states)
    min_val = float(np.min(vals))
    if min_val < -CONTAINMENT_SLACK:
        raise IntegrationError(
            f"orbit left the side {side:+d} of H by {min_val:.3e} before any event")

    if traj.termination == "event":
        rec = traj.events[-1]
        if abs(rec.t) < 1e-8:
            raise DegenerateStartError(f"immediate return to H at t={rec.t:.3e}")
        if rec.name == "H":
            target = crossing_class(vector_field, i, rec.s, lf)
            if target == "tangency" and np.linalg.norm(vector_field(rec.s)) < \
                    FIXED_POINT_TOL * (1.0 + np.linalg.norm(rec.s)):
                target = "fixed_point"
        else:
            target = "half_plane_H1"
        return HitRecord(s0, rec.s, abs(rec.t), target, side, traj, min_val)
    if traj.termination == "converged":
        return HitRecord(s0, traj.final, None, "fixed_point", side, traj, min_val)
    if traj.termination == "escape":
        return HitRecord(s0, None, None, "none_escaped", side, traj, min_val)
    if traj.termination == "stiff_failure":
        raise IntegrationError(traj.message)
    return HitRecord(s0, None, None, "none_maxtime", side, traj, min_val)


# ---------------------------------------------------------------------------
# reversibility


@dataclass(frozen=True)
class Involution:
    """Signed coordinate permutation s -> signs * s[perm], paired with a time sign."""

    perm: tuple[int, int, int] = (0, 1, 2)
    signs: tuple[float, float, float] = (1.0, 1.0, 1.0)
    time_sign: int = 1

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.asarray(self.signs) * s[..., list(self.perm)]


MICHELSON_REVERSOR = Involution((0, 1, 2), (-1.0, 1.0, -1.0), -1)


def symmetry_deviation(vector_field: PolyVectorField, involution: Involution, s0, T: float,
                       n_samples: int = 201, rel_tol: float = 1e-10,
                       abs_tol: float = 1e-12) -> float:
    """max_t |phi_t(s0) - sigma(phi_{tau t}(sigma(s0)))| over sampled t in [0, T]."""
    if not T > 0:
        raise ValueError("T must be positive")
    s0 = np.asarray(s0, dtype=float)
    a = integrate(vector_field, s0, (0.0, T), rel_tol, abs_tol, r_escape=None)
    b = integrate(vector_field, involution(s0), (0.0, involution.time_sign * T), rel_tol,
                  abs_tol, r_escape=None)
    for leg in (a, b):
        if leg.termination != "t_end":
            raise IntegrationError(f"symmetry leg failed: {leg.termination} {leg.message}")
    dev = 0.0
    for t in np.linspace(0.0, T, n_samples):
        p = a.sample(t)
        q = involution(b.sample(involution.time_sign * t))
        dev = max(dev, float(np.linalg.norm(p - q)))
    return dev
