"""Hypothesis checks, structure prediction and verification for the unbounded-manifold theorem.

The theorem concerns a polynomial field F, a component i and the velocity level
set H = {F_i = 0} with its tangency curve l. Under the hypotheses h1-h3f it
predicts two equilibria x1, x2 on l (extremal in s_i) whose 1D invariant
manifolds Gamma_1, Gamma_2 escape to infinity inside half-spaces bounded by
{s_i = const} with a constant sign of F_i, and close up into an unknot.

Statuses follow a fixed vocabulary:

* ``pass`` - checked exactly (or with certified structure, e.g. planar H);
* ``numerical_evidence`` - supported by sampling only;
* ``fail`` - violated, or the sub-computation failed (details say which);
* ``unsupported`` - the check is not implemented for this kind of input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .equilibria import DEGENERATE, Equilibrium, default_search_box, find_equilibria
from .level_sets import (STAYS_NONNEG, STAYS_NONPOS, LevelSetAnalysis, LevelSetError,
                         TangencySegment, level_set_analysis, tangency_local_behavior)
from .manifolds import (CONSTANT_NEGATIVE, CONSTANT_POSITIVE, CONTAINMENT_SLACK, ESCAPED,
                        BOUNDED_MAXTIME, InvariantGraph, ManifoldError, ManifoldTrace,
                        TransversalityReport, assemble_invariant_graph, sign_invariance,
                        trace_1d_manifolds, transversality_2d)
from .polyfield import PolyVectorField
from .sphere_degree import DegreeError, IndexAtInfinityReport, index_at_infinity

PASS = "pass"
FAIL = "fail"
EVIDENCE = "numerical_evidence"
UNSUPPORTED = "unsupported"

HYPOTHESIS_IDS = ("h1", "h2", "h3a", "h3b", "h3c", "h3d", "h3e", "h3f")
H3E_SAMPLES = 64
PURE_IMAGINARY_TOL = 1e-9
NON_GENERIC_TOL = 1e-8

# hypotheses the branched analysis path may skip (it handles a non-line l itself);
# h3d only in its singleton part, which a branched l necessarily violates
BRANCHED_TOLERATED = {"h3b", "h3d", "h3f"}


class PredictionError(ValueError):
    """The structure cannot be predicted (hypotheses fail or l_1 has mixed signs)."""


@dataclass
class HypothesisEntry:
    id: str
    status: str
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"id": self.id, "status": self.status, "details": self.details}


@dataclass
class HypothesisReport:
    i: int
    entries: list[HypothesisEntry]
    equilibria: list[Equilibrium] = field(repr=False, default_factory=list)
    level_sets: LevelSetAnalysis | None = field(repr=False, default=None)
    index: IndexAtInfinityReport | None = field(repr=False, default=None)
    search_box: tuple = ((-10.0, 10.0),) * 3

    @property
    def verdict(self) -> str:
        ok = all(e.status in (PASS, EVIDENCE) for e in self.entries)
        return PASS if ok else FAIL

    @property
    def failed(self) -> list[str]:
        return [e.id for e in self.entries if e.status not in (PASS, EVIDENCE)]

    def entry(self, hid: str) -> HypothesisEntry:
        return next(e for e in self.entries if e.id == hid)

    @property
    def branched_path_applicable(self) -> bool:
        """Only the topology of l fails (h3b, h3f, singleton part of h3d)."""
        failed = set(self.failed)
        if not failed or not failed <= BRANCHED_TOLERATED or "h3b" not in failed:
            return False
        if "h3d" in failed and not self.entry("h3d").details.get("plane_transversal"):
            return False
        return True

    def to_dict(self) -> dict:
        return {"i": self.i, "verdict": self.verdict, "failed": self.failed,
                "branched_path_applicable": self.branched_path_applicable,
                "entries": [e.to_dict() for e in self.entries]}


def _segment_label(seg: TangencySegment) -> str:
    return f"{seg.start_kind}->{seg.end_kind} (component {seg.component})"


def _h3e_segment(field_: PolyVectorField, la: LevelSetAnalysis, seg: TangencySegment) -> dict:
    """Sign of L2 (one-sided tangency) at interior samples of a fixed-point-free segment."""
    pts = seg.interior_samples(H3E_SAMPLES)
    vals = la.L2.evaluate(pts)
    tol = 1e-9 * (1.0 + np.linalg.norm(pts, axis=1))
    signs = []
    for p, v, t in zip(pts, vals, tol):
        if abs(v) > t:
            signs.append(int(np.sign(v)))
            continue
        # degenerate tangency: fall back to the two-sided integration probe
        beh = tangency_local_behavior(field_, la.i, p)
        signs.append(+1 if beh == STAYS_NONNEG else -1 if beh == STAYS_NONPOS else 0)
    uniq = sorted(set(signs))
    return {"segment": _segment_label(seg), "samples": len(pts), "signs": uniq,
            "unanimous": len(uniq) == 1 and uniq[0] != 0}


def check_hypotheses(field_: PolyVectorField, i: int, search_box=None, window=None,
                     equilibria: Sequence[Equilibrium] | None = None,
                     rng_seed: int = 0) -> HypothesisReport:
    """Evaluate every hypothesis of the theorem for component ``i``.

    Sub-computation failures become ``fail`` entries with the error message; the
    remaining hypotheses are still evaluated where possible.
    """
    if i not in (1, 2, 3):
        raise ValueError("component i must be 1, 2 or 3")
    box = tuple(tuple(map(float, b)) for b in (search_box or default_search_box(field_)))
    win = window if window is not None else box
    eqs = list(equilibria) if equilibria is not None else find_equilibria(field_, box)
    entries: list[HypothesisEntry] = []
    report = HypothesisReport(i, entries, eqs, None, None, box)

    # h1: index at infinity in {0, +1, -1}
    try:
        ind = index_at_infinity(field_, eqs, rng_seed=rng_seed)
        report.index = ind
        det = {"index": ind.index, "stable": ind.stable, "radii": list(ind.radii),
               "degrees": list(ind.degrees), "methods_agree": ind.methods_agree}
        if not ind.stable or ind.index is None:
            entries.append(HypothesisEntry("h1", FAIL, {**det, "reason": "unstable degree"}))
        elif ind.index in (0, 1, -1):
            entries.append(HypothesisEntry("h1", PASS, det))
        else:
            entries.append(HypothesisEntry("h1", FAIL, {**det, "reason": "index outside {0,+1,-1}"}))
    except (DegreeError, ValueError) as exc:
        entries.append(HypothesisEntry("h1", FAIL, {"error": str(exc)}))

    # h2: finitely many non-degenerate equilibria, each with a complex pair
    bad = []
    for e in eqs:
        reasons = []
        if e.classification == DEGENERATE:
            reasons.append("degenerate")
        if not e.has_complex_pair:
            reasons.append("no complex-conjugate pair")
        elif abs(e.eigenvalues[1].real) < PURE_IMAGINARY_TOL:
            reasons.append("pure-imaginary pair (degenerate)")
        if reasons:
            bad.append({"location": e.location.tolist(), "reasons": reasons})
    det = {"count": len(eqs), "search_box": [list(b) for b in box],
           "classifications": [e.classification for e in eqs]}
    if not eqs:
        entries.append(HypothesisEntry("h2", FAIL, {**det, "reason": "no equilibria found"}))
    elif bad:
        entries.append(HypothesisEntry("h2", FAIL, {**det, "violations": bad}))
    else:
        # finiteness/completeness is only known inside the searched box
        entries.append(HypothesisEntry("h2", EVIDENCE, det))

    # h3*: level-set structure
    try:
        la = level_set_analysis(field_, i, win, equilibria=eqs)
    except LevelSetError as exc:
        report.level_sets = None
        for hid in HYPOTHESIS_IDS[2:]:
            entries.append(HypothesisEntry(hid, FAIL, {"error": str(exc)}))
        return report
    report.level_sets = la
    certified = la.planar and la.topology == "single_line"

    # h3a: H unbounded and a plane
    if la.planar:
        entries.append(HypothesisEntry("h3a", PASS, {"planar": True}))
    else:
        reaches = any("boundary" in c.end_kinds for c in la.components)
        entries.append(HypothesisEntry("h3a", EVIDENCE if reaches else FAIL,
                                       {"planar": False, "reaches_window_boundary": reaches}))

    # h3b: l is a single line
    det = {"topology": la.topology, "components": len(la.components), "notes": la.notes}
    if la.topology != "single_line":
        entries.append(HypothesisEntry("h3b", FAIL, det))
    else:
        entries.append(HypothesisEntry("h3b", PASS if certified else EVIDENCE, det))

    # h3c: s_i monotone along l
    if la.topology != "single_line":
        mono = all(s.monotone for s in la.segments)
        entries.append(HypothesisEntry("h3c", EVIDENCE if mono else FAIL,
                                       {"segments_monotone": mono}))
    elif la.monotone:
        entries.append(HypothesisEntry("h3c", PASS if certified else EVIDENCE, {"monotone": True}))
    else:
        entries.append(HypothesisEntry("h3c", FAIL, {"monotone": False}))

    # h3d: H transverse to every {s_i = c}, and l_c meets l once
    det = {"plane_transversal": la.plane_transversal, "singleton_lc": la.singleton_lc,
           "planes_checked": len(la.singleton_counts)}
    if la.plane_transversal and la.singleton_lc:
        status = PASS if certified and la.plane_transversal_certified else EVIDENCE
        entries.append(HypothesisEntry("h3d", status, det))
    else:
        entries.append(HypothesisEntry("h3d", FAIL, det))

    # h3e: one-sided tangency on fixed-point-free segments (sampled, unanimity)
    segs = [_h3e_segment(field_, la, s) for s in la.segments if len(s.points) >= 2]
    ok = bool(segs) and all(s["unanimous"] for s in segs)
    entries.append(HypothesisEntry("h3e", EVIDENCE if ok else FAIL, {"segments": segs}))

    # h3f: H minus l is exactly two half-planes H_plus / H_minus
    if la.crossing_regions is None:
        entries.append(HypothesisEntry("h3f", UNSUPPORTED, {"reason": "H is not planar"}))
    else:
        det = {"crossing_regions": la.crossing_regions}
        if la.two_half_planes:
            entries.append(HypothesisEntry("h3f", PASS if certified else EVIDENCE, det))
        else:
            entries.append(HypothesisEntry("h3f", FAIL, det))
    return report


# ---------------------------------------------------------------------------
# structure prediction


@dataclass
class TrappingRegion:
    """{sign * F_i >= 0} intersected with {s_i <= bound} (side -1) or {s_i >= bound} (side +1)."""

    i: int
    sign: int
    side: int
    bound: float

    def violation(self, field_: PolyVectorField, pts: np.ndarray) -> tuple[float, float]:
        """(largest coordinate excursion, largest wrong-sign F_i value) over ``pts``."""
        k = self.i - 1
        if len(pts) == 0:
            return 0.0, 0.0
        coord = float(np.max(self.side * (self.bound - pts[:, k])))
        fi = field_[k].evaluate(pts)
        band = 1e-9 * (1.0 + np.linalg.norm(pts, axis=1))
        wrong = float(np.max(-self.sign * fi - band))
        return coord, wrong

    def describe(self) -> str:
        rel = "<=" if self.side < 0 else ">="
        return f"{{{'+' if self.sign > 0 else '-'}F_{self.i} >= 0}} & {{s_{self.i} {rel} {self.bound:.17g}}}"

    def to_dict(self) -> dict:
        return {"i": self.i, "sign": self.sign, "side": self.side, "bound": self.bound,
                "description": self.describe()}


@dataclass
class StructurePrediction:
    i: int
    x1: Equilibrium
    x2: Equilibrium
    case1: str  # A | B, from the L2 sign on l_1
    case2: str  # from l_2 (mirrored argument)
    region1: TrappingRegion
    region2: TrappingRegion
    path: str  # generic | branched
    non_generic: bool = False
    l1: TangencySegment | None = field(repr=False, default=None)
    l2: TangencySegment | None = field(repr=False, default=None)
    equilibria: list[Equilibrium] = field(repr=False, default_factory=list)

    @property
    def case(self) -> str:
        return self.case1

    def to_dict(self) -> dict:
        return {"i": self.i, "x1": self.x1.location.tolist(), "x2": self.x2.location.tolist(),
                "x1_equals_x2": bool(np.array_equal(self.x1.location, self.x2.location)),
                "case": self.case1, "case_l2": self.case2,
                "trapping_gamma1": self.region1.to_dict(),
                "trapping_gamma2": self.region2.to_dict(),
                "path": self.path, "non_generic": self.non_generic}


def _unanimous_l2_sign(la: LevelSetAnalysis, seg: TangencySegment, name: str) -> int:
    vals = la.L2.evaluate(seg.interior_samples(H3E_SAMPLES))
    signs = set(np.sign(vals).astype(int).tolist())
    if len(signs) != 1 or 0 in signs:
        raise PredictionError(f"mixed or zero L2 signs on {name}: {sorted(signs)}")
    return signs.pop()


def _index_of(eqs: Sequence[Equilibrium], eq: Equilibrium) -> int:
    return next(k for k, e in enumerate(eqs) if np.array_equal(e.location, eq.location))


def _is_non_generic(field_: PolyVectorField, seg: TangencySegment) -> bool:
    """F parallel to l along the whole segment: l itself is a flow line."""
    pts = seg.points
    if len(pts) < 3:
        return False
    tang = np.gradient(pts, axis=0)
    tang /= np.maximum(np.linalg.norm(tang, axis=1, keepdims=True), 1e-300)
    f = field_.evaluate(pts)
    fn = np.maximum(np.linalg.norm(f, axis=1), 1e-300)
    cross = np.linalg.norm(np.cross(f, tang), axis=1) / fn
    inner = slice(1, -1)
    return bool(np.all(cross[inner] < NON_GENERIC_TOL))


def predict_structure(field_: PolyVectorField, i: int, report: HypothesisReport,
                      allow_branched: bool = True) -> StructurePrediction:
    """x1, x2, Case A/B and the trapping regions of Gamma_1, Gamma_2.

    x1 minimizes s_i over the equilibria, x2 maximizes it. l_1 is the piece of
    l running from x1 towards decreasing s_i, l_2 the piece from x2 towards
    increasing s_i. With sigma the (unanimous) sign of L2 on l_1, Gamma_1 is
    predicted in {sigma * F_i >= 0} & {s_i <= x1_i}; Case A is sigma = +1, Case B
    sigma = -1. Gamma_2 mirrors this on l_2.

    When only the topology of l fails (h3b/h3f) and ``allow_branched`` is set,
    the same rule is applied to the branches of l incident to x1 and x2
    (the branched path).
    """
    if report.verdict == PASS:
        path = "generic"
    elif allow_branched and report.branched_path_applicable:
        path = "branched"
    else:
        raise PredictionError(f"hypotheses fail: {', '.join(report.failed)}")
    la = report.level_sets
    eqs = la.equilibria
    if not eqs:
        raise PredictionError("no equilibria on the tangency curve")
    k = i - 1
    x1 = min(eqs, key=lambda e: e.location[k])
    x2 = max(eqs, key=lambda e: e.location[k])
    if len(eqs) > 1 and np.array_equal(x1.location, x2.location):
        raise PredictionError("x1 = x2 although several equilibria exist")
    i1, i2 = _index_of(eqs, x1), _index_of(eqs, x2)

    def incident(idx, lower):
        cands = []
        for s in la.segments:
            if not s.monotone:
                continue
            if lower and s.end_fixed_point == idx and s.start_fixed_point is None:
                cands.append(s)
            if not lower and s.start_fixed_point == idx and s.end_fixed_point is None:
                cands.append(s)
        if not cands:
            raise PredictionError(
                f"no monotone branch of l leaves the extremal equilibrium towards "
                f"{'decreasing' if lower else 'increasing'} s_{i}")
        # the longest branch reaches furthest towards infinity
        return max(cands, key=lambda s: s.arclength()[-1])

    l1 = incident(i1, True)
    l2 = incident(i2, False)
    s1 = _unanimous_l2_sign(la, l1, "l_1")
    s2 = _unanimous_l2_sign(la, l2, "l_2")
    non_generic = _is_non_generic(field_, l1) or _is_non_generic(field_, l2)
    r1 = TrappingRegion(i, s1, -1, float(x1.location[k]))
    r2 = TrappingRegion(i, s2, +1, float(x2.location[k]))
    return StructurePrediction(i, x1, x2, "A" if s1 > 0 else "B", "A" if s2 > 0 else "B",
                               r1, r2, path, non_generic, l1, l2, list(report.equilibria))


# ---------------------------------------------------------------------------
# verification


@dataclass
class BranchCheck:
    trace: ManifoldTrace = field(repr=False)
    escaped: bool
    sign: str
    coord_excursion: float
    sign_excursion: float

    @property
    def contained(self) -> bool:
        return self.coord_excursion <= CONTAINMENT_SLACK and self.sign_excursion <= 0.0

    @property
    def ok(self) -> bool:
        return self.escaped and self.sign in (CONSTANT_POSITIVE, CONSTANT_NEGATIVE) \
            and self.contained

    def to_dict(self) -> dict:
        return {"equilibrium": self.trace.equilibrium.location.tolist(),
                "branch": self.trace.branch, "status": self.trace.status,
                "exit_point": self.trace.exit_point.tolist(), "sign": self.sign,
                "coord_excursion": self.coord_excursion,
                "sign_excursion": self.sign_excursion,
                "contained": self.contained, "ok": self.ok}


@dataclass
class GammaVerification:
    name: str
    region: TrappingRegion
    checks: list[BranchCheck]
    selected: BranchCheck | None

    @property
    def verified(self) -> bool:
        return self.selected is not None

    def to_dict(self) -> dict:
        return {"name": self.name, "region": self.region.to_dict(), "verified": self.verified,
                "selected_branch": None if self.selected is None else self.selected.trace.branch,
                "branches": [c.to_dict() for c in self.checks]}


@dataclass
class VerificationReport:
    prediction: StructurePrediction
    gamma1: GammaVerification
    gamma2: GammaVerification
    graph: InvariantGraph | None
    transversality: list[TransversalityReport]
    traces: list[ManifoldTrace] = field(repr=False, default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return self.gamma1.verified and self.gamma2.verified

    @property
    def inconclusive(self) -> bool:
        return bool(self.traces) and all(t.status == BOUNDED_MAXTIME for t in self.traces)

    @property
    def unknot_certified(self) -> bool:
        return self.graph is not None and self.graph.classification == "unknot_certified"

    def to_dict(self) -> dict:
        return {"verified": self.verified, "inconclusive": self.inconclusive,
                "unknot_certified": self.unknot_certified,
                "path": self.prediction.path,
                "gamma1": self.gamma1.to_dict(), "gamma2": self.gamma2.to_dict(),
                "graph": None if self.graph is None else self.graph.to_dict(),
                "transversality": [t.to_dict() for t in self.transversality],
                "notes": list(self.notes)}


def _check_branch(field_, trace: ManifoldTrace, region: TrappingRegion) -> BranchCheck:
    rec = sign_invariance(trace, field_, region.i)
    coord, wrong = region.violation(field_, trace.outside_seed_ball())
    return BranchCheck(trace, trace.status == ESCAPED, rec.value, coord, wrong)


def _gamma(name, field_, traces, region, exclude=None) -> GammaVerification:
    checks = [_check_branch(field_, t, region) for t in traces]
    selected = next((c for c in checks if c.ok and c.trace is not exclude), None)
    return GammaVerification(name, region, checks, selected)


def verify_prediction(field_: PolyVectorField, prediction: StructurePrediction,
                      t_max: float = 200.0, eps: float | None = None) -> VerificationReport:
    """Trace the 1D manifolds of x1 and x2 and test the predicted escape and trapping.

    Gamma_1 (Gamma_2) is verified when some branch at x1 (x2) escapes, keeps a
    constant sign of F_i and stays in the predicted region within the
    containment slack. When x1 = x2 the two Gammas must be different branches.
    """
    eqs = prediction.equilibria or [prediction.x1, prediction.x2]
    notes: list[str] = []
    if prediction.non_generic:
        notes.append("l contains a flow-line arc: l_1 itself is the invariant manifold")
    same = np.array_equal(prediction.x1.location, prediction.x2.location)
    try:
        t1 = list(trace_1d_manifolds(field_, prediction.x1, eps, t_max, eqs))
        t2 = t1 if same else list(trace_1d_manifolds(field_, prediction.x2, eps, t_max, eqs))
    except ManifoldError as exc:
        raise PredictionError(f"manifold tracing failed: {exc}") from exc
    g1 = _gamma("gamma1", field_, t1, prediction.region1)
    g2 = _gamma("gamma2", field_, t2, prediction.region2,
                exclude=g1.selected.trace if (same and g1.selected) else None)
    traces = t1 if same else t1 + t2

    transv = []
    for x in ([prediction.x1] if same else [prediction.x1, prediction.x2]):
        try:
            transv.append(transversality_2d(field_, x, prediction.i))
        except ManifoldError as exc:
            notes.append(f"transversality not computed at {x.location.tolist()}: {exc}")

    graph = None
    if g1.verified and g2.verified:
        graph = assemble_invariant_graph(field_, traces,
                                         unknot=(prediction.i, g1.selected.trace,
                                                 g2.selected.trace))
    else:
        graph = assemble_invariant_graph(field_, traces)
        for g in (g1, g2):
            if not g.verified:
                notes.append(f"{g.name}: no branch escapes with constant F_{prediction.i} "
                             f"sign inside {g.region.describe()}")
    if all(t.status == BOUNDED_MAXTIME for t in traces):
        longest = max(traces, key=lambda t: len(t.trajectory))
        notes.append(f"inconclusive: every branch bounded at t_max (longest has "
                     f"{len(longest.trajectory)} nodes)")
    return VerificationReport(prediction, g1, g2, graph, transv, traces, notes)
