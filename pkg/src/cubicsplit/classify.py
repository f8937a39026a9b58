"""End-to-end verification of one family cell, assembled into a JSON report."""

from __future__ import annotations

import json
import time
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable

from .cayley import BallTooLarge, CayleyBall, build_ball
from .graphs import DepthGraph
from .groups import (
    DEFAULT_RULE_CAP,
    CompletionOverflow,
    Family,
    FamilySpec,
    abelianization,
    shortlex_key,
)
from .planarity import torso_planarity_report
from .separations import SepType, as_graph, extract_nested_orbit, local_connectivity
from .splittings import SplittingClaim, classify, splitting_abelianization
from .templates import construct_R, construct_V, cycle_template, find_isomorphism
from .treedec import (
    PartialPart,
    TreeDecomposition,
    build_treedec,
    orbit_labels,
    part_structure,
    stabilizer_elements,
    structural_checks,
    torso,
    transplant_orbit,
    verify_axioms,
    windowed_torso,
)

DEFAULT_RADIUS = 10
DEFAULT_MARGIN = 3
DEFAULT_LENGTH_CAP = 16
# margins tried in turn when the requested one leaves boundary cut pairs
MAX_MARGIN = 5
# extra radius allowed for the windowed double-ray torsos
WINDOW_RADIUS_STEPS = (2, 4)

PASS, FAIL, SKIPPED, DISCREPANCY = "pass", "fail", "skipped", "claim-discrepancy"

__all__ = [
    "DEFAULT_LENGTH_CAP",
    "DEFAULT_MARGIN",
    "DEFAULT_RADIUS",
    "GenerationResult",
    "classify",
    "expected_offsets",
    "generation_check",
    "preferred_type",
    "report_json",
    "verify_all",
]


def expected_offsets(spec: FamilySpec) -> tuple[str, ...]:
    """The adhesion offset ``x^-1 y`` each family's splitting is built on."""
    n = spec.n
    return {
        Family.P5: ("a" * n,),
        Family.P6: ("bc" * n,),
        Family.P7: ("bc" * n + "b",),
    }.get(spec.family, ("b",))


def preferred_type(spec: FamilySpec) -> SepType:
    if spec.family in (Family.P1, Family.P2, Family.P3, Family.P4):
        return SepType.TYPE_I
    return SepType.TYPE_II


# -- generation --------------------------------------------------------------


@dataclass(frozen=True)
class GenerationResult:
    verdict: str  # "generates", "fails-to-generate" or "inconclusive"
    covered: float
    target: int
    reached: int
    rounds: int
    missing: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "covered": round(self.covered, 6),
            "target": self.target,
            "reached": self.reached,
            "rounds": self.rounds,
            "missing_sample": list(self.missing),
        }


def generation_check(
    spec: FamilySpec,
    claim: SplittingClaim,
    radius: int,
    length_cap: int = DEFAULT_LENGTH_CAP,
    ball: CayleyBall | None = None,
) -> GenerationResult:
    """Whether products of the claim's factor generators cover ``ball(radius - 2)``.

    Products are built breadth first, one factor word at a time, and kept
    only while they stay inside ``ball(radius)``.  The closure saturating
    before ``length_cap`` rounds without covering the target gives
    ``fails-to-generate``; running out of rounds gives ``inconclusive``.
    """
    if radius < 6:
        raise ValueError(f"generation check needs radius >= 6, got {radius}")
    if ball is None or ball.radius < radius:
        ball = build_ball(spec, radius, ball.rs if ball is not None else None)
    rs = ball.rs
    dist = {v: ball.radius - d for v, d in ball.depth.items()}
    region = {v for v, d in dist.items() if d <= radius}
    target = {v for v, d in dist.items() if d <= radius - 2}
    gens = sorted({rs.nf(w) for w in claim.generator_words} | {rs.invert(w) for w in claim.generator_words})
    seen = {""}
    frontier = deque([""])
    rounds = 0
    while frontier and rounds < length_cap:
        rounds += 1
        nxt: deque[str] = deque()
        for h in frontier:
            for g in gens:
                k = rs.nf(h + g)
                if k in region and k not in seen:
                    seen.add(k)
                    nxt.append(k)
        frontier = nxt
    reached = seen & target
    covered = len(reached) / len(target)
    missing = tuple(sorted(target - seen, key=shortlex_key)[:5])
    if reached == target:
        verdict = "generates"
    elif not frontier:
        verdict = "fails-to-generate"
    else:
        verdict = "inconclusive"
    return GenerationResult(verdict, covered, len(target), len(reached), rounds, missing)


# -- report helpers ----------------------------------------------------------


def _jsonable(value: Any) -> Any:
    if hasattr(value, "as_dict"):
        return _jsonable(value.as_dict())
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (set, frozenset)):
        return [_jsonable(v) for v in sorted(value, key=repr)]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def report_json(report: dict) -> str:
    """Canonical serialization; identical inputs give identical bytes."""
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


class _StageFailed(Exception):
    """A stage that finished with a failing verdict that later stages cannot build on."""

    def __init__(self, payload: dict) -> None:
        super().__init__(payload.get("reason", "stage failed"))
        self.payload = payload


@dataclass
class _Pipeline:
    report: dict
    failed_stage: str | None = None

    def run(self, name: str, fn: Callable[[], dict]) -> dict | None:
        if self.failed_stage is not None:
            self.report[name] = {"status": SKIPPED, "reason": f"stage {self.failed_stage!r} did not complete"}
            return None
        try:
            out = fn()
        except _StageFailed as exc:
            self.failed_stage = name
            self.report[name] = exc.payload
            return None
        except (CompletionOverflow, BallTooLarge) as exc:
            self.failed_stage = name
            self.report[name] = {"status": "error", "error": type(exc).__name__, "resource_cap": True, "reason": str(exc)}
            return None
        except Exception as exc:  # recorded, later stages skipped
            self.failed_stage = name
            self.report[name] = {"status": "error", "error": type(exc).__name__, "reason": str(exc)}
            return None
        self.report[name] = out
        return out


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


# -- expectations ------------------------------------------------------------


def _cycle_check(graph: DepthGraph, td: TreeDecomposition, parts: list[int], length: int, period: tuple[str, ...] | None) -> dict:
    bad = []
    for t in parts:
        shape = part_structure(td, graph, t)
        ok = shape.kind == "Cycle" and shape.size == length
        ok = ok and find_isomorphism(_induced_adjacency(graph, td.parts[t]), cycle_template(length).adjacency) is not None
        if period is not None:
            ok = ok and shape.label_period == period
        if not ok:
            bad.append({"part": t, **shape.as_dict()})
    return {"expected": f"Cycle({length})", "label_period": "".join(period or ()), "parts": len(parts), "failures": bad[:3], "status": _status(not bad)}


def _induced_adjacency(graph: DepthGraph, vertices: frozenset[int]) -> dict[int, set[int]]:
    return {v: {w for w in graph.nbrs[v] if w in vertices} for v in vertices}


def _matching_check(graph: DepthGraph, td: TreeDecomposition, parts: list[int], label: str, edges: int) -> dict:
    bad = []
    for t in parts:
        shape = part_structure(td, graph, t)
        if shape.kind != "Matching" or shape.labels != (label,) or shape.size != edges:
            bad.append({"part": t, **shape.as_dict()})
    return {"expected": f"Matching({edges}, {label})", "parts": len(parts), "failures": bad[:3], "status": _status(not bad)}


def _torso_check(graph: DepthGraph, td: TreeDecomposition, parts: list[int], size: int) -> dict:
    template = construct_V(size)
    bad = [t for t in parts if find_isomorphism(torso(td, graph, t).adjacency, template.adjacency) is None]
    return {"expected": template.name, "parts": len(parts), "failures": bad[:3], "status": _status(not bad)}


def _minimal_rotation(word: str) -> tuple[str, ...]:
    return min(tuple(word[i:] + word[:i]) for i in range(len(word)))


def _window_check(spec: FamilySpec, ball: CayleyBall, td: TreeDecomposition, orbit) -> dict:
    """Windowed torsos of the double-ray parts against truncated R templates."""
    n = spec.n
    window = 2 * n + 2
    template = construct_R(n, window)
    attempts = []
    current_ball, current_td = ball, td
    for extra in (0, *WINDOW_RADIUS_STEPS):
        if extra:
            current_ball = build_ball(spec, ball.radius + extra, ball.rs)
            graph = as_graph(current_ball)
            current_td = build_treedec(graph, transplant_orbit(orbit, graph))
        part = current_td.part_containing("", "b")
        try:
            wt = windowed_torso(current_td, part, "", window)
        except PartialPart as exc:
            attempts.append({"radius": current_ball.radius, "outcome": str(exc)})
            continue
        ok = find_isomorphism(wt.adjacency, template.adjacency) is not None
        return {
            "expected": template.name,
            "window": window,
            "radius": current_ball.radius,
            "attempts": attempts,
            "status": _status(ok),
        }
    return {"expected": template.name, "window": window, "attempts": attempts, "status": FAIL, "reason": "window never fits inside the ball"}


def _structure(spec: FamilySpec, ball: CayleyBall, td: TreeDecomposition, orbit) -> dict:
    graph = td.graph
    labels = orbit_labels(td)
    by_orbit: dict[str, list[int]] = {}
    for t in td.complete_parts():
        by_orbit.setdefault(labels[t], []).append(t)
    o1, o2 = by_orbit.get("O1", []), by_orbit.get("O2", [])
    n, m, f = spec.n, spec.m, spec.family
    checks: dict[str, dict] = {}
    if f is Family.P1:
        checks["O1"] = _cycle_check(graph, td, o1, 2 * n, None)
    elif f is Family.P2:
        checks["O1"] = _cycle_check(graph, td, o1, 4 * n, None)
    elif f is Family.P3:
        checks["O1"] = _cycle_check(graph, td, o1, 2 * n, None)
        checks["O2"] = _cycle_check(graph, td, o2, 2 * m, None)
    elif f is Family.P4:
        checks["O1"] = _cycle_check(graph, td, o1, 4 * n, _minimal_rotation("bcba"))
    elif f is Family.P5:
        checks["O1"] = _cycle_check(graph, td, o1, 2 * n, ("a",))
        checks["O1_torso"] = _torso_check(graph, td, o1, 2 * n)
        checks["O2"] = _matching_check(graph, td, o2, "b", m)
    elif f is Family.P6:
        checks["O1"] = _cycle_check(graph, td, o1, 4 * n, _minimal_rotation("bc"))
        checks["O1_torso"] = _torso_check(graph, td, o1, 4 * n)
        checks["O2"] = _matching_check(graph, td, o2, "a", m)
    else:
        checks["O1_window"] = _window_check(spec, ball, td, orbit)
        checks["O2"] = _matching_check(graph, td, o2, "a", m)
    for name, check in checks.items():
        if check.get("parts") == 0:
            check["status"] = FAIL
            check["reason"] = "no complete part in this orbit"
    ok = all(c["status"] == PASS for c in checks.values())
    return {"status": _status(ok), "orbits": checks}


def _stabilizers(spec: FamilySpec, td: TreeDecomposition, claim: SplittingClaim) -> dict:
    graph = td.graph
    labels = orbit_labels(td)
    out = {}
    for t in td.parts_of(graph.index[""]):
        comparison = stabilizer_elements(td, graph, None, t)
        entry = comparison.as_dict()
        entry["computed"] = entry["computed"][:40]
        entry["predicted"] = entry["predicted"][:40]
        entry["predicted_size"] = len(comparison.predicted)
        out[labels[t]] = entry
    ok = all(e["match"] for e in out.values())
    status = PASS if ok else (DISCREPANCY if claim.under_test else FAIL)
    return {"status": status, "parts": out}


def _expected_planar(spec: FamilySpec) -> bool:
    if spec.family is Family.P5:
        return spec.n == 2
    if spec.family in (Family.P6, Family.P7):
        return spec.n == 1
    return True


# -- pipeline ----------------------------------------------------------------


def verify_all(
    spec: FamilySpec,
    radius: int = DEFAULT_RADIUS,
    margin: int = DEFAULT_MARGIN,
    rule_cap: int = DEFAULT_RULE_CAP,
    length_cap: int = DEFAULT_LENGTH_CAP,
    timings: bool = False,
) -> dict:
    """Run every stage on one family cell and collect the verdicts.

    The report is deterministic in its inputs unless ``timings`` adds
    wall-clock durations.  A stage that raises or fails records the reason
    and every later stage is marked skipped.
    """
    claim = classify(spec)
    report: dict = {
        "family": spec.family.value,
        "parameters": {"n": spec.n, "m": spec.m},
        "presentation": spec.presentation(),
        "claim": claim.as_dict(),
        "runtime": {"radius": radius, "margin": margin, "rule_cap": rule_cap, "length_cap": length_cap},
    }
    pipe = _Pipeline(report)
    state: dict = {}
    clock: dict[str, float] = {}

    def timed(name: str, fn: Callable[[], dict]) -> dict | None:
        start = time.perf_counter()
        out = pipe.run(name, fn)
        clock[name] = round(time.perf_counter() - start, 3)
        return out

    def stage_ball() -> dict:
        ball = build_ball(spec, radius, rule_cap=rule_cap)
        state["ball"] = ball
        state["graph"] = as_graph(ball)
        return {"status": PASS, "vertices": len(ball.vertices), "edges": len(ball.edges), "rules": len(ball.rs.rules)}

    def stage_connectivity() -> dict:
        by_margin = {}
        used = None
        for k in range(margin, max(margin, MAX_MARGIN) + 1):
            if k > radius:
                break
            by_margin[k] = local_connectivity(state["graph"], k)
            if by_margin[k] == 2:
                used = k
                break
        out = {
            "requested_margin": margin,
            "value": by_margin.get(margin),
            "by_margin": by_margin,
            "margin_used": used,
            "status": _status(used is not None),
        }
        if used is None:
            out["reason"] = "no margin up to the limit isolates connectivity 2; the radius is too small for this cell"
            raise _StageFailed(out)
        state["margin"] = used
        return out

    def stage_orbit() -> dict:
        orbit = extract_nested_orbit(
            state["graph"], margin=state["margin"], prefer=preferred_type(spec), offsets=expected_offsets(spec)
        )
        state["orbit"] = orbit
        kind = orbit.kind.tag
        ok = kind is preferred_type(spec) and kind is not SepType.TYPE_III
        return {
            "status": _status(ok),
            "type": kind.value,
            "expected_type": preferred_type(spec).value,
            "seed": list(orbit.seed.pair),
            "offset": orbit.offset,
            "translates": len(orbit.translates),
            "rejected_before_seed": len(orbit.rejected),
            "type_iii_selected": kind is SepType.TYPE_III,
        }

    def stage_treedec() -> dict:
        td = build_treedec(state["graph"], state["orbit"])
        state["td"] = td
        return {
            "status": PASS,
            "parts": len(td.parts),
            "complete_parts": len(td.complete_parts()),
            "partial_parts": len(td.partial),
            "adhesions": len(td.adhesions),
        }

    def stage_lemmas() -> dict:
        td = state["td"]
        axioms = verify_axioms(td)
        lemmas = structural_checks(td)
        ok = axioms["passed"] and all(r.status != FAIL for r in lemmas.values())
        report["axioms"] = {k: v for k, v in axioms.items()}
        return {"status": _status(ok), **{k: v.as_dict() for k, v in lemmas.items()}}

    def stage_structure() -> dict:
        return _structure(spec, state["ball"], state["td"], state["orbit"])

    def stage_stabilizers() -> dict:
        return _stabilizers(spec, state["td"], claim)

    def stage_abelianization() -> dict:
        pres, split = abelianization(spec), splitting_abelianization(claim)
        match = pres == split
        status = PASS if match else (DISCREPANCY if claim.under_test else FAIL)
        return {"status": status, "presentation": pres.as_dict(), "splitting": split.as_dict(), "match": match}

    def stage_generation() -> dict:
        result = generation_check(spec, claim, radius, length_cap, ball=state["ball"])
        ok = result.verdict == "generates"
        status = PASS if ok else (DISCREPANCY if claim.under_test else FAIL)
        return {"status": status, **result.as_dict()}

    def stage_planarity() -> dict:
        out = torso_planarity_report(state["td"])
        expected = _expected_planar(spec)
        ok = out["consistent"] and out["graph_planar"] == expected
        return {"status": _status(ok), "expected_planar": expected, **out}

    timed("ball", stage_ball)
    timed("connectivity", stage_connectivity)
    timed("orbit", stage_orbit)
    timed("treedec", stage_treedec)
    timed("lemmas", stage_lemmas)
    timed("structure", stage_structure)
    timed("stabilizers", stage_stabilizers)
    timed("abelianization", stage_abelianization)
    timed("generation", stage_generation)
    timed("planarity", stage_planarity)
    if "axioms" not in report:
        report["axioms"] = {"status": SKIPPED}

    stages = ("ball", "connectivity", "orbit", "treedec", "lemmas", "structure", "stabilizers", "abelianization", "generation", "planarity")
    statuses = {s: report[s]["status"] for s in stages}
    report["claim_discrepancy"] = sorted(s for s, v in statuses.items() if v == DISCREPANCY)
    if any(v == "error" for v in statuses.values()):
        overall = "error"
    elif any(v in (FAIL, SKIPPED) for v in statuses.values()):
        overall = FAIL
    else:
        overall = PASS
    report["status"] = overall
    report["resource_cap"] = any(report[s].get("resource_cap") for s in stages)
    if timings:
        report["runtime"]["seconds"] = clock
    return report
