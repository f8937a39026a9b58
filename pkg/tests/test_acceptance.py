"""Acceptance suite: one PASS/FAIL line per criterion, each swept over the full parameter grid.

Run with ``pytest tests/test_acceptance.py -v -s`` or ``python tests/test_acceptance.py``.
A criterion lists every cell that misses it, with the reason, instead of
narrowing the grid.
"""

from __future__ import annotations

import contextlib
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cells import GRID, ball, cell_id, closure_for, report, rewrite_system  # noqa: E402
from cubicsplit.classify import generation_check, report_json, verify_all  # noqa: E402
from cubicsplit.cli import main as cli_main  # noqa: E402
from cubicsplit.groups import Family, FamilySpec, abelianization  # noqa: E402
from cubicsplit.planarity import is_planar, validate_witness, window_stability  # noqa: E402
from cubicsplit.separations import local_connectivity  # noqa: E402
from cubicsplit.splittings import classify, splitting_abelianization  # noqa: E402
from cubicsplit.templates import construct_V  # noqa: E402
from oracles import all_words, word_partition  # noqa: E402

WORD_LENGTH = 8
CORE_LEMMAS = ("L3.2", "L3.3", "L3.4", "C3.5", "L3.6", "C3.7")


@dataclass
class Outcome:
    number: int
    title: str
    checked: int = 0
    misses: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.checked > 0 and not self.misses

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        text = f"{verdict} criterion {self.number}: {self.title} ({self.checked - len(self.misses)}/{self.checked} checks)"
        if self.misses:
            shown = "; ".join(self.misses[:12])
            more = f"; ... {len(self.misses) - 12} more" if len(self.misses) > 12 else ""
            text += f" misses: {shown}{more}"
        return text

    def record(self, ok: bool, miss: str) -> None:
        self.checked += 1
        if not ok:
            self.misses.append(miss)


def grid_cells(*families: str):
    for family, n, m in GRID:
        if not families or family in families:
            yield family, n, m


def stage_reason(r: dict, stage: str) -> str:
    entry = r[stage]
    if entry["status"] == "skipped":
        return f"{stage} skipped: {entry['reason']}"
    return entry.get("reason", f"{stage} {entry['status']}")


# -- criteria ----------------------------------------------------------------


def criterion_1() -> Outcome:
    out = Outcome(1, f"relators reduce to the identity and normal forms match the closure oracle on words of length <= {WORD_LENGTH}")
    for family, n, m in grid_cells():
        spec = FamilySpec(family, n, m)
        rs = rewrite_system(family, n, m)
        name = cell_id(family, n, m)
        out.record(all(rs.nf(r) == "" for r in spec.relators()), f"{name} relator survives")
        words = all_words(spec.alphabet, WORD_LENGTH)
        closure = closure_for(spec)
        same = word_partition({w: rs.nf(w) for w in words}) == word_partition({w: closure.trace(w) for w in words})
        out.record(same, f"{name} partition differs")
    return out


def criterion_2() -> Outcome:
    out = Outcome(2, "local connectivity is 2 at radius 10, margin 3")
    for family, n, m in grid_cells():
        value = local_connectivity(ball(family, n, m, radius=10), 3)
        out.record(value == 2, f"{cell_id(family, n, m)} gives {value}")
    return out


def criterion_3() -> Outcome:
    out = Outcome(3, "nested orbits are Type I for P1-P4 and Type II for P5-P7, no Type III selected")
    for family, n, m in grid_cells():
        r = report(family, n, m)
        expected = "TypeI" if family in ("P1", "P2", "P3", "P4") else "TypeII"
        name = cell_id(family, n, m)
        if r["orbit"]["status"] in ("skipped", "error"):
            out.record(False, f"{name} {stage_reason(r, 'orbit')}")
            continue
        ok = r["orbit"]["type"] == expected and not r["orbit"]["type_iii_selected"]
        out.record(ok, f"{name} selected {r['orbit']['type']}")
    return out


def criterion_4() -> Outcome:
    out = Outcome(4, "adhesion, part and stabilizer checks pass on every cell")
    for family, n, m in grid_cells():
        r = report(family, n, m)
        name = cell_id(family, n, m)
        if r["lemmas"]["status"] in ("skipped", "error"):
            out.record(False, f"{name} {stage_reason(r, 'lemmas')}")
            continue
        failing = [k for k in CORE_LEMMAS if r["lemmas"][k]["status"] != "pass"]
        out.record(not failing and r["axioms"]["passed"], f"{name} fails {','.join(failing) or 'axioms'}")
    return out


def criterion_5() -> Outcome:
    out = Outcome(5, "part shapes, torsos and windowed torsos match their templates")
    for family, n, m in grid_cells():
        r = report(family, n, m)
        name = cell_id(family, n, m)
        if r["structure"]["status"] in ("skipped", "error"):
            out.record(False, f"{name} {stage_reason(r, 'structure')}")
            continue
        failing = [k for k, v in r["structure"]["orbits"].items() if v["status"] != "pass"]
        out.record(not failing, f"{name} mismatch in {','.join(failing)}")
    return out


def expected_stabilizer_sizes(spec: FamilySpec) -> dict[str, int]:
    n, m = spec.n, spec.m or 0
    return {
        Family.P1: {"O1": n},
        Family.P2: {"O1": 2 * n},
        Family.P3: {"O1": 2 * n, "O2": 2 * m},
        Family.P5: {"O1": 2 * n, "O2": 2 * m},
        Family.P6: {"O1": 4 * n, "O2": 2 * m},
        Family.P7: {"O2": 2 * m},
    }[spec.family]


def criterion_6() -> Outcome:
    out = Outcome(6, "part stabilizers equal the predicted subgroups within the ball")
    for family, n, m in grid_cells("P1", "P2", "P3", "P5", "P6", "P7"):
        r = report(family, n, m)
        name = cell_id(family, n, m)
        if r["stabilizers"]["status"] in ("skipped", "error"):
            out.record(False, f"{name} {stage_reason(r, 'stabilizers')}")
            continue
        parts = r["stabilizers"]["parts"]
        sizes = expected_stabilizer_sizes(FamilySpec(family, n, m))
        bad = [label for label, entry in parts.items() if not entry["match"]]
        bad += [f"{label} size {parts[label]['size']}" for label, size in sizes.items() if label not in parts or parts[label]["size"] != size]
        out.record(not bad, f"{name} {','.join(bad)}")
    return out


def criterion_7() -> Outcome:
    out = Outcome(7, "planarity verdicts, witnesses and window stability")
    out.record(is_planar(construct_V(4)).planar, "V(4) judged non-planar")
    for size in (6, 8):
        verdict = is_planar(construct_V(size))
        ok = not verdict.planar and verdict.witness is not None and validate_witness(construct_V(size), verdict.witness)
        out.record(ok, f"V({size}) lacks a valid witness")
    for family, n, m in grid_cells("P5", "P6", "P7"):
        name = cell_id(family, n, m)
        expected = n == 2 if family == "P5" else n == 1
        r = report(family, n, m)
        if r["planarity"]["status"] in ("skipped", "error"):
            out.record(False, f"{name} {stage_reason(r, 'planarity')}")
            continue
        out.record(r["planarity"]["graph_planar"] is expected and r["planarity"]["consistent"], f"{name} judged planar={r['planarity']['graph_planar']}")
        if family == "P7":
            stability = window_stability(n)
            out.record(stability["stable"] and stability["planar"] is expected, f"{name} window verdict {stability['windows']}")
    return out


def criterion_8() -> Outcome:
    out = Outcome(8, "claimed splittings match abelianization and generation; P4 recorded as a discrepancy")
    for family, n, m in grid_cells("P1", "P2", "P3", "P5", "P6", "P7"):
        spec = FamilySpec(family, n, m)
        claim = classify(spec)
        name = cell_id(family, n, m)
        out.record(abelianization(spec) == splitting_abelianization(claim), f"{name} invariants differ")
        verdict = generation_check(spec, claim, 10, ball=ball(family, n, m, radius=10)).verdict
        out.record(verdict == "generates", f"{name} generation {verdict}")
    r = report("P4", 2)
    out.record(r["abelianization"]["match"] is False, "P4-n2 abelianization matched")
    out.record(r["generation"]["verdict"] == "fails-to-generate", "P4-n2 generation verdict")
    out.record({"abelianization", "generation"} <= set(r["claim_discrepancy"]), "P4-n2 discrepancy not recorded")
    with contextlib.redirect_stdout(io.StringIO()):
        code = cli_main(["verify", "--family", "P4", "--n", "2"])
    out.record(code == 0, f"P4-n2 exit code {code}")
    return out


def criterion_9() -> Outcome:
    out = Outcome(9, "verify_all reports are byte-identical across runs")
    for family, n, m in grid_cells():
        again = report_json(verify_all(FamilySpec(family, n, m)))
        out.record(again == report_json(report(family, n, m)), f"{cell_id(family, n, m)} differs")
    return out


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9)


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion, capsys):
    outcome = criterion()
    with capsys.disabled():
        print(f"\n{outcome.line()}")
    assert outcome.passed, outcome.line()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    for outcome in results:
        print(outcome.line())
    sys.exit(0 if all(o.passed for o in results) else 1)
