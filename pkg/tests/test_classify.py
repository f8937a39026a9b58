"""Claims, the generation check and the end-to-end report."""

from __future__ import annotations

import json

import pytest

from cells import report
from cubicsplit.classify import generation_check, report_json, verify_all
from cubicsplit.groups import FamilySpec, exponent_sums
from cubicsplit.splittings import Shape, classify
from cubicsplit.treedec import LEMMA_KEYS

STAGES = ("ball", "connectivity", "orbit", "treedec", "lemmas", "structure", "stabilizers", "abelianization", "generation", "planarity")


def gf2_rank(rows: list[list[int]]) -> int:
    basis: list[int] = []
    for row in rows:
        bits = sum((x % 2) << i for i, x in enumerate(row))
        for b in basis:
            bits = min(bits, bits ^ b)
        if bits:
            basis.append(bits)
    return len(basis)


def mod2_image_is_proper(spec: FamilySpec) -> bool:
    """Whether the factor words miss part of the mod-2 abelian image of the group.

    Independent of rewriting: the image of ``<factor words>`` in
    ``Z_2^k / <relators>`` is proper exactly when adding the factor words to
    the relator rows spans less than all of ``Z_2^k``.
    """
    gens = sorted(set(spec.alphabet.lower()))
    relators = [exponent_sums(r, gens) for r in spec.relators()]
    factors = [exponent_sums(w, gens) for w in classify(spec).generator_words]
    return gf2_rank(relators + factors) < len(gens)


# -- claims ------------------------------------------------------------------


def test_claim_examples():
    assert classify(FamilySpec("P1", 5)).label == "Z_5 * Z_2"
    assert classify(FamilySpec("P5", 2, 3)).label == "Z_4 *_Z_2 D_6"
    p7 = classify(FamilySpec("P7", 1, 2))
    assert p7.label == "D_inf *_Z_2 D_4"
    assert p7.shape is Shape.AMALGAM_INFINITE_DIHEDRAL
    assert classify(FamilySpec("P4", 2)).under_test
    assert not classify(FamilySpec("P3", 2, 2)).under_test


# -- generation --------------------------------------------------------------


def test_generation_examples():
    p1 = FamilySpec("P1", 3)
    assert generation_check(p1, classify(p1), 8).verdict == "generates"
    p3 = FamilySpec("P3", 2, 2)
    result = generation_check(p3, classify(p3), 8)
    assert result.verdict == "generates" and result.covered == 1.0


def test_p4_claim_fails_to_generate():
    spec = FamilySpec("P4", 2)
    result = generation_check(spec, classify(spec), 8)
    assert result.verdict == "fails-to-generate"
    assert "c" in result.missing
    assert mod2_image_is_proper(spec)


@pytest.mark.parametrize("cell", [("P1", 3, None), ("P3", 2, 3), ("P5", 2, 2), ("P6", 1, 2), ("P7", 1, 2)], ids=str)
def test_mod2_oracle_is_full_where_generation_succeeds(cell):
    spec = FamilySpec(*cell)
    assert not mod2_image_is_proper(spec)
    assert generation_check(spec, classify(spec), 8).verdict == "generates"


def test_generation_check_needs_room():
    spec = FamilySpec("P1", 3)
    with pytest.raises(ValueError):
        generation_check(spec, classify(spec), 5)


def test_short_length_cap_is_inconclusive():
    spec = FamilySpec("P5", 2, 2)
    assert generation_check(spec, classify(spec), 8, length_cap=1).verdict == "inconclusive"


# -- verify_all --------------------------------------------------------------


def test_passing_report_layout():
    r = report("P1", 3)
    assert r["status"] == "pass"
    assert r["claim_discrepancy"] == []
    assert r["resource_cap"] is False
    assert r["family"] == "P1" and r["parameters"] == {"n": 3, "m": None}
    assert all(r[s]["status"] == "pass" for s in STAGES)
    assert set(LEMMA_KEYS) <= set(r["lemmas"])
    assert r["axioms"]["passed"]
    assert "seconds" not in r["runtime"]


def test_p4_discrepancy_is_recorded_not_failed():
    r = report("P4", 2)
    assert r["status"] == "pass"
    assert r["claim_discrepancy"] == ["abelianization", "generation", "stabilizers"]
    assert r["abelianization"]["match"] is False
    assert r["abelianization"]["presentation"]["torsion"] == [2, 2, 2]
    assert r["abelianization"]["splitting"]["torsion"] == [2, 2]
    assert r["generation"]["verdict"] == "fails-to-generate"


def test_report_is_byte_identical_across_runs():
    spec = FamilySpec("P5", 2, 3)
    assert report_json(verify_all(spec)) == report_json(verify_all(spec))


def test_report_json_is_canonical():
    text = report_json(report("P3", 2, 2))
    assert text.endswith("\n")
    assert json.dumps(json.loads(text), sort_keys=True, indent=2) + "\n" == text


def test_timings_are_opt_in():
    r = verify_all(FamilySpec("P1", 2), timings=True)
    assert set(r["runtime"]["seconds"]) == set(STAGES)


def test_failed_stage_skips_the_rest():
    r = verify_all(FamilySpec("P1", 3), radius=5, margin=3)
    assert r["ball"]["status"] == "pass"
    assert r["connectivity"]["status"] == "error"
    assert r["connectivity"]["error"] == "BallTooSmall"
    assert all(r[s]["status"] == "skipped" for s in STAGES[2:])
    assert r["status"] == "error"


def test_resource_cap_is_flagged():
    r = verify_all(FamilySpec("P5", 3, 3), rule_cap=1)
    assert r["ball"]["status"] == "error"
    assert r["resource_cap"] is True


def test_beyond_scale_cell_fails_with_a_reason():
    r = report("P2", 4)
    assert r["status"] == "fail"
    assert r["connectivity"]["by_margin"] == {3: 1, 4: 1, 5: 1}
    assert "radius" in r["connectivity"]["reason"]


@pytest.mark.parametrize("cell", [("P1", 3, None), ("P3", 2, 2), ("P5", 2, 2), ("P6", 1, 3)], ids=str)
def test_verdicts_stable_when_radius_grows(cell):
    spec = FamilySpec(*cell)
    small = verify_all(spec, radius=8)
    large = report(*cell)
    assert small["status"] == large["status"] == "pass"
    assert small["orbit"]["type"] == large["orbit"]["type"]
    assert small["planarity"]["graph_planar"] == large["planarity"]["graph_planar"]
