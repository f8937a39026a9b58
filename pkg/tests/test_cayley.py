"""Cayley balls: construction, growth, exports and symmetry probes."""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET

import pytest

from cells import SAMPLE_CELLS, ball, closure_for, rewrite_system
from cubicsplit.cayley import BallTooLarge, UnknownFormat, build_ball, export, growth_sequence, parse_ball, to_json
from cubicsplit.groups import FamilySpec
from oracles import CosetClosure, all_words


def test_small_balls():
    # vertex ids are normal forms, which need not be the shortest spelling
    rs = rewrite_system("P1", 3)
    assert set(build_ball(FamilySpec("P1", 3), 1, rs).vertices) == {rs.nf(w) for w in ("", "a", "A", "b")}
    assert len(build_ball(FamilySpec("P1", 3), 2).vertices) == 10
    assert set(build_ball(FamilySpec("P3", 2, 2), 1).vertices) == {"", "a", "b", "c"}


def test_growth_sequences():
    assert growth_sequence(FamilySpec("P1", 3), 2) == [1, 3, 6]
    for cell in SAMPLE_CELLS:
        assert growth_sequence(FamilySpec(*cell), 0) == [1]


def closure_spheres(closure: CosetClosure, alphabet: str, radius: int) -> list[int]:
    first_seen: dict[int, int] = {}
    for word in all_words(alphabet, radius):
        first_seen.setdefault(closure.trace(word), len(word))
    sizes = [0] * (radius + 1)
    for length in first_seen.values():
        sizes[length] += 1
    return sizes


@pytest.mark.parametrize("cell", [("P5", 2, 2), ("P2", 2, None), ("P7", 1, 2)], ids=str)
def test_growth_matches_closure_oracle(cell):
    spec = FamilySpec(*cell)
    assert growth_sequence(spec, 5) == closure_spheres(closure_for(spec), spec.alphabet, 5)


@pytest.mark.parametrize("cell", SAMPLE_CELLS, ids=lambda c: "-".join(map(str, c)))
def test_interior_is_cubic(cell):
    b = ball(*cell, radius=6)
    assert all(b.degree(v) == 3 for v in b.interior(1))
    assert all(b.degree(v) <= 3 for v in b.vertices)


@pytest.mark.parametrize("cell", SAMPLE_CELLS, ids=lambda c: "-".join(map(str, c)))
def test_left_translation_preserves_edges(cell):
    b = ball(*cell, radius=6)
    adjacency = b.adjacency()
    for g in FamilySpec(*cell).generators:
        for u in b.interior(2):
            for v in adjacency[u]:
                gu, gv = b.translate(g, u), b.translate(g, v)
                if gu in b and gv in b:
                    assert b.has_edge(gu, gv)


def test_vertex_transitive_degree_profile():
    # every interior vertex sees the same number of vertices within distance two
    b = ball("P5", 2, 2, radius=6)
    adjacency = b.adjacency()
    counts = set()
    for v in b.interior(3):
        near = set(adjacency[v]) | {w for u in adjacency[v] for w in adjacency[u]}
        counts.add(len(near - {v}))
    assert len(counts) == 1


@pytest.mark.parametrize("cell", SAMPLE_CELLS, ids=lambda c: "-".join(map(str, c)))
def test_json_round_trip(cell):
    b = ball(*cell, radius=4)
    again = parse_ball(export(b, "json"), b.rs)
    assert again == b
    assert again.edges == b.edges
    assert again.steps == b.steps
    assert export(again, "json") == export(b, "json")


def test_dot_export_counts():
    b = build_ball(FamilySpec("P1", 3), 1)
    text = export(b, "dot").decode()
    lines = text.splitlines()
    assert lines[0].startswith("graph ") and lines[-1] == "}"
    assert sum("[depth=" in line for line in lines) == 4
    # a-edges to a and to A, plus the b-edge; the inverse of an a-edge is the same edge
    assert sum(" -- " in line for line in lines) == 3
    assert sum("dir=forward" in line for line in lines) == 2


def test_graphml_export_parses():
    b = build_ball(FamilySpec("P5", 2, 2), 3)
    root = ET.fromstring(export(b, "graphml"))
    ns = {"g": "http://graphml.graphdrawing.org/xmlns"}
    graph = root.find("g:graph", ns)
    assert graph is not None and graph.get("edgedefault") == "directed"
    nodes = graph.findall("g:node", ns)
    edges = graph.findall("g:edge", ns)
    assert len(nodes) == len(b.vertices)
    assert len(edges) == len(b.edges)
    ids = {n.get("id") for n in nodes}
    assert all(e.get("source") in ids and e.get("target") in ids for e in edges)
    keys = {k.get("id") for k in root.findall("g:key", ns)}
    assert {"depth", "label"} <= keys


def test_to_json_shape():
    doc = to_json(build_ball(FamilySpec("P3", 2, 2), 1))
    assert doc["meta"] == {"family": "P3", "n": 2, "m": 2, "radius": 1}
    assert json.loads(json.dumps(doc)) == doc
    assert {e["label"] for e in doc["edges"]} == {"a", "b", "c"}


def test_unknown_format():
    with pytest.raises(UnknownFormat):
        export(build_ball(FamilySpec("P1", 3), 1), "svg")


def test_vertex_cap():
    with pytest.raises(BallTooLarge):
        build_ball(FamilySpec("P1", 3), 8, rewrite_system("P1", 3), vertex_cap=50)


def test_negative_radius():
    with pytest.raises(ValueError):
        build_ball(FamilySpec("P1", 3), -1)
