"""Planarity verdicts, Kuratowski witnesses and the torso planarity report."""

from __future__ import annotations

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cells import cell
from cubicsplit.planarity import (
    KuratowskiWitness,
    euler_bound_holds,
    is_planar,
    torso_planarity_report,
    validate_witness,
    window_stability,
)
from cubicsplit.templates import adjacency_from_edges, construct_R, construct_V
from oracles import euler_faces_ok

K4 = adjacency_from_edges(range(4), [(i, j) for i in range(4) for j in range(i + 1, 4)])
K5 = adjacency_from_edges(range(5), [(i, j) for i in range(5) for j in range(i + 1, 5)])


def test_k4_is_planar():
    verdict = is_planar(K4)
    assert verdict.planar and verdict.witness is None
    assert (verdict.vertices, verdict.edges) == (4, 6)


@pytest.mark.parametrize("size,kind", [(6, "K3,3"), (8, None)])
def test_v_templates_are_not_planar(size, kind):
    graph = construct_V(size)
    verdict = is_planar(graph)
    assert not verdict.planar
    assert verdict.witness is not None
    if kind is not None:
        assert verdict.witness.kind == kind
    assert validate_witness(graph, verdict.witness)


def test_k5_witness():
    verdict = is_planar(K5)
    assert verdict.witness.kind == "K5"
    assert len(verdict.witness.paths) == 10
    assert validate_witness(K5, verdict.witness)


def test_forged_witnesses_are_rejected():
    good = is_planar(construct_V(6)).witness
    # drop a path
    assert not validate_witness(construct_V(6), KuratowskiWitness(good.kind, good.branch, good.paths[:-1]))
    # claim the wrong shape
    assert not validate_witness(construct_V(6), KuratowskiWitness("K5", good.branch, good.paths))
    # use a non-edge
    bent = good.paths[0][:1] + (99,) + good.paths[0][1:]
    assert not validate_witness(construct_V(6), KuratowskiWitness(good.kind, good.branch, (bent,) + good.paths[1:]))


def test_verdicts_are_deterministic():
    first = is_planar(construct_V(10)).as_dict()
    second = is_planar(construct_V(10)).as_dict()
    assert first == second


def test_witness_can_be_skipped():
    verdict = is_planar(construct_V(8), witness=False)
    assert not verdict.planar and verdict.witness is None


def test_self_loop_rejected():
    with pytest.raises(ValueError):
        is_planar({0: {0}})


random_graphs = st.integers(3, 10).flatmap(
    lambda n: st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n).map(
        lambda edges: adjacency_from_edges(range(n), {(min(e), max(e)) for e in edges if e[0] != e[1]})
    )
)


@given(random_graphs)
def test_verdict_is_backed_by_a_certificate(adj):
    verdict = is_planar(adj)
    graph = nx.Graph([(u, w) for u in adj for w in adj[u]])
    graph.add_nodes_from(adj)
    if verdict.planar:
        # independent route: an embedding satisfying Euler's formula
        planar, embedding = nx.check_planarity(graph)
        assert planar and euler_faces_ok(embedding)
        assert euler_bound_holds(adj)
    else:
        assert validate_witness(adj, verdict.witness)


@given(random_graphs)
def test_euler_bound_is_necessary(adj):
    if not euler_bound_holds(adj):
        assert not is_planar(adj, witness=False).planar


# -- R windows ---------------------------------------------------------------


def test_open_r_windows_are_planar():
    for m in (1, 2, 3):
        assert is_planar(construct_R(m, 3 * (2 * m + 2))).planar


@pytest.mark.parametrize("m,planar", [(1, True), (2, False), (3, False)])
def test_window_stability(m, planar):
    result = window_stability(m)
    assert result["stable"]
    assert result["planar"] is planar
    assert result["chord_span"] == 2 * m + 1
    assert len(result["windows"]) == 3
    assert all(result["open_windows"].values())


# -- torso reports -----------------------------------------------------------


@pytest.mark.parametrize(
    "spec,planar",
    [(("P5", 2, 2), True), (("P5", 3, 2), False), (("P6", 1, 2), True), (("P6", 2, 2), False), (("P7", 1, 2), True)],
    ids=str,
)
def test_torso_planarity_report(spec, planar):
    report = torso_planarity_report(cell(*spec).treedec)
    assert report["graph_planar"] is planar
    assert report["consistent"]
    assert all(o.get("consistent", True) for o in report["orbits"].values())


def test_non_planar_torso_carries_a_witness():
    report = torso_planarity_report(cell("P5", 3, 2).treedec)
    example = report["orbits"]["O1"]["example"]
    assert example["planar"] is False
    assert example["witness"]["kind"] == "K3,3"
