"""Planarity verdicts with Kuratowski witnesses, and the torso planarity criterion."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Hashable, Mapping

import networkx as nx

from .graphs import DepthGraph
from .templates import TemplateGraph, construct_R

WITNESS_VERTEX_LIMIT = 5_000


@dataclass(frozen=True)
class KuratowskiWitness:
    kind: str  # "K5" or "K3,3"
    branch: tuple[Hashable, ...]
    # one path per edge of K5 / K3,3, endpoints included
    paths: tuple[tuple[Hashable, ...], ...]

    def as_dict(self) -> dict:
        return {"kind": self.kind, "branch": list(self.branch), "paths": [list(p) for p in self.paths]}


@dataclass(frozen=True)
class PlanarityVerdict:
    planar: bool
    witness: KuratowskiWitness | None = None
    vertices: int = 0
    edges: int = 0

    def as_dict(self) -> dict:
        out: dict = {"planar": self.planar, "vertices": self.vertices, "edges": self.edges}
        if self.witness is not None:
            out["witness"] = self.witness.as_dict()
        return out


def _adjacency(graph) -> dict[Hashable, set[Hashable]]:
    if isinstance(graph, DepthGraph):
        return {graph.vertices[i]: {graph.vertices[j] for j in nb} for i, nb in enumerate(graph.nbrs)}
    if isinstance(graph, TemplateGraph):
        return {v: set(nb) for v, nb in graph.adjacency.items()}
    if hasattr(graph, "adjacency") and isinstance(graph.adjacency, Mapping):
        return {v: set(nb) for v, nb in graph.adjacency.items()}
    if isinstance(graph, nx.Graph):
        return {v: set(graph[v]) for v in graph}
    return {v: set(nb) for v, nb in graph.items()}


def _sort_key(v: Hashable) -> tuple:
    return (type(v).__name__, len(v) if isinstance(v, str) else 0, v)


def _to_nx(adj: Mapping[Hashable, set]) -> nx.Graph:
    g = nx.Graph()
    order = sorted(adj, key=_sort_key)
    g.add_nodes_from(order)
    for u in order:
        for w in sorted(adj[u], key=_sort_key):
            if u == w:
                raise ValueError(f"self-loop at {u!r}")
            g.add_edge(u, w)
    return g


def _branch_paths(sub: nx.Graph) -> tuple[list, list[tuple]]:
    branch = sorted((v for v in sub if sub.degree(v) >= 3), key=_sort_key)
    is_branch = set(branch)
    paths = set()
    for s in branch:
        for first in sub[s]:
            path = [s, first]
            while path[-1] not in is_branch:
                nxt = [w for w in sub[path[-1]] if w != path[-2]]
                path.append(nxt[0])
            if _sort_key(path[0]) > _sort_key(path[-1]):
                path.reverse()
            paths.add(tuple(path))
    return branch, sorted(paths, key=lambda p: [_sort_key(v) for v in p])


def _classify_branch(branch: list, paths: list[tuple]) -> str | None:
    ends = {frozenset((p[0], p[-1])) for p in paths}
    if len(ends) != len(paths):
        return None
    if len(branch) == 5 and len(paths) == 10:
        return "K5" if ends == {frozenset(e) for e in combinations(branch, 2)} else None
    if len(branch) == 6 and len(paths) == 9:
        # two-colour the branch graph
        side = {branch[0]: 0}
        stack = [branch[0]]
        nbrs = {b: set() for b in branch}
        for e in ends:
            u, w = tuple(e)
            nbrs[u].add(w)
            nbrs[w].add(u)
        while stack:
            u = stack.pop()
            for w in nbrs[u]:
                if w not in side:
                    side[w] = 1 - side[u]
                    stack.append(w)
                elif side[w] == side[u]:
                    return None
        left = [b for b in branch if side.get(b) == 0]
        right = [b for b in branch if side.get(b) == 1]
        if len(left) == len(right) == 3 and all(len(nbrs[b]) == 3 for b in branch):
            return "K3,3"
    return None


def is_planar(graph, witness: bool = True) -> PlanarityVerdict:
    """Planarity of a finite simple graph, with a Kuratowski subdivision when it is not planar.

    Accepts a :class:`DepthGraph`, a template, a torso, a networkx graph or
    an adjacency mapping.  The witness is extracted from the counterexample
    subgraph found under the canonical vertex order, so it is deterministic.
    """
    adj = _adjacency(graph)
    g = _to_nx(adj)
    want = witness and g.number_of_nodes() <= WITNESS_VERTEX_LIMIT
    planar, cert = nx.check_planarity(g, counterexample=want)
    n, m = g.number_of_nodes(), g.number_of_edges()
    if planar or not want:
        return PlanarityVerdict(planar, None, n, m)
    branch, paths = _branch_paths(cert)
    kind = _classify_branch(branch, paths)
    if kind is None:
        raise RuntimeError("counterexample subgraph is not a Kuratowski subdivision")
    return PlanarityVerdict(False, KuratowskiWitness(kind, tuple(branch), tuple(paths)), n, m)


def validate_witness(graph, witness: KuratowskiWitness) -> bool:
    """Whether ``witness`` is a subdivision of K5 or K3,3 inside ``graph``."""
    adj = _adjacency(graph)
    interior: set = set()
    branch = set(witness.branch)
    for path in witness.paths:
        if len(set(path)) != len(path) or path[0] not in branch or path[-1] not in branch:
            return False
        if any(b not in adj.get(a, ()) for a, b in zip(path, path[1:])):
            return False
        inner = set(path[1:-1])
        if inner & branch or inner & interior:
            return False
        interior |= inner
    return _classify_branch(sorted(branch, key=_sort_key), list(witness.paths)) == witness.kind


def euler_bound_holds(graph) -> bool:
    adj = _adjacency(graph)
    n = len(adj)
    m = sum(map(len, adj.values())) // 2
    return n < 3 or m <= 3 * n - 6


def _ends_joined(template: TemplateGraph) -> dict[Hashable, set[Hashable]]:
    # a vertex at infinity on both ray ends, so the double ray bounds two sides
    adj = _adjacency(template)
    left, right = min(adj), max(adj)
    adj["inf"] = {left, right}
    adj[left].add("inf")
    adj[right].add("inf")
    return adj


def window_stability(m: int, base: int | None = None) -> dict:
    """Planarity of R(2m+1) truncated at three window sizes L, 2L, 3L.

    Open windows are always planar, since a finite path with chords can be
    routed around its loose ends.  The verdict therefore uses windows whose
    two ends are joined through a vertex at infinity, which models an
    embedding of the double ray without accumulation points; the open
    verdicts are reported alongside.
    """
    base = base or 2 * m + 2
    sizes = (base, 2 * base, 3 * base)
    open_verdicts = {w: is_planar(construct_R(m, w)).planar for w in sizes}
    joined = {w: is_planar(_ends_joined(construct_R(m, w))).planar for w in sizes}
    stable = len(set(joined.values())) == 1
    return {
        "chord_span": 2 * m + 1,
        "windows": {str(w): v for w, v in joined.items()},
        "open_windows": {str(w): v for w, v in open_verdicts.items()},
        "stable": stable,
        "planar": next(iter(joined.values())) if stable else None,
    }


def torso_planarity_report(treedec, ball=None) -> dict:
    """Per-orbit torso verdicts, the derived whole-graph claim and an interior consistency probe.

    Every complete part's torso is tested.  For P7 the infinite double-ray
    parts are judged by the truncated R templates at three window sizes.
    """
    from .groups import Family
    from .treedec import orbit_labels, torso

    graph = treedec.graph
    labels = orbit_labels(treedec)
    per_orbit: dict[str, dict] = {}
    for t in treedec.complete_parts():
        verdict = is_planar(torso(treedec, graph, t), witness=False)
        entry = per_orbit.setdefault(labels[t], {"parts": 0, "planar": 0, "example": None})
        entry["parts"] += 1
        entry["planar"] += verdict.planar
        if entry["example"] is None or (not verdict.planar and entry["example"]["planar"]):
            entry["example"] = {"part": t, **is_planar(torso(treedec, graph, t)).as_dict()}
    orbits = {}
    for name, entry in sorted(per_orbit.items()):
        orbits[name] = {
            "parts": entry["parts"],
            "planar": entry["planar"] == entry["parts"],
            "consistent": entry["planar"] in (0, entry["parts"]),
            "example": entry["example"],
        }
    spec = graph.ball.spec if graph.ball is not None else None
    if spec is not None and spec.family is Family.P7:
        stab = window_stability(spec.n)
        orbits["O1"] = {"windowed": True, **stab}
    claim = bool(orbits) and all(o.get("planar") is True for o in orbits.values())
    interior = graph.induced([v for v in range(len(graph)) if graph.depth[v] >= 1])
    probe = is_planar(interior, witness=False)
    return {
        "orbits": orbits,
        "graph_planar": claim,
        "interior": {"planar": probe.planar, "vertices": probe.vertices, "edges": probe.edges},
        # a non-planar interior must come with a non-planar torso
        "consistent": probe.planar or not claim,
    }

