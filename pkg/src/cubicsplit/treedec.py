"""Tree-decompositions cut out by a nested orbit of 2-separators.

Parts are assembled with a union-find over *half-edge groups*: at a vertex
lying in an adhesion pair ``{x, y}`` the incident edges split into those
pointing into side A and those pointing into side B, and each group is glued
to the matching group at the partner vertex.  Edges glue the groups at their
two endpoints.  A class of the union-find is a part; every adhesion pair
joins its A-class to its B-class in the decomposition tree.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

from .cayley import CayleyBall
from .graphs import DepthGraph
from .groups import Family, RewriteSystem, shortlex_key
from .separations import NestedOrbit, Separation, _pairwise_nested, as_graph, orbit_translates
from .templates import (
    TemplateGraph,
    adjacency_from_edges,
    construct_R,
    construct_V,
    cycle_template,
    find_isomorphism,
)

__all__ = [
    "CheckResult",
    "LEMMA_KEYS",
    "NotNested",
    "PartialPart",
    "PartShape",
    "StabilizerComparison",
    "Torso",
    "TreeDecomposition",
    "build_treedec",
    "construct_R",
    "construct_V",
    "orbit_labels",
    "part_structure",
    "stabilizer_elements",
    "structural_checks",
    "torso",
    "torso_matches",
    "transplant_orbit",
    "verify_axioms",
    "windowed_torso",
]


class NotNested(ValueError):
    pass


class PartialPart(ValueError):
    pass


# -- the decomposition ---------------------------------------------------------


@dataclass(frozen=True)
class TreeDecomposition:
    graph: DepthGraph = field(repr=False)
    parts: dict[int, frozenset[int]]
    tree_edges: tuple[tuple[int, int], ...]
    # tree edge -> adhesion pair (vertex positions, ascending)
    adhesions: dict[tuple[int, int], tuple[int, int]]
    partial: frozenset[int]
    # (v, w) -> (part, side) holding the edge vw as seen from v; adhesion edges omitted
    half_edges: dict[tuple[int, int], tuple[int, str]] = field(default_factory=dict, repr=False)
    # every vertex of the infinite graph lies in an adhesion set (Cayley balls)
    cover_expected: bool = False
    # adhesions this deep have their connecting paths inside the ball
    margin: int = 0
    # every vertex this close to the centre has its adhesion partner in the interior
    reliable_radius: int = 0

    @property
    def nodes(self) -> list[int]:
        return sorted(self.parts)

    @cached_property
    def membership(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for t in self.nodes:
            for v in self.parts[t]:
                out.setdefault(v, []).append(t)
        return {v: tuple(ts) for v, ts in out.items()}

    def parts_of(self, v: int) -> tuple[int, ...]:
        return self.membership.get(v, ())

    @cached_property
    def tree_adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {t: [] for t in self.parts}
        for s, t in self.tree_edges:
            adj[s].append(t)
            adj[t].append(s)
        return adj

    def incident_adhesions(self, part: int) -> list[tuple[int, int]]:
        return [pair for (s, t), pair in self.adhesions.items() if part in (s, t)]

    def complete_parts(self) -> list[int]:
        return [t for t in self.nodes if t not in self.partial]

    @cached_property
    def adhesion_vertices(self) -> frozenset[int]:
        return frozenset(v for pair in self.adhesions.values() for v in pair)

    def evaluated(self, v: int) -> bool:
        """Whether lemma checks at interior vertex ``v`` are free of truncation effects.

        The edge split at a vertex of an adhesion pair is copied from the
        seed, so it is exact at any depth.  A vertex whose partner lies
        outside the interior glues its parts together instead and is never
        evaluated.
        """
        if self.graph.depth[v] < 1:
            return False
        return not self.cover_expected or v in self.adhesion_vertices

    def walk(self, start: int, side: str, partners: bool = True) -> frozenset[int]:
        """Evaluated vertices reached from the edge group ``(start, side)``.

        Steps follow edges of the current group into the matching group at
        the far end, and (with ``partners``) jump across adhesion pairs.
        """
        partner = {}
        if partners:
            for x, y in self.adhesions.values():
                partner[x], partner[y] = y, x
        nbrs = self.graph.nbrs
        seen = {(start, side)}
        queue = deque([(start, side)])
        while queue:
            v, sd = queue.popleft()
            nxt = []
            for w in nbrs[v]:
                here = self.half_edges.get((v, w))
                if here is not None and here[1] == sd and (w, v) in self.half_edges:
                    nxt.append((w, self.half_edges[(w, v)][1]))
            if v in partner:
                nxt.append((partner[v], sd))
            for node in nxt:
                if node not in seen and self.evaluated(node[0]):
                    seen.add(node)
                    queue.append(node)
        return frozenset(v for v, _ in seen)

    def sides_in(self, v: int, part: int) -> list[str]:
        return sorted({sd for (u, _), (t, sd) in self._by_vertex(v) if t == part})

    def _by_vertex(self, v: int) -> list:
        return [((v, w), self.half_edges[(v, w)]) for w in self.graph.nbrs[v] if (v, w) in self.half_edges]

    def core(self, part: int, start: int, via: int | None = None) -> frozenset[int]:
        """Evaluated vertices of ``part`` connected to ``start`` within one of its edge groups.

        ``via`` (a neighbour of ``start``) picks the group when both groups
        at ``start`` ended up in the same truncated part.
        """
        if not self.evaluated(start) or part not in self.parts_of(start):
            return frozenset()
        if via is not None:
            sides = [self.half_edges[(start, via)][1]]
        else:
            sides = self.sides_in(start, part)[:1]
        reached = self.walk(start, sides[0]) if sides else frozenset({start})
        sub = self.graph.induced(reached)
        local = sub.index[self.graph.vertices[start]]
        piece = next(c for c in sub.components() if local in c)
        return frozenset(self.graph.index[sub.vertices[i]] for i in piece)

    def part_containing(self, *vertex_ids: Hashable) -> int | None:
        """Least part holding every listed vertex id."""
        idx = [self.graph.index.get(v) for v in vertex_ids]
        if None in idx:
            return None
        common = set(self.parts_of(idx[0]))
        for i in idx[1:]:
            common &= set(self.parts_of(i))
        return min(common) if common else None

    def as_dict(self) -> dict:
        ids = self.graph.ids
        return {
            "parts": {str(t): ids(self.parts[t]) for t in self.nodes},
            "tree_edges": [list(e) for e in self.tree_edges],
            "adhesions": [
                {"edge": list(e), "pair": ids(p)} for e, p in sorted(self.adhesions.items())
            ],
            "partial": sorted(self.partial),
        }


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict = {}

    def add(self, x: Hashable) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: Hashable) -> Hashable:
        self.add(x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: Hashable, y: Hashable) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)


# neighbour position -> "A", "B" or "S" (the partner across the adhesion)
_Tags = dict[int, str]


def _assemble(
    graph: DepthGraph,
    pairs: Sequence[tuple[int, int]],
    tags: Mapping[int, _Tags],
    cover_expected: bool,
    margin: int = 0,
    reliable_radius: int | None = None,
) -> TreeDecomposition:
    uf = _UnionFind()
    for v in range(len(graph)):
        if v in tags:
            for side in ("A", "B"):
                uf.add((v, side))
        else:
            uf.add((v, "*"))

    def group(v: int, w: int) -> tuple[int, str]:
        return (v, tags[v][w]) if v in tags else (v, "*")

    for v, nb in enumerate(graph.nbrs):
        for w in nb:
            if w < v:
                continue
            gv, gw = group(v, w), group(w, v)
            if gv[1] == "S" or gw[1] == "S":
                continue
            uf.union(gv, gw)
    for x, y in pairs:
        uf.union((x, "A"), (y, "A"))
        uf.union((x, "B"), (y, "B"))

    classes: dict[Hashable, set[int]] = {}
    for node in uf.parent:
        classes.setdefault(uf.find(node), set()).add(node[0])
    ordered = sorted(classes, key=lambda r: sorted(classes[r]))
    part_id = {r: i for i, r in enumerate(ordered)}
    parts = {i: frozenset(classes[r]) for r, i in part_id.items()}

    adhesions: dict[tuple[int, int], tuple[int, int]] = {}
    for x, y in pairs:
        s, t = part_id[uf.find((x, "A"))], part_id[uf.find((x, "B"))]
        if s == t:
            raise NotNested(f"separator {graph.ids((x, y))} does not split its part")
        edge = (min(s, t), max(s, t))
        if edge in adhesions and adhesions[edge] != (x, y):
            raise NotNested(
                f"separators {graph.ids(adhesions[edge])} and {graph.ids((x, y))} join the same two parts"
            )
        adhesions[edge] = (x, y)

    def incomplete(v: int) -> bool:
        return graph.depth[v] == 0 or (cover_expected and v not in tags)

    partial = frozenset(t for t, vs in parts.items() if any(incomplete(v) for v in vs))
    if reliable_radius is None:
        reliable_radius = graph.radius
    half_edges = {}
    for v, nb in enumerate(graph.nbrs):
        for w in nb:
            gv = group(v, w)
            if gv[1] != "S":
                half_edges[(v, w)] = (part_id[uf.find(gv)], gv[1])
    return TreeDecomposition(
        graph,
        parts,
        tuple(sorted(adhesions)),
        adhesions,
        partial,
        half_edges,
        cover_expected,
        margin,
        reliable_radius,
    )


def _tags_from_sides(graph: DepthGraph, sep: Separation, v: int) -> _Tags:
    other = sep.y if v == sep.x else sep.x
    return {
        w: "S" if w == other else ("A" if w in sep.side_a else "B") for w in graph.nbrs[v]
    }


def _merge_tags(tags: dict[int, _Tags], v: int, new: _Tags, graph: DepthGraph) -> None:
    old = tags.get(v)
    if old is None:
        tags[v] = new
    elif old != new:
        raise NotNested(f"vertex {graph.vertices[v]!r} lies in two adhesion sets")


def build_treedec(
    ball: CayleyBall | DepthGraph,
    orbit: NestedOrbit | Iterable[Separation],
) -> TreeDecomposition:
    """Tree-decomposition induced by a nested orbit, or by explicit nested separations.

    For an orbit of a Cayley ball the A/B split at each translate is carried
    over from the seed by generator labels, so translates clipped by the
    boundary still split their vertices correctly.  Explicit separations of
    a fixture graph must be pairwise nested.
    """
    if isinstance(orbit, NestedOrbit):
        return _from_orbit(orbit.seed.graph, orbit)
    graph = as_graph(ball)
    seps = list(orbit)
    crossing = _pairwise_nested(graph, seps)
    if crossing is not None:
        i, j = crossing
        raise NotNested(f"separations {seps[i].pair} and {seps[j].pair} cross")
    tags: dict[int, _Tags] = {}
    for sep in seps:
        for v in (sep.x, sep.y):
            _merge_tags(tags, v, _tags_from_sides(graph, sep, v), graph)
    return _assemble(graph, [(s.x, s.y) for s in seps], tags, cover_expected=False)


def _from_orbit(graph: DepthGraph, orbit: NestedOrbit) -> TreeDecomposition:
    ball = graph.ball
    if ball is None:
        raise ValueError("an orbit needs a Cayley ball")
    rs = ball.rs
    seed = orbit.seed
    x0, y0 = seed.pair

    def label_tags(v: str, other: str) -> dict[str, str]:
        out = {}
        for s, w in ball.steps[v].items():
            out[s] = "S" if w == other else ("A" if graph.index[w] in seed.side_a else "B")
        return out

    by_role = {"x": label_tags(x0, y0), "y": label_tags(y0, x0)}
    tags: dict[int, _Tags] = {}
    pairs = []
    for t in orbit.translates:
        u, v = t.pair
        if rs.nf(u + orbit.offset) != v:
            u, v = v, u
        for vertex, role in ((u, "x"), (v, "y")):
            lab = by_role[role]
            mapped = {graph.index[w]: lab[s] for s, w in ball.steps[vertex].items()}
            _merge_tags(tags, graph.index[vertex], mapped, graph)
        pairs.append((t.x, t.y))
    # an offset word is at least as long as the distance it spans
    reach = graph.radius - 1 - len(orbit.offset)
    return _assemble(graph, pairs, tags, cover_expected=True, margin=orbit.seed.margin, reliable_radius=reach)


# -- axioms --------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    status: str  # "pass", "fail" or "skipped"
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_dict(self) -> dict:
        return {"status": self.status, **self.detail}


def _verdict(ok: bool, **detail) -> CheckResult:
    return CheckResult("pass" if ok else "fail", detail)


def _skip(reason: str) -> CheckResult:
    return CheckResult("skipped", {"reason": reason})


def _node_components(nodes: Iterable[int], adj: Mapping[int, Sequence[int]]) -> int:
    nodes = set(nodes)
    seen: set[int] = set()
    count = 0
    for s in nodes:
        if s in seen:
            continue
        count += 1
        seen.add(s)
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w in nodes and w not in seen:
                    seen.add(w)
                    queue.append(w)
    return count


def verify_axioms(treedec: TreeDecomposition, ball: CayleyBall | DepthGraph | None = None) -> dict:
    """Tree-ness and the axioms T1-T3 on the interior, each with a witness on failure."""
    graph = treedec.graph if ball is None else as_graph(ball)
    if graph is not treedec.graph and graph.vertices != treedec.graph.vertices:
        raise ValueError("decomposition was built on a different graph")
    interior = [v for v in range(len(graph)) if graph.depth[v] >= 1]
    n_nodes, n_edges = len(treedec.parts), len(treedec.tree_edges)
    comps = _node_components(treedec.parts, treedec.tree_adjacency)
    tree = _verdict(
        comps == 1 and n_edges == n_nodes - 1,
        nodes=n_nodes,
        edges=n_edges,
        components=comps,
    )
    uncovered = [v for v in interior if not treedec.parts_of(v)]
    t1 = _verdict(not uncovered, witness=graph.ids(uncovered[:5]))
    missing = []
    for v in interior:
        for w in graph.nbrs[v]:
            if w > v and graph.depth[w] >= 1 and not set(treedec.parts_of(v)) & set(treedec.parts_of(w)):
                missing.append(graph.ids((v, w)))
    t2 = _verdict(not missing, witness=missing[:5])
    scattered = [
        graph.vertices[v]
        for v in interior
        if treedec.parts_of(v) and _node_components(treedec.parts_of(v), treedec.tree_adjacency) != 1
    ]
    t3 = _verdict(not scattered, witness=scattered[:5])
    checks = {"tree": tree, "T1": t1, "T2": t2, "T3": t3}
    return {
        "passed": all(c.passed for c in checks.values()),
        **{k: c.as_dict() for k, c in checks.items()},
    }


# -- structural lemmas -------------------------------------------------------

LEMMA_KEYS = ("L2.3", "L3.2", "L3.3", "L3.4", "C3.5", "L3.6", "C3.7", "L4.1", "L4.2", "L5.3", "L5.6")

_TYPE_I_FAMILIES = {Family.P1, Family.P2, Family.P3, Family.P4}


def _induced_labels(graph: DepthGraph, part: frozenset[int]) -> list[str]:
    return sorted(
        {lab for (i, j), lab in graph.labels.items() if i in part and j in part}
    )


def orbit_labels(treedec: TreeDecomposition) -> dict[int, str]:
    """``"O1"``/``"O2"`` per part by the edge labels it induces; ``"?"`` if it induces none.

    The first orbit holds the parts carrying ``a``-edges, except in the
    families whose first factor is the ``(b, c)``-dihedral group.
    """
    graph = treedec.graph
    fam = graph.ball.spec.family if graph.ball is not None else None
    out = {}
    for t in treedec.nodes:
        labs = set(_induced_labels(graph, treedec.parts[t]))
        if not labs:
            out[t] = "?"
        elif fam in (Family.P6, Family.P7):
            out[t] = "O2" if labs == {"a"} else "O1"
        elif fam is Family.P3:
            out[t] = "O1" if "a" in labs else "O2"
        elif fam is Family.P5:
            out[t] = "O1" if labs == {"a"} else "O2"
        else:
            out[t] = "O1"
    return out


def _l32_c35(treedec: TreeDecomposition) -> tuple[CheckResult, CheckResult]:
    graph = treedec.graph
    in_adhesions: dict[int, int] = {}
    for pair in treedec.adhesions.values():
        for v in pair:
            in_adhesions[v] = in_adhesions.get(v, 0) + 1
    complete = set(treedec.complete_parts())
    bad32, bad35 = [], []
    checked = 0
    for v, ts in sorted(treedec.membership.items()):
        if not treedec.evaluated(v):
            continue
        checked += 1
        if in_adhesions.get(v, 0) > 2:
            bad32.append(graph.vertices[v])
        if len(ts) != 2:
            bad35.append((graph.vertices[v], len(ts)))
            continue
        # the neighbourhood lies in the two parts
        both = treedec.parts[ts[0]] | treedec.parts[ts[1]]
        if not set(graph.nbrs[v]) <= both:
            bad35.append((graph.vertices[v], "neighbour outside"))
    # a complete part is the disjoint union of its adhesion sets
    for t in sorted(complete):
        sets = [set(p) for p in treedec.incident_adhesions(t)]
        union = set().union(*sets) if sets else set()
        if union != set(treedec.parts[t]) or sum(map(len, sets)) != len(union):
            bad35.append((f"part {t}", "not a disjoint union of adhesion sets"))
    return (
        _verdict(not bad32 and checked > 0, vertices_checked=checked, witness=bad32[:5]),
        _verdict(not bad35 and checked > 0, vertices_checked=checked, witness=bad35[:5]),
    )


def _l33(treedec: TreeDecomposition) -> CheckResult:
    graph = treedec.graph
    bad = []
    adh = [
        pair
        for pair in sorted(treedec.adhesions.values())
        if all(treedec.evaluated(v) and graph.depth[v] >= treedec.margin for v in pair)
    ]
    for x, y in adh:
        if graph.adjacent(x, y):
            continue  # the adhesion edge lies in both parts
        sides = {sd for _, (_, sd) in treedec._by_vertex(x)}
        if not any(y in treedec.walk(x, sd, partners=False) for sd in sides):
            bad.append(graph.ids((x, y)))
    return _verdict(not bad and bool(adh), adhesions_checked=len(adh), witness=bad[:5])


def _l34(treedec: TreeDecomposition) -> CheckResult:
    graph = treedec.graph
    bad = []
    checked = 0
    for t in treedec.nodes:
        pairs = treedec.incident_adhesions(t)
        for i, p in enumerate(pairs):
            for q in pairs[i + 1 :]:
                checked += 1
                if set(p) & set(q):
                    bad.append([graph.ids(p), graph.ids(q)])
    if not checked:
        return _skip("no part carries two adhesion sets")
    return _verdict(not bad, pairs_checked=checked, witness=bad[:5])


def _l36_c37(treedec: TreeDecomposition, rs: RewriteSystem) -> tuple[CheckResult, CheckResult]:
    graph = treedec.graph
    bad36, bad37 = [], []
    pairs = sorted(set(treedec.adhesions.values()))
    interior = [p for p in pairs if min(graph.depth[v] for v in p) >= 1]
    for p in interior:
        x, y = graph.ids(p)
        xy_inv = rs.multiply(x, rs.invert(y))
        if rs.nf(xy_inv + xy_inv) != "":
            bad36.append([x, y])
        target = {x, y}
        stab = {
            g
            for g in {"", xy_inv, rs.invert(xy_inv)}
            if {rs.multiply(g, x), rs.multiply(g, y)} == target
        }
        if len(stab) != 2:
            bad37.append({"pair": [x, y], "stabilizer": sorted(stab, key=shortlex_key)})
    return (
        _verdict(not bad36 and bool(interior), adhesions_checked=len(interior), witness=bad36[:5]),
        _verdict(not bad37 and bool(interior), adhesions_checked=len(interior), witness=bad37[:5]),
    )


def _l23(treedec: TreeDecomposition) -> CheckResult:
    bad = []
    complete = treedec.complete_parts()
    for t in complete:
        tg = torso(treedec, treedec.graph, t)
        if _node_components(tg.adjacency, tg.adjacency) != 1:
            bad.append(t)
    return _verdict(not bad and bool(complete), parts_checked=len(complete), witness=bad[:5])


def _parts_at_identity(treedec: TreeDecomposition) -> tuple[int, ...]:
    pos = treedec.graph.index.get("")
    return () if pos is None else treedec.parts_of(pos)


def _translate_set(rs: RewriteSystem, g: str, words: Iterable[str]) -> set[str]:
    return {rs.nf(g + w) for w in words}


def _l41(treedec: TreeDecomposition, rs: RewriteSystem, family: Family) -> CheckResult:
    if family not in _TYPE_I_FAMILIES:
        return _skip("inversion along a Type I adhesion applies to P1-P4")
    graph = treedec.graph
    at_one = _parts_at_identity(treedec)
    if len(at_one) != 2 or any(t in treedec.partial for t in at_one):
        return _skip("the parts at the identity are not both complete")
    s, t = at_one
    vs, vt = set(graph.ids(treedec.parts[s])), set(graph.ids(treedec.parts[t]))
    image = _translate_set(rs, "b", vs)
    if image == vs:
        action = "stabilizes"
    elif image == vt:
        action = "inverts"
    else:
        return _verdict(False, action="neither", reason="b maps the part to neither part at the identity")
    expected = {Family.P1: "inverts", Family.P2: "stabilizes", Family.P3: "stabilizes"}.get(family)
    ok = expected is None or action == expected
    return _verdict(ok, action=action, expected=expected, with_inversion=action == "inverts")


def _cycle_length(graph: DepthGraph, part: frozenset[int]) -> int | None:
    sub = graph.induced(part)
    if any(len(nb) != 2 for nb in sub.nbrs) or len(sub.components()) != 1:
        return None
    return len(sub)


def _l42(treedec: TreeDecomposition, family: Family) -> CheckResult:
    if family not in _TYPE_I_FAMILIES:
        return _skip("applies to Type I orbits (P1-P4)")
    complete = treedec.complete_parts()
    bad = [t for t in complete if _cycle_length(treedec.graph, treedec.parts[t]) is None]
    return _verdict(not bad and bool(complete), parts_checked=len(complete), witness=bad[:5])


def _l53(treedec: TreeDecomposition, rs: RewriteSystem, family: Family, n: int) -> CheckResult:
    if family is not Family.P5:
        return _skip("applies to P5")
    graph = treedec.graph
    shifts = {"a" * n, rs.invert("a" * n)}
    bad_pairs = []
    for x, y in sorted(set(treedec.adhesions.values())):
        u, v = graph.vertices[x], graph.vertices[y]
        if rs.multiply(rs.invert(u), v) not in {rs.nf(s) for s in shifts}:
            bad_pairs.append([u, v])
    labels = orbit_labels(treedec)
    bad_parts = []
    counts = {"O1": 0, "O2": 0}
    for t in treedec.complete_parts():
        part = treedec.parts[t]
        labs = _induced_labels(graph, part)
        orbit = labels[t]
        counts[orbit] = counts.get(orbit, 0) + 1
        if orbit == "O1" and not (labs == ["a"] and _cycle_length(graph, part) == 2 * n):
            bad_parts.append(t)
        if orbit == "O2" and not (labs == ["b"] and _is_perfect_matching(graph, part)):
            bad_parts.append(t)
    ok = not bad_pairs and not bad_parts and counts["O1"] > 0 and counts["O2"] > 0
    return _verdict(ok, parts_checked=counts, witness={"pairs": bad_pairs[:5], "parts": bad_parts[:5]})


def _is_perfect_matching(graph: DepthGraph, part: frozenset[int]) -> bool:
    sub = graph.induced(part)
    return len(sub) > 0 and all(len(nb) == 1 for nb in sub.nbrs)


def _alternating(labels: Sequence[str], pair: tuple[str, str]) -> bool:
    return all({labels[i], labels[(i + 1) % len(labels)]} == set(pair) for i in range(len(labels)))


def _half_edge_groups(treedec: TreeDecomposition, v: int) -> list[str]:
    """Labels of the edges at ``v`` grouped by the part that holds them, e.g. ``["a", "bc"]``."""
    graph = treedec.graph
    groups: dict[int, list[str]] = {}
    for w in graph.nbrs[v]:
        here = treedec.half_edges.get((v, w))
        if here is not None:
            groups.setdefault(here[1], []).append(graph.label(v, w) or "?")
    return sorted("".join(sorted(labs)) for labs in groups.values())


def _path_core(treedec: TreeDecomposition, part: int, start: int, via: int) -> frozenset[int] | None:
    """The reliable core of ``part`` around ``start`` if it induces a path, else ``None``."""
    core = treedec.core(part, start, via)
    sub = treedec.graph.induced(core)
    if not core or sub.edge_count() != len(sub) - 1 or max(map(len, sub.nbrs)) > 2:
        return None
    return core


def _l56(treedec: TreeDecomposition, family: Family) -> CheckResult:
    if family not in (Family.P6, Family.P7):
        return _skip("applies to P6 and P7")
    graph = treedec.graph
    labels = orbit_labels(treedec)
    bad: list = []
    counts = {"O1": 0, "O2": 0}
    for t in treedec.complete_parts():
        part = treedec.parts[t]
        orbit = labels[t]
        counts[orbit] = counts.get(orbit, 0) + 1
        if orbit == "O1":
            shape = part_structure(treedec, graph, t)
            if family is Family.P7:
                bad.append(t)  # a D_inf part can never close up inside a ball
            elif shape.kind != "Cycle" or shape.size % 4 or not _alternating(shape.labels, ("b", "c")):
                bad.append(t)
        elif orbit == "O2" and not (
            _induced_labels(graph, part) == ["a"] and _is_perfect_matching(graph, part)
        ):
            bad.append(t)
    if family is Family.P6:
        ok = not bad and counts["O1"] > 0 and counts["O2"] > 0
        return _verdict(ok, parts_checked=counts, witness=bad[:5])
    # P7: the (b, c)-parts are double rays, seen locally and on the window at the identity
    local = [v for v in range(len(graph)) if treedec.evaluated(v)]
    for v in local:
        if _half_edge_groups(treedec, v) != ["a", "bc"]:
            bad.append(graph.vertices[v])
    one, b = graph.index[""], graph.index["b"]
    at_one = [t for t in treedec.parts_of(one) if t in treedec.parts_of(b)]
    window = _path_core(treedec, at_one[0], one, b) if at_one else None
    if window is None:
        bad.append("identity window is not a path")
    ok = not bad and bool(local) and counts["O2"] > 0
    return _verdict(
        ok,
        parts_checked=counts,
        vertices_checked=len(local),
        window_length=len(window) if window else 0,
        witness=bad[:5],
    )


def structural_checks(
    treedec: TreeDecomposition,
    ball: CayleyBall | DepthGraph | None = None,
    rs: RewriteSystem | None = None,
) -> dict[str, CheckResult]:
    """One verdict per lemma key, evaluated on complete parts and interior adhesions.

    Checks that need the group (``L3.6``, ``C3.7`` and the family-specific
    shape lemmas) are skipped for fixtures without a Cayley ball.
    """
    graph = treedec.graph
    cball = ball if isinstance(ball, CayleyBall) else graph.ball
    if rs is None and cball is not None:
        rs = cball.rs
    l32, c35 = _l32_c35(treedec)
    report = {"L2.3": _l23(treedec), "L3.2": l32, "L3.3": _l33(treedec), "L3.4": _l34(treedec), "C3.5": c35}
    if rs is None or cball is None:
        no_group = _skip("needs a Cayley ball with a rewriting system")
        report.update({k: no_group for k in LEMMA_KEYS if k not in report})
        return report
    family, n = cball.spec.family, cball.spec.n
    report["L3.6"], report["C3.7"] = _l36_c37(treedec, rs)
    report["L4.1"] = _l41(treedec, rs, family)
    report["L4.2"] = _l42(treedec, family)
    report["L5.3"] = _l53(treedec, rs, family, n)
    report["L5.6"] = _l56(treedec, family)
    return {k: report[k] for k in LEMMA_KEYS}


# -- part shapes -------------------------------------------------------------


@dataclass(frozen=True)
class PartShape:
    """Shape of the subgraph a part induces; ``labels`` walk the cycle or path."""

    kind: str  # "Cycle", "Matching", "Path" or "Other"
    size: int
    labels: tuple[str, ...] = ()

    @property
    def label_period(self) -> tuple[str, ...]:
        """Shortest block whose repetition gives ``labels`` (rotated to its least form)."""
        labs = self.labels
        for p in range(1, len(labs) + 1):
            if len(labs) % p == 0 and labs == labs[:p] * (len(labs) // p):
                block = labs[:p]
                if self.kind == "Cycle":
                    block = min(block[i:] + block[:i] for i in range(p))
                return block
        return labs

    def template(self) -> TemplateGraph | None:
        if self.kind == "Cycle":
            return cycle_template(self.size)
        return None

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "size": self.size,
            "labels": "".join(self.labels),
            "label_period": "".join(self.label_period),
        }


def _walk(sub: DepthGraph, start: int) -> list[int]:
    order = [start]
    prev, cur = None, start
    while True:
        nxt = [w for w in sub.nbrs[cur] if w != prev and w != start]
        if not nxt:
            return order
        prev, cur = cur, min(nxt)
        order.append(cur)


def _shape(graph: DepthGraph, vertices: frozenset[int]) -> PartShape:
    sub = graph.induced(vertices)
    degrees = [len(nb) for nb in sub.nbrs]
    size = len(sub)
    if size and all(d == 1 for d in degrees):
        labs = sorted(set(sub.labels.values()))
        return PartShape("Matching", size // 2, tuple(labs))
    connected = len(sub.components()) == 1
    if connected and size >= 3 and all(d == 2 for d in degrees):
        order = _walk(sub, 0)
        labs = tuple(sub.label(order[i], order[(i + 1) % size]) or "?" for i in range(size))
        return PartShape("Cycle", size, labs)
    if connected and max(degrees, default=0) <= 2:
        ends = [v for v, d in enumerate(degrees) if d <= 1]
        order = _walk(sub, ends[0]) if ends else [0]
        labs = tuple(sub.label(order[i], order[i + 1]) or "?" for i in range(len(order) - 1))
        return PartShape("Path", size, labs)
    return PartShape("Other", size)


def _window_start(treedec: TreeDecomposition, part: int, start: Hashable | None) -> int:
    graph = treedec.graph
    if start is not None:
        return graph.index[start]
    one = graph.index.get("")
    if one is not None and part in treedec.parts_of(one):
        return one
    return min((v for v in treedec.parts[part] if treedec.evaluated(v)), default=min(treedec.parts[part]))


def part_structure(
    treedec: TreeDecomposition,
    ball: CayleyBall | DepthGraph | None,
    part: int,
    allow_partial: bool = False,
    start: Hashable | None = None,
) -> PartShape:
    """Classify the subgraph induced by ``part`` as a cycle, matching or path.

    With ``allow_partial`` a partial part is replaced by its reliable core
    around ``start`` (default: the identity, if the part holds it).
    """
    if part in treedec.partial:
        if not allow_partial:
            raise PartialPart(f"part {part} touches the ball boundary")
        return _shape(treedec.graph, treedec.core(part, _window_start(treedec, part, start)))
    return _shape(treedec.graph, treedec.parts[part])


# -- torsos ------------------------------------------------------------------


@dataclass(frozen=True)
class Torso:
    part: int
    vertices: tuple[Hashable, ...]
    adjacency: dict[Hashable, set[Hashable]] = field(repr=False)
    virtual_edges: tuple[tuple[Hashable, Hashable], ...]
    windowed: bool = False

    def edge_count(self) -> int:
        return sum(map(len, self.adjacency.values())) // 2


def _torso_graph(treedec: TreeDecomposition, part: int) -> tuple[dict, list]:
    graph = treedec.graph
    keep = treedec.parts[part]
    edges = [(graph.vertices[v], graph.vertices[w]) for v in keep for w in graph.nbrs[v] if w in keep and v < w]
    virtual = []
    for x, y in treedec.incident_adhesions(part):
        if not graph.adjacent(x, y):
            virtual.append((graph.vertices[x], graph.vertices[y]))
    adj = adjacency_from_edges((graph.vertices[v] for v in sorted(keep)), edges + virtual)
    return adj, virtual


def torso(treedec: TreeDecomposition, ball: CayleyBall | DepthGraph | None, part: int) -> Torso:
    """Induced subgraph of a complete part plus a virtual edge per incident adhesion."""
    if part in treedec.partial:
        raise PartialPart(f"part {part} touches the ball boundary")
    adj, virtual = _torso_graph(treedec, part)
    return Torso(part, tuple(adj), adj, tuple(virtual))


def windowed_torso(treedec: TreeDecomposition, part: int, center: Hashable, window: int) -> Torso:
    """Torso of a path-shaped part cut to ``window`` path steps each way of ``center``.

    The path is the part's reliable core around ``center``, which must be
    the lower end of its chord so that positions line up with
    :func:`construct_R`; the result is relabelled by path position.
    """
    graph = treedec.graph
    c_pos = graph.index[center]
    core = treedec.core(part, c_pos) if part in treedec.partial else treedec.parts[part]
    sub = graph.induced(core)
    if _shape(graph, core).kind != "Path":
        raise ValueError(f"part {part} does not induce a path around {center!r}")
    ends = [v for v, nb in enumerate(sub.nbrs) if len(nb) <= 1]
    order = [sub.vertices[i] for i in _walk(sub, ends[0])]
    pos = {v: i for i, v in enumerate(order)}
    chord_of = {}
    for x, y in treedec.incident_adhesions(part):
        u, v = graph.vertices[x], graph.vertices[y]
        if u in pos and v in pos and not graph.adjacent(x, y):
            chord_of[u], chord_of[v] = v, u
    c = pos[center]
    if c - window < 0 or c + window >= len(order):
        raise PartialPart(f"window {window} around {center!r} leaves the visible path")
    if center not in chord_of:
        raise ValueError(f"{center!r} carries no chord")
    if pos[chord_of[center]] < c:
        # walk the path the other way so that the chord points forward
        order.reverse()
        pos = {v: i for i, v in enumerate(order)}
        c = pos[center]
    keep = {v: pos[v] - c for v in order[c - window : c + window + 1]}
    edges = [(keep[order[i]], keep[order[i + 1]]) for i in range(c - window, c + window)]
    virtual = sorted({tuple(sorted((keep[u], keep[v]))) for u, v in chord_of.items() if u in keep and v in keep})
    adj = adjacency_from_edges(sorted(keep.values()), edges + virtual)
    return Torso(part, tuple(sorted(adj)), adj, tuple(virtual), windowed=True)


def torso_matches(t: Torso, template: TemplateGraph) -> bool:
    return find_isomorphism(t.adjacency, template.adjacency) is not None


# -- stabilizers -------------------------------------------------------------


@dataclass(frozen=True)
class StabilizerComparison:
    part: int
    computed: frozenset[str]
    predicted: frozenset[str]
    generators: tuple[str, ...]
    # conjugating element when the prediction is transported from another part
    conjugator: str = ""
    windowed: bool = False

    @property
    def match(self) -> bool:
        return self.computed == self.predicted

    def as_dict(self) -> dict:
        return {
            "part": self.part,
            "generators": list(self.generators),
            "conjugator": self.conjugator,
            "computed": sorted(self.computed, key=shortlex_key),
            "predicted": sorted(self.predicted, key=shortlex_key),
            "size": len(self.computed),
            "match": self.match,
            "windowed": self.windowed,
        }


def _reference_parts(family: Family, n: int) -> list[tuple[str, tuple[str, ...]]]:
    """(a vertex singling out a part at the identity, generators of its stabilizer)."""
    if family is Family.P1:
        return [("A", ("ba",))]
    if family is Family.P2:
        return [("bA", ("bAba", "b"))]
    if family is Family.P3:
        return [("a", ("ba", "b")), ("c", ("bc", "b"))]
    if family is Family.P4:
        return [("bc", ("bcba",))]
    if family is Family.P5:
        return [("a", ("a",)), ("b", ("b" + "a" * n, "b"))]
    if family is Family.P6:
        return [("b", ("bc", "b")), ("a", ("a" + "bc" * n, "a"))]
    return [("b", ("bc", "b")), ("a", ("a" + "bc" * n + "b", "a"))]


def _closure_in(rs: RewriteSystem, gens: Sequence[str], allowed: set[str]) -> frozenset[str]:
    """Elements of ``<gens>`` reachable from the identity without leaving ``allowed``."""
    gens = [rs.nf(g) for g in gens] + [rs.invert(g) for g in gens]
    seen = {""}
    queue = deque([""])
    while queue:
        h = queue.popleft()
        for g in gens:
            k = rs.nf(h + g)
            if k in allowed and k not in seen:
                seen.add(k)
                queue.append(k)
    return frozenset(seen)


def stabilizer_elements(
    treedec: TreeDecomposition,
    ball: CayleyBall | DepthGraph | None,
    rs: RewriteSystem | None,
    part: int,
) -> StabilizerComparison:
    """Elements of a part at the identity that map the part into itself, with the prediction.

    Complete parts are tested exactly.  For a path-shaped partial part
    (the infinite dihedral parts) its reliable core is compared with the
    predicted subgroup's elements among the reliable vertices instead.
    """
    graph = treedec.graph
    cball = graph.ball
    if cball is None:
        raise ValueError("stabilizers need a Cayley ball")
    rs = rs or cball.rs
    family, n = cball.spec.family, cball.spec.n
    words = set(graph.ids(treedec.parts[part]))
    if "" not in words:
        raise ValueError(f"part {part} does not contain the identity")
    windowed = part in treedec.partial
    if windowed:
        if part_structure(treedec, graph, part, allow_partial=True).kind != "Path":
            raise PartialPart(f"part {part} touches the ball boundary")
        near = {v for v in range(len(graph)) if graph.radius - graph.depth[v] <= treedec.reliable_radius}
        words = set(graph.ids(treedec.core(part, graph.index[""]) & near))

    refs = []
    for marker, gens in _reference_parts(family, n):
        ref = treedec.part_containing("", rs.nf(marker))
        if ref is not None:
            refs.append((ref, gens))
    reliable = {
        graph.vertices[v]
        for v in range(len(graph))
        if graph.radius - graph.depth[v] <= treedec.reliable_radius
    }
    for ref, gens in refs:
        ref_words = set(graph.ids(treedec.parts[ref]))
        for h in sorted(ref_words, key=shortlex_key):
            g = rs.invert(h)
            # part == g . ref, so its stabilizer is g H g^-1
            if ref == part and h != "":
                continue
            if ref != part and (windowed or _translate_set(rs, g, ref_words) != words):
                continue
            conj = [rs.nf(g + w + h) for w in gens]
            if windowed:
                computed = frozenset(words)
                predicted = _closure_in(rs, conj, reliable)
            else:
                computed = frozenset(
                    s for s in words if _translate_set(rs, s, words) == words
                )
                predicted = rs.subgroup(conj)
            return StabilizerComparison(part, computed, predicted, tuple(gens), g, windowed)
    raise ValueError(f"no reference part predicts the stabilizer of part {part}")


def transplant_orbit(orbit: NestedOrbit, ball: CayleyBall | DepthGraph) -> NestedOrbit:
    """The orbit of ``orbit``'s seed pair inside a different (usually larger) ball.

    Nestedness is not re-checked; this only serves to look at parts through
    a wider window than the ball the orbit was verified on.
    """
    graph = as_graph(ball)
    x, y = orbit.seed.pair
    seed = Separation(graph, graph.index[x], graph.index[y], orbit.seed.margin)
    return NestedOrbit(seed, orbit.kind, orbit.offset, tuple(orbit_translates(graph, seed)))
