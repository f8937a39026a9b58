"""Vertex cuts, 2-separators, their local type, and nested orbits of them.

A 2-separator ``{x, y}`` of a ball is valid when deleting it leaves at least
two components that each reach depth ``margin``; this is how a finite ball
stands in for "separates two ends".
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Collection, Hashable, Iterable, Iterator, Mapping

from .cayley import CayleyBall
from .graphs import DepthGraph, prune_dangling, separating_cut_vertices

DEFAULT_MARGIN = 3


class SameVertex(ValueError):
    pass


class AdjacentPair(ValueError):
    pass


class BallTooSmall(ValueError):
    pass


class InvalidSeparator(ValueError):
    pass


class MalformedSeparator(ValueError):
    pass


class NotTypeIII(ValueError):
    pass


class NoNestedOrbit(Exception):
    pass


def as_graph(ball: CayleyBall | DepthGraph) -> DepthGraph:
    return ball if isinstance(ball, DepthGraph) else DepthGraph.from_ball(ball)


# -- max-flow ----------------------------------------------------------------


def min_vertex_cut(
    graph: DepthGraph | Mapping[Hashable, Iterable[Hashable]], u: Hashable, v: Hashable
) -> tuple[int, frozenset]:
    """Fewest vertices separating non-adjacent ``u`` and ``v``, with one such cut.

    Unit-capacity max-flow on the split graph (``w_in -> w_out`` carries one
    unit), augmenting along shortest residual paths.
    """
    if isinstance(graph, DepthGraph):
        adj = {graph.vertices[i]: [graph.vertices[j] for j in nb] for i, nb in enumerate(graph.nbrs)}
    else:
        adj = {w: list(nb) for w, nb in graph.items()}
        for w, nb in list(adj.items()):
            for z in nb:
                adj.setdefault(z, [])
                if w not in adj[z]:
                    adj[z].append(w)
    if u == v:
        raise SameVertex(f"source and sink are both {u!r}")
    if v in adj.get(u, ()):
        raise AdjacentPair(f"{u!r} and {v!r} are adjacent; no vertex cut separates them")
    inf = len(adj) + 1
    arcs: dict[tuple, list[tuple]] = {}
    cap: dict[tuple[tuple, tuple], int] = {}

    def arc(p: tuple, q: tuple, c: int) -> None:
        arcs.setdefault(p, []).append(q)
        arcs.setdefault(q, []).append(p)
        cap[(p, q)] = cap.get((p, q), 0) + c
        cap.setdefault((q, p), 0)

    for w, nb in adj.items():
        arc((w, 0), (w, 1), inf if w in (u, v) else 1)
        for z in nb:
            arc((w, 1), (z, 0), inf)
    source, sink = (u, 1), (v, 0)

    def reach() -> dict[tuple, tuple | None]:
        parent: dict[tuple, tuple | None] = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            p = queue.popleft()
            for q in arcs.get(p, ()):
                if q not in parent and cap[(p, q)] > 0:
                    parent[q] = p
                    queue.append(q)
        return parent

    flow = 0
    while True:
        parent = reach()
        if sink not in parent:
            break
        q = sink
        while parent[q] is not None:
            p = parent[q]
            cap[(p, q)] -= 1
            cap[(q, p)] += 1
            q = p
        flow += 1
    cut = frozenset(w for w in adj if (w, 0) in parent and (w, 1) not in parent)
    return flow, cut


# -- separations -------------------------------------------------------------


@dataclass(frozen=True)
class Separation:
    """The 2-separation of a ball cut out by ``{x, y}`` (vertex positions, ``x < y``).

    Side A is the component holding the least deep vertex; side B is the
    union of all other components.
    """

    graph: DepthGraph = field(repr=False, compare=False)
    x: int
    y: int
    margin: int

    def __post_init__(self) -> None:
        if self.x == self.y:
            raise SameVertex("separator vertices coincide")
        if self.x > self.y:
            a, b = self.y, self.x
            object.__setattr__(self, "x", a)
            object.__setattr__(self, "y", b)

    @property
    def pair(self) -> tuple[Hashable, Hashable]:
        return self.graph.vertices[self.x], self.graph.vertices[self.y]

    @cached_property
    def components(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(c) for c in self.graph.components((self.x, self.y)))

    @cached_property
    def deep_components(self) -> tuple[frozenset[int], ...]:
        depth = self.graph.depth
        return tuple(c for c in self.components if any(depth[v] >= self.margin for v in c))

    @property
    def valid(self) -> bool:
        return len(self.deep_components) >= 2

    @cached_property
    def _sides(self) -> tuple[frozenset[int], frozenset[int]]:
        if not self.valid:
            raise InvalidSeparator(f"{self.pair} does not separate two deep vertices")
        depth = self.graph.depth
        least = min(v for c in self.deep_components for v in c if depth[v] >= self.margin)
        side_a = next(c for c in self.components if least in c)
        side_b = frozenset().union(*(c for c in self.components if c is not side_a))
        return side_a, side_b

    @property
    def side_a(self) -> frozenset[int]:
        return self._sides[0]

    @property
    def side_b(self) -> frozenset[int]:
        return self._sides[1]

    def _touches_both(self, comp: frozenset[int]) -> bool:
        nbrs = self.graph.nbrs
        hit_x = any(v in comp for v in nbrs[self.x])
        hit_y = any(v in comp for v in nbrs[self.y])
        return hit_x and hit_y

    @cached_property
    def tight(self) -> tuple[bool, bool]:
        side_a, _ = self._sides
        rest = [c for c in self.components if c != side_a]
        return self._touches_both(side_a), any(self._touches_both(c) for c in rest)

    @cached_property
    def depth_witness(self) -> tuple[int, int]:
        depth = self.graph.depth
        return max(depth[v] for v in self.side_a), max(depth[v] for v in self.side_b)

    def closed_sides(self) -> tuple[frozenset[int], frozenset[int]]:
        sep = {self.x, self.y}
        return self.side_a | sep, self.side_b | sep

    def as_dict(self) -> dict:
        ids = self.graph.vertices
        try:
            kind = classify_type(self.graph, self).tag.value
        except MalformedSeparator:
            kind = None
        return {
            "x": ids[self.x],
            "y": ids[self.y],
            "type": kind,
            "tight": list(self.tight),
            "sides": {"A": self.graph.ids(self.side_a), "B": self.graph.ids(self.side_b)},
        }


def make_separation(graph: DepthGraph, x: Hashable, y: Hashable, margin: int) -> Separation:
    """Separation on the vertex ids ``x`` and ``y``; raises if it is not valid."""
    sep = Separation(graph, graph.index[x], graph.index[y], margin)
    if not sep.valid:
        raise InvalidSeparator(f"{(x, y)} does not separate two deep vertices")
    return sep


# -- connectivity and enumeration --------------------------------------------


def _check_margin(graph: DepthGraph, margin: int) -> None:
    if margin < 0:
        raise ValueError("margin must be >= 0")
    if graph.radius < 2 * margin:
        raise BallTooSmall(f"radius {graph.radius} < 2 * margin {margin}")


def iter_separator_pairs(graph: DepthGraph, margin: int) -> Iterator[tuple[int, int]]:
    """Valid interior 2-separators as position pairs ``x < y``, in sorted order.

    Dangling trees without deep vertices are pruned first; a pair touching
    such a tree is valid exactly when its other vertex separates the pruned
    core on its own.
    """
    deep = [d >= margin for d in graph.depth]
    interior = [d >= 1 for d in graph.depth]
    alive = prune_dangling(graph, deep)
    base_comps, base_cuts = separating_cut_vertices(graph, alive, deep)
    base_cut_set = set(base_cuts)
    pruned_interior = [v for v in range(len(graph)) if interior[v] and not alive[v]]
    for x in range(len(graph)):
        if not interior[x]:
            continue
        if alive[x]:
            comps, cuts = separating_cut_vertices(graph, alive, deep, skip=x)
            ys = {y for y in cuts if interior[y]}
            if comps >= 2:
                ys.update(pruned_interior)
        else:
            ys = {y for y in base_cut_set if interior[y]}
            if base_comps >= 2:
                ys.update(pruned_interior)
        for y in sorted(ys):
            if y > x:
                yield x, y


def enumerate_2_separators(ball: CayleyBall | DepthGraph, margin: int = DEFAULT_MARGIN) -> list[Separation]:
    graph = as_graph(ball)
    _check_margin(graph, margin)
    return [Separation(graph, x, y, margin) for x, y in iter_separator_pairs(graph, margin)]


def local_connectivity(ball: CayleyBall | DepthGraph, margin: int = DEFAULT_MARGIN) -> int:
    """Least vertex cut between non-adjacent vertices of depth >= ``margin``."""
    graph = as_graph(ball)
    _check_margin(graph, margin)
    deep = [d >= margin for d in graph.depth]
    alive = prune_dangling(graph, deep)
    comps, cuts = separating_cut_vertices(graph, alive, deep)
    if comps >= 2:
        return 0
    if cuts:
        return 1
    for x in range(len(graph)):
        if alive[x] and separating_cut_vertices(graph, alive, deep, skip=x)[1]:
            return 2
    deep_ids = [graph.vertices[v] for v in range(len(graph)) if deep[v]]
    best = None
    for i, u in enumerate(deep_ids):
        for v in deep_ids[i + 1 :]:
            if not graph.adjacent(graph.index[u], graph.index[v]):
                k, _ = min_vertex_cut(graph, u, v)
                best = k if best is None else min(best, k)
    return len(graph) - 1 if best is None else best


# -- types -------------------------------------------------------------------


class SepType(str, enum.Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    TYPE_III = "TypeIII"


@dataclass(frozen=True)
class SeparationType:
    tag: SepType
    # edges from (x, y) into side A and side B
    into_a: tuple[int, int]
    into_b: tuple[int, int]

    @property
    def orientation(self) -> tuple[str, str] | None:
        """For Type II, which side is small (one edge from each separator vertex)."""
        if self.tag is not SepType.TYPE_II:
            return None
        return ("small", "big") if self.into_a == (1, 1) else ("big", "small")


def _split(graph: DepthGraph, sep: Separation, v: int) -> tuple[int, int]:
    side_a = sep.side_a
    other = sep.y if v == sep.x else sep.x
    into_a = into_b = 0
    for w in graph.nbrs[v]:
        if w == other:
            continue
        if w in side_a:
            into_a += 1
        else:
            into_b += 1
    return into_a, into_b


def classify_type(ball: CayleyBall | DepthGraph, sep: Separation) -> SeparationType:
    graph = sep.graph if isinstance(ball, CayleyBall) else ball
    xa, xb = _split(graph, sep, sep.x)
    ya, yb = _split(graph, sep, sep.y)
    into_a, into_b = (xa, ya), (xb, yb)
    if graph.adjacent(sep.x, sep.y):
        if (xa, xb) == (1, 1) and (ya, yb) == (1, 1):
            return SeparationType(SepType.TYPE_I, into_a, into_b)
    elif {(xa, xb), (ya, yb)} <= {(2, 1), (1, 2)}:
        tag = SepType.TYPE_II if (xa, xb) == (ya, yb) else SepType.TYPE_III
        return SeparationType(tag, into_a, into_b)
    raise MalformedSeparator(
        f"separator {sep.pair} sends {into_a} edges to A and {into_b} to B; not a cubic 2-separator shape"
    )


def type3_to_type2(ball: CayleyBall | DepthGraph, sep: Separation) -> Separation:
    """Move the separator vertex with a single A-edge onto that neighbour.

    For ``{x, y}`` of Type III where ``x`` has one neighbour ``x'`` in A,
    the result is the separation on ``{x', y}``; it is Type II and tight.
    """
    graph = sep.graph
    kind = classify_type(graph, sep)
    if kind.tag is not SepType.TYPE_III:
        raise NotTypeIII(f"separator {sep.pair} is {kind.tag.value}")
    lone = sep.x if kind.into_a[0] == 1 else sep.y
    keep = sep.y if lone == sep.x else sep.x
    (shifted,) = [w for w in graph.nbrs[lone] if w in sep.side_a]
    return Separation(graph, shifted, keep, sep.margin)


def _leq(first: tuple[frozenset, frozenset], second: tuple[frozenset, frozenset]) -> bool:
    return first[0] <= second[0] and first[1] >= second[1]


def nested(sep1: Separation, sep2: Separation) -> bool:
    """Whether the two separations are comparable in some orientation."""
    a, b = sep1.closed_sides()
    c, d = sep2.closed_sides()
    return any(
        _leq(first, second) for first in ((a, b), (b, a)) for second in ((c, d), (d, c))
    )


# -- nested orbits -----------------------------------------------------------


@dataclass(frozen=True)
class NestedOrbit:
    seed: Separation
    kind: SeparationType
    # x^-1 y for the seed; every translate is {g, g.offset}
    offset: str
    translates: tuple[Separation, ...]
    # candidates rejected before the seed, with the reason
    rejected: tuple[tuple[tuple[Hashable, Hashable], str], ...] = ()

    def pairs(self) -> list[tuple[Hashable, Hashable]]:
        return [s.pair for s in self.translates]


def _masks(graph: DepthGraph, sep: Separation) -> tuple[int, int]:
    a, b = sep.closed_sides()
    return sum(1 << v for v in a), sum(1 << v for v in b)


def _pairwise_nested(graph: DepthGraph, seps: list[Separation]) -> tuple[int, int] | None:
    """First crossing pair (by position in ``seps``), or ``None``."""
    masks = [_masks(graph, s) for s in seps]
    for i, (a, b) in enumerate(masks):
        na, nb = ~a, ~b
        for j in range(i + 1, len(masks)):
            c, d = masks[j]
            # (a,b) <= (c,d) or (d,c); (b,a) <= (c,d) or (d,c)
            if (a & ~c == 0 and d & nb == 0) or (a & ~d == 0 and c & nb == 0):
                continue
            if (b & ~c == 0 and d & na == 0) or (b & ~d == 0 and c & na == 0):
                continue
            return i, j
    return None


def orbit_translates(graph: DepthGraph, seed: Separation, min_depth: int = 1) -> list[Separation]:
    """All ``{g.x, g.y}`` with both vertices at depth >= ``min_depth``."""
    ball = graph.ball
    if ball is None:
        raise ValueError("translates need a Cayley ball")
    rs = ball.rs
    x, y = seed.pair
    offsets = {rs.multiply(rs.invert(x), y), rs.multiply(rs.invert(y), x)}
    found = set()
    for u in range(len(graph)):
        if graph.depth[u] < min_depth:
            continue
        for off in offsets:
            v = graph.index.get(rs.nf(graph.vertices[u] + off))
            if v is not None and graph.depth[v] >= min_depth:
                found.add((min(u, v), max(u, v)))
    return [Separation(graph, u, v, seed.margin) for u, v in sorted(found)]


def check_orbit(graph: DepthGraph, seed: Separation) -> tuple[list[Separation], str | None]:
    """Interior translates of ``seed`` and the first reason they fail, if any.

    Translates that do not separate two deep vertices are kept in the orbit
    but exempt from the tightness test, which is meaningless once one side
    is cut off by the ball boundary.
    """
    translates = orbit_translates(graph, seed)
    checked = [t for t in translates if t.valid]
    for t in checked:
        if not all(t.tight):
            return translates, f"translate {t.pair} is not tight"
    crossing = _pairwise_nested(graph, checked)
    if crossing is not None:
        i, j = crossing
        return translates, f"translates {checked[i].pair} and {checked[j].pair} cross"
    return translates, None


def extract_nested_orbit(
    ball: CayleyBall | DepthGraph,
    seps: Iterable[Separation] | None = None,
    margin: int = DEFAULT_MARGIN,
    prefer: SepType | None = None,
    offsets: Collection[str] = (),
) -> NestedOrbit:
    """First Type I or II separator (in sorted order) whose interior orbit is nested and tight.

    A graph can carry several nested orbits.  Candidates whose offset
    ``x^-1 y`` (or its inverse) is listed in ``offsets`` are tried first,
    then those of type ``prefer``, then the rest.
    """
    graph = as_graph(ball)
    if seps is None:
        _check_margin(graph, margin)
        seps = (Separation(graph, x, y, margin) for x, y in iter_separator_pairs(graph, margin))
    rs = graph.ball.rs if graph.ball is not None else None
    wanted = {rs.nf(w) for w in offsets} if rs is not None else set()
    rejected: list[tuple[tuple[Hashable, Hashable], str]] = []
    deferred: list[list[tuple[Separation, SeparationType, str]]] = [[], []]

    def attempt(sep: Separation, kind: SeparationType, offset: str) -> NestedOrbit | None:
        translates, reason = check_orbit(graph, sep)
        if reason is not None:
            rejected.append((sep.pair, reason))
            return None
        return NestedOrbit(sep, kind, offset, tuple(translates), tuple(rejected))

    for sep in seps:
        try:
            kind = classify_type(graph, sep)
        except MalformedSeparator:
            rejected.append((sep.pair, "malformed"))
            continue
        if kind.tag is SepType.TYPE_III:
            rejected.append((sep.pair, "TypeIII"))
            continue
        x, y = sep.pair
        offset = rs.multiply(rs.invert(x), y) if rs is not None else ""
        if wanted and offset not in wanted and rs.invert(offset) not in wanted:
            tier = 0 if prefer is None or kind.tag is prefer else 1
            deferred[tier].append((sep, kind, offset))
            continue
        if not wanted and prefer is not None and kind.tag is not prefer:
            deferred[1].append((sep, kind, offset))
            continue
        found = attempt(sep, kind, offset)
        if found is not None:
            return found
    for sep, kind, offset in deferred[0] + deferred[1]:
        found = attempt(sep, kind, offset)
        if found is not None:
            return found
    raise NoNestedOrbit(f"no nested orbit among {len(rejected)} candidate separators; try a larger radius")
