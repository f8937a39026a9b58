"""Template graphs for part and torso shapes, and a small exact isomorphism test."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping


class BadParameter(ValueError):
    pass


Adjacency = dict[Hashable, set[Hashable]]


def adjacency_from_edges(vertices: Iterable[Hashable], edges: Iterable[tuple[Hashable, Hashable]]) -> Adjacency:
    adj: Adjacency = {v: set() for v in vertices}
    for u, v in edges:
        if u == v:
            raise ValueError(f"self-loop at {u!r}")
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    return adj


@dataclass(frozen=True)
class TemplateGraph:
    """A named shape; ``size`` is the cycle length, ``2n`` for V, chord span for R."""

    kind: str
    size: int
    adjacency: Adjacency = field(repr=False, compare=False)
    window: int | None = None
    labels: tuple[str, ...] = ()

    @property
    def name(self) -> str:
        if self.kind == "V":
            return f"V({self.size})"
        if self.kind == "R":
            return f"R_truncated({self.size}, {self.window})"
        return f"{self.kind}({self.size})"

    def as_dict(self) -> dict:
        out = {"kind": self.kind, "size": self.size, "name": self.name}
        if self.window is not None:
            out["window"] = self.window
        if self.labels:
            out["labels"] = list(self.labels)
        return out


def construct_V(two_n: int) -> TemplateGraph:
    """Cycle on ``two_n`` vertices plus the chords joining antipodal vertices."""
    if two_n < 4 or two_n % 2:
        raise BadParameter(f"V needs an even size >= 4, got {two_n}")
    half = two_n // 2
    edges = [(i, (i + 1) % two_n) for i in range(two_n)]
    edges += [(i, i + half) for i in range(half)]
    return TemplateGraph("V", two_n, adjacency_from_edges(range(two_n), edges))


def construct_R(m: int, window: int) -> TemplateGraph:
    """Path on ``[-window, window]`` with chords ``{2i, 2i + 2m + 1}`` inside the window."""
    if m < 1:
        raise BadParameter(f"R needs m >= 1, got {m}")
    if window < 2 * m + 2:
        raise BadParameter(f"window {window} < 2m + 2 = {2 * m + 2}")
    span = 2 * m + 1
    verts = range(-window, window + 1)
    edges = [(i, i + 1) for i in range(-window, window)]
    edges += [(i, i + span) for i in verts if i % 2 == 0 and i + span <= window]
    return TemplateGraph("R", span, adjacency_from_edges(verts, edges), window=window)


def cycle_template(length: int) -> TemplateGraph:
    if length < 3:
        raise BadParameter(f"cycle length must be >= 3, got {length}")
    return TemplateGraph("Cycle", length, adjacency_from_edges(range(length), [(i, (i + 1) % length) for i in range(length)]))


def _bfs_order(adj: Mapping[Hashable, set]) -> list[Hashable]:
    order: list[Hashable] = []
    seen = set()
    for start in sorted(adj, key=lambda v: (-len(adj[v]), repr(v))):
        if start in seen:
            continue
        seen.add(start)
        queue = deque([start])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in sorted(adj[u], key=repr):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return order


def find_isomorphism(
    g1: Mapping[Hashable, Iterable[Hashable]],
    g2: Mapping[Hashable, Iterable[Hashable]],
    limit: int = 100,
) -> dict | None:
    """An isomorphism ``g1 -> g2`` by backtracking, or ``None``.

    Vertices of ``g1`` are placed in breadth-first order, so every vertex
    after the first of its component has an already placed neighbour and its
    image is confined to that neighbour's image's neighbours.
    """
    a = {u: set(nb) for u, nb in g1.items()}
    b = {u: set(nb) for u, nb in g2.items()}
    if len(a) > limit or len(b) > limit:
        raise ValueError(f"isomorphism test limited to {limit} vertices")
    if len(a) != len(b):
        return None
    if sum(map(len, a.values())) != sum(map(len, b.values())):
        return None
    if sorted(map(len, a.values())) != sorted(map(len, b.values())):
        return None
    order = _bfs_order(a)
    placed: dict = {}
    used: set = set()

    def candidates(u: Hashable) -> Iterable[Hashable]:
        anchors = [placed[w] for w in a[u] if w in placed]
        pool = b[anchors[0]] if anchors else b.keys()
        return sorted((c for c in pool if c not in used and len(b[c]) == len(a[u])), key=repr)

    def consistent(u: Hashable, c: Hashable) -> bool:
        for w in a[u]:
            if w in placed and placed[w] not in b[c]:
                return False
        mapped_nbrs = sum(1 for w in a[u] if w in placed)
        return mapped_nbrs == sum(1 for z in b[c] if z in used)

    def extend(k: int) -> bool:
        if k == len(order):
            return True
        u = order[k]
        for c in candidates(u):
            if consistent(u, c):
                placed[u] = c
                used.add(c)
                if extend(k + 1):
                    return True
                del placed[u]
                used.discard(c)
        return False

    return dict(placed) if extend(0) else None


def is_isomorphic(g1: Mapping, g2: Mapping, limit: int = 100) -> bool:
    return find_isomorphism(g1, g2, limit) is not None
