"""Index-based graphs with depth annotations, shared by the analysis modules.

Vertices are kept in a canonical order (shortlex for Cayley balls, insertion
order for hand-built fixtures) and referred to by position internally.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

from .cayley import CayleyBall


@dataclass(frozen=True)
class DepthGraph:
    vertices: tuple[Hashable, ...]
    nbrs: tuple[tuple[int, ...], ...] = field(repr=False)
    depth: tuple[int, ...] = field(repr=False)
    radius: int
    ball: CayleyBall | None = field(default=None, repr=False, compare=False)
    index: dict[Hashable, int] = field(default_factory=dict, repr=False, compare=False)
    # (i, j) with i < j -> generator label; empty for unlabelled fixtures
    labels: dict[tuple[int, int], str] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.index:
            self.index.update((v, i) for i, v in enumerate(self.vertices))

    @classmethod
    def from_ball(cls, ball: CayleyBall) -> "DepthGraph":
        index = {v: i for i, v in enumerate(ball.vertices)}
        nbrs = [set() for _ in ball.vertices]
        labels = {}
        for e in ball.edges:
            i, j = index[e.u], index[e.v]
            nbrs[i].add(j)
            nbrs[j].add(i)
            labels[(min(i, j), max(i, j))] = e.label
        return cls(
            ball.vertices,
            tuple(tuple(sorted(s)) for s in nbrs),
            tuple(ball.depth[v] for v in ball.vertices),
            ball.radius,
            ball,
            index,
            labels,
        )

    @classmethod
    def from_adjacency(
        cls,
        adjacency: Mapping[Hashable, Iterable[Hashable]],
        depth: Mapping[Hashable, int] | None = None,
        radius: int | None = None,
    ) -> "DepthGraph":
        """Fixture graph; without ``depth`` every vertex gets depth ``radius`` (default: vertex count)."""
        verts = list(adjacency)
        for nb in adjacency.values():
            verts.extend(w for w in nb if w not in adjacency and w not in verts)
        index = {v: i for i, v in enumerate(verts)}
        nbrs = [set() for _ in verts]
        for v, nb in adjacency.items():
            for w in nb:
                if w == v:
                    raise ValueError(f"self-loop at {v!r}")
                nbrs[index[v]].add(index[w])
                nbrs[index[w]].add(index[v])
        if radius is None:
            radius = max(depth.values()) if depth else len(verts)
        depths = tuple((depth or {}).get(v, radius) for v in verts)
        return cls(tuple(verts), tuple(tuple(sorted(s)) for s in nbrs), depths, radius, None, index)

    def __len__(self) -> int:
        return len(self.vertices)

    def adjacent(self, i: int, j: int) -> bool:
        return j in self.nbrs[i]

    def label(self, i: int, j: int) -> str | None:
        return self.labels.get((min(i, j), max(i, j)))

    def ids(self, idxs: Iterable[int]) -> list[Hashable]:
        return [self.vertices[i] for i in sorted(idxs)]

    def edge_count(self) -> int:
        return sum(len(nb) for nb in self.nbrs) // 2

    def components(self, removed: Iterable[int] = ()) -> list[list[int]]:
        """Connected components of the graph minus ``removed``, ordered by least member."""
        seen = bytearray(len(self.vertices))
        for r in removed:
            seen[r] = 1
        comps = []
        for s in range(len(self.vertices)):
            if seen[s]:
                continue
            seen[s] = 1
            comp = [s]
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w in self.nbrs[u]:
                    if not seen[w]:
                        seen[w] = 1
                        comp.append(w)
                        queue.append(w)
            comps.append(comp)
        return comps

    def induced(self, keep: Sequence[int]) -> "DepthGraph":
        keep = sorted(set(keep))
        pos = {v: k for k, v in enumerate(keep)}
        nbrs = tuple(tuple(pos[w] for w in self.nbrs[v] if w in pos) for v in keep)
        labels = {
            (pos[i], pos[j]): lab
            for (i, j), lab in self.labels.items()
            if i in pos and j in pos
        }
        return DepthGraph(
            tuple(self.vertices[v] for v in keep),
            nbrs,
            tuple(self.depth[v] for v in keep),
            self.radius,
            self.ball,
            labels=labels,
        )


def prune_dangling(graph: DepthGraph, keep: Sequence[bool]) -> list[bool]:
    """Alive flags after repeatedly deleting degree <= 1 vertices not marked ``keep``.

    The deleted vertices form trees hanging off a single surviving vertex, so
    they never separate two kept vertices.
    """
    alive = [True] * len(graph)
    deg = [len(nb) for nb in graph.nbrs]
    stack = [v for v in range(len(graph)) if deg[v] <= 1 and not keep[v]]
    while stack:
        v = stack.pop()
        if not alive[v]:
            continue
        alive[v] = False
        for w in graph.nbrs[v]:
            if alive[w]:
                deg[w] -= 1
                if deg[w] <= 1 and not keep[w]:
                    stack.append(w)
    return alive


def separating_cut_vertices(
    graph: DepthGraph,
    alive: Sequence[bool],
    marked: Sequence[bool],
    skip: int | None = None,
) -> tuple[int, list[int]]:
    """Cut vertices whose removal leaves >= 2 components with a marked vertex.

    Works on the subgraph of ``alive`` vertices minus ``skip``.  Returns the
    number of components of that subgraph containing a marked vertex, and the
    qualifying cut vertices (judged in the subgraph, so components untouched
    by the cut vertex still count).
    """
    n = len(graph)
    nbrs = graph.nbrs
    disc = [0] * n
    low = [0] * n
    below = [0] * n  # marked vertices in the DFS subtree
    split = [0] * n  # separated child subtrees holding a marked vertex
    split_sum = [0] * n
    comp_of = [-1] * n
    comp_total: list[int] = []
    roots = []
    clock = 0
    for root in range(n):
        if not alive[root] or root == skip or disc[root]:
            continue
        cid = len(comp_total)
        roots.append(root)
        clock += 1
        disc[root] = low[root] = clock
        below[root] = 1 if marked[root] else 0
        comp_of[root] = cid
        stack = [(root, -1, iter(nbrs[root]))]
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for w in it:
                if w == skip or not alive[w]:
                    continue
                if not disc[w]:
                    clock += 1
                    disc[w] = low[w] = clock
                    below[w] = 1 if marked[w] else 0
                    comp_of[w] = cid
                    stack.append((w, v, iter(nbrs[w])))
                    advanced = True
                    break
                if w != parent and disc[w] < low[v]:
                    low[v] = disc[w]
            if advanced:
                continue
            stack.pop()
            if parent >= 0:
                below[parent] += below[v]
                if low[v] < low[parent]:
                    low[parent] = low[v]
                if low[v] >= disc[parent]:
                    split_sum[parent] += below[v]
                    if below[v]:
                        split[parent] += 1
        comp_total.append(below[root])
    marked_comps = sum(1 for t in comp_total if t)
    is_root = set(roots)
    cuts = []
    for v in range(n):
        if comp_of[v] < 0:
            continue
        total = comp_total[comp_of[v]]
        others = marked_comps - (1 if total else 0)
        pieces = split[v]
        if v not in is_root:
            rest = total - split_sum[v] - (1 if marked[v] else 0)
            pieces += 1 if rest else 0
        if others + pieces >= 2:
            cuts.append(v)
    return marked_comps, cuts
