"""Finite balls of the cubic Cayley graphs, with depth annotations and export."""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .groups import (
    DEFAULT_RULE_CAP,
    FamilySpec,
    RewriteSystem,
    build_rewrite_system,
    shortlex_key,
)

DEFAULT_VERTEX_CAP = 200_000
FORMATS = ("dot", "graphml", "json")


class BallTooLarge(Exception):
    def __init__(self, cap: int):
        super().__init__(f"ball exceeds {cap} vertices")
        self.cap = cap


class UnknownFormat(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Edge:
    """``u -- v`` with generator ``label``; for a non-involution ``a`` this is ``u -> u.a``."""

    u: str
    v: str
    label: str


@dataclass(frozen=True)
class CayleyBall:
    spec: FamilySpec
    radius: int
    rs: RewriteSystem = field(repr=False, compare=False)
    vertices: tuple[str, ...]
    depth: dict[str, int] = field(repr=False)
    edges: tuple[Edge, ...] = field(repr=False)
    # vertex -> generator symbol -> neighbour, for neighbours inside the ball
    steps: dict[str, dict[str, str]] = field(repr=False, compare=False)

    @property
    def directed(self) -> bool:
        return not self.spec.a_is_involution

    def neighbors(self, v: str) -> list[str]:
        return sorted(set(self.steps[v].values()), key=shortlex_key)

    def degree(self, v: str) -> int:
        return len(set(self.steps[v].values()))

    def adjacency(self) -> dict[str, set[str]]:
        return {v: set(self.steps[v].values()) for v in self.vertices}

    def has_edge(self, u: str, v: str) -> bool:
        return v in self.steps[u].values()

    def interior(self, min_depth: int = 1) -> list[str]:
        return [v for v in self.vertices if self.depth[v] >= min_depth]

    def translate(self, g: str, v: str) -> str:
        return self.rs.nf(g + v)

    def undirected_edges(self) -> Iterator[tuple[str, str]]:
        for e in self.edges:
            yield e.u, e.v

    def __contains__(self, v: object) -> bool:
        return v in self.depth


def _edges_from_steps(spec: FamilySpec, steps: dict[str, dict[str, str]]) -> tuple[Edge, ...]:
    edges = set()
    for u, out in steps.items():
        for s, v in out.items():
            if s == "A":
                continue
            if s == "a" and not spec.a_is_involution:
                edges.add(Edge(u, v, "a"))
            else:
                lo, hi = sorted((u, v), key=shortlex_key)
                edges.add(Edge(lo, hi, s))
    return tuple(sorted(edges, key=lambda e: (shortlex_key(e.u), shortlex_key(e.v), e.label)))


def build_ball(
    spec: FamilySpec,
    radius: int,
    rs: RewriteSystem | None = None,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
    rule_cap: int = DEFAULT_RULE_CAP,
) -> CayleyBall:
    """Breadth-first ball of ``radius`` around the identity."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if rs is None:
        rs = build_rewrite_system(spec, rule_cap)
    gens = spec.generators
    dist = {"": 0}
    queue = deque([""])
    while queue:
        u = queue.popleft()
        if dist[u] == radius:
            continue
        for s in gens:
            v = rs.nf(u + s)
            if v not in dist:
                dist[v] = dist[u] + 1
                if len(dist) > vertex_cap:
                    raise BallTooLarge(vertex_cap)
                queue.append(v)
    steps: dict[str, dict[str, str]] = {}
    for u in dist:
        out = {}
        for s in gens:
            v = rs.nf(u + s)
            if v in dist:
                out[s] = v
        steps[u] = out
    vertices = tuple(sorted(dist, key=shortlex_key))
    depth = {v: radius - dist[v] for v in vertices}
    for v, out in steps.items():
        if v in out.values():
            raise ValueError(f"self-loop at {v!r}: presentation is not cubic")
    return CayleyBall(spec, radius, rs, vertices, depth, _edges_from_steps(spec, steps), steps)


def growth_sequence(spec: FamilySpec, radius: int, rs: RewriteSystem | None = None) -> list[int]:
    """Sphere sizes ``|S_0|, ..., |S_radius|``."""
    ball = build_ball(spec, radius, rs)
    sizes = [0] * (radius + 1)
    for v in ball.vertices:
        sizes[radius - ball.depth[v]] += 1
    return sizes


# -- export -----------------------------------------------------------------


def _meta(ball: CayleyBall) -> dict:
    return {"family": ball.spec.family.value, "n": ball.spec.n, "m": ball.spec.m, "radius": ball.radius}


def to_json(ball: CayleyBall) -> dict:
    return {
        "vertices": [{"id": v, "depth": ball.depth[v]} for v in ball.vertices],
        "edges": [{"u": e.u, "v": e.v, "label": e.label} for e in ball.edges],
        "meta": _meta(ball),
    }


def _dot_id(v: str) -> str:
    return json.dumps(v)


def _to_dot(ball: CayleyBall) -> str:
    lines = [f"graph {_dot_id(str(ball.spec))} {{"]
    for v in ball.vertices:
        lines.append(f"  {_dot_id(v)} [depth={ball.depth[v]}];")
    for e in ball.edges:
        extra = ", dir=forward" if e.label == "a" and ball.directed else ""
        lines.append(f"  {_dot_id(e.u)} -- {_dot_id(e.v)} [label={e.label}{extra}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _to_graphml(ball: CayleyBall) -> bytes:
    ns = "http://graphml.graphdrawing.org/xmlns"
    root = ET.Element("graphml", {"xmlns": ns})
    ET.SubElement(root, "key", {"id": "depth", "for": "node", "attr.name": "depth", "attr.type": "int"})
    ET.SubElement(root, "key", {"id": "label", "for": "edge", "attr.name": "label", "attr.type": "string"})
    default = "directed" if ball.directed else "undirected"
    graph = ET.SubElement(root, "graph", {"id": str(ball.spec), "edgedefault": default})
    for k, val in _meta(ball).items():
        graph.set(f"meta_{k}", "" if val is None else str(val))
    index = {v: f"n{i}" for i, v in enumerate(ball.vertices)}
    for v in ball.vertices:
        node = ET.SubElement(graph, "node", {"id": index[v]})
        ET.SubElement(node, "data", {"key": "depth"}).text = str(ball.depth[v])
        node.set("word", v)
    for i, e in enumerate(ball.edges):
        attrs = {"id": f"e{i}", "source": index[e.u], "target": index[e.v]}
        if ball.directed:
            attrs["directed"] = "true" if e.label == "a" else "false"
        el = ET.SubElement(graph, "edge", attrs)
        ET.SubElement(el, "data", {"key": "label"}).text = e.label
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def export(ball: CayleyBall, fmt: str) -> bytes:
    if fmt == "json":
        return (json.dumps(to_json(ball), indent=1, sort_keys=True) + "\n").encode()
    if fmt == "dot":
        return _to_dot(ball).encode()
    if fmt == "graphml":
        return _to_graphml(ball)
    raise UnknownFormat(f"unknown export format {fmt!r}; expected one of {FORMATS}")


def parse_ball(data: bytes | str | dict, rs: RewriteSystem | None = None) -> CayleyBall:
    """Inverse of ``export(ball, "json")``; the rewriting system is rebuilt from ``meta``."""
    doc = data if isinstance(data, dict) else json.loads(data)
    meta = doc["meta"]
    spec = FamilySpec(meta["family"], meta["n"], meta.get("m"))
    if rs is None:
        rs = build_rewrite_system(spec)
    depth = {item["id"]: item["depth"] for item in doc["vertices"]}
    steps: dict[str, dict[str, str]] = {v: {} for v in depth}
    for item in doc["edges"]:
        u, v, s = item["u"], item["v"], item["label"]
        steps[u][s] = v
        if s == "a" and not spec.a_is_involution:
            steps[v]["A"] = u
        else:
            steps[v][s] = u
    vertices = tuple(sorted(depth, key=shortlex_key))
    return CayleyBall(
        spec, meta["radius"], rs, vertices, depth, _edges_from_steps(spec, steps), steps
    )
