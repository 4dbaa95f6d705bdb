"""Universal covers of finite graphs, realized as windowed trees of reduced
edge-paths, with their free deck-transformation actions.

A cover vertex is a tuple of darts (edge id, direction) describing a
non-backtracking path from the basepoint lift; loops contribute two darts.
The spanning tree comes from a deterministic breadth-first traversal, and
each non-tree edge yields one deck generator (so the deck group is free of
rank E - V + 1).  Distances in the cover are exact tree distances computed
from weighted depths and longest common prefixes.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import groups, spaces
from .actions import GroupAction
from .exact import DomainError, WindowError, fmt_rational, rational


def _reduce(path):
    out = []
    for dart in path:
        if out and out[-1][0] == dart[0] and out[-1][1] != dart[1]:
            out.pop()
        else:
            out.append(dart)
    return tuple(out)


def _inverse(path):
    return tuple((eid, 1 - direction) for eid, direction in reversed(path))


class DeckFamily(groups.GroupFamily):
    """Free deck group presented by reduced dart loops at the basepoint."""

    def __init__(self, cover: "CoverData"):
        self.cover = cover
        self.name = f"deck(b1={len(cover.generator_words)})"

    def identity(self):
        return ()

    def generators(self):
        gens = []
        for idx, word in enumerate(self.cover.generator_words):
            gens.append((f"g{idx + 1}", word))
            gens.append((f"g{idx + 1}^-1", _inverse(word)))
        return gens

    def multiply(self, a, b):
        return _reduce(a + b)

    def inverse(self, a):
        return _inverse(a)

    def word_length(self, a):
        raise DomainError("deck elements measure length through the cover metric")

    def is_infinite_order(self, a):
        return len(a) > 0

    def subgroup_virtually_nilpotent(self, gens):
        nontrivial = [g for g in gens if g]
        for a, b in itertools.combinations(nontrivial, 2):
            if _reduce(a + b) != _reduce(b + a):
                return False
        return True

    def serialize(self, a):
        return ";".join(f"{eid}{'+' if d else '-'}" for eid, d in a) or "e"


class CoverTreeSpace(spaces.Space):
    """The windowed cover tree as a metric space over dart-path vertices."""

    kind = "cover_tree"

    def __init__(self, cover: "CoverData"):
        self.cover = cover

    def distance(self, x, y):
        cov = self.cover
        common = 0
        for a, b in zip(x, y):
            if a != b:
                break
            common += 1
        prefix_weight = sum(cov.dart_weight(d) for d in x[:common])
        return cov.depth(x) + cov.depth(y) - 2 * prefix_weight

    def support(self):
        return list(self.cover.vertices)

    def is_point(self, x):
        return x in self.cover.vertex_set

    def safe_radius(self, x):
        return self.cover.window - self.cover.depth(x)

    def validate(self):
        return {"kind": self.kind, "ok": True, "issues": [],
                "window": fmt_rational(self.cover.window),
                "vertices": len(self.cover.vertices)}


@dataclass
class CoverData:
    base: spaces.WeightedGraph
    basepoint: object
    window: Fraction
    vertices: list
    vertex_set: set
    depths: dict
    tree_paths: dict          # base vertex -> dart path inside the spanning tree
    generator_words: list     # one reduced loop per non-tree edge
    space: CoverTreeSpace = None

    def dart_weight(self, dart):
        return self.base.edges[dart[0]][2]

    def depth(self, v):
        try:
            return self.depths[v]
        except KeyError:
            raise DomainError(f"vertex {v!r} outside the materialized window")

    def project(self, v):
        vertex = self.basepoint
        for eid, direction in v:
            u, w, _weight = self.base.edges[eid]
            vertex = w if direction == 1 else u
        return vertex

    def lift_of_basepoint(self):
        return ()

    def betti(self) -> int:
        return len(self.generator_words)


class DeckAction(GroupAction):
    rule = "deck"

    def __init__(self, cover: CoverData):
        super().__init__(DeckFamily(cover), cover.space)
        self.cover = cover

    def apply(self, g, point):
        moved = _reduce(g + point)
        if moved not in self.cover.vertex_set:
            raise WindowError(
                "deck image escapes the materialized window; enlarge it")
        return moved

    def elements_moving_near(self, base, center, radius):
        radius = rational(radius)
        base_proj = self.cover.project(base)
        inv_base = _inverse(base)
        rows = []
        for v in self.cover.vertices:
            if self.cover.project(v) != base_proj:
                continue
            d = self.space.distance(center, v)
            if d <= radius:
                g = _reduce(v + inv_base)
                rows.append((g, v, d))
        # exhaustiveness needs the window to dominate the query radius
        if radius > self.space.safe_radius(center):
            raise WindowError(
                f"radius {fmt_rational(radius)} exceeds the cover window",
                required=radius, available=self.space.safe_radius(center))
        return rows

    def quotient_diameter(self, sample=None):
        return self.cover.base.diameter()


def universal_cover(graph: spaces.WeightedGraph, basepoint, window,
                    max_vertices=200_000) -> CoverData:
    """Materialize the universal cover tree out to the given radius.

    The spanning tree is the deterministic shortest-path tree from the
    basepoint (ties broken by point order), non-tree edges give the deck
    generators; the cover is the set of reduced dart paths of weighted
    length <= window.
    """
    if not graph.is_connected():
        raise DomainError("universal cover of a disconnected graph")
    window = rational(window)
    graph.check_point(basepoint)

    # darts_out[v] = [(dart, target, weight)], deterministic order
    darts_out = {v: [] for v in graph.vertices}
    for eid, (a, b, w) in enumerate(graph.edges):
        darts_out[a].append(((eid, 1), b, w))
        darts_out[b].append(((eid, 0), a, w))
    for v in darts_out:
        darts_out[v].sort(key=lambda row: row[0])

    # deterministic shortest-path tree on the base (smallest dart on ties)
    dist = {basepoint: Fraction(0)}
    parent_dart = {basepoint: None}
    heap = [(Fraction(0), spaces.point_key(basepoint), basepoint)]
    done = set()
    while heap:
        d, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for dart, v, w in darts_out[u]:
            if v in done:
                continue
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                parent_dart[v] = dart
                heapq.heappush(heap, (nd, spaces.point_key(v), v))

    tree_darts = {parent_dart[v][0] for v in graph.vertices
                  if parent_dart[v] is not None}
    tree_paths = {}
    for v in graph.vertices:
        path = []
        cur = v
        while parent_dart[cur] is not None:
            eid, direction = parent_dart[cur]
            path.append((eid, direction))
            edge = graph.edges[eid]
            cur = edge[0] if direction == 1 else edge[1]
        tree_paths[v] = tuple(reversed(path))

    generator_words = []
    for eid, (u, v, _w) in enumerate(graph.edges):
        if eid in tree_darts:
            continue
        word = _reduce(tree_paths[u] + ((eid, 1),) + _inverse(tree_paths[v]))
        generator_words.append(word)

    # windowed materialization of reduced dart paths
    root = ()
    depths = {root: Fraction(0)}
    vertices = [root]
    frontier = [(root, basepoint)]
    while frontier:
        nxt = []
        for path, at in frontier:
            for dart, dst, w in darts_out[at]:
                if path and path[-1][0] == dart[0] and path[-1][1] != dart[1]:
                    continue                          # backtracking
                nd = depths[path] + w
                if nd > window:
                    continue
                new_path = path + (dart,)
                depths[new_path] = nd
                vertices.append(new_path)
                nxt.append((new_path, dst))
                if len(vertices) > max_vertices:
                    raise WindowError(
                        f"cover window {fmt_rational(window)} materializes "
                        f"over {max_vertices} vertices",
                        required=len(vertices), available=max_vertices)
        frontier = nxt
    cover = CoverData(base=graph, basepoint=basepoint, window=window,
                      vertices=vertices, vertex_set=set(vertices),
                      depths=depths, tree_paths=tree_paths,
                      generator_words=generator_words)
    cover.space = CoverTreeSpace(cover)
    return cover


def deck_action(cover: CoverData) -> DeckAction:
    return DeckAction(cover)


def deck_action_from_spec(spec, space):
    raise DomainError(
        "deck actions are built from a cover: use universal_cover + deck_action")


def graph_betti(graph: spaces.WeightedGraph):
    """First Betti number E - V + 1 (per component when disconnected)."""
    comps = graph.components()
    if len(comps) == 1:
        return len(graph.edges) - len(graph.vertices) + 1
    report = {}
    for comp in comps:
        cset = set(comp)
        edges = sum(1 for u, v, _w in graph.edges if u in cset and v in cset)
        report[tuple(comp)] = edges - len(comp) + 1
    return report
