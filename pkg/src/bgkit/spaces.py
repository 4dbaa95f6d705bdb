"""Concrete metric-space realizations with exact rational distances.

Five variants: explicit finite metrics, weighted graphs (loops and multi
edges allowed), Cayley graphs of the built-in group families, the glued
line (a line with an interval hair attached at every eps*k), and metric
tripods.  All distance queries return `Fraction`s; ball enumeration is
lazy and refuses to run past the declared safe window instead of silently
truncating.
"""

from __future__ import annotations

import heapq
import itertools
from fractions import Fraction

from scipy.integrate import quad
import math

from .exact import DomainError, WindowError, rational, fmt_rational
from . import groups


def point_key(p) -> str:
    """Canonical total order on points of any one space (for determinism)."""
    return repr(p)


class Space:
    kind = "abstract"

    def distance(self, x, y) -> Fraction:
        raise NotImplementedError

    def support(self):
        """Iterable of the canonical countable support (may need a window)."""
        raise NotImplementedError

    def ball(self, x, r, closed=False):
        """Sorted [(point, distance)] over support points with d < r (d <= r)."""
        r = rational(r)
        hits = []
        for p in self.support_near(x, r):
            d = self.distance(x, p)
            if (d <= r) if closed else (d < r):
                hits.append((p, d))
        hits.sort(key=lambda pd: (pd[1], point_key(pd[0])))
        return hits

    def support_near(self, x, r):
        """Support points possibly within r of x; default scans everything."""
        return self.support()

    def is_point(self, x) -> bool:
        raise NotImplementedError

    def check_point(self, x):
        if not self.is_point(x):
            raise DomainError(f"{x!r} is not a point of this {self.kind} space")

    def safe_radius(self, x) -> Fraction | None:
        """Largest radius for which ball enumeration at x is exhaustive."""
        return None

    def validate(self) -> dict:
        """Diagnostics; never raises."""
        return {"kind": self.kind, "ok": True, "issues": []}


def distance(space: Space, x, y) -> Fraction:
    space.check_point(x)
    space.check_point(y)
    return space.distance(x, y)


def enumerate_ball(space: Space, x, r, closed=False):
    space.check_point(x)
    r = rational(r)
    if r < 0:
        raise DomainError("ball radius must be nonnegative")
    safe = space.safe_radius(x)
    if safe is not None and r > safe:
        raise WindowError(
            f"radius {fmt_rational(r)} exceeds the safe window "
            f"{fmt_rational(safe)} of this {space.kind} space",
            required=r, available=safe)
    return space.ball(x, r, closed=closed)


def validate_metric(space: Space) -> dict:
    return space.validate()


class FiniteMetricSpace(Space):
    kind = "finite_metric"

    def __init__(self, matrix, labels=None, validate=True):
        n = len(matrix)
        self.matrix = [[rational(matrix[i][j]) for j in range(n)] for i in range(n)]
        self.labels = list(labels) if labels is not None else list(range(n))
        if len(self.labels) != n:
            raise DomainError("label count does not match matrix size")
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if validate:
            issues = self._check()
            if issues:
                raise DomainError("invalid metric: " + "; ".join(issues))

    def _check(self):
        issues = []
        n = len(self.matrix)
        for i in range(n):
            if self.matrix[i][i] != 0:
                issues.append(f"nonzero diagonal at {self.labels[i]}")
            for j in range(i + 1, n):
                if self.matrix[i][j] != self.matrix[j][i]:
                    issues.append(f"asymmetry at ({self.labels[i]},{self.labels[j]})")
                if self.matrix[i][j] < 0:
                    issues.append(f"negative distance at ({self.labels[i]},{self.labels[j]})")
        for i, j, k in itertools.permutations(range(n), 3):
            if self.matrix[i][j] > self.matrix[i][k] + self.matrix[k][j]:
                issues.append(
                    f"triangle violation: d({self.labels[i]},{self.labels[j]}) > "
                    f"d({self.labels[i]},{self.labels[k]}) + d({self.labels[k]},{self.labels[j]})")
        return issues

    def distance(self, x, y):
        return self.matrix[self._index[x]][self._index[y]]

    def support(self):
        return list(self.labels)

    def is_point(self, x):
        return x in self._index

    def validate(self):
        issues = self._check()
        return {"kind": self.kind, "ok": not issues, "issues": issues}


class WeightedGraph(Space):
    """Undirected graph with positive rational edge weights.

    Vertices are arbitrary sortable hashables; loops and parallel edges are
    allowed (they matter for universal covers).  Points are either vertices
    or exact mid-edge positions ('edge', edge_id, offset), needed by the
    natural parametrization of graph geodesics.
    """

    kind = "graph"

    def __init__(self, vertices, edges):
        self.vertices = list(vertices)
        self._vset = set(self.vertices)
        if len(self._vset) != len(self.vertices):
            raise DomainError("duplicate vertices")
        self.edges = []   # (u, v, weight)
        self.adj = {v: [] for v in self.vertices}   # vertex -> [(other, weight, eid)]
        for e in edges:
            u, v, w = e
            w = rational(w)
            if w <= 0:
                raise DomainError(f"edge weight must be positive: {e}")
            if u not in self._vset or v not in self._vset:
                raise DomainError(f"edge endpoint not a vertex: {e}")
            eid = len(self.edges)
            self.edges.append((u, v, w))
            self.adj[u].append((v, w, eid))
            if u != v:
                self.adj[v].append((u, w, eid))
            else:
                # a loop can be traversed both ways; same endpoint
                self.adj[u].append((v, w, eid))
        self._dist_cache = {}

    # -- shortest paths ------------------------------------------------

    def _dijkstra(self, source):
        if source in self._dist_cache:
            return self._dist_cache[source]
        dist = {source: Fraction(0)}
        heap = [(Fraction(0), point_key(source), source)]
        done = set()
        while heap:
            d, _, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            for v, w, _eid in self.adj[u]:
                nd = d + w
                if v not in dist or nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, point_key(v), v))
        self._dist_cache[source] = dist
        return dist

    def vertex_distance(self, u, v):
        dist = self._dijkstra(u)
        if v not in dist:
            raise DomainError(f"no path between {u!r} and {v!r} (disconnected graph)")
        return dist[v]

    def distance(self, x, y):
        if self._is_vertex(x) and self._is_vertex(y):
            return self.vertex_distance(x, y)
        xe = self._as_edge_point(x)
        ye = self._as_edge_point(y)
        best = None
        if xe is not None and ye is not None and xe[0] == ye[0]:
            best = abs(xe[1] - ye[1])   # along the shared edge
        for ex_end, ex_off in self._endpoint_offsets(x):
            for ey_end, ey_off in self._endpoint_offsets(y):
                d = ex_off + self.vertex_distance(ex_end, ey_end) + ey_off
                if best is None or d < best:
                    best = d
        return best

    def _is_vertex(self, x):
        return x in self._vset

    def _as_edge_point(self, x):
        if isinstance(x, tuple) and len(x) == 3 and x[0] == "edge":
            return x[1], rational(x[2])
        return None

    def _endpoint_offsets(self, x):
        if self._is_vertex(x):
            return [(x, Fraction(0))]
        ep = self._as_edge_point(x)
        if ep is None:
            raise DomainError(f"not a point of this graph: {x!r}")
        eid, off = ep
        u, v, w = self.edges[eid]
        if not (0 < off < w):
            raise DomainError(f"edge offset out of range: {x!r}")
        return [(u, off), (v, w - off)]

    def edge_point(self, eid, offset):
        """Canonical point at `offset` from the first endpoint of edge eid."""
        u, v, w = self.edges[eid]
        offset = rational(offset)
        if offset == 0:
            return u
        if offset == w:
            return v
        if not (0 < offset < w):
            raise DomainError("offset outside edge")
        return ("edge", eid, offset)

    # -- space interface -------------------------------------------------

    def support(self):
        return list(self.vertices)

    def is_point(self, x):
        if self._is_vertex(x):
            return True
        ep = self._as_edge_point(x)
        if ep is None:
            return False
        eid, off = ep
        return 0 <= eid < len(self.edges) and 0 < off < self.edges[eid][2]

    def is_connected(self):
        if not self.vertices:
            return True
        return len(self._dijkstra(self.vertices[0])) == len(self.vertices)

    def components(self):
        remaining = set(self.vertices)
        comps = []
        while remaining:
            seed = min(remaining, key=point_key)
            comp = set(self._dijkstra(seed))
            comps.append(sorted(comp, key=point_key))
            remaining -= comp
        return comps

    def distance_matrix(self):
        """All-pairs vertex distances, via the scaled-int shortest-path kernel.

        Falls back to per-source Dijkstra when the weights do not scale into
        the kernel's int64 range.  Disconnected pairs come back as None.
        """
        import numpy as np
        from . import _kernels
        n = len(self.vertices)
        idx = {v: i for i, v in enumerate(self.vertices)}
        try:
            ints, scale = _kernels.scale_to_int([w for _u, _v, w in self.edges])
        except OverflowError:
            return [[self._dijkstra(u).get(v) for v in self.vertices]
                    for u in self.vertices]
        mat = np.full((n, n), _kernels.INF, dtype=np.int64)
        np.fill_diagonal(mat, 0)
        for (u, v, _w), iw in zip(self.edges, ints):
            i, j = idx[u], idx[v]
            if iw < mat[i, j]:
                mat[i, j] = mat[j, i] = np.int64(iw)
        dist = _kernels.floyd_warshall(mat)
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                cell = int(dist[i, j])
                row.append(None if cell >= _kernels.INF else Fraction(cell, scale))
            out.append(row)
        return out

    def diameter(self) -> Fraction:
        best = Fraction(0)
        for row in self.distance_matrix():
            for cell in row:
                if cell is None:
                    raise DomainError("diameter of a disconnected graph")
                best = max(best, cell)
        return best

    def validate(self):
        issues = []
        if not self.is_connected():
            issues.append("graph is disconnected")
        return {"kind": self.kind, "ok": not issues, "issues": issues,
                "vertices": len(self.vertices), "edges": len(self.edges)}

    # -- geodesics -------------------------------------------------------

    def lex_geodesic(self, s, t):
        """Vertex sequence of the lexicographically smallest shortest path.

        Greedy from s: repeatedly step to the smallest-keyed neighbour that
        still lies on some shortest path to t.
        """
        dist_to_t = self._dijkstra(t)
        if s not in dist_to_t:
            raise DomainError(f"no path between {s!r} and {t!r}")
        path = [s]
        u = s
        while u != t:
            candidates = []
            for v, w, _eid in self.adj[u]:
                if v in dist_to_t and dist_to_t[u] == w + dist_to_t[v]:
                    candidates.append(v)
            u = min(candidates, key=point_key)
            path.append(u)
        return path

    def path_length(self, path):
        total = Fraction(0)
        for u, v in zip(path, path[1:]):
            w = min(w for vv, w, _ in self.adj[u] if vv == v)
            total += w
        return total

    def point_along(self, path, arclength):
        """Exact point (vertex or mid-edge) at `arclength` along `path`."""
        arclength = rational(arclength)
        if arclength < 0:
            raise DomainError("negative arclength")
        u = path[0]
        remaining = arclength
        for a, b in zip(path, path[1:]):
            w = min(w for vv, w, _ in self.adj[a] if vv == b)
            eid = min(eid for vv, w2, eid in self.adj[a] if vv == b and w2 == w)
            if remaining <= w:
                eu, ev, ew = self.edges[eid]
                if remaining == 0:
                    return a
                if remaining == w:
                    return b
                off = remaining if eu == a else ew - remaining
                return self.edge_point(eid, off)
            remaining -= w
            u = b
        if remaining == 0:
            return path[-1]
        raise DomainError("arclength exceeds path length")


class CayleySpace(Space):
    """Cayley graph of a built-in family with its standard generating set.

    Distances are word lengths computed from canonical forms; ball
    enumeration does breadth-first closure and is limited by an explicit
    element budget rather than a radius, because sphere growth varies
    wildly across families.
    """

    kind = "cayley"

    def __init__(self, family: groups.GroupFamily, max_enumeration=2_000_000):
        self.family = family
        self.max_enumeration = max_enumeration

    def distance(self, x, y):
        diff = self.family.multiply(self.family.inverse(x), y)
        return Fraction(self.family.word_length(diff))

    def support(self):
        raise WindowError("Cayley support is infinite; enumerate balls instead")

    def is_point(self, x):
        try:
            self.family.word_length(x)
            return True
        except Exception:
            return False

    def identity(self):
        return self.family.identity()

    def ball(self, x, r, closed=False):
        r = rational(r)
        if closed:
            int_r = math.floor(r)
        else:
            int_r = math.ceil(r) - 1
        if int_r < 0:
            return []
        counts = self.family.sphere_sizes(int_r)
        if counts is not None and sum(counts) > self.max_enumeration:
            raise WindowError(
                f"ball of radius {fmt_rational(r)} holds {sum(counts)} elements, "
                f"over the enumeration budget {self.max_enumeration}",
                required=sum(counts), available=self.max_enumeration)
        hits = [(x, Fraction(0))]
        seen = {x}
        frontier = [x]
        gens = [g for _, g in self.family.generators()]
        for depth in range(1, int_r + 1):
            nxt = []
            for el in frontier:
                for g in gens:
                    prod = self.family.multiply(el, g)
                    if prod not in seen:
                        seen.add(prod)
                        nxt.append(prod)
                        hits.append((prod, Fraction(depth)))
                        if len(seen) > self.max_enumeration:
                            raise WindowError(
                                "enumeration budget exceeded",
                                required=len(seen), available=self.max_enumeration)
            frontier = nxt
        hits.sort(key=lambda pd: (pd[1], point_key(pd[0])))
        return hits

    def ball_count(self, r, closed=False) -> int:
        """Exact number of elements within distance r of any point (analytic)."""
        r = rational(r)
        int_r = math.floor(r) if closed else math.ceil(r) - 1
        if int_r < 0:
            return 0
        return self.family.ball_size(int_r)

    def validate(self):
        return {"kind": self.kind, "ok": True, "issues": [],
                "family": self.family.name}


class GluedLineSpace(Space):
    """The real line with a hair of fixed length attached at every eps*k.

    Canonical points: ('line', t) for t on the base line and
    ('hair', k, s) with 0 < s <= hair_length for a point at arclength s up
    the k-th hair; the hair tip is ('hair', k, hair_length).  The base is
    truncated to |t| <= window*eps and every consumer should keep radii
    within the reported safe window.
    """

    kind = "glued_line"

    def __init__(self, eps, hair_length, window):
        self.eps = rational(eps)
        self.hair = rational(hair_length)
        self.window = int(window)
        if self.eps <= 0 or self.hair <= 0 or self.window < 1:
            raise DomainError("glued line needs eps > 0, hair length > 0, window >= 1")

    def tip(self, k: int):
        return ("hair", k, self.hair)

    def base(self, k: int):
        return ("line", self.eps * k)

    def _coords(self, p):
        """(line position of the foot, arclength up the hair)."""
        if p[0] == "line":
            return rational(p[1]), Fraction(0), None
        if p[0] == "hair":
            return self.eps * p[1], rational(p[2]), p[1]
        raise DomainError(f"not a glued-line point: {p!r}")

    def distance(self, x, y):
        tx, sx, kx = self._coords(x)
        ty, sy, ky = self._coords(y)
        if kx is not None and kx == ky:
            return abs(sx - sy)
        return sx + abs(tx - ty) + sy

    def is_point(self, p):
        try:
            if p[0] == "line":
                t = rational(p[1])
                return abs(t) <= self.eps * self.window
            if p[0] == "hair":
                k, s = p[1], rational(p[2])
                return abs(k) <= self.window and 0 < s <= self.hair
        except Exception:
            return False
        return False

    def support(self):
        pts = []
        for k in range(-self.window, self.window + 1):
            pts.append(self.base(k))
            pts.append(self.tip(k))
        return pts

    def safe_radius(self, x):
        tx, sx, _ = self._coords(x)
        # beyond this radius the truncated window stops being exhaustive
        return self.eps * self.window - abs(tx) + sx

    def validate(self):
        return {"kind": self.kind, "ok": True, "issues": [],
                "window": self.window, "eps": fmt_rational(self.eps),
                "hair_length": fmt_rational(self.hair)}

    def discretized_graph(self) -> WeightedGraph:
        """Graph model (attachment points chained, hairs pendant) for cross-checks."""
        vertices = []
        edges = []
        for k in range(-self.window, self.window + 1):
            vertices.append(("b", k))
            vertices.append(("t", k))
            edges.append((("b", k), ("t", k), self.hair))
            if k > -self.window:
                edges.append((("b", k - 1), ("b", k), self.eps))
        return WeightedGraph(vertices, edges)


class TripodSpace(Space):
    """Metric tripod: three branches of lengths (a, b, c) joined at a center."""

    kind = "tripod"

    def __init__(self, alpha, beta, gamma):
        self.alpha = rational(alpha)
        self.beta = rational(beta)
        self.gamma = rational(gamma)
        if self.alpha < 0 or self.beta < 0 or self.gamma < 0:
            raise DomainError("tripod branch lengths must be nonnegative")
        self._branch = {"x": self.alpha, "y": self.beta, "z": self.gamma}

    def distance(self, x, y):
        if x == y:
            return Fraction(0)
        dx = self._branch.get(x, Fraction(0))
        dy = self._branch.get(y, Fraction(0))
        return dx + dy

    def support(self):
        return ["c", "x", "y", "z"]

    def is_point(self, p):
        return p in ("x", "y", "z", "c")

    def validate(self):
        issues = []
        for name, length in self._branch.items():
            if length == 0:
                issues.append(f"degenerate branch {name} (endpoint coincides with center)")
        return {"kind": self.kind, "ok": True, "issues": issues}


def build_glued_line(eps, hair_length, window) -> GluedLineSpace:
    return GluedLineSpace(eps, hair_length, window)


def build_tripod(alpha, beta, gamma) -> TripodSpace:
    return TripodSpace(alpha, beta, gamma)


class ModelProfile:
    """Constant-curvature comparison profile (curvature kappa, dimension n > 1)."""

    def __init__(self, kappa, n):
        self.kappa = float(kappa)
        self.n = float(n)
        if self.n <= 1:
            raise DomainError("model dimension must be > 1")

    def s(self, t: float) -> float:
        k = self.kappa
        if k == 0:
            return t
        if k < 0:
            return math.sinh(math.sqrt(-k) * t)
        root = math.sqrt(k)
        return math.sin(root * t) if root * t <= math.pi else 0.0


def model_ball_volume(profile: ModelProfile, r) -> float:
    """Ratio-ready model volume: integral of s_kappa(t)^(n-1) over [0, r].

    Quadrature at relative tolerance 1e-9; quotients of two values give the
    comparison bounds for concentric balls in the model space.
    """
    r = float(rational(r))
    if r < 0:
        raise DomainError("radius must be nonnegative")
    if r == 0:
        return 0.0
    exponent = profile.n - 1.0
    upper = r
    if profile.kappa > 0:
        upper = min(r, math.pi / math.sqrt(profile.kappa))
    value, _err = quad(lambda t: profile.s(t) ** exponent, 0.0, upper,
                       epsrel=1e-9, epsabs=0.0, limit=200)
    return value


def space_from_spec(spec: dict) -> Space:
    """Build a space from the documented JSON schema ({"kind": ..., ...})."""
    kind = spec.get("kind")
    if kind == "finite_metric":
        return FiniteMetricSpace(
            [[rational(x) for x in row] for row in spec["matrix"]],
            labels=spec.get("labels"),
            validate=spec.get("validate", True))
    if kind == "graph":
        edges = [(u, v, rational(w)) for u, v, w in spec["edges"]]
        return WeightedGraph(spec["vertices"], edges)
    if kind == "cayley":
        family = groups.family_from_spec(spec["group"])
        return CayleySpace(family)
    if kind == "glued_line":
        return GluedLineSpace(rational(spec["eps"]),
                              rational(spec["hair_length"]),
                              int(spec["window"]))
    if kind == "tripod":
        return TripodSpace(rational(spec["alpha"]), rational(spec["beta"]),
                           rational(spec["gamma"]))
    raise DomainError(f"unknown space kind {kind!r}")
