"""Hyperbolicity estimators: tripod decompositions, the four-point constant,
thin-triangle constants along materialized graph geodesics, geodesic
convexity defects, and the concentric-ball bounds available for group
actions on hyperbolic-like spaces.

Two different deltas are computed and never conflated: the four-point
constant is cheap and path-free; the thin-triangle constant follows the
actual tripod approximation along lexicographically chosen shortest paths.
Reports carry the method name and a witness that reproduces the value.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels, spaces
from .exact import DomainError, rational

FOUR_POINT_CAP = 150


@dataclass
class TripodDecomposition:
    alpha: Fraction
    beta: Fraction
    gamma: Fraction

    def sides(self):
        return (self.alpha + self.beta, self.alpha + self.gamma,
                self.beta + self.gamma)


def gromov_tripod(space, x, y, z) -> TripodDecomposition:
    """Branch lengths of the comparison tripod for the triangle (x, y, z)."""
    dxy, dxz, dyz = (space.distance(x, y), space.distance(x, z),
                     space.distance(y, z))
    alpha = (dxy + dxz - dyz) / 2
    beta = (dxy + dyz - dxz) / 2
    gamma = (dxz + dyz - dxy) / 2
    if alpha < 0 or beta < 0 or gamma < 0:
        raise DomainError(
            "triangle inequality fails on these points (unvalidated metric?)")
    return TripodDecomposition(alpha=alpha, beta=beta, gamma=gamma)


@dataclass
class HyperbolicityReport:
    delta: Fraction
    method: str
    witness: tuple
    points_used: int
    backend: str = ""


def four_point_delta(space, points=None, mode="exhaustive", count=2000,
                     seed=0, cap=FOUR_POINT_CAP) -> HyperbolicityReport:
    """Four-point constant over a finite point set.

    delta = max over quadruples of (L1 - L2)/2 where L1 >= L2 >= L3 are the
    three pairings d(a,b)+d(c,d), d(a,c)+d(b,d), d(a,d)+d(b,c).  Exhaustive
    mode runs the int64 kernel over all quadruples (point sets above `cap`
    are refused); sampled mode draws seeded quadruples and is a lower bound.
    """
    pts = list(points) if points is not None else list(space.support())
    pts.sort(key=spaces.point_key)
    n = len(pts)
    if n < 4:
        return HyperbolicityReport(delta=Fraction(0), method=mode,
                                   witness=(), points_used=n)
    if mode == "exhaustive":
        if n > cap:
            raise DomainError(
                f"{n} points exceed the exhaustive cap {cap}; use sampled mode")
        if isinstance(space, spaces.WeightedGraph) and \
                all(not isinstance(p, tuple) or p[0] != "edge" for p in pts) and \
                set(pts) <= set(space.vertices):
            full = space.distance_matrix()
            pos = {v: i for i, v in enumerate(space.vertices)}
            dmat = [[full[pos[a]][pos[b]] for b in pts] for a in pts]
            if any(cell is None for row in dmat for cell in row):
                raise DomainError("four-point scan over a disconnected graph")
        else:
            dmat = [[space.distance(a, b) for b in pts] for a in pts]
        ints, scale = _kernels.scale_to_int(
            [d for row in dmat for d in row])
        arr = np.array(ints, dtype=np.int64).reshape(n, n)
        two_delta, i, j, k, l = _kernels.four_point_scan(arr)
        delta = Fraction(max(int(two_delta), 0), 2 * scale)
        witness = (pts[i], pts[j], pts[k], pts[l])
        return HyperbolicityReport(delta=delta, method="four_point_exhaustive",
                                   witness=witness, points_used=n,
                                   backend=_kernels.backend())
    if mode == "sampled":
        rng = random.Random(seed)
        best = Fraction(0)
        witness = ()
        for _ in range(count):
            quad = rng.sample(range(n), 4)
            a, b, c, d = (pts[q] for q in quad)
            s1 = space.distance(a, b) + space.distance(c, d)
            s2 = space.distance(a, c) + space.distance(b, d)
            s3 = space.distance(a, d) + space.distance(b, c)
            hi, _, lo = sorted((s1, s2, s3), reverse=True)
            mid = s1 + s2 + s3 - hi - lo
            val = (hi - mid) / 2
            if val > best:
                best, witness = val, (a, b, c, d)
        return HyperbolicityReport(
            delta=best, method=f"four_point_sampled(seed={seed},count={count})",
            witness=witness, points_used=n)
    raise DomainError(f"unknown four-point mode {mode!r}")


# -- thin triangles -----------------------------------------------------------


def _prefix_lengths(graph, path):
    out = [Fraction(0)]
    for a, b in zip(path, path[1:]):
        w = min(w for vv, w, _ in graph.adj[a] if vv == b)
        out.append(out[-1] + w)
    return out


def _fiber_candidates(tripod: TripodDecomposition, prefixes):
    """Branch-coordinate values where a fiber diameter can peak."""
    alpha, beta, gamma = tripod.alpha, tripod.beta, tripod.gamma
    xy, xz, yz = prefixes
    cands = {"x": {Fraction(0), alpha}, "y": {Fraction(0), beta},
             "z": {Fraction(0), gamma}}
    for s in xy:
        if s <= alpha:
            cands["x"].add(s)
        else:
            cands["y"].add(alpha + beta - s)
    for s in xz:
        if s <= alpha:
            cands["x"].add(s)
        else:
            cands["z"].add(alpha + gamma - s)
    for s in yz:
        if s <= beta:
            cands["y"].add(s)
        else:
            cands["z"].add(beta + gamma - s)
    return cands


def thin_triangle_delta(graph, triangles=None, count=60, seed=0):
    """Max tripod-fiber diameter over sampled geodesic triangles of a graph.

    Geodesics are the deterministic lexicographically-smallest shortest
    paths; fibers are evaluated at every vertex-crossing parameter, which
    is where the piecewise-linear fiber diameter peaks.
    """
    if not isinstance(graph, spaces.WeightedGraph):
        raise DomainError("thin-triangle scan needs a graph space")
    verts = sorted(graph.vertices, key=spaces.point_key)
    if triangles is None:
        triples = list(itertools.combinations(verts, 3))
        if len(triples) > count:
            rng = random.Random(seed)
            triples = rng.sample(triples, count)
            method = f"thin_triangle(sampled,count={count},seed={seed})"
        else:
            method = "thin_triangle(all vertex triples)"
    else:
        triples = list(triangles)
        method = "thin_triangle(supplied)"
    best = Fraction(0)
    witness = ()
    for x, y, z in triples:
        tripod = gromov_tripod(graph, x, y, z)
        gxy = graph.lex_geodesic(x, y)
        gxz = graph.lex_geodesic(x, z)
        gyz = graph.lex_geodesic(y, z)
        prefixes = (_prefix_lengths(graph, gxy), _prefix_lengths(graph, gxz),
                    _prefix_lengths(graph, gyz))
        alpha, beta, gamma = tripod.alpha, tripod.beta, tripod.gamma
        cands = _fiber_candidates(tripod, prefixes)

        def fiber(branch, t):
            if branch == "x":
                return [graph.point_along(gxy, t), graph.point_along(gxz, t)]
            if branch == "y":
                return [graph.point_along(gxy, alpha + beta - t),
                        graph.point_along(gyz, t)]
            return [graph.point_along(gxz, alpha + gamma - t),
                    graph.point_along(gyz, beta + gamma - t)]

        for branch, values in cands.items():
            for t in values:
                pts = fiber(branch, t)
                if t == 0:
                    # corner fiber is a single point
                    continue
                if (branch == "x" and t == alpha) or \
                   (branch == "y" and t == beta) or \
                   (branch == "z" and t == gamma):
                    pts = [graph.point_along(gxy, alpha),
                           graph.point_along(gxz, alpha),
                           graph.point_along(gyz, beta)]
                for p, q in itertools.combinations(pts, 2):
                    d = graph.distance(p, q)
                    if d > best:
                        best = d
                        witness = ((x, y, z), branch, t)
    return HyperbolicityReport(delta=best, method=method, witness=witness,
                               points_used=len(verts))


# -- convexity defect ---------------------------------------------------------


@dataclass
class ConvexityReport:
    defect: Fraction
    witness: tuple
    grid: int
    samples: int


def convexity_defect(graph, triples=None, grid=8, origin=None,
                     endpoints=None) -> ConvexityReport:
    """Largest violation of d(c0(t), c1(t)) <= t d(c0(1), c1(1)) over a grid.

    Geodesic pairs share an origin; c(t) is the exact point at arclength
    t * length along the materialized lexicographic path (mid-edge points
    allowed).  The defect is clamped at zero.
    """
    if not isinstance(graph, spaces.WeightedGraph):
        raise DomainError("convexity defect needs a graph space")
    if grid < 2:
        raise DomainError("grid needs at least 2 parameter samples")
    if triples is None:
        verts = sorted(graph.vertices, key=spaces.point_key)
        o = origin if origin is not None else verts[0]
        ends = endpoints if endpoints is not None else [v for v in verts if v != o]
        triples = [(o, a, b) for a, b in itertools.combinations(ends, 2)]
    best = Fraction(0)
    witness = ()
    samples = 0
    for o, y0, y1 in triples:
        p0 = graph.lex_geodesic(o, y0)
        p1 = graph.lex_geodesic(o, y1)
        len0 = graph.path_length(p0)
        len1 = graph.path_length(p1)
        dend = graph.distance(y0, y1)
        for step in range(grid + 1):
            t = Fraction(step, grid)
            a = graph.point_along(p0, t * len0)
            b = graph.point_along(p1, t * len1)
            gap = graph.distance(a, b) - t * dend
            samples += 1
            if gap > best:
                best = gap
                witness = (o, y0, y1, t)
    return ConvexityReport(defect=best, witness=witness, grid=grid,
                           samples=samples)


# -- concentric-ball bounds for actions on hyperbolic-like spaces -------------


@dataclass
class CocompactPair:
    r: Fraction
    R: Fraction
    formula: str
    lhs: Fraction | None
    rhs: float | None
    holds: bool | None
    note: str = ""


def cocompact_bg_check(action, x, delta, D, K, pairs, measure=None) -> list:
    """Concentric-ball ratio bounds under (delta, D, K) inputs.

    For each sampled (r, R):
      * invariant-measure form, needs r >= (5/2)(7D + 4 delta):
          ratio(R vs r) <= 3 e^{KD} (R/r)^{25/4 + 6KD} e^{6K(R - 4r/5)}
      * orbit-counting doubling form, needs r >= 10(D + delta):
          ratio(2r vs r) <= 81 e^{(13/2) K r}
        and for R >= r the tail form 3 (R/r)^{25/4} e^{6K(R - 4r/5)}.
    Conservative ratio convention: closed numerator over open denominator.
    Pairs below the scale threshold are skipped with a notice.
    """
    from .measures import CountingOrbitMeasure, ball_mass
    delta_f = float(rational(delta))
    D_f = float(rational(D))
    K = float(K)
    counting = CountingOrbitMeasure(action, x)
    space = action.space
    out = []
    for r, R in pairs:
        r, R = rational(r), rational(R)
        scale_i = Fraction(5, 2) * (7 * rational(D) + 4 * rational(delta))
        scale_ii = 10 * (rational(D) + rational(delta))
        if measure is not None:
            if R > r >= scale_i:
                lhs = (Fraction(ball_mass(measure, space, x, R, closed=True))
                       / ball_mass(measure, space, x, r, closed=False))
                rhs = (3.0 * math.exp(K * D_f)
                       * float(R / r) ** (25.0 / 4.0 + 6.0 * K * D_f)
                       * math.exp(6.0 * K * (float(R) - 0.8 * float(r))))
                out.append(CocompactPair(r, R, "invariant(i)", lhs, rhs,
                                         float(lhs) <= rhs * (1 + 1e-12)))
            else:
                out.append(CocompactPair(r, R, "invariant(i)", None, None, None,
                                         note="skipped: r below (5/2)(7D+4delta)"))
        if r >= scale_ii:
            lhs = (Fraction(ball_mass(counting, space, x, 2 * r, closed=True))
                   / ball_mass(counting, space, x, r, closed=False))
            rhs = 3.0 ** 4 * math.exp(6.5 * K * float(r))
            out.append(CocompactPair(r, 2 * r, "counting-doubling(ii)", lhs, rhs,
                                     float(lhs) <= rhs * (1 + 1e-12)))
            if R >= r:
                lhs = (Fraction(ball_mass(counting, space, x, R, closed=True))
                       / ball_mass(counting, space, x, r, closed=False))
                rhs = (3.0 * float(R / r) ** (25.0 / 4.0)
                       * math.exp(6.0 * K * (float(R) - 0.8 * float(r))))
                out.append(CocompactPair(r, R, "counting-tail(ii)", lhs, rhs,
                                         float(lhs) <= rhs * (1 + 1e-12)))
        else:
            out.append(CocompactPair(r, 2 * r, "counting-doubling(ii)", None,
                                     None, None,
                                     note="skipped: r below 10(D+delta)"))
    return out
