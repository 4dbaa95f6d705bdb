"""Packing counts for concentric balls, and the sandwich inequalities that
relate them to orbit-counting and invariant-measure ball masses.

Conventions (recorded here because the source statements leave them open):
"balls of radius r in B(x, R)" means containment, i.e. centers c with
d(x, c) <= R - r; disjointness of the open balls is encoded as pairwise
center distance >= 2r, which is exact on the graph-like supports we pack.

Exact counts are maximum independent sets of the conflict graph (centers
at distance < 2r conflict).  Components are solved separately; bipartite
components go through Koenig's theorem (max matching), the rest through a
branch-and-bound with a greedy clique-cover bound on bitset adjacency.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import DomainError, rational
from . import spaces
from .measures import ball_mass

EXACT_CAP = 60


@dataclass
class PackingResult:
    count: int
    centers: list
    method: str
    candidates: int
    note: str = ""


def _candidate_rows(space, x, r, R, candidates):
    """Sorted (distance-to-x, key, point) rows of admissible centers."""
    limit = R - r
    rows = []
    if candidates is None:
        for p, d in spaces.enumerate_ball(space, x, limit, closed=True):
            rows.append((d, spaces.point_key(p), p))
    else:
        for p in candidates:
            d = space.distance(x, p)
            if d <= limit:
                rows.append((d, spaces.point_key(p), p))
    rows.sort(key=lambda t: t[:2])
    return rows


def _conflict_masks(space, points, r):
    """Bitset adjacency of the 'centers closer than 2r' conflict graph."""
    n = len(points)
    masks = [0] * n
    threshold = 2 * r
    for i in range(n):
        for j in range(i + 1, n):
            if space.distance(points[i], points[j]) < threshold:
                masks[i] |= 1 << j
                masks[j] |= 1 << i
    return masks


def _components(masks):
    n = len(masks)
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        comp = []
        stack = [start]
        seen[start] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            m = masks[u]
            while m:
                v = (m & -m).bit_length() - 1
                m &= m - 1
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def _bipartition(masks, comp):
    color = {}
    stack = [(comp[0], 0)]
    while stack:
        u, c = stack.pop()
        if u in color:
            if color[u] != c:
                return None
            continue
        color[u] = c
        m = masks[u]
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            if v in color:
                if color[v] == c:
                    return None
            else:
                stack.append((v, 1 - c))
    left = [u for u in comp if color[u] == 0]
    right = [u for u in comp if color[u] == 1]
    return left, right


def _koenig_mis(masks, comp):
    """Max independent set of a bipartite component via max matching."""
    parts = _bipartition(masks, comp)
    left, right = parts
    match_r = {v: None for v in right}
    match_l = {u: None for u in left}

    def augment(u, visited):
        m = masks[u]
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            if v in visited or v not in match_r:
                continue
            visited.add(v)
            if match_r[v] is None or augment(match_r[v], visited):
                match_r[v] = u
                match_l[u] = v
                return True
        return False

    for u in left:
        augment(u, set())

    # Koenig: alternating reachability from unmatched left vertices
    reach_l, reach_r = set(), set()
    frontier = [u for u in left if match_l[u] is None]
    reach_l.update(frontier)
    while frontier:
        nxt = []
        for u in frontier:
            m = masks[u]
            while m:
                v = (m & -m).bit_length() - 1
                m &= m - 1
                if v in reach_r or v not in match_r:
                    continue
                reach_r.add(v)
                w = match_r[v]
                if w is not None and w not in reach_l:
                    reach_l.add(w)
                    nxt.append(w)
        frontier = nxt
    cover = [u for u in left if u not in reach_l] + [v for v in right if v in reach_r]
    independent = [u for u in comp if u not in set(cover)]
    return independent


def _clique_cover_bound(masks, avail):
    """Greedy clique cover size: an upper bound for the independence number."""
    remaining = avail
    cliques = 0
    while remaining:
        v = (remaining & -remaining).bit_length() - 1
        clique = 1 << v
        closed = masks[v] & remaining
        remaining &= ~(1 << v)
        cand = closed
        while cand:
            u = (cand & -cand).bit_length() - 1
            cand &= cand - 1
            if (clique & ~masks[u]) == 0 and (remaining >> u) & 1:
                clique |= 1 << u
                remaining &= ~(1 << u)
                cand &= masks[u]
        cliques += 1
    return cliques


def _greedy_mis_mask(masks, avail):
    """Min-degree greedy independent set; seeds the branch-and-bound."""
    chosen = 0
    while avail:
        m, pick, pick_deg = avail, -1, None
        while m:
            u = (m & -m).bit_length() - 1
            m &= m - 1
            deg = (masks[u] & avail).bit_count()
            if pick_deg is None or deg < pick_deg:
                pick, pick_deg = u, deg
                if deg == 0:
                    break
        chosen |= 1 << pick
        avail &= ~((1 << pick) | masks[pick])
    return chosen


def _bb_mis(masks, comp):
    """Branch and bound maximum independent set on one component."""
    avail0 = 0
    for u in comp:
        avail0 |= 1 << u
    seed = _greedy_mis_mask(masks, avail0)
    best = [seed.bit_count(), seed]

    def recurse(avail, chosen, size):
        if not avail:
            if size > best[0]:
                best[0], best[1] = size, chosen
            return
        if size + _clique_cover_bound(masks, avail) <= best[0]:
            return
        # branch on a vertex of maximum conflict degree inside avail
        m, pick, pick_deg = avail, -1, -1
        while m:
            u = (m & -m).bit_length() - 1
            m &= m - 1
            deg = (masks[u] & avail).bit_count()
            if deg > pick_deg:
                pick, pick_deg = u, deg
        if pick_deg == 0:
            total = size + avail.bit_count()
            if total > best[0]:
                best[0], best[1] = total, chosen | avail
            return
        bit = 1 << pick
        recurse(avail & ~bit & ~masks[pick], chosen | bit, size + 1)   # take
        recurse(avail & ~bit, chosen, size)                            # skip
    recurse(avail0, 0, 0)
    chosen = best[1]
    out = []
    while chosen:
        u = (chosen & -chosen).bit_length() - 1
        chosen &= chosen - 1
        out.append(u)
    return sorted(out)


def _exact_mis(space, points, r):
    masks = _conflict_masks(space, points, r)
    chosen = []
    bipartite_used = False
    for comp in _components(masks):
        if len(comp) > 2 and _bipartition(masks, comp) is not None:
            chosen.extend(_koenig_mis(masks, comp))
            bipartite_used = True
        else:
            chosen.extend(_bb_mis(masks, comp))
    method = "exact" + ("+koenig" if bipartite_used else "")
    return sorted(chosen), method


def packing_count(space, x, r, R, mode="exact", candidates=None,
                  cap=EXACT_CAP) -> PackingResult:
    """Largest (greedy: maximal) family of disjoint radius-r balls in B(x, R).

    Candidate centers default to the space's support points within R - r of
    x; packings of the orbit variant pass the orbit points explicitly.  The
    exact solver refuses candidate sets above `cap` (raise it deliberately
    for larger certified instances).
    """
    r, R = rational(r), rational(R)
    if not 0 < r <= R / 2:
        raise DomainError("packing needs 0 < r <= R/2")
    rows = _candidate_rows(space, x, r, R, candidates)
    points = [p for _d, _k, p in rows]
    if mode == "greedy":
        chosen = []
        for p in points:
            if all(space.distance(p, q) >= 2 * r for q in chosen):
                chosen.append(p)
        result = PackingResult(count=len(chosen), centers=chosen,
                               method="greedy", candidates=len(points))
    elif mode == "exact":
        if len(points) > cap:
            raise DomainError(
                f"{len(points)} candidates exceed the exact cap {cap}; "
                "use greedy mode or raise the cap")
        idx, method = _exact_mis(space, points, r)
        result = PackingResult(count=len(idx), centers=[points[i] for i in idx],
                               method=method, candidates=len(points))
    else:
        raise DomainError(f"unknown packing mode {mode!r}")
    _verify_packing(space, x, result.centers, r, R)
    return result


def _verify_packing(space, x, centers, r, R):
    """Post-hoc audit from raw distances; a failure is an internal bug."""
    for c in centers:
        if space.distance(x, c) > R - r:
            raise AssertionError("packing center escapes the containment radius")
    for a, b in itertools.combinations(centers, 2):
        if space.distance(a, b) < 2 * r:
            raise AssertionError("packing centers closer than 2r")


def gamma_packing_count(action, x, r, R, mode="exact", cap=EXACT_CAP) -> PackingResult:
    """Packing count with centers restricted to the orbit of x."""
    r, R = rational(r), rational(R)
    if not 0 < r <= R / 2:
        raise DomainError("packing needs 0 < r <= R/2")
    rows = action.elements_moving_near(x, x, R - r)
    orbit_pts = sorted({(d, spaces.point_key(p)): p for _g, p, d in rows}.items())
    candidates = [p for _key, p in orbit_pts]
    result = packing_count(action.space, x, r, R, mode=mode,
                           candidates=candidates, cap=cap)
    result.note = "centers restricted to the orbit"
    return result


@dataclass
class PackingConditionReport:
    r0: Fraction
    N0: int
    per_center: list      # (center, count, holds)
    holds: bool
    caveat: str = ""


def packing_condition(space, centers, r0, N0, mode="exact",
                      cap=EXACT_CAP) -> PackingConditionReport:
    """Pack(x, r0/2, 11 r0) <= N0 at every sampled center."""
    r0 = rational(r0)
    per_center = []
    ok = True
    caveat = ""
    for x in centers:
        res = packing_count(space, x, r0 / 2, 11 * r0, mode=mode, cap=cap)
        if res.method == "greedy":
            caveat = "greedy counts are lower bounds; condition check is advisory"
        holds = res.count <= N0
        ok = ok and holds
        per_center.append((x, res.count, holds))
    return PackingConditionReport(r0=r0, N0=N0, per_center=per_center,
                                  holds=ok, caveat=caveat)


@dataclass
class SandwichReport:
    r: Fraction
    R: Fraction
    counting_lower: Fraction
    pack_orbit: int
    invariant_ratio: Fraction
    pack_all: int
    sup_ratio: Fraction
    chain_holds: bool
    lemma_pack_vs_orbit: tuple | None
    details: dict = field(default_factory=dict)


def sandwich_check(action, measure, x, r, R, sup_sample, cap=2000,
                   codiameter=None) -> SandwichReport:
    """Exhaustively verify the packing sandwich on one instance.

        counting(closed R-r) / counting(open 2r)
            <= Pack_orbit(x, r, R) <= invariant(B(x,R)) / invariant(B(x,r))
        Pack(x, r, R) <= sup_y invariant(B(y,2R)) / invariant(B(y,r))

    plus, when the codiameter D satisfies D < r, the covering comparison
    Pack(x, r, R) <= Pack_orbit(x, r - D, R).  The sup runs over the finite
    `sup_sample` (a fundamental domain), recorded as a limitation.
    """
    from .measures import CountingOrbitMeasure
    r, R = rational(r), rational(R)
    space = action.space
    counting = CountingOrbitMeasure(action, x)
    lower = (Fraction(ball_mass(counting, space, x, R - r, closed=True))
             / ball_mass(counting, space, x, 2 * r, closed=False))
    pack_orbit = gamma_packing_count(action, x, r, R, mode="exact", cap=cap)
    inv_ratio = (Fraction(ball_mass(measure, space, x, R, closed=False))
                 / ball_mass(measure, space, x, r, closed=False))
    pack_all = packing_count(space, x, r, R, mode="exact", cap=cap)
    sup_ratio = max(
        Fraction(ball_mass(measure, space, y, 2 * R, closed=False))
        / ball_mass(measure, space, y, r, closed=False)
        for y in sup_sample)
    chain = (lower <= pack_orbit.count
             and pack_orbit.count <= inv_ratio
             and pack_all.count <= sup_ratio)
    lemma = None
    D = rational(codiameter) if codiameter is not None \
        else action.quotient_diameter()
    if D < r:
        shrunk = gamma_packing_count(action, x, r - D, R, mode="exact", cap=cap)
        lemma = (pack_all.count, shrunk.count, pack_all.count <= shrunk.count)
    return SandwichReport(
        r=r, R=R, counting_lower=lower, pack_orbit=pack_orbit.count,
        invariant_ratio=inv_ratio, pack_all=pack_all.count,
        sup_ratio=sup_ratio, chain_holds=chain, lemma_pack_vs_orbit=lemma,
        details={"sup_sample_size": len(list(sup_sample)),
                 "codiameter": D})
