"""Proper isometric group actions and the invariants built on them.

An action binds a built-in group family to one of the space variants by an
explicit rule (left translation on a Cayley graph, lattice translation,
glued-line shift, vertex permutation, deck transformation).  On top of the
exhaustive orbit machinery this module implements displacement sets
Sigma_r(x), systole/diastole statistics, thin sets, Margulis-constant
scans, short generating families, and evaluators plus instance
cross-checks for the explicit bound formulas of the comparison theory.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import groups, packing, spaces
from .exact import DomainError, WindowError, fmt_rational, rational

ORBIT_BUDGET = 2_000_000


class GroupAction:
    """Base: a family acting by isometries on a space."""

    rule = "abstract"

    def __init__(self, family: groups.GroupFamily, space: spaces.Space):
        self.family = family
        self.space = space

    def apply(self, g, point):
        raise NotImplementedError

    def elements_moving_near(self, base, center, radius):
        """Exhaustive [(g, g*base, d(center, g*base))] with distance <= radius.

        Properness of the bundled rules makes this finite; the enumeration
        raises WindowError when it would exceed the orbit budget or the
        space window.
        """
        raise NotImplementedError

    def orbit_within(self, x, radius):
        """Sigma-style list [(g, d(x, g*x))], exhaustive, sorted."""
        rows = self.elements_moving_near(x, x, rational(radius))
        out = [(g, d) for g, _p, d in rows]
        out.sort(key=lambda gd: (gd[1], self.family.serialize(gd[0])))
        return out

    def displacement_profile(self, base, center, upto):
        """(distances, cumulative masses) of d(center, g*base) up to `upto`.

        Exact; the default builds it from enumeration, subclasses override
        with closed forms where the word metric gives them.
        """
        upto = rational(upto)
        rows = self.elements_moving_near(base, center, upto)
        tally = {}
        for _g, _p, d in rows:
            tally[d] = tally.get(d, 0) + 1
        dists = sorted(tally)
        cum = []
        total = 0
        for d in dists:
            total += tally[d]
            cum.append(Fraction(total))
        return dists, cum

    def is_free_on(self, x) -> bool:
        """No nontrivial stabilizer at x among enumerated elements."""
        for g, d in self.orbit_within(x, Fraction(0)):
            if d == 0 and g != self.family.identity():
                return False
        return True

    def validate_isometry(self, sample_points, pairs=60, seed=7):
        """Spot-check that the rule preserves distances on sampled pairs."""
        import random
        rng = random.Random(seed)
        pts = list(sample_points)
        gens = [g for _, g in self.family.generators()] or [self.family.identity()]
        issues = []
        for _ in range(pairs):
            a, b = rng.choice(pts), rng.choice(pts)
            g = rng.choice(gens)
            try:
                lhs = self.space.distance(self.apply(g, a), self.apply(g, b))
            except WindowError:
                continue
            rhs = self.space.distance(a, b)
            if lhs != rhs:
                issues.append((g, a, b, lhs, rhs))
        return issues

    def quotient_diameter(self, sample=None) -> Fraction:
        """diam of the quotient; analytic for lattice rules, else over `sample`."""
        raise NotImplementedError


class LeftTranslationAction(GroupAction):
    """The family acting on its own Cayley graph by left multiplication."""

    rule = "left_translation"

    def __init__(self, family, space=None):
        space = space or spaces.CayleySpace(family)
        if not isinstance(space, spaces.CayleySpace) or space.family is not family:
            raise DomainError("left translation needs the family's own Cayley space")
        super().__init__(family, space)

    def apply(self, g, point):
        return self.family.multiply(g, point)

    def elements_moving_near(self, base, center, radius):
        # d(center, g*base) = |center^-1 g base|; words w of length <= R are
        # in bijection with such g via g = center * w * base^-1.
        rows = []
        inv_base = self.family.inverse(base)
        for w, d in self.space.ball(self.family.identity(), radius, closed=True):
            g = self.family.multiply(self.family.multiply(center, w), inv_base)
            rows.append((g, self.family.multiply(g, base), d))
        return rows

    def displacement_profile(self, base, center, upto):
        upto = rational(upto)
        int_r = math.floor(upto)
        spheres = self.family.sphere_sizes(max(int_r, 0))
        if spheres is None:
            return super().displacement_profile(base, center, upto)
        dists, cum = [], []
        total = 0
        for i, count in enumerate(spheres):
            if count == 0:
                continue
            total += count
            dists.append(Fraction(i))
            cum.append(Fraction(total))
        return dists, cum

    def quotient_diameter(self, sample=None):
        return Fraction(0)


class LatticeTranslationAction(GroupAction):
    """Z^j acting on the Z^k lattice by an injective integer matrix.

    The matrix columns are the translations of the generators; (m Z)^k is
    matrix m*I.  Displacements are l1 norms of lattice vectors.
    """

    rule = "lattice_translation"

    def __init__(self, space: spaces.CayleySpace, matrix):
        if not isinstance(space.family, groups.FreeAbelianFamily):
            raise DomainError("lattice translation acts on a free-abelian Cayley space")
        k = space.family.rank
        self.matrix = [tuple(int(x) for x in col) for col in matrix]
        self.j = len(self.matrix)
        for col in self.matrix:
            if len(col) != k:
                raise DomainError("translation vectors must live in the lattice")
        family = groups.FreeAbelianFamily(self.j)
        super().__init__(family, space)
        self.k = k
        self._scale = self._uniform_scale()
        if self._min_expansion() == 0:
            raise DomainError("translation matrix must be injective (proper action)")

    def _uniform_scale(self):
        # m when the matrix is exactly m*I, else None.
        if self.j != self.k:
            return None
        m = self.matrix[0][0]
        for i, col in enumerate(self.matrix):
            if any(col[l] != (m if l == i else 0) for l in range(self.k)):
                return None
        return m if m > 0 else None

    def _min_expansion(self):
        # min over unit gamma of |A gamma|_1, a properness certificate
        best = None
        for col in self.matrix:
            norm = sum(abs(x) for x in col)
            best = norm if best is None else min(best, norm)
        if self.j > 1:
            # crude but safe: check small combinations for near-degeneracy
            span = range(-2, 3)
            for combo in itertools.product(span, repeat=self.j):
                if all(c == 0 for c in combo):
                    continue
                vec = self.translate(combo)
                norm = sum(abs(x) for x in vec)
                if norm == 0:
                    return 0
        return best or 0

    def translate(self, g):
        return tuple(sum(self.matrix[i][l] * g[i] for i in range(self.j))
                     for l in range(self.k))

    def _solve_box(self, bound):
        # |A g|_1 <= bound confines |g|_inf via the exact inverse of A
        if self.j != self.k:
            raise DomainError("non-square lattice matrices are not supported")
        from fractions import Fraction as F
        n = self.k
        aug = [[F(self.matrix[j][i]) for j in range(n)] + [F(int(i == l)) for l in range(n)]
               for i in range(n)]
        for col in range(n):
            pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
            if pivot is None:
                raise DomainError("translation matrix must be injective (proper action)")
            aug[col], aug[pivot] = aug[pivot], aug[col]
            inv = 1 / aug[col][col]
            aug[col] = [x * inv for x in aug[col]]
            for r in range(n):
                if r != col and aug[r][col] != 0:
                    factor = aug[r][col]
                    aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
        row_norm = max(sum(abs(aug[r][n + c]) for c in range(n)) for r in range(n))
        return int(rational(bound) * row_norm) + 1

    def apply(self, g, point):
        t = self.translate(g)
        return tuple(p + d for p, d in zip(point, t))

    def elements_moving_near(self, base, center, radius):
        radius = rational(radius)
        offset = tuple(b - c for b, c in zip(base, center))
        # |A g + offset|_1 <= R confines g to an explicit box.
        bound = (radius + sum(abs(o) for o in offset))
        per_gen = [sum(abs(x) for x in col) for col in self.matrix]
        rows = []
        if self._scale is not None:
            box = int(bound // self._scale) + 1
        else:
            box = self._solve_box(bound)
        ranges = [range(-box, box + 1)] * self.j
        count = 0
        for g in itertools.product(*ranges):
            vec = self.translate(g)
            d = Fraction(sum(abs(v + o) for v, o in zip(vec, offset)))
            if d <= radius:
                point = tuple(b + v for b, v in zip(base, vec))
                rows.append((g, point, d))
                count += 1
                if count > ORBIT_BUDGET:
                    raise WindowError("orbit budget exceeded",
                                      required=count, available=ORBIT_BUDGET)
        return rows

    def displacement_profile(self, base, center, upto):
        upto = rational(upto)
        if self._scale is not None and base == center:
            m = self._scale
            int_r = math.floor(upto / m)
            spheres = groups.FreeAbelianFamily(self.j).sphere_sizes(max(int_r, 0))
            dists, cum = [], []
            total = 0
            for i, cnt in enumerate(spheres):
                if cnt == 0:
                    continue
                total += cnt
                dists.append(Fraction(i * m))
                cum.append(Fraction(total))
            return dists, cum
        return super().displacement_profile(base, center, upto)

    def quotient_diameter(self, sample=None):
        if self._scale is not None:
            # l1 diameter of the k-torus of side m
            return Fraction(self.k * (self._scale // 2))
        if sample is None:
            raise DomainError("quotient diameter of a general lattice needs a sample")
        return _sampled_quotient_diameter(self, sample)


class GluedLineShiftAction(GroupAction):
    """eps*Z translating the glued line, sending hair k to hair k+g."""

    rule = "glued_line_shift"

    def __init__(self, space: spaces.GluedLineSpace):
        super().__init__(groups.FreeAbelianFamily(1), space)

    def apply(self, g, point):
        shift = g[0]
        if point[0] == "line":
            return ("line", rational(point[1]) + self.space.eps * shift)
        return ("hair", point[1] + shift, point[2])

    def elements_moving_near(self, base, center, radius):
        radius = rational(radius)
        eps = self.space.eps
        rows = []
        # displacement grows like eps*|g| - const, so a finite scan suffices
        span = int((radius + self.space.hair * 2 + eps * self.space.window) / eps) + 2
        for shift in range(-span, span + 1):
            g = (shift,)
            p = self.apply(g, base)
            if not self.space.is_point(p):
                continue
            d = self.space.distance(center, p)
            if d <= radius:
                rows.append((g, p, d))
        return rows

    def quotient_diameter(self, sample=None):
        # fundamental domain: one eps-cell plus its hair
        return (self.space.eps + self.space.hair * 2) / 2

    def displacement_profile(self, base, center, upto):
        upto = rational(upto)
        t_base, _s, _k = self.space._coords(base)
        t_center, _s2, _k2 = self.space._coords(center)
        # the foot of g*base sits at t_base + eps*g, so displacements below
        # `upto` confine |g| by the feet alone
        needed = int((upto + abs(t_base - t_center)) / self.space.eps) + 1
        span = max(abs(t_base), abs(t_center)) / self.space.eps
        if needed + span > self.space.window:
            raise WindowError(
                f"profile to {fmt_rational(upto)} needs window {needed}, "
                f"have {self.space.window}",
                required=needed, available=self.space.window)
        return super().displacement_profile(base, center, upto)


class PermutationAction(GroupAction):
    """A finite permutation family permuting the points of a finite space."""

    rule = "permutation"

    def __init__(self, family: groups.FinitePermutationFamily, space,
                 labels=None):
        super().__init__(family, space)
        self.labels = list(labels) if labels is not None else list(space.support())
        if len(self.labels) != family.degree:
            raise DomainError("permutation degree does not match point count")
        self._pos = {lab: i for i, lab in enumerate(self.labels)}

    def apply(self, g, point):
        return self.labels[g[self._pos[point]]]

    def elements_moving_near(self, base, center, radius):
        radius = rational(radius)
        rows = []
        for g in self.family.elements():
            p = self.apply(g, base)
            d = self.space.distance(center, p)
            if d <= radius:
                rows.append((g, p, d))
        return rows

    def quotient_diameter(self, sample=None):
        pts = list(self.space.support())
        best = Fraction(0)
        for a in pts:
            for b in pts:
                dq = min(self.space.distance(a, self.apply(g, b))
                         for g in self.family.elements())
                best = max(best, dq)
        return best


def _sampled_quotient_diameter(action: GroupAction, sample):
    best = Fraction(0)
    pts = list(sample)
    for a in pts:
        for b in pts:
            rows = action.elements_moving_near(b, a, best + action.space.distance(a, b))
            dq = min(d for _g, _p, d in rows) if rows else action.space.distance(a, b)
            best = max(best, dq)
    return best


def action_from_spec(spec: dict, space: spaces.Space) -> GroupAction:
    """Build an action from the JSON fragment {"group": .., "action": ..}."""
    rule = spec.get("action")
    if rule == "left_translation":
        family = groups.family_from_spec(spec["group"])
        if isinstance(space, spaces.CayleySpace):
            return LeftTranslationAction(space.family, space)
        return LeftTranslationAction(family)
    if rule == "lattice_translation":
        return LatticeTranslationAction(space, spec["matrix"])
    if rule == "glued_line_shift":
        return GluedLineShiftAction(space)
    if rule == "permutation":
        family = groups.family_from_spec(spec["group"])
        return PermutationAction(family, space, labels=spec.get("labels"))
    if rule == "deck":
        from . import covers
        return covers.deck_action_from_spec(spec, space)
    raise DomainError(f"unknown action rule {rule!r}")


# ---------------------------------------------------------------------------
# Sigma_r, systole, thin sets, Margulis scans
# ---------------------------------------------------------------------------


def orbit_within(action: GroupAction, x, radius):
    """[(element, displacement)] for all elements moving x by <= radius."""
    return action.orbit_within(x, radius)


@dataclass
class SigmaResult:
    elements: list
    displacements: list
    generating_set: list
    virtually_nilpotent: bool | None


def sigma_r(action: GroupAction, x, r) -> SigmaResult:
    """Sigma_r(x) together with the family's verdict on the generated subgroup."""
    rows = orbit_within(action, x, r)
    elements = [g for g, _d in rows]
    identity = action.family.identity()
    gens = [g for g in elements if g != identity]
    verdict = action.family.subgroup_virtually_nilpotent(gens)
    return SigmaResult(elements=elements,
                       displacements=[d for _g, d in rows],
                       generating_set=gens,
                       virtually_nilpotent=verdict)


@dataclass
class SystolePoint:
    point: object
    systole: Fraction | None
    torsion_free_systole: Fraction | None
    stabilized: bool


@dataclass
class SystoleReport:
    per_point: list
    diastole: Fraction | None
    torsion_free_diastole: Fraction | None
    systole: Fraction | None
    torsion_free_systole: Fraction | None
    sample_based: bool = True
    warnings: list = field(default_factory=list)


def _expanding_min_displacement(action, x, ceiling, keep):
    """min d(x, g x) over elements passing `keep`, by doubling probe radii.

    Exact: once a qualifying element appears at distance d, every shorter
    one lies in the (exhaustively enumerated) ball of radius d.
    """
    radius = rational(ceiling) if ceiling is not None else None
    probe = Fraction(1)
    while True:
        limit = probe if radius is None else min(probe, radius)
        hits = [d for g, d in orbit_within(action, x, limit) if keep(g)]
        if hits:
            return min(hits)
        if radius is not None and probe >= radius:
            return None
        probe *= 2


def _point_systole(action: GroupAction, x, ceiling) -> SystolePoint:
    identity = action.family.identity()
    sys_val = _expanding_min_displacement(action, x, ceiling,
                                          lambda g: g != identity)
    if sys_val is None:
        raise WindowError(
            f"no nontrivial displacement of {x!r} within the scan ceiling")
    stabilized = sys_val == 0
    family = action.family
    has_free = any(family.is_infinite_order(g) for _, g in family.generators())
    sys_free = None
    if has_free:
        sys_free = _expanding_min_displacement(
            action, x, ceiling,
            lambda g: g != identity and family.is_infinite_order(g))
    return SystolePoint(point=x, systole=sys_val,
                        torsion_free_systole=sys_free, stabilized=stabilized)


def systole(action: GroupAction, sample, ceiling=None) -> SystoleReport:
    """Exact per-point systoles over a finite sample of base points."""
    per_point = []
    warnings = []
    for x in sample:
        sp = _point_systole(action, x, ceiling)
        if sp.stabilized:
            warnings.append(f"stabilizer at {x!r}: systole 0 from a fixed point")
        per_point.append(sp)
    sys_vals = [p.systole for p in per_point if p.systole is not None]
    free_vals = [p.torsion_free_systole for p in per_point
                 if p.torsion_free_systole is not None]
    return SystoleReport(
        per_point=per_point,
        diastole=max(sys_vals) if sys_vals else None,
        torsion_free_diastole=max(free_vals) if free_vals else None,
        systole=min(sys_vals) if sys_vals else None,
        torsion_free_systole=min(free_vals) if free_vals else None,
        warnings=warnings)


@dataclass
class ThinSetReport:
    r: Fraction
    membership: dict
    torsion_free_membership: dict
    verdict: str
    torsion_free_verdict: str


def _connectivity_verdict(members, adjacency):
    if not members:
        return "empty"
    members = set(members)
    seed = next(iter(sorted(members, key=spaces.point_key)))
    seen = {seed}
    frontier = [seed]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adjacency.get(u, ()):  # induced subgraph walk
                if v in members and v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return "connected" if seen == members else "disconnected"


def thin_set(action: GroupAction, r, sample, adjacency, ceiling=None) -> ThinSetReport:
    """Membership x in X_r iff sys(x) < r, with sampled connectivity verdict."""
    r = rational(r)
    membership, free_membership = {}, {}
    for x in sample:
        try:
            sp = _point_systole(action, x,
                                ceiling if ceiling is not None else 4 * r)
        except WindowError:
            # nothing moves x within the ceiling: certainly not r-thin
            membership[x] = False
            free_membership[x] = False
            continue
        membership[x] = sp.systole is not None and sp.systole < r
        free_membership[x] = (sp.torsion_free_systole is not None
                              and sp.torsion_free_systole < r)
    verdict = _connectivity_verdict([x for x, m in membership.items() if m], adjacency)
    free_verdict = _connectivity_verdict(
        [x for x, m in free_membership.items() if m], adjacency)
    return ThinSetReport(r=r, membership=membership,
                         torsion_free_membership=free_membership,
                         verdict=verdict, torsion_free_verdict=free_verdict)


@dataclass
class MargulisPoint:
    point: object
    estimate: Fraction
    attained: bool          # False when the estimate is a supremum at a flip
    hit_ceiling: bool
    provenance: str


def margulis_estimate(action: GroupAction, sample, ceiling) -> list:
    """Per point, sup of radii r with Gamma_r(x) classified virtually nilpotent.

    Scans the exact displacement spectrum up to `ceiling`; the classification
    comes from the family rule, never from generic group computation.  When
    the family cannot decide the result is reported as provenance "unknown".
    """
    ceiling = rational(ceiling)
    out = []
    for x in sample:
        rows = orbit_within(action, x, ceiling)
        radii = sorted({d for _g, d in rows})
        flip = None
        unknown = False
        for rad in radii:
            verdict = sigma_r(action, x, rad).virtually_nilpotent
            if verdict is None:
                unknown = True
                break
            if not verdict:
                flip = rad
                break
        if unknown:
            out.append(MargulisPoint(point=x, estimate=ceiling, attained=False,
                                     hit_ceiling=True, provenance="unknown"))
        elif flip is None:
            out.append(MargulisPoint(point=x, estimate=ceiling, attained=True,
                                     hit_ceiling=True, provenance="family rule"))
        else:
            out.append(MargulisPoint(point=x, estimate=flip, attained=False,
                                     hit_ceiling=False, provenance="family rule"))
    return out


# ---------------------------------------------------------------------------
# Short generating families
# ---------------------------------------------------------------------------


@dataclass
class ShortGeneratorsResult:
    elements: list
    orbit_points: list
    separation_ok: bool
    reach_ok: bool
    index_verdict: str
    index: int | None
    codiameter: Fraction


def short_generators(action: GroupAction, x0, R, coset_bound=20000,
                     codiameter=None) -> ShortGeneratorsResult:
    """Greedy maximal R-separated orbit subset within 2D+R, as group elements.

    Distances (i) d(x0, g x0) <= 2D+R and (ii) pairwise >= R are re-verified
    exactly on the output; finite-index evidence comes from coset closure up
    to `coset_bound` cosets when a membership oracle exists for the family.
    """
    R = rational(R)
    D = rational(codiameter) if codiameter is not None else action.quotient_diameter()
    radius = 2 * D + R
    rows = orbit_within(action, x0, radius)
    chosen = []
    chosen_points = []
    for g, d in rows:
        p = action.apply(g, x0)
        if all(action.space.distance(p, q) >= R for q in chosen_points):
            chosen.append(g)
            chosen_points.append(p)
    reach_ok = all(action.space.distance(x0, p) <= radius for p in chosen_points)
    separation_ok = all(
        action.space.distance(p, q) >= R
        for p, q in itertools.combinations(chosen_points, 2))
    identity = action.family.identity()
    elements = [g for g in chosen if g != identity]
    verdict, index = _finite_index_evidence(action, elements, coset_bound)
    return ShortGeneratorsResult(elements=elements, orbit_points=chosen_points,
                                 separation_ok=separation_ok, reach_ok=reach_ok,
                                 index_verdict=verdict, index=index,
                                 codiameter=D)


def _subgroup_membership_oracle(family, gens):
    gens = [g for g in gens if g != family.identity()]
    if isinstance(family, groups.TrivialFamily):
        return lambda g: g == family.identity()
    if isinstance(family, groups.FreeAbelianFamily):
        basis = _integer_row_basis([list(g) for g in gens], family.rank)
        return lambda g: _in_integer_span(basis, list(g))
    if isinstance(family, groups.FinitePermutationFamily):
        sub = groups.FinitePermutationFamily(gens or [family.identity()])
        members = set(sub.elements())
        return lambda g: g in members
    if isinstance(family, groups.FreeFamily):
        graph = groups.StallingsGraph(family, gens)
        return graph.contains
    return None


def _finite_index_evidence(action, gens, coset_bound):
    family = action.family
    member = _subgroup_membership_oracle(family, gens)
    if member is None:
        return "inconclusive", None
    reps = [family.identity()]
    frontier = [family.identity()]
    ambient = [g for _, g in family.generators()]
    while frontier:
        nxt = []
        for rep in frontier:
            for s in ambient:
                cand = family.multiply(rep, s)
                if any(member(family.multiply(cand, family.inverse(r)))
                       for r in reps):
                    continue
                reps.append(cand)
                nxt.append(cand)
                if len(reps) > coset_bound:
                    return "inconclusive", None
        frontier = nxt
    return "verified up to bound", len(reps)


def _integer_row_basis(rows, rank):
    # fraction-free row echelon over Z (enough for desk-scale membership)
    basis = [list(r) for r in rows if any(r)]
    changed = True
    while changed:
        changed = False
        basis = [b for b in basis if any(b)]
        basis.sort(key=lambda r: next(i for i, x in enumerate(r) if x))
        for i in range(len(basis) - 1):
            p_i = next(j for j, x in enumerate(basis[i]) if x)
            p_n = next(j for j, x in enumerate(basis[i + 1]) if x)
            if p_i == p_n:
                a, b = basis[i][p_i], basis[i + 1][p_i]
                if abs(a) > abs(b):
                    basis[i], basis[i + 1] = basis[i + 1], basis[i]
                    a, b = b, a
                q = b // a
                basis[i + 1] = [x - q * y for x, y in zip(basis[i + 1], basis[i])]
                changed = True
                break
    return [b for b in basis if any(b)]


def _in_integer_span(basis, vec):
    vec = list(vec)
    for b in basis:
        pivot = next(i for i, x in enumerate(b) if x)
        if vec[pivot] % b[pivot] == 0:
            q = vec[pivot] // b[pivot]
            vec = [x - q * y for x, y in zip(vec, b)]
        elif vec[pivot] != 0:
            return False
    return not any(vec)


# ---------------------------------------------------------------------------
# Bound formula evaluators and instance cross-checks
# ---------------------------------------------------------------------------


class NuOracle:
    """User-supplied monotone step table C -> nu(C); required because the
    underlying approximate-group constant has no explicit published form."""

    def __init__(self, table):
        rows = sorted((float(c), int(n)) for c, n in table)
        if not rows:
            raise DomainError("empty nu table")
        last = 0
        for c, n in rows:
            if n < 1:
                raise DomainError("nu values must be positive integers")
            if n < last:
                raise DomainError("nu table must be monotone nondecreasing")
            last = n
        self.rows = rows

    def __call__(self, C: float) -> int:
        for c, n in self.rows:
            if C <= c:
                return n
        raise DomainError(
            f"nu oracle table does not cover C = {C:.6g} "
            f"(max covered {self.rows[-1][0]:.6g})")


def evaluate_bound(kind: str, params: dict, nu: NuOracle | None = None) -> float:
    """Double-precision value of one of the explicit bound formulas.

    Floors are applied exactly where the source statements bracket the
    quantity.  Kinds needing the non-explicit nu function raise unless an
    oracle is configured.
    """
    p = dict(params)

    def need(*names):
        missing = [n for n in names if n not in p]
        if missing:
            raise DomainError(f"bound {kind!r} needs parameters {missing}")
        return [float(p[n]) for n in names]

    def need_nu():
        if nu is None:
            raise DomainError(
                "nu oracle required (the function C -> nu(C) is not explicit)")
        return nu

    if kind == "generators" or kind == "betti_simply_connected":
        N, K, D = need("N", "K", "D")
        return float(math.floor(121.0 ** N * math.exp(3.0 * K * D)))
    if kind == "generator_count":
        C, D, K, eps = need("C", "D", "K", "eps0")
        return (C * (1.0 + 4.0 * D / eps) ** (math.log(C) / math.log(2.0))
                * math.exp(K * (2.0 * D + eps / 2.0)))
    if kind == "betti_hyperbolic":
        K, D, delta = need("K", "D", "delta")
        return 3.0 ** 6 * math.exp(13.0 * K * (16.0 * D + 15.0 * delta))
    if kind == "systole_lower":
        D, C, K, r0 = need("D", "C", "K", "r0")
        return ((D / C) * (1.0 + 6.0 * D / r0) ** (-math.log(C) / math.log(2.0))
                * math.exp(-K * (3.0 * D + r0 / 2.0)))
    if kind == "systole_lower_eps1":
        D, C, K = need("D", "C", "K")
        eps1 = D / need_nu()(C ** 3 * math.exp(15.0 * K * D) + 1.0)
        return ((D / C) * (1.0 + 3.0 * D / eps1) ** (-math.log(C) / math.log(2.0))
                * math.exp(-K * (3.0 * D + eps1)))
    if kind == "margulis_scale":
        if "N" in p and "C" not in p:
            (N,) = need("N")
            return 0.5 * need_nu()(300.0 ** (3.0 * N))
        C, K, r0 = need("C", "K", "r0")
        return 0.5 * need_nu()(C ** 3 * math.exp(15.0 * K * r0) + 1.0)
    if kind == "systole_busemann":
        D, C, K, r0 = need("D", "C", "K", "r0")
        N0 = 0.5 * need_nu()(C ** 3 * math.exp(15.0 * K * r0) + 1.0)
        expo = math.log(C) / math.log(2.0)
        blow = 1.0 + 4.0 * N0 * D / r0
        return (C ** (-2.6) * D * ((1.0 + D / r0) * blow) ** (-expo)
                * math.exp(-3.0 * K * (D + r0) * blow))
    if kind == "doubling_to_bg":
        C0, r0, r = need("C0", "r0", "r")
        return C0 ** 5 * math.exp(4.5 * (r / r0) * math.log(C0))
    raise DomainError(f"unknown bound kind {kind!r}")


def diastole_consistency(action: GroupAction, sample, params, nu: "NuOracle"):
    """Torsion-free diastole over the sample against the r0/N0 lower bound.

    Runs only when a nu oracle is configured, since N0 = nu(C^3 e^{15 K r0}
    + 1)/2 has no explicit form; the sampled diastole is a lower bound for
    the true one, so a pass here is genuine evidence.
    """
    if nu is None:
        raise DomainError("diastole consistency needs a nu oracle")
    n0 = 0.5 * nu(params.C ** 3 * math.exp(15.0 * params.K * float(params.r0))
                  + 1.0)
    bound = float(params.r0) / n0
    rep = systole(action, sample)
    if rep.torsion_free_diastole is None:
        return {"holds": None, "bound": bound,
                "note": "no torsion-free elements in the family"}
    measured = float(rep.torsion_free_diastole)
    return {"holds": measured >= bound * (1 - 1e-12), "bound": bound,
            "diastole": measured, "N0": n0}


@dataclass
class CrossCheckReport:
    kind: str
    measured: float
    bound: float
    direction: str          # "measured<=bound" or "measured>=bound"
    holds: bool
    slack: float
    assumptions: list
    details: dict = field(default_factory=dict)


def bound_cross_check(kind: str, measured, bound_params: dict,
                      nu: NuOracle | None = None,
                      assumptions=()) -> CrossCheckReport:
    """Assert one measured quantity against its bound formula on an instance.

    This is instance consistency, not a proof: the report carries the list
    of hypotheses that were established upstream vs merely assumed.
    """
    bound = evaluate_bound(kind, bound_params, nu=nu)
    lower_bounds = {"systole_lower", "systole_lower_eps1", "systole_busemann",
                    "margulis_scale"}
    measured_f = float(measured)
    if kind in lower_bounds:
        holds = bound <= measured_f * (1 + 1e-12)
        direction = "measured>=bound"
        slack = measured_f - bound
    else:
        holds = measured_f <= bound * (1 + 1e-12)
        direction = "measured<=bound"
        slack = bound - measured_f
    return CrossCheckReport(kind=kind, measured=measured_f, bound=bound,
                            direction=direction, holds=holds, slack=slack,
                            assumptions=list(assumptions))


# ---------------------------------------------------------------------------
# Strengthened concentric-ball bounds under a convexity hypothesis
# ---------------------------------------------------------------------------


@dataclass
class PairCheck:
    r: Fraction
    R: Fraction
    formula: str
    lhs: Fraction | int | None
    rhs: float | None
    holds: bool | None
    note: str = ""


def strengthened_bg_check(action: GroupAction, x, cert, D, pairs,
                          measure=None, pack_cap=4000) -> list:
    """Check the three strengthened bounds for the orbit counting measure.

    `cert` is a verified weak certificate (scale r0, factor C, exponent K)
    for some invariant measure on the space; the space is declared
    convexity-friendly by the caller (recorded, not asserted here).  For
    every sampled pair (r, R) the applicable formulas are compared against
    exact orbit-counting ratios and exact packing counts.
    """
    if cert.status != "verified":
        raise DomainError("strengthened check needs a verified certificate")
    r0 = rational(cert.params.r0)
    C = float(cert.params.C)
    K = float(cert.params.K)
    D = rational(D)
    expo = math.log(C) / math.log(2.0)
    results = []
    from .measures import CountingOrbitMeasure, ball_mass
    counting = measure or CountingOrbitMeasure(action, x)
    for r, R in pairs:
        r = rational(r)
        R = rational(R)
        if not (0 < r <= R):
            results.append(PairCheck(r, R, "-", None, None, None,
                                     note="skipped: needs 0 < r <= R"))
            continue
        ratio_R = float(R) / float(r)
        if r >= 2 * r0:
            lhs = (ball_mass(counting, action.space, x, R, closed=False)
                   / ball_mass(counting, action.space, x, r, closed=False))
            rhs = (C * (1.0 + 2.0 * ratio_R) ** expo
                   * math.exp(K * (float(R) + float(r) / 2.0)))
            results.append(PairCheck(r, R, "open-ratio(i)", lhs, rhs,
                                     float(lhs) <= rhs * (1 + 1e-12)))
        else:
            lhs = (ball_mass(counting, action.space, x, R, closed=True)
                   / ball_mass(counting, action.space, x, r, closed=False))
            rhs = (C * ((1.0 + float(D) / float(r0)) * (1.0 + 2.0 * ratio_R)) ** expo
                   * math.exp(K * float(D + r0) * (1.0 + 2.0 * ratio_R)))
            results.append(PairCheck(r, R, "closed-ratio(ii)", lhs, rhs,
                                     float(lhs) <= rhs * (1 + 1e-12)))
        if r <= r0 and r < R:
            pack = packing.packing_count(action.space, x, r, R, mode="exact",
                                         cap=pack_cap)
            rhs = (C * ((1.0 + float(D) / float(r0)) * ratio_R) ** expo
                   * math.exp(K * float(D + r0) * ratio_R))
            results.append(PairCheck(r, R, "packing(iii)", pack.count, rhs,
                                     pack.count <= rhs * (1 + 1e-12)))
    return results
