"""Measures on space supports: orbit counting, pull-backs, vertex weights.

A measure is a lazy view: it can enumerate its support near a point up to
an explicit safe radius and it can produce an exact *distance profile*
(sorted distances with cumulative masses) around a center.  Profiles are
what the curvature scans consume; counting measures of standard actions
produce them analytically, so ball masses of word-metric balls stay exact
far beyond anything enumerable.
"""

from __future__ import annotations

import bisect
from fractions import Fraction

from .exact import DomainError, WindowError, fmt_rational, rational
from . import spaces


class DistanceProfile:
    """Sorted distinct distances with exact cumulative masses."""

    def __init__(self, distances, cumulative, upto):
        self.distances = list(distances)
        self.cumulative = list(cumulative)
        self.upto = rational(upto)
        if len(self.distances) != len(self.cumulative):
            raise DomainError("profile length mismatch")

    def mass_lt(self, r) -> Fraction:
        """Total mass at distance strictly below r (open ball)."""
        r = rational(r)
        self._check(r)
        idx = bisect.bisect_left(self.distances, r)
        return Fraction(self.cumulative[idx - 1]) if idx else Fraction(0)

    def mass_le(self, r) -> Fraction:
        """Total mass at distance at most r (closed ball)."""
        r = rational(r)
        self._check(r)
        idx = bisect.bisect_right(self.distances, r)
        return Fraction(self.cumulative[idx - 1]) if idx else Fraction(0)

    def _check(self, r):
        if r > self.upto:
            raise WindowError(
                f"profile only exhaustive to {fmt_rational(self.upto)}, "
                f"asked for {fmt_rational(r)}",
                required=r, available=self.upto)

    def breakpoints_in(self, lo, hi):
        """Profile distances d with lo <= d <= hi."""
        lo, hi = rational(lo), rational(hi)
        i = bisect.bisect_left(self.distances, lo)
        j = bisect.bisect_right(self.distances, hi)
        return self.distances[i:j]


class Measure:
    """Base class; masses are nonnegative rationals."""

    description = "abstract"

    def support_with_mass(self, space, center, r, closed=False):
        """Sorted [(point, distance, mass)] over support within r of center."""
        raise NotImplementedError

    def profile(self, space, center, upto) -> DistanceProfile:
        rows = self.support_with_mass(space, center, rational(upto), closed=True)
        tally = {}
        for _p, d, m in rows:
            tally[d] = tally.get(d, Fraction(0)) + m
        dists = sorted(tally)
        cum, total = [], Fraction(0)
        for d in dists:
            total += tally[d]
            cum.append(total)
        return DistanceProfile(dists, cum, upto)

    def safe_radius(self, space, center):
        return space.safe_radius(center)


class VertexMeasure(Measure):
    """Unit (or explicitly weighted) mass on the space's own support points."""

    def __init__(self, weights=None, weight_fn=None):
        self.weights = dict(weights) if weights is not None else None
        self.weight_fn = weight_fn
        uniform = weights is None and weight_fn is None
        self.description = "vertex_uniform" if uniform else "vertex_weights"

    def mass(self, point) -> Fraction:
        if self.weight_fn is not None:
            return rational(self.weight_fn(point))
        if self.weights is not None:
            return rational(self.weights.get(point, 0))
        return Fraction(1)

    def support_with_mass(self, space, center, r, closed=False):
        out = []
        for p, d in spaces.enumerate_ball(space, center, r, closed=closed):
            m = self.mass(p)
            if m < 0:
                raise DomainError(f"negative mass at {p!r}")
            if m:
                out.append((p, d, m))
        return out


class CountingOrbitMeasure(Measure):
    """Counting measure of the orbit of a basepoint, with multiplicity.

    mass(p) = #{g : g x0 = p}; for the free built-in actions this is the
    plain orbit counting measure.
    """

    def __init__(self, action, basepoint):
        action.space.check_point(basepoint)
        self.action = action
        self.basepoint = basepoint
        self.description = f"counting_orbit({action.rule})"

    def support_with_mass(self, space, center, r, closed=False):
        if space is not self.action.space:
            raise DomainError("counting measure queried on a different space")
        r = rational(r)
        rows = self.action.elements_moving_near(self.basepoint, center, r)
        tally = {}
        for _g, p, d in rows:
            key = (d, spaces.point_key(p), p)
            tally[key] = tally.get(key, 0) + 1
        out = []
        for (d, _k, p), mult in sorted(tally.items(), key=lambda kv: kv[0][:2]):
            if closed or d < r:
                if d <= r:
                    out.append((p, d, Fraction(mult)))
        return out

    def profile(self, space, center, upto) -> DistanceProfile:
        if space is not self.action.space:
            raise DomainError("counting measure queried on a different space")
        dists, cum = self.action.displacement_profile(self.basepoint, center,
                                                      rational(upto))
        return DistanceProfile(dists, cum, upto)

    def safe_radius(self, space, center):
        return space.safe_radius(center)


class PullbackMeasure(Measure):
    """Pull-back of a base-graph measure to a windowed universal cover.

    The mass of a lifted vertex is the mass of its projection, which makes
    the result deck-invariant by construction.
    """

    def __init__(self, cover_data, base_measure: Measure):
        self.cover = cover_data
        self.base_measure = base_measure
        self.description = "pullback"

    def mass(self, point) -> Fraction:
        base_point = self.cover.project(point)
        return self.base_measure.mass(base_point)

    def support_with_mass(self, space, center, r, closed=False):
        if space is not self.cover.space:
            raise DomainError("pull-back measure queried outside its cover")
        out = []
        for p, d in spaces.enumerate_ball(space, center, r, closed=closed):
            m = self.mass(p)
            if m:
                out.append((p, d, m))
        return out


def counting_measure(action, basepoint) -> CountingOrbitMeasure:
    return CountingOrbitMeasure(action, basepoint)


def pullback_measure(cover_data, base_measure: Measure) -> PullbackMeasure:
    return PullbackMeasure(cover_data, base_measure)


def ball_mass(measure: Measure, space, x, r, closed=False) -> Fraction:
    """Exact mass of the (open or closed) ball; errors beyond the safe window."""
    r = rational(r)
    if r < 0:
        raise DomainError("radius must be nonnegative")
    safe = measure.safe_radius(space, x)
    if safe is not None and r > safe:
        raise WindowError(
            f"ball of radius {fmt_rational(r)} exceeds safe window "
            f"{fmt_rational(safe)}", required=r, available=safe)
    profile = measure.profile(space, x, r)
    return profile.mass_le(r) if closed else profile.mass_lt(r)


def measure_from_spec(spec, space, action=None) -> Measure:
    """Measure from the JSON fragment; see the schema notes in the README."""
    kind = spec.get("measure", "vertex_uniform")
    if kind == "vertex_uniform":
        return VertexMeasure()
    if kind == "vertex_weights":
        return VertexMeasure(weights=
                             {k: rational(v) for k, v in spec["weights"].items()})
    if kind == "counting_orbit":
        if action is None:
            raise DomainError("counting_orbit measure needs an action")
        basepoint = spec.get("basepoint")
        if basepoint is None:
            if isinstance(space, spaces.CayleySpace):
                basepoint = space.identity()
            elif isinstance(space, spaces.GluedLineSpace):
                basepoint = space.tip(0)
            else:
                raise DomainError("counting_orbit needs an explicit basepoint")
        return CountingOrbitMeasure(action, basepoint)
    if kind == "pullback":
        raise DomainError(
            "pullback measures live on a cover: declare a graph space with "
            'measure "pullback" plus a "cover" block (the CLI lifts the '
            "problem), or build one via covers.universal_cover + "
            "PullbackMeasure")
    raise DomainError(f"unknown measure spec {kind!r}")
