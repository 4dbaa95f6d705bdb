"""Concentric-ball growth certificates: synthetic condition, weak/strong
inequalities, doubling constants, and the conversion formulas between them.

The checked inequality is always

    mass(B(x, 2r)) / mass(B(x, r)) <= factor * exp(exponent * r)

over a radius interval.  On discrete supports both ball masses are
piecewise constant in r, so the scan evaluates only at *critical radii*:
each profile breakpoint a (a support distance or half of one) contributes
two checks, the ratio exactly at r = a (strict masses) and the limiting
ratio just after a (closed masses, still compared against the right-hand
side at a); together these decide the inequality on the whole continuum.
Left-hand sides stay exact rationals; right-hand sides are floats guarded
by the verdict margin from `exact`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import (DomainError, INCONCLUSIVE, MARGIN, VERIFIED, VIOLATED,
                    fmt_rational, log_of_rational, rational)
from .measures import DistanceProfile, Measure, ball_mass


@dataclass(frozen=True)
class BGParams:
    """Weak inequality parameters: scale r0, factor C > 1, exponent K >= 0."""
    r0: Fraction
    C: float
    K: float

    def __post_init__(self):
        object.__setattr__(self, "r0", rational(self.r0))
        if self.r0 <= 0:
            raise DomainError("scale r0 must be positive")
        if not self.C > 1:
            raise DomainError("factor C must be > 1")
        if self.K < 0:
            raise DomainError("exponent K must be >= 0")


@dataclass(frozen=True)
class SyntheticParams:
    """Dimension-style parameters (N, K), both positive; scale is N/K."""
    N: float
    K: float

    def __post_init__(self):
        if not self.N > 0:
            raise DomainError("dimension N must be positive")
        if not self.K > 0:
            raise DomainError(
                "exponent K must be positive (the N/K threshold degenerates at 0)")

    @property
    def scale(self) -> Fraction:
        return rational(self.N) / rational(self.K)


@dataclass(frozen=True)
class DoublingParams:
    C0: float
    r0: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r0", rational(self.r0))
        if not self.C0 > 1:
            raise DomainError("doubling constant must be > 1")
        if self.r0 <= 0:
            raise DomainError("doubling scale must be positive")


@dataclass
class Violation:
    radius: Fraction
    lhs: Fraction
    rhs: float
    form: str               # "at" for the exact radius, "above" for the limit


@dataclass
class Certificate:
    params: object
    center: object
    r_min: Fraction
    r_max: Fraction
    status: str
    witness: Violation | None = None
    first_violation: Violation | None = None
    critical_radii_checked: int = 0
    violations: int = 0
    notes: list = field(default_factory=list)
    scan_rows: list = field(default_factory=list)   # (radius, lhs, rhs)

    @property
    def verified(self) -> bool:
        return self.status == VERIFIED


def _rhs(factor: float, exponent: float, r: Fraction) -> float:
    return factor * math.exp(exponent * float(r))


def _critical_checks(profile: DistanceProfile, lo: Fraction, hi: Fraction):
    """Yield (radius, lhs, form) pairs deciding the inequality on [lo, hi].

    'at': ratio of strict masses at the radius itself.
    'above': ratio of closed masses, the constant value on the interval just
    right of the radius, whose binding comparison point is the radius.
    """
    breaks = set(profile.breakpoints_in(lo, hi))
    for d in profile.breakpoints_in(2 * lo, 2 * hi):
        half = d / 2
        if lo <= half <= hi:
            breaks.add(half)
    breaks.add(lo)
    for a in sorted(breaks):
        num, den = profile.mass_lt(2 * a), profile.mass_lt(a)
        yield a, (Fraction(num) / den if den > 0 else None), "at"
        if a < hi:
            num, den = profile.mass_le(2 * a), profile.mass_le(a)
            yield a, (Fraction(num) / den if den > 0 else None), "above"


def _scan(profile: DistanceProfile, lo: Fraction, hi: Fraction,
          factor: float, exponent: float, params, center) -> Certificate:
    if hi < lo:
        raise DomainError(
            f"r_max {fmt_rational(hi)} below the scale {fmt_rational(lo)}")
    cert = Certificate(params=params, center=center, r_min=lo, r_max=hi,
                       status=VERIFIED)
    worst = None
    for radius, lhs, form in _critical_checks(profile, lo, hi):
        cert.critical_radii_checked += 1
        if lhs is None:
            raise DomainError(
                f"zero mass ball at radius {fmt_rational(radius)} with mass "
                "above it: the 0 < mass hypothesis fails on this range")
        rhs = _rhs(factor, exponent, radius)
        cert.scan_rows.append((radius, lhs, rhs))
        f_lhs = float(lhs)
        if f_lhs >= rhs * (1.0 + MARGIN):
            cert.violations += 1
            v = Violation(radius=radius, lhs=lhs, rhs=rhs, form=form)
            if cert.first_violation is None:
                cert.first_violation = v
            if worst is None or (lhs, radius) > (worst.lhs, worst.radius):
                worst = v
        elif f_lhs > rhs * (1.0 - MARGIN) and cert.status == VERIFIED:
            cert.status = INCONCLUSIVE
            cert.notes.append(
                f"ratio at {fmt_rational(radius)} inside the float margin band")
    if worst is not None:
        cert.status = VIOLATED
        cert.witness = worst
    return cert


def _profile_for(measure: Measure, space, x, r_max):
    return measure.profile(space, x, 2 * rational(r_max))


def check_weak_bg(space, measure: Measure, center, params: BGParams,
                  r_max) -> Certificate:
    """Scan the weak inequality at scale r0 on [r0, r_max] for one center,
    or for every center of an iterable (worst certificate wins)."""
    r_max = rational(r_max)
    if isinstance(center, (list, tuple)) and not _is_single_point(space, center):
        certs = [check_weak_bg(space, measure, c, params, r_max) for c in center]
        return _merge_all_centers(certs, params)
    profile = _profile_for(measure, space, center, r_max)
    return _scan(profile, params.r0, r_max, params.C, params.K, params, center)


def check_bg_synthetic(space, measure: Measure, center, params: SyntheticParams,
                       r_max) -> Certificate:
    """Scan the dimension-style condition on [N/K, r_max]."""
    r_max = rational(r_max)
    if r_max < params.scale:
        raise DomainError(
            f"r_max {fmt_rational(r_max)} is below the threshold N/K = "
            f"{fmt_rational(params.scale)}")
    profile = _profile_for(measure, space, center, r_max)
    return _scan(profile, params.scale, r_max, 2.0 ** params.N, params.K,
                 params, center)


def _is_single_point(space, candidate):
    try:
        return space.is_point(candidate)
    except Exception:
        return False


def _merge_all_centers(certs, params) -> Certificate:
    merged = Certificate(params=params, center="all sampled",
                         r_min=certs[0].r_min, r_max=certs[0].r_max,
                         status=VERIFIED)
    for c in certs:
        merged.critical_radii_checked += c.critical_radii_checked
        merged.violations += c.violations
        if c.first_violation and merged.first_violation is None:
            merged.first_violation = c.first_violation
        if c.status == VIOLATED:
            merged.status = VIOLATED
            if (merged.witness is None
                    or (c.witness.lhs, c.witness.radius)
                    > (merged.witness.lhs, merged.witness.radius)):
                merged.witness = c.witness
        elif c.status == INCONCLUSIVE and merged.status == VERIFIED:
            merged.status = INCONCLUSIVE
        merged.notes.extend(c.notes)
    return merged


def min_exponent(space, measure: Measure, x, r0, C, r_max,
                 tolerance=1e-6) -> float:
    """Smallest K >= 0 making the weak inequality hold on [r0, r_max].

    Exact up to float rounding: K* is the max over critical radii of
    (ln lhs - ln C) / r, clamped at zero; callers should pad by `tolerance`
    before re-certifying to stay clear of the margin band.
    """
    r0, r_max = rational(r0), rational(r_max)
    if not C > 1:
        raise DomainError("factor C must be > 1")
    profile = _profile_for(measure, space, x, r_max)
    ln_c = math.log(C)
    best = 0.0
    for radius, lhs, _form in _critical_checks(profile, r0, r_max):
        if lhs is None:
            raise DomainError("zero-mass ball inside the scan range")
        if lhs > 1:
            k = (log_of_rational(lhs) - ln_c) / float(radius)
            best = max(best, k)
    return best if best > tolerance else 0.0


def weak_to_synthetic(params: BGParams) -> SyntheticParams:
    """(r0, C, K) -> (N', K) with N' = max(K r0, ln C / ln 2); needs K > 0."""
    if params.K <= 0:
        raise DomainError("conversion needs K > 0; perturb K upward first")
    n_prime = max(params.K * float(params.r0), math.log(params.C) / math.log(2.0))
    return SyntheticParams(N=n_prime, K=params.K)


def synthetic_to_weak(params: SyntheticParams) -> BGParams:
    """(N, K) -> weak parameters (r0 = N/K, C = 2^N, K)."""
    return BGParams(r0=params.scale, C=2.0 ** params.N, K=params.K)


def classic_ratio_bound(r, R, params) -> float:
    """Ratio bound mass(B(x,R))/mass(B(x,r)) for r below R, classical form."""
    r, R = rational(r), rational(R)
    if isinstance(params, BGParams):
        if not (params.r0 <= r < R):
            raise DomainError("need r0 <= r < R")
        expo = math.log(params.C) / math.log(2.0)
        return params.C * float(R / r) ** expo * math.exp(params.K * float(R))
    if isinstance(params, SyntheticParams):
        if not (params.scale <= r < R):
            raise DomainError("need N/K <= r < R")
        return (2.0 ** params.N * float(R / r) ** params.N
                * math.exp(params.K * float(R)))
    raise DomainError("params must be weak or synthetic")


@dataclass
class RatioCheck:
    r: Fraction
    R: Fraction
    lhs: Fraction
    rhs: float
    holds: bool
    slack: float


def check_classic_bound(space, measure: Measure, x, params, certificate,
                        pairs) -> list:
    """Measured mass ratios against the classical-form bound for (r, R) pairs.

    Requires a verified certificate for `params` whose range covers the
    largest R sampled.
    """
    if certificate is None or not certificate.verified:
        raise DomainError("check_classic_bound needs a verified certificate")
    pairs = [(rational(r), rational(R)) for r, R in pairs]
    top = max(R for _r, R in pairs)
    if certificate.r_max < top:
        raise DomainError(
            f"certificate verified only to {fmt_rational(certificate.r_max)}, "
            f"pairs reach {fmt_rational(top)}")
    profile = _profile_for(measure, space, x, top)
    out = []
    for r, R in pairs:
        if not r < R:
            raise DomainError(f"need r < R, got ({fmt_rational(r)}, {fmt_rational(R)})")
        lhs = Fraction(profile.mass_lt(R)) / profile.mass_lt(r)
        rhs = classic_ratio_bound(r, R, params)
        out.append(RatioCheck(r=r, R=R, lhs=lhs, rhs=rhs,
                              holds=float(lhs) <= rhs * (1 + MARGIN),
                              slack=rhs - float(lhs)))
    return out


def doubling_constant(space, measure: Measure, x, r0) -> tuple:
    """Exact sup of the concentric ratio over radii in [r0/2, 5 r0/2].

    Returns (sup as Fraction, radius attaining it).
    """
    r0 = rational(r0)
    lo, hi = r0 / 2, 5 * r0 / 2
    profile = _profile_for(measure, space, x, hi)
    best, best_r = None, None
    for radius, lhs, _form in _critical_checks(profile, lo, hi):
        if lhs is None:
            raise DomainError("zero-mass ball inside the doubling range")
        if best is None or lhs > best:
            best, best_r = lhs, radius
    return best, best_r


def doubling_to_bg_bound(params: DoublingParams, r) -> float:
    """Growth bound implied by a doubling constant, for r >= r0/2."""
    r = rational(r)
    if r < params.r0 / 2:
        raise DomainError("bound valid only for r >= r0/2")
    return (params.C0 ** 5
            * math.exp(4.5 * float(r / params.r0) * math.log(params.C0)))


def diameter_shift(params: BGParams, D) -> BGParams:
    """One-center to every-center: scale r0 + 5D/2, factor C^2, exponent 2K."""
    D = rational(D)
    if D < 0:
        raise DomainError("diameter must be nonnegative")
    return BGParams(r0=params.r0 + Fraction(5, 2) * D,
                    C=params.C ** 2, K=2.0 * params.K)


def brute_force_recheck(space, measure: Measure, x, factor, exponent,
                        lo, hi, samples=200, seed=123):
    """Independent certificate audit from raw ball enumerations.

    Recomputes mass ratios at the critical radii and at `samples` random
    rationals in [lo, hi] using only enumerate_ball + mass summation (no
    profile machinery).  Returns the list of (radius, lhs, rhs) violations.
    """
    import random
    rng = random.Random(seed)
    lo, hi = rational(lo), rational(hi)
    radii = set()
    for p, d in space.ball(x, 2 * hi, closed=True):
        for cand in (d, d / 2):
            if lo <= cand <= hi:
                radii.add(cand)
    radii.add(lo)
    for _ in range(samples):
        num = rng.randint(0, 10 ** 6)
        radii.add(lo + (hi - lo) * Fraction(num, 10 ** 6))
    bad = []
    for r in sorted(radii):
        num = ball_mass(measure, space, x, 2 * r, closed=False)
        den = ball_mass(measure, space, x, r, closed=False)
        if den == 0:
            continue
        lhs = Fraction(num) / den
        rhs = _rhs(factor, exponent, r)
        if float(lhs) > rhs * (1 + 1e-12):
            bad.append((r, lhs, rhs))
    return bad
