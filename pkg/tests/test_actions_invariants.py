import math
from fractions import Fraction

import pytest

from bgkit.actions import (GluedLineShiftAction, LatticeTranslationAction,
                           LeftTranslationAction, NuOracle, PermutationAction,
                           bound_cross_check, evaluate_bound,
                           margulis_estimate, short_generators,
                           strengthened_bg_check, systole, thin_set)
from bgkit.curvature import BGParams, check_weak_bg
from bgkit.exact import DomainError
from bgkit.groups import (FinitePermutationFamily, FreeAbelianFamily,
                          FreeFamily, ProductFamily, TrivialFamily)
from bgkit.measures import VertexMeasure
from bgkit.spaces import CayleySpace, FiniteMetricSpace, GluedLineSpace


def torus_action(m):
    space = CayleySpace(FreeAbelianFamily(2))
    matrix = [[m, 0], [0, m]]
    return LatticeTranslationAction(space, matrix)


# -- systole / diastole --------------------------------------------------------


def test_systole_sublattice():
    act = torus_action(5)
    sample = [(i, j) for i in range(3) for j in range(3)]
    rep = systole(act, sample)
    assert all(p.systole == 5 for p in rep.per_point)
    assert rep.diastole == 5 and rep.systole == 5
    assert rep.torsion_free_systole == 5


def test_systole_free_group():
    act = LeftTranslationAction(FreeFamily(2))
    rep = systole(act, [()])
    assert rep.systole == 1
    assert rep.torsion_free_systole == 1


def test_systole_stabilizer_warning():
    fix = FinitePermutationFamily([(1, 0, 2)])
    metric = FiniteMetricSpace([[0, 1, 1], [1, 0, 1], [1, 1, 0]], labels=[0, 1, 2])
    act = PermutationAction(fix, metric, labels=[0, 1, 2])
    rep = systole(act, [2, 0])
    by_point = {p.point: p for p in rep.per_point}
    assert by_point[2].systole == 0 and by_point[2].stabilized
    assert by_point[0].systole == 1
    assert rep.warnings
    # no torsion-free elements at all in a finite family
    assert rep.torsion_free_systole is None


def test_systole_glued_line():
    gl = GluedLineSpace(Fraction(1, 10), Fraction(1, 2), 40)
    act = GluedLineShiftAction(gl)
    rep = systole(act, [gl.tip(0), gl.base(0)])
    by_point = {p.point: p for p in rep.per_point}
    assert by_point[gl.tip(0)].systole == Fraction(11, 10)
    assert by_point[gl.base(0)].systole == Fraction(1, 10)


# -- thin sets -----------------------------------------------------------------


def test_thin_set_line_translation():
    space = CayleySpace(FreeAbelianFamily(1))
    act = LatticeTranslationAction(space, [[3]])
    sample = [(i,) for i in range(-3, 4)]
    adjacency = {(i,): [(i - 1,), (i + 1,)] for i in range(-3, 4)}
    below = thin_set(act, 3, sample, adjacency)
    assert below.verdict == "empty"
    above = thin_set(act, Fraction(7, 2), sample, adjacency)
    assert all(above.membership.values())
    assert above.verdict == "connected"


def test_thin_set_glued_line_pattern():
    gl = GluedLineSpace(Fraction(1, 10), Fraction(1, 2), 40)
    act = GluedLineShiftAction(gl)
    tips = [gl.tip(k) for k in range(-2, 3)]
    bases = [gl.base(k) for k in range(-2, 3)]
    sample = tips + bases
    adjacency = {}
    for k in range(-2, 3):
        adjacency[gl.tip(k)] = [gl.base(k)]
        adjacency[gl.base(k)] = [gl.tip(k), gl.base(k - 1), gl.base(k + 1)]
    r = Fraction(11, 10) + Fraction(1, 100)
    rep = thin_set(act, r, sample, adjacency)
    assert all(rep.membership[t] for t in tips)
    assert all(rep.membership[b] for b in bases)
    small = thin_set(act, Fraction(11, 10), sample, adjacency)
    assert not any(small.membership[t] for t in tips)    # sys(tip) = 11/10
    assert all(small.membership[b] for b in bases)       # sys(base) = 1/10
    assert small.verdict == "connected"


# -- Margulis scans --------------------------------------------------------------


def test_margulis_abelian_hits_ceiling():
    act = LeftTranslationAction(FreeAbelianFamily(2))
    pts = margulis_estimate(act, [(0, 0), (2, 1)], ceiling=6)
    assert all(p.estimate == 6 and p.hit_ceiling for p in pts)


def test_margulis_free_group_flips_at_one():
    act = LeftTranslationAction(FreeFamily(2))
    pts = margulis_estimate(act, [()], ceiling=5)
    assert pts[0].estimate == 1
    assert not pts[0].attained


def test_margulis_product_componentwise():
    prod = ProductFamily([FreeAbelianFamily(1), FreeFamily(2)])
    act = LeftTranslationAction(prod)
    pts = margulis_estimate(act, [prod.identity()], ceiling=4)
    assert pts[0].estimate == 1
    assert pts[0].provenance == "family rule"


# -- short generating families ----------------------------------------------------


def test_short_generators_lattice():
    act = LeftTranslationAction(FreeAbelianFamily(2))
    res = short_generators(act, (0, 0), 2)
    assert res.reach_ok and res.separation_ok
    assert res.codiameter == 0
    # the eight norm-2 lattice vectors generate the even sublattice: index 2
    assert res.index_verdict == "verified up to bound"
    assert res.index == 2


def test_short_generators_trivial():
    act = LeftTranslationAction(TrivialFamily())
    res = short_generators(act, (), 3)
    assert res.elements == []
    assert res.index == 1


def test_short_generators_torus():
    act = torus_action(5)
    res = short_generators(act, (0, 0), 5)
    assert res.reach_ok and res.separation_ok
    assert res.codiameter == 4
    assert res.index_verdict == "verified up to bound"


def test_short_generators_free_group_membership():
    act = LeftTranslationAction(FreeFamily(2))
    res = short_generators(act, (), 1)
    # radius 1 orbit gives all four letters: the whole group, index 1
    assert res.index == 1


# -- bound evaluators ---------------------------------------------------------------


def test_evaluate_bound_values():
    assert evaluate_bound("generators", {"N": 2, "K": 0, "D": 5}) == 14641
    assert evaluate_bound("betti_simply_connected", {"N": 2, "K": 0, "D": 5}) == 14641
    assert evaluate_bound("betti_hyperbolic", {"K": 0, "D": 3, "delta": 1}) == 729
    got = evaluate_bound("systole_lower", {"D": 1, "C": 2, "K": 0, "r0": 1})
    assert math.isclose(got, 1 / 14, rel_tol=1e-12)
    got = evaluate_bound("doubling_to_bg", {"C0": 2, "r0": 1, "r": 1})
    assert math.isclose(got, 2 ** 9.5, rel_tol=1e-12)


def test_evaluate_bound_nu_kinds():
    nu = NuOracle([[10, 3], [1e6, 7], [1e30, 20]])
    got = evaluate_bound("margulis_scale", {"C": 1.5, "K": 0.0, "r0": 1}, nu=nu)
    assert got == 1.5    # nu(1.5^3 + 1) = nu(4.375) = 3, halved
    got = evaluate_bound("margulis_scale", {"N": 1}, nu=nu)
    assert got == 10.0   # nu(300^3) = 20, halved
    val = evaluate_bound("systole_busemann",
                         {"D": 1, "C": 2, "K": 0, "r0": 1}, nu=nu)
    assert val > 0
    with pytest.raises(DomainError):
        evaluate_bound("margulis_scale", {"C": 2, "K": 0, "r0": 1})
    with pytest.raises(DomainError):
        NuOracle([[10, 5], [100, 3]])   # not monotone


def test_bound_cross_check_directions():
    rep = bound_cross_check("generators", 13, {"N": 2, "K": 0, "D": 5})
    assert rep.holds and rep.direction == "measured<=bound"
    rep = bound_cross_check("systole_lower", 5,
                            {"D": 4, "C": 5, "K": 0, "r0": 5})
    assert rep.holds and rep.direction == "measured>=bound"
    rep = bound_cross_check("generators", 1e9, {"N": 1, "K": 0, "D": 0})
    assert not rep.holds


# -- strengthened bounds -------------------------------------------------------------


def test_strengthened_bg_on_torus_setup():
    space = CayleySpace(FreeAbelianFamily(2))
    act5 = torus_action(5)
    mu = VertexMeasure()     # the (5Z)^2-invariant full-vertex measure
    cert = check_weak_bg(space, mu, (0, 0), BGParams(1, 5.0 + 1e-6, 0.0), 16)
    assert cert.verified
    rows = strengthened_bg_check(act5, (0, 0), cert, D=4,
                                 pairs=[(2, 6), (1, 6)])
    assert all(row.holds for row in rows if row.holds is not None)
    kinds = {row.formula for row in rows}
    assert {"open-ratio(i)", "closed-ratio(ii)", "packing(iii)"} <= kinds
    pack_row = next(r for r in rows if r.formula == "packing(iii)")
    assert pack_row.r == 1 and pack_row.R == 6


def test_generator_count_formula():
    got = evaluate_bound("generator_count",
                         {"C": 2, "D": 1, "K": 0, "eps0": 1})
    # C (1 + 4D/eps)^(lnC/ln2) e^{K(2D + eps/2)} = 2 * 5^1 * 1
    assert math.isclose(got, 10.0, rel_tol=1e-12)


def test_torsion_free_systole_dominates():
    acts = [torus_action(4), LeftTranslationAction(FreeFamily(2))]
    samples = [[(0, 0), (1, 1)], [(), (1,)]]
    for act, sample in zip(acts, samples):
        rep = systole(act, sample)
        for p in rep.per_point:
            assert p.torsion_free_systole >= p.systole


def test_diastole_consistency_with_nu():
    from bgkit.actions import diastole_consistency
    nu = NuOracle([[1e3, 4], [1e9, 8]])
    act = torus_action(5)
    params = BGParams(1, 5.0, 0.1)
    rep = diastole_consistency(act, [(0, 0), (2, 1)], params, nu)
    # bound = r0 / (nu(...)/2) = 1/2 <= measured diastole 5
    assert rep["holds"]
    assert rep["diastole"] == 5.0
    with pytest.raises(DomainError):
        diastole_consistency(act, [(0, 0)], params, None)


def test_weak_certificate_monotone_in_parameters():
    import random as _random
    from bgkit.presets import free_instance, lattice_instance
    rng = _random.Random(5)
    for space, _a, mu in (lattice_instance(), free_instance()):
        center = space.identity()
        for _ in range(12):
            r0 = Fraction(rng.randint(50, 200), 100)
            C = 1.5 + 8 * rng.random()
            K = 0.3 + 1.5 * rng.random()
            base = check_weak_bg(space, mu, center, BGParams(r0, C, K), 8)
            if base.status != "verified":
                continue
            bigger = check_weak_bg(space, mu, center,
                                   BGParams(r0, C * 1.7, K + 0.4), 8)
            assert bigger.status == "verified"


def test_thin_set_ceiling_treats_unmoved_points_as_thick():
    space = CayleySpace(FreeAbelianFamily(1))
    act = LatticeTranslationAction(space, [[10]])
    sample = [(0,), (1,)]
    adjacency = {(0,): [(1,)], (1,): [(0,)]}
    rep = thin_set(act, 2, sample, adjacency, ceiling=4)
    assert rep.verdict == "empty"
    assert not any(rep.membership.values())
