import itertools
import math
import random
from fractions import Fraction

import pytest

from bgkit import spaces
from bgkit.exact import DomainError, WindowError
from bgkit.groups import FreeAbelianFamily, FreeFamily
from bgkit.spaces import (CayleySpace, FiniteMetricSpace, GluedLineSpace,
                          ModelProfile, TripodSpace, WeightedGraph,
                          build_glued_line, build_tripod, distance,
                          enumerate_ball, model_ball_volume, validate_metric)


def lattice(k=2):
    return CayleySpace(FreeAbelianFamily(k))


def free_cayley(k=2):
    return CayleySpace(FreeFamily(k))


def grid_graph(n):
    verts = [(i, j) for i in range(n) for j in range(n)]
    edges = []
    for i, j in verts:
        if i + 1 < n:
            edges.append(((i, j), (i + 1, j), 1))
        if j + 1 < n:
            edges.append(((i, j), (i, j + 1), 1))
    return WeightedGraph(verts, edges)


def cycle_graph(n, weight=1):
    verts = list(range(n))
    edges = [(i, (i + 1) % n, weight) for i in range(n)]
    return WeightedGraph(verts, edges)


# -- distances --------------------------------------------------------------


def test_distance_identity_everywhere():
    gl = build_glued_line("1/10", "1/2", 30)
    tri = build_tripod(3, 2, 1)
    grid = grid_graph(4)
    for space, pt in [(gl, gl.tip(3)), (tri, "y"), (grid, (2, 1)),
                      (lattice(), (0, 0)), (free_cayley(), (1, 2))]:
        assert distance(space, pt, pt) == 0


def test_glued_line_tip_distances():
    gl = build_glued_line("1/10", "1/2", 30)
    # tip to tip crosses both hairs and the base segment
    assert distance(gl, gl.tip(0), gl.tip(3)) == Fraction(13, 10)
    assert distance(gl, gl.tip(0), gl.tip(1)) == Fraction(11, 10)
    assert distance(gl, gl.tip(0), gl.base(0)) == Fraction(1, 2)


def test_glued_line_matches_discretized_graph():
    gl = build_glued_line("1/10", "1/2", 12)
    graph = gl.discretized_graph()
    for k, l in itertools.combinations(range(-12, 13), 2):
        direct = gl.distance(gl.tip(k), gl.tip(l))
        via_graph = graph.vertex_distance(("t", k), ("t", l))
        assert direct == via_graph


def test_tripod_distances():
    tri = build_tripod(3, 2, 1)
    assert distance(tri, "x", "y") == 5
    assert distance(tri, "c", "x") == 3
    equi = build_tripod(1, 1, 1)
    assert {distance(equi, a, b) for a, b in [("x", "y"), ("y", "z"), ("x", "z")]} == {2}
    degenerate = build_tripod(0, 0, 0)
    assert distance(degenerate, "x", "z") == 0
    assert degenerate.validate()["issues"]   # degeneracy is reported


def test_build_validations():
    with pytest.raises(DomainError):
        build_glued_line(0, 1, 5)
    with pytest.raises(DomainError):
        build_glued_line(1, -1, 5)
    with pytest.raises(DomainError):
        build_tripod(-1, 0, 0)


def test_metric_axioms_on_sampled_triples():
    rng = random.Random(42)
    gl = build_glued_line("1/10", "1/2", 10)
    tri = build_tripod(3, 2, 1)
    grid = grid_graph(4)
    cay = lattice()
    candidates = {
        gl: gl.support(),
        tri: tri.support(),
        grid: grid.support(),
        cay: [(rng.randint(-4, 4), rng.randint(-4, 4)) for _ in range(20)],
    }
    for space, pts in candidates.items():
        for _ in range(300):
            x, y, z = (rng.choice(pts) for _ in range(3))
            dxy, dyz, dxz = (space.distance(x, y), space.distance(y, z),
                             space.distance(x, z))
            assert dxy == space.distance(y, x)
            assert dxz <= dxy + dyz
            assert dxy >= 0


# -- balls -------------------------------------------------------------------


def test_lattice_ball_counts():
    cay = lattice()
    assert len(enumerate_ball(cay, (0, 0), 3, closed=False)) == 13
    assert len(enumerate_ball(cay, (0, 0), 3, closed=True)) == 25
    # closed count 2r^2+2r+1 for a few radii
    for r in range(0, 7):
        assert len(enumerate_ball(cay, (0, 0), r, closed=True)) == 2 * r * r + 2 * r + 1
        assert cay.ball_count(r, closed=True) == 2 * r * r + 2 * r + 1


def test_free_group_ball_counts():
    cay = free_cayley(2)
    e = cay.identity()
    for r in range(0, 6):
        assert len(enumerate_ball(cay, e, r, closed=True)) == 2 * 3 ** r - 1
        assert cay.ball_count(r, closed=True) == 2 * 3 ** r - 1
    assert len(enumerate_ball(cay, e, 3, closed=True)) == 53


def test_ball_zero_radius_and_monotonicity():
    cay = lattice()
    assert enumerate_ball(cay, (0, 0), 0, closed=False) == []
    prev = set()
    for r in [Fraction(1, 2), 1, Fraction(3, 2), 2, 3]:
        cur = {p for p, _ in enumerate_ball(cay, (0, 0), r, closed=False)}
        assert prev <= cur
        prev = cur


def test_open_ball_equals_closed_at_previous_support_distance():
    cay = lattice()
    opened = {p for p, _ in enumerate_ball(cay, (0, 0), 3, closed=False)}
    closed_prev = {p for p, _ in enumerate_ball(cay, (0, 0), 2, closed=True)}
    assert opened == closed_prev


def test_glued_line_window_guard():
    gl = build_glued_line(1, 1, 3)
    with pytest.raises(WindowError):
        enumerate_ball(gl, gl.base(0), 10, closed=True)


def test_cayley_support_is_guarded():
    with pytest.raises(WindowError):
        lattice().support()


# -- validate_metric ---------------------------------------------------------


def test_validate_finite_metric():
    good = FiniteMetricSpace([[0, 5, 4], [5, 0, 3], [4, 3, 0]], labels="abc")
    assert validate_metric(good)["ok"]
    bad = FiniteMetricSpace([[0, 10, 1], [10, 0, 1], [1, 1, 0]], labels="abc",
                            validate=False)
    report = validate_metric(bad)
    assert not report["ok"]
    assert any("triangle" in issue for issue in report["issues"])
    with pytest.raises(DomainError):
        FiniteMetricSpace([[0, 10, 1], [10, 0, 1], [1, 1, 0]])


def test_validate_disconnected_graph():
    graph = WeightedGraph([0, 1, 2, 3], [(0, 1, 1), (2, 3, 1)])
    report = validate_metric(graph)
    assert not report["ok"]
    assert any("disconnected" in issue for issue in report["issues"])
    with pytest.raises(DomainError):
        graph.vertex_distance(0, 3)


def test_graph_edge_points():
    graph = cycle_graph(4)
    mid = graph.edge_point(0, Fraction(1, 2))
    assert graph.distance(mid, 0) == Fraction(1, 2)
    assert graph.distance(mid, 2) == Fraction(3, 2)
    assert graph.edge_point(0, 0) == 0
    assert graph.edge_point(0, 1) == 1


def test_lex_geodesic_and_point_along():
    grid = grid_graph(4)
    path = grid.lex_geodesic((0, 0), (2, 2))
    assert path[0] == (0, 0) and path[-1] == (2, 2)
    assert grid.path_length(path) == 4
    quarter = grid.point_along(path, Fraction(1, 2))
    assert grid.distance((0, 0), quarter) == Fraction(1, 2)
    # deterministic: repeated materialization gives the same path
    assert path == grid.lex_geodesic((0, 0), (2, 2))


# -- model profiles ----------------------------------------------------------


def test_model_volume_flat_doubling_is_2_to_n():
    for n in (2, 3, Fraction(5, 2)):
        prof = ModelProfile(0, n)
        ratio = model_ball_volume(prof, 2) / model_ball_volume(prof, 1)
        assert math.isclose(ratio, 2.0 ** float(n), rel_tol=1e-8)


def test_model_volume_matches_closed_form_hyperbolic():
    prof = ModelProfile(-1, 2)
    got = model_ball_volume(prof, 1)
    assert math.isclose(got, math.cosh(1) - 1, rel_tol=1e-9)


def test_model_volume_zero_radius_and_domain():
    assert model_ball_volume(ModelProfile(-1, 2), 0) == 0.0
    with pytest.raises(DomainError):
        ModelProfile(0, 1)
    with pytest.raises(DomainError):
        model_ball_volume(ModelProfile(0, 2), -1)


def test_model_volume_negative_curvature_doubling_bound():
    # doubling ratio stays under 2^n * exp((n-1) sqrt|kappa| R)
    for kappa in (-1, Fraction(-1, 4)):
        for n in (2, 3):
            prof = ModelProfile(kappa, n)
            for R in (0.5, 1.0, 2.0, 4.0):
                ratio = model_ball_volume(prof, 2 * R) / model_ball_volume(prof, R)
                bound = 2.0 ** n * math.exp((n - 1) * math.sqrt(-float(kappa)) * R)
                assert ratio <= bound * (1 + 1e-9)


def test_space_from_spec_roundtrip():
    spec = {"kind": "glued_line", "eps": "1/10", "hair_length": "1/2", "window": 5}
    gl = spaces.space_from_spec(spec)
    assert isinstance(gl, GluedLineSpace)
    assert gl.distance(gl.tip(0), gl.tip(1)) == Fraction(11, 10)
    tri = spaces.space_from_spec({"kind": "tripod", "alpha": 3, "beta": 2, "gamma": 1})
    assert isinstance(tri, TripodSpace)
    cay = spaces.space_from_spec({"kind": "cayley",
                                  "group": {"family": "free", "params": 2}})
    assert cay.ball_count(3, closed=True) == 53


def test_distance_matrix_kernel_matches_dijkstra():
    rng = random.Random(11)
    verts = list(range(14))
    edges = []
    for i in range(13):
        edges.append((i, i + 1, Fraction(rng.randint(1, 9), rng.randint(1, 4))))
    for _ in range(8):
        u, v = rng.sample(verts, 2)
        edges.append((u, v, Fraction(rng.randint(1, 9), rng.randint(1, 4))))
    graph = WeightedGraph(verts, edges)
    matrix = graph.distance_matrix()
    for i, u in enumerate(verts):
        for j, v in enumerate(verts):
            assert matrix[i][j] == graph.vertex_distance(u, v)
    assert graph.diameter() == max(c for row in matrix for c in row)
