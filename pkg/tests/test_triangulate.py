import itertools
import math
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geosampling.core import SignalSpec, build_signal, estimate_curvature
from geosampling.sampler import sample_adaptive
from geosampling.triangulate import (DegenerateInputError, bowyer_watson, delaunay, fatness_equivalence_check,
                                     polygon_area, quality, triangle_neighbors, triangle_quality, voronoi_cells)


def circumcircle(a, b, c):
    d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    ux = ((a @ a) * (b[1] - c[1]) + (b @ b) * (c[1] - a[1]) + (c @ c) * (a[1] - b[1])) / d
    uy = ((a @ a) * (c[0] - b[0]) + (b @ b) * (a[0] - c[0]) + (c @ c) * (b[0] - a[0])) / d
    centre = np.array([ux, uy])
    return centre, np.linalg.norm(a - centre)


def brute_force_delaunay(P, tol=1e-9):
    """Every triple whose circumcircle is empty of the other points (O(n^4))."""
    out = set()
    for i, j, k in itertools.combinations(range(len(P)), 3):
        a, b, c = P[i], P[j], P[k]
        if abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) < 1e-12:
            continue
        centre, r = circumcircle(a, b, c)
        d = np.linalg.norm(P - centre, axis=1)
        d[[i, j, k]] = np.inf
        if np.all(d > r * (1 + tol)):
            out.add((i, j, k))
    return out


def as_set(tri):
    return {tuple(sorted(map(int, t))) for t in tri}


def test_matches_brute_force_on_random_sets():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n = int(rng.integers(3, 13))
        P = rng.random((n, 2))
        assert as_set(bowyer_watson(P)) == brute_force_delaunay(P)


def test_output_is_ccw_and_euler():
    rng = np.random.default_rng(5)
    P = rng.random((60, 2))
    tri = bowyer_watson(P)
    a, b, c = P[tri[:, 0]], P[tri[:, 1]], P[tri[:, 2]]
    assert np.all((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]) > 0)
    cx = delaunay(np.column_stack([P, np.zeros(len(P))]))
    k = cx.counts()
    assert k["V"] - k["E"] + k["F"] == 1
    nb = triangle_neighbors(tri)
    assert (nb == -1).sum() == len(set(map(tuple, cx.edges()))) * 2 - 3 * len(tri)


def test_cocircular_grid_is_a_valid_triangulation():
    g = np.stack(np.meshgrid(np.arange(5.0), np.arange(4.0)), -1).reshape(-1, 2)
    tri = bowyer_watson(g)
    area = sum(abs(polygon_area(g[t])) for t in tri)
    assert area == pytest.approx(4 * 3)
    assert len(tri) == 2 * 4 * 3
    # no point strictly inside any circumcircle
    for t in tri:
        centre, r = circumcircle(*g[t])
        assert np.all(np.linalg.norm(g - centre, axis=1) >= r - 1e-9)


def test_degenerate_inputs():
    for P in ([[0, 0], [1, 1]], [[0, 0]] * 4, [[0, 0], [1, 1], [2, 2], [3, 3]]):
        with pytest.raises(DegenerateInputError):
            bowyer_watson(np.array(P, float))
    # collinear prefix followed by an off-line point
    P = np.array([[0, 0], [1, 0], [2, 0], [3, 0], [1.5, 1.0]])
    assert len(bowyer_watson(P)) == 3
    # duplicates are tolerated and left unused
    P = np.array([[0, 0], [1, 0], [0, 1], [1, 0], [1, 1]], float)
    assert len(bowyer_watson(P)) == 2


def _triangulations(P, start):
    """All triangulations reachable by edge flips (the whole flip graph for points in general position)."""
    def key(tris):
        return frozenset(tuple(sorted(t)) for t in tris)

    seen = {key(start)}
    queue = deque([key(start)])
    while queue:
        T = queue.popleft()
        yield T
        edges = {}
        for t in T:
            for e in itertools.combinations(t, 2):
                edges.setdefault(e, []).append(t)
        for e, ts in edges.items():
            if len(ts) != 2:
                continue
            (c,) = set(ts[0]) - set(e)
            (d,) = set(ts[1]) - set(e)
            a, b = e
            # convex quadrilateral iff the diagonals cross
            def side(p, q, r):
                return np.sign((P[q][0] - P[p][0]) * (P[r][1] - P[p][1]) - (P[q][1] - P[p][1]) * (P[r][0] - P[p][0]))
            if side(a, b, c) * side(a, b, d) < 0 and side(c, d, a) * side(c, d, b) < 0:
                new = (T - {ts[0], ts[1]}) | {tuple(sorted((a, c, d))), tuple(sorted((b, c, d)))}
                k = key(new)
                if k not in seen:
                    seen.add(k)
                    queue.append(k)


def _angles(P, T):
    out = []
    for t in T:
        q = triangle_quality(P[t[0]], P[t[1]], P[t[2]])
        a, b, c = (np.linalg.norm(P[t[i]] - P[t[j]]) for i, j in ((1, 2), (2, 0), (0, 1)))
        for opp, s1, s2 in ((a, b, c), (b, c, a), (c, a, b)):
            out.append(math.acos(np.clip((s1 * s1 + s2 * s2 - opp * opp) / (2 * s1 * s2), -1, 1)))
        assert q.min_angle[0] == pytest.approx(min(out[-3:]))
    return sorted(out)


def test_delaunay_maximises_angle_vector():
    rng = np.random.default_rng(11)
    for _ in range(10):
        P = rng.random((int(rng.integers(5, 9)), 2))
        tri = [tuple(t) for t in bowyer_watson(P)]
        best = _angles(P, tri)
        count = 0
        for T in _triangulations(P, tri):
            count += 1
            assert _angles(P, T) <= best  # lexicographic on increasing angles
        assert count >= 1


def test_fatness_constants():
    eq = triangle_quality([0, 0], [1, 0], [0.5, math.sqrt(3) / 2])
    assert abs(eq.fatness_rr[0] - 0.5) < 1e-12
    assert eq.min_angle[0] == pytest.approx(math.pi / 3, abs=1e-12)
    ri = triangle_quality([0, 0], [1, 0], [0, 1])
    assert abs(ri.fatness_rr[0] - (math.sqrt(2) - 1)) < 1e-12
    assert ri.fatness_voldiam[0] == pytest.approx(0.5 / 2)
    deg = triangle_quality([0, 0], [1, 0], [2, 0])
    assert deg.degenerate[0] and deg.fatness_rr[0] == 0


def test_fatness_is_similarity_invariant_in_3d():
    rng = np.random.default_rng(3)
    A, B, C = rng.random((3, 20, 3))
    q = triangle_quality(A, B, C)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    s = 4.2
    q2 = triangle_quality(s * A @ Q + 1, s * B @ Q + 1, s * C @ Q + 1)
    assert np.allclose(q.fatness_rr, q2.fatness_rr)
    assert np.allclose(q.min_angle, q2.min_angle)
    assert np.allclose(q2.in_radius, s * q.in_radius)


def test_equivalence_needles_bounded_caps_not():
    a = np.logspace(-1, -4, 4)
    needle = triangle_quality(np.zeros((4, 2)), np.column_stack([np.ones(4), 0 * a]),
                              np.column_stack([np.zeros(4), a]))
    cap = triangle_quality(np.zeros((4, 2)), np.column_stack([np.ones(4), 0 * a]),
                           np.column_stack([0.5 * np.ones(4), a]))
    rn = fatness_equivalence_check(needle)
    rc = fatness_equivalence_check(cap)
    # needles: angle ~ a, r/R ~ a, vol/diam ~ a -> every ratio stays in a fixed bracket
    assert rn["angle_vs_rr"]["c"] < 3
    # caps: r/R ~ a^2 while angle ~ a, so angle/(r/R) blows up like 1/a
    assert rc["angle_vs_rr"]["max"] > 0.5 / a[-1]


def test_lifted_quality_and_curve_complex():
    sig = build_signal(SignalSpec("sphere-cap", {"r": 2, "disk": 1}, shape=(41, 41)))
    cx = delaunay(sample_adaptive(sig, estimate_curvature(sig), 0.3), sig)
    q = quality(cx)
    assert q.complex_fatness > 0 and not q.degenerate.any()
    assert cx.summary()["fatness"] == q.complex_fatness
    sine = build_signal(SignalSpec("sine"))
    s = sample_adaptive(sine, estimate_curvature(sine), 0.5)
    cc = delaunay(s, sine)
    assert cc.is_curve and len(cc.simplices) == len(s) - 1
    assert np.all(np.diff(cc.domain[cc.simplices[:, 1], 0] - cc.domain[cc.simplices[:, 0], 0]) > -np.inf)
    assert np.all(cc.domain[cc.simplices[:, 1], 0] > cc.domain[cc.simplices[:, 0], 0])


def test_voronoi_cells_partition_the_domain():
    rng = np.random.default_rng(8)
    P = rng.random((40, 2))
    cx = delaunay(np.column_stack([P, np.zeros(40)]))
    cells = voronoi_cells(cx, ((0, 0), (1, 1)))
    assert sum(polygon_area(c) for c in cells) == pytest.approx(1.0, abs=1e-12)
    brute = voronoi_cells(P, ((0, 0), (1, 1)))
    assert all(polygon_area(a) == pytest.approx(polygon_area(b)) for a, b in zip(cells, brute))
    Q = rng.random((500, 2))
    owner = np.argmin(np.linalg.norm(Q[:, None] - P[None], axis=-1), axis=1)
    for q, o in zip(Q, owner):
        poly = cells[o]
        x, y = poly[:, 0], poly[:, 1]
        cross = (np.roll(x, -1) - x) * (q[1] - y) - (np.roll(y, -1) - y) * (q[0] - x)
        assert np.all(cross >= -1e-12)


def test_voronoi_intervals_for_curves():
    cells = voronoi_cells(np.array([0.4, 0.0, 1.0]), ((0.0,), (1.0,)))
    assert cells == [(0.2, 0.7), (0.0, 0.2), (0.7, 1.0)]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=3, max_size=30, unique=True))
def test_triangulation_covers_hull(pts):
    P = np.array(pts)
    from scipy.spatial import ConvexHull, QhullError
    try:
        hull = ConvexHull(P)
    except QhullError:
        return
    if hull.volume < 1e-6:
        return
    tri = bowyer_watson(P)
    area = sum(abs(polygon_area(P[t])) for t in tri)
    assert area == pytest.approx(hull.volume, rel=1e-7, abs=1e-12)


def test_jittered_grid_clusters_cover_the_hull():
    from scipy.spatial import ConvexHull

    rng = np.random.default_rng(0)
    for jitter in (0.0, 1e-15, 1e-12, 1e-9):
        for _ in range(15):
            g = rng.integers(0, 5, (int(rng.integers(10, 50)), 2)) / 4.0
            P = np.unique(g + jitter * rng.standard_normal(g.shape), axis=0)
            hull = ConvexHull(P)
            tri = bowyer_watson(P)
            assert sum(abs(polygon_area(P[t])) for t in tri) == pytest.approx(hull.volume, abs=1e-9)


def test_exact_orientation_near_collinear():
    from fractions import Fraction
    from geosampling.triangulate import incircle_sign, orient_sign

    rng = np.random.default_rng(4)
    base = np.array([0.5, 0.5])
    for _ in range(200):
        d = rng.random(2)
        c = base + 12 * d + rng.integers(-3, 4) * np.finfo(float).eps * rng.random(2)
        b = base + 5 * d
        exact = (Fraction(b[0]) - Fraction(base[0])) * (Fraction(c[1]) - Fraction(base[1])) \
            - (Fraction(b[1]) - Fraction(base[1])) * (Fraction(c[0]) - Fraction(base[0]))
        assert orient_sign(base, b, c)[0] == (exact > 0) - (exact < 0)
    # four co-circular lattice points and tiny perturbations across the circle
    a, b, c = np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([-1.0, 0.0])
    assert incircle_sign(a, b, c, np.array([0.0, -1.0]))[0] == 0
    assert incircle_sign(a, b, c, np.array([0.0, -1.0 + 1e-16]))[0] == 1
    assert incircle_sign(a, b, c, np.array([0.0, -1.0 - 2e-16]))[0] == -1
