import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.distance import directed_hausdorff

from geosampling.core import SignalSpec, build_signal, estimate_curvature
from geosampling.reconstruct import (LOWER_BOUND, UPPER_BOUND, OutOfDomainError, delta_approximation_check,
                                     hausdorff_distance, metric_distortion, pointwise_gap, reconstruction_errors,
                                     secant_reconstruct)
from geosampling.sampler import sample_adaptive
from geosampling.triangulate import delaunay


def pipeline(signal, rho, omega_max=None, seed=42):
    curv = estimate_curvature(signal, omega_max)
    cx = delaunay(sample_adaptive(signal, curv, rho, seed), signal)
    return secant_reconstruct(signal, cx)


def test_plane_is_reproduced_exactly():
    sig = build_signal(SignalSpec("plane", {"a": 0.7, "b": -1.3, "c": 0.25}, shape=(33, 33)))
    pl = pipeline(sig, 0.3)
    err = reconstruction_errors(sig, pl)
    assert err["sup_gap"] <= 1e-12 and err["hausdorff"] <= 1e-12
    assert err["covered_fraction"] == 1.0
    assert np.allclose(pl.simplex_gradients(), [0.7, -1.3])


def test_secant_map_interpolates_vertices(sphere):
    sig, _ = sphere
    pl = pipeline(sig, 0.3)
    cx = pl.complex
    assert np.allclose(pl(cx.domain), cx.ambient[:, -1], atol=1e-12)


def test_point_location_against_brute_force(sphere):
    sig, _ = sphere
    pl = pipeline(sig, 0.3)
    cx = pl.complex
    rng = np.random.default_rng(1)
    q = sig.origin + rng.random((300, 2)) * np.array(sig.extent)
    found, bary = pl.locate(q)
    assert np.all(found >= 0)
    assert np.allclose(bary.sum(axis=1), 1.0)
    assert np.all(bary >= -1e-9)
    P = cx.domain[cx.simplices]
    for k in range(len(q)):
        # barycentric coordinates reproduce the query point in the found triangle
        assert np.allclose(bary[k] @ P[found[k]], q[k])


def test_outside_handling(sphere):
    sig, _ = sphere
    pl = pipeline(sig, 0.3)
    with pytest.raises(OutOfDomainError):
        pl([[10.0, 10.0]])
    assert np.isnan(pl([[10.0, 10.0]], outside="nan")[0])


def test_curve_reconstruction_is_linear_interpolation():
    sig = build_signal(SignalSpec("sine"))
    pl = pipeline(sig, 0.3)
    t = sig.axes()[0]
    cx = pl.complex
    order = np.argsort(cx.domain[:, 0])
    ref = np.interp(t, cx.domain[order, 0], cx.ambient[order, 1])
    assert np.allclose(pl(t), ref)
    assert np.nanmax(pointwise_gap(sig, pl)) > 0


def test_sphere_errors_converge(sphere):
    sig, _ = sphere
    rows = [reconstruction_errors(sig, pipeline(sig, rho)) for rho in (0.6, 0.3, 0.15)]
    for a, b in zip(rows, rows[1:]):
        assert a["sup_gap"] / b["sup_gap"] >= 2
        assert a["hausdorff"] / b["hausdorff"] >= 2
    # interpolation error of a C^2 function: |f - L| <= max|D^2 f| * h^2 / 2 with h the mesh;
    # for this cap the Hessian norm stays below 0.6 (about 0.54 at the corners)
    for r in rows:
        assert r["sup_gap"] <= 0.5 * 0.6 * r["mesh"] ** 2


def test_metric_distortion_on_sphere(sphere):
    sig, _ = sphere
    rep = metric_distortion(sig, pipeline(sig, 0.1), pair_budget=2000, seed=3)
    assert rep.interior_pairs == 2000
    assert rep.within_bounds_fraction >= 0.99
    assert rep.bound_violation_count == len(rep.violations)
    assert LOWER_BOUND <= rep.ratio_min <= rep.ratio_mean <= rep.ratio_max <= UPPER_BOUND
    d = rep.to_dict()
    assert d["bounds"] == [0.75, 5 / 3]


def test_metric_distortion_plane_is_isometric():
    sig = build_signal(SignalSpec("plane", {"a": 0.4, "b": 0.1}, shape=(49, 49)))
    rep = metric_distortion(sig, pipeline(sig, 0.1, omega_max=1.0), pair_budget=300)
    assert rep.interior_pairs > 0
    assert rep.ratio_min == pytest.approx(1.0, abs=1e-12) and rep.ratio_max == pytest.approx(1.0, abs=1e-12)


def test_violations_are_logged_with_coordinates():
    # a 5x5-vertex triangulation of a corrugated surface flattens its paths far below 3/4
    from geosampling.core import from_raster

    x = np.linspace(0, 1, 61)
    X, _ = np.meshgrid(x, x)
    sig = from_raster(0.2 * np.sin(40 * X))
    keep = (np.arange(61) % 15 == 0)
    nodes = np.flatnonzero(np.outer(keep, keep).ravel())
    pl = secant_reconstruct(sig, delaunay(sig.ambient_points()[nodes], sig))
    rep = metric_distortion(sig, pl, pair_budget=500, min_separation=0.05, boundary_band=0.0)
    assert rep.bound_violation_count > 0
    v = rep.violations[0]
    assert set(v) == {"x", "y", "d_M", "d_PL", "ratio"} and len(v["x"]) == 3
    assert not LOWER_BOUND <= v["ratio"] <= UPPER_BOUND


def test_delta_check(sphere):
    sig, _ = sphere
    pl = pipeline(sig, 0.15)
    gap = float(np.nanmax(pointwise_gap(sig, pl)))
    loose = delta_approximation_check(sig, pl, 1.0)
    assert loose["passed"]
    tight = delta_approximation_check(sig, pl, gap)
    assert not tight["pointwise_pass"]  # condition (ii) is strict
    assert tight["worst_points"][0]["gap"] == pytest.approx(gap)


point_sets = st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=15)


@settings(max_examples=60, deadline=None)
@given(point_sets, point_sets, point_sets)
def test_hausdorff_metric_axioms(a, b, c):
    A, B, C = (np.array(v) for v in (a, b, c))
    dab = hausdorff_distance(A, B)
    assert dab == pytest.approx(hausdorff_distance(B, A))
    assert hausdorff_distance(A, A) == 0
    assert dab <= hausdorff_distance(A, C) + hausdorff_distance(C, B) + 1e-9
    ref = max(directed_hausdorff(A, B)[0], directed_hausdorff(B, A)[0])
    assert dab == pytest.approx(ref)


def test_hausdorff_empty_raises():
    with pytest.raises(ValueError):
        hausdorff_distance(np.empty((0, 2)), np.zeros((1, 2)))
