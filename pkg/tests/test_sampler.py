import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geosampling.core import SURFACES, SignalSpec, build_signal, estimate_curvature
from geosampling.sampler import (SamplingError, check_density, nearest_neighbor_spacing, nyquist_compare,
                                 sample_adaptive, sample_uniform)


def brute_force_invariants(signal, s):
    """Independent O(n^2) check of the min-rule separation."""
    P, eta = s.positions, s.eta
    for i in range(len(P)):
        for j in range(i + 1, len(P)):
            assert np.linalg.norm(P[i] - P[j]) >= min(eta[i], eta[j]) - 1e-12


@pytest.mark.parametrize("name", SURFACES)
@pytest.mark.parametrize("rho", [0.2, 0.5, 0.8])
def test_separated_and_maximal(name, rho):
    sig = build_signal(SignalSpec(name, shape=(41, 41)))
    curv = estimate_curvature(sig)
    s = sample_adaptive(sig, curv, rho)
    rep = check_density(sig, s)
    assert rep["separated"] and rep["maximal"]
    # maximality in the min-rule sense: each unselected node q conflicts with some a
    P, eta = s.positions, s.eta
    eta_q = rho * curv.radius.ravel()
    G = sig.ambient_points()
    diff = G[:, None, :] - P[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    blocked = (d2 < np.minimum(eta_q[:, None], eta[None, :]) ** 2).any(axis=1)
    assert np.all(blocked | np.isin(np.arange(len(G)), s.indices))


def test_brute_force_separation_on_bump():
    sig = build_signal(SignalSpec("gaussian-bump", shape=(33, 33)))
    s = sample_adaptive(sig, estimate_curvature(sig), 0.3)
    brute_force_invariants(sig, s)


def test_adaptive_is_denser_where_curved():
    sig = build_signal(SignalSpec("gaussian-bump"))
    s = sample_adaptive(sig, estimate_curvature(sig), 0.5)
    nn = nearest_neighbor_spacing(s)
    r = np.linalg.norm(s.domain_positions, axis=1)
    assert nn[r < 0.3].mean() < nn[r > 0.7].mean()


def test_uniform_precondition_and_packing_bound():
    sig = build_signal(SignalSpec("plane", shape=(41, 41)))
    curv = estimate_curvature(sig)
    with pytest.raises(SamplingError):
        sample_uniform(sig, curv, curv.omega_min)
    eta = 0.1
    s = sample_uniform(sig, curv, eta)
    # disks of radius eta/2 are disjoint and lie in the domain dilated by eta/2
    assert len(s) <= (1 + eta) ** 2 / (np.pi * (eta / 2) ** 2)
    assert check_density(sig, s)["maximal"]


def test_rho_range_and_alignment():
    sig = build_signal(SignalSpec("plane", shape=(9, 9)))
    curv = estimate_curvature(sig)
    for rho in (0.0, 1.0, 1.5):
        with pytest.raises(SamplingError):
            sample_adaptive(sig, curv, rho)
    other = estimate_curvature(build_signal(SignalSpec("plane", shape=(11, 11))))
    with pytest.raises(SamplingError):
        sample_adaptive(sig, other, 0.5)


def test_corners_and_endpoints_are_samples():
    sig = build_signal(SignalSpec("sphere-cap", {"r": 2, "disk": 1}, shape=(41, 41)))
    s = sample_adaptive(sig, estimate_curvature(sig), 0.5)
    assert set(sig.corner_indices()) <= set(s.indices)
    sine = build_signal(SignalSpec("sine"))
    s1 = sample_adaptive(sine, estimate_curvature(sine), 0.5)
    assert {0, len(sine.values) - 1} <= set(s1.indices)


def test_determinism_and_seed_dependence():
    sig = build_signal(SignalSpec("gaussian-bump", shape=(33, 33)))
    curv = estimate_curvature(sig)
    a = sample_adaptive(sig, curv, 0.4, seed=7)
    b = sample_adaptive(sig, curv, 0.4, seed=7)
    c = sample_adaptive(sig, curv, 0.4, seed=8)
    assert np.array_equal(a.indices, b.indices)
    assert not np.array_equal(a.indices, c.indices)


def test_rows_pad_curves_with_zero():
    sine = build_signal(SignalSpec("sine"))
    s = sample_adaptive(sine, estimate_curvature(sine), 0.5)
    row = next(s.rows())
    assert len(row) == 6 and row[3] == 0.0


def test_nyquist_compare_on_sine():
    sine = build_signal(SignalSpec("sine"))
    curv = estimate_curvature(sine)
    r = nyquist_compare(sine, curv, rho=0.5)
    assert r["k_max"] == pytest.approx(1.0, rel=1e-3)
    assert r["bandwidth_geo"] == pytest.approx(0.5, rel=1e-3)
    # the curvature-adaptive set never needs more points than the global-rate one
    assert r["count_adaptive"] <= r["count_uniform"]


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 0.9), st.integers(0, 10_000))
def test_invariants_hold_for_any_seed(rho, seed):
    sig = build_signal(SignalSpec("gaussian-bump", shape=(25, 25)))
    s = sample_adaptive(sig, estimate_curvature(sig), rho, seed)
    rep = check_density(sig, s)
    assert rep["separated"] and rep["maximal"]
