"""
Gaussian channel over a sampled manifold.

Code points are the samples of a geometric signal.  A transmitted point is
perturbed by i.i.d. Gaussian noise in every ambient coordinate and decoded
to the nearest code point.  The tube of radius below the smallest
osculatory radius is the region in which the nearest-point projection onto
the surface is unique.  The module also evaluates the classical code
figures (power, rate, capacity, bandwidth, energy, coding gain) in their
manifold form.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import norm

from .core import CurvatureField, GeometricSignal, Kind
from .sampler import SampleSet
from .triangulate import TriangulationComplex

TUBE_SAFETY = 0.9
BLOCK = 1024
RNG_NAME = "numpy PCG64 via SeedSequence(seed, spawn_key=(block,)), 1024 trials per block"


def unit_normals(signal: GeometricSignal) -> np.ndarray:
    """Upward unit normals of the graph at every grid node (flat, row-major)."""
    grads = signal.gradient()
    n = np.stack([-g.ravel() for g in grads] + [np.ones(signal.values.size)], axis=1)
    return n / np.linalg.norm(n, axis=1, keepdims=True)


@dataclass(frozen=True)
class TubeModel:
    tube_radius: float
    normals: np.ndarray
    omega_min: float
    sigma: float | None = None


def build_tube(signal: GeometricSignal, curv: CurvatureField, samples: SampleSet) -> TubeModel:
    """Normals at the samples and a tube radius ``0.9 * min omega``."""
    normals = unit_normals(signal)[samples.indices]
    return TubeModel(TUBE_SAFETY * curv.omega_min, normals, curv.omega_min)


def wilson_interval(k: int, n: int, confidence: float = 0.95):
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    z = norm.ppf(0.5 + confidence / 2)
    p = k / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return float(max(0.0, centre - half)), float(min(1.0, centre + half))


def _block_draws(seed, block, count, dim):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))
    u = rng.random(count)
    z = rng.standard_normal((count, dim))
    return u, z


def trial_noise(seed: int, trials: int, dim: int):
    """Per-trial uniform pick variates and standard normal noise vectors.

    Trial ``i`` always reads block ``i // 1024`` at offset ``i % 1024``, so
    its draws depend only on ``(seed, i)``.
    """
    us, zs = [], []
    for b in range(-(-trials // BLOCK)):
        u, z = _block_draws(seed, b, BLOCK, dim)
        us.append(u)
        zs.append(z)
    return np.concatenate(us)[:trials], np.concatenate(zs)[:trials]


def simulate_decode(tube: TubeModel, samples: SampleSet, sigma: float, trials: int,
                    seed: int = 42, confine_to_tube: bool = False) -> dict:
    """Monte Carlo symbol error rate of nearest-code-point decoding.

    With ``confine_to_tube`` the noise component along the true normal is
    redrawn until it lies inside the tube.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    P = samples.positions
    n, dim = P.shape
    u, z = trial_noise(seed, trials, dim)
    true = np.minimum((u * n).astype(np.int64), n - 1)
    noise = sigma * z
    normals = tube.normals[true]
    offset = np.einsum("ij,ij->i", noise, normals)
    if confine_to_tube and sigma > 0:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(2 ** 31,))))
        bad = np.abs(offset) >= tube.tube_radius
        while bad.any():
            new = sigma * rng.standard_normal(int(bad.sum()))
            noise[bad] += (new - offset[bad])[:, None] * normals[bad]
            offset[bad] = new
            bad = np.abs(offset) >= tube.tube_radius
    received = P[true] + noise
    _, decoded = cKDTree(P).query(received)
    errors = int(np.count_nonzero(decoded != true))
    outside = int(np.count_nonzero(np.abs(offset) > tube.tube_radius))
    lo, hi = wilson_interval(errors, trials)
    return {
        "sigma": float(sigma),
        "trials": int(trials),
        "errors": errors,
        "error_rate": errors / trials,
        "wilson_low": lo,
        "wilson_high": hi,
        "outside_tube_fraction": outside / trials,
        "tube_radius": tube.tube_radius,
        "code_points": int(n),
        "seed": int(seed),
        "rng": RNG_NAME,
        "decoded": decoded,
        "true": true,
    }


def error_rate_curve(tube, samples, sigmas, trials, seed=42):
    rows = []
    for s in sigmas:
        r = simulate_decode(tube, samples, s, trials, seed)
        rows.append([r["sigma"], r["error_rate"], r["wilson_low"], r["wilson_high"], r["outside_tube_fraction"]])
    return rows


# -- code metrics ----------------------------------------------------------------


def average_power(f_values: np.ndarray, spacing, volume: float) -> float:
    """``(1/Vol) * integral f^2`` by the trapezoid rule on a uniform grid."""
    f2 = np.asarray(f_values, dtype=float) ** 2
    for axis, h in reversed(list(enumerate(spacing))):
        f2 = np.trapezoid(f2, dx=h, axis=axis) if hasattr(np, "trapezoid") else np.trapz(f2, dx=h, axis=axis)
    return float(f2) / volume


def code_rate(n_points: int, volume: float) -> float:
    """``log2(N) / Vol`` bits per unit volume."""
    return float(np.log2(n_points)) / volume


def shannon_capacity(P: float, sigma: float, T: float = 1.0) -> float:
    """``(1/T) log2(1 + P / sigma^2)``; infinite for noiseless channels."""
    if sigma == 0:
        return float("inf")
    return float(np.log2(1.0 + P / sigma ** 2)) / T


def capacity_estimate(n_points: int, n_simplices: int, simplex_volume: float) -> float:
    """``log2(N) / (Vol(cell) * N1)`` with ``N1`` the number of cells."""
    return float(np.log2(n_points)) / (simplex_volume * n_simplices)


def classical_energy(f, bandwidth: float, t_range) -> float:
    """``(1/2W) * sum_k f(k / 2W)^2`` over the sample instants inside ``t_range``.

    ``f`` is a callable of ``t``.
    """
    step = 1.0 / (2.0 * bandwidth)
    lo, hi = t_range
    k = np.arange(np.ceil(lo / step - 1e-9), np.floor(hi / step + 1e-9) + 1)
    t = k * step
    return float(step * np.sum(np.asarray(f(t), dtype=float) ** 2))


def geometric_bandwidth(curv: CurvatureField) -> float:
    """``W = 1 / k_M`` (infinite on flat signals)."""
    return float("inf") if curv.k0 == 0 else 1.0 / curv.k0


@dataclass
class CodeMetrics:
    P: float
    R: float
    C: float
    W: float
    energy: float
    C0: float
    C0_infinite: bool
    N: int
    N1: int
    volume: float
    mu_min_sq_distance: float
    mu_curvature: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def code_metrics(signal: GeometricSignal, curv: CurvatureField, samples: SampleSet,
                 complex: TriangulationComplex, sigma: float, window_T: float | None = None) -> CodeMetrics:
    """Power, rate, capacity, bandwidth, energy and Shannon capacity of a sampled signal.

    The domain measure plays the role of the time window ``T`` unless
    ``window_T`` is given.  ``C`` uses the mean lifted simplex volume as
    the cell volume.  The energy sums squared samples taken at rate ``2W``
    along the scan of a curve; for surfaces (or ``W = inf``) it is the
    plain quadrature of ``f^2``.
    """
    vol = float(window_T) if window_T else signal.volume
    P = average_power(signal.values, signal.spacing, vol)
    N = len(samples)
    N1 = len(complex.simplices)
    R = code_rate(N, vol)
    C = capacity_estimate(N, N1, float(complex.simplex_volumes().mean()))
    W = geometric_bandwidth(curv)
    if signal.kind is Kind.CURVE and np.isfinite(W):
        (t,) = signal.axes()
        energy = classical_energy(lambda s: np.interp(s, t, signal.values), W, (t[0], t[-1]))
    else:
        energy = P * signal.volume
    mu_d, mu_k = code_mu(samples)
    return CodeMetrics(P, R, C, W, energy, shannon_capacity(P, sigma, 1.0 if window_T is None else window_T),
                       sigma == 0, N, N1, vol, mu_d, mu_k)


def code_mu(samples: SampleSet):
    """``mu`` of a geometric code: minimum squared inter-point distance and ``1 / min k``."""
    d, _ = cKDTree(samples.positions).query(samples.positions, k=2)
    kmin = float(samples.curvature.min())
    return float(d[:, 1].min() ** 2), float("inf") if kmin == 0 else 1.0 / kmin


def nominal_coding_gain(code1: dict, code2: dict) -> float:
    """``10 log10((mu1 / E1) / (mu2 / E2))`` in dB."""
    for c in (code1, code2):
        if not c["mu"] > 0 or not c["energy"] > 0:
            raise ValueError("mu and energy must be positive")
    return 10.0 * float(np.log10((code1["mu"] / code1["energy"]) / (code2["mu"] / code2["energy"])))


def capacity_growth_curve(signals, rhos, seed: int = 42, omega_max: float | None = None) -> dict:
    """Capacity estimate ``C = log2 N / (Vol(cell) * N1)`` across a family of samplings.

    ``signals`` is one signal (refined through the ``rhos`` levels) or a
    sequence of signals (growing patches); a scalar ``rho`` or a single
    signal is broadcast.  ``N1 = alpha(N)`` is read off the triangulation
    and ``Vol(cell)`` is the mean lifted simplex volume.  The trend is
    ``'decreasing'``, ``'non-decreasing'``, ``'mixed'`` or, for a single
    level, ``'undefined'``.
    """
    from .core import estimate_curvature
    from .sampler import sample_adaptive
    from .triangulate import delaunay

    if isinstance(signals, GeometricSignal):
        signals = [signals]
    rhos = list(np.atleast_1d(rhos))
    n = max(len(signals), len(rhos))
    if len(signals) == 1:
        signals = signals * n
    if len(rhos) == 1:
        rhos = rhos * n
    if len(signals) != len(rhos):
        raise ValueError("signals and rhos must broadcast")
    rows = []
    for sig, rho in zip(signals, rhos):
        curv = estimate_curvature(sig, omega_max)
        cx = delaunay(sample_adaptive(sig, curv, float(rho), seed), sig)
        N, N1 = len(cx.ambient), len(cx.simplices)
        vol = float(cx.simplex_volumes().mean())
        rows.append({"rho": float(rho), "extent": [float(e) for e in sig.extent], "N": N, "N1": N1,
                     "cell_volume": vol, "C": capacity_estimate(N, N1, vol)})
    C = np.array([r["C"] for r in rows])
    if len(C) < 2:
        trend = "undefined"
    elif np.all(np.diff(C) < 0):
        trend = "decreasing"
    elif np.all(np.diff(C) >= 0):
        trend = "non-decreasing"
    else:
        trend = "mixed"
    return {"levels": rows, "trend": trend}
