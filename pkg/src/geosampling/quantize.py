"""
Vector quantization of geometric signals.

A signal's graph is discretised into an area-weighted point cloud; code
points ("decision vectors") partition it into nearest-point cells.  The
module provides the mean-squared-error-per-dimension functional, the
normalised quantizer quality, a weighted Lloyd iteration and the
scalar-versus-embedded-dimension comparison.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import GeometricSignal, Kind, SignalError


class QuantizerError(SignalError):
    pass


@dataclass(frozen=True)
class PointCloud:
    """Weighted points; weights are the discrete measure (length/area elements)."""

    points: np.ndarray
    weights: np.ndarray
    intrinsic_dim: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if len(self.weights) != len(pts):
            raise QuantizerError("one weight per point is required")

    def __len__(self):
        return len(self.points)

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


def _trapezoid_weights(n, h):
    w = np.full(n, h)
    w[[0, -1]] = h / 2
    return w


def _resample(signal, resolution):
    ny = nx = int(resolution)
    if signal.kind is Kind.CURVE:
        from scipy.interpolate import CubicSpline

        (t,) = signal.axes()
        t2 = np.linspace(t[0], t[-1], int(resolution))
        vals = CubicSpline(t, signal.values)(t2)
    else:
        from scipy.interpolate import RectBivariateSpline

        x, y = signal.axes()
        vals = RectBivariateSpline(y, x, signal.values)(np.linspace(y[0], y[-1], ny), np.linspace(x[0], x[-1], nx))
    return GeometricSignal(signal.kind, signal.origin, signal.extent, vals, signal.boundary, signal.name)


def surface_point_cloud(signal: GeometricSignal, resolution: int | None = None) -> PointCloud:
    """Points of ``Graph(f)`` weighted by the local area (or length) element.

    Weights are trapezoid cell sizes times ``sqrt(1 + |grad f|^2)``, so they
    sum to a quadrature of the surface area (arc length for curves).
    ``resolution`` resamples the grid to that many nodes per axis with cubic
    splines.
    """
    if resolution is not None:
        signal = _resample(signal, resolution)
    grads = signal.gradient()
    element = np.sqrt(1.0 + sum(g * g for g in grads))
    if signal.kind is Kind.CURVE:
        cell = _trapezoid_weights(signal.values.shape[0], signal.spacing[0])
    else:
        ny, nx = signal.values.shape
        hx, hy = signal.spacing
        cell = np.outer(_trapezoid_weights(ny, hy), _trapezoid_weights(nx, hx))
    return PointCloud(signal.ambient_points(), (cell * element).ravel(), signal.dim)


def uniform_cloud(lo: float, hi: float, n: int) -> PointCloud:
    """Midpoint discretisation of the uniform measure on ``[lo, hi]``."""
    h = (hi - lo) / n
    return PointCloud(lo + h * (np.arange(n) + 0.5), np.full(n, h), 1)


@dataclass
class Codebook:
    """Code points and the induced nearest-point partition of a cloud."""

    centers: np.ndarray
    N: int
    assignment: np.ndarray
    cell_mass: np.ndarray
    cell_count: np.ndarray
    cell_distortion: np.ndarray = field(default=None)

    @property
    def m(self) -> int:
        return len(self.centers)

    def rows(self):
        for c, mass, dist in zip(self.centers, self.cell_mass, self.cell_distortion):
            yield [*map(float, c), float(mass), float(dist)]


def assign(points: np.ndarray, centers: np.ndarray, chunk: int = 4096):
    """Index of the nearest center for each point (ties go to the lowest index)
    and the squared distance to it."""
    points = np.asarray(points, dtype=float)
    centers = np.asarray(centers, dtype=float)
    idx = np.empty(len(points), dtype=np.int64)
    d2 = np.empty(len(points))
    for s in range(0, len(points), chunk):
        diff = points[s:s + chunk, None, :] - centers[None, :, :]
        D = np.einsum("ijk,ijk->ij", diff, diff)
        idx[s:s + chunk] = D.argmin(axis=1)
        d2[s:s + chunk] = D[np.arange(len(D)), idx[s:s + chunk]]
    return idx, d2


def _distortion(d2, power):
    return d2 if power == 2 else np.sqrt(d2) ** power


def make_codebook(cloud: PointCloud, centers, N: int | None = None, power: int = 2) -> Codebook:
    """Partition ``cloud`` by nearest ``centers``."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if cloud.ambient_dim == 1 and centers.shape[0] == 1 and centers.shape[1] != 1:
        centers = centers.T
    if not len(centers):
        raise QuantizerError("empty codebook")
    idx, d2 = assign(cloud.points, centers)
    m = len(centers)
    w = cloud.weights
    return Codebook(
        centers=centers,
        N=int(N or cloud.ambient_dim),
        assignment=idx,
        cell_mass=np.bincount(idx, weights=w, minlength=m),
        cell_count=np.bincount(idx, minlength=m),
        cell_distortion=np.bincount(idx, weights=w * _distortion(d2, power), minlength=m),
    )


def mse_per_dimension(cloud: PointCloud, codebook: Codebook, form: str = "total", power: int = 2) -> float:
    """Average distortion per dimension.

    ``E = (1/N) sum_j w_j d(x_j, p(x_j))^power / V`` where ``V`` is the total
    measure (``form='total'``) or the sum of the cell measures
    (``form='cells'``).  ``power=2`` is the usual mean-squared error;
    ``power=1`` integrates plain distance.
    """
    if codebook.m == 0:
        raise QuantizerError("empty codebook")
    _, d2 = assign(cloud.points, codebook.centers)
    num = float(np.dot(cloud.weights, _distortion(d2, power)))
    if form == "total":
        den = cloud.total_weight
    elif form == "cells":
        den = float(make_codebook(cloud, codebook.centers, codebook.N).cell_mass.sum())
    else:
        raise ValueError(f"unknown form {form!r}")
    return num / (codebook.N * den)


def quantizer_quality(cloud: PointCloud, codebook: Codebook, exponent_dim: int | None = None,
                      power: int = 2) -> dict:
    """Normalised quantizer quality.

    ``Q = (1/N) * D / Vbar^(1 + 2/d)`` with ``D`` the pdf-weighted mean
    distortion divided by the number of (non-empty) cells ``m``, ``Vbar``
    the mean cell measure and ``d = exponent_dim`` (default ``N``).  Also
    returns the large-dimension estimate ``(1/N) * integral / sum V``.
    """
    cb = make_codebook(cloud, codebook.centers, codebook.N, power)
    nonempty = cb.cell_mass > 0
    if not nonempty.any():
        raise QuantizerError("all cells are empty")
    if not nonempty.all():
        warnings.warn(f"{int((~nonempty).sum())} empty cell(s) excluded from the quality mean", RuntimeWarning)
    m = int(nonempty.sum())
    N = cb.N
    d = exponent_dim or N
    integral = float(cb.cell_distortion.sum())
    numerator = integral / cloud.total_weight / m
    vbar = float(cb.cell_mass[nonempty].mean())
    denominator = vbar ** (1.0 + 2.0 / d)
    return {
        "Q": numerator / denominator / N,
        "Q_rough": integral / float(cb.cell_mass.sum()) / N,
        "numerator": numerator,
        "denominator": denominator,
        "nonempty_cells": m,
        "empty_cells": int((~nonempty).sum()),
        "exponent_dim": d,
        "N": N,
    }


@dataclass
class QuantizerReport:
    E_per_dim: float
    Q_value: float
    iterations: int
    converged: bool
    history: list
    distortion: str = "squared"

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def lloyd_minimize(cloud: PointCloud, m: int, seed: int = 42, N: int | None = None,
                   max_iter: int = 100, tol: float = 1e-6, power: int = 2):
    """Weighted Lloyd iteration from a seeded draw of ``m`` distinct cloud points.

    Each step moves every center to the weighted centroid of its cell;
    an empty cell is re-seeded at the point of largest current distortion.
    Stops once the relative improvement of ``Q`` (taken over all ``m``
    cells) is below ``tol``.
    Returns ``(codebook, report)``; ``report.history`` lists ``E`` after
    the initial assignment and after every iteration.
    """
    if not 1 <= m <= len(cloud):
        raise QuantizerError(f"m={m} must lie in [1, {len(cloud)}]")
    rng = np.random.default_rng(seed)
    X, w = cloud.points, cloud.weights
    centers = X[np.sort(rng.choice(len(X), size=m, replace=False))].copy()
    N = N or cloud.ambient_dim
    W = cloud.total_weight

    def evaluate(c):
        idx, d2 = assign(X, c)
        dist = _distortion(d2, power)
        E = float(np.dot(w, dist)) / (N * W)
        # Q over all m cells, so it stays proportional to E while cells are re-seeded
        q = E / m / (W / m) ** (1.0 + 2.0 / N)
        return idx, dist, E, q

    idx, dist, E, Q = evaluate(centers)
    history = [E]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        mass = np.bincount(idx, weights=w, minlength=m)
        for k in range(X.shape[1]):
            s = np.bincount(idx, weights=w * X[:, k], minlength=m)
            centers[mass > 0, k] = s[mass > 0] / mass[mass > 0]
        for j in np.flatnonzero(mass == 0):
            centers[j] = X[int(np.argmax(dist))]
            dist[int(np.argmax(dist))] = 0.0
        idx, dist, E_new, Q_new = evaluate(centers)
        history.append(E_new)
        improvement = (Q - Q_new) / Q if Q > 0 else 0.0
        Q, E = Q_new, E_new
        if improvement < tol:
            converged = True
            break
    cb = make_codebook(cloud, centers, N, power)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        Q = quantizer_quality(cloud, cb, power=power)["Q"]
    report = QuantizerReport(E, Q, it, converged, history, "squared" if power == 2 else f"power {power}")
    return cb, report


def zador_dimension_experiment(signal: GeometricSignal, m: int, seed: int = 42, N: int | None = None) -> dict:
    """Scalar versus embedded-vector quantization of a height field.

    (a) The scan-order sequence of heights is quantized with ``m`` scalar
    levels (``N = 1``, unit weights).  (b) The area-weighted point cloud of
    the graph in R^3 is quantized with ``m`` vector centers (``N = 3``, or
    the override ``N``).  Both runs use :func:`lloyd_minimize` with the same
    seed and report ``E`` per dimension.
    """
    if signal.kind is not Kind.HEIGHT_FIELD:
        raise QuantizerError("zador_dimension_experiment needs a height field")
    heights = signal.values.ravel()
    scalar_cloud = PointCloud(heights, np.ones(heights.size), 1)
    vector_cloud = surface_point_cloud(signal)
    _, rs = lloyd_minimize(scalar_cloud, m, seed=seed, N=1)
    _, rv = lloyd_minimize(vector_cloud, m, seed=seed, N=N)
    Es, Ev = rs.E_per_dim, rv.E_per_dim
    if Es > 0:
        ratio = Ev / Es
    else:
        ratio = 1.0 if Ev == 0 else float("inf")
    return {
        "m": int(m),
        "seed": int(seed),
        "E_scalar": Es,
        "E_vector": Ev,
        "ratio": ratio,
        "N_scalar": 1,
        "N_vector": int(N or vector_cloud.ambient_dim),
        "iterations_scalar": rs.iterations,
        "iterations_vector": rv.iterations,
        "distortion": rs.distortion,
    }
