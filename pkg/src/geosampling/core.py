"""
Geometric signals and their curvature.

A geometric signal is the graph of a function sampled on a regular grid:
either a planar curve ``(t, f(t))`` or a height field ``(x, y, h(x, y))``
embedded in R^3.  This module holds the signal containers, the builtin
analytic test signals and the finite-difference curvature estimator.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class SignalError(ValueError):
    """Raised for invalid signal specifications or values."""


class Kind(enum.Enum):
    CURVE = "curve"
    HEIGHT_FIELD = "height_field"


class Boundary(enum.Enum):
    BORDERED = "bordered"
    PERIODIC_CLAMP = "periodic_clamp"


@dataclass(frozen=True)
class GeometricSignal:
    """Graph of a function sampled on a uniform grid.

    ``values`` is 1-D for curves and row-major ``(ny, nx)`` for height
    fields, so ``values[j, i]`` is the height at ``x_i, y_j``.
    ``origin`` and ``extent`` are ordered ``(t,)`` or ``(x, y)``.
    """

    kind: Kind
    origin: tuple
    extent: tuple
    values: np.ndarray
    boundary: Boundary = Boundary.BORDERED
    name: str = "custom"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "extent", tuple(float(v) for v in self.extent))
        dim = 1 if self.kind is Kind.CURVE else 2
        if values.ndim != dim:
            raise SignalError(f"{self.kind.value} needs a {dim}-D value grid, got {values.ndim}-D")
        if len(self.origin) != dim or len(self.extent) != dim:
            raise SignalError("origin/extent length does not match the signal dimension")
        if min(values.shape) < 3:
            raise SignalError(f"grid_shape must be >= 3 per axis, got {values.shape}")
        if not all(e > 0 for e in self.extent):
            raise SignalError("domain_extent must be positive per axis")
        if not np.all(np.isfinite(values)):
            raise SignalError("signal values must be finite")

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1

    @property
    def grid_shape(self) -> tuple:
        return self.values.shape

    @property
    def spacing(self) -> tuple:
        """Grid step per domain axis, ordered like ``origin``."""
        if self.kind is Kind.CURVE:
            return (self.extent[0] / (self.values.shape[0] - 1),)
        ny, nx = self.values.shape
        return (self.extent[0] / (nx - 1), self.extent[1] / (ny - 1))

    @property
    def diameter(self) -> float:
        return float(np.hypot.reduce(self.extent)) if self.dim > 1 else self.extent[0]

    @property
    def volume(self) -> float:
        """Lebesgue measure of the domain rectangle (length or area)."""
        return float(np.prod(self.extent))

    def axes(self):
        """Coordinate vectors of the grid, ``(t,)`` or ``(x, y)``."""
        if self.kind is Kind.CURVE:
            return (self.origin[0] + self.spacing[0] * np.arange(self.values.shape[0]),)
        ny, nx = self.values.shape
        hx, hy = self.spacing
        return (self.origin[0] + hx * np.arange(nx), self.origin[1] + hy * np.arange(ny))

    def domain_points(self) -> np.ndarray:
        """Domain coordinates of every grid node, flattened in row-major order."""
        if self.kind is Kind.CURVE:
            return self.axes()[0][:, None]
        x, y = self.axes()
        X, Y = np.meshgrid(x, y)
        return np.column_stack([X.ravel(), Y.ravel()])

    def ambient_points(self) -> np.ndarray:
        """Embedded graph points in R^2 or R^3, flattened in row-major order."""
        return np.column_stack([self.domain_points(), self.values.ravel()])

    def boundary_mask(self) -> np.ndarray:
        """Flat boolean mask of grid nodes on the domain edge."""
        mask = np.zeros(self.values.shape, dtype=bool)
        if self.kind is Kind.CURVE:
            mask[[0, -1]] = True
        else:
            mask[[0, -1], :] = True
            mask[:, [0, -1]] = True
        return mask.ravel()

    def corner_indices(self) -> np.ndarray:
        """Flat indices of the domain corners (curve endpoints for curves)."""
        if self.kind is Kind.CURVE:
            return np.array([0, self.values.shape[0] - 1])
        ny, nx = self.values.shape
        return np.array([0, nx - 1, (ny - 1) * nx, ny * nx - 1])

    def gradient(self):
        """First derivatives on the grid, second order everywhere.

        Returns ``(ft,)`` for curves and ``(hx, hy)`` for height fields.
        """
        if self.kind is Kind.CURVE:
            return (np.gradient(self.values, self.spacing[0], edge_order=2),)
        hx_, hy_ = self.spacing
        hy, hx = np.gradient(self.values, hy_, hx_, edge_order=2)
        return hx, hy


@dataclass(frozen=True)
class SignalSpec:
    """Recipe for a builtin analytic signal.

    ``name`` is one of :data:`BUILTINS`; ``params`` override the builtin's
    defaults; ``shape`` is the number of grid nodes per axis.
    """

    name: str
    params: dict = field(default_factory=dict)
    shape: tuple | None = None
    boundary: Boundary = Boundary.BORDERED


def _evaluate(fn, *coords):
    with np.errstate(invalid="ignore", divide="ignore"):
        out = fn(*coords)
    if not np.all(np.isfinite(out)):
        raise SignalError("non-finite evaluation: grid extends outside the analytic domain")
    return out


def _inscribed_square(radius, disk, extent):
    # Square domain centred on the axis; it must stay strictly inside the sphere.
    if extent is None:
        half = disk / np.sqrt(2.0)
    else:
        half = 0.5 * float(extent)
    if np.hypot(half, half) >= radius:
        raise SignalError(
            f"domain corner at distance {np.hypot(half, half):.6g} lies outside radius {radius:.6g}"
        )
    return half


def _build_height_field(name, p, shape):
    nx, ny = shape
    if name == "plane":
        x0, y0 = p.get("origin", (0.0, 0.0))
        ex, ey = p.get("extent", (1.0, 1.0))
        a, b, c = p.get("a", 0.0), p.get("b", 0.0), p.get("c", 0.0)
        fn = lambda X, Y: a * X + b * Y + c
    elif name == "sphere-cap":
        r = p.get("r", 1.0)
        half = _inscribed_square(r, p.get("disk", 0.5 * r), p.get("extent"))
        x0 = y0 = -half
        ex = ey = 2 * half
        fn = lambda X, Y: np.sqrt(r * r - X * X - Y * Y)
    elif name == "cylinder-cap":
        r = p.get("r", 1.0)
        half = 0.5 * p.get("extent", r)
        if half >= r:
            raise SignalError(f"cylinder-cap half-width {half} must be below radius {r}")
        x0 = y0 = -half
        ex = ey = 2 * half
        fn = lambda X, Y: np.sqrt(r * r - X * X) + 0.0 * Y
    elif name == "gaussian-bump":
        A, s = p.get("amplitude", 0.3), p.get("width", 0.3)
        half = 0.5 * p.get("extent", 2.0)
        x0 = y0 = -half
        ex = ey = 2 * half
        fn = lambda X, Y: A * np.exp(-(X * X + Y * Y) / (2 * s * s))
    elif name == "checker":
        lo, hi = p.get("low", 0.0), p.get("high", 1.0)
        tiles = int(p.get("tiles", 4))
        x0 = y0 = 0.0
        ex = ey = p.get("extent", 1.0)
        def fn(X, Y):
            i = np.minimum((X / ex * tiles).astype(int), tiles - 1)
            j = np.minimum((Y / ey * tiles).astype(int), tiles - 1)
            return np.where((i + j) % 2 == 0, lo, hi)
    else:
        raise SignalError(f"unknown builtin surface {name!r}")
    x = x0 + ex * np.linspace(0.0, 1.0, nx)
    y = y0 + ey * np.linspace(0.0, 1.0, ny)
    X, Y = np.meshgrid(x, y)
    return (x0, y0), (ex, ey), _evaluate(fn, X, Y)


def _build_curve(name, p, n):
    if name == "sine":
        amp, freq = p.get("amplitude", 1.0), p.get("freq", 1.0)
        t0, T = p.get("origin", 0.0), p.get("extent", 2 * np.pi)
        fn = lambda t: amp * np.sin(freq * t)
    elif name == "chirp":
        t0, T = p.get("origin", 0.0), p.get("extent", 4.0)
        fn = lambda t: np.sin(t * t)
    elif name == "constant":
        c = p.get("c", 0.0)
        t0, T = p.get("origin", 0.0), p.get("extent", 1.0)
        fn = lambda t: np.full_like(t, c)
    else:
        raise SignalError(f"unknown builtin curve {name!r}")
    t = t0 + T * np.linspace(0.0, 1.0, n)
    return (t0,), (T,), _evaluate(fn, t)


SURFACES = ("plane", "sphere-cap", "cylinder-cap", "gaussian-bump", "checker")
CURVES = ("sine", "chirp", "constant")
BUILTINS = SURFACES + CURVES

_DEFAULT_SHAPE = {"sine": 257, "chirp": 4097, "constant": 129}


def build_signal(spec: SignalSpec) -> GeometricSignal:
    """Evaluate a builtin analytic signal on its grid.

    Raises
    ------
    SignalError
        For unknown names or grids reaching outside the function's domain.
    """
    if spec.name in CURVES:
        n = spec.shape[0] if spec.shape else _DEFAULT_SHAPE[spec.name]
        origin, extent, values = _build_curve(spec.name, spec.params, int(n))
        kind = Kind.CURVE
    elif spec.name in SURFACES:
        shape = tuple(spec.shape) if spec.shape else (65, 65)
        if len(shape) == 1:
            shape = (shape[0], shape[0])
        origin, extent, values = _build_height_field(spec.name, spec.params, shape)
        kind = Kind.HEIGHT_FIELD
    else:
        raise SignalError(f"unknown builtin {spec.name!r}; choose from {', '.join(BUILTINS)}")
    return GeometricSignal(kind, origin, extent, values, spec.boundary, spec.name)


def from_raster(values, origin=(0.0, 0.0), extent=None, boundary=Boundary.BORDERED, name="raster"):
    """Wrap a 2-D array of heights as a height field.

    Without ``extent`` the longer image side is mapped to unit length.
    """
    values = np.asarray(values, dtype=float)
    ny, nx = values.shape
    if extent is None:
        step = 1.0 / (max(nx, ny) - 1)
        extent = ((nx - 1) * step, (ny - 1) * step)
    return GeometricSignal(Kind.HEIGHT_FIELD, origin, extent, values, boundary, name)


# -- curvature -----------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureField:
    """Per-node principal curvatures and osculatory radii.

    ``principal`` has shape ``grid_shape + (n,)``, sorted descending along
    the last axis; ``max_abs`` is ``k(p) = max |k_i|`` and ``radius`` is
    ``omega(p) = min(1 / k(p), omega_max)``.
    """

    principal: np.ndarray
    max_abs: np.ndarray
    radius: np.ndarray
    omega_max: float
    mean: np.ndarray | None = None
    gauss: np.ndarray | None = None

    @property
    def k0(self) -> float:
        return float(self.max_abs.max())

    @property
    def omega_min(self) -> float:
        """Smallest osculatory radius over the grid (``omega_M``)."""
        return float(self.radius.min())


def _second_difference(f, h, axis):
    # Central in the interior, 4-point one-sided (second order) at the ends.
    f = np.moveaxis(f, axis, 0)
    d2 = np.empty_like(f)
    d2[1:-1] = f[:-2] - 2 * f[1:-1] + f[2:]
    if f.shape[0] >= 4:
        d2[0] = 2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]
        d2[-1] = 2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]
    else:
        d2[0] = d2[1]
        d2[-1] = d2[-2]
    return np.moveaxis(d2 / (h * h), 0, axis)


def fundamental_forms(signal: GeometricSignal):
    """First and second fundamental form coefficients of the Monge patch.

    Returns ``(E, F, G, L, M, N)`` on the grid for the upward unit normal.
    """
    hx_, hy_ = signal.spacing
    fx, fy = signal.gradient()
    fxx = _second_difference(signal.values, hx_, axis=1)
    fyy = _second_difference(signal.values, hy_, axis=0)
    fxy = np.gradient(fx, hy_, axis=0, edge_order=2)
    w = np.sqrt(1.0 + fx * fx + fy * fy)
    return 1.0 + fx * fx, fx * fy, 1.0 + fy * fy, fxx / w, fxy / w, fyy / w


def estimate_curvature(signal: GeometricSignal, omega_max: float | None = None) -> CurvatureField:
    """Finite-difference principal curvatures of a geometric signal.

    Curves use ``k = |f''| / (1 + f'^2)^(3/2)``.  Height fields use the
    eigenvalues of the shape operator ``I^{-1} II`` of the Monge patch.
    ``omega_max`` caps the osculatory radius in flat regions and defaults to
    half the domain diameter.
    """
    if omega_max is None:
        omega_max = 0.5 * signal.diameter
    if not omega_max > 0:
        raise SignalError("omega_max must be positive")
    if signal.kind is Kind.CURVE:
        (h,) = signal.spacing
        (fp,) = signal.gradient()
        fpp = _second_difference(signal.values, h, axis=0)
        k = fpp / (1.0 + fp * fp) ** 1.5
        principal = k[:, None]
        mean = gauss = None
    else:
        E, F, G, L, M, N = fundamental_forms(signal)
        det = E * G - F * F
        # shape operator S = I^{-1} II, one 2x2 matrix per node
        S = np.empty(signal.values.shape + (2, 2))
        S[..., 0, 0] = (G * L - F * M) / det
        S[..., 0, 1] = (G * M - F * N) / det
        S[..., 1, 0] = (E * M - F * L) / det
        S[..., 1, 1] = (E * N - F * M) / det
        principal = np.sort(np.linalg.eigvals(S).real, axis=-1)[..., ::-1]
        gauss = (L * N - M * M) / det
        mean = (E * N - 2 * F * M + G * L) / (2 * det)
    max_abs = np.abs(principal).max(axis=-1)
    with np.errstate(divide="ignore", over="ignore"):
        radius = np.minimum(1.0 / max_abs, omega_max)
    return CurvatureField(principal, max_abs, radius, float(omega_max), mean, gauss)
