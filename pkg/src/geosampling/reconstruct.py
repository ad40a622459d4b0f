"""
Secant-map reconstruction and error assessment.

The secant map agrees with the signal at the sample vertices and is linear
on each simplex.  Its quality is measured three ways: pointwise height gap
(plus a per-simplex gradient gap), Hausdorff distance between the two
surfaces, and the distortion of path lengths between the original surface
and the piecewise-flat one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from .core import Boundary, GeometricSignal, Kind, SignalError
from .triangulate import TriangulationComplex, orient

LOWER_BOUND = 3.0 / 4.0
UPPER_BOUND = 5.0 / 3.0


class OutOfDomainError(SignalError):
    pass


@dataclass
class PLApproximation:
    """Piecewise-linear height function over a triangulation."""

    complex: TriangulationComplex
    signal: GeometricSignal | None = None

    def __post_init__(self):
        cx = self.complex
        self.heights = cx.ambient[:, -1]
        if cx.is_curve:
            order = np.argsort(cx.domain[:, 0])
            self._t = cx.domain[order, 0]
            self._h = self.heights[order]
            return
        self._tree = cKDTree(cx.domain)
        start = np.full(len(cx.domain), -1, dtype=np.int64)
        for t, tri in enumerate(cx.simplices):
            start[tri] = t
        self._start = start

    def locate(self, q, tol: float = 1e-9):
        """Containing triangle and barycentric coordinates of each query point.

        Walks the domain-plane triangulation from a triangle incident to the
        nearest vertex.  Points outside the hull get triangle ``-1``.
        """
        cx = self.complex
        q = np.atleast_2d(np.asarray(q, dtype=float))
        _, near = self._tree.query(q)
        cur = self._start[near]
        P = cx.domain
        tri = cx.simplices
        nb = cx.neighbors
        bary = np.zeros((len(q), 3))
        active = np.arange(len(q))
        found = np.full(len(q), -1, dtype=np.int64)
        for _ in range(4 * len(tri) + 8):
            if not len(active):
                break
            T = tri[cur[active]]
            a, b, c = P[T[:, 0]], P[T[:, 1]], P[T[:, 2]]
            p = q[active]
            area = orient(a, b, c)
            lam = np.column_stack([orient(p, b, c), orient(a, p, c), orient(a, b, p)]) / area[:, None]
            worst = lam.argmin(axis=1)
            inside = lam[np.arange(len(active)), worst] >= -tol
            done = active[inside]
            found[done] = cur[done]
            bary[done] = lam[inside]
            step = ~inside
            nxt = nb[cur[active[step]], worst[step]]
            out = nxt < 0
            active = active[step][~out]
            cur[active] = nxt[~out]
        return found, bary

    def __call__(self, q, outside: str = "raise"):
        """Evaluate ``L`` at domain points; ``outside`` is ``'raise'`` or ``'nan'``."""
        q = np.asarray(q, dtype=float)
        if self.complex.is_curve:
            t = q.reshape(-1)
            bad = (t < self._t[0] - 1e-12) | (t > self._t[-1] + 1e-12)
            val = np.interp(t, self._t, self._h)
        else:
            q = np.atleast_2d(q)
            found, bary = self.locate(q)
            bad = found < 0
            h = self.heights[self.complex.simplices[np.maximum(found, 0)]]
            val = np.einsum("ij,ij->i", bary, h)
        if bad.any():
            if outside == "raise":
                raise OutOfDomainError(f"{int(bad.sum())} query point(s) outside the triangulated region")
            val = np.where(bad, np.nan, val)
        return val

    def simplex_gradients(self) -> np.ndarray:
        """Constant gradient of ``L`` on each simplex (``(m, 1)`` or ``(m, 2)``)."""
        cx = self.complex
        D = cx.domain[cx.simplices]
        H = self.heights[cx.simplices]
        if cx.is_curve:
            return ((H[:, 1] - H[:, 0]) / (D[:, 1, 0] - D[:, 0, 0]))[:, None]
        A = D[:, 1:] - D[:, :1]
        rhs = H[:, 1:] - H[:, :1]
        return np.linalg.solve(A, rhs[..., None])[..., 0]


def secant_reconstruct(signal: GeometricSignal, complex: TriangulationComplex) -> PLApproximation:
    """Secant map of ``signal`` over ``complex``."""
    return PLApproximation(complex, signal)


def hausdorff_distance(A, B) -> float:
    """``max(sup_a d(a, B), sup_b d(b, A))`` for finite point sets."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    if not len(A) or not len(B):
        raise ValueError("Hausdorff distance of an empty set")
    dab = cKDTree(B).query(A)[0].max()
    dba = cKDTree(A).query(B)[0].max()
    return float(max(dab, dba))


def pl_surface_points(signal: GeometricSignal, pl: PLApproximation, outside="raise") -> np.ndarray:
    """Points of the PL surface above the signal's grid nodes."""
    dom = signal.domain_points()
    return np.column_stack([dom, pl(dom if dom.shape[1] > 1 else dom[:, 0], outside=outside)])


def pointwise_gap(signal: GeometricSignal, pl: PLApproximation) -> np.ndarray:
    """``|f - L|`` at every grid node (NaN where the triangulation does not reach)."""
    pts = pl_surface_points(signal, pl, outside="nan")
    return np.abs(signal.values.ravel() - pts[:, -1])


def reconstruction_errors(signal: GeometricSignal, pl: PLApproximation) -> dict:
    gap = pointwise_gap(signal, pl)
    covered = np.isfinite(gap)
    orig = signal.ambient_points()[covered]
    recon = pl_surface_points(signal, pl, outside="nan")[covered]
    return {
        "sup_gap": float(np.nanmax(gap)),
        "hausdorff": hausdorff_distance(orig, recon),
        "covered_fraction": float(covered.mean()),
        "mesh": pl.complex.mesh,
    }


# -- metric distortion -----------------------------------------------------------


_OFFSETS = ((0, 1), (1, 0), (1, 1), (1, -1))


def _grid_graph(signal, heights):
    """8-neighbour graph of the grid with ambient chord-length weights."""
    hx, hy = signal.spacing
    ny, nx = signal.values.shape
    Hh = heights.reshape(ny, nx)
    J, I = np.mgrid[0:ny, 0:nx]
    rows, cols, w = [], [], []
    for dj, di in _OFFSETS:
        j2, i2 = J + dj, I + di
        ok = (j2 >= 0) & (j2 < ny) & (i2 >= 0) & (i2 < nx)
        a = (J * nx + I)[ok]
        b = (j2 * nx + i2)[ok]
        dz = Hh[j2[ok], i2[ok]] - Hh[J[ok], I[ok]]
        length = np.sqrt((di * hx) ** 2 + (dj * hy) ** 2 + dz * dz)
        rows += [a, b]
        cols += [b, a]
        w += [length, length]
    n = nx * ny
    return coo_matrix((np.concatenate(w), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()


def _octile_factor(signal, src, tgt):
    """Planar Euclidean length over 8-neighbour path length for index offsets.

    Multiplying a graph distance by this factor removes the metrication bias
    of the grid graph; it is exact for flat, untilted grids.
    """
    hx, hy = signal.spacing
    nx = signal.values.shape[1]
    di = np.abs(tgt % nx - src % nx)
    dj = np.abs(tgt // nx - src // nx)
    diag = np.minimum(di, dj)
    straight_x = di - diag
    straight_y = dj - diag
    octile = diag * np.hypot(hx, hy) + straight_x * hx + straight_y * hy
    euclid = np.hypot(di * hx, dj * hy)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(octile > 0, euclid / octile, 1.0)


def _distance_to_edge(signal, nodes):
    dom = signal.domain_points()[nodes]
    lo = np.asarray(signal.origin)
    hi = lo + np.asarray(signal.extent)
    return np.minimum(dom - lo, hi - dom).min(axis=1)


@dataclass
class MetricReport:
    """Distortion of path lengths from the surface to its PL reconstruction."""

    hausdorff: float
    sup_gap: float
    ratio_min: float
    ratio_max: float
    ratio_mean: float
    chord_ratio_min: float
    chord_ratio_max: float
    interior_pairs: int
    bound_violation_count: int
    violations: list
    boundary_pairs: int
    boundary_ratio_min: float
    boundary_ratio_max: float
    boundary_slack: float
    mesh: float
    min_separation: float
    boundary_band: float
    delta_check: dict | None = None

    @property
    def max_deviation(self) -> float:
        return max(abs(self.ratio_max - 1.0), abs(1.0 - self.ratio_min))

    @property
    def within_bounds_fraction(self) -> float:
        if not self.interior_pairs:
            return float("nan")
        return 1.0 - self.bound_violation_count / self.interior_pairs

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["max_deviation"] = self.max_deviation
        d["within_bounds_fraction"] = self.within_bounds_fraction
        d["bounds"] = [LOWER_BOUND, UPPER_BOUND]
        return d


def _draw_pairs(rng, src_pool, tgt_mask, dist_m, sources, min_sep, budget):
    """Uniform draw of (source, target) pairs with ``d_M >= min_sep``."""
    cand_s, cand_t = [], []
    for k, s in enumerate(sources):
        if not src_pool[s]:
            continue
        ok = np.flatnonzero(tgt_mask & (dist_m[k] >= min_sep))
        cand_s.append(np.full(len(ok), k))
        cand_t.append(ok)
    if not cand_s:
        return np.empty(0, int), np.empty(0, int)
    cs = np.concatenate(cand_s)
    ct = np.concatenate(cand_t)
    if len(cs) > budget:
        pick = np.sort(rng.choice(len(cs), size=budget, replace=False))
        cs, ct = cs[pick], ct[pick]
    return cs, ct


def metric_distortion(signal: GeometricSignal, pl: PLApproximation, pair_budget: int = 2000,
                      seed: int = 42, min_separation: float | None = None,
                      boundary_band: float | None = None, n_sources: int = 64) -> MetricReport:
    """Compare path lengths on the surface and on its PL reconstruction.

    ``d_M`` is the shortest-path length on the 8-neighbour grid graph of the
    original surface and ``d_PL`` the same on the PL surface; the reported
    ratio is ``d_PL / d_M``.  Pairs closer than ``min_separation`` (default
    twice the mesh) are skipped.  Pairs with an endpoint within
    ``boundary_band`` of the domain edge (default: the mesh of simplices
    touching the boundary) are reported separately, with the largest
    additive excursion beyond ``[3/4, 5/3]`` as ``boundary_slack``.
    """
    if signal.kind is not Kind.HEIGHT_FIELD:
        raise SignalError("metric_distortion needs a height field")
    cx = pl.complex
    mesh = cx.mesh
    if min_separation is None:
        min_separation = 2.0 * mesh
    if boundary_band is None:
        boundary_band = _boundary_mesh(signal, cx) if signal.boundary is Boundary.BORDERED else 0.0
    errs = reconstruction_errors(signal, pl)
    heights_pl = pl_surface_points(signal, pl, outside="nan")[:, -1]
    if np.isnan(heights_pl).any():
        raise SignalError("triangulation does not cover the signal grid")
    g_m = _grid_graph(signal, signal.values.ravel())
    g_pl = _grid_graph(signal, heights_pl)
    rng = np.random.default_rng(seed)
    n = signal.values.size
    nodes = np.arange(n)
    edge_d = _distance_to_edge(signal, nodes)
    interior = edge_d > boundary_band
    ambient = signal.ambient_points()
    recon = np.column_stack([signal.domain_points(), heights_pl])

    results = {}
    for label, pool, tgt in (("interior", interior, interior), ("boundary", ~interior, np.ones(n, bool))):
        choices = np.flatnonzero(pool)
        if not len(choices):
            results[label] = None
            continue
        sources = np.sort(rng.choice(choices, size=min(n_sources, len(choices)), replace=False))
        dm = dijkstra(g_m, indices=sources)
        dp = dijkstra(g_pl, indices=sources)
        if not np.all(np.isfinite(dm)):
            raise RuntimeError("grid graph is disconnected")
        corr = np.stack([_octile_factor(signal, s, nodes) for s in sources])
        dm = dm * corr
        dp = dp * corr
        ks, ts = _draw_pairs(rng, pool, tgt, dm, sources, min_separation, pair_budget)
        s_nodes = sources[ks]
        d_m = dm[ks, ts]
        d_p = dp[ks, ts]
        chord = np.linalg.norm(recon[s_nodes] - recon[ts], axis=1)
        results[label] = (s_nodes, ts, d_m, d_p, chord)

    violations = []
    inner = results["interior"]
    if inner is not None and len(inner[2]):
        s_nodes, ts, d_m, d_p, chord = inner
        ratio = d_p / d_m
        bad = np.flatnonzero((ratio < LOWER_BOUND) | (ratio > UPPER_BOUND))
        for k in bad:
            violations.append({
                "x": ambient[s_nodes[k]].tolist(), "y": ambient[ts[k]].tolist(),
                "d_M": float(d_m[k]), "d_PL": float(d_p[k]), "ratio": float(ratio[k]),
            })
        stats = (float(ratio.min()), float(ratio.max()), float(ratio.mean()),
                 float((chord / d_m).min()), float((chord / d_m).max()), len(ratio))
    else:
        stats = (float("nan"),) * 5 + (0,)
    outer = results["boundary"]
    if outer is not None and len(outer[2]):
        _, _, d_m, d_p, _ = outer
        ratio = d_p / d_m
        slack = np.maximum.reduce([np.zeros_like(d_m), LOWER_BOUND * d_m - d_p, d_p - UPPER_BOUND * d_m])
        bstats = (len(ratio), float(ratio.min()), float(ratio.max()), float(slack.max()))
    else:
        bstats = (0, float("nan"), float("nan"), 0.0)
    return MetricReport(
        hausdorff=errs["hausdorff"], sup_gap=errs["sup_gap"],
        ratio_min=stats[0], ratio_max=stats[1], ratio_mean=stats[2],
        chord_ratio_min=stats[3], chord_ratio_max=stats[4], interior_pairs=stats[5],
        bound_violation_count=len(violations), violations=violations,
        boundary_pairs=bstats[0], boundary_ratio_min=bstats[1], boundary_ratio_max=bstats[2],
        boundary_slack=bstats[3], mesh=mesh, min_separation=float(min_separation),
        boundary_band=float(boundary_band),
    )


def _boundary_mesh(signal, cx):
    """Largest diameter among simplices with a vertex on the domain edge."""
    lo = np.asarray(signal.origin)
    hi = lo + np.asarray(signal.extent)
    tol = 1e-9 * signal.diameter
    on_edge = np.any((np.abs(cx.domain - lo) <= tol) | (np.abs(cx.domain - hi) <= tol), axis=1)
    touch = on_edge[cx.simplices].any(axis=1)
    if not touch.any():
        return 0.0
    V = cx.ambient[cx.simplices[touch]]
    d = [np.linalg.norm(V[:, i] - V[:, j], axis=1) for i, j in ((0, 1), (1, 2), (2, 0))]
    return float(np.max(d))


# -- delta approximation ---------------------------------------------------------


def _bilinear(signal, field, q):
    from scipy.interpolate import RegularGridInterpolator

    axes = signal.axes()
    if signal.kind is Kind.CURVE:
        return np.interp(q[:, 0], axes[0], field)
    x, y = axes
    return RegularGridInterpolator((y, x), field)(q[:, ::-1])


def delta_approximation_check(signal: GeometricSignal, pl: PLApproximation, delta: float,
                              worst: int = 5) -> dict:
    """Check the two quantitative conditions of a delta-approximation.

    (ii) ``|f(x) - L(x)| < delta`` at every grid node;
    (iii) on each simplex, ``|grad f(b) - grad L| <= delta`` at the
    barycentre ``b``, with ``grad f`` taken from grid finite differences.
    """
    gap = pointwise_gap(signal, pl)
    covered = np.isfinite(gap)
    cond_ii = bool(np.all(gap[covered] < delta))
    cx = pl.complex
    bary = cx.domain[cx.simplices].mean(axis=1)
    grads = signal.gradient()
    g_f = np.column_stack([_bilinear(signal, g, bary) for g in grads])
    g_gap = np.linalg.norm(g_f - pl.simplex_gradients(), axis=1)
    cond_iii = bool(np.all(g_gap <= delta))
    dom = signal.domain_points()
    order = np.argsort(np.where(covered, -gap, np.inf))[:worst]
    s_order = np.argsort(-g_gap)[:worst]
    return {
        "passed": cond_ii and cond_iii,
        "delta": float(delta),
        "pointwise_pass": cond_ii,
        "gradient_pass": cond_iii,
        "max_pointwise_gap": float(np.nanmax(gap)),
        "max_gradient_gap": float(g_gap.max()),
        "worst_points": [{"x": dom[i].tolist(), "gap": float(gap[i])} for i in order],
        "worst_simplices": [{"simplex": int(i), "barycenter": bary[i].tolist(), "gap": float(g_gap[i])}
                            for i in s_order],
    }
