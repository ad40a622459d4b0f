"""
Delaunay triangulation of the sample set, its dual Dirichlet (Voronoi)
cells, and per-simplex fatness.

The triangulation is built in the domain plane, where a height field
projects bijectively, and lifted to R^3 through the sampled heights.
Quality is measured on the lifted simplices.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import SignalError

GHOST = -1


class DegenerateInputError(SignalError):
    pass


# -- predicates ----------------------------------------------------------------
# Float evaluation with a static forward-error filter; results the filter
# cannot certify are recomputed exactly in rational arithmetic.

_EPS = np.finfo(float).eps / 2
_ORIENT_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_INCIRCLE_BOUND = (10.0 + 96.0 * _EPS) * _EPS


def orient(a, b, c):
    """Twice the signed area of ``abc``; positive when counter-clockwise."""
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def incircle(a, b, c, d):
    """3x3 in-circle determinant; positive when ``d`` is inside the circle of CCW ``abc``."""
    ax, ay = a[..., 0] - d[..., 0], a[..., 1] - d[..., 1]
    bx, by = b[..., 0] - d[..., 0], b[..., 1] - d[..., 1]
    cx, cy = c[..., 0] - d[..., 0], c[..., 1] - d[..., 1]
    return ((ax * ax + ay * ay) * (bx * cy - cx * by)
            - (bx * bx + by * by) * (ax * cy - cx * ay)
            + (cx * cx + cy * cy) * (ax * by - bx * ay))


def _orient_exact(a, b, c):
    ax, ay, bx, by, cx, cy = (Fraction(float(v)) for v in (*a, *b, *c))
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _incircle_exact(a, b, c, d):
    dx, dy = Fraction(float(d[0])), Fraction(float(d[1]))
    (ax, ay), (bx, by), (cx, cy) = ((Fraction(float(p[0])) - dx, Fraction(float(p[1])) - dy) for p in (a, b, c))
    return ((ax * ax + ay * ay) * (bx * cy - cx * by)
            - (bx * bx + by * by) * (ax * cy - cx * ay)
            + (cx * cx + cy * cy) * (ax * by - bx * ay))


def orient_sign(a, b, c) -> np.ndarray:
    """Exact sign of :func:`orient` for stacked points (``a``, ``b``, ``c`` broadcast)."""
    a, b, c = np.broadcast_arrays(*(np.atleast_2d(v) for v in (a, b, c)))
    left = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
    right = (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    det = left - right
    sign = np.sign(det)
    unsure = np.abs(det) <= _ORIENT_BOUND * (np.abs(left) + np.abs(right))
    for k in np.flatnonzero(unsure):
        v = _orient_exact(a[k], b[k], c[k])
        sign[k] = (v > 0) - (v < 0)
    return sign


def incircle_sign(a, b, c, d) -> np.ndarray:
    """Exact sign of :func:`incircle` for stacked points."""
    a, b, c, d = np.broadcast_arrays(*(np.atleast_2d(v) for v in (a, b, c, d)))
    ax, ay = a[:, 0] - d[:, 0], a[:, 1] - d[:, 1]
    bx, by = b[:, 0] - d[:, 0], b[:, 1] - d[:, 1]
    cx, cy = c[:, 0] - d[:, 0], c[:, 1] - d[:, 1]
    la, lb, lc = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    det = la * (bx * cy - cx * by) - lb * (ax * cy - cx * ay) + lc * (ax * by - bx * ay)
    perm = (la * (np.abs(bx * cy) + np.abs(cx * by)) + lb * (np.abs(ax * cy) + np.abs(cx * ay))
            + lc * (np.abs(ax * by) + np.abs(bx * ay)))
    sign = np.sign(det)
    # the differences above are themselves rounded, so widen the bound a little
    unsure = np.abs(det) <= 4 * _INCIRCLE_BOUND * perm
    for k in np.flatnonzero(unsure):
        v = _incircle_exact(a[k], b[k], c[k], d[k])
        sign[k] = (v > 0) - (v < 0)
    return sign


# -- Bowyer-Watson ---------------------------------------------------------------


class _Mesh:
    """Growable triangle store; ghost triangles are ``(a, b, GHOST)`` with the
    exterior to the left of ``a -> b``."""

    def __init__(self, pts, capacity):
        self.pts = pts
        self.tri = np.empty((capacity, 3), dtype=np.int64)
        self.alive = np.zeros(capacity, dtype=bool)
        self.n = 0

    def add(self, t):
        if self.n == len(self.tri):
            self.tri = np.concatenate([self.tri, np.empty_like(self.tri)])
            self.alive = np.concatenate([self.alive, np.zeros_like(self.alive)])
        self.tri[self.n] = t
        self.alive[self.n] = True
        self.n += 1

    def compact(self):
        keep = np.flatnonzero(self.alive[:self.n])
        m = len(keep)
        self.tri[:m] = self.tri[keep]
        self.alive[:m] = True
        self.alive[m:] = False
        self.n = m

    def conflicts(self, p):
        """Indices of live triangles whose circumcircle (or ghost half-plane) holds ``p``."""
        ids = np.flatnonzero(self.alive[:self.n])
        T = self.tri[ids]
        ghost = T[:, 2] == GHOST
        bad = np.zeros(len(ids), dtype=bool)
        P = self.pts
        r = ~ghost
        if r.any():
            R = T[r]
            bad[r] = incircle_sign(P[R[:, 0]], P[R[:, 1]], P[R[:, 2]], p[None, :]) > 0
        if ghost.any():
            G = T[ghost]
            a, b = P[G[:, 0]], P[G[:, 1]]
            o = orient_sign(a, b, p[None, :])
            hit = o > 0
            # on the hull line: inside only strictly between the endpoints
            for k in np.flatnonzero(o == 0):
                t = [Fraction(float(p[i])) - Fraction(float(a[k, i])) for i in (0, 1)]
                e = [Fraction(float(b[k, i])) - Fraction(float(a[k, i])) for i in (0, 1)]
                dot = t[0] * e[0] + t[1] * e[1]
                hit[k] = 0 < dot < e[0] * e[0] + e[1] * e[1]
            bad[ghost] = hit
        return ids[bad]


def _edges(t):
    a, b, c = (int(v) for v in t)
    return ((a, b), (b, c), (c, a))


def _cavity(mesh, bad, p):
    """Restrict the conflict set to the connected component around ``p``."""
    if len(bad) <= 1:
        return bad
    owner = {}
    for t in bad:
        for e in _edges(mesh.tri[t]):
            owner[e] = t
    P = mesh.pts
    seed = None
    for t in bad:
        a, b, c = mesh.tri[t]
        if c == GHOST:
            continue
        if np.all(orient_sign(P[[a, b, c]], P[[b, c, a]], p) >= 0):
            seed = t
            break
    if seed is None:
        ghosts = [t for t in bad if mesh.tri[t][2] == GHOST]
        seed = max(ghosts, key=lambda t: orient(P[mesh.tri[t][0]], P[mesh.tri[t][1]], p)) if ghosts else bad[0]
    comp = {seed}
    stack = [seed]
    while stack:
        t = stack.pop()
        for u, v in _edges(mesh.tri[t]):
            nb = owner.get((v, u))
            if nb is not None and nb not in comp:
                comp.add(nb)
                stack.append(nb)
    return np.array(sorted(comp))


def _insert(mesh, i):
    p = mesh.pts[i]
    bad = _cavity(mesh, mesh.conflicts(p), p)
    if len(bad) == 0:
        return False  # coincides with an existing vertex
    edges = set()
    for t in bad:
        edges.update(_edges(mesh.tri[t]))
    mesh.alive[bad] = False
    for u, v in sorted(edges):
        if (v, u) in edges:
            continue
        if u == GHOST:
            mesh.add((v, i, GHOST))
        elif v == GHOST:
            mesh.add((i, u, GHOST))
        else:
            mesh.add((u, v, i))
    return True


def bowyer_watson(xy) -> np.ndarray:
    """Delaunay triangles of planar points, as CCW index triples.

    Points are inserted in input order into a triangulation closed off by a
    single ghost vertex at infinity.  Predicates are exact (filtered float
    with a rational fallback) on coordinates scaled to unit diameter, and a
    point on a circumcircle does not conflict with it.  A point equal to an
    earlier vertex is left unused.
    """
    xy = np.asarray(xy, dtype=float)
    n = len(xy)
    if n < 3:
        raise DegenerateInputError("need at least 3 points to triangulate")
    lo = xy.min(axis=0)
    diam = float(np.linalg.norm(xy.max(axis=0) - lo))
    if diam == 0:
        raise DegenerateInputError("all points coincide")
    pts = (xy - lo) / diam
    # seed triangle: point 0, the point farthest from it, and the point of
    # largest area with both
    i0 = 0
    i1 = int(np.argmax(np.linalg.norm(pts - pts[i0], axis=1)))
    o = np.abs(orient(pts[i0][None], pts[i1][None], pts))
    i2 = int(np.argmax(o))
    if o[i2] == 0:
        nz = np.flatnonzero(orient_sign(pts[i0], pts[i1], pts))
        if not len(nz):
            raise DegenerateInputError("all points are collinear")
        i2 = int(nz[0])
    if orient_sign(pts[i0], pts[i1], pts[i2])[0] < 0:
        i1, i2 = i2, i1
    mesh = _Mesh(pts, capacity=max(16, 8 * n))
    mesh.add((i0, i1, i2))
    for u, v in ((i0, i1), (i1, i2), (i2, i0)):
        mesh.add((v, u, GHOST))
    first = {i0, i1, i2}
    for i in range(n):
        if i in first:
            continue
        _insert(mesh, i)
        if mesh.n > 4 * int(mesh.alive[:mesh.n].sum()) + 64:
            mesh.compact()
    tri = mesh.tri[:mesh.n][mesh.alive[:mesh.n]]
    tri = tri[tri[:, 2] != GHOST]
    # canonical form: rotate so the smallest index comes first, then sort rows
    rot = np.argmin(tri, axis=1)
    tri = np.stack([np.roll(t, -r) for t, r in zip(tri, rot)]) if len(tri) else tri
    return tri[np.lexsort(tri.T[::-1])]


def triangle_neighbors(tri: np.ndarray) -> np.ndarray:
    """``nb[t, i]`` is the triangle across the edge opposite vertex ``i`` (-1 on the hull)."""
    nb = np.full(tri.shape, -1, dtype=np.int64)
    owner = {}
    for t, (a, b, c) in enumerate(tri):
        for k, (u, v) in enumerate(((b, c), (c, a), (a, b))):
            owner[(u, v)] = (t, k)
    for (u, v), (t, k) in owner.items():
        o = owner.get((v, u))
        if o is not None:
            nb[t, k] = o[0]
    return nb


# -- complex -------------------------------------------------------------------


@dataclass
class TriangulationComplex:
    """Simplicial complex over the samples.

    ``simplices`` are index triples (height fields) or pairs (curves) into
    ``ambient``; ``domain`` holds the domain-plane projections.
    """

    ambient: np.ndarray
    domain: np.ndarray
    simplices: np.ndarray
    neighbors: np.ndarray | None = None
    domain_rect: tuple | None = None

    @property
    def is_curve(self) -> bool:
        return self.simplices.shape[1] == 2

    @property
    def mesh(self) -> float:
        """Largest lifted simplex diameter."""
        V = self.ambient[self.simplices]
        k = self.simplices.shape[1]
        d = [np.linalg.norm(V[:, i] - V[:, j], axis=1) for i in range(k) for j in range(i + 1, k)]
        return float(np.max(d))

    def edges(self) -> np.ndarray:
        if self.is_curve:
            return np.sort(self.simplices, axis=1)
        s = self.simplices
        e = np.concatenate([s[:, [0, 1]], s[:, [1, 2]], s[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def counts(self) -> dict:
        return {"V": len(self.ambient), "E": len(self.edges()), "F": len(self.simplices)}

    def simplex_volumes(self) -> np.ndarray:
        """Lifted lengths (curves) or areas (surfaces)."""
        V = self.ambient[self.simplices]
        if self.is_curve:
            return np.linalg.norm(V[:, 1] - V[:, 0], axis=1)
        return 0.5 * np.linalg.norm(np.cross(V[:, 1] - V[:, 0], V[:, 2] - V[:, 0]), axis=1)

    def summary(self) -> dict:
        q = quality(self)
        return {"mesh": self.mesh, "fatness": q.complex_fatness,
                "degenerate": int(q.degenerate.sum()), **self.counts()}


def _signal_rect(signal):
    if signal is None:
        return None
    return tuple(signal.origin), tuple(signal.extent)


def delaunay(samples, signal=None) -> TriangulationComplex:
    """Triangulate a :class:`~geosampling.sampler.SampleSet` (or an ambient point array).

    For height fields the Delaunay triangulation of the (x, y) projections
    is lifted to R^3.  Curves are joined into a polyline in order of ``t``.
    """
    P = np.asarray(getattr(samples, "positions", samples), dtype=float)
    dom = P[:, :-1]
    if P.shape[1] == 2:
        if len(P) < 2:
            raise DegenerateInputError("a curve needs at least 2 samples")
        order = np.argsort(dom[:, 0], kind="stable")
        simplices = np.column_stack([order[:-1], order[1:]])
        return TriangulationComplex(P, dom, simplices, None, _signal_rect(signal))
    tri = bowyer_watson(dom)
    return TriangulationComplex(P, dom, tri, triangle_neighbors(tri), _signal_rect(signal))


# -- Voronoi cells ---------------------------------------------------------------


def _clip(poly, normal, offset):
    """Keep the part of a convex polygon with ``normal . x <= offset``."""
    if not poly:
        return poly
    out = []
    n = len(poly)
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        fp = normal @ p - offset
        fq = normal @ q - offset
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            out.append(p + (q - p) * (fp / (fp - fq)))
    return out


def polygon_area(poly) -> float:
    if len(poly) < 3:
        return 0.0
    P = np.asarray(poly)
    x, y = P[:, 0], P[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def voronoi_cells(complex_or_sites, domain_rect=None):
    """Dirichlet cells of the sites, clipped to the domain rectangle.

    ``domain_rect`` is ``(origin, extent)``.  For surfaces each cell is a
    CCW vertex array; for curves it is an ``(lo, hi)`` interval.  With a
    triangulation only Delaunay neighbours contribute bisectors.
    """
    if isinstance(complex_or_sites, TriangulationComplex):
        cx = complex_or_sites
        sites = cx.domain
        domain_rect = domain_rect or cx.domain_rect
        nbrs = [set() for _ in range(len(sites))]
        for u, v in cx.edges():
            nbrs[u].add(int(v))
            nbrs[v].add(int(u))
    else:
        sites = np.asarray(complex_or_sites, dtype=float)
        if sites.ndim == 1:
            sites = sites[:, None]
        nbrs = [set(range(len(sites))) - {i} for i in range(len(sites))]
    if domain_rect is None:
        raise ValueError("domain_rect is required")
    origin, extent = (np.asarray(v, dtype=float) for v in domain_rect)
    if sites.shape[1] == 1:
        order = np.argsort(sites[:, 0])
        s = sites[order, 0]
        mids = 0.5 * (s[:-1] + s[1:])
        lo = np.concatenate([[origin[0]], mids])
        hi = np.concatenate([mids, [origin[0] + extent[0]]])
        cells = [None] * len(s)
        for k, i in enumerate(order):
            cells[i] = (float(lo[k]), float(hi[k]))
        return cells
    x0, y0 = origin
    x1, y1 = origin + extent
    rect = [np.array(v) for v in ((x0, y0), (x1, y0), (x1, y1), (x0, y1))]
    cells = []
    for i, p in enumerate(sites):
        poly = list(rect)
        for j in sorted(nbrs[i]):
            q = sites[j]
            normal = q - p
            poly = _clip(poly, normal, normal @ (0.5 * (p + q)))
        cells.append(np.array(poly).reshape(-1, 2))
    return cells


# -- quality ---------------------------------------------------------------------


@dataclass(frozen=True)
class SimplexQuality:
    """Per-simplex quality arrays (lifted geometry).

    ``fatness_rr`` is in-radius over circum-radius, ``fatness_voldiam`` the
    minimum over faces of ``Vol / diam^dim`` (vertices count as 1), and
    ``min_angle`` the smallest interior angle in radians (NaN for segments).
    """

    in_radius: np.ndarray
    circum_radius: np.ndarray
    fatness_rr: np.ndarray
    fatness_voldiam: np.ndarray
    min_angle: np.ndarray
    degenerate: np.ndarray

    @property
    def complex_fatness(self) -> float:
        return float(self.fatness_rr.min()) if len(self.fatness_rr) else float("nan")

    def rows(self):
        for i in range(len(self.in_radius)):
            yield [i, float(self.in_radius[i]), float(self.circum_radius[i]), float(self.fatness_rr[i]),
                   float(self.fatness_voldiam[i]), float(self.min_angle[i])]


def triangle_quality(A, B, C, tol: float = 1e-14) -> SimplexQuality:
    """Quality of triangles given as stacked vertex arrays in R^2 or R^3."""
    A, B, C = (np.atleast_2d(np.asarray(v, dtype=float)) for v in (A, B, C))
    if A.shape[1] == 2:
        A, B, C = (np.column_stack([v, np.zeros(len(v))]) for v in (A, B, C))
    a = np.linalg.norm(B - C, axis=1)
    b = np.linalg.norm(C - A, axis=1)
    c = np.linalg.norm(A - B, axis=1)
    area = 0.5 * np.linalg.norm(np.cross(B - A, C - A), axis=1)
    diam = np.maximum(np.maximum(a, b), c)
    degenerate = area <= tol * np.maximum(diam, 1e-300) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(degenerate, 0.0, 2 * area / (a + b + c))
        R = np.where(degenerate, np.inf, a * b * c / (4 * area))
        rr = np.where(degenerate, 0.0, r / R)
        voldiam = np.where(degenerate, 0.0, np.minimum(1.0, area / diam ** 2))

        def angle(opp, s1, s2):
            return np.arccos(np.clip((s1 ** 2 + s2 ** 2 - opp ** 2) / (2 * s1 * s2), -1.0, 1.0))

        ang = np.minimum(np.minimum(angle(a, b, c), angle(b, c, a)), angle(c, a, b))
    ang = np.where(degenerate, 0.0, ang)
    return SimplexQuality(r, R, rr, voldiam, ang, degenerate)


def quality(complex: TriangulationComplex) -> SimplexQuality:
    """Fatness, radii and minimum angle of every lifted simplex."""
    V = complex.ambient[complex.simplices]
    if complex.is_curve:
        L = np.linalg.norm(V[:, 1] - V[:, 0], axis=1)
        deg = L == 0
        one = np.where(deg, 0.0, 1.0)
        return SimplexQuality(L / 2, L / 2, one, one, np.full(len(L), np.nan), deg)
    return triangle_quality(V[:, 0], V[:, 1], V[:, 2])


def fatness_equivalence_check(q: SimplexQuality) -> dict:
    """Empirical constants relating angle and the two fatness forms.

    For each ratio (and its inverse) over non-degenerate simplices the
    bracket ``[min, max]`` is reported together with ``c = max(max, 1/min)``,
    the smallest constant with ``x / c <= y <= c * x``.
    """
    ok = ~q.degenerate & np.isfinite(q.min_angle)
    pairs = {
        "angle_vs_voldiam": (q.min_angle, q.fatness_voldiam),
        "angle_vs_rr": (q.min_angle, q.fatness_rr),
        "voldiam_vs_rr": (q.fatness_voldiam, q.fatness_rr),
    }
    out = {"count": int(ok.sum())}
    for key, (num, den) in pairs.items():
        if not ok.any():
            out[key] = {"min": float("nan"), "max": float("nan"), "c": float("nan"), "bounded": False}
            continue
        ratio = num[ok] / den[ok]
        lo, hi = float(ratio.min()), float(ratio.max())
        out[key] = {"min": lo, "max": hi, "c": max(hi, 1.0 / lo), "bounded": bool(np.isfinite(hi) and lo > 0)}
    return out
