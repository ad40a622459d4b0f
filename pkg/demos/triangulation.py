"""Delaunay complexes over samples and how fat their triangles are.

Samples of a sphere cap are triangulated in the parameter domain and the
triangles are lifted onto the surface.  The report lists the in-radius to
circum-radius ratio, the volume/diameter form and the smallest angle, and
the empirical constants that relate them.
"""
import numpy as np

from geosampling import SignalSpec, build_signal, estimate_curvature
from geosampling.sampler import sample_adaptive
from geosampling.triangulate import delaunay, fatness_equivalence_check, polygon_area, quality, voronoi_cells

sig = build_signal(SignalSpec("sphere-cap", {"r": 2.0, "disk": 1.0}, shape=(81, 81)))
samples = sample_adaptive(sig, estimate_curvature(sig), 0.3)
cx = delaunay(samples, sig)
q = quality(cx)
print(f"{len(samples)} samples, {len(cx.simplices)} triangles, mesh = {cx.mesh:.4f}")
print(f"r/R: min {q.fatness_rr.min():.3f}, median {np.median(q.fatness_rr):.3f} (equilateral 0.5)")
print(f"min angle: {np.degrees(q.min_angle.min()):.1f} deg")
eq = fatness_equivalence_check(q)
for key in ("angle_vs_rr", "angle_vs_voldiam", "voldiam_vs_rr"):
    print(f"  {key}: ratio in [{eq[key]['min']:.3f}, {eq[key]['max']:.3f}]")

cells = voronoi_cells(cx)
total = sum(polygon_area(c) for c in cells)
print(f"Voronoi cells tile the domain: area {total:.6f} vs {np.prod(sig.extent):.6f}")
