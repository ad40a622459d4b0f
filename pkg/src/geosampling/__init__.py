"""Curvature-adaptive sampling, triangulation, reconstruction, quantization
and channel simulation for geometric signals (graphs of functions)."""

__version__ = "0.1.0"

from .core import (BUILTINS, Boundary, CurvatureField, GeometricSignal, Kind, SignalError, SignalSpec,
                   build_signal, estimate_curvature, from_raster)
from .sampler import SampleSet, check_density, sample_adaptive, sample_uniform
from .triangulate import (TriangulationComplex, bowyer_watson, delaunay, quality, triangle_quality,
                          voronoi_cells)
from .reconstruct import (PLApproximation, hausdorff_distance, metric_distortion, reconstruction_errors,
                          secant_reconstruct)
from .quantize import PointCloud, lloyd_minimize, mse_per_dimension, quantizer_quality, surface_point_cloud
from .channel import TubeModel, build_tube, code_metrics, nominal_coding_gain, simulate_decode

__all__ = [
    "BUILTINS", "Boundary", "CurvatureField", "GeometricSignal", "Kind", "SignalError", "SignalSpec",
    "build_signal", "estimate_curvature", "from_raster",
    "SampleSet", "check_density", "sample_adaptive", "sample_uniform",
    "TriangulationComplex", "bowyer_watson", "delaunay", "quality", "triangle_quality", "voronoi_cells",
    "PLApproximation", "hausdorff_distance", "metric_distortion", "reconstruction_errors", "secant_reconstruct",
    "PointCloud", "lloyd_minimize", "mse_per_dimension", "quantizer_quality", "surface_point_cloud",
    "TubeModel", "build_tube", "code_metrics", "nominal_coding_gain", "simulate_decode",
]
