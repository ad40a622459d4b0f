"""Nearest-sample decoding over a Gaussian channel.

Samples of a sphere cap serve as code points.  Noise below the sampling
radius is almost always decoded correctly; as sigma grows towards the
separation, symbol errors appear.  The code figures of the same sampling
close the demo.
"""
from geosampling import SignalSpec, build_signal, estimate_curvature
from geosampling.channel import build_tube, code_metrics, simulate_decode
from geosampling.sampler import sample_adaptive
from geosampling.triangulate import delaunay

sig = build_signal(SignalSpec("sphere-cap", {"r": 2.0, "disk": 1.0}, shape=(81, 81)))
curv = estimate_curvature(sig)
samples = sample_adaptive(sig, curv, 0.5)
tube = build_tube(sig, curv, samples)
print(f"{len(samples)} code points, min eta {samples.min_eta:.4f}, tube radius {tube.tube_radius:.3f}")
for f in (0.0, 0.01, 0.05, 0.2, 0.5):
    r = simulate_decode(tube, samples, f * samples.min_eta, 20_000)
    print(f"  sigma = {f:4.2f} min_eta: error rate {r['error_rate']:.4f} "
          f"[{r['wilson_low']:.4f}, {r['wilson_high']:.4f}]")

m = code_metrics(sig, curv, samples, delaunay(samples, sig), sigma=0.05 * samples.min_eta)
print(f"P={m.P:.4f} R={m.R:.2f} C={m.C:.2f} W={m.W:.3f} energy={m.energy:.4f} C0={m.C0:.2f}")
