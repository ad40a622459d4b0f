"""
Command-line front end.

Every subcommand accepts the same run configuration, either as flags or as
a JSON file given with ``--config`` (flags win).  Outputs go to ``--out``.

Exit codes: 1 usage, 2 validation or malformed input, 3 I/O.
"""
from __future__ import annotations

import argparse
import json
import sys
from functools import cached_property
from pathlib import Path

import numpy as np

from . import __version__
from .channel import build_tube, code_metrics, simulate_decode, RNG_NAME
from .core import BUILTINS, Kind, SignalError, SignalSpec, build_signal, estimate_curvature
from .io import read_curve_csv, read_pgm, sha256_file, write_csv, write_json, write_obj
from .quantize import (lloyd_minimize, mse_per_dimension, quantizer_quality, surface_point_cloud,
                       zador_dimension_experiment)
from .reconstruct import delta_approximation_check, metric_distortion, reconstruction_errors, secant_reconstruct
from .sampler import check_density, sample_adaptive, sample_uniform
from .triangulate import delaunay, fatness_equivalence_check, quality

EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 1, 2, 3

# key: (type, default, help); list-valued keys use nargs="+"
CONFIG_KEYS = {
    "builtin": (str, "gaussian-bump", f"builtin signal: {', '.join(BUILTINS)}"),
    "input": (str, None, "input signal file: PGM image (P2/P5) or two-column t,f CSV; overrides builtin"),
    "height_scale": (float, 1.0, "PGM heights are gray/maxval * height_scale"),
    "shape": (int, None, "grid nodes per axis for builtins (one value, or NX NY)"),
    "r": (float, None, "radius of sphere-cap / cylinder-cap"),
    "disk": (float, None, "diameter of the disk whose inscribed square is the sphere-cap domain"),
    "amplitude": (float, None, "amplitude of gaussian-bump / sine"),
    "width": (float, None, "gaussian-bump standard deviation"),
    "freq": (float, None, "sine angular frequency"),
    "a": (float, None, "plane x slope"),
    "b": (float, None, "plane y slope"),
    "c": (float, None, "plane offset / constant curve value"),
    "tiles": (int, None, "checker tiles per side"),
    "extent": (float, None, "domain side length of the builtin"),
    "rho": (float, 0.5, "adaptive density factor, eta(p) = rho * omega(p), 0 < rho < 1"),
    "eta": (float, None, "constant separation (uniform sampling) instead of rho"),
    "omega_max": (float, None, "cap on the osculatory radius (default: half the domain diameter)"),
    "seed": (int, 42, "root seed for sampling, pair draws, Lloyd init and channel trials"),
    "sigma": (float, None, "noise std per coordinate (list); default 0.01 0.05 0.2 times min eta"),
    "m": (int, 16, "codebook size"),
    "N": (int, None, "dimension in the 1/N factor of E and Q (default: ambient dimension)"),
    "trials": (int, 10000, "Monte Carlo trials per sigma"),
    "pairs": (int, 2000, "pair budget for the metric distortion check"),
    "delta": (float, None, "tolerance for the delta-approximation check (skipped when unset)"),
    "out": (str, "out", "output directory"),
    "obj": (bool, True, "write the mesh as OBJ (disable with --no-obj)"),
}
LIST_KEYS = {"sigma", "shape"}
PARAM_KEYS = ("r", "disk", "amplitude", "width", "freq", "a", "b", "c", "tiles", "extent")


class ConfigError(SignalError):
    pass


class StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"stage {stage!r} failed: {exc}")
        self.stage = stage
        self.exc = exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_flags(p):
    for key, (typ, default, text) in CONFIG_KEYS.items():
        flag = "--" + key.replace("_", "-")
        text = f"{text} [config key: {key}; default: {default}]"
        if typ is bool:
            p.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction,
                           default=argparse.SUPPRESS, help=text)
        elif key in LIST_KEYS:
            p.add_argument(flag, dest=key, type=typ, nargs="+", default=argparse.SUPPRESS, help=text)
        else:
            p.add_argument(flag, dest=key, type=typ, default=argparse.SUPPRESS, help=text)
    p.add_argument("--config", default=argparse.SUPPRESS,
                   help="JSON file with any of the config keys above; flags override it")


COMMANDS = {
    "sample": "curvature estimate and maximal sampling (samples.csv, samples.json)",
    "triangulate": "sample, then Delaunay complex (mesh.obj, quality.csv, triangulation.json)",
    "reconstruct": "triangulate, then secant PL map and error/distortion report (reconstruction.json)",
    "quantize": "Lloyd codebook on the surface cloud and scalar/vector comparison (codebook.csv, quantizer.json)",
    "channel": "Gaussian channel simulation over the samples (error_rates.csv, channel.json)",
    "metrics": "power, rate, capacity, bandwidth, energy, C0 (metrics.json)",
    "pipeline": "every stage above plus manifest.json with sha256 of each output",
}


def build_parser() -> argparse.ArgumentParser:
    keys = ", ".join(CONFIG_KEYS)
    parser = _Parser(prog="geosampling", description=__doc__.split("\n\n")[0].strip(),
                     epilog=f"config keys: {keys}. Exit codes: 1 usage, 2 validation, 3 I/O.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in COMMANDS.items():
        p = sub.add_parser(name, help=text, description=text, epilog=f"config keys: {keys}")
        _add_flags(p)
    return parser


def resolve_config(ns: dict) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    cfg = {k: v[1] for k, v in CONFIG_KEYS.items()}
    path = ns.pop("config", None)
    if path is not None:
        text = Path(path).read_text()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path}: invalid JSON ({e})") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path}: top level must be an object")
        unknown = sorted(set(raw) - set(CONFIG_KEYS))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        cfg.update(raw)
    cfg.update(ns)
    validate(cfg)
    return cfg


def validate(cfg: dict):
    def bad(msg):
        raise ConfigError(msg)

    if cfg["input"] is None and cfg["builtin"] not in BUILTINS:
        bad(f"unknown builtin {cfg['builtin']!r}")
    if cfg["eta"] is None and not 0 < cfg["rho"] < 1:
        bad(f"rho={cfg['rho']} must lie in (0, 1)")
    if cfg["eta"] is not None and not cfg["eta"] > 0:
        bad("eta must be positive")
    if cfg["omega_max"] is not None and not cfg["omega_max"] > 0:
        bad("omega_max must be positive")
    for key in ("m", "trials", "pairs"):
        if int(cfg[key]) < 1:
            bad(f"{key} must be >= 1")
    if cfg["N"] is not None and int(cfg["N"]) < 1:
        bad("N must be >= 1")
    if cfg["sigma"] is not None:
        sig = [cfg["sigma"]] if np.isscalar(cfg["sigma"]) else list(cfg["sigma"])
        if not sig or any(not float(s) >= 0 for s in sig):
            bad("sigma values must be >= 0")
        cfg["sigma"] = [float(s) for s in sig]
    if cfg["shape"] is not None:
        shape = [cfg["shape"]] if np.isscalar(cfg["shape"]) else list(cfg["shape"])
        if not 1 <= len(shape) <= 2 or any(int(s) < 3 for s in shape):
            bad("shape needs one or two values >= 3")
        cfg["shape"] = [int(s) for s in shape]
    if cfg["delta"] is not None and not cfg["delta"] > 0:
        bad("delta must be positive")


class Run:
    """Lazily evaluated pipeline state for one configuration."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.out = Path(cfg["out"])
        self.outputs: list[Path] = []

    def path(self, name) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        p = self.out / name
        if p not in self.outputs:
            self.outputs.append(p)
        return p

    @cached_property
    def signal(self):
        cfg = self.cfg
        if cfg["input"]:
            src = Path(cfg["input"])
            if src.suffix.lower() == ".csv":
                return read_curve_csv(src)
            return read_pgm(src, height_scale=cfg["height_scale"])
        params = {k: cfg[k] for k in PARAM_KEYS if cfg[k] is not None}
        if "extent" in params and cfg["builtin"] in ("plane",):
            params["extent"] = (params["extent"], params["extent"])
        shape = tuple(cfg["shape"]) if cfg["shape"] else None
        return build_signal(SignalSpec(cfg["builtin"], params, shape))

    @cached_property
    def curv(self):
        return estimate_curvature(self.signal, self.cfg["omega_max"])

    @cached_property
    def samples(self):
        if self.cfg["eta"] is not None:
            return sample_uniform(self.signal, self.curv, self.cfg["eta"], self.cfg["seed"])
        return sample_adaptive(self.signal, self.curv, self.cfg["rho"], self.cfg["seed"])

    @cached_property
    def complex(self):
        return delaunay(self.samples, self.signal)

    @cached_property
    def pl(self):
        return secant_reconstruct(self.signal, self.complex)

    @property
    def sigmas(self):
        if self.cfg["sigma"] is not None:
            return self.cfg["sigma"]
        return [f * self.samples.min_eta for f in (0.01, 0.05, 0.2)]

    def signal_info(self):
        s = self.signal
        return {"name": s.name, "kind": s.kind.value, "origin": s.origin, "extent": s.extent,
                "grid_shape": s.grid_shape, "boundary": s.boundary.value}


# -- stages ----------------------------------------------------------------------


def stage_sample(run: Run):
    s = run.samples
    write_csv(run.path("samples.csv"), ["index", "x", "y", "z", "eta", "k"], s.rows())
    curv = run.curv
    write_json(run.path("samples.json"), {
        "signal": run.signal_info(),
        "curvature": {"k_max": curv.k0, "omega_min": curv.omega_min, "omega_max": curv.omega_max},
        "rho": s.rho,
        "eta": run.cfg["eta"],
        "seed": s.seed,
        "sampling": s.summary(),
        "density": check_density(run.signal, s),
    })


def stage_triangulate(run: Run):
    cx = run.complex
    q = quality(cx)
    if run.cfg["obj"]:
        write_obj(run.path("mesh.obj"), cx.ambient, cx.simplices)
    write_csv(run.path("quality.csv"),
              ["simplex", "in_radius", "circum_radius", "fatness_rr", "fatness_voldiam", "min_angle"], q.rows())
    write_json(run.path("triangulation.json"), {
        "summary": cx.summary(),
        "fatness_equivalence": fatness_equivalence_check(q),
    })


def stage_reconstruct(run: Run):
    sig, pl = run.signal, run.pl
    report = {"errors": reconstruction_errors(sig, pl)}
    if sig.kind is Kind.HEIGHT_FIELD:
        report["metric_distortion"] = metric_distortion(sig, pl, int(run.cfg["pairs"]), run.cfg["seed"]).to_dict()
    if run.cfg["delta"] is not None:
        report["delta_check"] = delta_approximation_check(sig, pl, run.cfg["delta"])
    write_json(run.path("reconstruction.json"), report)


def stage_quantize(run: Run):
    sig, cfg = run.signal, run.cfg
    cloud = surface_point_cloud(sig)
    m = min(int(cfg["m"]), len(cloud))
    cb, rep = lloyd_minimize(cloud, m, seed=cfg["seed"], N=cfg["N"])
    rows = [[*map(float, c), float(mass), float(d)] for c, mass, d in
            zip(cb.centers, cb.cell_mass, cb.cell_distortion)]
    coords = ["x", "y", "z"][: cloud.ambient_dim - 1] + ["f"]
    write_csv(run.path("codebook.csv"), [*coords, "cell_mass", "cell_distortion"], rows)
    out = {
        "lloyd": rep.to_dict(),
        "E_total": mse_per_dimension(cloud, cb, "total"),
        "E_cells": mse_per_dimension(cloud, cb, "cells"),
        "quality": quantizer_quality(cloud, cb),
        "m": m,
    }
    if sig.kind is Kind.HEIGHT_FIELD:
        out["zador"] = zador_dimension_experiment(sig, m, seed=cfg["seed"], N=cfg["N"])
    write_json(run.path("quantizer.json"), out)


def stage_channel(run: Run):
    tube = build_tube(run.signal, run.curv, run.samples)
    reports = []
    for s in run.sigmas:
        r = simulate_decode(tube, run.samples, s, int(run.cfg["trials"]), run.cfg["seed"])
        r.pop("decoded")
        r.pop("true")
        reports.append(r)
    write_csv(run.path("error_rates.csv"),
              ["sigma", "error_rate", "wilson_low", "wilson_high", "outside_tube_fraction"],
              [[r["sigma"], r["error_rate"], r["wilson_low"], r["wilson_high"], r["outside_tube_fraction"]]
               for r in reports])
    write_json(run.path("channel.json"), {
        "tube_radius": tube.tube_radius,
        "min_eta": run.samples.min_eta,
        "rng": RNG_NAME,
        "reports": reports,
    })


def stage_metrics(run: Run):
    per_sigma = []
    base = None
    for s in run.sigmas:
        cm = code_metrics(run.signal, run.curv, run.samples, run.complex, s)
        base = base or cm
        per_sigma.append({"sigma": s, "C0": cm.C0, "C0_infinite": cm.C0_infinite})
    d = base.to_dict()
    d.pop("C0")
    d.pop("C0_infinite")
    d["shannon"] = per_sigma
    write_json(run.path("metrics.json"), d)


STAGES = {
    "sample": [stage_sample],
    "triangulate": [stage_sample, stage_triangulate],
    "reconstruct": [stage_sample, stage_triangulate, stage_reconstruct],
    "quantize": [stage_quantize],
    "channel": [stage_sample, stage_channel],
    "metrics": [stage_sample, stage_metrics],
    "pipeline": [stage_sample, stage_triangulate, stage_reconstruct, stage_quantize, stage_channel,
                 stage_metrics],
}


def run_command(command: str, cfg: dict) -> list[Path]:
    run = Run(cfg)
    for fn in STAGES[command]:
        name = fn.__name__.removeprefix("stage_")
        try:
            fn(run)
        except (SignalError, OSError, ValueError, RuntimeError) as exc:
            raise StageError(name, exc) from exc
    if command == "pipeline":
        manifest = {
            "version": __version__,
            "seed": cfg["seed"],
            "config": {k: v for k, v in sorted(cfg.items()) if k != "out"},
            "outputs": [{"file": p.name, "sha256": sha256_file(p)} for p in run.outputs],
        }
        write_json(run.path("manifest.json"), manifest)
    return run.outputs


def _exit_code(exc) -> int:
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_VALIDATION


def main(argv=None) -> int:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")
    try:
        cfg = resolve_config(ns)
        outputs = run_command(command, cfg)
    except StageError as e:
        print(f"geosampling: error: {e}", file=sys.stderr)
        return _exit_code(e.exc)
    except OSError as e:
        print(f"geosampling: error: {e}", file=sys.stderr)
        return EXIT_IO
    except (SignalError, ValueError) as e:
        print(f"geosampling: error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    for p in outputs:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
