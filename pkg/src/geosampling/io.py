"""Readers for raster/1-D signal input and writers for CSV, JSON and OBJ output."""
from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from .core import Boundary, GeometricSignal, Kind, SignalError, from_raster


class FormatError(SignalError):
    """Malformed input file."""


def _pgm_tokens(data: bytes, count: int, start: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments.

    Returns the tokens and the offset just past the final token.
    """
    tokens = []
    pos = start
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= n:
            raise FormatError(f"truncated PGM header at offset {pos}")
        begin = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tok = data[begin:pos]
        if not tok.isdigit():
            raise FormatError(f"invalid PGM header token {tok!r} at offset {begin}")
        tokens.append(int(tok))
    return tokens, pos


def parse_pgm(data: bytes) -> tuple[np.ndarray, int]:
    """Decode a P2 (ASCII) or P5 (binary) PGM image.

    Returns the gray levels as an integer array of shape ``(height, width)``
    with row 0 at the top of the file, and ``maxval``.
    """
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"invalid PGM magic {magic!r} at offset 0 (expected b'P2' or b'P5')")
    (width, height, maxval), pos = _pgm_tokens(data, 3, 2)
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError(f"invalid PGM dimensions/maxval at offset {pos}")
    count = width * height
    if magic == b"P2":
        body = data[pos:].split()
        if len(body) < count:
            raise FormatError(f"PGM raster truncated: {len(body)} of {count} samples after offset {pos}")
        pixels = np.array([int(v) for v in body[:count]], dtype=np.int64)
    else:
        pos += 1  # single whitespace byte ends the header
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        raw = data[pos:pos + need]
        if len(raw) < need:
            raise FormatError(f"PGM raster truncated at offset {pos + len(raw)}")
        pixels = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    if pixels.max(initial=0) > maxval:
        raise FormatError("PGM sample exceeds maxval")
    return pixels.reshape(height, width), maxval


def read_pgm(path, height_scale: float = 1.0, extent=None) -> GeometricSignal:
    """Load a PGM image as a height field with ``h = g / maxval * height_scale``.

    Image rows are flipped so that the first file row sits at the largest y.
    """
    data = Path(path).read_bytes()
    pixels, maxval = parse_pgm(data)
    heights = pixels[::-1].astype(float) / maxval * height_scale
    return from_raster(heights, extent=extent, name=Path(path).name)


def write_pgm(path, heights: np.ndarray, maxval: int = 255, binary: bool = True):
    g = np.clip(np.rint(np.asarray(heights)[::-1] * maxval), 0, maxval).astype(int)
    h, w = g.shape
    header = f"{'P5' if binary else 'P2'}\n{w} {h}\n{maxval}\n".encode()
    if binary:
        body = g.astype(">u2" if maxval > 255 else "u1").tobytes()
    else:
        body = "\n".join(" ".join(str(v) for v in row) for row in g).encode() + b"\n"
    Path(path).write_bytes(header + body)


def read_curve_csv(path, n: int | None = None, boundary=Boundary.BORDERED) -> GeometricSignal:
    """Load a two-column ``t, f(t)`` CSV and resample it onto a uniform grid.

    A non-numeric first row is treated as a header.  ``t`` must be strictly
    increasing; ``n`` defaults to the number of data rows.
    """
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            if len(row) < 2:
                raise FormatError(f"line {lineno}: expected two columns")
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                if rows or lineno > 1:
                    raise FormatError(f"line {lineno}: non-numeric value") from None
    if len(rows) < 3:
        raise FormatError("curve CSV needs at least 3 samples")
    t, f = np.array(rows).T
    if np.any(np.diff(t) <= 0):
        raise FormatError("t column must be strictly increasing")
    n = n or len(t)
    grid = np.linspace(t[0], t[-1], n)
    return GeometricSignal(Kind.CURVE, (t[0],), (t[-1] - t[0],), np.interp(grid, t, f), boundary,
                           Path(path).name)


def to_jsonable(obj):
    """Convert numpy scalars/arrays and non-finite floats into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps_json(obj))


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    Path(path).write_text(buf.getvalue())


def write_obj(path, vertices: np.ndarray, faces: np.ndarray):
    """Wavefront OBJ with 1-based indices; 2-vertex cells are written as lines."""
    lines = ["# geosampling mesh"]
    for v in np.asarray(vertices, dtype=float):
        lines.append("v " + " ".join(repr(float(c)) for c in v))
    for f in np.asarray(faces, dtype=int):
        lines.append(("l " if len(f) == 2 else "f ") + " ".join(str(i + 1) for i in f))
    Path(path).write_text("\n".join(lines) + "\n")


def read_obj(path):
    verts, faces = [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(p) for p in parts[1:]])
        elif parts[0] in ("f", "l"):
            faces.append([int(p.split("/")[0]) - 1 for p in parts[1:]])
    return np.array(verts), np.array(faces, dtype=int)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
