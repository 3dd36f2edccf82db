"""Field snapshot files and PGM heatmap export.

Snapshot format: raw little-endian float64 array, row-major with x as the
outer index, in `<path>`; a JSON sidecar header `<path>.json` carries the
grid metadata and the capture time. The round trip is bit-exact.

Heatmaps are binary 16-bit PGM (P5) with linear min/max scaling; the
scaling and orientation are recorded in header comments.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import WignerLabError
from .fields import WignerField
from .grid import make_grid


def header_path(path: str) -> str:
    return str(path) + ".json"


def save_snapshot(field: WignerField, path: str, time: float = 0.0) -> None:
    g = field.grid
    header = {
        "nx": g.nx,
        "np": g.np,
        "x_min": g.x_min,
        "x_max": g.x_max,
        "p_min": g.p_min,
        "p_max": g.p_max,
        "hbar": g.hbar,
        "mass": g.mass,
        "time": float(time),
    }
    data = np.ascontiguousarray(field.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(data.tobytes())
    with open(header_path(path), "w", encoding="ascii") as fh:
        json.dump(header, fh, indent=1)
        fh.write("\n")


def load_snapshot(path: str) -> tuple[WignerField, float]:
    with open(header_path(path), "r", encoding="ascii") as fh:
        header = json.load(fh)
    grid = make_grid(
        nx=header["nx"], np=header["np"],
        x_min=header["x_min"], x_max=header["x_max"],
        p_min=header["p_min"], p_max=header["p_max"],
        hbar=header["hbar"], mass=header["mass"],
    )
    expected = grid.nx * grid.np * 8
    size = os.path.getsize(path)
    if size != expected:
        raise WignerLabError(f"snapshot {path} holds {size} bytes, expected {expected}")
    with open(path, "rb") as fh:
        values = np.frombuffer(fh.read(), dtype="<f8").reshape(grid.nx, grid.np)
    return WignerField(grid, values.copy()), float(header["time"])


def write_pgm(field: WignerField, path: str) -> None:
    """16-bit grayscale heatmap; rows follow x, columns follow p."""
    w = field.values
    wmin, wmax = float(w.min()), float(w.max())
    span = wmax - wmin
    if span <= 0:
        scaled = np.zeros_like(w, dtype=np.uint16)
    else:
        scaled = np.round((w - wmin) / span * 65535.0).astype(np.uint16)
    header = (
        "P5\n"
        f"# wigner heatmap: gray = round((W - wmin) / (wmax - wmin) * 65535)\n"
        f"# wmin={wmin!r} wmax={wmax!r}\n"
        f"# rows: x index (nx={field.grid.nx}), cols: p index (np={field.grid.np})\n"
        f"{field.grid.np} {field.grid.nx}\n"
        "65535\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(scaled.astype(">u2").tobytes())


def read_pgm(path: str) -> tuple[np.ndarray, dict]:
    """Read back a P5 heatmap; returns the uint16 array and parsed comments."""
    with open(path, "rb") as fh:
        blob = fh.read()
    lines = []
    comments = {}
    pos = 0
    while len(lines) < 3:  # magic, dims, maxval; comments collected aside
        nl = blob.index(b"\n", pos)
        line = blob[pos:nl].decode("ascii")
        pos = nl + 1
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    key, _, val = token.partition("=")
                    try:
                        comments[key] = float(val)
                    except ValueError:
                        comments[key] = val
            continue
        lines.append(line)
    if lines[0] != "P5":
        raise WignerLabError(f"{path} is not a binary PGM")
    cols, rows = (int(v) for v in lines[1].split())
    if int(lines[2]) != 65535:
        raise WignerLabError("expected 16-bit PGM")
    data = np.frombuffer(blob[pos:], dtype=">u2", count=rows * cols).reshape(rows, cols)
    return data.astype(np.uint16), comments
