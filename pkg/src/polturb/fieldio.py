"""Snapshot persistence: binary field dumps, sidecar metadata, CSV, heatmaps.

Dump layout (little endian): magic (4 bytes), n (uint32), L (float64),
t (float64), field count (uint32), then per field the row-major samples as
64-bit floats; complex dumps interleave (re, im) pairs.  A JSON sidecar with
the full parameter set and RNG seed sits next to each dump.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from pathlib import Path

import numpy as np

from .grid import FieldPair, Grid2D

MAGIC_COMPLEX = b"PTF1"
MAGIC_REAL = b"PTR1"
_HEADER = struct.Struct("<4sIddI")


def write_field_dump(path, fields: FieldPair) -> Path:
    """One snapshot (photon then exciton field) to a complex binary dump."""
    return _write(path, MAGIC_COMPLEX, fields.grid, fields.t, [fields.psi_c, fields.psi_x])


def read_field_dump(path) -> FieldPair:
    magic, grid, t, arrays = _read(path)
    if magic != MAGIC_COMPLEX or len(arrays) != 2:
        raise ValueError(f"{path} is not a two-field complex dump")
    return FieldPair(grid, arrays[0], arrays[1], t)


def write_real_dump(path, array: np.ndarray, grid: Grid2D, t: float = 0.0) -> Path:
    """A single real 2D array (disorder realization, g1 map, spectrum, ...)."""
    return _write(path, MAGIC_REAL, grid, t, [array])


def read_real_dump(path) -> tuple[np.ndarray, Grid2D, float]:
    magic, grid, t, arrays = _read(path)
    if magic != MAGIC_REAL or len(arrays) != 1:
        raise ValueError(f"{path} is not a single-field real dump")
    return arrays[0], grid, t


def _write(path, magic: bytes, grid: Grid2D, t: float, arrays) -> Path:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(magic, grid.n, grid.length, float(t), len(arrays)))
        for a in arrays:
            if magic == MAGIC_COMPLEX:
                buf = np.ascontiguousarray(a, dtype="<c16")
            else:
                buf = np.ascontiguousarray(a, dtype="<f8")
            fh.write(buf.tobytes())
    return path


def _read(path):
    path = Path(path)
    with open(path, "rb") as fh:
        magic, n, length, t, count = _HEADER.unpack(fh.read(_HEADER.size))
        if magic not in (MAGIC_COMPLEX, MAGIC_REAL):
            raise ValueError(f"{path} has unknown magic {magic!r}")
        grid = Grid2D(n=int(n), length=float(length))
        item = np.dtype("<c16") if magic == MAGIC_COMPLEX else np.dtype("<f8")
        arrays = []
        for _ in range(count):
            raw = fh.read(item.itemsize * n * n)
            arrays.append(np.frombuffer(raw, dtype=item).reshape(n, n).copy())
    return magic, grid, float(t), arrays


def write_metadata(path, meta: dict) -> Path:
    """JSON sidecar next to a dump (same basename, .json suffix)."""
    path = Path(path).with_suffix(".json")
    path.write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True))
    return path


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


OBSERVABLE_COLUMNS = ("t", "n_c", "f_x", "e_kin", "e_int", "eta", "k_peak", "n_vortices")


def write_observables_csv(path, records) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(",".join(OBSERVABLE_COLUMNS) + "\n")
        for r in records:
            vals = (r.t, r.n_c, r.f_x, r.e_kin, r.e_int, r.eta, r.k_peak, r.n_vortices)
            fh.write(",".join(_fmt(v) for v in vals) + "\n")
    return path


def read_observables_csv(path) -> dict:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def save_heatmap(path, array: np.ndarray, extent=None, cmap: str = "viridis",
                 label: str = "", vmin=None, vmax=None) -> Path:
    """PNG heatmap with the colormap scaling recorded in the PNG metadata."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    fig, ax = plt.subplots(figsize=(5, 4.2), constrained_layout=True)
    im = ax.imshow(array, origin="lower", extent=extent, cmap=cmap, vmin=vmin, vmax=vmax)
    fig.colorbar(im, ax=ax, label=label)
    meta = {
        "Software": "polturb",
        "Description": json.dumps(
            {
                "cmap": cmap,
                "vmin": float(im.norm.vmin),
                "vmax": float(im.norm.vmax),
                "label": label,
            }
        ),
    }
    fig.savefig(path, dpi=130, metadata=meta)
    plt.close(fig)
    return path
