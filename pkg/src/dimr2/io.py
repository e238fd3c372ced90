"""Tensor files and score-map export.

Tensors are stored in the ``.npy`` version 1.0 layout, restricted to
little-endian float32/float64 in C order; anything else is rejected with
:class:`FormatError`. The header is parsed here rather than via
``numpy.load`` so the accepted subset is exactly what is documented. Axis
names, which ``.npy`` cannot carry, live in a ``<file>.axes.json`` sidecar.
"""
from __future__ import annotations

import ast
import csv
import json
import struct
from math import prod
from pathlib import Path

import numpy as np

from .errors import FormatError
from .metrics import ScoreMap
from .tensor import Tensor

MAGIC = b"\x93NUMPY"
SUPPORTED_DESCR = ("<f4", "<f8")
HEADER_ALIGN = 64


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".axes.json")


def _read_sidecar(path) -> list[str] | None:
    side = sidecar_path(path)
    if not side.exists():
        return None
    with open(side, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{side}: invalid JSON: {exc}") from None
    names = data.get("axis_names") if isinstance(data, dict) else None
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise FormatError(f"{side}: expected {{\"axis_names\": [...]}}")
    return names


def parse_npy(raw: bytes, source: str = "<bytes>") -> tuple[np.ndarray, dict]:
    """Decode ``.npy`` v1.0 bytes into a float64 array plus the header map."""
    if len(raw) < 10 or raw[:6] != MAGIC:
        raise FormatError(f"{source}: not an .npy file (bad magic string)")
    major, minor = raw[6], raw[7]
    if (major, minor) != (1, 0):
        raise FormatError(f"{source}: unsupported .npy version {major}.{minor}; only 1.0 is accepted")
    (header_len,) = struct.unpack("<H", raw[8:10])
    start = 10 + header_len
    if len(raw) < start:
        raise FormatError(f"{source}: truncated header")
    text = raw[10:start].decode("latin1")
    try:
        header = ast.literal_eval(text.strip())
    except (ValueError, SyntaxError):
        raise FormatError(f"{source}: unreadable header {text.strip()!r}") from None
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise FormatError(f"{source}: malformed header {text.strip()!r}")

    descr, fortran, shape = header["descr"], header["fortran_order"], header["shape"]
    if descr not in SUPPORTED_DESCR:
        raise FormatError(f"{source}: unsupported dtype {descr!r} in header {text.strip()!r}; "
                          f"only '<f4' and '<f8' are accepted")
    if fortran is not False:
        raise FormatError(f"{source}: Fortran-order data is not supported (header {text.strip()!r})")
    if not isinstance(shape, tuple) or not all(isinstance(s, int) and s >= 1 for s in shape):
        raise FormatError(f"{source}: invalid shape {shape!r} in header {text.strip()!r}")

    dtype = np.dtype(descr)
    expected = prod(shape) * dtype.itemsize
    payload = raw[start:]
    if len(payload) != expected:
        what = "truncated" if len(payload) < expected else "oversized"
        raise FormatError(f"{source}: {what} payload, {len(payload)} bytes for shape {shape} "
                          f"{descr} ({expected} expected)")
    arr = np.frombuffer(payload, dtype=dtype).astype(np.float64).reshape(shape)
    return arr, header


def encode_npy(arr: np.ndarray) -> bytes:
    """Encode a float64 array as ``.npy`` v1.0 bytes."""
    arr = np.asarray(arr, dtype="<f8", order="C")
    shape = repr(tuple(int(s) for s in arr.shape))
    header = f"{{'descr': '<f8', 'fortran_order': False, 'shape': {shape}, }}"
    pad = -(len(MAGIC) + 4 + len(header) + 1) % HEADER_ALIGN
    header = (header + " " * pad + "\n").encode("latin1")
    return MAGIC + bytes([1, 0]) + struct.pack("<H", len(header)) + header + arr.tobytes()


def _load_csv(path: Path) -> Tensor:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise FormatError(f"{path}: CSV needs a header row and at least one data row")
    header, body = rows[0], rows[1:]
    try:
        values = [[float(v) for v in row] for row in body]
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric CSV value ({exc})") from None
    if any(len(r) != len(header) for r in values):
        raise FormatError(f"{path}: ragged CSV rows")
    return Tensor(values, axis_names=_read_sidecar(path))


def load_tensor(path) -> Tensor:
    """Load a ``.npy`` (v1.0, ``<f4``/``<f8``, C order) or headered ``.csv`` file.

    CSV files load as rank-2 (rows x columns). float32 data is widened to
    float64. Axis names are taken from the sidecar when present.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _load_csv(path)
    raw = path.read_bytes()
    arr, _ = parse_npy(raw, str(path))
    names = _read_sidecar(path)
    try:
        return Tensor(arr, axis_names=names)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def save_tensor(t: Tensor, path) -> None:
    """Write ``t`` as ``.npy`` v1.0 float64, plus an axis-name sidecar if named."""
    path = Path(path)
    path.write_bytes(encode_npy(t.array))
    if t.axis_names is not None:
        with open(sidecar_path(path), "w", encoding="utf-8") as fh:
            json.dump({"axis_names": list(t.axis_names)}, fh)
            fh.write("\n")


def _axis_columns(sm: ScoreMap) -> list[str]:
    if sm.scores.axis_names is not None:
        return list(sm.scores.axis_names)
    if sm.spec is not None and sm.spec.names is not None:
        return [sm.spec.names[i] for i in sm.spec.output_axes]
    if sm.spec is not None:
        return [f"axis{i}" for i in sm.spec.output_axes]
    return [f"axis{i}" for i in range(sm.scores.rank)]


def _json_safe(x):
    """Nested lists of floats with non-finite values replaced by None."""
    if isinstance(x, list):
        return [_json_safe(v) for v in x]
    return x if np.isfinite(x) else None


def scoremap_record(sm: ScoreMap) -> dict:
    record = {
        "metric": sm.metric_name,
        "shape": list(sm.shape),
        "axes": _axis_columns(sm),
    }
    if sm.spec is not None:
        record.update({
            "axis": sm.spec.labels(sm.spec.axis),
            "axis_norm": sm.spec.labels(sm.spec.axis_norm),
            "axis_pool": sm.spec.labels(sm.spec.axis_pool),
        })
    record["scores"] = _json_safe(sm.array.tolist())
    record["degenerate"] = np.asarray(sm.degenerate_mask, dtype=bool).tolist()
    return record


def export_scoremap(sm: ScoreMap, path, format: str = "csv") -> None:
    """Write a score map as long-format CSV or as a JSON record.

    CSV has one row per retained index tuple: the axis columns, then
    ``score`` and ``degenerate``.
    """
    path = Path(path)
    if format == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(scoremap_record(sm), fh)
            fh.write("\n")
        return
    if format != "csv":
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    scores = sm.array
    mask = np.broadcast_to(np.asarray(sm.degenerate_mask, dtype=bool), scores.shape)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_axis_columns(sm) + ["score", "degenerate"])
        for idx in np.ndindex(scores.shape):
            writer.writerow([*idx, repr(float(scores[idx])), int(mask[idx])])
