"""Embedding files and result documents.

Binary embedding layout (little-endian):
    magic  b"FEMB" | u32 version = 1 | u32 rows | u32 dim | rows*dim float32

CSV embedding layout:
    a ``dim=<d>`` header line, then one comma-separated row of decimal floats
    per line.  Values are stored as float32 either way, so the two formats
    load bit-identically for the same data.

Result and bench documents are JSON with a pinned schema id; read-back
rejects unknown fields so consumers notice drift.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import InputError

MAGIC = b"FEMB"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<III")

RESULT_SCHEMA = "frame-select-result/v1"
BENCH_SCHEMA = "frame-select-bench/v1"

RESULT_FIELDS = {
    "schema", "engine_version", "method", "k", "lambda", "m", "kernel_alphas",
    "normalize", "parallel", "indices", "allocation", "score", "timings_ms",
}
ERROR_FIELDS = {"schema", "engine_version", "error"}


def _as_float32_matrix(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.float32)
    if m.ndim == 1:
        m = m[None, :]
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise InputError(f"embedding matrix must be 2-D and non-empty, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError("embedding matrix contains non-finite values")
    return m


def write_embeddings(path, matrix) -> None:
    """Write a rows x dim float32 matrix in the binary embedding format."""
    m = _as_float32_matrix(matrix)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(FORMAT_VERSION, m.shape[0], m.shape[1]))
        fh.write(np.ascontiguousarray(m, dtype="<f4").tobytes())


def write_embeddings_csv(path, matrix) -> None:
    """Write the CSV form; float32 values are rendered with round-trippable reprs."""
    m = _as_float32_matrix(matrix)
    lines = [f"dim={m.shape[1]}"]
    for row in m:
        lines.append(",".join(str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _read_binary(data: bytes, path) -> np.ndarray:
    if len(data) < len(MAGIC) + _HEADER.size:
        raise InputError(f"{path}: truncated header")
    version, rows, dim = _HEADER.unpack_from(data, len(MAGIC))
    if version != FORMAT_VERSION:
        raise InputError(f"{path}: unsupported format version {version}")
    if rows < 1 or dim < 1:
        raise InputError(f"{path}: empty embedding file (rows={rows}, dim={dim})")
    payload = data[len(MAGIC) + _HEADER.size:]
    expected = rows * dim * 4
    if len(payload) != expected:
        raise InputError(
            f"{path}: payload is {len(payload)} bytes, expected exactly {expected}"
        )
    m = np.frombuffer(payload, dtype="<f4").reshape(rows, dim).astype(np.float32)
    if not np.all(np.isfinite(m)):
        raise InputError(f"{path}: embedding file contains non-finite values")
    return m


def _read_csv(text: str, path) -> np.ndarray:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("dim="):
        raise InputError(f"{path}: expected a 'dim=<d>' header line")
    try:
        dim = int(lines[0][4:])
    except ValueError:
        raise InputError(f"{path}: bad dimension header {lines[0]!r}") from None
    if dim < 1 or len(lines) < 2:
        raise InputError(f"{path}: empty embedding file")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != dim:
            raise InputError(f"{path}: row has {len(parts)} values, expected {dim}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise InputError(f"{path}: unparseable value in row {ln!r}") from None
    m = np.asarray(rows, dtype=np.float32)
    if not np.all(np.isfinite(m)):
        raise InputError(f"{path}: embedding file contains non-finite values")
    return m


def read_embeddings(path) -> np.ndarray:
    """Load a rows x dim float32 matrix from either supported format."""
    p = Path(path)
    if not p.exists():
        raise InputError(f"{p}: no such file")
    data = p.read_bytes()
    if data[:4] == MAGIC:
        return _read_binary(data, p)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise InputError(f"{p}: bad magic (not an embedding file)") from None
    return _read_csv(text, p)


def write_json_document(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_result_document(path) -> dict:
    """Load and validate a selection result document.

    Unknown fields are rejected; error documents only need the error payload.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: unreadable result document ({exc})") from None
    if not isinstance(doc, dict) or doc.get("schema") != RESULT_SCHEMA:
        raise InputError(f"{path}: unexpected document schema {doc.get('schema')!r}")
    fields = set(doc)
    if "error" in fields:
        unknown = fields - ERROR_FIELDS
        if unknown:
            raise InputError(f"{path}: unknown fields {sorted(unknown)}")
        return doc
    unknown = fields - RESULT_FIELDS
    if unknown:
        raise InputError(f"{path}: unknown fields {sorted(unknown)}")
    missing = RESULT_FIELDS - fields
    if missing:
        raise InputError(f"{path}: missing fields {sorted(missing)}")
    return doc
