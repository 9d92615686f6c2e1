"""Artifact writers and readers.

All writes go to a temporary file in the target directory and are renamed
into place, so a reader never observes a half-written artifact.  Floats in
CSV files use ``repr`` which round-trips exactly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import OamLinkError

__all__ = [
    "ArtifactIOError",
    "atomic_write_bytes",
    "atomic_write_text",
    "write_csv",
    "read_csv",
    "write_lens_dump",
    "read_lens_dump",
    "write_field_dump",
    "read_field_dump",
    "sha256_file",
    "write_manifest",
]


class ArtifactIOError(OamLinkError, OSError):
    """Reading or writing an artifact failed."""


def atomic_write_bytes(path, data: bytes) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise ArtifactIOError(f"cannot write {path}: {exc}") from exc
    return path


def atomic_write_text(path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return atomic_write_text(path, buf.getvalue())


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ArtifactIOError(f"cannot read {path}: {exc}") from exc
    return rows[0], rows[1:]


def _binary_dump(header: str, values: np.ndarray) -> bytes:
    return header.encode("ascii") + b"\n" + np.ascontiguousarray(values, dtype="<f8").tobytes()


def _split_dump(path) -> tuple[list[str], bytes]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ArtifactIOError(f"cannot read {path}: {exc}") from exc
    head, _, body = raw.partition(b"\n")
    return head.decode("ascii").split(), body


def write_lens_dump(path, samples: np.ndarray, pitch: float, quantity: str) -> Path:
    """``OAMLENS v1 <nx> <ny> <pitch_m> <quantity>`` then little-endian float64 rows."""
    if quantity not in ("phase_rad", "thickness_m"):
        raise ValueError(f"unknown lens quantity {quantity!r}")
    ny, nx = samples.shape
    header = f"OAMLENS v1 {nx} {ny} {pitch!r} {quantity}"
    return atomic_write_bytes(path, _binary_dump(header, samples))


def read_lens_dump(path) -> tuple[np.ndarray, float, str]:
    head, body = _split_dump(path)
    if head[:2] != ["OAMLENS", "v1"]:
        raise ArtifactIOError(f"{path} is not an OAMLENS v1 dump")
    nx, ny, pitch, quantity = int(head[2]), int(head[3]), float(head[4]), head[5]
    data = np.frombuffer(body, dtype="<f8").reshape(ny, nx)
    return data.astype(float), pitch, quantity


def write_field_dump(path, samples: np.ndarray, pitch: float, z: float, wavelength: float) -> Path:
    """``OAMFIELD v1 <nx> <ny> <pitch_m> <z_m> <lambda_m>`` then interleaved (re, im)."""
    ny, nx = samples.shape
    header = f"OAMFIELD v1 {nx} {ny} {pitch!r} {z!r} {wavelength!r}"
    inter = np.empty((ny, nx, 2))
    inter[..., 0] = samples.real
    inter[..., 1] = samples.imag
    return atomic_write_bytes(path, _binary_dump(header, inter))


def read_field_dump(path) -> tuple[np.ndarray, float, float, float]:
    head, body = _split_dump(path)
    if head[:2] != ["OAMFIELD", "v1"]:
        raise ArtifactIOError(f"{path} is not an OAMFIELD v1 dump")
    nx, ny = int(head[2]), int(head[3])
    pitch, z, lam = float(head[4]), float(head[5]), float(head[6])
    data = np.frombuffer(body, dtype="<f8").reshape(ny, nx, 2)
    return data[..., 0] + 1j * data[..., 1], pitch, z, lam


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, scenario_hash: str, seed: int, artifacts: Iterable, extra: dict | None = None) -> Path:
    """Record scenario hash, seed and a checksum per artifact in ``manifest.json``.

    Paths are stored relative to ``out_dir`` so manifests of two output
    directories compare equal when their contents do.
    """
    out_dir = Path(out_dir)
    entries = {}
    for p in sorted({Path(a) for a in artifacts}):
        entries[p.relative_to(out_dir).as_posix()] = sha256_file(p)
    doc = {"scenario_hash": scenario_hash, "seed": int(seed), "artifacts": entries}
    if extra:
        doc["metadata"] = extra
    return atomic_write_text(out_dir / "manifest.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
