"""Ensembles of matrix tuples and the HMT1 binary format.

HMT1 layout: magic ``b"HMT1"``, little-endian u32 ``n, N, count``, then
``count*n*N*N`` complex128 values (row-major, interleaved re/im).  Metadata
lives in a JSON sidecar ``<path>.json``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict

import numpy as np

from .evaluate import HERM_TOL, herm, hermitian_defect

MAGIC = b"HMT1"
_HEADER = struct.Struct("<4sIII")


@dataclass
class Ensemble:
    samples: np.ndarray  # (count, n, N, N) complex
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        S = np.asarray(self.samples, dtype=np.complex128)
        if S.ndim != 4 or S.shape[-1] != S.shape[-2]:
            raise ValueError(f"ensemble array must be (count, n, N, N), got {S.shape}")
        self.samples = S

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def N(self) -> int:
        return self.samples.shape[2]

    def __len__(self) -> int:
        return self.count

    def spectrum(self, i: int = 0) -> np.ndarray:
        """Pooled eigenvalues of the i-th matrix across samples."""
        return np.linalg.eigvalsh(self.samples[:, i]).ravel()

    def moments(self, k: int, i: int = 0) -> np.ndarray:
        """Per-sample τ̂(X_i^k)."""
        ev = np.linalg.eigvalsh(self.samples[:, i])
        return np.mean(ev**k, axis=-1)

    def save(self, path) -> None:
        save_hmt1(self, path)

    @classmethod
    def load(cls, path) -> "Ensemble":
        return load_hmt1(path)


def save_hmt1(ens: Ensemble, path) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, ens.n, ens.N, ens.count))
        fh.write(np.ascontiguousarray(ens.samples, dtype="<c16").tobytes())
    with open(str(path) + ".json", "w") as fh:
        json.dump(ens.meta, fh, indent=2, sort_keys=True, default=str)


def load_hmt1(path) -> Ensemble:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("file too short for an HMT1 header")
    magic, n, N, count = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    expect = _HEADER.size + 16 * n * N * N * count
    if len(raw) != expect:
        raise ValueError(f"payload size {len(raw)} does not match header ({expect})")
    data = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(count, n, N, N)
    if count and hermitian_defect(data) > HERM_TOL:
        raise ValueError("stored matrices are not Hermitian")
    meta_path = Path(str(path) + ".json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return Ensemble(herm(data.astype(np.complex128)), meta)
