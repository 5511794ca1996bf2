"""On-disk cache of Dirac eigendecompositions, one file per ``(n, convention)``.

File layout (little endian): header ``magic "DPL1" | n u32 | dim u32 |
convention hash 16 ascii bytes | sha256(payload) 32 bytes`` followed by the
eigenvalues (float64) and the eigenvectors (complex128, row-major).
"""
from __future__ import annotations

import hashlib
import logging
import os
import struct
import tempfile
import threading
from pathlib import Path

import numpy as np

from .fuzzy_torus import CONVENTION_HASH, FuzzyTorusTriple, dirac_fuzzy
from .matrix_core import EigenDecomposition, decomposition_cache, eigh

log = logging.getLogger(__name__)

MAGIC = b"DPL1"
HEADER = struct.Struct("<4sII16s32s")
ENV_VAR = "FUZZYSPEC_CACHE_DIR"


class CacheCorruptError(ValueError):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "fuzzyspec"


def encode(n: int, dec: EigenDecomposition, convention: str = CONVENTION_HASH) -> bytes:
    vals = np.ascontiguousarray(dec.eigenvalues, dtype="<f8").tobytes()
    vecs = np.ascontiguousarray(dec.eigenvectors, dtype="<c16").tobytes()
    payload = vals + vecs
    head = HEADER.pack(MAGIC, n, dec.dim, convention.encode("ascii")[:16].ljust(16, b"\0"), hashlib.sha256(payload).digest())
    return head + payload


def decode(blob: bytes, n: int | None = None, convention: str = CONVENTION_HASH) -> EigenDecomposition:
    if len(blob) < HEADER.size:
        raise CacheCorruptError("truncated header")
    magic, n_file, dim, conv, digest = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CacheCorruptError(f"bad magic {magic!r}")
    if n is not None and n_file != n:
        raise CacheCorruptError(f"file holds n={n_file}, expected {n}")
    if conv.rstrip(b"\0").decode("ascii", "replace") != convention[:16]:
        raise CacheCorruptError("convention hash mismatch")
    payload = blob[HEADER.size :]
    if len(payload) != dim * 8 + dim * dim * 16:
        raise CacheCorruptError("payload size mismatch")
    if hashlib.sha256(payload).digest() != digest:
        raise CacheCorruptError("checksum mismatch")
    vals = np.frombuffer(payload[: dim * 8], dtype="<f8").astype(float)
    vecs = np.frombuffer(payload[dim * 8 :], dtype="<c16").reshape(dim, dim).astype(np.complex128)
    return EigenDecomposition(vals, vecs)


class EigenCache:
    """Concurrent readers, single writer per file via atomic rename."""

    def __init__(self, directory: str | Path | None = None, enabled: bool = True):
        self.directory = Path(directory) if directory else default_cache_dir()
        self.enabled = enabled
        self._lock = threading.Lock()
        self._writing: dict[int, threading.Lock] = {}

    def path(self, n: int) -> Path:
        return self.directory / f"dirac_n{n}_{CONVENTION_HASH}.dpl"

    def load(self, n: int) -> EigenDecomposition | None:
        if not self.enabled:
            return None
        p = self.path(n)
        if not p.exists():
            return None
        try:
            return decode(p.read_bytes(), n)
        except CacheCorruptError as exc:
            log.warning("cache file %s is corrupt (%s); rebuilding", p, exc)
            return None

    def store(self, n: int, dec: EigenDecomposition) -> None:
        if not self.enabled:
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=f".n{n}-", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(encode(n, dec))
            os.replace(tmp, self.path(n))
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise

    def decomposition(self, n: int) -> tuple[FuzzyTorusTriple, EigenDecomposition, bool]:
        """Triple, its eigendecomposition and whether it came from disk."""
        triple = dirac_fuzzy(n)
        with self._lock:
            lock = self._writing.setdefault(n, threading.Lock())
        with lock:
            dec = self.load(n)
            hit = dec is not None
            if dec is None:
                dec = eigh(triple.dirac)
                self.store(n, dec)
        decomposition_cache.put(triple.dirac, dec)
        return triple, dec, hit
