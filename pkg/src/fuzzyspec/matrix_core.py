"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; nothing here
mutates its inputs.
"""
from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass

import numpy as np
import scipy.linalg

EIG_RESIDUAL_TOL = 1e-9
RANK_RTOL = 1e-8


class NotHermitianError(ValueError):
    pass


class EigenSolverError(RuntimeError):
    pass


def as_matrix(m) -> np.ndarray:
    """Validate a square, finite matrix and return it as complex128."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise ValueError("empty matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has NaN or Inf entries")
    return a


def hermiticity_tol(m: np.ndarray) -> float:
    return 1e-10 * (1.0 + float(np.max(np.abs(m))))


def is_hermitian(m, tol: float | None = None) -> bool:
    a = as_matrix(m)
    if tol is None:
        tol = hermiticity_tol(a)
    return float(np.max(np.abs(a - a.conj().T))) <= tol


def require_hermitian(m) -> np.ndarray:
    a = as_matrix(m)
    if not is_hermitian(a):
        err = float(np.max(np.abs(a - a.conj().T)))
        raise NotHermitianError(f"matrix is not Hermitian (max |M - M^H| = {err:.3e})")
    return a


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def commutator(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def operator_norm(m) -> float:
    """Largest singular value."""
    a = np.asarray(m, dtype=np.complex128)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues with the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply(self, values) -> np.ndarray:
        """Return ``V diag(values) V^H``."""
        v = self.eigenvectors
        return (v * np.asarray(values)) @ v.conj().T

    def residuals(self, m: np.ndarray) -> np.ndarray:
        v = self.eigenvectors
        return np.linalg.norm(m @ v - v * self.eigenvalues, axis=0)


def eigh(m, check: bool = True) -> EigenDecomposition:
    """Hermitian eigendecomposition (LAPACK ``heevr``, relatively robust representations).

    Raises :class:`NotHermitianError` for non-Hermitian input and
    :class:`EigenSolverError` when LAPACK fails to converge or the residual
    check ``|M v_j - l_j v_j| <= 1e-9 |M|`` does not hold.
    """
    a = require_hermitian(m)
    # symmetrize so roundoff in the lower triangle cannot leak into the result
    a = 0.5 * (a + a.conj().T)
    try:
        w, v = scipy.linalg.eigh(a, driver="evr", check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenSolverError(f"eigensolver did not converge for dim {a.shape[0]}: {exc}") from exc
    dec = EigenDecomposition(w, v)
    if check:
        # for Hermitian input max|l_j| is the operator norm once the residuals are small
        scale = max(float(np.max(np.abs(w))) if w.size else 0.0, 1.0)
        res = dec.residuals(a)
        worst = int(np.argmax(res))
        if res[worst] > EIG_RESIDUAL_TOL * scale:
            raise EigenSolverError(
                f"eigenpair {worst} residual {res[worst]:.3e} exceeds {EIG_RESIDUAL_TOL * scale:.3e}"
            )
    return dec


class _DecompositionCache:
    # keyed by a digest of the matrix bytes; each key is populated at most once
    def __init__(self, maxsize: int = 32):
        self.maxsize = maxsize
        self._data: dict[str, EigenDecomposition] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    @staticmethod
    def key(a: np.ndarray) -> str:
        h = hashlib.sha256()
        h.update(str(a.shape).encode())
        h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()

    def get(self, m) -> EigenDecomposition:
        a = as_matrix(m)
        k = self.key(a)
        with self._guard:
            hit = self._data.get(k)
            if hit is not None:
                return hit
            lock = self._locks.setdefault(k, threading.Lock())
        with lock:
            with self._guard:
                hit = self._data.get(k)
            if hit is not None:
                return hit
            dec = eigh(a)
            with self._guard:
                if len(self._data) >= self.maxsize:
                    self._data.pop(next(iter(self._data)))
                self._data[k] = dec
                self._locks.pop(k, None)
            return dec

    def put(self, m, dec: EigenDecomposition) -> None:
        k = self.key(as_matrix(m))
        with self._guard:
            self._data[k] = dec

    def clear(self) -> None:
        with self._guard:
            self._data.clear()


decomposition_cache = _DecompositionCache()


def cached_eigh(m) -> EigenDecomposition:
    """:func:`eigh` memoized on the matrix contents."""
    return decomposition_cache.get(m)


def numerical_rank(vectors, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(np.atleast_2d(np.asarray(vectors, dtype=np.complex128)), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def gram_independent(vectors, alpha: float) -> bool:
    """Sufficient test for linear independence through the Gram matrix.

    True when every squared norm is at least ``alpha`` and every off-diagonal
    Gram entry is strictly below ``alpha / d``; the family is then linearly
    independent because the normalized Gram matrix is a strictly diagonally
    dominated perturbation of the identity.
    """
    vecs = [np.asarray(v, dtype=np.complex128).ravel() for v in vectors]
    if not vecs:
        raise ValueError("gram_independent needs at least one vector")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if len({v.shape for v in vecs}) != 1:
        raise ValueError("vectors have different dimensions")
    x = np.stack(vecs)
    d = len(vecs)
    gram = x.conj() @ x.T
    if np.any(gram.diagonal().real < alpha):
        return False
    off = np.abs(gram - np.diag(gram.diagonal()))
    return bool(np.all(off < alpha / d))
