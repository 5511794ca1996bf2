"""Lipschitz seminorm and Connes (Monge-Kantorovich) distance on fuzzy-torus states.

For ``a`` acting by left multiplication, ``[D_n, L_a (x) I_4]`` equals
``c sum_i L_{[X_i, a]} (x) gamma_i``; since ``L_Y`` is ``I_n (x) Y`` its norm is
that of the ``4n x 4n`` matrix ``c sum_i [X_i, a] (x) gamma_i``.

Traceless Hermitian matrices are parametrized by real coordinates in an
orthonormal (Frobenius) generalized Gell-Mann basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fuzzy_torus import FuzzyTorusTriple
from .matrix_core import as_matrix, is_hermitian, require_hermitian

NULL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DensityState:
    rho: np.ndarray

    def __post_init__(self):
        rho = as_matrix(self.rho)
        if not is_hermitian(rho, 1e-10):
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(rho).real - 1) > 1e-10:
            raise ValueError(f"density matrix trace {np.trace(rho).real} != 1")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -1e-10:
            raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "rho", rho)

    @property
    def n(self) -> int:
        return self.rho.shape[0]

    def __call__(self, a) -> complex:
        return complex(np.trace(self.rho @ np.asarray(a)))

    @classmethod
    def vector(cls, v) -> "DensityState":
        v = np.asarray(v, dtype=np.complex128).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def basis(cls, n: int, i: int) -> "DensityState":
        e = np.zeros(n, dtype=np.complex128)
        e[i] = 1
        return cls.vector(e)

    @classmethod
    def mixed(cls, n: int) -> "DensityState":
        return cls(np.eye(n, dtype=np.complex128) / n)


def traceless_hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis of traceless Hermitian ``n x n`` matrices, shape ``(n^2-1, n, n)``."""
    out = []
    for j in range(n):
        for k in range(j + 1, n):
            s = np.zeros((n, n), dtype=np.complex128)
            s[j, k] = s[k, j] = 1 / math.sqrt(2)
            out.append(s)
            a = np.zeros((n, n), dtype=np.complex128)
            a[j, k] = -1j / math.sqrt(2)
            a[k, j] = 1j / math.sqrt(2)
            out.append(a)
    for l in range(1, n):
        diag = np.zeros(n)
        diag[:l] = 1
        diag[l] = -l
        out.append(np.diag(diag / math.sqrt(l * (l + 1))).astype(np.complex128))
    return np.array(out).reshape(-1, n, n)


def commutator_operator(triple: FuzzyTorusTriple, a) -> np.ndarray:
    """``c sum_i [X_i, a] (x) gamma_i`` (the reduced form of ``[D, L_a (x) I]``)."""
    a = as_matrix(a)
    if a.shape[0] != triple.n:
        raise ValueError(f"element of size {a.shape[0]} does not act on the n={triple.n} triple")
    return triple.prefactor * sum(
        np.kron(x @ a - a @ x, g) for x, g in zip(triple.generators, triple.gammas)
    )


def lip_seminorm(triple: FuzzyTorusTriple, a) -> float:
    a = require_hermitian(a)
    m = commutator_operator(triple, a)
    # m is anti-Hermitian for Hermitian a
    return float(np.max(np.abs(np.linalg.eigvalsh(1j * m))))


@dataclass
class LipMap:
    """Linear map ``theta -> i [D, a(theta)]`` precomputed on the Gell-Mann basis."""

    triple: FuzzyTorusTriple
    basis: np.ndarray
    tensors: np.ndarray

    @classmethod
    def build(cls, triple: FuzzyTorusTriple) -> "LipMap":
        basis = traceless_hermitian_basis(triple.n)
        tensors = np.array([1j * commutator_operator(triple, b) for b in basis])
        return cls(triple, basis, tensors)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def element(self, theta) -> np.ndarray:
        return np.tensordot(theta, self.basis, axes=1)

    def coords(self, a) -> np.ndarray:
        return np.real(np.einsum("kij,ji->k", self.basis, np.asarray(a)))

    def value_and_subgradient(self, theta) -> tuple[float, np.ndarray]:
        h = np.tensordot(theta, self.tensors, axes=1)
        h = 0.5 * (h + h.conj().T)
        w, v = np.linalg.eigh(h)
        top = int(np.argmax(np.abs(w)))
        vec = v[:, top]
        sign = 1.0 if w[top] >= 0 else -1.0
        grad = sign * np.real(np.einsum("i,kij,j->k", vec.conj(), self.tensors, vec))
        return float(abs(w[top])), grad

    def lip(self, theta) -> float:
        h = np.tensordot(theta, self.tensors, axes=1)
        return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (h + h.conj().T)))))

    def smallest_gain(self) -> tuple[float, np.ndarray]:
        """Smallest Frobenius gain of the map and the direction attaining it."""
        mat = self.tensors.reshape(self.dim, -1)
        real = np.concatenate([mat.real, mat.imag], axis=1)
        _, s, vt = np.linalg.svd(real, full_matrices=True)
        s_full = np.zeros(self.dim)
        s_full[: s.size] = s
        return float(s_full[-1]), vt[-1] if s.size == self.dim else vt[s.size]


@dataclass
class MKConfig:
    restarts: int = 8
    max_iter: int = 1500
    step: float = 0.5
    seed: int = 0
    null_tol: float = NULL_TOL


@dataclass
class MKResult:
    lower_bound: float
    estimate: float
    witness: np.ndarray
    iterations: int
    converged: bool
    unbounded: bool = False
    history: list = field(default_factory=list)

    @property
    def flags(self) -> dict:
        return {"converged": self.converged, "unbounded-direction-detected": self.unbounded}


def _objective_coeffs(lm: LipMap, phi: DensityState, psi: DensityState) -> np.ndarray:
    diff = phi.rho - psi.rho
    return np.real(np.einsum("ij,kji->k", diff, lm.basis))


def _ascend(lm: LipMap, ell: np.ndarray, theta: np.ndarray, cfg: MKConfig) -> tuple[float, np.ndarray, int, bool]:
    theta = theta / np.linalg.norm(theta)
    best_val, best = -math.inf, theta
    stall = 0
    it = 0
    for it in range(1, cfg.max_iter + 1):
        lip, g_lip = lm.value_and_subgradient(theta)
        num = float(ell @ theta)
        val = num / lip
        if val > best_val + 1e-13 * max(1.0, abs(val)):
            best_val, best = val, theta.copy()
            stall = 0
        else:
            stall += 1
            if stall > 200:
                return best_val, best, it, True
        grad = (ell * lip - num * g_lip) / (lip * lip)
        # project onto the tangent space of the unit sphere
        grad = grad - (grad @ theta) * theta
        gn = np.linalg.norm(grad)
        if gn < 1e-14:
            return best_val, best, it, True
        theta = theta + cfg.step / math.sqrt(it) * grad / gn
        theta /= np.linalg.norm(theta)
    return best_val, best, it, False


def mk_distance(
    triple: FuzzyTorusTriple,
    phi: DensityState,
    psi: DensityState,
    config: MKConfig | None = None,
    lipmap: LipMap | None = None,
) -> MKResult:
    """Lower-bound the Connes distance ``sup{|phi(a) - psi(a)| : Lip(a) <= 1}``.

    Maximizes ``Tr((rho_phi - rho_psi) a) / Lip(a)`` over traceless Hermitian
    ``a`` on the unit Frobenius sphere by normalized subgradient ascent from
    random restarts (plus one start along the state difference).  The
    returned witness has ``Lip <= 1`` and certifies ``lower_bound``.
    """
    cfg = config or MKConfig()
    for s in (phi, psi):
        if s.n != triple.n:
            raise ValueError(f"state of size {s.n} on an n={triple.n} triple")
    n = triple.n
    zero = np.zeros((n, n), dtype=np.complex128)
    if np.array_equal(phi.rho, psi.rho):
        return MKResult(0.0, 0.0, zero, 0, True)
    lm = lipmap or LipMap.build(triple)
    ell = _objective_coeffs(lm, phi, psi)
    if np.linalg.norm(ell) <= 1e-15:
        return MKResult(0.0, 0.0, zero, 0, True)

    gain, direction = lm.smallest_gain()
    if gain <= cfg.null_tol and abs(ell @ direction) > cfg.null_tol:
        return MKResult(math.inf, math.inf, lm.element(direction), 0, True, unbounded=True)

    rng = np.random.default_rng(cfg.seed)
    starts = [ell] + [rng.standard_normal(lm.dim) for _ in range(cfg.restarts)]
    best_val, best_theta, total_it = -math.inf, None, 0
    history = []
    for start in starts:
        val, theta, its, conv = _ascend(lm, ell, start, cfg)
        if val < 0:
            val, theta = -val, -theta
        history.append((val, conv))
        total_it += its
        if val > best_val:
            best_val, best_theta = val, theta
    # converged: some restart that stalled reached the best value
    agree = 1e-6 * max(best_val, 1e-300)
    converged = any(conv and best_val - val <= agree for val, conv in history)
    lip = lm.lip(best_theta)
    witness = lm.element(best_theta / lip)
    witness = 0.5 * (witness + witness.conj().T)
    witness -= np.trace(witness) / n * np.eye(n)
    lower = abs(phi(witness) - psi(witness))
    return MKResult(lower, max(best_val, lower), witness, total_it, converged, history=[v for v, _ in history])


def mk_bruteforce_oracle(
    triple: FuzzyTorusTriple,
    phi: DensityState,
    psi: DensityState,
    samples: int = 20000,
    refine: int = 5,
    seed: int = 12345,
) -> float:
    """Random search over the Frobenius sphere followed by coordinate ascent.

    Restricted to ``n <= 3`` (at most 8 real parameters).  The result is a
    lower bound of the supremum by construction.
    """
    if triple.n > 3:
        raise ValueError("brute-force oracle is limited to n <= 3")
    if np.array_equal(phi.rho, psi.rho):
        return 0.0
    basis = traceless_hermitian_basis(triple.n)
    diff = phi.rho - psi.rho
    ell = np.real(np.einsum("ij,kji->k", diff, basis))

    def batch_ratio(thetas):
        a = np.einsum("sk,kij->sij", thetas, basis)
        comm = 0
        for x, g in zip(triple.generators, triple.gammas):
            c = np.einsum("ij,sjk->sik", x, a) - np.einsum("sij,jk->sik", a, x)
            comm = comm + np.einsum("sij,ab->siajb", c, g)
        s_, n_ = a.shape[0], triple.n
        h = 1j * triple.prefactor * comm.reshape(s_, 4 * n_, 4 * n_)
        lip = np.max(np.abs(np.linalg.eigvalsh(h)), axis=1)
        return np.abs(thetas @ ell) / np.where(lip > 0, lip, np.inf)

    def ratio(theta):
        return float(batch_ratio(theta[None, :])[0])

    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((samples, len(basis)))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    vals = np.concatenate([batch_ratio(pts[i : i + 2048]) for i in range(0, samples, 2048)])
    order = np.argsort(vals)[::-1][:refine]
    best = float(vals[order[0]]) if len(order) else 0.0
    for i in order:
        theta = pts[i].copy()
        cur = vals[i]
        step = 0.1
        while step > 1e-7:
            improved = False
            for c in range(len(theta)):
                for sgn in (1.0, -1.0):
                    trial = theta.copy()
                    trial[c] += sgn * step
                    trial /= np.linalg.norm(trial)
                    v = ratio(trial)
                    if v > cur:
                        theta, cur, improved = trial, v, True
            if not improved:
                step /= 2
        best = max(best, cur)
    return float(best)
