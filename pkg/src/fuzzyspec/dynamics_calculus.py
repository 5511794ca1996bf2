"""Unitary group, graph norm and bounded functional calculus of a Dirac matrix.

Two routes compute ``f(D)``: directly from the eigendecomposition, and by
Fourier inversion ``f(D) = int fhat(t) exp(itD) dt`` truncated to ``[-M, M]``
and integrated with composite Simpson.  The Fourier transform is normalized
so that ``f(x) = int fhat(t) exp(itx) dt``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from .matrix_core import as_matrix, cached_eigh, operator_norm, require_hermitian

# Cramer's inequality: |H_k(x)| exp(-x^2/2) <= CRAMER * sqrt(2^k k!)
CRAMER = 1.086435
# physicists' Hermite polynomial coefficients, lowest degree first
_HERMITE = (
    (1.0,),
    (0.0, 2.0),
    (-2.0, 0.0, 4.0),
    (0.0, -12.0, 0.0, 8.0),
    (12.0, 0.0, -48.0, 0.0, 16.0),
)


class TailBoundError(ValueError):
    pass


@dataclass(frozen=True)
class FourierData:
    """Fourier density of a spectral function plus the bounds needed to certify quadrature.

    ``tail_mass(M)`` bounds ``int_{|x|>M} |fhat(x)| dx``; ``derivative_bound(k, a, b)``
    bounds ``sup_{[a,b]} |fhat^(k)|`` for ``k <= 4``.
    """

    density: Callable[[np.ndarray], np.ndarray]
    tail_mass: Callable[[float], float]
    derivative_bound: Callable[[int, float, float], float]
    cutoff_hint: float = 1.0


@dataclass(frozen=True)
class SpectralFunction:
    kind: str
    params: dict = field(default_factory=dict)
    fourier: FourierData | None = None
    _fn: Callable | None = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        kind, p = self.kind, self.params
        if kind == "gaussian":
            return np.exp(-((x / p["width"]) ** 2))
        if kind == "bump":
            u = (x - p["center"]) / p["radius"]
            out = np.zeros_like(x)
            inside = np.abs(u) < 1
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
            return out
        if kind == "resolvent":
            return 1.0 / (x - p["lam"])
        if kind in ("tabulated", "callable"):
            return self._fn(x)
        raise ValueError(f"unknown spectral function kind {kind!r}")

    @property
    def is_real(self) -> bool:
        return self.kind in ("gaussian", "bump") or bool(self.params.get("real", False))

    @classmethod
    def gaussian(cls, width: float = 1.0) -> "SpectralFunction":
        """``exp(-(x/width)^2)`` with ``fhat(t) = width/(2 sqrt(pi)) exp(-(width t)^2/4)``."""
        if width <= 0:
            raise ValueError("width must be positive")
        return cls("gaussian", {"width": float(width)}, gaussian_fourier(width))

    @classmethod
    def bump(cls, center: float, radius: float) -> "SpectralFunction":
        """Smooth bump equal to 1 at ``center`` and supported in ``(center-radius, center+radius)``."""
        if radius <= 0:
            raise ValueError("radius must be positive")
        return cls("bump", {"center": float(center), "radius": float(radius)})

    @classmethod
    def resolvent(cls, lam: complex) -> "SpectralFunction":
        lam = complex(lam)
        if lam.imag == 0:
            raise ValueError("resolvent needs a nonreal point")
        return cls("resolvent", {"lam": lam})

    @classmethod
    def from_callable(cls, fn: Callable, real: bool = True, fourier: FourierData | None = None) -> "SpectralFunction":
        """Wrap a vectorized ``fn``; ``real`` promises real values on real input."""

        def wrapped(t):
            return np.broadcast_to(fn(t), np.shape(t)).copy()

        return cls("callable", {"real": bool(real)}, fourier, wrapped)

    @classmethod
    def tabulated(cls, x, y, fourier: FourierData | None = None) -> "SpectralFunction":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y)
        if x.ndim != 1 or x.shape != y.shape or np.any(np.diff(x) <= 0):
            raise ValueError("tabulated samples need strictly increasing x and matching y")
        real = not np.iscomplexobj(y)

        def fn(t):
            if real:
                return np.interp(t, x, y, left=0.0, right=0.0)
            return np.interp(t, x, y.real, left=0.0, right=0.0) + 1j * np.interp(
                t, x, y.imag, left=0.0, right=0.0
            )

        return cls("tabulated", {"x": x.tolist(), "y": y.tolist(), "real": real}, fourier, fn)

    def check_inversion(self, probes, tol: float = 1e-8) -> float:
        """Worst ``|f(p) - int fhat(t) exp(ipt) dt|`` over ``probes`` by adaptive quadrature."""
        if self.fourier is None:
            raise ValueError("no Fourier data attached")
        dens = self.fourier.density
        worst = 0.0
        for p in np.atleast_1d(probes):
            re = integrate.quad(lambda t: (dens(np.array(t)) * np.exp(1j * p * t)).real, -np.inf, np.inf, epsabs=tol / 10)[0]
            im = integrate.quad(lambda t: (dens(np.array(t)) * np.exp(1j * p * t)).imag, -np.inf, np.inf, epsabs=tol / 10)[0]
            worst = max(worst, abs(complex(self(np.array(p))) - complex(re, im)))
        return worst


def _hermite_abs_max(k: int, lo: float, hi: float) -> float:
    # bound |H_k| on |x| in [lo, hi] by the sum of |coeff| x^j at hi
    return sum(abs(c) * hi**j for j, c in enumerate(_HERMITE[k]))


def gaussian_fourier(width: float) -> FourierData:
    amp = width / (2 * math.sqrt(math.pi))
    b = width * width / 4.0
    sb = math.sqrt(b)

    def density(t):
        return amp * np.exp(-b * np.asarray(t, dtype=float) ** 2)

    def tail_mass(m):
        return float(special.erfc(width * m / 2.0))

    def derivative_bound(k, a, c):
        # fhat^(k)(t) = amp (-sqrt b)^k H_k(sqrt b t) exp(-b t^2)
        lo = 0.0 if a <= 0 <= c else min(abs(a), abs(c))
        hi = max(abs(a), abs(c))
        x_lo, x_hi = sb * lo, sb * hi
        poly = _hermite_abs_max(k, x_lo, x_hi) * math.exp(-x_lo * x_lo)
        global_ = CRAMER * math.sqrt(2.0**k * math.factorial(k))
        return amp * sb**k * min(poly, global_)

    return FourierData(density, tail_mass, derivative_bound, cutoff_hint=2.0 / width)


def envelope_fourier(density: Callable, c: float, derivative_bounds) -> FourierData:
    """Fourier data for a user-supplied density dominated by ``c/(1+x^2)`` in the tails.

    ``derivative_bounds`` is a sequence of global bounds on ``|fhat^(k)|``,
    ``k = 0..4``.
    """
    bounds = tuple(float(v) for v in derivative_bounds)
    if len(bounds) != 5:
        raise ValueError("need derivative bounds for k = 0..4")
    return FourierData(
        density=density,
        tail_mass=lambda m: 2.0 * c * (math.pi / 2 - math.atan(m)),
        derivative_bound=lambda k, a, b: bounds[k],
    )


def unitary_group(d, t: float) -> np.ndarray:
    """``exp(itD)`` from the cached eigendecomposition."""
    dec = cached_eigh(d)
    return dec.apply(np.exp(1j * t * dec.eigenvalues))


def graph_norm(d, xi) -> float:
    d = as_matrix(d)
    xi = np.asarray(xi, dtype=np.complex128).ravel()
    if xi.shape[0] != d.shape[0]:
        raise ValueError(f"vector of length {xi.shape[0]} does not fit a {d.shape[0]}-dim operator")
    return float(np.linalg.norm(xi) + np.linalg.norm(d @ xi))


@dataclass(frozen=True)
class GraphNormedVector:
    vector: np.ndarray
    graph_norm: float

    @classmethod
    def of(cls, d, xi) -> "GraphNormedVector":
        xi = np.asarray(xi, dtype=np.complex128).ravel()
        return cls(xi, graph_norm(d, xi))

    def normalized(self) -> "GraphNormedVector":
        return GraphNormedVector(self.vector / self.graph_norm, 1.0)


def apply_function_eig(d, f: SpectralFunction) -> np.ndarray:
    d = require_hermitian(d)
    if f.kind == "resolvent" and f.params["lam"].imag == 0:
        raise ValueError("resolvent needs a nonreal point")
    dec = cached_eigh(d)
    out = dec.apply(f(dec.eigenvalues))
    if f.is_real:
        out = 0.5 * (out + out.conj().T)
    return out


@dataclass
class FourierResult:
    matrix: np.ndarray
    eps: float
    cutoff: float
    tail_bound: float
    quadrature_bound: float
    nodes: int


def _choose_cutoff(fd: FourierData, budget: float) -> float:
    m = max(fd.cutoff_hint, 1.0)
    while fd.tail_mass(m) > budget:
        m *= 1.25
        if m > 1e8:
            raise TailBoundError(f"tail mass stays above {budget:.3e} up to cutoff 1e8")
    return m


def _simpson_panels(fd: FourierData, rho: float, cutoff: float, budget: float, min_width: float):
    """Split ``[-M, M]`` into Simpson panels whose certified error sums to at most ``budget``.

    On a panel of width ``w`` the composite Simpson error for the operator-valued
    integrand ``fhat(t) exp(itD)`` is at most ``w^5/2880 * G4`` with
    ``G4 = sum_k C(4,k) sup|fhat^(k)| rho^(4-k)`` and ``rho = |D|``.
    """
    density = budget / (2 * cutoff)
    panels = []
    stack = [(-cutoff, cutoff)]
    while stack:
        a, b = stack.pop()
        w = b - a
        g4 = sum(math.comb(4, k) * fd.derivative_bound(k, a, b) * rho ** (4 - k) for k in range(5))
        err = w**5 / 2880.0 * g4
        if err <= density * w or w <= min_width:
            panels.append((a, b, err))
        else:
            mid = 0.5 * (a + b)
            stack.append((mid, b))
            stack.append((a, mid))
    panels.sort()
    return panels


def apply_function_fourier(d, f: SpectralFunction, eps: float = 1e-6) -> FourierResult:
    """``f(D)`` through the truncated Fourier inversion with certified error ``<= eps``.

    The cutoff ``M`` makes the tail mass of ``fhat`` at most ``eps/2``; the
    Simpson panels are refined until their error bound sums to ``eps/2``.
    """
    if f.fourier is None:
        raise ValueError(f"{f.kind} function has no Fourier data")
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = require_hermitian(d)
    fd = f.fourier
    dec = cached_eigh(d)
    lam = dec.eigenvalues
    rho = float(np.max(np.abs(lam))) if lam.size else 0.0
    cutoff = _choose_cutoff(fd, eps / 2)
    tail = fd.tail_mass(cutoff)
    panels = _simpson_panels(fd, rho, cutoff, eps / 2, min_width=cutoff * 1e-7)
    quad_bound = sum(p[2] for p in panels)
    if quad_bound > eps / 2 * (1 + 1e-12):
        raise TailBoundError(f"quadrature bound {quad_bound:.3e} exceeds eps/2")

    a = np.array([p[0] for p in panels])
    b = np.array([p[1] for p in panels])
    mid = 0.5 * (a + b)
    w = b - a
    nodes = np.concatenate([a, mid, b])
    weights = np.concatenate([w / 6, 4 * w / 6, w / 6])
    coeff = weights * fd.density(nodes)
    # scalar integral per eigenvalue: sum_i c_i exp(i t_i lam)
    acc = np.zeros(lam.shape, dtype=np.complex128)
    chunk = max(1, 4_000_000 // max(1, lam.size))
    for s in range(0, nodes.size, chunk):
        acc += np.exp(1j * np.outer(lam, nodes[s : s + chunk])) @ coeff[s : s + chunk]
    out = dec.apply(acc)
    if f.is_real:
        out = 0.5 * (out + out.conj().T)
    return FourierResult(out, eps, cutoff, tail, quad_bound, int(nodes.size))


def bohr_combination(d, frequencies, coefficients) -> np.ndarray:
    """``sum_x v(x) exp(ixD)`` for a finite almost-periodic function."""
    out = np.zeros_like(as_matrix(d))
    for x, v in zip(frequencies, coefficients):
        out += v * unitary_group(d, x)
    return out


def spectral_action(d, f: SpectralFunction, scale: float = 1.0) -> float:
    """``Tr f(D/scale)`` summed over eigenvalues with multiplicity."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    lam = cached_eigh(d).eigenvalues
    return float(np.sum(np.real(f(lam / scale))))


def resolvent(d, lam: complex) -> np.ndarray:
    """``(D - lam)^{-1}`` for nonreal ``lam``."""
    lam = complex(lam)
    if lam.imag == 0:
        raise ValueError("resolvent needs Im(lam) != 0")
    return apply_function_eig(d, SpectralFunction.resolvent(lam))


@dataclass
class IsoIsoReport:
    eps: float
    grid: int
    definition_holds: bool
    worst_violation: float
    worst_at: tuple
    max_deviation: float
    lemma_holds: bool | None


def iso_iso_check(s1, s2, eps: float, grid: int = 200) -> IsoIsoReport:
    """Check the eps-iso-iso inequality for two maps of ``[0, inf)`` on a grid of ``[0, 1/eps]``.

    For all grid triples and both orderings ``(j, k)`` the quantity
    ``| |s_j(x)+s_j(y)-z| - |x+y-s_k(z)| |`` must stay below ``eps``.  When it
    does, the consequence ``|s_j(t) - t| < eps`` is checked as well.
    ``s1``/``s2`` are callables or arrays sampled on the grid.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    t = np.linspace(0.0, 1.0 / eps, grid)
    maps = [np.asarray(s(t) if callable(s) else s, dtype=float) for s in (s1, s2)]
    for s in maps:
        if s.shape != t.shape:
            raise ValueError(f"tabulated map needs {grid} samples")
    worst, at = -math.inf, ()
    for j, k in ((0, 1), (1, 0)):
        sj, sk = maps[j], maps[k]
        # axes: x, y, z
        left = np.abs(sj[:, None, None] + sj[None, :, None] - t[None, None, :])
        right = np.abs(t[:, None, None] + t[None, :, None] - sk[None, None, :])
        gap = np.abs(left - right)
        idx = np.unravel_index(int(np.argmax(gap)), gap.shape)
        if gap[idx] > worst:
            worst = float(gap[idx])
            at = (float(t[idx[0]]), float(t[idx[1]]), float(t[idx[2]]), j + 1, k + 1)
    holds = worst < eps
    dev = float(max(np.max(np.abs(s - t)) for s in maps))
    return IsoIsoReport(eps, grid, holds, worst, at, dev, (dev < eps) if holds else None)


def group_isometry_check(d, t: float, xi, rtol: float = 1e-9) -> bool:
    """Whether ``exp(itD)`` preserves the graph norm of ``xi`` to relative ``rtol``."""
    d = as_matrix(d)
    before = graph_norm(d, xi)
    after = graph_norm(d, unitary_group(d, t) @ np.asarray(xi, dtype=np.complex128).ravel())
    return abs(after - before) <= rtol * max(before, np.finfo(float).tiny)


def displacement(d, xi, s: float, t: float) -> tuple[float, float]:
    """``|exp(isD) xi - exp(itD) xi|`` for ``xi`` rescaled to graph norm 1, and the bound ``|s - t|``."""
    v = GraphNormedVector.of(d, xi).normalized().vector
    moved = unitary_group(d, s) @ v - unitary_group(d, t) @ v
    return float(np.linalg.norm(moved)), abs(s - t)


def route_delta(d, f: SpectralFunction, eps: float) -> tuple[float, FourierResult]:
    res = apply_function_fourier(d, f, eps)
    return operator_norm(apply_function_eig(d, f) - res.matrix), res
