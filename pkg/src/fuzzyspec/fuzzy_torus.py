"""Fuzzy-torus spectral triples built from clock and shift unitaries.

The Hilbert space ``M_n`` with inner product ``Tr(a^* b)`` is identified with
``C^{n^2}`` by column-major flattening, so left multiplication by ``X`` is
``I (x) X`` and right multiplication is ``X^T (x) I``.  Spinor indices are the
fastest-varying: the operator ``K (x) g`` on ``M_n (x) C^4`` is ``np.kron(K, g)``.
"""
from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .matrix_core import as_matrix

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)
_I2 = np.eye(2, dtype=np.complex128)

# gamma_k = sigma_1 (x) sigma_k for k = 1, 2, 3 and gamma_4 = sigma_3 (x) I;
# changing this changes D_n only up to unitary equivalence
GAMMA_CONVENTION = "g_k = s1 x s_k (k=1,2,3), g_4 = s3 x I; V e_k = e_{k+1}; column-major vec(a); spinor fastest"
CONVENTION_HASH = hashlib.sha256(GAMMA_CONVENTION.encode()).hexdigest()[:16]


def _check_size(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"matrix size must be a positive integer, got {n!r}")
    return int(n)


def clock(n: int) -> np.ndarray:
    n = _check_size(n)
    return np.diag(np.exp(2j * np.pi * np.arange(n) / n))


def shift(n: int) -> np.ndarray:
    """Cyclic shift ``V e_k = e_{k+1 mod n}``, i.e. ``V[k+1 mod n, k] = 1``.

    This orientation is the one for which ``U V = exp(2i pi/n) V U`` holds with
    the clock above.
    """
    n = _check_size(n)
    return np.roll(np.eye(n, dtype=np.complex128), 1, axis=0)


def gamma_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Four Hermitian 4x4 matrices with ``g_a g_b + g_b g_a = 2 delta_ab``."""
    s1, s2, s3 = _SIGMA
    return (np.kron(s1, s1), np.kron(s1, s2), np.kron(s1, s3), np.kron(s3, _I2))


def chirality() -> np.ndarray:
    g1, g2, g3, g4 = gamma_matrices()
    return g1 @ g2 @ g3 @ g4


def real_part(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x + x.conj().T)


def imag_part(x: np.ndarray) -> np.ndarray:
    return (x - x.conj().T) / 2j


def adjoint_action(x: np.ndarray) -> np.ndarray:
    """Matrix of ``a -> [x, a]`` on column-major flattened ``a``."""
    x = as_matrix(x)
    eye = np.eye(x.shape[0], dtype=np.complex128)
    return np.kron(eye, x) - np.kron(x.T, eye)


@dataclass(frozen=True, eq=False)
class FuzzyTorusTriple:
    n: int
    dirac: np.ndarray
    clock: np.ndarray
    shift: np.ndarray
    gammas: tuple
    prefactor: float

    @property
    def dim(self) -> int:
        return self.dirac.shape[0]

    @property
    def generators(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """``Re U, Im U, Re V, Im V`` paired with ``gamma_1..gamma_4``."""
        u, v = self.clock, self.shift
        return (real_part(u), imag_part(u), real_part(v), imag_part(v))

    def scaled(self, c: float) -> "FuzzyTorusTriple":
        """The triple with Dirac operator ``c D``."""
        if c <= 0:
            raise ValueError("scale must be positive")
        return replace(self, dirac=c * self.dirac, prefactor=c * self.prefactor)

    def chirality_operator(self) -> np.ndarray:
        return np.kron(np.eye(self.n * self.n, dtype=np.complex128), chirality())


def dirac_fuzzy(n: int) -> FuzzyTorusTriple:
    """Build ``D_n = n/(2 pi) sum_i ad(X_i) (x) gamma_i`` with ``X = (Re U, Im U, Re V, Im V)``."""
    n = _check_size(n)
    u, v = clock(n), shift(n)
    gammas = gamma_matrices()
    xs = (real_part(u), imag_part(u), real_part(v), imag_part(v))
    pref = n / (2 * math.pi)
    d = sum(np.kron(adjoint_action(x), g) for x, g in zip(xs, gammas))
    d = pref * d
    d = 0.5 * (d + d.conj().T)
    return FuzzyTorusTriple(n=n, dirac=d, clock=u, shift=v, gammas=gammas, prefactor=pref)


@dataclass(frozen=True)
class ClosedFormConvention:
    """How to read the closed-form fuzzy spectrum.

    Eigenvalues are ``outer * scale * (lead*A*half + inner_root)^(1/2)`` where
    ``A`` is the sum of four squared brackets, ``inner_root`` is
    ``+-sqrt((A*half)^2 - b_coeff*(B*half)^2)`` and brackets are
    ``[x] = sin(2 pi x/period)/sin(2 pi/period)`` with ``period = bracket_mult*n``.
    """

    name: str
    lead: int = -1
    bracket_mult: int = 1
    b_coeff: float = 1.0
    half: float = 1.0
    scale: str = "unit"
    note: str = ""

    def scale_factor(self, n: int) -> float:
        if self.scale == "unit":
            return 1.0
        if self.scale == "half-angle":
            return n / math.pi * math.sin(math.pi / n)
        raise ValueError(f"unknown scale rule {self.scale!r}")

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lead": self.lead,
            "bracket_mult": self.bracket_mult,
            "b_coeff": self.b_coeff,
            "half": self.half,
            "scale": self.scale,
            "note": self.note,
        }


PRINTED_CONVENTION = ClosedFormConvention(
    name="printed",
    note="formula exactly as printed: leading minus, [x]_n with period n, no scale",
)

# Resolved by multiset-matching the eigensolver for n = 3..8 (sorted l-inf
# distance below 1e-13).  Relative to the printed formula: the leading sign is
# +, brackets use period 2n, the inner root is sqrt(A^2/4 - B^2), and the whole
# spectrum carries the factor (n/pi) sin(pi/n).
RESOLVED_CONVENTION = ClosedFormConvention(
    name="resolved",
    lead=1,
    bracket_mult=2,
    b_coeff=1.0,
    half=0.5,
    scale="half-angle",
    note=(
        "eigensolver-matched: lead +, [x] = sin(pi x/n)/sin(pi/n), "
        "inner root sqrt(A^2/4 - B^2), overall factor (n/pi) sin(pi/n)"
    ),
)

CANDIDATE_CONVENTIONS = tuple(
    ClosedFormConvention(
        name=f"lead{lead:+d}_p{mult}n_b{b}_h{h}_{scale}",
        lead=lead,
        bracket_mult=mult,
        b_coeff=b,
        half=h,
        scale=scale,
    )
    for lead in (-1, 1)
    for mult in (1, 2)
    for b in (1.0, 4.0)
    for h in (1.0, 0.5)
    for scale in ("unit", "half-angle")
)


def bracket(x, n: int, period_mult: int = 1):
    """``[x]_n = sin(2 pi x / p) / sin(2 pi / p)`` with ``p = period_mult * n``."""
    p = period_mult * n
    return np.sin(2 * np.pi * np.asarray(x, dtype=float) / p) / math.sin(2 * math.pi / p)


@dataclass
class ClosedFormSpectrum:
    values: np.ndarray
    discarded: int
    convention: ClosedFormConvention
    n: int


def _is_resolved_form(conv: ClosedFormConvention) -> bool:
    return conv.lead == 1 and conv.bracket_mult == 2 and conv.half == 0.5 and conv.b_coeff == 1.0


def _resolved_squares(m: np.ndarray, k: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # Squared eigenvalues A/2 +- sqrt(A^2/4 - B^2) in cancellation-free form.
    # With c = cos(pi/n), s = sin(pi/n), al = (2m-1) pi/n, be = (2k+1) pi/n:
    #   A/2 - B = (1 - c)(cos^2(al/2) + cos^2(be/2)) / s^2
    #   A/2 + B = (1 + c)(sin^2(al/2) + sin^2(be/2)) / s^2
    #   B = [m][m-1] + [k][k+1]
    # and the small root is B^2 / (large root).
    c = math.cos(math.pi / n)
    s2 = math.sin(math.pi / n) ** 2
    al = (2 * m - 1) * math.pi / n
    be = (2 * k + 1) * math.pi / n
    lo = (1 - c) * (np.cos(al / 2) ** 2 + np.cos(be / 2) ** 2) / s2
    hi = (1 + c) * (np.sin(al / 2) ** 2 + np.sin(be / 2) ** 2) / s2
    br = lambda x: bracket(x, n, 2)  # noqa: E731
    b = br(m) * br(m - 1) + br(k) * br(k + 1)
    half_a = 0.5 * (lo + hi)
    big = half_a + np.sqrt(lo * hi)
    small = np.divide(b * b, big, out=np.zeros_like(big), where=big > 0)
    return big, small


def fuzzy_spectrum_closed_form(
    n: int, convention: ClosedFormConvention = RESOLVED_CONVENTION, tol: float = 1e-12
) -> ClosedFormSpectrum:
    """Evaluate the closed-form spectrum of ``D_n`` over ``m, k in {0..n-1}``.

    Branches with a negative radicand (beyond ``tol`` relative roundoff) are
    dropped and counted in ``discarded``.
    """
    n = _check_size(n)
    if n < 2:
        raise ValueError("closed form needs n >= 2")
    m, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    m = m.ravel().astype(float)
    k = k.ravel().astype(float)
    scale = convention.scale_factor(n)
    if _is_resolved_form(convention):
        big, small = _resolved_squares(m, k, n)
        roots = np.sqrt(np.concatenate([big, small]))
        vals = np.sort(np.concatenate([roots, -roots])) * scale
        return ClosedFormSpectrum(values=vals, discarded=0, convention=convention, n=n)

    br = lambda x: bracket(x, n, convention.bracket_mult)  # noqa: E731
    a_sum = br(1 - m) ** 2 + br(m) ** 2 + br(1 + k) ** 2 + br(k) ** 2
    b_sum = br(0.5 - m) ** 2 + br(0.5 + k) ** 2 - 2 * br(0.5) ** 2
    h = convention.half
    rad = (h * a_sum) ** 2 - convention.b_coeff * (h * b_sum) ** 2
    out = []
    discarded = 0
    for r_in, base, a in zip(rad, convention.lead * h * a_sum, a_sum):
        sa = abs(h * a) + 1.0
        if r_in < -tol * sa * sa:
            discarded += 4
            continue
        root = math.sqrt(max(r_in, 0.0))
        for inner in (root, -root):
            r_out = base + inner
            if r_out < -tol * sa:
                discarded += 2
                continue
            val = math.sqrt(max(r_out, 0.0))
            out.extend((val, -val))
    vals = np.sort(np.array(out)) * scale
    return ClosedFormSpectrum(values=vals, discarded=discarded, convention=convention, n=n)


def multiset_distance(a, b) -> float:
    """Sorted l-infinity distance; infinite when the sizes differ."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        return math.inf
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def resolve_convention(ns=range(3, 9), candidates=CANDIDATE_CONVENTIONS) -> list[tuple[ClosedFormConvention, float]]:
    """Rank candidate conventions by worst multiset distance to the eigensolver."""
    spectra = {n: np.linalg.eigvalsh(dirac_fuzzy(n).dirac) for n in ns}
    ranked = []
    for conv in candidates:
        worst = max(multiset_distance(fuzzy_spectrum_closed_form(n, conv).values, spectra[n]) for n in ns)
        ranked.append((conv, worst))
    ranked.sort(key=lambda t: t[1])
    return ranked


@dataclass
class LimitSpectrum:
    values: np.ndarray
    generator_counts: np.ndarray
    generators: dict = field(default_factory=dict)
    index_max: int = 0


def limit_spectrum(index_max: int, dedup_tol: float = 1e-12) -> LimitSpectrum:
    """Values ``+-sqrt(m^2+k+k^2+1-m +- sqrt(2m^2-2m+2k+2k^2+1))`` for ``m, k <= index_max``.

    ``generator_counts[i]`` is how many ``(m, k, +-, +-)`` tuples produce
    ``values[i]``; it is a bookkeeping count, not a certified multiplicity.
    """
    if index_max < 0:
        raise ValueError("index_max must be >= 0")
    raw: list[tuple[float, tuple]] = []
    for m in range(index_max + 1):
        for k in range(index_max + 1):
            base = m * m - m + k * k + k + 1
            inner = 2 * m * m - 2 * m + 2 * k * k + 2 * k + 1
            root = math.sqrt(inner)
            for s_in in (1, -1):
                r = base + s_in * root
                if r < 0:
                    # base^2 - inner = (m^2 - m + k^2 + k)^2 >= 0, so only roundoff lands here
                    r = 0.0 if r > -1e-12 * base else math.nan
                if math.isnan(r):
                    continue
                val = math.sqrt(r)
                if base * base == inner and s_in == -1:
                    val = 0.0
                for s_out in (1, -1):
                    raw.append((s_out * val, (m, k, s_in, s_out)))
    raw.sort(key=lambda t: t[0])
    values: list[float] = []
    counts: list[int] = []
    gens: dict[int, list] = {}
    for val, gen in raw:
        if values and abs(val - values[-1]) <= dedup_tol * max(1.0, abs(val)):
            counts[-1] += 1
            gens[len(values) - 1].append(gen)
        else:
            values.append(0.0 if val == 0 else val)
            counts.append(1)
            gens[len(values) - 1] = [gen]
    return LimitSpectrum(
        values=np.array(values), generator_counts=np.array(counts), generators=gens, index_max=index_max
    )


def generator_count_table(spec: LimitSpectrum) -> Counter:
    return Counter({float(v): int(c) for v, c in zip(spec.values, spec.generator_counts)})
