"""Clustering, indexing and tracking of finite spectra.

Indices follow the convention where index 0 is the smallest nonnegative
eigenvalue and indices increase with value.  Tracking across a sequence of
operators aligns eigenvalues by that index only.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np


class NoNonnegativeEigenvalueError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class IndexedSpectrum:
    values: np.ndarray
    multiplicities: np.ndarray
    cluster_tol: float
    index_offset: int | None = None

    def __len__(self) -> int:
        return len(self.values)

    @property
    def dim(self) -> int:
        return int(np.sum(self.multiplicities))

    @property
    def indices(self) -> np.ndarray:
        if self.index_offset is None:
            raise NoNonnegativeEigenvalueError("spectrum has not been indexed")
        return np.arange(len(self.values)) - self.index_offset

    @property
    def index_range(self) -> tuple[int, int]:
        idx = self.indices
        return int(idx[0]), int(idx[-1])

    def value(self, j: int) -> float:
        return float(self.values[self._pos(j)])

    def multiplicity(self, j: int) -> int:
        return int(self.multiplicities[self._pos(j)])

    def has_index(self, j: int) -> bool:
        lo, hi = self.index_range
        return lo <= j <= hi

    def _pos(self, j: int) -> int:
        if not self.has_index(j):
            raise IndexError(f"index {j} outside {self.index_range}")
        return j + self.index_offset

    def flatten(self) -> np.ndarray:
        return np.repeat(self.values, self.multiplicities)

    def clusters(self) -> list[tuple[float, int]]:
        return [(float(v), int(m)) for v, m in zip(self.values, self.multiplicities)]


def _zero_offset(values: np.ndarray) -> int | None:
    nonneg = np.flatnonzero(values >= 0)
    return int(nonneg[0]) if nonneg.size else None


def cluster_multiplicities(eigenvalues, tol: float) -> IndexedSpectrum:
    """Greedy left-to-right merge of an ascending eigenvalue list.

    An eigenvalue joins the current cluster when it lies within ``tol`` of
    the running cluster mean.  A cluster mean within ``tol/2`` of zero is set
    to exactly zero so solver noise cannot push a zero mode below the origin;
    cluster means are more than ``tol`` apart, so at most one mean qualifies.
    """
    ev = np.asarray(eigenvalues, dtype=float).ravel()
    if ev.size == 0:
        raise ValueError("cannot cluster an empty spectrum")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if np.any(np.diff(ev) < -tol):
        raise ValueError("eigenvalues must be ascending")
    values: list[float] = []
    mults: list[int] = []
    total = 0.0
    for x in ev:
        if mults and abs(x - total / mults[-1]) <= tol:
            total += x
            mults[-1] += 1
        else:
            if mults:
                values.append(total / mults[-1])
            total = x
            mults.append(1)
    values.append(total / mults[-1])
    vals = np.array(values)
    vals[np.abs(vals) <= 0.5 * tol] = 0.0
    return IndexedSpectrum(vals, np.array(mults, dtype=int), float(tol), _zero_offset(vals))


def default_cluster_tol(op_norm: float) -> float:
    return 1e-6 * max(1.0, op_norm)


def index_spectrum(s: IndexedSpectrum) -> IndexedSpectrum:
    offset = _zero_offset(s.values)
    if offset is None:
        raise NoNonnegativeEigenvalueError(
            "no nonnegative eigenvalue; index the negated operator instead"
        )
    return IndexedSpectrum(s.values, s.multiplicities, s.cluster_tol, offset)


def hausdorff_distance(a, b) -> float:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("Hausdorff distance needs nonempty sets")
    a = np.sort(a)
    b = np.sort(b)
    return max(_directed(a, b), _directed(b, a))


def _directed(a: np.ndarray, b: np.ndarray) -> float:
    # sup over a of the distance to the nearest point of sorted b
    pos = np.searchsorted(b, a)
    left = b[np.clip(pos - 1, 0, b.size - 1)]
    right = b[np.clip(pos, 0, b.size - 1)]
    return float(np.max(np.minimum(np.abs(a - left), np.abs(a - right))))


def windowed_spectrum(s: IndexedSpectrum, radius: float) -> np.ndarray:
    if radius <= 0:
        raise ValueError("radius must be positive")
    vals = np.asarray(s.values)
    return vals[np.abs(vals) <= radius]


def windowed_values(values, radius: float) -> np.ndarray:
    vals = np.asarray(values, dtype=float)
    return vals[np.abs(vals) <= radius]


@dataclass
class IndexTrack:
    index: int
    values: list[float]
    multiplicities: list[int]
    deviations: list[float]
    trend: str
    limit_candidate: float
    final_delta: float
    gap_ok: bool | None = None
    min_gap: float | None = None


@dataclass
class TrackingReport:
    tracks: dict[int, IndexTrack]
    index_range: tuple[int, int]
    shifted_branch: bool = False
    branch_errors: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def converging(self) -> list[int]:
        return [j for j, t in self.tracks.items() if t.trend in ("converging", "constant")]


def _trend(deviations: list[float], tol: float) -> str:
    head = deviations[:-1]
    if all(d <= tol for d in head):
        return "constant"
    if all(b < a for a, b in zip(head, head[1:])):
        return "converging"
    return "not-monotone"


def track_sequence(
    spectra: list[IndexedSpectrum],
    gap_floor: dict[int, float] | None = None,
    limit: IndexedSpectrum | None = None,
) -> TrackingReport:
    """Follow each index ``j`` through a sequence of indexed spectra.

    The limit candidate for each index is the value in the last spectrum;
    ``deviations`` are distances to it.  When ``limit`` is given and zero is a
    limit eigenvalue, the alignment ``lambda_n^{j-1} -> lambda^j`` is also
    tried for ``j > 0`` and reported through ``shifted_branch`` if it fits
    the last spectrum better.
    """
    if len(spectra) < 2:
        raise ValueError("tracking needs at least two spectra")
    spectra = [s if s.index_offset is not None else index_spectrum(s) for s in spectra]
    ranges = [s.index_range for s in spectra]
    lo = max(r[0] for r in ranges)
    hi = min(r[1] for r in ranges)
    notes: list[str] = []
    if len(set(ranges)) > 1:
        notes.append(f"index ranges differ {ranges}; tracking restricted to [{lo}, {hi}]")
    if lo > hi:
        notes.append("no common index range")
        for msg in notes:
            warnings.warn(msg, stacklevel=2)
        return TrackingReport({}, (lo, hi), warnings=notes)

    tol = max(s.cluster_tol for s in spectra)
    tracks: dict[int, IndexTrack] = {}
    for j in range(lo, hi + 1):
        vals = [s.value(j) for s in spectra]
        mults = [s.multiplicity(j) for s in spectra]
        devs = [abs(v - vals[-1]) for v in vals]
        track = IndexTrack(
            index=j,
            values=vals,
            multiplicities=mults,
            deviations=devs,
            trend=_trend(devs, tol),
            limit_candidate=vals[-1],
            final_delta=devs[-2],
        )
        if gap_floor is not None and j in gap_floor and j + 1 <= hi:
            gaps = [s.value(j + 1) - s.value(j) for s in spectra]
            track.min_gap = float(min(gaps))
            track.gap_ok = bool(all(g >= gap_floor[j] for g in gaps))
        tracks[j] = track

    report = TrackingReport(tracks, (lo, hi), warnings=notes)
    if limit is not None:
        _check_branch(report, spectra[-1], limit)
    for msg in notes:
        warnings.warn(msg, stacklevel=2)
    return report


def _check_branch(report: TrackingReport, last: IndexedSpectrum, limit: IndexedSpectrum) -> None:
    limit = limit if limit.index_offset is not None else index_spectrum(limit)
    errs = {}
    # without a finite zero mode the positive branch sits one index lower;
    # negative indices line up either way and j = 0 is left out of both
    for name, shift in (("direct", 0), ("shifted", -1)):
        diffs = []
        for j in report.tracks:
            src = j + shift if j > 0 else j
            if j != 0 and limit.has_index(j) and last.has_index(src):
                diffs.append(abs(last.value(src) - limit.value(j)))
        errs[name] = max(diffs) if diffs else math.inf
    report.branch_errors = errs
    has_zero = limit.has_index(0) and limit.value(0) == 0.0
    report.shifted_branch = bool(has_zero and errs["shifted"] < errs["direct"])
    if report.shifted_branch:
        report.warnings.append("index shift by one fits the limit better (zero limit eigenvalue)")


@dataclass
class MultiplicityVerdict:
    index: int
    multiplicities: list[int]
    eventually_constant: bool
    eventual: int
    limit_multiplicity: int | None
    verdict: str


def multiplicity_convergence(
    report: TrackingReport, limit: IndexedSpectrum, tail: int = 2
) -> dict[int, MultiplicityVerdict]:
    """Compare tracked multiplicities with the limit multiplicities.

    A sequence counts as eventually constant when its last ``tail`` entries
    agree.  Verdicts: ``equal`` (eventual value equals the limit),
    ``consistent-with-liminf`` (tail minimum exceeds it) and ``violated``.
    """
    limit = limit if limit.index_offset is not None else index_spectrum(limit)
    out: dict[int, MultiplicityVerdict] = {}
    for j, track in report.tracks.items():
        mults = track.multiplicities
        tail_vals = mults[-tail:]
        const = len(set(tail_vals)) == 1
        eventual = min(tail_vals)
        lj = j + 1 if report.shifted_branch and j >= 0 else j
        lim = limit.multiplicity(lj) if limit.has_index(lj) else None
        if lim is None:
            verdict = "no-limit-index"
        elif const and eventual == lim:
            verdict = "equal"
        elif eventual >= lim:
            verdict = "consistent-with-liminf"
        else:
            verdict = "violated"
        out[j] = MultiplicityVerdict(j, list(mults), const, eventual, lim, verdict)
    return out
