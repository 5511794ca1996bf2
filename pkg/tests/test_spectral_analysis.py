import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzyspec.spectral_analysis import (
    IndexedSpectrum,
    NoNonnegativeEigenvalueError,
    cluster_multiplicities,
    hausdorff_distance,
    index_spectrum,
    multiplicity_convergence,
    track_sequence,
    windowed_spectrum,
)


def spec(values, mults=None, tol=1e-8):
    values = np.asarray(values, dtype=float)
    mults = np.ones(values.size, dtype=int) if mults is None else np.asarray(mults)
    return index_spectrum(IndexedSpectrum(values, mults, tol))


def test_cluster_examples():
    assert cluster_multiplicities([1, 1, 1], 1e-8).clusters() == [(1.0, 3)]
    assert cluster_multiplicities([-1, 1], 0.5).clusters() == [(-1.0, 1), (1.0, 1)]
    s = cluster_multiplicities([0, 1e-10, 2], 1e-8)
    assert s.clusters() == [(0.0, 2), (2.0, 1)]


def test_cluster_errors():
    with pytest.raises(ValueError):
        cluster_multiplicities([], 1e-8)
    with pytest.raises(ValueError):
        cluster_multiplicities([2, 1], 1e-8)
    with pytest.raises(ValueError):
        cluster_multiplicities([1, 2], 0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=40), st.floats(1e-9, 0.5))
def test_cluster_preserves_count_and_order(values, tol):
    s = cluster_multiplicities(sorted(values), tol)
    assert int(s.multiplicities.sum()) == len(values)
    assert np.all(np.diff(s.values) > 0)
    assert s.flatten().size == len(values)


def test_index_examples():
    s = spec([-2, 0, 3])
    assert s.indices.tolist() == [-1, 0, 1]
    assert spec([5]).indices.tolist() == [0]
    with pytest.raises(NoNonnegativeEigenvalueError):
        spec([-1, -0.5])


def test_index_lookup():
    s = spec([-2, 0, 3], [1, 4, 2])
    assert s.value(1) == 3 and s.multiplicity(0) == 4
    assert s.index_range == (-1, 1)
    assert not s.has_index(2)


def test_hausdorff_examples():
    assert hausdorff_distance([1, 2, 3], [3, 2, 1]) == 0
    assert hausdorff_distance([0], [1]) == 1
    assert hausdorff_distance([0, 2], [1]) == 1
    with pytest.raises(ValueError):
        hausdorff_distance([], [1])


def brute_hausdorff(a, b):
    d = np.abs(np.subtract.outer(a, b))
    return max(d.min(axis=1).max(), d.min(axis=0).max())


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.integers(-100, 100), min_size=1, max_size=15),
    st.lists(st.integers(-100, 100), min_size=1, max_size=15),
    st.lists(st.integers(-100, 100), min_size=1, max_size=15),
)
def test_hausdorff_metric_axioms(a, b, c):
    a, b, c = (np.array(x, dtype=float) for x in (a, b, c))
    dab = hausdorff_distance(a, b)
    assert dab == brute_hausdorff(a, b)
    assert dab == hausdorff_distance(b, a)
    assert hausdorff_distance(a, a) == 0
    assert (dab == 0) == (set(a) == set(b))
    assert hausdorff_distance(a, c) <= dab + hausdorff_distance(b, c)


def test_window_examples():
    assert windowed_spectrum(spec([-3, 0, 3]), 1).tolist() == [0]
    assert windowed_spectrum(spec([-3, 0, 3]), 10).tolist() == [-3, 0, 3]
    assert windowed_spectrum(spec([-2, -1, 1, 2]), 1.5).tolist() == [-1, 1]
    with pytest.raises(ValueError):
        windowed_spectrum(spec([0]), 0)


def test_track_identical_spectra():
    s = spec([-1, 0, 1])
    report = track_sequence([s, s, s])
    assert all(d == 0 for t in report.tracks.values() for d in t.deviations)
    assert all(t.trend == "constant" for t in report.tracks.values())


def test_track_synthetic_convergence():
    spectra = [spec([1 + 1 / n]) for n in range(2, 11)]
    t = track_sequence(spectra).tracks[0]
    head = t.deviations[:-1]
    assert all(b < a for a, b in zip(head, head[1:]))
    assert t.trend == "converging"
    assert t.limit_candidate == pytest.approx(1.1)
    assert t.values[-2] == pytest.approx(1 + 1 / 9)


def test_track_warns_on_different_ranges():
    with pytest.warns(UserWarning):
        report = track_sequence([spec([-1, 0, 1]), spec([-2, -1, 0, 1, 2])])
    assert report.index_range == (-1, 1)
    assert report.warnings


def test_track_gap_floor():
    s1, s2 = spec([0, 1]), spec([0, 0.5])
    report = track_sequence([s1, s2], gap_floor={0: 0.6})
    assert report.tracks[0].gap_ok is False
    assert report.tracks[0].min_gap == pytest.approx(0.5)
    report = track_sequence([s1, s2], gap_floor={0: 0.5})
    assert report.tracks[0].gap_ok is True


def test_track_needs_two():
    with pytest.raises(ValueError):
        track_sequence([spec([0])])


def test_shifted_branch_detected():
    # finite spectra lacking a zero mode index their first positive value as 0
    limit = spec([-1, 0, 1])
    finite = [spec([-1.2, 0.01, 1.2]), spec([-1.1, 0.001, 1.1])]
    report = track_sequence(finite, limit=limit)
    assert report.shifted_branch is False
    finite = [spec([-2.1, -1.1, 1.1, 2.1]), spec([-2.01, -1.01, 1.01, 2.01])]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = track_sequence(finite, limit=spec([-2, -1, 0, 1, 2]))
    assert report.branch_errors["shifted"] < report.branch_errors["direct"]
    assert report.shifted_branch is True


def _verdict(mults, limit_mult):
    spectra = [spec([0.0], [m]) for m in mults]
    report = track_sequence(spectra)
    return multiplicity_convergence(report, spec([0.0], [limit_mult]))[0]


def test_multiplicity_verdicts():
    assert _verdict([4, 4, 4], 4).verdict == "equal"
    v = _verdict([2, 3, 4, 4, 4], 4)
    assert v.verdict == "equal" and v.eventually_constant
    assert _verdict([3, 2, 2], 4).verdict == "violated"
    assert _verdict([8, 8], 4).verdict == "consistent-with-liminf"
