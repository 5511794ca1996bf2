import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzyspec.matrix_core import (
    EigenDecomposition,
    NotHermitianError,
    _DecompositionCache,
    cached_eigh,
    commutator,
    eigh,
    gram_independent,
    is_hermitian,
    kron,
    numerical_rank,
    operator_norm,
    require_hermitian,
)


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a + a.conj().T


def test_kron_examples():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(kron(np.diag([1, -1]), np.eye(2)), np.diag([1, 1, -1, -1]))
    d = np.diag([2, 3])
    z = np.zeros((2, 2))
    expected = np.block([[z, d], [d, z]])
    assert np.array_equal(kron([[0, 1], [1, 0]], d), expected)


def test_commutator_examples():
    m = np.array([[1, 2j], [3, 4]])
    assert np.array_equal(commutator(np.eye(2), m), np.zeros((2, 2)))
    assert np.array_equal(commutator(m, m), np.zeros((2, 2)))
    assert np.array_equal(commutator(np.diag([1, -1]), [[0, 1], [1, 0]]), [[0, 2], [-2, 0]])


def test_commutator_shape_mismatch():
    with pytest.raises(ValueError):
        commutator(np.eye(2), np.eye(3))


def test_eigh_examples():
    assert np.allclose(eigh(np.eye(3)).eigenvalues, [1, 1, 1])
    assert np.allclose(eigh(np.diag([1.0, -1.0])).eigenvalues, [-1, 1])
    assert np.allclose(eigh([[0, 1], [1, 0]]).eigenvalues, [-1, 1])


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        eigh([[0, 1], [0, 0]])
    with pytest.raises(ValueError):
        require_hermitian(np.ones((2, 3)))


def test_operator_norm_examples():
    assert operator_norm(np.zeros((3, 3))) == 0
    assert operator_norm(np.diag([3, -5])) == pytest.approx(5)
    assert operator_norm([[0, 2], [0, 0]]) == pytest.approx(2)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_eigh_reconstructs(d, seed):
    a = random_hermitian(np.random.default_rng(seed), d)
    dec = eigh(a)
    assert np.all(np.diff(dec.eigenvalues) >= 0)
    assert np.allclose(dec.reconstruct(), a, atol=1e-10 * max(1, np.abs(a).max()))
    v = dec.eigenvectors
    assert np.allclose(v.conj().T @ v, np.eye(d), atol=1e-12)
    assert dec.residuals(a).max() < 1e-10 * max(1, operator_norm(a))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_norm_homogeneity_and_triangle(d, seed, c):
    rng = np.random.default_rng(seed)
    a, b = random_hermitian(rng, d), random_hermitian(rng, d)
    assert operator_norm(c * a) == pytest.approx(abs(c) * operator_norm(a), rel=1e-12, abs=1e-12)
    assert operator_norm(a + b) <= operator_norm(a) + operator_norm(b) + 1e-10


def test_apply_matches_function_of_matrix():
    a = np.array([[2.0, 1.0], [1.0, 2.0]])
    dec = eigh(a)
    assert np.allclose(dec.apply(dec.eigenvalues**2), a @ a)


def test_is_hermitian_tolerance_scales():
    a = np.array([[1e6, 1.0], [1.0 + 1e-6, 0.0]])
    assert is_hermitian(a)
    assert not is_hermitian(np.array([[0.0, 1.0], [1.1, 0.0]]))


def test_decomposition_cache_populates_once(monkeypatch):
    import fuzzyspec.matrix_core as mc

    calls = []
    real = mc.eigh

    def counting(m, check=True):
        calls.append(1)
        return real(m, check)

    monkeypatch.setattr(mc, "eigh", counting)
    cache = _DecompositionCache()
    a = np.diag([1.0, 2.0, 3.0])
    results = []
    threads = [threading.Thread(target=lambda: results.append(cache.get(a))) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(calls) == 1
    assert all(r is results[0] for r in results)
    assert cached_eigh(a).eigenvalues.tolist() == [1.0, 2.0, 3.0]


def test_decomposition_cache_distinguishes_matrices():
    cache = _DecompositionCache()
    d1 = cache.get(np.diag([1.0, 2.0]))
    d2 = cache.get(np.diag([1.0, 3.0]))
    assert d1 is not d2
    assert isinstance(d1, EigenDecomposition)


def test_gram_independent_examples():
    e = np.eye(3)
    assert gram_independent([e[0], e[1]], 1.0)
    assert not gram_independent([e[0], e[0]], 1.0)
    # unit vectors with pairwise inner products 0.3 < 1/3
    g = np.full((3, 3), 0.3) + 0.7 * np.eye(3)
    vecs = list(np.linalg.cholesky(g).T.T)
    gram = np.array([[np.vdot(u, v) for v in vecs] for u in vecs])
    assert np.allclose(gram, g)
    assert np.linalg.det(gram) > 0
    assert gram_independent(vecs, 1.0)
    assert numerical_rank(vecs) == 3


def test_gram_independent_rejects_empty():
    with pytest.raises(ValueError):
        gram_independent([], 1.0)


def test_numerical_rank():
    assert numerical_rank([[1, 0], [2, 0]]) == 1
    assert numerical_rank(np.zeros((2, 2))) == 0
