import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzyspec.fuzzy_torus import dirac_fuzzy, real_part
from fuzzyspec.matrix_core import NotHermitianError
from fuzzyspec.quantum_metric import (
    DensityState,
    LipMap,
    MKConfig,
    lip_seminorm,
    mk_bruteforce_oracle,
    mk_distance,
    traceless_hermitian_basis,
)

T2 = dirac_fuzzy(2)
FAST = MKConfig(restarts=3, max_iter=600)


def test_density_state_validation():
    with pytest.raises(ValueError):
        DensityState(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        DensityState(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        DensityState(np.array([[0.5, 1.0], [0.0, 0.5]]))
    s = DensityState.vector([1, 1j])
    assert s(np.eye(2)) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_gell_mann_basis_orthonormal(n):
    b = traceless_hermitian_basis(n)
    assert b.shape == (n * n - 1, n, n)
    gram = np.einsum("kij,lji->kl", b, b)
    assert np.allclose(gram, np.eye(n * n - 1))
    for m in b:
        assert np.allclose(m, m.conj().T) and abs(np.trace(m)) < 1e-14


def test_lip_examples():
    assert lip_seminorm(T2, np.eye(2)) == pytest.approx(0.0, abs=1e-14)
    a = real_part(T2.clock)
    # fixture from a direct 16x16 norm of [D, L_a (x) I] built with explicit Kronecker products
    assert lip_seminorm(T2, a) == pytest.approx(2 / math.pi, rel=1e-12)
    assert lip_seminorm(T2, -3.5 * a) == pytest.approx(3.5 * 2 / math.pi, rel=1e-12)
    with pytest.raises(NotHermitianError):
        lip_seminorm(T2, np.array([[0, 1], [0, 0]]))


def test_lip_matches_full_commutator():
    t = dirac_fuzzy(3)
    rng = np.random.default_rng(0)
    x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    a = x + x.conj().T
    # L_a on column-major vec(M_n), spinor index fastest
    big = np.kron(np.kron(np.eye(3), a), np.eye(4))
    full = np.linalg.norm(t.dirac @ big - big @ t.dirac, 2)
    assert lip_seminorm(t, a) == pytest.approx(full, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lipmap_agrees_with_seminorm(seed):
    lm = LipMap.build(T2)
    theta = np.random.default_rng(seed).normal(size=lm.dim)
    assert lm.lip(theta) == pytest.approx(lip_seminorm(T2, lm.element(theta)), rel=1e-10)
    assert np.allclose(lm.coords(lm.element(theta)), theta)


def test_identical_states():
    s = DensityState.basis(2, 0)
    assert mk_distance(T2, s, s).lower_bound == 0
    assert mk_bruteforce_oracle(T2, s, s) == 0


def test_basis_states_distance_and_symmetry():
    p, q = DensityState.basis(2, 0), DensityState.basis(2, 1)
    fwd = mk_distance(T2, p, q, FAST)
    bwd = mk_distance(T2, q, p, FAST)
    assert fwd.lower_bound == pytest.approx(math.pi, rel=1e-9)
    assert abs(fwd.lower_bound - bwd.lower_bound) <= 1e-9
    oracle = mk_bruteforce_oracle(T2, p, q, samples=4000)
    assert abs(fwd.lower_bound - oracle) / oracle <= 0.02


def test_scale_covariance():
    p, q = DensityState.basis(2, 0), DensityState.mixed(2)
    base = mk_distance(T2, p, q, FAST).lower_bound
    doubled = mk_distance(T2.scaled(2.0), p, q, FAST).lower_bound
    assert doubled == pytest.approx(base / 2, rel=0.02)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_witness_is_feasible(seed):
    rng = np.random.default_rng(seed)
    v, w = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    p, q = DensityState.vector(v), DensityState.vector(w)
    res = mk_distance(T2, p, q, MKConfig(restarts=2, max_iter=300, seed=seed % 1000))
    a = res.witness
    assert np.allclose(a, a.conj().T)
    assert lip_seminorm(T2, a) <= 1 + 1e-9
    assert res.lower_bound == pytest.approx(abs(p(a) - q(a)), abs=1e-12)
    assert res.lower_bound <= res.estimate + 1e-12


def test_oracle_limited_to_small_n():
    t = dirac_fuzzy(4)
    with pytest.raises(ValueError):
        mk_bruteforce_oracle(t, DensityState.basis(4, 0), DensityState.basis(4, 1))


def test_mismatched_state_size():
    with pytest.raises(ValueError):
        mk_distance(T2, DensityState.basis(3, 0), DensityState.basis(3, 1))


def test_one_dimensional_algebra_has_no_directions():
    t = dirac_fuzzy(1)
    s = DensityState.basis(1, 0)
    assert mk_distance(t, s, s).lower_bound == 0
