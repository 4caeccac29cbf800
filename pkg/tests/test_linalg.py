import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weaktomo.errors import DegenerateSpectrum, NotHermitian, NotInvertible, NotPositiveDefinite, NotPrime
from weaktomo.linalg import (
    adjoint,
    eig_general,
    fix_global_phase,
    gram_sqrt_vectors,
    is_prime,
    mod_inverse,
    relative_residual,
)
from weaktomo.bases import build_family

W3 = np.exp(2j * np.pi / 3)


def test_gram_identity():
    v = gram_sqrt_vectors(np.eye(3))
    assert np.allclose(adjoint(v) @ v, np.eye(3), atol=1e-10)


def test_gram_two_vectors_real_overlap():
    g = np.array([[1, 0.5], [0.5, 1]])
    v = gram_sqrt_vectors(g)
    assert np.allclose(np.linalg.norm(v, axis=0), 1, atol=1e-12)
    assert abs(np.vdot(v[:, 0], v[:, 1]) - 0.5) < 1e-10


def test_gram_singular_rejected():
    with pytest.raises(NotPositiveDefinite):
        gram_sqrt_vectors(np.ones((3, 3)))


def test_gram_asymmetric_rejected():
    with pytest.raises(NotHermitian):
        gram_sqrt_vectors(np.array([[1, 0.2], [0.3, 1]]))


def test_gram_deterministic():
    g = np.array([[1, 0.3, 0.3], [0.3, 1, 0.3], [0.3, 0.3, 1]])
    assert np.array_equal(gram_sqrt_vectors(g), gram_sqrt_vectors(g))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_gram_recomputed(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    g = a @ adjoint(a) + 0.1 * np.eye(n)
    g = 0.5 * (g + adjoint(g))
    v = gram_sqrt_vectors(g)
    assert np.max(np.abs(adjoint(v) @ v - g)) < 1e-10 * max(1, np.abs(g).max())


def test_eig_diagonal_clock():
    es = eig_general(np.diag([1, W3, W3**2]))
    assert np.allclose(es.eigenvalues, [1, W3, W3**2], atol=1e-12)
    assert np.allclose(np.abs(es.right), np.eye(3), atol=1e-12)
    assert np.allclose(np.abs(es.left), np.eye(3), atol=1e-12)


def test_eig_clock_roots_of_unity():
    z = build_family(3, 0.3).operators.Z
    es = eig_general(z)
    assert np.allclose(es.eigenvalues**3, 1, atol=1e-10)
    m = z
    for k in range(3):
        lam = es.eigenvalues[k]
        assert relative_residual(m @ es.right[:, k], lam * es.right[:, k]) < 1e-10
        assert relative_residual(es.left[:, k].conj() @ m, lam * es.left[:, k].conj()) < 1e-10
    pair = adjoint(es.left) @ es.right
    assert np.allclose(pair, np.eye(3), atol=1e-10)
    assert relative_residual(es.reconstruct(), m) < 1e-9


def test_eig_degenerate():
    with pytest.raises(DegenerateSpectrum):
        eig_general(np.diag([1, 1, W3]))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_eig_reconstruction_random(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    es = eig_general(m)
    assert np.allclose(np.linalg.norm(es.right, axis=0), 1)
    assert np.allclose(np.einsum("ik,ik->k", es.left.conj(), es.right), 1)
    assert relative_residual(es.reconstruct(), m) < 1e-9


@pytest.mark.parametrize("a,p,expected", [(2, 5, 3), (1, 7, 1), (4, 7, 2)])
def test_mod_inverse_examples(a, p, expected):
    assert mod_inverse(a, p) == expected


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13])
def test_mod_inverse_exhaustive(p):
    for a in range(1, p):
        brute = next(b for b in range(1, p) if (a * b) % p == 1)
        assert mod_inverse(a, p) == brute


def test_mod_inverse_errors():
    with pytest.raises(NotPrime):
        mod_inverse(3, 9)
    with pytest.raises(NotInvertible):
        mod_inverse(5, 5)


def test_is_prime():
    assert [n for n in range(32) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31]


def test_adjoint_involution_and_phase():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    assert np.array_equal(adjoint(adjoint(m)), m)
    f = fix_global_phase(m)
    assert np.all(f[0].imag == 0) and np.all(f[0].real > 0)
    assert np.allclose(np.abs(f), np.abs(m))
