import numpy as np
import pytest

from rhomix.errors import NotHermitian, NotSquare, RankDeficient
from rhomix.numkernel import (
    hermitian_eig,
    is_unitary,
    polar_unitary,
    random_unitary,
    unitarity_residual,
)


def random_hermitian(n, rng):
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return x + x.conj().T


def rotation(theta):
    return np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])


def test_diagonal_input_is_already_decomposed():
    dec = hermitian_eig(np.diag([0.75, 0.25]))
    np.testing.assert_allclose(dec.eigenvalues, [0.75, 0.25])
    np.testing.assert_allclose(np.abs(dec.eigenvectors), np.eye(2))


def test_rank_one_projector():
    # characteristic polynomial x^2 - x = 0
    dec = hermitian_eig([[0.5, 0.5], [0.5, 0.5]])
    np.testing.assert_allclose(dec.eigenvalues, [1.0, 0.0], atol=1e-15)


def test_ties_keep_original_order():
    dec = hermitian_eig(np.diag([0.2, 0.5, 0.2, 0.1]))
    np.testing.assert_allclose(dec.eigenvalues, [0.5, 0.2, 0.2, 0.1])
    np.testing.assert_allclose(np.abs(dec.eigenvectors[:, 1]), [1, 0, 0, 0])
    np.testing.assert_allclose(np.abs(dec.eigenvectors[:, 2]), [0, 0, 1, 0])


def test_random_hermitian_properties(rng):
    for _ in range(500):
        n = int(rng.integers(1, 9))
        h = random_hermitian(n, rng)
        dec = hermitian_eig(h)
        assert np.all(np.diff(dec.eigenvalues) <= 0)
        assert np.max(np.abs(dec.reconstruct() - h)) < 1e-10
        assert unitarity_residual(dec.eigenvectors) < 1e-10
        # independent LAPACK oracle
        ref = np.sort(np.linalg.eigvalsh(h))[::-1]
        assert np.max(np.abs(dec.eigenvalues - ref)) < 1e-10
        u = random_unitary(n, rng)
        conj = hermitian_eig(u @ h @ u.conj().T)
        assert np.max(np.abs(conj.eigenvalues - dec.eigenvalues)) < 1e-8


def test_deterministic(rng):
    h = random_hermitian(5, rng)
    a, b = hermitian_eig(h), hermitian_eig(h)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_eig_errors():
    with pytest.raises(NotHermitian):
        hermitian_eig([[1, 1], [0, 1]])
    with pytest.raises(NotSquare):
        hermitian_eig(np.ones((2, 3)))


def test_is_unitary_examples():
    assert is_unitary(np.eye(3), 1e-10)
    assert is_unitary(rotation(np.pi / 4), 1e-10)
    assert not is_unitary(np.diag([2.0, 0.5]), 1e-10)
    with pytest.raises(NotSquare):
        is_unitary(np.ones((2, 3)))


def test_polar_examples(rng):
    np.testing.assert_allclose(polar_unitary(np.diag([2.0, 3.0])), np.eye(2), atol=1e-15)
    u = random_unitary(4, rng)
    assert np.max(np.abs(polar_unitary(u) - u)) < 1e-12
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    w = polar_unitary(a)
    assert is_unitary(w, 1e-10)
    # polar factor: W^H A is Hermitian positive semidefinite
    h = w.conj().T @ a
    assert np.max(np.abs(h - h.conj().T)) < 1e-10
    assert np.linalg.eigvalsh(0.5 * (h + h.conj().T)).min() > -1e-10
    # and no sampled unitary is closer
    d = np.linalg.norm(a - w)
    for _ in range(200):
        assert np.linalg.norm(a - random_unitary(3, rng)) >= d - 1e-12


def test_polar_rank_deficient():
    with pytest.raises(RankDeficient):
        polar_unitary([[1.0, 0.0], [0.0, 0.0]])
