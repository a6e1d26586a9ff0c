"""Dense complex linear algebra for small matrices.

The Hermitian eigensolver is a cyclic Jacobi method written out explicitly;
it is accurate to roughly machine precision for the matrix sizes used here
(N up to a few dozen) and fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian, NotSquare, RankDeficient

HERMITIAN_TOL = 1e-10
JACOBI_THRESHOLD = 1e-14
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending; eigenvectors stored as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(a) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def _require_square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise NotSquare(f"matrix must be square, got shape {m.shape}")


def _off_diagonal_max(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.max(np.abs(off))) if a.shape[0] > 1 else 0.0


def hermitian_eig(a, tol: float = HERMITIAN_TOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.

    Each rotation first removes the phase of the pivot ``a[p, q]`` with a
    diagonal unitary, then applies the classical real Jacobi rotation, so the
    combined 2x2 transform is ``diag(1, exp(-i*phi)) @ [[c, s], [-s, c]]``.

    Raises
    ------
    NotSquare, NotHermitian
    """
    a = as_matrix(a)
    _require_square(a)
    asym = float(np.max(np.abs(a - a.conj().T)))
    if asym >= tol:
        raise NotHermitian(f"matrix is not Hermitian: max |A - A^H| = {asym:.3e}")

    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    scale = max(float(np.max(np.abs(a))), np.finfo(float).tiny)
    threshold = JACOBI_THRESHOLD * scale

    for _ in range(JACOBI_MAX_SWEEPS):
        if _off_diagonal_max(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= threshold * 1e-3:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                j = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = j.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = app - t * mag
                a[q, q] = aqq + t * mag
                v[:, idx] = v[:, idx] @ j

    w = np.diag(a).real.copy()
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(eigenvalues=w[order], eigenvectors=v[:, order])


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = as_matrix(u)
    _require_square(u)
    n = u.shape[0]
    return float(np.max(np.abs(u.conj().T @ u - np.eye(n)))) < tol


def unitarity_residual(u) -> float:
    u = np.asarray(u, dtype=complex)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def nearest_unitary(a: np.ndarray) -> np.ndarray:
    """Unitary polar factor without the rank check (any closest unitary)."""
    w, _, vh = np.linalg.svd(a)
    return w @ vh


def polar_unitary(a) -> np.ndarray:
    """Closest unitary to ``a`` in Frobenius distance.

    Raises
    ------
    NotSquare, RankDeficient
    """
    a = as_matrix(a)
    _require_square(a)
    w, sv, vh = np.linalg.svd(a)
    if sv[-1] <= 1e-12:
        raise RankDeficient(f"smallest singular value {sv[-1]:.3e} <= 1e-12")
    return w @ vh


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary (QR of a Ginibre matrix with the R-phase fix)."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
