"""Small dense complex linear algebra used by the spin simulators.

Matrices are plain ``numpy`` complex arrays.  Everything here is sized for
dimensions up to a few dozen, where eigendecomposition is both cheap and
exactly unitary by construction.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
MAX_EIG_DIM = 64


class NonHermitian(ValueError):
    """Raised when a matrix expected to be Hermitian is not."""


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def hermiticity_defect(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def check_hermitian(h, tol: float = HERMITIAN_TOL) -> np.ndarray:
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise NonHermitian(f"matrix is not square: {h.shape}")
    defect = hermiticity_defect(h)
    if defect > tol:
        raise NonHermitian(f"max|H - H^dag| = {defect:.3e} exceeds {tol:.1e}")
    return h


def hermitian_eig(h, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of ``h``.

    ``h`` is validated against ``tol`` and then symmetrised before LAPACK sees
    it, so round-off below the tolerance cannot leak into the spectrum.
    """
    h = check_hermitian(h, tol)
    if h.shape[0] > MAX_EIG_DIM:
        raise ValueError(f"dimension {h.shape[0]} exceeds {MAX_EIG_DIM}")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return w, v


def expm_from_eig(w: np.ndarray, v: np.ndarray, phase_scale: float) -> np.ndarray:
    """``V diag(exp(i*phase_scale*w)) V^dag`` for a precomputed decomposition."""
    return (v * np.exp(1j * phase_scale * w)) @ v.conj().T


def expm_unitary(h, phase_scale: float, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``exp(i * phase_scale * h)`` for Hermitian ``h``.

    Callers evolving under ``exp(-2 pi i H t)`` pass ``phase_scale=-2*pi*t``.
    """
    if not np.isfinite(phase_scale):
        raise ValueError("phase_scale must be finite")
    w, v = hermitian_eig(h, tol)
    return expm_from_eig(w, v, phase_scale)


def unitarity_defect(u: np.ndarray) -> float:
    u = as_matrix(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(u) <= tol
