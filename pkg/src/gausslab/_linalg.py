"""Small shared linear-algebra helpers."""

from __future__ import annotations

import numpy as np

from .errors import NotHermitian

HERMITICITY_TOL = 1e-12


def as_complex_matrix(m) -> np.ndarray:
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.abs(m - m.conj().T).max())


def require_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL, name: str = "matrix") -> np.ndarray:
    """Check Hermiticity entrywise and return the exactly Hermitian part."""
    defect = hermiticity_defect(m)
    if defect > tol:
        raise NotHermitian(f"{name} is not Hermitian: max |m - m*| = {defect:.3e} > {tol:.1e}")
    return 0.5 * (m + m.conj().T)


def min_eig(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(m)[0])


def psd_sqrt(m: np.ndarray, clamp: float = 1e-12) -> np.ndarray:
    """Principal Hermitian square root.

    Eigenvalues in [-clamp, 0) are clamped to 0 to absorb rounding; a more
    negative eigenvalue raises ValueError.
    """
    w, v = np.linalg.eigh(m)
    if w[0] < -clamp:
        raise ValueError(f"matrix is not PSD: min eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def spectral_abs(m: np.ndarray) -> np.ndarray:
    """|M| = sqrt(M^2) for Hermitian M."""
    w, v = np.linalg.eigh(m)
    return (v * np.abs(w)) @ v.conj().T


def opnorm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))
