"""Spin-1/2 and spin-1 operator algebra on small dense matrices.

Basis order is fixed to descending magnetic quantum number, i.e.
``{|+1>, |0>, |-1>}`` for spin 1.  All routines broadcast over leading
axes where that is cheap, so time grids can be handled in one call.
"""

from __future__ import annotations

import numpy as np

from .errors import NonHermitian

HERMITIAN_RTOL = 1e-12


def spin_operators(dim: int = 3) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(Ix, Iy, Iz)`` for spin ``(dim - 1) / 2``.

    Only ``dim`` 2 and 3 are supported.
    """
    if dim == 2:
        ix = np.array([[0, 1], [1, 0]], dtype=complex) / 2
        iy = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
        iz = np.array([[1, 0], [0, -1]], dtype=complex) / 2
    elif dim == 3:
        s = 1 / np.sqrt(2)
        ix = s * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
        iy = s * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
        iz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    else:
        raise ValueError(f"unsupported spin dimension {dim}; expected 2 or 3")
    return ix, iy, iz


def _axis_operator(axis: str, dim: int) -> np.ndarray:
    ix, iy, iz = spin_operators(dim)
    return {"x": ix, "y": iy, "z": iz}[axis]


def rotation(axis: str, phi, dim: int = 3) -> np.ndarray:
    """``exp(-i phi I_axis)``; broadcasts over an array of angles.

    Uses closed forms: for spin 1, ``I^3 = I`` gives
    ``1 - i sin(phi) I + (cos(phi) - 1) I^2``; for spin 1/2,
    ``cos(phi/2) - 2i sin(phi/2) I``.
    """
    op = _axis_operator(axis, dim)
    phi = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(phi)):
        raise ValueError("rotation angle must be finite")
    p = phi[..., None, None]
    eye = np.eye(dim)
    if dim == 3:
        return eye - 1j * np.sin(p) * op + (np.cos(p) - 1) * (op @ op)
    return np.cos(p / 2) * eye - 2j * np.sin(p / 2) * op


def rotation_z(phi, dim: int = 3) -> np.ndarray:
    return rotation("z", phi, dim)


def rotation_y(phi, dim: int = 3) -> np.ndarray:
    return rotation("y", phi, dim)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def check_hermitian(h: np.ndarray, rtol: float = HERMITIAN_RTOL) -> None:
    """Raise :class:`NonHermitian` if ``h`` deviates from ``h^dagger``."""
    h = np.asarray(h)
    scale = max(float(np.max(np.abs(h), initial=0.0)), 1.0)
    err = float(np.max(np.abs(h - dagger(h)), initial=0.0))
    if err > rtol * scale:
        raise NonHermitian(f"matrix not Hermitian: max deviation {err:.3e}")


def fix_gauge(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude component is real positive.

    ``vectors`` has shape ``(..., dim, n)`` with eigenvectors as columns.
    """
    idx = np.argmax(np.abs(vectors), axis=-2)
    pivot = np.take_along_axis(vectors, idx[..., None, :], axis=-2)
    phase = pivot / np.abs(pivot)
    return vectors * np.conj(phase)


def eigensystem(h: np.ndarray, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and gauge-fixed orthonormal eigenvectors.

    Parameters
    ----------
    h : ndarray, shape (..., dim, dim)
        Hermitian matrix or stack of them.
    check : bool
        Validate Hermiticity first.

    Returns
    -------
    values : ndarray, shape (..., dim)
    vectors : ndarray, shape (..., dim, dim)
        ``vectors[..., :, n]`` is the eigenvector for ``values[..., n]``.
    """
    h = np.asarray(h, dtype=complex)
    if check:
        check_hermitian(h)
    values, vectors = np.linalg.eigh(h)
    return values, fix_gauge(vectors)


def unitary_exp(h: np.ndarray, dt: float) -> np.ndarray:
    """``exp(-i h dt)`` for Hermitian ``h`` via its spectral decomposition."""
    values, vectors = np.linalg.eigh(h)
    phases = np.exp(-1j * values * dt)
    return (vectors * phases[..., None, :]) @ dagger(vectors)
