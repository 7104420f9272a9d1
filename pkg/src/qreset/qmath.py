"""Closed-form 2x2 Hermitian algebra and entropic functionals for a single qubit.

States are plain ``numpy`` arrays: a density matrix has shape ``(2, 2)`` and a
Bloch vector shape ``(3,)``. Functions that say so also accept a leading batch
axis. All entropies are in nats (k_B = 1).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

IDENTITY = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])

LN2 = float(np.log(2.0))

STATE_ATOL = 1e-12
BLOCH_ATOL = 1e-9


class InvalidStateError(ValueError):
    """Raised when a matrix or Bloch vector is not a physical qubit state."""


class Spectrum2(NamedTuple):
    """Eigen-decomposition of a 2x2 Hermitian matrix.

    ``values`` is sorted descending; ``vectors[:, k]`` belongs to ``values[k]``.
    """

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + np.swapaxes(m, -1, -2).conj())


def validate_state(rho, atol: float = STATE_ATOL) -> np.ndarray:
    """Return ``rho`` as a complex array after checking the density-matrix invariants."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (2, 2):
        raise InvalidStateError(f"expected a 2x2 matrix, got shape {rho.shape}")
    herm_err = np.max(np.abs(rho - np.swapaxes(rho, -1, -2).conj()))
    if herm_err > atol:
        raise InvalidStateError(f"not Hermitian (max deviation {herm_err:.3g})")
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    if np.any(np.abs(tr - 1.0) > atol):
        raise InvalidStateError(f"trace {tr} differs from 1")
    lam_min = eigvalsh2(rho)[..., 1]
    if np.any(lam_min < -atol):
        raise InvalidStateError(f"negative eigenvalue {np.min(lam_min):.3g}")
    return rho


def bloch_to_density(a) -> np.ndarray:
    """rho = (I + a.sigma) / 2. Accepts ``(..., 3)`` input."""
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != 3:
        raise InvalidStateError(f"Bloch vector must have 3 components, got shape {a.shape}")
    norm = np.linalg.norm(a, axis=-1)
    if np.any(norm > 1.0 + BLOCH_ATOL):
        raise InvalidStateError(f"Bloch vector length {np.max(norm):.12g} exceeds 1")
    return 0.5 * (IDENTITY + np.einsum("...i,ijk->...jk", a, PAULIS))


def density_to_bloch(rho) -> np.ndarray:
    """a_i = tr(rho sigma_i). Accepts ``(..., 2, 2)`` input."""
    rho = np.asarray(rho, dtype=complex)
    return np.einsum("...jk,ikj->...i", rho, PAULIS).real


def eigvalsh2(m) -> np.ndarray:
    """Eigenvalues (descending) of Hermitian ``(..., 2, 2)`` matrices."""
    m = np.asarray(m)
    a = m[..., 0, 0].real
    d = m[..., 1, 1].real
    b = m[..., 0, 1]
    half_tr = 0.5 * (a + d)
    radius = np.hypot(0.5 * (a - d), np.abs(b))
    # The eigenvalue of larger magnitude first, the other from the determinant,
    # so a tiny eigenvalue of a nearly pure state keeps its relative precision.
    big = half_tr + np.copysign(radius, half_tr)
    det = a * d - np.abs(b) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, det / np.where(big != 0, big, 1.0), 0.0)
    return np.sort(np.stack([big, small], axis=-1), axis=-1)[..., ::-1]


def eig_hermitian(m, atol: float = 1e-12) -> Spectrum2:
    """Closed-form eigen-decomposition of one 2x2 Hermitian matrix."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.conj().T)) > atol * scale:
        raise ValueError("matrix is not Hermitian")
    a, d = m[0, 0].real, m[1, 1].real
    b = m[0, 1]
    values = eigvalsh2(m)
    radius = 0.5 * (values[0] - values[1])
    if radius <= 1e-15 * scale:
        return Spectrum2(values, np.eye(2, dtype=complex))
    # The top eigenvector is parallel to the Bloch-like direction (a-d, 2b).
    # Pick the numerically larger of the two equivalent column choices.
    if a >= d:
        v = np.array([a - d + 2 * radius, 2 * np.conj(b)], dtype=complex)
    else:
        v = np.array([2 * b, d - a + 2 * radius], dtype=complex)
    v /= np.linalg.norm(v)
    w = np.array([-np.conj(v[1]), np.conj(v[0])])
    return Spectrum2(values, np.column_stack([v, w]))


def matrix_function(m, func) -> np.ndarray:
    """Apply a scalar function to a 2x2 Hermitian matrix through its spectrum."""
    spectrum = eig_hermitian(m)
    return (spectrum.vectors * func(spectrum.values)) @ spectrum.vectors.conj().T


def _xlogx(p) -> np.ndarray:
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def binary_entropy(length) -> np.ndarray | float:
    """Entropy of a qubit whose Bloch vector has the given length."""
    a = np.clip(np.asarray(length, dtype=float), 0.0, 1.0)
    s = -_xlogx(0.5 * (1 + a)) - _xlogx(0.5 * (1 - a))
    return float(s) if s.ndim == 0 else s


def von_neumann_entropy(rho) -> np.ndarray | float:
    """-tr(rho ln rho) from the closed-form spectrum; batched over leading axes."""
    lam = eigvalsh2(rho)
    if np.any(lam < -STATE_ATOL):
        raise InvalidStateError(f"negative eigenvalue {np.min(lam):.3g}")
    s = -_xlogx(lam).sum(axis=-1)
    return float(s) if s.ndim == 0 else s


def relative_entropy(rho, sigma, atol: float = STATE_ATOL) -> float:
    """Quantum relative entropy D[rho || sigma] = tr(rho ln rho) - tr(rho ln sigma).

    Returns ``inf`` when the support of ``rho`` is not contained in that of ``sigma``.
    """
    rho = np.asarray(rho, dtype=complex)
    spectrum = eig_hermitian(sigma)
    # Weight of rho on each eigenvector of sigma.
    weights = np.einsum("ik,ij,jk->k", spectrum.vectors.conj(), rho, spectrum.vectors).real
    cross = 0.0
    for lam, w in zip(spectrum.values, weights):
        if lam <= atol:
            if w > atol:
                return float("inf")
            continue
        cross += w * np.log(lam)
    d = -von_neumann_entropy(rho) - cross
    return max(float(d), 0.0)


def trace_distance(rho, sigma) -> np.ndarray | float:
    """Half the trace norm of rho - sigma; batched over leading axes."""
    diff = np.asarray(rho, dtype=complex) - np.asarray(sigma, dtype=complex)
    t = 0.5 * np.abs(eigvalsh2(hermitian_part(diff))).sum(axis=-1)
    return float(t) if t.ndim == 0 else t


def eigenbasis(alpha, atol: float = 1e-12) -> np.ndarray:
    """Eigenbasis of ``alpha``; the computational basis when ``alpha`` is degenerate."""
    spectrum = eig_hermitian(alpha)
    if spectrum.values[0] - spectrum.values[1] <= atol:
        return np.eye(2, dtype=complex)
    return spectrum.vectors


def coherence_decomposition(rho0, alpha0) -> tuple[float, float]:
    """Split D[rho0 || alpha0] into a classical KL part and the relative entropy of coherence.

    Both pieces are measured in the eigenbasis of ``alpha0``. The KL term is
    ``inf`` when ``alpha0`` is rank deficient on a direction ``rho0`` populates.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    alpha0 = np.asarray(alpha0, dtype=complex)
    basis = eigenbasis(alpha0)
    p = np.einsum("ik,ij,jk->k", basis.conj(), rho0, basis).real
    q = np.einsum("ik,ij,jk->k", basis.conj(), alpha0, basis).real
    p = np.clip(p, 0.0, 1.0)
    q = np.clip(q, 0.0, 1.0)
    kl = 0.0
    for pk, qk in zip(p, q):
        if pk <= 0.0:
            continue
        if qk <= 0.0:
            kl = float("inf")
            break
        kl += pk * np.log(pk / qk)
    s_dephased = float(-_xlogx(p).sum())
    # S(dephased) <= ln 2 and dephasing never lowers entropy; clip roundoff.
    coherence = float(np.clip(s_dephased - von_neumann_entropy(rho0), 0.0, LN2))
    return max(float(kl), 0.0), coherence
