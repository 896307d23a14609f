"""Qubit states in Bloch form and their SLD quantum Fisher information.

A Bloch vector is a length-3 array ``s`` with ``rho = (I + s . sigma) / 2``.
A tangent frame is a ``(3, k)`` array whose columns are the derivatives of
``s`` with respect to the ``k`` model parameters, interest parameters first.

For a mixed qubit the SLD metric has the closed form

    J_ij = ds_i . ds_j + (s . ds_i)(s . ds_j) / (1 - |s|^2)

which is what ``qfim_bloch`` evaluates. Complex 2x2 matrices only appear in
``density_operator``, kept for cross-checks.
"""
import math

import numpy as np

from . import kernels
from .errors import DimMismatch, NonPhysical, PureStateBoundary
from .matlib import sym

PHYSICAL_ATOL = 1e-12
MIXED_MARGIN = 1e-9

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def bloch_vec(s):
    v = np.asarray(s, dtype=float)
    if v.shape != (3,):
        raise DimMismatch(f"Bloch vector must have 3 components, got shape {v.shape}")
    return v


def check_physical(s):
    v = bloch_vec(s)
    norm = float(np.linalg.norm(v))
    if norm > 1.0 + PHYSICAL_ATOL:
        raise NonPhysical(f"|s| = {norm:.15g} > 1")
    return v


def density_matrix(s):
    """``rho`` as the real quadruple ``(a, b_re, b_im, d)`` with ``rho = [[a, b], [b*, d]]``."""
    x, y, z = check_physical(s)
    return (0.5 * (1.0 + z), 0.5 * x, -0.5 * y, 0.5 * (1.0 - z))


def density_operator(s):
    """Complex 2x2 density matrix."""
    a, b_re, b_im, d = density_matrix(s)
    b = complex(b_re, b_im)
    return np.array([[a, b], [b.conjugate(), d]], dtype=complex)


def bloch_from_operator(rho):
    """Inverse of ``density_operator``: ``s_k = tr(rho sigma_k)``."""
    rho = np.asarray(rho, dtype=complex)
    return np.real(np.einsum("ij,kji->k", rho, PAULI))


def eigenvalues(s):
    r = float(np.linalg.norm(check_physical(s)))
    return np.array([0.5 * (1.0 - r), 0.5 * (1.0 + r)])


def von_neumann_entropy(s):
    """Entropy in nats; the spectrum is ``(1 +- |s|) / 2``."""
    total = 0.0
    for lam in eigenvalues(s):
        if lam > 0.0:
            total -= lam * math.log(lam)
    return total


def _frame(frame):
    f = np.asarray(frame, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    if f.ndim != 2 or f.shape[0] != 3 or f.shape[1] < 1:
        raise DimMismatch(f"tangent frame must have shape (3, k), got {f.shape}")
    return f


def qfim_bloch(s, frame):
    s = check_physical(s)
    f = _frame(frame)
    norm = float(np.linalg.norm(s))
    if norm >= 1.0 - MIXED_MARGIN:
        raise PureStateBoundary(f"|s| = {norm:.15g} is at the pure-state boundary")
    out = kernels.qfim_bloch_batch(np.ascontiguousarray(s[None, :]),
                                   np.ascontiguousarray(f[None, :, :]))
    return sym(out[0], check=False)


def qfim_bloch_batch(s, frames):
    """Stacked version: ``s`` is ``(n, 3)``, ``frames`` is ``(n, 3, k)``; returns ``(n, k, k)``."""
    s = np.ascontiguousarray(s, dtype=float)
    frames = np.ascontiguousarray(frames, dtype=float)
    if s.ndim != 2 or s.shape[1] != 3 or frames.shape[:2] != s.shape:
        raise DimMismatch(f"incompatible shapes {s.shape} and {frames.shape}")
    norms = np.sqrt(np.einsum("na,na->n", s, s))
    if np.any(norms > 1.0 + PHYSICAL_ATOL):
        raise NonPhysical(f"|s| up to {norms.max():.15g} > 1")
    if np.any(norms >= 1.0 - MIXED_MARGIN):
        raise PureStateBoundary(f"|s| up to {norms.max():.15g} at the pure-state boundary")
    return kernels.qfim_bloch_batch(s, frames)
