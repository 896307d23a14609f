"""Small dense real symmetric matrix algebra.

Matrices are plain ``numpy`` arrays. ``sym`` validates and freezes them;
everything else accepts anything ``sym`` accepts. Inversion goes through the
Jacobi eigendecomposition in ``kernels`` so that near-singular blocks are
detected the same way everywhere.
"""
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import DimMismatch, NotSymmetric, SingularBlock

MAX_DIM = 8
SYM_ATOL = 1e-12
SINGULAR_TOL = 1e-12
PSD_TOL = 1e-9


def sym(a, *, check=True):
    """Return a read-only symmetric float copy of ``a``.

    Scalars become 1x1 matrices. Asymmetry larger than ``SYM_ATOL`` (scaled
    by the largest entry when that exceeds one) raises ``NotSymmetric``;
    smaller asymmetry is averaged away.
    """
    m = np.array(a, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if not 1 <= n <= MAX_DIM:
        raise DimMismatch(f"dimension {n} outside 1..{MAX_DIM}")
    if check and not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(m))))
    if check and np.max(np.abs(m - m.T)) > SYM_ATOL * scale:
        raise NotSymmetric(f"asymmetry {np.max(np.abs(m - m.T)):.3e} exceeds tolerance")
    m = 0.5 * (m + m.T)
    m.flags.writeable = False
    return m


def rect(a, rows=None, cols=None):
    m = np.array(a, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise DimMismatch(f"expected a 2-d matrix, got shape {m.shape}")
    if (rows is not None and m.shape[0] != rows) or (cols is not None and m.shape[1] != cols):
        raise DimMismatch(f"expected shape ({rows}, {cols}), got {m.shape}")
    m.flags.writeable = False
    return m


def eigh(a):
    """Eigenvalues (ascending) and eigenvectors (columns) of a symmetric matrix."""
    return kernels.jacobi_eigh(np.ascontiguousarray(sym(a), dtype=float))


def eigvalsh(a):
    return eigh(a)[0]


def min_eig(a):
    return float(eigvalsh(a)[0])


def is_psd(a, tol=PSD_TOL):
    return min_eig(a) >= -tol


def _cutoff(w, scale, singular_tol):
    ref = float(np.max(np.abs(w))) if w.size else 0.0
    if scale is not None:
        ref = max(ref, float(scale))
    return singular_tol * ref


def is_singular(a, scale=None, singular_tol=SINGULAR_TOL):
    """True when the smallest eigenvalue is not clearly positive.

    The threshold is ``singular_tol`` times the larger of the spectral radius
    and ``scale``; pass ``scale`` when ``a`` came out of a cancellation so
    that rounding residue is not mistaken for information.
    """
    w = eigvalsh(a)
    return bool(w[0] <= _cutoff(w, scale, singular_tol))


def inv_spd(a, scale=None, singular_tol=SINGULAR_TOL):
    w, v = eigh(a)
    cut = _cutoff(w, scale, singular_tol)
    if w[0] <= cut:
        raise SingularBlock(f"matrix is singular (min eigenvalue {w[0]:.3e})", float(w[0]))
    return sym((v / w) @ v.T, check=False)


def pinv_sym(a, scale=None, singular_tol=SINGULAR_TOL):
    """Pseudo-inverse that drops eigenvalues at or below the singular cutoff."""
    w, v = eigh(a)
    cut = _cutoff(w, scale, singular_tol)
    keep = w > cut
    inv_w = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    return sym((v * inv_w) @ v.T, check=False)


@dataclass(frozen=True)
class BlockSym:
    """Symmetric matrix split into interest (``ii``), cross (``in_``) and nuisance (``nn``) blocks."""

    ii: np.ndarray
    in_: np.ndarray
    nn: np.ndarray

    def __post_init__(self):
        ii = sym(self.ii)
        nn = sym(self.nn)
        in_ = rect(self.in_, ii.shape[0], nn.shape[0])
        if ii.shape[0] + nn.shape[0] > MAX_DIM:
            raise DimMismatch("assembled matrix would exceed the dimension cap")
        object.__setattr__(self, "ii", ii)
        object.__setattr__(self, "nn", nn)
        object.__setattr__(self, "in_", in_)

    @property
    def d_i(self):
        return self.ii.shape[0]

    @property
    def d_n(self):
        return self.nn.shape[0]

    def assemble(self):
        top = np.hstack([self.ii, self.in_])
        bottom = np.hstack([self.in_.T, self.nn])
        return sym(np.vstack([top, bottom]))

    @classmethod
    def split(cls, m, d_i):
        m = sym(m)
        if not 1 <= d_i < m.shape[0]:
            raise DimMismatch(f"cannot split a {m.shape[0]}x{m.shape[0]} matrix at {d_i}")
        return cls(m[:d_i, :d_i], m[:d_i, d_i:], m[d_i:, d_i:])

    def __eq__(self, other):
        if not isinstance(other, BlockSym):
            return NotImplemented
        return (np.array_equal(self.ii, other.ii) and np.array_equal(self.in_, other.in_)
                and np.array_equal(self.nn, other.nn))

    __hash__ = None


def schur_complement(b: BlockSym, singular_tol=SINGULAR_TOL):
    """``ii - in_ nn^{-1} in_^T``; raises ``SingularBlock`` if ``nn`` is not invertible.

    Invertibility of ``nn`` is judged relative to the largest entry of the
    whole block matrix, so a tiny nuisance block next to sizeable interest
    information counts as singular.
    """
    scale = max(float(np.max(np.abs(b.ii))), float(np.max(np.abs(b.in_))),
                float(np.max(np.abs(b.nn))))
    inv_nn = inv_spd(b.nn, scale=scale, singular_tol=singular_tol)
    return sym(b.ii - b.in_ @ inv_nn @ b.in_.T, check=False)


class Ordering(NamedTuple):
    """Loewner comparison verdict with its witness eigenvalue."""

    holds: bool
    min_eig: float
    degenerate: bool = False

    def __bool__(self):
        return self.holds


def psd_gap(a, b, tol=PSD_TOL):
    """Does ``a - b`` have all eigenvalues >= ``-tol``? Returns the minimum either way."""
    a = sym(a)
    b = sym(b)
    if a.shape != b.shape:
        raise DimMismatch(f"cannot compare {a.shape} with {b.shape}")
    lo = min_eig(a - b)
    return Ordering(lo >= -tol, lo)


def block_inverse_identity_check(g: BlockSym, tol=1e-10):
    """Top-left block of ``assemble(g)^{-1}`` equals ``schur_complement(g)^{-1}`` within ``tol``."""
    full_inv = inv_spd(g.assemble())
    lhs = full_inv[:g.d_i, :g.d_i]
    rhs = inv_spd(schur_complement(g))
    return bool(np.max(np.abs(lhs - rhs)) <= tol)


def jensen_schur_check(samples: Sequence, weights, tol=PSD_TOL):
    """Weighted Jensen gap ``E[B^T A^{-1} B] - E[B]^T E[A]^{-1} E[B]`` is PSD.

    ``samples`` is a sequence of ``(A, B)`` pairs with ``A`` SPD (n x n) and
    ``B`` rectangular (n x m).
    """
    w = np.asarray(weights, dtype=float)
    if len(samples) == 0 or w.shape != (len(samples),):
        raise DimMismatch("need one weight per sample")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be a probability vector")
    mats = [(sym(A), rect(B)) for A, B in samples]
    n = mats[0][0].shape[0]
    m = mats[0][1].shape[1]
    lhs = np.zeros((m, m))
    mean_a = np.zeros((n, n))
    mean_b = np.zeros((n, m))
    for wk, (A, B) in zip(w, mats):
        if A.shape != (n, n) or B.shape != (n, m):
            raise DimMismatch("all samples must share shapes")
        lhs += wk * (B.T @ inv_spd(A) @ B)
        mean_a += wk * A
        mean_b += wk * B
    rhs = mean_b.T @ inv_spd(mean_a) @ mean_b
    return psd_gap(sym(lhs, check=False), sym(rhs, check=False), tol)
