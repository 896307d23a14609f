"""Hot numerical kernels, each in two flavours.

``*_loop`` functions are written as explicit scalar loops and compiled with
numba when it is available; ``*_vec`` functions are the pure-numpy
equivalents. The module-level names (``jacobi_eigh``, ``qfim_bloch_batch``,
...) point at whichever flavour ``hpqfim._accel`` selected at import time.

Kernels do no validation; callers in ``matlib``/``states``/``measure`` own
the error semantics.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

MAX_SWEEPS = 60


# --------------------------------------------------------------------------
# Symmetric eigensolver (cyclic Jacobi)
# --------------------------------------------------------------------------

def _jacobi_eigh_loop(a_in):
    n = a_in.shape[0]
    a = a_in.copy()
    v = np.eye(n)
    for _ in range(MAX_SWEEPS):
        off = 0.0
        tot = 0.0
        for i in range(n):
            for j in range(n):
                tot += a[i, j] * a[i, j]
                if i != j:
                    off += a[i, j] * a[i, j]
        if off == 0.0 or off <= 1e-32 * tot:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    order = np.argsort(w)
    w_sorted = np.empty(n)
    v_sorted = np.empty((n, n))
    for j in range(n):
        w_sorted[j] = w[order[j]]
        for k in range(n):
            v_sorted[k, j] = v[k, order[j]]
    return w_sorted, v_sorted


def _jacobi_eigh_vec(a_in):
    n = a_in.shape[0]
    a = np.array(a_in, dtype=float)
    v = np.eye(n)
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(MAX_SWEEPS):
        off = float(np.sum(a[offmask] ** 2))
        if off == 0.0 or off <= 1e-32 * float(np.sum(a * a)):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0)), theta)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                a[:, [p, q]] = a[:, [p, q]] @ rot
                a[[p, q], :] = rot.T @ a[[p, q], :]
                a[p, q] = a[q, p] = 0.0
                v[:, [p, q]] = v[:, [p, q]] @ rot
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


jacobi_eigh_nb = njit(_jacobi_eigh_loop)


# --------------------------------------------------------------------------
# Batched SLD metric on Bloch vectors
# --------------------------------------------------------------------------

def _qfim_bloch_batch_loop(s, ds):
    n = s.shape[0]
    k = ds.shape[2]
    out = np.empty((n, k, k))
    u = np.empty(k)
    for m in range(n):
        norm2 = s[m, 0] ** 2 + s[m, 1] ** 2 + s[m, 2] ** 2
        inv = 1.0 / (1.0 - norm2)
        for i in range(k):
            u[i] = s[m, 0] * ds[m, 0, i] + s[m, 1] * ds[m, 1, i] + s[m, 2] * ds[m, 2, i]
        for i in range(k):
            for j in range(i, k):
                g = ds[m, 0, i] * ds[m, 0, j] + ds[m, 1, i] * ds[m, 1, j] + ds[m, 2, i] * ds[m, 2, j]
                val = g + u[i] * u[j] * inv
                out[m, i, j] = val
                out[m, j, i] = val
    return out


def _qfim_bloch_batch_vec(s, ds):
    norm2 = np.einsum("na,na->n", s, s)
    g = np.einsum("nai,naj->nij", ds, ds)
    u = np.einsum("na,nai->ni", s, ds)
    return g + u[:, :, None] * u[:, None, :] / (1.0 - norm2)[:, None, None]


# --------------------------------------------------------------------------
# Classical Fisher information of a finite qubit POVM
# --------------------------------------------------------------------------

def _classical_fim_batch_loop(a, m, s, ds, floor):
    """Return (fim[n,k,k], bad[n]); bad marks a genuine zero-probability outcome."""
    n = s.shape[0]
    k = ds.shape[2]
    nout = a.shape[0]
    out = np.zeros((n, k, k))
    bad = np.zeros(n, dtype=np.bool_)
    dp = np.empty(k)
    for q in range(n):
        for x in range(nout):
            p = a[x] + m[x, 0] * s[q, 0] + m[x, 1] * s[q, 1] + m[x, 2] * s[q, 2]
            big = 0.0
            for i in range(k):
                dp[i] = m[x, 0] * ds[q, 0, i] + m[x, 1] * ds[q, 1, i] + m[x, 2] * ds[q, 2, i]
                if abs(dp[i]) > big:
                    big = abs(dp[i])
            if p <= floor:
                if big > 1e-12:
                    bad[q] = True
                continue
            for i in range(k):
                for j in range(i, k):
                    val = dp[i] * dp[j] / p
                    out[q, i, j] += val
                    if j != i:
                        out[q, j, i] += val
    return out, bad


def _classical_fim_batch_vec(a, m, s, ds, floor):
    p = a[None, :] + s @ m.T
    dp = np.einsum("xa,nai->nxi", m, ds)
    dead = p <= floor
    bad = np.any(dead & (np.max(np.abs(dp), axis=2) > 1e-12), axis=1)
    safe = np.where(dead, 1.0, p)
    w = np.where(dead, 0.0, 1.0 / safe)
    out = np.einsum("nx,nxi,nxj->nij", w, dp, dp)
    return out, bad


# --------------------------------------------------------------------------
# Pointwise Schur complements over a stack of block matrices
# --------------------------------------------------------------------------

def _schur_batch_loop(j, d_i, singular_tol):
    """Return (schur[n,d_i,d_i], pinv_used[n])."""
    n = j.shape[0]
    k = j.shape[1]
    d_n = k - d_i
    out = np.empty((n, d_i, d_i))
    flag = np.zeros(n, dtype=np.bool_)
    for q in range(n):
        scale = 0.0
        for r in range(k):
            for c in range(k):
                if abs(j[q, r, c]) > scale:
                    scale = abs(j[q, r, c])
        cut = singular_tol * scale
        inv_nn = np.zeros((d_n, d_n))
        if d_n == 1:
            if j[q, d_i, d_i] > cut:
                inv_nn[0, 0] = 1.0 / j[q, d_i, d_i]
            else:
                flag[q] = True
        else:
            nn = np.empty((d_n, d_n))
            for r in range(d_n):
                for c in range(d_n):
                    nn[r, c] = j[q, d_i + r, d_i + c]
            w, v = jacobi_eigh_nb(nn)
            for e in range(d_n):
                if w[e] > cut:
                    for r in range(d_n):
                        for c in range(d_n):
                            inv_nn[r, c] += v[r, e] * v[c, e] / w[e]
                else:
                    flag[q] = True
        for r in range(d_i):
            for c in range(r, d_i):
                acc = j[q, r, c]
                for a in range(d_n):
                    for b in range(d_n):
                        acc -= j[q, r, d_i + a] * inv_nn[a, b] * j[q, c, d_i + b]
                out[q, r, c] = acc
                out[q, c, r] = acc
    return out, flag


def _schur_batch_vec(j, d_i, singular_tol):
    n, k, _ = j.shape
    d_n = k - d_i
    scale = np.max(np.abs(j.reshape(n, -1)), axis=1)
    ii = j[:, :d_i, :d_i]
    in_ = j[:, :d_i, d_i:]
    if d_n == 1:
        nn = j[:, -1, -1]
        flag = ~(nn > singular_tol * scale)
        inv = np.where(flag, 0.0, 1.0 / np.where(flag, 1.0, nn))
        out = ii - in_ * inv[:, None, None] * np.swapaxes(in_, 1, 2)
    else:
        out = np.empty((n, d_i, d_i))
        flag = np.zeros(n, dtype=bool)
        for q in range(n):
            w, v = _jacobi_eigh_vec(j[q, d_i:, d_i:])
            keep = w > singular_tol * scale[q]
            flag[q] = not keep.all()
            inv_w = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
            inv_nn = (v * inv_w) @ v.T
            out[q] = ii[q] - in_[q] @ inv_nn @ in_[q].T
    return 0.5 * (out + np.swapaxes(out, 1, 2)), flag


# --------------------------------------------------------------------------
# Categorical sampling by inverse CDF
# --------------------------------------------------------------------------

def _sample_categorical_loop(probs, u):
    n = probs.shape[0]
    k = probs.shape[1]
    idx = np.empty(n, dtype=np.int64)
    for q in range(n):
        acc = 0.0
        chosen = k - 1
        for x in range(k):
            acc += probs[q, x]
            if u[q] < acc:
                chosen = x
                break
        idx[q] = chosen
    return idx


def _sample_categorical_vec(probs, u):
    cdf = np.cumsum(probs, axis=1)
    idx = np.sum(cdf <= u[:, None], axis=1)
    return np.minimum(idx, probs.shape[1] - 1).astype(np.int64)


qfim_bloch_batch_nb = njit(_qfim_bloch_batch_loop)
classical_fim_batch_nb = njit(_classical_fim_batch_loop)
schur_batch_nb = njit(_schur_batch_loop)
sample_categorical_nb = njit(_sample_categorical_loop)

NUMPY = {
    "jacobi_eigh": _jacobi_eigh_vec,
    "qfim_bloch_batch": _qfim_bloch_batch_vec,
    "classical_fim_batch": _classical_fim_batch_vec,
    "schur_batch": _schur_batch_vec,
    "sample_categorical": _sample_categorical_vec,
}
NUMBA = {
    "jacobi_eigh": jacobi_eigh_nb,
    "qfim_bloch_batch": qfim_bloch_batch_nb,
    "classical_fim_batch": classical_fim_batch_nb,
    "schur_batch": schur_batch_nb,
    "sample_categorical": sample_categorical_nb,
}

_active = NUMBA if USE_NUMBA else NUMPY

jacobi_eigh = _active["jacobi_eigh"]
qfim_bloch_batch = _active["qfim_bloch_batch"]
classical_fim_batch = _active["classical_fim_batch"]
schur_batch = _active["schur_batch"]
sample_categorical = _active["sample_categorical"]
