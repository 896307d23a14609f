"""Independent reference computations used by tests and ``hpqfim verify``.

Nothing here is on the production path. The SLD oracle works with complex
2x2 density matrices and finite differences, so it shares no code with the
closed-form Bloch metric it checks.
"""
import math

import numpy as np

from . import models, states


def fd_jacobian(model, theta_I, theta_N, h=1e-6):
    """Central-difference Bloch Jacobian ``(3, d_I + d_N)``."""
    ti = np.atleast_1d(np.asarray(theta_I, dtype=float))
    tn = np.atleast_1d(np.asarray(theta_N, dtype=float))
    theta = np.concatenate([ti, tn])
    cols = []
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = h
        plus, minus = theta + e, theta - e
        sp = models.bloch(model, models.point(model, plus[:ti.size], plus[ti.size:]))
        sm = models.bloch(model, models.point(model, minus[:ti.size], minus[ti.size:]))
        cols.append((sp - sm) / (2 * h))
    return np.stack(cols, axis=1)


def sld_qfim(model, theta_I, theta_N, h=1e-6):
    """SLD QFIM from ``2 d_k rho = L_k rho + rho L_k`` solved in the eigenbasis of ``rho``."""
    ti = np.atleast_1d(np.asarray(theta_I, dtype=float))
    tn = np.atleast_1d(np.asarray(theta_N, dtype=float))
    theta = np.concatenate([ti, tn])

    def rho_at(t):
        s = models.bloch(model, models.point(model, t[:ti.size], t[ti.size:]))
        return states.density_operator(s)

    rho = rho_at(theta)
    lam, vec = np.linalg.eigh(rho)
    slds = []
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = h
        drho = (rho_at(theta + e) - rho_at(theta - e)) / (2 * h)
        d_eig = vec.conj().T @ drho @ vec
        denom = lam[:, None] + lam[None, :]
        l_eig = np.where(denom > 1e-14, 2.0 * d_eig / np.where(denom > 1e-14, denom, 1.0), 0.0)
        slds.append(vec @ l_eig @ vec.conj().T)
    n = theta.size
    out = np.empty((n, n))
    for a in range(n):
        for b in range(n):
            anti = slds[a] @ slds[b] + slds[b] @ slds[a]
            out[a, b] = 0.5 * np.trace(rho @ anti).real
    return out


def sld_qfim_bloch(s, frame):
    """Same oracle for an explicit Bloch vector and tangent frame (exact derivatives)."""
    s = np.asarray(s, dtype=float)
    frame = np.asarray(frame, dtype=float)
    rho = states.density_operator(s)
    lam, vec = np.linalg.eigh(rho)
    slds = []
    for k in range(frame.shape[1]):
        drho = 0.5 * np.einsum("a,aij->ij", frame[:, k], states.PAULI)
        d_eig = vec.conj().T @ drho @ vec
        denom = lam[:, None] + lam[None, :]
        slds.append(vec @ (2.0 * d_eig / denom) @ vec.conj().T)
    n = frame.shape[1]
    return np.array([[0.5 * np.trace(rho @ (slds[a] @ slds[b] + slds[b] @ slds[a])).real
                      for b in range(n)] for a in range(n)])


def bessel_i(order, x, terms=80):
    """Modified Bessel function of the first kind by its power series."""
    total = 0.0
    for k in range(terms):
        total += (0.5 * x) ** (2 * k + order) / (math.factorial(k) * math.gamma(k + order + 1))
    return total


def von_mises_fisher(kappa, period=2 * math.pi):
    omega = 2 * math.pi / period
    return omega ** 2 * kappa * bessel_i(1, kappa) / bessel_i(0, kappa)


def random_spd(rng, n, cond=1e3):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    w = np.exp(rng.uniform(0.0, math.log(cond), size=n))
    return (q * w) @ q.T


def cofactor_inverse(a):
    """Inverse by adjugate / determinant (Laplace expansion); fine for n <= 4."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]

    def det(m):
        if m.shape[0] == 1:
            return m[0, 0]
        return sum((-1) ** j * m[0, j] * det(np.delete(np.delete(m, 0, 0), j, 1))
                   for j in range(m.shape[0]))

    d = det(a)
    adj = np.empty_like(a)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(a, i, 0), j, 1)
            adj[j, i] = (-1) ** (i + j) * (det(minor) if n > 1 else 1.0)
    return adj / d
