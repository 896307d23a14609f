"""Finite qubit POVMs, classical Fisher information, and Monte Carlo risk checks.

A POVM element is stored in Bloch form ``E_k = a_k I + m_k . sigma`` so that
``p_k = tr(rho E_k) = a_k + m_k . s``.
"""
import math
from dataclasses import dataclass
import numpy as np

from . import hybrid, kernels, models, priors, states
from .errors import NonPhysical, SingularBlock, ZeroProbabilityOutcome
from .matlib import PSD_TOL, BlockSym, Ordering, inv_spd, is_singular, psd_gap, sym

POVM_ATOL = 1e-12
PROB_FLOOR = 1e-12
CHUNK = 1 << 15


@dataclass(frozen=True)
class Povm:
    a: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(-1)
        m = np.array(self.m, dtype=float).reshape(-1, 3)
        if a.shape[0] != m.shape[0] or a.shape[0] < 1:
            raise NonPhysical("need one Bloch vector per POVM element")
        if np.any(a + POVM_ATOL < np.linalg.norm(m, axis=1)):
            raise NonPhysical("POVM element is not positive semidefinite")
        if abs(a.sum() - 1.0) > POVM_ATOL or np.max(np.abs(m.sum(axis=0))) > POVM_ATOL:
            raise NonPhysical("POVM elements do not sum to the identity")
        a.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "m", m)

    def __len__(self):
        return self.a.shape[0]

    @classmethod
    def from_elements(cls, elements):
        """From ``(a_k, m_k)`` pairs."""
        elements = list(elements)
        return cls(np.array([e[0] for e in elements], dtype=float),
                   np.array([e[1] for e in elements], dtype=float))

    @classmethod
    def projective(cls, axis):
        n = np.asarray(axis, dtype=float)
        n = n / np.linalg.norm(n)
        return cls(np.array([0.5, 0.5]), np.array([0.5 * n, -0.5 * n]))

    @classmethod
    def trivial(cls, k=2):
        return cls(np.full(k, 1.0 / k), np.zeros((k, 3)))

    @classmethod
    def mixture(cls, parts):
        """Randomised measurement: run ``povm`` with probability ``weight`` for each pair."""
        a = np.concatenate([w * p.a for w, p in parts])
        m = np.concatenate([w * p.m for w, p in parts])
        return cls(a, m)

    @classmethod
    def from_operators(cls, ops):
        ops = [np.asarray(e, dtype=complex) for e in ops]
        a = np.array([0.5 * np.trace(e).real for e in ops])
        m = np.array([0.5 * states.bloch_from_operator(e) for e in ops])
        return cls(a, m)

    def operators(self):
        return [ak * np.eye(2) + np.einsum("k,kij->ij", mk, states.PAULI) for ak, mk in zip(self.a, self.m)]


def outcome_dist(povm: Povm, s):
    s = states.check_physical(s)
    p = povm.a + povm.m @ s
    if np.any(p < -POVM_ATOL):
        raise NonPhysical("negative outcome probability")
    return np.clip(p, 0.0, None)


def _fim_stack(povm, s, d):
    out, bad = kernels.classical_fim_batch(povm.a, np.ascontiguousarray(povm.m),
                                           np.ascontiguousarray(s), np.ascontiguousarray(d),
                                           PROB_FLOOR)
    if np.any(bad):
        raise ZeroProbabilityOutcome("an outcome with zero probability has a nonzero derivative")
    return out


def classical_fim(povm: Povm, model, p) -> BlockSym:
    """Fisher information of the outcome distribution, split into model blocks."""
    s = models.bloch(model, p)
    frame = models.jacobian(model, p)
    out = _fim_stack(povm, s[None, :], frame[None, :, :])
    return BlockSym.split(sym(out[0], check=False), model.d_I)


def data_processing_check(povm: Povm, model, p, tol=PSD_TOL) -> Ordering:
    return psd_gap(models.qfim(model, p).assemble(), classical_fim(povm, model, p).assemble(), tol)


def classical_hybrid_chain(povm: Povm, model, prior, rule, theta_I, tol=PSD_TOL) -> Ordering:
    """``(G(Pi)^{-1})_II >= (G^{-1})_II = hpqfim^{-1}``.

    When either prior-augmented matrix is singular the verdict is returned
    with ``degenerate=True`` (the interest block of the classical side is
    unbounded) instead of raising.
    """
    rule = rule or prior.default_rule()
    ti = models.check_interest(model, theta_I)
    nodes = hybrid.nuisance_nodes(model, rule)
    s, d = models.frame_batch(model, ti, nodes)
    j_pi = priors.prior_fisher(prior, rule)
    quantum = hybrid.g_matrix(hybrid.averaged_blocks(model, prior, rule, ti), j_pi)
    cavg = BlockSym.split(sym(priors.expect_values(prior, rule, _fim_stack(povm, s, d)), check=False),
                          model.d_I)
    classical = hybrid.g_matrix(cavg, j_pi)
    g_q, g_c = quantum.assemble(), classical.assemble()
    scale = float(np.max(np.abs(g_q)))
    if is_singular(g_q, scale=scale) or is_singular(g_c, scale=scale):
        return Ordering(True, math.inf, degenerate=True)
    d_i = model.d_I
    lhs = inv_spd(g_c, scale=scale)[:d_i, :d_i]
    rhs = inv_spd(g_q, scale=scale)[:d_i, :d_i]
    return psd_gap(sym(lhs, check=False), sym(rhs, check=False), tol)


def sample_outcomes(probs, rng: np.random.Generator):
    """One categorical draw per row of ``probs``."""
    probs = np.ascontiguousarray(probs, dtype=float)
    return kernels.sample_categorical(probs, rng.random(probs.shape[0]))


@dataclass(frozen=True)
class EmpiricalRisk:
    risk: float
    std_error: float
    n_samples: int
    anchor: float


def score_estimator_offsets(povm: Povm, model, theta_I, anchor):
    """``theta_hat(x) - theta_I`` for each outcome ``x``.

    The estimator is ``theta_I + [J(Pi)^{-1} grad log p(x)]_I`` with
    everything evaluated at ``(theta_I, anchor)``. It is locally unbiased at
    the anchor only.
    """
    p = models.point(model, theta_I, [anchor])
    s = models.bloch(model, p)
    frame = models.jacobian(model, p)
    fim = _fim_stack(povm, s[None, :], frame[None, :, :])[0]
    probs = outcome_dist(povm, s)
    if np.any(probs <= PROB_FLOOR):
        raise ZeroProbabilityOutcome("estimator needs every outcome to have positive probability")
    scores = (povm.m @ frame) / probs[:, None]
    inv = inv_spd(fim)
    return (scores @ inv)[:, :model.d_I]


def empirical_hybrid_risk(povm: Povm, model, prior, theta_I, n_samples, seed,
                          weight=None, chunk=CHUNK) -> EmpiricalRisk:
    """Monte Carlo estimate of ``Tr[W V]`` for the score estimator.

    Nuisance values are drawn from the prior, outcomes from ``p(x | theta)``.
    Chunk ``i`` uses a Philox stream seeded from ``SeedSequence(seed)``'s
    ``i``-th child, so results are reproducible and extend consistently when
    ``n_samples`` grows.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    ti = models.check_interest(model, theta_I)
    w = hybrid.weight_matrix(weight, model.d_I)
    anchor = prior.mean()
    offsets = score_estimator_offsets(povm, model, ti, anchor)
    loss = np.einsum("xi,ij,xj->x", offsets, w, offsets)
    n_chunks = -(-n_samples // chunk)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    parts = []
    for k, child in enumerate(children):
        size = min(chunk, n_samples - k * chunk)
        rng = np.random.Generator(np.random.Philox(child))
        nuis = hybrid.clip_to_domain(model, prior.sample(rng, size))
        s = models.bloch_batch(model, ti, nuis)
        probs = np.clip(povm.a[None, :] + s @ povm.m.T, 0.0, None)
        parts.append(loss[sample_outcomes(probs, rng)])
    losses = np.concatenate(parts)
    return EmpiricalRisk(float(losses.mean()), float(losses.std(ddof=1) / math.sqrt(n_samples)),
                         int(n_samples), float(anchor))
