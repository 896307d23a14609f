"""Prior-averaged information, the hybrid partial QFIM, and its surrogates.

For a model with interest block ``I`` and nuisance block ``N``:

* ``averaged_blocks``  E_pi[J] split into blocks
* ``hpqfim``           E[J_II] - E[J_IN] (E[J_NN] + J_pi)^{-1} E[J_NI]
* ``surrogates``       (E_pi[J_I|N], E_pi[J_II]), which bracket ``hpqfim``
* ``risk_lower_bound`` Tr[W hpqfim^{-1}], or ``inf`` when ``hpqfim`` is singular

Inverse forms of singular information matrices are represented by ``None``
(matrices) and ``math.inf`` (traced scalars).
"""
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import models, priors
from .errors import DimMismatch, SingularBlock
from .matlib import (PSD_TOL, SINGULAR_TOL, BlockSym, Ordering, inv_spd, is_singular,
                     min_eig, psd_gap, sym)
from . import kernels

BOUNDARY_SHIFT = 1e-9

FLAG_L_INF = "L_inf"
FLAG_M_INF = "M_inf"
FLAG_U_INF = "U_inf"
FLAG_PINV = "pinv_low"


def weight_matrix(w, d_i=None):
    """Validate a weight matrix (SPD). ``None`` means identity of size ``d_i``."""
    if w is None:
        if d_i is None:
            raise ValueError("need d_i for the default identity weight")
        return sym(np.eye(d_i))
    w = sym(w)
    if d_i is not None and w.shape[0] != d_i:
        raise DimMismatch(f"weight is {w.shape[0]}x{w.shape[0]}, interest dimension is {d_i}")
    if min_eig(w) <= 0 or is_singular(w):
        raise ValueError("weight matrix must be positive definite")
    return w


def nuisance_nodes(model, rule):
    """Rule nodes as model nuisance values."""
    return clip_to_domain(model, rule.nodes)


def clip_to_domain(model, values):
    """Wrap periodic values; nudge values sitting on an excluded endpoint inside."""
    dom = model.domain_N[0]
    x = np.array(dom.wrap(values), dtype=float)
    step = BOUNDARY_SHIFT * dom.length
    if dom.lo_open:
        x = np.where(x <= dom.lo, dom.lo + step, x)
    if dom.hi_open:
        x = np.where(x >= dom.hi, dom.hi - step, x)
    return x


def node_qfims(model, prior, rule, theta_I):
    return models.qfim_batch(model, theta_I, nuisance_nodes(model, rule))


def _avg(prior, rule, stack):
    return priors.expect_values(prior, rule, stack)


def averaged_blocks(model, prior, rule, theta_I) -> BlockSym:
    rule = rule or prior.default_rule()
    mean = _avg(prior, rule, node_qfims(model, prior, rule, theta_I))
    return BlockSym.split(sym(mean, check=False), model.d_I)


def _scale(avg: BlockSym):
    return max(float(np.max(np.abs(avg.ii))), float(np.max(np.abs(avg.in_))),
               float(np.max(np.abs(avg.nn))))


def hpqfim(avg: BlockSym, j_pi):
    """Hybrid partial QFIM from averaged blocks and the prior Fisher information."""
    j_pi = sym(j_pi)
    if j_pi.shape != avg.nn.shape:
        raise DimMismatch("prior Fisher information must match the nuisance block")
    scale = max(_scale(avg), float(np.max(np.abs(j_pi))))
    inv = inv_spd(avg.nn + j_pi, scale=scale)
    return sym(avg.ii - avg.in_ @ inv @ avg.in_.T, check=False)


def g_matrix(avg: BlockSym, j_pi):
    """Prior-augmented information ``E_pi[J] + diag(0, J_pi)``, for cross-checks."""
    return BlockSym(avg.ii, avg.in_, sym(avg.nn + sym(j_pi), check=False))


def surrogates(model, prior, rule, theta_I, *, with_flag=False):
    """``(low, high)`` = (E_pi[pointwise Schur complement], E_pi[J_II]).

    Nodes with a singular nuisance block use the pseudo-inverse; pass
    ``with_flag=True`` to also get whether that happened.
    """
    rule = rule or prior.default_rule()
    stack = np.ascontiguousarray(node_qfims(model, prior, rule, theta_I))
    schur, pinv_used = kernels.schur_batch(stack, model.d_I, SINGULAR_TOL)
    low = sym(_avg(prior, rule, schur), check=False)
    high = sym(_avg(prior, rule, stack[:, :model.d_I, :model.d_I]), check=False)
    if with_flag:
        return low, high, bool(np.any(pinv_used))
    return low, high


def inverse_or_none(a, scale=None):
    if is_singular(a, scale=scale):
        return None
    return inv_spd(a, scale=scale)


def risk_lower_bound(h, w, scale=None):
    """``Tr[w h^{-1}]``; ``inf`` when ``h`` is singular."""
    h = sym(h)
    w = weight_matrix(w, h.shape[0])
    hinv = inverse_or_none(h, scale)
    if hinv is None:
        return math.inf
    return float(np.trace(w @ hinv))


def _trace_or_inf(w, m):
    return math.inf if m is None else float(np.trace(w @ m))


@dataclass(frozen=True)
class HybridBoundReport:
    theta_I: Tuple[float, ...]
    avg_blocks: BlockSym
    j_pi: np.ndarray
    hpqfim: np.ndarray
    surrogate_low: np.ndarray
    surrogate_high: np.ndarray
    inv_L: Optional[np.ndarray]
    inv_M: Optional[np.ndarray]
    inv_U: Optional[np.ndarray]
    weight: np.ndarray
    risk_bound: float
    flags: Tuple[str, ...] = ()

    def traced(self):
        """``(L, M, U)`` as ``Tr[W inv]`` scalars, ``inf`` for singular information."""
        return (_trace_or_inf(self.weight, self.inv_L), _trace_or_inf(self.weight, self.inv_M),
                _trace_or_inf(self.weight, self.inv_U))


def bound_report(model, prior, theta_I, rule=None, weight=None) -> HybridBoundReport:
    rule = rule or prior.default_rule()
    ti = models.check_interest(model, theta_I)
    w = weight_matrix(weight, model.d_I)
    avg = averaged_blocks(model, prior, rule, ti)
    j_pi = priors.prior_fisher(prior, rule)
    h = hpqfim(avg, j_pi)
    low, high, pinv = surrogates(model, prior, rule, ti, with_flag=True)
    scale = _scale(avg)
    inv_l = inverse_or_none(high, scale)
    inv_m = inverse_or_none(h, scale)
    inv_u = inverse_or_none(low, scale)
    flags = []
    if inv_l is None:
        flags.append(FLAG_L_INF)
    if inv_m is None:
        flags.append(FLAG_M_INF)
    if inv_u is None:
        flags.append(FLAG_U_INF)
    if pinv:
        flags.append(FLAG_PINV)
    risk = _trace_or_inf(w, inv_m)
    return HybridBoundReport(tuple(float(x) for x in ti), avg, j_pi, h, low, high,
                             inv_l, inv_m, inv_u, w, risk, tuple(flags))


def bracketing(report: HybridBoundReport, tol=PSD_TOL):
    """Both halves of ``E[J_II] >= hpqfim >= E[J_I|N]`` as ``Ordering`` verdicts."""
    return (psd_gap(report.surrogate_high, report.hpqfim, tol),
            psd_gap(report.hpqfim, report.surrogate_low, tol))


def extended_geq(a, b, tol=PSD_TOL):
    """``a >= b`` in the Loewner order where ``None`` stands for an infinite matrix."""
    if a is None:
        return Ordering(True, math.inf)
    if b is None:
        return Ordering(False, -math.inf)
    return psd_gap(a, b, tol)


def inverse_ordering(report: HybridBoundReport, tol=PSD_TOL):
    """``inv_U >= inv_M >= inv_L`` in the extended Loewner order."""
    return (extended_geq(report.inv_U, report.inv_M, tol),
            extended_geq(report.inv_M, report.inv_L, tol))


@dataclass(frozen=True)
class ConcentrationReport:
    hpqfims: Tuple[np.ndarray, ...]
    limit: np.ndarray
    distances: Tuple[float, ...]
    monotone: bool
    converging: bool
    witnesses: Tuple[float, ...]


def prior_concentration_limit_check(model, prior_family: Sequence, theta_I, tol=PSD_TOL,
                                    rule_nodes=None) -> ConcentrationReport:
    """Track ``hpqfim`` along priors ordered by increasing concentration.

    ``monotone`` is the Loewner nondecrease between consecutive members;
    ``converging`` means the distance to ``J_II`` at the last member's centre
    never increases along the family.
    """
    if len(prior_family) < 2:
        raise ValueError("need at least two priors")
    ti = models.check_interest(model, theta_I)
    hs = []
    for prior in prior_family:
        rule = prior.default_rule(rule_nodes)
        hs.append(hpqfim(averaged_blocks(model, prior, rule, ti), priors.prior_fisher(prior, rule)))
    centre = prior_family[-1].location()
    limit = models.qfim(model, models.point(model, ti, [centre])).ii
    dists = tuple(float(np.linalg.norm(h - limit)) for h in hs)
    steps = [psd_gap(b, a, tol) for a, b in zip(hs, hs[1:])]
    converging = all(d1 <= d0 + tol for d0, d1 in zip(dists, dists[1:]))
    return ConcentrationReport(tuple(hs), limit, dists, all(s.holds for s in steps), converging,
                               tuple(s.min_eig for s in steps))


__all__ = [
    "HybridBoundReport", "ConcentrationReport", "SingularBlock", "averaged_blocks", "hpqfim",
    "surrogates", "risk_lower_bound", "bound_report", "bracketing", "inverse_ordering",
    "prior_concentration_limit_check", "g_matrix", "weight_matrix", "node_qfims",
]
