"""Nuisance priors, their Fisher information, and quadrature over the nuisance domain.

Expectations are plain weighted sums ``sum_k w_k pi(x_k) f(x_k)`` taken in
node order, so results are bit-stable for a fixed rule. Rules cover the
prior's effective support: the whole domain for periodic full-support
priors (trapezoid), otherwise a Gauss-Legendre rule on the support.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import DomainViolation, QuadratureDivergence
from .matlib import sym
from .models import Interval

log = logging.getLogger(__name__)

DEFAULT_GL_NODES = 64
DEFAULT_TRAPEZOID_NODES = 128
NORMALIZATION_TOL = 1e-8
CONVERGED_RTOL = 1e-8
DIVERGED_RTOL = 1e-4
GAUSS_CUTOFF_SIGMAS = 12.0


class PriorKind(str, Enum):
    UNIFORM = "Uniform"
    TRUNCATED_GAUSSIAN = "TruncatedGaussian"
    VON_MISES = "VonMises"
    RAISED_COSINE = "RaisedCosine"


class Scheme(str, Enum):
    GAUSS_LEGENDRE = "GaussLegendre"
    PERIODIC_TRAPEZOID = "PeriodicTrapezoid"


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    scheme: Scheme
    interval: Interval

    @classmethod
    def build(cls, scheme, interval: Interval, n: int):
        scheme = Scheme(scheme)
        if n < 2:
            raise ValueError("quadrature needs at least two nodes")
        if scheme is Scheme.GAUSS_LEGENDRE:
            x, w = np.polynomial.legendre.leggauss(n)
            half = 0.5 * interval.length
            nodes = interval.lo + half * (x + 1.0)
            weights = half * w
        else:
            h = interval.length / n
            nodes = interval.lo + h * np.arange(n)
            weights = np.full(n, h)
        nodes.flags.writeable = False
        weights.flags.writeable = False
        return cls(nodes, weights, scheme, interval)

    def __len__(self):
        return len(self.nodes)

    def refined(self):
        return QuadratureRule.build(self.scheme, self.interval, 2 * len(self))

    def integrate(self, values):
        """Weighted node sum of ``values`` (shape ``(n, ...)``), in node order."""
        values = np.asarray(values, dtype=float)
        return np.tensordot(self.weights, values, axes=(0, 0))


@dataclass(frozen=True)
class NuisancePrior:
    kind: PriorKind
    domain: Interval
    mu: Optional[float] = None
    sigma: Optional[float] = None
    kappa: Optional[float] = None
    center: Optional[float] = None
    width: Optional[float] = None
    _norm: float = field(init=False, repr=False, compare=False, default=1.0)

    def __post_init__(self):
        object.__setattr__(self, "kind", PriorKind(self.kind))
        kind, dom = self.kind, self.domain
        if kind is PriorKind.TRUNCATED_GAUSSIAN:
            if self.mu is None or self.sigma is None or not self.sigma > 0:
                raise ValueError("TruncatedGaussian needs mu and sigma > 0")
            a = (dom.lo - self.mu) / (math.sqrt(2.0) * self.sigma)
            b = (dom.hi - self.mu) / (math.sqrt(2.0) * self.sigma)
            mass = 0.5 * (math.erf(b) - math.erf(a))
            if mass <= 1e-300:
                raise ValueError("TruncatedGaussian has no mass on its domain")
            object.__setattr__(self, "_norm", self.sigma * math.sqrt(2.0 * math.pi) * mass)
        elif kind is PriorKind.VON_MISES:
            if self.mu is None or self.kappa is None or not 0 <= self.kappa <= 500:
                raise ValueError("VonMises needs mu and 0 <= kappa <= 500")
            object.__setattr__(self, "_norm", 2.0 * math.pi * float(np.i0(self.kappa)) / self._omega)
        elif kind is PriorKind.RAISED_COSINE:
            if self.center is None or self.width is None or not self.width > 0:
                raise ValueError("RaisedCosine needs center and width > 0")
            eps = 1e-12 * max(1.0, dom.length)
            if self.center - self.width < dom.lo - eps or self.center + self.width > dom.hi + eps:
                raise DomainViolation("RaisedCosine support must lie inside the domain")
        else:
            object.__setattr__(self, "_norm", dom.length)
        total = float(self.default_rule().integrate(self.density(self.default_rule().nodes)))
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"{kind.value} prior integrates to {total:.12g}, not 1")

    # -- constructors -----------------------------------------------------

    @classmethod
    def uniform(cls, domain):
        return cls(PriorKind.UNIFORM, domain)

    @classmethod
    def truncated_gaussian(cls, mu, sigma, domain):
        return cls(PriorKind.TRUNCATED_GAUSSIAN, domain, mu=mu, sigma=sigma)

    @classmethod
    def von_mises(cls, mu, kappa, domain):
        """Von Mises density whose period is the domain length."""
        return cls(PriorKind.VON_MISES, domain, mu=mu, kappa=kappa)

    @classmethod
    def raised_cosine(cls, center, width, domain):
        return cls(PriorKind.RAISED_COSINE, domain, center=center, width=width)

    # -- density ----------------------------------------------------------

    @property
    def _omega(self):
        return 2.0 * math.pi / self.domain.length

    @property
    def periodic(self):
        return self.domain.periodic and self.kind in (PriorKind.UNIFORM, PriorKind.VON_MISES)

    def support(self) -> Interval:
        dom = self.domain
        if self.kind is PriorKind.RAISED_COSINE:
            return Interval(max(dom.lo, self.center - self.width), min(dom.hi, self.center + self.width))
        if self.kind is PriorKind.TRUNCATED_GAUSSIAN:
            cut = GAUSS_CUTOFF_SIGMAS * self.sigma
            lo, hi = max(dom.lo, self.mu - cut), min(dom.hi, self.mu + cut)
            if hi > lo:
                return Interval(lo, hi)
        if self.kind is PriorKind.VON_MISES and not dom.periodic and self.kappa > 0:
            # Gaussian-like core of width 1/(omega sqrt(kappa)); mass beyond 12 widths is ~e^-72
            cut = GAUSS_CUTOFF_SIGMAS / (self._omega * math.sqrt(self.kappa))
            lo, hi = max(dom.lo, self.mu - cut), min(dom.hi, self.mu + cut)
            if hi > lo and hi - lo < dom.length:
                return Interval(lo, hi)
        return dom

    def density(self, x):
        x = np.asarray(x, dtype=float)
        kind = self.kind
        if kind is PriorKind.UNIFORM:
            return np.full_like(x, 1.0 / self._norm)
        if kind is PriorKind.TRUNCATED_GAUSSIAN:
            inside = (x >= self.domain.lo) & (x <= self.domain.hi)
            return np.where(inside, np.exp(-0.5 * ((x - self.mu) / self.sigma) ** 2) / self._norm, 0.0)
        if kind is PriorKind.VON_MISES:
            return np.exp(self.kappa * np.cos(self._omega * (x - self.mu))) / self._norm
        u = math.pi * (x - self.center) / self.width
        return np.where(np.abs(u) <= math.pi, (1.0 + np.cos(u)) / (2.0 * self.width), 0.0)

    def dlog_density(self, x):
        """Derivative of ``log pi``; only meaningful inside the support."""
        x = np.asarray(x, dtype=float)
        kind = self.kind
        if kind is PriorKind.UNIFORM:
            return np.zeros_like(x)
        if kind is PriorKind.TRUNCATED_GAUSSIAN:
            return -(x - self.mu) / self.sigma ** 2
        if kind is PriorKind.VON_MISES:
            return -self.kappa * self._omega * np.sin(self._omega * (x - self.mu))
        u = math.pi * (x - self.center) / self.width
        return -(math.pi / self.width) * np.tan(0.5 * u)

    def default_rule(self, n: Optional[int] = None) -> QuadratureRule:
        if self.periodic:
            return QuadratureRule.build(Scheme.PERIODIC_TRAPEZOID, self.domain, n or DEFAULT_TRAPEZOID_NODES)
        return QuadratureRule.build(Scheme.GAUSS_LEGENDRE, self.support(), n or DEFAULT_GL_NODES)

    def location(self):
        """Representative nuisance value: the mode/center for symmetric kinds."""
        kind = self.kind
        if kind is PriorKind.UNIFORM:
            return 0.5 * (self.domain.lo + self.domain.hi)
        if kind is PriorKind.RAISED_COSINE:
            return float(self.center)
        return float(self.domain.wrap(self.mu)) if self.domain.periodic else float(self.mu)

    def mean(self, rule: Optional[QuadratureRule] = None):
        if self.domain.periodic:
            return self.location()
        rule = rule or self.default_rule()
        return float(rule.integrate(rule.nodes * self.density(rule.nodes)))

    def sample(self, rng: np.random.Generator, n: int):
        kind, dom = self.kind, self.domain
        if kind is PriorKind.UNIFORM:
            return rng.uniform(dom.lo, dom.hi, size=n)
        if kind is PriorKind.VON_MISES:
            ang = rng.vonmises(0.0, self.kappa, size=n)
            return dom.wrap(self.mu + ang / self._omega) if dom.periodic else self._fold(self.mu + ang / self._omega)
        sup = self.support()
        peak = float(np.max(self.density(np.linspace(sup.lo, sup.hi, 257))))
        if kind is PriorKind.TRUNCATED_GAUSSIAN:
            peak = max(peak, float(self.density(np.clip(self.mu, sup.lo, sup.hi))))
        out = np.empty(0)
        while out.size < n:
            m = 2 * (n - out.size) + 16
            x = rng.uniform(sup.lo, sup.hi, size=m)
            keep = rng.uniform(0.0, peak, size=m) < self.density(x)
            out = np.concatenate([out, x[keep]])
        return out[:n]

    def _fold(self, x):
        return self.domain.lo + np.mod(x - self.domain.lo, self.domain.length)


def _as_rule(prior, rule):
    return prior.default_rule() if rule is None else rule


def prior_weights(prior: NuisancePrior, rule: Optional[QuadratureRule] = None):
    rule = _as_rule(prior, rule)
    return rule.weights * prior.density(rule.nodes)


def expect_values(prior: NuisancePrior, rule: Optional[QuadratureRule], values):
    """Prior expectation of per-node ``values`` (shape ``(n, ...)``)."""
    rule = _as_rule(prior, rule)
    values = np.asarray(values, dtype=float)
    if values.shape[0] != len(rule):
        raise ValueError("need one value per quadrature node")
    return np.tensordot(prior_weights(prior, rule), values, axes=(0, 0))


def expect(prior: NuisancePrior, rule: Optional[QuadratureRule], f: Callable):
    """``E_pi[f(theta_N)]`` for a matrix-valued ``f`` evaluated node by node."""
    rule = _as_rule(prior, rule)
    values = np.stack([np.asarray(f(float(x)), dtype=float) for x in rule.nodes])
    out = expect_values(prior, rule, values)
    if out.ndim == 2 and out.shape[0] == out.shape[1]:
        return sym(out, check=False)
    return out


def _fisher_once(prior, rule):
    g = prior.dlog_density(rule.nodes)
    return float(rule.integrate(g * g * prior.density(rule.nodes)))


def prior_fisher(prior: NuisancePrior, rule: Optional[QuadratureRule] = None):
    """Fisher information of the prior as a 1x1 matrix.

    The value is recomputed on a rule with twice the nodes; a relative change
    of ``DIVERGED_RTOL`` or more raises ``QuadratureDivergence``.
    """
    if prior.kind is PriorKind.UNIFORM:
        return sym(0.0)
    rule = _as_rule(prior, rule)
    coarse = _fisher_once(prior, rule)
    fine = _fisher_once(prior, rule.refined())
    change = abs(fine - coarse) / max(abs(fine), 1e-300)
    if change >= DIVERGED_RTOL:
        raise QuadratureDivergence(
            f"prior Fisher information changed by {change:.3e} (relative) when doubling nodes")
    if change >= CONVERGED_RTOL:
        log.warning("prior Fisher information only converged to %.1e relative", change)
    return sym(fine)
