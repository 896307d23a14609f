"""Parametric qubit families as Bloch-vector maps with analytic Jacobians.

Four families are built in:

``ExtraRotation``      s = (c cos(a+b), c sin(a+b), z)
``AdditionalSine``     s = (c cos a, c sin(a+b), z)
``AnisotropicShrink``  s = (c cos a, c b sin a, z)
``Direction``          s = r (sin t cos p, sin t sin p, cos t)

with ``a`` the interest angle, ``b`` the nuisance, ``c = r sin(phi)`` and
``z = r cos(phi)`` for fixed ``(r, phi)``. In ``Direction`` the interest
parameters are the polar/azimuthal angles ``(t, p)`` and the radius ``r`` is
the nuisance; parameters are always ordered interest first, so its frame is
``(t, p, r)``. With ``interest_dim=1`` the azimuth is held at ``phi``.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from . import states
from .errors import DomainViolation, NonPhysical
from .matlib import BlockSym

TWO_PI = 2.0 * math.pi


class ModelName(str, Enum):
    EXTRA_ROTATION = "ExtraRotation"
    ADDITIONAL_SINE = "AdditionalSine"
    ANISOTROPIC_SHRINK = "AnisotropicShrink"
    DIRECTION = "Direction"


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False
    periodic: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.hi <= self.lo:
            raise ValueError(f"bad interval [{self.lo}, {self.hi}]")

    @classmethod
    def circle(cls, lo=0.0, hi=TWO_PI):
        return cls(lo, hi, hi_open=True, periodic=True)

    @property
    def length(self):
        return self.hi - self.lo

    def wrap(self, x):
        x = np.asarray(x, dtype=float)
        if not self.periodic:
            return x
        return self.lo + np.mod(x - self.lo, self.length)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        lo_ok = x > self.lo if self.lo_open else x >= self.lo
        hi_ok = x < self.hi if self.hi_open else x <= self.hi
        return lo_ok & hi_ok

    def interior_grid(self, n):
        """``n`` equally spaced points, endpoints excluded by a half-step offset."""
        if n < 1:
            raise ValueError("grid needs at least one point")
        return self.lo + (np.arange(n) + 0.5) * (self.length / n)

    def __str__(self):
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{left}{self.lo:.17g}, {self.hi:.17g}{right}"


@dataclass(frozen=True)
class ModelSpec:
    name: ModelName
    r: float = 0.5
    phi: float = math.pi / 2
    interest_dim: Optional[int] = None
    nuisance_domain: Optional[Interval] = None
    _domains: Tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "name", ModelName(self.name))
        if not 0.0 < self.r < 1.0:
            raise DomainViolation(f"fixed radius r = {self.r} must lie in (0, 1)")
        if not 0.0 <= self.phi < TWO_PI:
            raise DomainViolation(f"fixed angle phi = {self.phi} must lie in [0, 2pi)")
        if self.name is ModelName.ADDITIONAL_SINE:
            lhs = self.r ** 2 * (math.sin(self.phi) ** 2 + 1.0)
            if lhs > 1.0 + 1e-12:
                raise DomainViolation(f"AdditionalSine needs r^2 (sin^2 phi + 1) <= 1, got {lhs:.6g}")
        if self.interest_dim is not None:
            allowed = (1, 2) if self.name is ModelName.DIRECTION else (1,)
            if self.interest_dim not in allowed:
                raise DomainViolation(f"{self.name.value} supports interest_dim in {allowed}")
        if self.nuisance_domain is not None and self.name is not ModelName.ADDITIONAL_SINE:
            raise DomainViolation("only AdditionalSine has a configurable nuisance domain")
        object.__setattr__(self, "_domains", self._make_domains())

    def _make_domains(self):
        circle = Interval.circle()
        if self.name is ModelName.DIRECTION:
            polar = Interval(0.0, math.pi)
            dom_i = (polar, circle) if self.d_I == 2 else (polar,)
            return dom_i, (Interval(0.0, 1.0, lo_open=True, hi_open=True),)
        if self.name is ModelName.ANISOTROPIC_SHRINK:
            return (circle,), (Interval(0.0, 1.0, lo_open=True),)
        if self.name is ModelName.ADDITIONAL_SINE and self.nuisance_domain is not None:
            return (circle,), (self.nuisance_domain,)
        return (circle,), (circle,)

    @property
    def d_I(self):
        if self.name is ModelName.DIRECTION:
            return 2 if self.interest_dim is None else self.interest_dim
        return 1

    @property
    def d_N(self):
        return 1

    @property
    def domain_I(self):
        return self._domains[0]

    @property
    def domain_N(self):
        return self._domains[1]


@dataclass(frozen=True)
class EvalPoint:
    theta_I: Tuple[float, ...]
    theta_N: Tuple[float, ...]


def _as_vec(x, n, what):
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.shape != (n,):
        raise DomainViolation(f"{what} must have {n} component(s), got {v.shape}")
    return v


def _check(domains, values, what):
    out = []
    for k, (dom, x) in enumerate(zip(domains, values)):
        xw = dom.wrap(x)
        if not np.all(np.isfinite(xw)) or not np.all(dom.contains(xw)):
            bad = np.asarray(x)[~dom.contains(xw)] if np.ndim(x) else x
            raise DomainViolation(f"{what}[{k}] = {np.ravel(bad)[:3]} outside {dom}")
        out.append(xw)
    return out


def point(model: ModelSpec, theta_I, theta_N):
    """Validated ``EvalPoint`` with periodic components wrapped."""
    ti = _check(model.domain_I, _as_vec(theta_I, model.d_I, "theta_I"), "theta_I")
    tn = _check(model.domain_N, _as_vec(theta_N, model.d_N, "theta_N"), "theta_N")
    return EvalPoint(tuple(float(x) for x in ti), tuple(float(x) for x in tn))


def check_interest(model: ModelSpec, theta_I):
    ti = _check(model.domain_I, _as_vec(theta_I, model.d_I, "theta_I"), "theta_I")
    return np.array(ti, dtype=float)


def check_nuisance_nodes(model: ModelSpec, nodes):
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim == 1:
        nodes = nodes[:, None]
    if nodes.ndim != 2 or nodes.shape[1] != model.d_N:
        raise DomainViolation(f"nuisance nodes must have shape (n, {model.d_N})")
    cols = _check(model.domain_N, [nodes[:, a] for a in range(model.d_N)], "theta_N")
    return np.stack(cols, axis=1)


def _bloch_and_frame(model, ti, tn):
    """Unchecked evaluation. ``ti`` has shape (d_I,), ``tn`` shape (n, d_N)."""
    n = tn.shape[0]
    s = np.empty((n, 3))
    d = np.zeros((n, 3, model.d_I + model.d_N))
    name = model.name
    if name is ModelName.DIRECTION:
        t = ti[0]
        p = ti[1] if model.d_I == 2 else model.phi
        r = tn[:, 0]
        nhat = np.array([math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)])
        dt = np.array([math.cos(t) * math.cos(p), math.cos(t) * math.sin(p), -math.sin(t)])
        dp = np.array([-math.sin(t) * math.sin(p), math.sin(t) * math.cos(p), 0.0])
        s[:] = r[:, None] * nhat
        d[:, :, 0] = r[:, None] * dt
        if model.d_I == 2:
            d[:, :, 1] = r[:, None] * dp
        d[:, :, -1] = nhat
        return s, d

    c = model.r * math.sin(model.phi)
    z = model.r * math.cos(model.phi)
    a = ti[0]
    b = tn[:, 0]
    s[:, 2] = z
    if name is ModelName.EXTRA_ROTATION:
        ab = a + b
        s[:, 0] = c * np.cos(ab)
        s[:, 1] = c * np.sin(ab)
        d[:, 0, 0] = -c * np.sin(ab)
        d[:, 1, 0] = c * np.cos(ab)
        d[:, :, 1] = d[:, :, 0]
    elif name is ModelName.ADDITIONAL_SINE:
        ab = a + b
        s[:, 0] = c * math.cos(a)
        s[:, 1] = c * np.sin(ab)
        d[:, 0, 0] = -c * math.sin(a)
        d[:, 1, 0] = c * np.cos(ab)
        d[:, 1, 1] = c * np.cos(ab)
    elif name is ModelName.ANISOTROPIC_SHRINK:
        s[:, 0] = c * math.cos(a)
        s[:, 1] = c * b * math.sin(a)
        d[:, 0, 0] = -c * math.sin(a)
        d[:, 1, 0] = c * b * math.cos(a)
        d[:, 1, 1] = c * math.sin(a)
    else:  # pragma: no cover
        raise ValueError(name)
    return s, d


def bloch_batch(model: ModelSpec, theta_I, nodes):
    ti = check_interest(model, theta_I)
    tn = check_nuisance_nodes(model, nodes)
    s, _ = _bloch_and_frame(model, ti, tn)
    return s


def frame_batch(model: ModelSpec, theta_I, nodes):
    """Bloch vectors ``(n, 3)`` and tangent frames ``(n, 3, d_I + d_N)`` at each node."""
    ti = check_interest(model, theta_I)
    tn = check_nuisance_nodes(model, nodes)
    return _bloch_and_frame(model, ti, tn)


def bloch(model: ModelSpec, p: EvalPoint):
    s = bloch_batch(model, p.theta_I, np.array([p.theta_N]))[0]
    if np.linalg.norm(s) > 1.0 + states.PHYSICAL_ATOL:  # pragma: no cover - guarded by domains
        raise NonPhysical("model produced |s| > 1")
    return s


def jacobian(model: ModelSpec, p: EvalPoint):
    """Tangent frame ``(3, d_I + d_N)``; columns are interest derivatives, then nuisance."""
    return frame_batch(model, p.theta_I, np.array([p.theta_N]))[1][0]


def qfim_batch(model: ModelSpec, theta_I, nodes):
    s, d = frame_batch(model, theta_I, nodes)
    return states.qfim_bloch_batch(s, d)


def qfim(model: ModelSpec, p: EvalPoint) -> BlockSym:
    j = states.qfim_bloch(bloch(model, p), jacobian(model, p))
    return BlockSym.split(j, model.d_I)
