"""Flat ``key = value`` run configuration.

Example::

    # extra-rotation model, von Mises nuisance prior
    model.name = ExtraRotation
    model.r = 0.5
    model.phi = pi/2
    prior.kind = VonMises
    prior.mu = 0
    prior.kappa = 1
    grid.points = 50
    output.path = extra_rotation.csv

Numbers accept arithmetic with ``pi`` (``pi/2``, ``2*pi/3``). Intervals are
written in interval notation, ``(0, 1]`` or ``[0, 2*pi)``; a closing ``)``
on a ``[0, 2*pi)`` interval marks it periodic when the length is ``2*pi``.
"""
import ast
import math
import operator
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from .errors import ConfigError
from .hybrid import weight_matrix
from .models import Interval, ModelName, ModelSpec
from .priors import NuisancePrior, PriorKind, QuadratureRule, Scheme

KNOWN_KEYS = {
    "model.name", "model.r", "model.phi", "model.interest_dim", "model.nuisance_domain",
    "prior.kind", "prior.mu", "prior.sigma", "prior.kappa", "prior.center", "prior.width",
    "prior.domain", "quadrature.scheme", "quadrature.nodes", "grid.points", "grid.lo",
    "grid.hi", "weight", "output.path", "seed",
}

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg,
        ast.UAdd: operator.pos}
_NAMES = {"pi": math.pi, "tau": 2 * math.pi}


def parse_number(text):
    """Evaluate a restricted arithmetic expression (numbers, ``pi``, ``+ - * / **``)."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ConfigError(f"unsupported expression {text!r}")

    try:
        value = ev(tree)
    except ZeroDivisionError as exc:
        raise ConfigError(f"division by zero in {text!r}") from exc
    if not math.isfinite(value):
        raise ConfigError(f"{text!r} is not finite")
    return value


_INTERVAL = re.compile(r"^\s*([\[(])(.+),(.+)([\])])\s*$")


def parse_interval(text):
    m = _INTERVAL.match(text)
    if not m:
        raise ConfigError(f"cannot parse interval {text!r}; use e.g. (0, 1] or [0, 2*pi)")
    lo, hi = parse_number(m.group(2)), parse_number(m.group(3))
    lo_open, hi_open = m.group(1) == "(", m.group(4) == ")"
    periodic = m.group(1) == "[" and hi_open and abs((hi - lo) - 2 * math.pi) < 1e-12
    try:
        return Interval(lo, hi, lo_open=lo_open, hi_open=hi_open, periodic=periodic)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_matrix(text):
    rows = [r for r in text.split(";") if r.strip()]
    try:
        mat = np.array([[parse_number(x) for x in row.split(",")] for row in rows], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"ragged matrix {text!r}") from exc
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ConfigError(f"weight must be square, got {text!r}")
    return mat


def read_pairs(text) -> Dict[str, str]:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


@dataclass(frozen=True)
class SweepConfig:
    model: ModelSpec
    prior: NuisancePrior
    rule: QuadratureRule
    grid_points: int = 50
    grid: Interval = Interval(0.0, math.pi, lo_open=True, hi_open=True)
    weight: Optional[np.ndarray] = None
    output_path: str = "sweep.csv"
    seed: int = 0

    def grid_values(self):
        return self.grid.interior_grid(self.grid_points)

    def interest_at(self, x):
        """Full interest vector for a swept first coordinate."""
        if self.model.d_I == 2:
            return np.array([x, self.model.phi])
        return np.array([x])


def _default_prior(kind, domain, pairs):
    mid = 0.5 * (domain.lo + domain.hi)

    def num(key, default):
        return parse_number(pairs[key]) if key in pairs else default

    if kind is PriorKind.UNIFORM:
        return NuisancePrior.uniform(domain)
    if kind is PriorKind.VON_MISES:
        mu_default = domain.lo if domain.periodic else mid
        return NuisancePrior.von_mises(num("prior.mu", mu_default), num("prior.kappa", 1.0), domain)
    if kind is PriorKind.TRUNCATED_GAUSSIAN:
        return NuisancePrior.truncated_gaussian(num("prior.mu", mid), num("prior.sigma", domain.length / 8),
                                                domain)
    return NuisancePrior.raised_cosine(num("prior.center", mid), num("prior.width", 0.5 * domain.length),
                                       domain)


def build(pairs: Dict[str, str]) -> SweepConfig:
    try:
        return _build(pairs)
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def _build(pairs):
    if "model.name" not in pairs:
        raise ConfigError("model.name is required")
    try:
        name = ModelName(pairs["model.name"])
    except ValueError:
        raise ConfigError(f"unknown model {pairs['model.name']!r}; "
                          f"choose from {[m.value for m in ModelName]}") from None
    kwargs = {}
    if "model.r" in pairs:
        kwargs["r"] = parse_number(pairs["model.r"])
    if "model.phi" in pairs:
        kwargs["phi"] = parse_number(pairs["model.phi"])
    if "model.interest_dim" in pairs:
        kwargs["interest_dim"] = int(pairs["model.interest_dim"])
    if "model.nuisance_domain" in pairs:
        kwargs["nuisance_domain"] = parse_interval(pairs["model.nuisance_domain"])
    model = ModelSpec(name, **kwargs)

    nuis = model.domain_N[0]
    domain = nuis
    if "prior.domain" in pairs:
        domain = parse_interval(pairs["prior.domain"])
        if domain.lo < nuis.lo or domain.hi > nuis.hi:
            raise ConfigError(f"prior.domain {domain} is not inside the nuisance domain {nuis}")
    try:
        kind = PriorKind(pairs.get("prior.kind", "Uniform"))
    except ValueError:
        raise ConfigError(f"unknown prior kind {pairs['prior.kind']!r}") from None
    prior = _default_prior(kind, domain, pairs)

    rule = prior.default_rule(int(pairs["quadrature.nodes"]) if "quadrature.nodes" in pairs else None)
    if "quadrature.scheme" in pairs:
        try:
            scheme = Scheme(pairs["quadrature.scheme"])
        except ValueError:
            raise ConfigError(f"unknown quadrature scheme {pairs['quadrature.scheme']!r}") from None
        rule = QuadratureRule.build(scheme, rule.interval, len(rule))

    points = int(pairs.get("grid.points", "50"))
    if points < 2:
        raise ConfigError("grid.points must be at least 2")
    lo = parse_number(pairs.get("grid.lo", "0"))
    hi = parse_number(pairs.get("grid.hi", "pi"))
    grid = Interval(lo, hi, lo_open=True, hi_open=True)
    first = model.domain_I[0]
    if not first.periodic and (lo < first.lo or hi > first.hi):
        raise ConfigError(f"grid ({lo}, {hi}) leaves the interest domain {first}")

    weight = None
    if "weight" in pairs:
        weight = parse_matrix(pairs["weight"])
        if weight.shape[0] != model.d_I:
            raise ConfigError(f"weight must be {model.d_I}x{model.d_I}")
        weight = weight_matrix(weight, model.d_I)
    seed = int(pairs.get("seed", "0"))
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return SweepConfig(model, prior, rule, points, grid, weight,
                       pairs.get("output.path", "sweep.csv"), seed)


def load(path) -> SweepConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return build(read_pairs(text))


def loads(text) -> SweepConfig:
    return build(read_pairs(text))
