"""Self-verification suites run by ``hpqfim verify``.

Each check returns a ``CheckResult``; ``witness`` is the smallest eigenvalue
(or largest deviation) seen, which is what gets printed on failure.
Checks use a fixed seed so reports are stable between runs.
"""
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from . import hybrid, measure, models, oracles, priors, states
from .errors import HpqfimError
from .matlib import (BlockSym, block_inverse_identity_check, eigh, jensen_schur_check,
                     min_eig, psd_gap, schur_complement, sym)
from .models import ModelName, ModelSpec
from .priors import NuisancePrior

SEED = 20240917
GRID = 50
SUITES = ("matrix", "models", "bounds", "measurement")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    count: int
    witness: float
    detail: str = ""

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        text = f"{tag} {self.suite}.{self.name} [{self.count} checks] witness={self.witness:.6e}"
        return f"{text} {self.detail}".rstrip()


def builtin_models():
    return [ModelSpec(name) for name in ModelName]


def builtin_priors(model):
    """Uniform, von Mises (kappa = 1) and raised cosine over the nuisance domain."""
    dom = model.domain_N[0]
    mid = 0.5 * (dom.lo + dom.hi)
    return {
        "Uniform": NuisancePrior.uniform(dom),
        "VonMises": NuisancePrior.von_mises(dom.lo if dom.periodic else mid, 1.0, dom),
        "RaisedCosine": NuisancePrior.raised_cosine(mid, 0.5 * dom.length, dom),
    }


def interest_grid(model, n=GRID):
    """Interior grid on the first interest coordinate; extra coordinates held at ``model.phi``."""
    xs = models.Interval(0.0, math.pi, lo_open=True, hi_open=True).interior_grid(n)
    if model.d_I == 2:
        return [np.array([x, model.phi]) for x in xs]
    return [np.array([x]) for x in xs]


def _rng():
    return np.random.default_rng(SEED)


def _random_block(rng, d_i, d_n, cond=1e3):
    return BlockSym.split(sym(oracles.random_spd(rng, d_i + d_n, cond), check=False), d_i)


def _result(suite, name, verdicts, worst, detail=""):
    verdicts = list(verdicts)
    return CheckResult(suite, name, all(verdicts), len(verdicts), float(worst), detail)


# matrix

def check_schur_spd():
    rng = _rng()
    eigs = []
    for _ in range(1000):
        b = _random_block(rng, rng.integers(1, 3), rng.integers(1, 3))
        eigs.append(min_eig(schur_complement(b)))
    return _result("matrix", "schur_spd", [e > -1e-10 for e in eigs], min(eigs))


def check_block_inverse():
    rng = _rng()
    oks = [block_inverse_identity_check(_random_block(rng, rng.integers(1, 3), rng.integers(1, 3)), 1e-9)
           for _ in range(1000)]
    return _result("matrix", "block_inverse_identity", oks, sum(not ok for ok in oks), "(witness = failures)")


def check_jensen():
    rng = _rng()
    verdicts = []
    for _ in range(1000):
        n, m, k = rng.integers(1, 3), rng.integers(1, 3), rng.integers(2, 6)
        samples = [(oracles.random_spd(rng, n, 1e2), rng.normal(size=(n, m))) for _ in range(k)]
        w = rng.dirichlet(np.ones(k))
        verdicts.append(jensen_schur_check(samples, w / w.sum(), 1e-9))
    return _result("matrix", "jensen_schur", [v.holds for v in verdicts], min(v.min_eig for v in verdicts))


def check_eigensolver():
    """Jacobi eigenpairs reconstruct the matrix; ``psd_gap`` witnesses match the spectrum."""
    rng = _rng()
    worst = 0.0
    for _ in range(500):
        n = rng.integers(1, 5)
        a = sym(rng.normal(size=(n, n)) + rng.normal(size=(n, n)).T, check=False)
        w, v = eigh(a)
        worst = max(worst, float(np.max(np.abs((v * w) @ v.T - a))))
        b = sym(rng.normal(size=(n, n)) + rng.normal(size=(n, n)).T, check=False)
        verdict = psd_gap(a, b)
        worst = max(worst, abs(verdict.min_eig - float(np.linalg.eigvalsh(a - b)[0])))
    return _result("matrix", "eigensolver", [worst <= 1e-10], worst, "(max deviation)")


# models

def check_qfim_vs_sld():
    rng = _rng()
    worst = 0.0
    psd = []
    for _ in range(1000):
        s = rng.normal(size=3)
        s *= rng.uniform(0.0, 0.95) / np.linalg.norm(s)
        frame = rng.normal(size=(3, rng.integers(1, 4)))
        q = states.qfim_bloch(s, frame)
        psd.append(min_eig(q))
        ref = oracles.sld_qfim_bloch(s, frame)
        worst = max(worst, float(np.max(np.abs(q - ref)) / max(1.0, np.max(np.abs(ref)))))
    ok = [worst <= 1e-6] + [e >= -1e-12 for e in psd]
    return _result("models", "qfim_vs_sld_oracle", ok, worst, f"(min eig {min(psd):.3e})")


def check_direction_closed_form():
    model = ModelSpec(ModelName.DIRECTION)
    th = models.Interval(0.0, math.pi).interior_grid(20)
    ph = models.Interval.circle().interior_grid(20)
    rs = models.Interval(0.0, 1.0).interior_grid(20)
    worst = 0.0
    for t in th:
        for p in ph:
            q = models.qfim_batch(model, [t, p], rs)
            expect = np.zeros_like(q)
            expect[:, 0, 0] = rs ** 2
            expect[:, 1, 1] = rs ** 2 * math.sin(t) ** 2
            expect[:, 2, 2] = 1.0 / (1.0 - rs ** 2)
            worst = max(worst, float(np.max(np.abs(q - expect))))
    return _result("models", "direction_closed_form", [worst <= 1e-10], worst, "(max abs deviation)")


def check_entropy_monotone():
    radii = np.linspace(0.0, 1.0, 1000)
    h = np.array([states.von_neumann_entropy([0.0, 0.0, r]) for r in radii])
    steps = np.diff(h)
    return _result("models", "entropy_monotone", [bool(np.all(steps < 0))], float(np.max(steps)),
                   "(largest step)")


def check_extra_rotation():
    model = ModelSpec(ModelName.EXTRA_ROTATION)
    grid = models.Interval.circle().interior_grid(30)
    blocks = [models.qfim(model, models.point(model, [a], [b])) for a in grid for b in grid]
    schur = max(abs(float(schur_complement(b)[0, 0])) for b in blocks)
    stack = np.array([b.assemble() for b in blocks])
    spread = float(np.max(stack.max(axis=0) - stack.min(axis=0)))
    worst = max(schur, spread)
    return _result("models", "extra_rotation_constant", [schur <= 1e-12, spread <= 1e-12], worst,
                   "(max |J_I|N| or block spread)")


def check_direction_diagonal():
    model = ModelSpec(ModelName.DIRECTION)
    worst = 0.0
    for ti in interest_grid(model, 20):
        q = models.qfim_batch(model, ti, models.Interval(0.0, 1.0).interior_grid(20))
        off = q - np.einsum("nii->ni", q)[:, :, None] * np.eye(3)
        worst = max(worst, float(np.max(np.abs(off))))
    return _result("models", "direction_diagonal", [worst <= 1e-12], worst, "(max off-diagonal)")


def check_symmetry():
    worst = 0.0
    for name in (ModelName.ADDITIONAL_SINE, ModelName.ANISOTROPIC_SHRINK):
        model = ModelSpec(name)
        prior = NuisancePrior.uniform(model.domain_N[0])
        rule = prior.default_rule()
        for ti in interest_grid(model, GRID // 2):
            a = hybrid.bound_report(model, prior, ti, rule).traced()
            b = hybrid.bound_report(model, prior, math.pi - ti, rule).traced()
            for x, y in zip(a, b):
                if math.isinf(x) or math.isinf(y):
                    worst = max(worst, 0.0 if x == y else math.inf)
                else:
                    worst = max(worst, abs(x - y))
    return _result("models", "symmetry_about_half_pi", [worst <= 1e-9], worst, "(max |f(t) - f(pi - t)|)")


# bounds

def check_bracketing(n_grid=GRID):
    verdicts = []
    for model in builtin_models():
        for prior in builtin_priors(model).values():
            rule = prior.default_rule()
            for ti in interest_grid(model, n_grid):
                verdicts.extend(hybrid.bracketing(hybrid.bound_report(model, prior, ti, rule), 1e-9))
    return _result("bounds", "bracketing", [v.holds for v in verdicts], min(v.min_eig for v in verdicts))


def check_prior_monotonicity():
    rng = _rng()
    verdicts = []
    for _ in range(500):
        d_i, d_n = rng.integers(1, 3), rng.integers(1, 3)
        avg = _random_block(rng, d_i, d_n)
        j_pi = oracles.random_spd(rng, d_n, 1e2) * rng.uniform(0.0, 1.0)
        extra = rng.normal(size=(d_n, d_n))
        lo = hybrid.hpqfim(avg, j_pi)
        hi = hybrid.hpqfim(avg, sym(j_pi + extra @ extra.T, check=False))
        verdicts.append(psd_gap(hi, lo, 1e-9))
    return _result("bounds", "prior_information_monotone", [v.holds for v in verdicts],
                   min(v.min_eig for v in verdicts))


def check_reparametrization():
    rng = _rng()
    worst = 0.0
    for _ in range(500):
        d_i = rng.integers(1, 3)
        avg = _random_block(rng, d_i, 1)
        j_pi = sym(rng.uniform(0.0, 2.0))
        c = math.exp(rng.uniform(-2.0, 2.0))
        scaled = BlockSym(avg.ii, avg.in_ / c, sym(avg.nn / c ** 2, check=False))
        diff = hybrid.hpqfim(avg, j_pi) - hybrid.hpqfim(scaled, j_pi / c ** 2)
        worst = max(worst, float(np.max(np.abs(diff))))
    return _result("bounds", "nuisance_reparametrization", [worst <= 1e-10], worst, "(max deviation)")


def check_g_consistency():
    oks = []
    for model in builtin_models():
        for prior in builtin_priors(model).values():
            rule = prior.default_rule()
            j_pi = priors.prior_fisher(prior, rule)
            for ti in interest_grid(model, 10):
                g = hybrid.g_matrix(hybrid.averaged_blocks(model, prior, rule, ti), j_pi)
                if min_eig(g.assemble()) > 1e-8:
                    oks.append(block_inverse_identity_check(g, 1e-8))
    return _result("bounds", "g_block_inverse", oks, sum(not ok for ok in oks), "(witness = failures)")


def check_extra_rotation_closed_form():
    worst = 0.0
    model = ModelSpec(ModelName.EXTRA_ROTATION)
    base = model.r ** 2 * math.sin(model.phi) ** 2
    for kappa in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
        prior = NuisancePrior.von_mises(0.0, kappa, model.domain_N[0])
        jp = oracles.von_mises_fisher(kappa)
        rep = hybrid.bound_report(model, prior, [1.0])
        inv_l, inv_m, _ = rep.traced()
        worst = max(worst, abs(inv_l - 1.0 / base), abs(inv_m - (base + jp) / (base * jp)))
    return _result("bounds", "extra_rotation_closed_form", [worst <= 1e-10], worst, "(max deviation)")


def check_prior_fisher():
    dom = models.Interval(0.0, 1.0)
    values = [float(priors.prior_fisher(NuisancePrior.truncated_gaussian(0.5, s, dom))[0, 0])
              for s in (0.05, 0.1, 0.2, 0.4)]
    decreasing = all(b < a for a, b in zip(values, values[1:]))
    zero_uniform = float(priors.prior_fisher(NuisancePrior.uniform(dom))[0, 0]) == 0.0
    norms = []
    for model in builtin_models():
        for prior in builtin_priors(model).values():
            norms.append(abs(float(priors.expect(prior, prior.default_rule(), lambda x: 1.0)) - 1.0))
    ok = [decreasing, zero_uniform, min(values) > 0] + [n <= 1e-10 for n in norms]
    return _result("bounds", "prior_fisher_and_normalization", ok, max(norms), "(max normalization error)")


# measurement

def _random_povm(rng, k=None):
    k = k or rng.integers(2, 6)
    dirs = rng.normal(size=(k, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    weights = rng.dirichlet(np.ones(k))
    parts = [(w, measure.Povm.projective(d)) for w, d in zip(weights, dirs)]
    return measure.Povm.mixture(parts)


def _random_point(rng, model):
    ti = [float(rng.uniform(0.1, math.pi - 0.1))]
    if model.d_I == 2:
        ti.append(float(rng.uniform(0.0, 2 * math.pi)))
    dom = model.domain_N[0]
    tn = float(rng.uniform(dom.lo + 0.05 * dom.length, dom.hi - 0.05 * dom.length))
    return models.point(model, ti, [tn])


def check_outcome_dist():
    rng = _rng()
    worst = 0.0
    for _ in range(500):
        povm = _random_povm(rng)
        s = rng.normal(size=3)
        s *= rng.uniform(0.0, 1.0) / np.linalg.norm(s)
        p = measure.outcome_dist(povm, s)
        rho = states.density_operator(s)
        ref = np.array([np.trace(rho @ e).real for e in povm.operators()])
        worst = max(worst, abs(p.sum() - 1.0), float(np.max(np.abs(p - ref))))
    return _result("measurement", "outcome_dist", [worst <= 1e-12], worst, "(max deviation)")


def check_data_processing():
    rng = _rng()
    verdicts = []
    mods = builtin_models()
    for _ in range(500):
        model = mods[rng.integers(len(mods))]
        verdicts.append(measure.data_processing_check(_random_povm(rng), model, _random_point(rng, model),
                                                      1e-8))
    return _result("measurement", "data_processing", [v.holds for v in verdicts],
                   min(v.min_eig for v in verdicts))


def check_classical_chain():
    verdicts = []
    povm = measure.Povm.mixture([(0.5, measure.Povm.projective([1, 0, 0])),
                                 (0.5, measure.Povm.projective([0, 1, 1]))])
    for model in builtin_models():
        pri = builtin_priors(model)
        for key in ("VonMises", "RaisedCosine"):
            prior = pri[key]
            rule = prior.default_rule()
            for ti in interest_grid(model, 10):
                verdicts.append(measure.classical_hybrid_chain(povm, model, prior, rule, ti, 1e-8))
    finite = [v.min_eig for v in verdicts if not v.degenerate]
    return _result("measurement", "classical_hybrid_chain", [v.holds for v in verdicts],
                   min(finite) if finite else math.inf)


def direction_risk_case():
    """Single-interest Direction model measured with an even z/x mixture."""
    model = ModelSpec(ModelName.DIRECTION, phi=0.0, interest_dim=1)
    prior = NuisancePrior.uniform(model.domain_N[0])
    povm = measure.Povm.mixture([(0.5, measure.Povm.projective([0, 0, 1])),
                                 (0.5, measure.Povm.projective([1, 0, 0]))])
    return model, prior, povm, np.array([math.pi / 3])


def check_empirical_risk(n_samples=100_000):
    model, prior, povm, ti = direction_risk_case()
    est = measure.empirical_hybrid_risk(povm, model, prior, ti, n_samples, SEED)
    bound = hybrid.bound_report(model, prior, ti).risk_bound
    margin = est.risk - (bound - 3 * est.std_error)
    return _result("measurement", "empirical_risk", [margin >= 0], margin,
                   f"(risk {est.risk:.6g} +/- {est.std_error:.2g}, bound {bound:.6g})")


REGISTRY: Dict[str, List[Callable[[], CheckResult]]] = {
    "matrix": [check_schur_spd, check_block_inverse, check_jensen, check_eigensolver],
    "models": [check_qfim_vs_sld, check_direction_closed_form, check_entropy_monotone,
               check_extra_rotation, check_direction_diagonal, check_symmetry],
    "bounds": [check_bracketing, check_prior_monotonicity, check_reparametrization,
               check_g_consistency, check_extra_rotation_closed_form, check_prior_fisher],
    "measurement": [check_outcome_dist, check_data_processing, check_classical_chain,
                    check_empirical_risk],
}


def run_suite(suite, out=print) -> List[CheckResult]:
    """Run one suite (or ``all``) and print one line per check."""
    if suite == "all":
        names = SUITES
    elif suite in REGISTRY:
        names = (suite,)
    else:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
    results = []
    start = time.perf_counter()
    for name in names:
        for check in REGISTRY[name]:
            try:
                res = check()
            except HpqfimError as exc:
                res = CheckResult(name, check.__name__.removeprefix("check_"), False, 0, math.nan,
                                  f"raised {type(exc).__name__}: {exc}")
            out(res.line())
            results.append(res)
    failed = sum(not r.passed for r in results)
    out(f"{len(results) - failed}/{len(results)} checks passed in {time.perf_counter() - start:.2f}s")
    return results
