"""Hybrid partial quantum Fisher information for qubit models with a random nuisance parameter."""
from ._accel import backend_name
from .errors import (ConfigError, DimMismatch, DomainViolation, HpqfimError, NonPhysical,
                     NotSymmetric, NumericalError, PureStateBoundary, QuadratureDivergence,
                     SingularBlock, ZeroProbabilityOutcome)
from .hybrid import HybridBoundReport, bound_report, hpqfim, risk_lower_bound, surrogates
from .matlib import BlockSym, Ordering, psd_gap, schur_complement
from .measure import Povm, classical_fim, empirical_hybrid_risk
from .models import EvalPoint, Interval, ModelName, ModelSpec
from .priors import NuisancePrior, QuadratureRule, Scheme, prior_fisher

__version__ = "0.1.0"

__all__ = [
    "backend_name", "BlockSym", "ConfigError", "DimMismatch", "DomainViolation", "EvalPoint",
    "HpqfimError", "HybridBoundReport", "Interval", "ModelName", "ModelSpec", "NonPhysical",
    "NotSymmetric", "NuisancePrior", "NumericalError", "Ordering", "Povm", "PureStateBoundary",
    "QuadratureDivergence", "QuadratureRule", "Scheme", "SingularBlock", "ZeroProbabilityOutcome",
    "bound_report", "classical_fim", "empirical_hybrid_risk", "hpqfim", "prior_fisher",
    "psd_gap", "risk_lower_bound", "schur_complement", "surrogates",
]
