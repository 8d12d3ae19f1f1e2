"""Consistent losses for identifiable functionals, Murphy curves, Pareto
filtering of model parameters and T-calibration diagnostics."""

__version__ = "0.1.0"

from .calibration import CalibrationReport, calibration_diagnostic, theorem1_harness
from .empirics import (
    Dataset,
    FitResult,
    MurphyCurve,
    OptimizerConfig,
    empirical_risk,
    fit,
    fit_elementary,
    load_dataset,
    murphy_curve,
)
from .functionals import (
    DiscreteDistribution,
    FunctionalInterval,
    FunctionalSpec,
    elementary_score,
    functional_interval,
    identification_value,
)
from .mixtures import BregmanGenerator, MixtureMeasure, bregman_loss, mixture_from_generator, mixture_loss
from .models import ModelFamily, shift, supports_shift
from .pareto import DominanceVerdict, ParetoSet, Relation, dominates, eta_scan, pareto_filter
from .synthetic import GeneratorSpec, generate

__all__ = [
    "BregmanGenerator",
    "CalibrationReport",
    "Dataset",
    "DiscreteDistribution",
    "DominanceVerdict",
    "FitResult",
    "FunctionalInterval",
    "FunctionalSpec",
    "GeneratorSpec",
    "MixtureMeasure",
    "ModelFamily",
    "MurphyCurve",
    "OptimizerConfig",
    "ParetoSet",
    "Relation",
    "bregman_loss",
    "calibration_diagnostic",
    "dominates",
    "elementary_score",
    "empirical_risk",
    "eta_scan",
    "fit",
    "fit_elementary",
    "functional_interval",
    "generate",
    "identification_value",
    "load_dataset",
    "mixture_from_generator",
    "mixture_loss",
    "murphy_curve",
    "pareto_filter",
    "shift",
    "supports_shift",
    "theorem1_harness",
]
