"""Exact rational construction of a dyadic weight on which signed Haar block
multipliers have unbounded weighted norm, with certificates for every step.
"""

from .certify import (Certificate, check_corona_match, check_dist_estimate, check_haar_identity,
                      check_main_estimate, check_maximal_bounds, check_measure_preserving,
                      check_sign_oracle, main_lemma_report)
from .construction import (Construction, ResourceCapError, StoppingNode, assign_signs, build,
                           default_stage_count, model_measure, node_count, stage_measure)
from .corona import (CoronaForest, InfiniteCoronaError, UnsupportedGeometryError, corona,
                     delta_region, maximal_on_support, sigma, sigma_lower_bound)
from .dyadic import DyadicInterval, jumping_point
from .energy import EnergyReport, derandomize_signs, expectation_energy
from .figures import export_figure_data
from .haar import apply_block, haar_ratio, level_set, xi
from .steps import StepFunction, StepMeasure, integrate, mass

__all__ = [
    "Certificate", "CoronaForest", "Construction", "DyadicInterval", "EnergyReport",
    "InfiniteCoronaError", "ResourceCapError", "StepFunction", "StepMeasure", "StoppingNode",
    "UnsupportedGeometryError", "apply_block", "assign_signs", "build", "check_corona_match",
    "check_dist_estimate", "check_haar_identity", "check_main_estimate", "check_maximal_bounds",
    "check_measure_preserving", "check_sign_oracle", "corona", "default_stage_count",
    "delta_region", "derandomize_signs", "expectation_energy", "export_figure_data", "haar_ratio",
    "integrate", "jumping_point", "level_set", "main_lemma_report", "mass", "maximal_on_support",
    "model_measure", "node_count", "sigma", "sigma_lower_bound", "stage_measure", "xi",
]
