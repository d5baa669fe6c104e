"""
Superquantiles of welfare distributions and bounds relating individual
welfare changes to their conditional averages.
"""
__version__ = "0.1.0"

from .empirical import WeightedSample, cdf, make_sample, mean, quantile, std, variance
from .superquantile import (
    Method,
    SuperquantileCurve,
    SuperquantileResult,
    Tail,
    lower,
    lower_superquantile,
    superquantile_curve,
    superquantile_via_quantile_integral,
    upper,
    upper_superquantile,
)
from .variational import LpSolution, PluginProgram, interpret_solution, solve_breakpoints, solve_simplex_lp
from .draws import NoiseSpec
from .pum import PumScenario, check_appendix_properties, check_theorem1, check_theorem2, draw_tau
from .cv import PriceScenario, check_prop3
from .policy import PolicyRule, PolicyScenario, PotentialOutcomes, check_prop4, check_theorem3, regret_report
from .roy import RoyErrors, RoyScenario, check_prop5, check_prop6, check_theorem5, compute_parameters, simulate_roy
from .reports import BoundRecord, BoundReport
from .io import emit_curve, ingest_cate_csv

__all__ = [name for name in dir() if not name.startswith("_")]
