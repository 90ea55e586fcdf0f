"""Frank-Wolfe with adaptive step sizes and a checker for its gap bounds."""

from .checks import BoundReport, CheckResult, check_trace
from .config import ExperimentConfig, format_config, load_config, parse_config
from .core import GapResult, clamp_gap, fw_gap
from .domains import AtomSet, Box, L1Ball, Simplex, contains, diameter, lmo
from .errors import ConfigError, NumericError, OracleError, UnsupportedOperation, UsageError
from .experiment import RateFit, emit_trace_csv, fit_rate, read_trace_csv, run_experiment, run_suite
from .objectives import (
    AffineComposition,
    CurvatureEstimate,
    DiagonalQuadratic,
    Quadratic,
    curvature_lipschitz_bound,
    curvature_sampled,
    finite_diff_check,
    global_min_separable_box,
    grid_min,
)
from .solver import (
    IterationRecord,
    RunTrace,
    SolverConfig,
    StepRule,
    exact_linesearch_quadratic,
    linesearch_generic,
    per_iter_decrease_bound,
    refined_bound_rhs,
    solve,
    step_classic,
    step_quadbound,
    theorem_bound_rhs,
)

__version__ = "0.1.0"
