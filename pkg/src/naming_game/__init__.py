"""K-state naming game with zealots: mean-field analysis and simulation.

Normal agents hold one of K+1 graded opinions between consensus at B and
consensus at A; zealots are pinned at the extremes.  This package locates
the mean-field fixed points (always geometric in shape), classifies their
stability, maps the unilateral critical zealot fraction and the bilateral
tipping diagram, and cross-checks everything against a finite-N Monte
Carlo simulator of the conversation process.
"""

__version__ = "0.1.0"

from .errors import (
    BranchMissingError,
    DegeneratePopulationError,
    InvalidPopulationError,
    NamingGameError,
    NumericalFailureError,
    SolverFailureError,
    UndefinedRatioError,
)
from .model import (
    DerivativeVector,
    Distribution,
    MeanFieldTrajectory,
    ModelParams,
    PerturbationVector,
    discrete_update_map,
    expected_dmdt,
    geometric_distribution,
    induced_normal_magnetization,
    integrate,
    magnetization,
    magnetization_norm,
    mean_field_derivative,
    min_adjacent_ratio,
    normal_magnetization,
)
from .simulate import Population, Trajectory, absorption_time, init_population, mc_step, simulate
from .steady import (
    Axis,
    PerturbationRecord,
    SteadyState,
    SteadyStateSet,
    SweepGrid,
    ZealotDensity,
    beak_diagram,
    classify_stability,
    critical_alpha,
    critical_unilateral_zealot_fraction,
    cusp_zealot_fraction,
    find_steady_states,
    perturbation_experiment,
    rho_b_curve,
    self_consistency_residual,
    symmetric_gap_curve,
    symmetric_tipping_threshold,
    zealot_density_for_steady,
)
