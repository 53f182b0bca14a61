"""Angular-momentum-dependent lower bounds on the position-momentum uncertainty product."""

from .basis import (
    AngularStats,
    MomentReport,
    QuantumNumbers,
    SuperpositionState,
    angular_stats,
    example_state,
    moments_single,
    moments_superposition,
)
from .bounds import (
    BoundInputs,
    BoundKind,
    BoundValue,
    closed_form_W,
    curve,
    heisenberg_bound,
    omega_bound,
    optimal_l_continuous,
    pj_bound,
)
from .constraints import (
    Domain,
    Multipliers,
    TripleSolution,
    derivative_signs,
    feasibility_domain,
    omega_min_integer,
    recover_multipliers,
    solve_probabilities,
    w_audit,
)
from .errors import ConvergenceError, InfeasibleError, InvalidInputError, QuadratureError
from .optimizer import OptimizeProblem, OptimizeResult, minimize_product, verify_stationarity
from .oracle import Parity, QuadratureConfig, quadrature_moments, random_state, scan

__version__ = "0.1.0"
