"""queuegrad: queue-driven first-order solvers for box-constrained convex
programs, with a reference oracle, invariant diagnostics, and a CLI.

Quick start::

    from queuegrad import build_program, example_lp_instance, run

    program, constants = build_program(example_lp_instance())
    trace = run(program, constants, iterations=100_000)
    print(trace.final_f_xbar, trace.final_max_violation)
"""

from .model import (
    Box,
    ConfigError,
    ConstantsPack,
    ConvergenceError,
    ConvexProgram,
    DifferentiableFunction,
    InfeasibleError,
    NumericalError,
    ParseError,
    check_gradient,
)
from .instances import (
    LpSpec,
    QpSpec,
    SplitMix64,
    build_lp,
    build_program,
    build_qp,
    example_lp_instance,
    example_qp_instance,
    random_instance,
)
from .solvers import (
    ALGORITHMS,
    InnerConfig,
    SolverState,
    SolverTrace,
    VirtualQueue,
    derive_lambda_bound,
    direction,
    dual_value_lower_bound,
    ensure_lambda_bound,
    find_slater_point,
    init_virtual_queue,
    initial_state,
    multiplier_bound,
    run,
    select_gamma,
    step_dual_type,
    step_new_algorithm,
    step_pd_subgradient,
)
from .diagnostics import (
    CHECK_NAMES,
    CheckResult,
    InvariantReport,
    RateFit,
    check_trace,
    constraint_onsets,
    drift_series,
    fit_rate,
    objective_gap_series,
)
from .oracle import (
    ReferenceSolution,
    lp_vertex_solve,
    qp_grid_polish,
    reference_solve,
)
from .cli import parse_problem_file, read_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "Box",
    "CHECK_NAMES",
    "CheckResult",
    "ConfigError",
    "ConstantsPack",
    "ConvergenceError",
    "ConvexProgram",
    "DifferentiableFunction",
    "InfeasibleError",
    "InnerConfig",
    "InvariantReport",
    "LpSpec",
    "NumericalError",
    "ParseError",
    "QpSpec",
    "RateFit",
    "ReferenceSolution",
    "SolverState",
    "SolverTrace",
    "SplitMix64",
    "VirtualQueue",
    "build_lp",
    "build_program",
    "build_qp",
    "check_gradient",
    "check_trace",
    "constraint_onsets",
    "derive_lambda_bound",
    "direction",
    "drift_series",
    "dual_value_lower_bound",
    "ensure_lambda_bound",
    "example_lp_instance",
    "example_qp_instance",
    "find_slater_point",
    "fit_rate",
    "init_virtual_queue",
    "initial_state",
    "lp_vertex_solve",
    "multiplier_bound",
    "objective_gap_series",
    "parse_problem_file",
    "qp_grid_polish",
    "random_instance",
    "read_trace",
    "reference_solve",
    "run",
    "select_gamma",
    "step_dual_type",
    "step_new_algorithm",
    "step_pd_subgradient",
    "write_trace",
    "__version__",
]
