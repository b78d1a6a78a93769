"""First-order solvers for box-constrained convex programs.

Three methods share one driver:

``new``
    The queue-driven gradient method.  A nonnegative virtual queue tracks
    accumulated constraint violation; each iteration takes one projected
    step along the objective gradient plus the queue-weighted constraint
    gradients, then grows the queue by the fresh violation (floored so the
    queue always dominates the most recent slack).

``pd-subgradient``
    The classical primal-dual subgradient baseline with multipliers clipped
    into ``[0, lambda_max]``.  Converges at the slower square-root rate and
    is included for comparison runs.

``dual-type``
    A proximal variant that solves a regularized subproblem each iteration.
    With ``alpha = 1/(2*gamma)`` it reproduces the ``new`` iterates exactly
    on problems with linear constraints, where the subproblem has a closed
    form; curved constraints fall back to an inner projected-gradient loop.

Runs on programs carrying an :class:`~queuegrad.instances.LpSpec` or
:class:`~queuegrad.instances.QpSpec` structure dispatch to compiled kernels;
everything else goes through the pure-numpy step functions below, which
produce bit-identical records on the structured problems.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import (
    ConfigError,
    ConvergenceError,
    _vector,
)
from .instances import LpSpec, QpSpec

ALGORITHMS = ("new", "pd-subgradient", "dual-type")

# box-diagonal fractions probed when hunting for a strictly feasible point;
# the midpoint first, then the corners, then progressively lopsided blends
SLATER_FRACTIONS = (0.5, 0.0, 1.0, 0.25, 0.75, 0.1, 0.9, 0.05, 0.01)

LAMBDA_MAX_FALLBACK = 1e6


class VirtualQueue:
    """Nonnegative per-constraint backlog driving the queue methods.

    ``values[k]`` accumulates the violation history of constraint ``k``;
    the update keeps it both nonnegative and at least as large as the
    magnitude of the latest slack.
    """

    __slots__ = ("values",)

    def __init__(self, values):
        v = np.asarray(values, dtype=float)
        if v.ndim != 1:
            raise ConfigError("queue values must be a vector")
        if not np.all(v >= 0.0):
            raise ConfigError("queue values must be nonnegative")
        self.values = v

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return "VirtualQueue(%r)" % (self.values,)

    @property
    def norm(self):
        return float(np.linalg.norm(self.values))

    def updated(self, g):
        """Return the queue after absorbing constraint values ``g``."""
        g = np.asarray(g, dtype=float)
        if g.shape != self.values.shape:
            raise ConfigError("constraint vector length does not match queue")
        return VirtualQueue(np.maximum(-g, self.values + g))


def init_virtual_queue(program, x_init):
    """Starting queue for ``x_init``: componentwise ``max(0, -g_k(x_init))``."""
    g = program.constraint_values(x_init)
    return VirtualQueue(np.maximum(0.0, -g))


@dataclass
class SolverState:
    """One step of solver progress.

    ``x`` is the latest iterate, ``queue`` the virtual queue (or the
    multiplier vector for the subgradient baseline), ``running_sum`` the sum
    of the ``samples`` iterates that enter the running average.  The queue
    methods average the produced iterates only; the baseline's average
    includes its start point.
    """

    t: int
    x: np.ndarray
    queue: np.ndarray
    running_sum: np.ndarray
    samples: int

    @property
    def average(self):
        if self.samples == 0:
            raise ConfigError("no iterates produced yet; average is undefined")
        return self.running_sum / self.samples


def initial_state(program, x_init, algorithm="new"):
    """Build the starting :class:`SolverState` for ``algorithm``."""
    x0 = _vector(x_init, program.n, "x_init")
    if not program.box.contains(x0):
        raise ConfigError("x_init must lie inside the box")
    if algorithm in ("new", "dual-type"):
        queue = init_virtual_queue(program, x0).values
        return SolverState(0, x0, queue, np.zeros(program.n), 0)
    if algorithm == "pd-subgradient":
        return SolverState(0, x0, np.zeros(program.m), x0.copy(), 1)
    raise ConfigError("unknown algorithm %r; expected one of %s"
                      % (algorithm, ", ".join(ALGORITHMS)))


def direction(program, x, queue):
    """Search direction of the queue method at ``x`` with queue ``queue``.

    Objective gradient plus constraint gradients weighted by queue-plus-
    current-value, so constraints near violation push immediately.
    """
    queue = np.asarray(queue, dtype=float)
    g, grads = program.evaluate_constraints(x)
    return program.objective.gradient(x) + grads.T @ (queue + g)


def step_new_algorithm(program, state, gamma):
    """Advance the queue method one iteration with step size ``gamma``."""
    d = direction(program, state.x, state.queue)
    x_new = program.box.project(state.x - gamma * d)
    g_new = program.constraint_values(x_new)
    q_new = np.maximum(-g_new, state.queue + g_new)
    return SolverState(state.t + 1, x_new, q_new,
                       state.running_sum + x_new, state.samples + 1)


def step_pd_subgradient(program, state, c, lambda_max,
                        include_objective_gradient=True):
    """Advance the primal-dual subgradient baseline one iteration.

    Both the primal step and the multiplier update use the constraint data
    at the incoming iterate.  ``lambda_max`` caps each multiplier (scalar or
    per-constraint vector).
    """
    lam_max = np.broadcast_to(np.asarray(lambda_max, dtype=float),
                              (program.m,))
    g, grads = program.evaluate_constraints(state.x)
    d = grads.T @ state.queue
    if include_objective_gradient:
        d = d + program.objective.gradient(state.x)
    x_new = program.box.project(state.x - c * d)
    lam_new = np.clip(state.queue + c * g, 0.0, lam_max)
    return SolverState(state.t + 1, x_new, lam_new,
                       state.running_sum + x_new, state.samples + 1)


@dataclass
class InnerConfig:
    """Settings for the dual-type method's inner projected-gradient loop."""

    tol: float = 1e-10
    max_iterations: int = 100_000


def _prox_objective_solve(program, x_prev, w, alpha, inner):
    """Minimize ``f(z) + w @ g(z) + alpha*||z - x_prev||^2`` over the box.

    Linear-only structure has the closed form
    ``clip(x_prev - (grad_f + grads' w) / (2*alpha))``.  Otherwise run
    projected gradient with the constant step ``1/L_phi`` where ``L_phi``
    sums the smoothness moduli; stops when the projected-gradient residual
    falls below ``tol * (1 + ||z||)``.
    """
    spec = program.structure
    if isinstance(spec, LpSpec):
        d = spec.c + spec.A.T @ w
        return program.box.project(x_prev - d / (2.0 * alpha))
    L_phi = program.objective.modulus + 2.0 * alpha
    for k, fn in enumerate(program.constraints):
        L_phi += w[k] * fn.modulus
    if not np.isfinite(L_phi) or L_phi <= 0.0:
        raise ConfigError("cannot size the inner step: smoothness moduli "
                          "and alpha give L=%r" % L_phi)
    z = x_prev.copy()
    residual = np.inf
    for _ in range(inner.max_iterations):
        grad = program.objective.gradient(z) + 2.0 * alpha * (z - x_prev)
        _, grads = program.evaluate_constraints(z)
        grad = grad + grads.T @ w
        z_next = program.box.project(z - grad / L_phi)
        residual = float(np.linalg.norm(z - z_next))
        z = z_next
        if residual <= inner.tol * (1.0 + float(np.linalg.norm(z_next))):
            return z
    raise ConvergenceError(
        "inner solve stalled after %d iterations (residual %.3e)"
        % (inner.max_iterations, residual), residual=residual)


def step_dual_type(program, state, alpha, inner=None):
    """Advance the proximal dual-type method one iteration."""
    if inner is None:
        inner = InnerConfig()
    g_prev = program.constraint_values(state.x)
    w = state.queue + g_prev
    x_new = _prox_objective_solve(program, state.x, w, alpha, inner)
    g_new = program.constraint_values(x_new)
    q_new = np.maximum(-g_new, state.queue + g_new)
    return SolverState(state.t + 1, x_new, q_new,
                       state.running_sum + x_new, state.samples + 1)


def select_gamma(constants):
    """The largest step size the convergence guarantees cover.

    Requires a multiplier bound when any constraint is curved; attach one
    with :meth:`~queuegrad.model.ConstantsPack.with_lambda_bound`.
    """
    if constants.gamma_max is None:
        raise ConfigError(
            "step size needs a multiplier bound when constraints are "
            "curved; attach one with with_lambda_bound() or pass an "
            "explicit step")
    return constants.gamma_max


def multiplier_bound(program, slater_point, dual_value_lower):
    """Bound on any optimal multiplier vector's norm via a strict point.

    ``(f(slater_point) - dual_value_lower) / min_k(-g_k(slater_point))``.
    The point must satisfy every constraint strictly.
    """
    x_hat = _vector(slater_point, program.n, "slater_point")
    if not program.box.contains(x_hat):
        raise ConfigError("slater_point must lie inside the box")
    g = program.constraint_values(x_hat)
    k = int(np.argmax(g))
    if g[k] >= 0.0:
        raise ConfigError(
            "point is not strictly feasible: constraint %d has value %.6g "
            "(needs < 0)" % (k + 1, g[k]))
    f_hat = float(program.objective.value(x_hat))
    dual_value_lower = float(dual_value_lower)
    if dual_value_lower > f_hat:
        raise ConfigError(
            "dual lower bound %.6g exceeds the objective value %.6g at the "
            "strictly feasible point" % (dual_value_lower, f_hat))
    return (f_hat - dual_value_lower) / float(-g[k])


def find_slater_point(program):
    """Search the box diagonal for a strictly feasible point.

    Tries a fixed ladder of blend fractions between the lower and upper
    corners and returns the first strict point, or ``None``.
    """
    lo, hi = program.box.lower, program.box.upper
    for phi in SLATER_FRACTIONS:
        x = lo + phi * (hi - lo)
        g = program.constraint_values(x)
        if float(np.max(g)) < 0.0:
            return x
    return None


def dual_value_lower_bound(program):
    """Cheap lower bound on the dual optimum for structured programs.

    Both families have objectives whose quadratic part is nonnegative, so
    ``sum_i min(c_i * lower_i, c_i * upper_i)`` under-estimates the
    objective everywhere on the box.  Returns ``None`` without structure.
    """
    spec = program.structure
    if spec is None:
        return None
    return float(np.minimum(spec.c * spec.lower, spec.c * spec.upper).sum())


def derive_lambda_bound(program):
    """Multiplier bound from the diagonal search and the box lower bound.

    ``None`` when no strict point is found or the program has no structure.
    """
    x_hat = find_slater_point(program)
    q_lower = dual_value_lower_bound(program)
    if x_hat is None or q_lower is None:
        return None
    return multiplier_bound(program, x_hat, q_lower)


def ensure_lambda_bound(program, constants):
    """Return ``constants`` with a derived multiplier bound attached.

    No-op when a bound is already present or none can be derived.
    """
    if constants.lambda_bound is not None:
        return constants
    bound = derive_lambda_bound(program)
    if bound is None:
        return constants
    return constants.with_lambda_bound(bound)


@dataclass
class SolverTrace:
    """Per-iteration records of one run.

    Row ``r`` holds the iterate produced after ``r`` steps (row 0 is the
    start point), the running average, the queue/multiplier vector after
    ``r`` updates, objective values at both, constraint values at the
    average, the queue norm, and the one-step change of half the squared
    queue norm.  ``meta`` carries the algorithm, resolved step sizes, the
    start point, wall time, and an ``error`` string when the run stopped
    early on a numerical failure (rows are truncated to the valid prefix).
    """

    t: np.ndarray
    x: np.ndarray
    xbar: np.ndarray
    queue: np.ndarray
    f_x: np.ndarray
    f_xbar: np.ndarray
    g_xbar: np.ndarray
    q_norm: np.ndarray
    drift: np.ndarray
    meta: dict

    @property
    def rows(self):
        return self.t.size

    @property
    def n(self):
        return self.x.shape[1]

    @property
    def m(self):
        return self.queue.shape[1]

    @property
    def failed(self):
        return self.meta.get("error") is not None

    @property
    def final_xbar(self):
        return self.xbar[-1]

    @property
    def final_f_xbar(self):
        return float(self.f_xbar[-1])

    @property
    def final_max_violation(self):
        return float(np.max(self.g_xbar[-1]))


def _alloc_records(rows, n, m):
    return (np.empty((rows, n)), np.empty((rows, n)), np.empty((rows, m)),
            np.empty(rows), np.empty(rows), np.empty((rows, m)),
            np.empty(rows), np.empty(rows))


def _default_x_init(program):
    spec = program.structure
    if isinstance(spec, LpSpec):
        return program.box.upper.copy()
    if isinstance(spec, QpSpec):
        return program.box.lower.copy()
    raise ConfigError("x_init is required for programs without an attached "
                      "instance structure")


def _resolve_step(algorithm, step, constants):
    """Map the user-facing ``step`` to the per-algorithm parameters."""
    if isinstance(step, str):
        if step != "auto":
            raise ConfigError("step must be 'auto' or a positive number, "
                              "got %r" % (step,))
        if constants is None:
            raise ConfigError("step='auto' needs a ConstantsPack")
        gamma = select_gamma(constants)
        if not (np.isfinite(gamma) and gamma > 0.0):
            raise ConfigError("derived step size %r is unusable; pass an "
                              "explicit step" % (gamma,))
        if algorithm == "dual-type":
            # alpha derived from gamma; keep the exact closed-form step
            return {"alpha": 1.0 / (2.0 * gamma), "eta": gamma,
                    "step_mode": "auto"}
        key = "gamma" if algorithm == "new" else "c"
        return {key: gamma, "step_mode": "auto"}
    value = float(step)
    if not (np.isfinite(value) and value > 0.0):
        raise ConfigError("step must be positive and finite, got %r"
                          % (step,))
    if algorithm == "dual-type":
        return {"alpha": value, "eta": 1.0 / (2.0 * value),
                "step_mode": "explicit"}
    key = "gamma" if algorithm == "new" else "c"
    return {key: value, "step_mode": "explicit"}


def _resolve_lambda_max(program, constants, lambda_max):
    if lambda_max is not None:
        vec = np.broadcast_to(np.asarray(lambda_max, dtype=float),
                              (program.m,)).copy()
        if not np.all(vec > 0.0):
            raise ConfigError("lambda_max must be positive")
        return vec
    bound = constants.lambda_bound if constants is not None else None
    if bound is None:
        bound = derive_lambda_bound(program)
    if bound is None:
        return np.full(program.m, LAMBDA_MAX_FALLBACK)
    return np.full(program.m, 2.0 * bound + 1.0)


def run(program, constants=None, algorithm="new", iterations=100_000,
        step="auto", x_init=None, include_objective_gradient=True,
        lambda_max=None, inner=None, target_gap=None):
    """Run a solver and collect the full per-iteration trace.

    Parameters
    ----------
    program : ConvexProgram
    constants : ConstantsPack, optional
        Needed for ``step='auto'`` and for ``target_gap``.
    algorithm : {'new', 'pd-subgradient', 'dual-type'}
    iterations : int
        Iteration budget, at least 1.
    step : 'auto' or float
        ``gamma`` for ``new``, ``c`` for the baseline, ``alpha`` for
        ``dual-type`` (where 'auto' sets ``alpha = 1/(2*gamma)``).
    x_init : vector, 'lower', 'upper', or None
        ``None`` picks the family default (upper corner for LPs, lower for
        QPs); required explicitly otherwise.
    include_objective_gradient : bool
        Baseline only: include the objective gradient in the primal step.
    lambda_max : float or vector, optional
        Baseline multiplier cap; defaults to ``2*lambda_bound + 1`` when a
        bound is available, else ``1e6``.
    inner : InnerConfig, optional
        Dual-type inner-loop settings.
    target_gap : float, optional
        Shrink the budget to the first iteration where the guaranteed
        objective gap bound drops below this value (``new`` only).

    Returns
    -------
    SolverTrace
        Rows are truncated and ``meta['error']`` set if magnitudes overflow
        the numerical guard mid-run.

    Raises
    ------
    ConfigError
        Bad algorithm, budget, step, or start point.
    ConvergenceError
        Dual-type inner loop exhausted its iteration cap.
    """
    if algorithm not in ALGORITHMS:
        raise ConfigError("unknown algorithm %r; expected one of %s"
                          % (algorithm, ", ".join(ALGORITHMS)))
    iterations = int(iterations)
    if iterations < 1:
        raise ConfigError("iterations must be >= 1")

    if x_init is None:
        x0 = _default_x_init(program)
    elif isinstance(x_init, str):
        if x_init == "lower":
            x0 = program.box.lower.copy()
        elif x_init == "upper":
            x0 = program.box.upper.copy()
        else:
            raise ConfigError("x_init must be 'lower', 'upper', or a vector")
    else:
        x0 = _vector(x_init, program.n, "x_init")
        if not program.box.contains(x0):
            raise ConfigError("x_init must lie inside the box")

    params = _resolve_step(algorithm, step, constants)

    if target_gap is not None:
        if algorithm != "new":
            raise ConfigError("target_gap applies to the 'new' algorithm "
                              "only")
        if constants is None:
            raise ConfigError("target_gap needs a ConstantsPack")
        target_gap = float(target_gap)
        if target_gap <= 0.0:
            raise ConfigError("target_gap must be positive")
        needed = int(np.ceil(constants.R ** 2
                             / (2.0 * params["gamma"] * target_gap)))
        iterations = max(1, min(iterations, needed))
        params["target_gap"] = target_gap

    if inner is None:
        inner = InnerConfig()

    meta = {"algorithm": algorithm, "iterations": iterations,
            "x_init": x0.copy(), "error": None}
    meta.update(params)
    if algorithm == "pd-subgradient":
        lam_max = _resolve_lambda_max(program, constants, lambda_max)
        meta["lambda_max"] = lam_max
        meta["include_objective_gradient"] = bool(include_objective_gradient)

    spec = program.structure
    rows = iterations + 1
    xs, xbars, qs, fx, fxbar, gxbar, qn, drift = _alloc_records(
        rows, program.n, program.m)

    start = time.perf_counter()
    inner_fail = None
    if isinstance(spec, LpSpec):
        meta["family"] = "lp"
        if algorithm == "new":
            t_stop = _kernels.lp_queue_run(
                spec.A, spec.b, spec.c, spec.lower, spec.upper, x0,
                params["gamma"], iterations,
                xs, xbars, qs, fx, fxbar, gxbar, qn, drift)
        elif algorithm == "dual-type":
            t_stop = _kernels.lp_queue_run(
                spec.A, spec.b, spec.c, spec.lower, spec.upper, x0,
                params["eta"], iterations,
                xs, xbars, qs, fx, fxbar, gxbar, qn, drift)
        else:
            t_stop = _kernels.lp_pd_run(
                spec.A, spec.b, spec.c, spec.lower, spec.upper, x0,
                params["c"], lam_max, bool(include_objective_gradient),
                iterations, xs, xbars, qs, fx, fxbar, gxbar, qn, drift)
    elif isinstance(spec, QpSpec):
        meta["family"] = "qp"
        if algorithm == "new":
            t_stop = _kernels.qp_queue_run(
                spec.P, spec.c, spec.A, spec.b, spec.Q, spec.d, spec.e,
                spec.lower, spec.upper, x0, params["gamma"], iterations,
                xs, xbars, qs, fx, fxbar, gxbar, qn, drift)
        elif algorithm == "dual-type":
            inner_fail = np.empty(2)
            L_f = 2.0 * float(np.linalg.norm(spec.P, "fro"))
            L_gq = 2.0 * float(np.linalg.norm(spec.Q, "fro"))
            t_stop = _kernels.qp_dual_run(
                spec.P, spec.c, spec.A, spec.b, spec.Q, spec.d, spec.e,
                spec.lower, spec.upper, x0, params["alpha"], L_f, L_gq,
                inner.tol, int(inner.max_iterations), iterations,
                xs, xbars, qs, fx, fxbar, gxbar, qn, drift, inner_fail)
        else:
            t_stop = _kernels.qp_pd_run(
                spec.P, spec.c, spec.A, spec.b, spec.Q, spec.d, spec.e,
                spec.lower, spec.upper, x0, params["c"], lam_max,
                bool(include_objective_gradient), iterations,
                xs, xbars, qs, fx, fxbar, gxbar, qn, drift)
    else:
        meta["family"] = "generic"
        t_stop = _generic_run(program, algorithm, iterations, x0, params,
                              include_objective_gradient,
                              meta.get("lambda_max"), inner,
                              xs, xbars, qs, fx, fxbar, gxbar, qn, drift)
    meta["wall_time"] = time.perf_counter() - start

    if inner_fail is not None and inner_fail[0] >= 0.0:
        raise ConvergenceError(
            "inner solve stalled at iteration %d (residual %.3e); raise "
            "inner.max_iterations or loosen inner.tol"
            % (int(inner_fail[0]), inner_fail[1]),
            residual=float(inner_fail[1]))

    meta["completed"] = int(t_stop)
    if t_stop < iterations:
        meta["error"] = ("numerical overflow at iteration %d: magnitudes "
                         "exceeded %.1e" % (int(t_stop), _kernels.GUARD))
        rows = int(t_stop) + 1
        xs, xbars, qs = xs[:rows], xbars[:rows], qs[:rows]
        fx, fxbar, gxbar = fx[:rows], fxbar[:rows], gxbar[:rows]
        qn, drift = qn[:rows], drift[:rows]

    return SolverTrace(np.arange(xs.shape[0], dtype=np.int64),
                       xs, xbars, qs, fx, fxbar, gxbar, qn, drift, meta)


def _generic_run(program, algorithm, iterations, x0, params,
                 include_objective_gradient, lam_max, inner,
                 xs, xbars, qs, fx, fxbar, gxbar, qn, drift):
    """Pure-python driver used when no structured kernel applies."""
    state = initial_state(program, x0, algorithm)
    xs[0] = state.x
    xbars[0] = state.x
    qs[0] = state.queue
    fx[0] = program.objective.value(state.x)
    fxbar[0] = fx[0]
    gxbar[0] = program.constraint_values(state.x)
    qn[0] = float(np.linalg.norm(state.queue))
    drift[0] = 0.0
    guard = _kernels.GUARD
    for t in range(iterations):
        if algorithm == "new":
            state = step_new_algorithm(program, state, params["gamma"])
        elif algorithm == "dual-type":
            state = step_dual_type(program, state, params["alpha"], inner)
        else:
            state = step_pd_subgradient(program, state, params["c"], lam_max,
                                        include_objective_gradient)
        if (not np.all(np.abs(state.x) <= guard)
                or not np.all(np.abs(state.queue) <= guard)):
            return t
        xbar = state.average
        xs[t + 1] = state.x
        xbars[t + 1] = xbar
        qs[t + 1] = state.queue
        fx[t + 1] = program.objective.value(state.x)
        fxbar[t + 1] = program.objective.value(xbar)
        gxbar[t + 1] = program.constraint_values(xbar)
        qnv = float(np.linalg.norm(state.queue))
        qn[t + 1] = qnv
        drift[t + 1] = 0.5 * (qnv * qnv - qn[t] * qn[t])
        if not np.isfinite(fx[t + 1]) or not np.isfinite(qnv):
            return t
    return iterations
