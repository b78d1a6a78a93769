"""Trace diagnostics: invariant checks, rate fitting, drift series.

Every structural property the queue methods guarantee is checked directly
against a recorded :class:`~queuegrad.solvers.SolverTrace`.  Checks that
depend on unavailable data (an optimal value, a multiplier bound, a step
size inside the guaranteed range) are reported as skipped with a reason
rather than silently passing.
"""

from dataclasses import dataclass, field

import numpy as np

from .model import ConfigError
from .instances import LpSpec, QpSpec

# names of the checks, in report order
CHECK_NAMES = (
    "queue-nonnegative",
    "queue-shift-nonnegative",
    "queue-norm-ordering",
    "queue-partial-sum",
    "drift-bound",
    "trace-consistency",
    "queue-norm-cap",
    "objective-rate-bound",
    "constraint-rate-bound",
    "objective-partial-sum-lower",
)

_GATED = CHECK_NAMES[6:]  # guarantees stated for the 'new' method only


@dataclass
class CheckResult:
    """Outcome of one invariant check.

    ``worst`` is the largest tolerance-adjusted excess over all rows
    (nonpositive means the check passed everywhere); ``at`` is the record
    index where it occurred.  Skipped checks carry a ``detail`` reason.
    """

    name: str
    status: str  # "pass" | "fail" | "skip"
    worst: float = None
    at: int = None
    detail: str = ""

    @property
    def passed(self):
        return self.status == "pass"


@dataclass
class InvariantReport:
    """All check results for one trace."""

    checks: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self):
        return all(c.status != "fail" for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if c.status == "fail"]

    @property
    def skipped(self):
        return [c for c in self.checks if c.status == "skip"]

    def format(self):
        lines = []
        for c in self.checks:
            if c.status == "skip":
                lines.append("%-28s skip   (%s)" % (c.name, c.detail))
            else:
                lines.append("%-28s %-4s   worst excess %.3e at t=%d"
                             % (c.name, c.status, c.worst, c.at))
        return "\n".join(lines)


def _tol(scale):
    return 1e-9 * (1.0 + scale)


def _worst(excess, t_index):
    """(worst value, record index) for a tolerance-adjusted excess array."""
    i = int(np.argmax(excess))
    return float(excess[i]), int(t_index[i])


def _result(name, excess, t_index):
    worst, at = _worst(excess, t_index)
    status = "pass" if worst <= 0.0 else "fail"
    return CheckResult(name, status, worst, at)


def _g_at_rows(program, X):
    """Constraint values at every row of ``X``, fast for structured programs."""
    spec = program.structure
    if isinstance(spec, LpSpec):
        return X @ spec.A.T - spec.b
    if isinstance(spec, QpSpec):
        lin = X @ spec.A.T - spec.b
        quad = np.einsum("ri,ij,rj->r", X, spec.Q, X) + X @ spec.d - spec.e
        return np.column_stack([lin, quad])
    return np.array([program.constraint_values(x) for x in X])


def check_trace(trace, program, constants=None, f_star=None,
                lambda_bound=None):
    """Check every queue-method invariant a trace should satisfy.

    Parameters
    ----------
    trace : SolverTrace
        A trace from the ``new`` or ``dual-type`` algorithm.  The
        subgradient baseline keeps no virtual queue, so its traces are
        rejected with :class:`ConfigError`.
    program : ConvexProgram
        The program the trace was produced on (used to re-evaluate
        constraints at the recorded iterates).
    constants : ConstantsPack, optional
        Enables the queue-cap and rate-bound checks (needs ``R``, ``C``,
        ``lambda_bound``, ``gamma_max``).
    f_star : float, optional
        Optimal value; enables the objective-side checks.
    lambda_bound : float, optional
        Overrides ``constants.lambda_bound`` for the bound-dependent
        checks.

    Returns
    -------
    InvariantReport
    """
    alg = trace.meta.get("algorithm")
    if alg == "pd-subgradient":
        raise ConfigError(
            "invariant checks apply to the queue-driven methods; the "
            "subgradient baseline keeps no virtual queue")
    if alg not in ("new", "dual-type"):
        raise ConfigError("trace has unknown algorithm %r" % (alg,))

    t = trace.t
    Q = trace.queue
    qn = trace.q_norm
    rows = trace.rows
    g_rows = _g_at_rows(program, trace.x)
    g_row_norms = np.linalg.norm(g_rows, axis=1)

    report = InvariantReport()

    # queue-nonnegative: every queue entry is >= 0, exactly.
    excess = -Q.min(axis=1)
    report.checks.append(_result("queue-nonnegative", excess, t))

    # queue-shift-nonnegative: Q + g at the iterate the queue absorbed
    # stays componentwise nonnegative (row r pairs Q(r) with x of row r).
    shifted = Q + g_rows
    excess = -shifted.min(axis=1) - _tol(np.abs(g_rows).max(axis=1))
    report.checks.append(_result("queue-shift-nonnegative", excess, t))

    # queue-norm-ordering: ||Q(0)|| <= ||g(start)||; afterwards the queue
    # norm dominates the latest constraint-value norm.
    e0 = qn[0] - g_row_norms[0] - _tol(g_row_norms[0])
    elater = g_row_norms[1:] - qn[1:] - _tol(qn[1:])
    excess = np.concatenate([[e0], elater])
    report.checks.append(_result("queue-norm-ordering", excess, t))

    # queue-partial-sum: each queue entry dominates the running sum of
    # constraint values over the produced iterates.
    if rows > 1:
        sums = np.cumsum(g_rows[1:], axis=0)
        excess = (sums - Q[1:] - _tol(np.abs(sums))).max(axis=1)
        report.checks.append(_result("queue-partial-sum", excess, t[1:]))
    else:
        report.checks.append(CheckResult("queue-partial-sum", "pass",
                                         -np.inf, 0))

    # drift-bound: the one-step change of half the squared queue norm is at
    # most Q'g + ||g||^2 evaluated at the absorbed iterate.
    if rows > 1:
        cross = (Q[:-1] * g_rows[1:]).sum(axis=1)
        gsq = (g_rows[1:] ** 2).sum(axis=1)
        bound = cross + gsq
        excess = trace.drift[1:] - bound - _tol(qn[:-1] ** 2 + gsq)
        report.checks.append(_result("drift-bound", excess, t[1:]))
    else:
        report.checks.append(CheckResult("drift-bound", "pass", -np.inf, 0))

    # trace-consistency: stored derived columns agree with the primary ones.
    parts = []
    parts.append((np.abs(qn - np.linalg.norm(Q, axis=1))
                  - 1e-12 * (1.0 + qn), t))
    dr = 0.5 * (qn[1:] ** 2 - qn[:-1] ** 2)
    if rows > 1:
        parts.append((np.abs(trace.drift[1:] - dr)
                      - 1e-12 * (1.0 + qn[1:] ** 2), t[1:]))
        means = np.cumsum(trace.x[1:], axis=0) / t[1:, None]
        parts.append(((np.abs(trace.xbar[1:] - means)
                       - 1e-12 * (1.0 + np.abs(means))).max(axis=1), t[1:]))
    lo, hi = program.box.lower, program.box.upper
    span = 1e-12 * (1.0 + float(np.max(np.abs(np.concatenate([lo, hi])))))
    for arr in (trace.x, trace.xbar):
        out = np.maximum(lo - arr, arr - hi).max(axis=1) - span
        parts.append((out, t))
    worst, at = max((_worst(e, ti) for e, ti in parts), key=lambda p: p[0])
    report.checks.append(CheckResult(
        "trace-consistency", "pass" if worst <= 0.0 else "fail", worst, at))

    # --- checks tied to the step-size guarantees of the 'new' method ---

    def skip(name, reason):
        report.checks.append(CheckResult(name, "skip", detail=reason))

    if alg != "new":
        for name in _GATED:
            skip(name, "guarantee stated for the 'new' algorithm only")
        return report

    gamma = trace.meta.get("gamma")
    lam = lambda_bound
    if lam is None and constants is not None:
        lam = constants.lambda_bound
    gamma_max = constants.gamma_max if constants is not None else None
    gamma_ok = (gamma is not None and gamma_max is not None
                and gamma <= gamma_max * (1.0 + 1e-12))

    if constants is None:
        for name in _GATED:
            skip(name, "no ConstantsPack supplied")
        return report

    cap = None
    if lam is not None and gamma is not None:
        cap = 2.0 * lam + constants.R / np.sqrt(gamma) + constants.C

    # queue-norm-cap: ||Q(t)|| stays below 2*lambda_bound + R/sqrt(gamma) + C.
    if cap is None:
        skip("queue-norm-cap", "needs a multiplier bound")
    elif not gamma_ok:
        skip("queue-norm-cap", "step size exceeds the guaranteed range")
    else:
        excess = qn - cap - _tol(cap)
        report.checks.append(_result("queue-norm-cap", excess, t))

    # objective-rate-bound: f(average) - f_star <= R^2 / (2*gamma*t).
    if f_star is None:
        skip("objective-rate-bound", "needs f_star")
    elif not gamma_ok:
        skip("objective-rate-bound", "step size exceeds the guaranteed range")
    elif rows > 1:
        bound = constants.R ** 2 / (2.0 * gamma * t[1:])
        excess = (trace.f_xbar[1:] - f_star) - bound - _tol(abs(f_star))
        report.checks.append(_result("objective-rate-bound", excess, t[1:]))
    else:
        report.checks.append(CheckResult("objective-rate-bound", "pass",
                                         -np.inf, 0))

    # constraint-rate-bound: g_k(average) <= cap / t for every k.
    if cap is None:
        skip("constraint-rate-bound", "needs a multiplier bound")
    elif not gamma_ok:
        skip("constraint-rate-bound",
             "step size exceeds the guaranteed range")
    elif rows > 1:
        bound = cap / t[1:]
        excess = (trace.g_xbar[1:].max(axis=1) - bound
                  - _tol(abs(cap)))
        report.checks.append(_result("constraint-rate-bound", excess, t[1:]))
    else:
        report.checks.append(CheckResult("constraint-rate-bound", "pass",
                                         -np.inf, 0))

    # objective-partial-sum-lower: the running objective sum over produced
    # iterates is at least t*f_star - lambda_bound*||Q(t)||.
    if f_star is None or lam is None:
        skip("objective-partial-sum-lower",
             "needs f_star and a multiplier bound")
    elif rows > 1:
        fsum = np.cumsum(trace.f_x[1:])
        bound = t[1:] * f_star - lam * qn[1:]
        excess = bound - fsum - _tol(np.abs(bound))
        report.checks.append(_result("objective-partial-sum-lower",
                                     excess, t[1:]))
    else:
        report.checks.append(CheckResult("objective-partial-sum-lower",
                                         "pass", -np.inf, 0))

    return report


@dataclass
class RateFit:
    """Least-squares power law ``err ~ amplitude * t**slope``."""

    slope: float
    intercept: float
    n_points: int
    residual: float
    window: tuple

    @property
    def amplitude(self):
        return 10.0 ** self.intercept

    def predict(self, t):
        return self.amplitude * np.asarray(t, dtype=float) ** self.slope


def fit_rate(t, err, window=(1e3, 1e5)):
    """Fit ``log10(err)`` against ``log10(t)`` over a window.

    Points with nonpositive error or outside ``window`` are dropped; at
    least 10 must remain.

    Returns
    -------
    RateFit

    Raises
    ------
    ConfigError
        Fewer than 10 usable points.
    """
    t = np.asarray(t, dtype=float)
    err = np.asarray(err, dtype=float)
    if t.shape != err.shape:
        raise ConfigError("t and err must have the same length")
    lo, hi = float(window[0]), float(window[1])
    if not (lo > 0.0 and hi > lo):
        raise ConfigError("window must satisfy 0 < lo < hi")
    mask = (t >= lo) & (t <= hi) & (err > 0.0) & (t > 0.0)
    n = int(mask.sum())
    if n < 10:
        raise ConfigError(
            "rate fit needs at least 10 points with positive error inside "
            "the window, found %d" % n)
    lt = np.log10(t[mask])
    le = np.log10(err[mask])
    slope, intercept = np.polyfit(lt, le, 1)
    resid = float(np.sqrt(np.mean((le - (slope * lt + intercept)) ** 2)))
    return RateFit(float(slope), float(intercept), n, resid, (lo, hi))


def objective_gap_series(trace, f_star):
    """(t, |f(average) - f_star|) for rows past the start point."""
    gaps = np.abs(trace.f_xbar[1:] - float(f_star))
    return trace.t[1:].astype(float), gaps


def drift_series(trace):
    """(t, drift) pairs: half the squared queue-norm change per step."""
    deltas = 0.5 * (trace.q_norm[1:] ** 2 - trace.q_norm[:-1] ** 2)
    return trace.t[:-1].astype(float), deltas


def constraint_onsets(trace):
    """First record index from which each averaged constraint stays
    satisfied through the end of the trace (``None`` if it never does)."""
    onsets = []
    for k in range(trace.m):
        col = trace.g_xbar[1:, k]
        bad = np.nonzero(col > 0.0)[0]
        if bad.size == 0:
            onsets.append(1)
        elif bad[-1] == col.size - 1:
            onsets.append(None)
        else:
            onsets.append(int(trace.t[1:][bad[-1] + 1]))
    return onsets
