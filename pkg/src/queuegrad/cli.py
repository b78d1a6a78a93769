"""Command-line front end: solve, verify, rate, compare, oracle.

Trace CSV schema
----------------
Leading ``#`` comment lines carry run metadata as ``key=value`` pairs, then
one header row and one data row per record::

    t,f_x,f_xbar,g_xbar_1..g_xbar_m,q_norm,drift,x_1..x_n

The ``x`` columns can be dropped with ``--no-x-columns`` for large ``n``
(``verify`` then has nothing to reconstruct from and refuses the file).
Floats are printed with 17 significant digits so parsing reproduces the
exact doubles; files are ASCII with LF line endings and contain no
timestamps, so identical configurations write byte-identical traces.

Exit codes
----------
0 success, 1 configuration/parse error, 2 numerical failure or infeasible
problem, 3 verification found a failing check.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .model import (
    ConfigError,
    InfeasibleError,
    NumericalError,
    ParseError,
)
from .instances import LpSpec, QpSpec, build_program, random_instance
from .solvers import InnerConfig, SolverTrace, ensure_lambda_bound, run
from .diagnostics import (
    CheckResult,
    check_trace,
    constraint_onsets,
    fit_rate,
    objective_gap_series,
    _g_at_rows,
)
from .oracle import reference_solve

_FLOAT = "%.17g"


def _thread_cap():
    raw = os.environ.get("QUEUEGRAD_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError("QUEUEGRAD_THREADS must be an integer, got %r"
                          % raw)
    if cap < 1:
        raise ConfigError("QUEUEGRAD_THREADS must be >= 1")
    return cap


@dataclass
class RunConfig:
    """Validated solve configuration assembled from CLI flags."""

    algorithm: str = "new"
    iterations: int = 100_000
    step: object = "auto"
    x_init: object = None
    output: str = "trace.csv"
    include_x: bool = True
    include_objective_gradient: bool = True
    lambda_bound: float = None
    lambda_max: float = None
    inner_tol: float = 1e-10
    inner_max_iterations: int = 100_000
    target_gap: float = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if isinstance(self.step, str) and self.step != "auto":
            raise ConfigError("step must be 'auto' or a number, got %r"
                              % (self.step,))


# ---------------------------------------------------------------------------
# problem files


def _number(value, label, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError("%s: %s must be a number, got %r"
                        % (path, label, value))
    return float(value)


def _vector_field(obj, key, path):
    value = obj[key]
    if not isinstance(value, list) or not value:
        raise ParseError("%s: %s must be a non-empty array" % (path, key))
    return np.array([_number(v, "%s[%d]" % (key, i), path)
                     for i, v in enumerate(value)])


def _matrix_field(obj, key, path):
    value = obj[key]
    if not isinstance(value, list) or not value:
        raise ParseError("%s: %s must be a non-empty array of rows"
                        % (path, key))
    width = None
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise ParseError("%s: row %d of %s is not an array"
                            % (path, i + 1, key))
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError("%s: row %d of %s has length %d, expected %d"
                            % (path, i + 1, key, len(row), width))
        rows.append([_number(v, "%s[%d][%d]" % (key, i, j), path)
                     for j, v in enumerate(row)])
    return np.array(rows)


_LP_KEYS = {"family", "name", "c", "A", "b", "lower", "upper"}
_QP_KEYS = _LP_KEYS | {"P", "Q", "d", "e"}


def parse_problem_file(path):
    """Read a JSON problem file into an :class:`LpSpec` or :class:`QpSpec`.

    Schema: object with ``family`` ("lp" or "qp"), vectors ``c``, ``b``,
    ``lower``, ``upper``, matrix ``A`` (array of row arrays), and for QPs
    additionally ``P``, ``Q``, ``d``, ``e``.  An optional ``name`` is
    ignored.  Any other key, ragged matrix, dimension mismatch, or
    non-positive-semidefinite quadratic raises :class:`ParseError`.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError("cannot read problem file %s: %s" % (path, exc))
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("malformed JSON in %s: %s" % (path, exc))
    if not isinstance(obj, dict):
        raise ParseError("%s: top level must be an object" % path)
    family = obj.get("family")
    if family not in ("lp", "qp"):
        raise ParseError("%s: family must be 'lp' or 'qp', got %r"
                        % (path, family))
    allowed = _LP_KEYS if family == "lp" else _QP_KEYS
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ParseError("%s: unknown keys: %s" % (path, ", ".join(unknown)))
    missing = sorted(allowed - {"name"} - set(obj))
    if missing:
        raise ParseError("%s: missing keys: %s" % (path, ", ".join(missing)))
    c = _vector_field(obj, "c", path)
    A = _matrix_field(obj, "A", path)
    b = _vector_field(obj, "b", path)
    lower = _vector_field(obj, "lower", path)
    upper = _vector_field(obj, "upper", path)
    try:
        if family == "lp":
            return LpSpec(c=c, A=A, b=b, lower=lower, upper=upper)
        P = _matrix_field(obj, "P", path)
        Q = _matrix_field(obj, "Q", path)
        d = _vector_field(obj, "d", path)
        e = _number(obj["e"], "e", path)
        return QpSpec(P=P, c=c, A=A, b=b, Q=Q, d=d, e=e,
                      lower=lower, upper=upper)
    except ParseError:
        raise
    except ConfigError as exc:
        raise ParseError("%s: %s" % (path, exc))


def _load_spec(args):
    """Problem spec plus a short label, from a path or --random."""
    random = getattr(args, "random", None)
    path = getattr(args, "problem", None)
    if random is not None and path is not None:
        raise ConfigError("give either a problem file or --random, not both")
    if random is not None:
        family, n, m, seed = random
        try:
            n, m, seed = int(n), int(m), int(seed)
        except ValueError:
            raise ConfigError("--random takes FAMILY N M SEED with integer "
                              "N, M, SEED")
        spec = random_instance(family, n, m, seed)
        return spec, "random-%s-n%d-m%d-seed%d" % (family, n, m, seed)
    if path is None:
        raise ConfigError("a problem file (or --random FAMILY N M SEED) is "
                          "required")
    return parse_problem_file(path), os.path.basename(path)


# ---------------------------------------------------------------------------
# trace files


def write_trace(path, trace, problem_label, include_x=True):
    """Write a trace CSV (see the module docstring for the schema)."""
    meta = trace.meta
    n, m = trace.n, trace.m
    lines = ["# queuegrad-trace"]
    lines.append("# problem=%s" % problem_label)
    lines.append("# family=%s" % meta.get("family", "generic"))
    lines.append("# algorithm=%s" % meta["algorithm"])
    lines.append("# iterations=%d" % meta["iterations"])
    alg = meta["algorithm"]
    if alg == "new":
        lines.append("# gamma=" + _FLOAT % meta["gamma"])
    elif alg == "dual-type":
        lines.append("# alpha=" + _FLOAT % meta["alpha"])
        lines.append("# eta=" + _FLOAT % meta["eta"])
    else:
        lines.append("# c=" + _FLOAT % meta["c"])
        lines.append("# lambda_max=" + ",".join(
            _FLOAT % v for v in np.atleast_1d(meta["lambda_max"])))
        lines.append("# include_objective_gradient=%d"
                     % int(meta["include_objective_gradient"]))
    lines.append("# x_init=" + ",".join(_FLOAT % v for v in meta["x_init"]))
    if meta.get("error"):
        lines.append("# completed=%d" % meta["completed"])
        lines.append("# error=%s" % meta["error"])
    header = ["t", "f_x", "f_xbar"]
    header += ["g_xbar_%d" % (k + 1) for k in range(m)]
    header += ["q_norm", "drift"]
    if include_x:
        header += ["x_%d" % (i + 1) for i in range(n)]
    lines.append(",".join(header))
    for r in range(trace.rows):
        row = [str(int(trace.t[r])), _FLOAT % trace.f_x[r],
               _FLOAT % trace.f_xbar[r]]
        row += [_FLOAT % v for v in trace.g_xbar[r]]
        row += [_FLOAT % trace.q_norm[r], _FLOAT % trace.drift[r]]
        if include_x:
            row += [_FLOAT % v for v in trace.x[r]]
        lines.append(",".join(row))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace(path):
    """Parse a trace CSV back into ``(meta, columns)``.

    ``meta`` holds the typed metadata; ``columns`` maps each header name to
    a float array.  Raises :class:`ParseError` on malformed files.
    """
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError("cannot read trace file %s: %s" % (path, exc))
    meta = {}
    header = None
    data_start = 0
    for i, line in enumerate(lines):
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = value
            continue
        header = line.split(",")
        data_start = i + 1
        break
    if header is None:
        raise ParseError("%s: no header row found" % path)
    for key in ("iterations", "completed"):
        if key in meta:
            meta[key] = int(meta[key])
    for key in ("gamma", "alpha", "eta", "c"):
        if key in meta:
            meta[key] = float(meta[key])
    if "include_objective_gradient" in meta:
        meta["include_objective_gradient"] = bool(
            int(meta["include_objective_gradient"]))
    for key in ("x_init", "lambda_max"):
        if key in meta:
            meta[key] = np.array([float(v) for v in meta[key].split(",")])
    rows = []
    for i, line in enumerate(lines[data_start:]):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise ParseError("%s: data row %d has %d fields, expected %d"
                            % (path, i, len(parts), len(header)))
        try:
            rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise ParseError("%s: data row %d: %s" % (path, i, exc))
    if not rows:
        raise ParseError("%s: no data rows" % path)
    data = np.array(rows)
    columns = {name: data[:, j] for j, name in enumerate(header)}
    return meta, columns


def _trace_from_csv(meta, columns, program):
    """Rebuild a :class:`SolverTrace` from parsed CSV columns.

    The average and queue trajectories are reconstructed from the ``x``
    columns (running mean; queue recurrence), so the file must include
    them.  Stored ``q_norm``/``drift`` columns are kept verbatim for
    cross-checking against the reconstruction.
    """
    n, m = program.n, program.m
    x_names = ["x_%d" % (i + 1) for i in range(n)]
    if not all(name in columns for name in x_names):
        raise ConfigError("trace lacks x columns; re-run solve without "
                          "--no-x-columns to enable verification")
    g_names = ["g_xbar_%d" % (k + 1) for k in range(m)]
    missing = [name for name in g_names + ["t", "f_x", "f_xbar", "q_norm",
                                           "drift"] if name not in columns]
    if missing:
        raise ConfigError("trace lacks columns: %s" % ", ".join(missing))
    X = np.column_stack([columns[name] for name in x_names])
    rows = X.shape[0]
    t = columns["t"]
    if not np.array_equal(t, np.arange(rows)):
        raise ConfigError("trace t column must run 0..%d without gaps"
                          % (rows - 1))
    g_rows = _g_at_rows(program, X)
    queue = np.empty_like(g_rows)
    queue[0] = np.maximum(0.0, -g_rows[0])
    for r in range(1, rows):
        queue[r] = np.maximum(-g_rows[r], queue[r - 1] + g_rows[r])
    xbar = np.empty_like(X)
    xbar[0] = X[0]
    if rows > 1:
        xbar[1:] = np.cumsum(X[1:], axis=0) / np.arange(1, rows)[:, None]
    g_xbar = np.column_stack([columns[name] for name in g_names])
    trace_meta = {key: meta[key] for key in
                  ("algorithm", "family", "gamma", "alpha", "eta", "c")
                  if key in meta}
    trace_meta.setdefault("algorithm", "new")
    trace_meta["iterations"] = rows - 1
    trace_meta["x_init"] = X[0].copy()
    trace_meta["error"] = None
    return SolverTrace(np.arange(rows, dtype=np.int64), X, xbar, queue,
                       columns["f_x"], columns["f_xbar"], g_xbar,
                       columns["q_norm"], columns["drift"], trace_meta)


# ---------------------------------------------------------------------------
# commands


def _build_run_config(args):
    step = args.step
    if step != "auto":
        try:
            step = float(step)
        except ValueError:
            raise ConfigError("step must be 'auto' or a number, got %r"
                              % args.step)
    x_init = args.x_init
    if x_init is not None and x_init not in ("lower", "upper"):
        try:
            x_init = np.array([float(v) for v in x_init.split(",")])
        except ValueError:
            raise ConfigError("x_init must be 'lower', 'upper', or a "
                              "comma-separated vector, got %r" % args.x_init)
    return RunConfig(
        algorithm=args.algorithm,
        iterations=args.iterations,
        step=step,
        x_init=x_init,
        output=args.output,
        include_x=not args.no_x_columns,
        include_objective_gradient=not args.no_objective_gradient,
        lambda_bound=args.lambda_bound,
        lambda_max=args.lambda_max,
        inner_tol=args.inner_tol,
        inner_max_iterations=args.inner_max_iter,
        target_gap=args.target_gap,
    )


def _prepare(spec, lambda_bound=None):
    program, constants = build_program(spec, lambda_bound=lambda_bound)
    return program, ensure_lambda_bound(program, constants)


def _step_line(meta):
    alg = meta["algorithm"]
    if alg == "new":
        return "gamma=" + _FLOAT % meta["gamma"]
    if alg == "dual-type":
        return ("alpha=" + _FLOAT % meta["alpha"]
                + " eta=" + _FLOAT % meta["eta"])
    return "c=" + _FLOAT % meta["c"]


def cmd_solve(args):
    config = _build_run_config(args)
    spec, label = _load_spec(args)
    program, constants = _prepare(spec, lambda_bound=config.lambda_bound)
    trace = run(program, constants,
                algorithm=config.algorithm,
                iterations=config.iterations,
                step=config.step,
                x_init=config.x_init,
                include_objective_gradient=config.include_objective_gradient,
                lambda_max=config.lambda_max,
                inner=InnerConfig(config.inner_tol,
                                  config.inner_max_iterations),
                target_gap=config.target_gap)
    write_trace(config.output, trace, label, include_x=config.include_x)
    print("algorithm: %s" % config.algorithm)
    print("step: %s" % _step_line(trace.meta))
    print("final f(xbar) = " + _FLOAT % trace.final_f_xbar)
    print("max constraint value at xbar = " + _FLOAT
          % trace.final_max_violation)
    print("trace: %s (%d rows)" % (config.output, trace.rows))
    if trace.failed:
        print("run failed: %s" % trace.meta["error"], file=sys.stderr)
        return 2
    return 0


def _resolve_f_star(args, spec):
    if getattr(args, "f_star", None) is not None and args.oracle:
        raise ConfigError("give either --f-star or --oracle, not both")
    if args.oracle:
        return reference_solve(spec, grid_points_per_axis=args.grid).f_star
    return args.f_star


def cmd_verify(args):
    spec, _ = _load_spec(args)
    program, constants = _prepare(spec, lambda_bound=args.lambda_bound)
    meta, columns = read_trace(args.trace)
    alg = meta.get("algorithm", "new")
    if alg != "new":
        raise ConfigError("verify requires a trace from the 'new' "
                          "algorithm, got %r" % alg)
    if "gamma" not in meta:
        raise ConfigError("trace metadata lacks gamma; cannot gate the "
                          "step-size-dependent checks")
    trace = _trace_from_csv(meta, columns, program)
    f_star = _resolve_f_star(args, spec)
    report = check_trace(trace, program, constants, f_star=f_star)

    # cross-check the stored derived columns against recomputation
    worst = -np.inf
    at = 0
    recomputed = {
        "f_x": np.array([program.objective.value(x) for x in trace.x]),
        "f_xbar": np.array([program.objective.value(x)
                            for x in trace.xbar]),
    }
    for name, values in recomputed.items():
        stored = columns[name]
        excess = np.abs(stored - values) - 1e-9 * (1.0 + np.abs(values))
        i = int(np.argmax(excess))
        if excess[i] > worst:
            worst, at = float(excess[i]), i
    g_re = _g_at_rows(program, trace.xbar)
    excess = (np.abs(trace.g_xbar - g_re)
              - 1e-9 * (1.0 + np.abs(g_re))).max(axis=1)
    i = int(np.argmax(excess))
    if excess[i] > worst:
        worst, at = float(excess[i]), i
    status = "pass" if worst <= 0.0 else "fail"
    report.checks.insert(0, CheckResult("stored-columns-consistent", status,
                                        worst, at))

    # a corrupted q_norm column must surface as a queue failure even though
    # the reconstructed queue itself is always nonnegative
    if np.any(columns["q_norm"] < 0.0):
        bad = int(np.argmin(columns["q_norm"]))
        report["queue-nonnegative"].status = "fail"
        report["queue-nonnegative"].worst = float(-columns["q_norm"][bad])
        report["queue-nonnegative"].at = bad

    print(report.format())
    if report.passed:
        print("verification passed (%d checks, %d skipped)"
              % (len(report.checks), len(report.skipped)))
        return 0
    print("verification FAILED (%d failing checks)" % len(report.failures),
          file=sys.stderr)
    return 3


def cmd_rate(args):
    meta, columns = read_trace(args.trace)
    f_star = None
    if args.oracle:
        spec, _ = _load_spec(args)
        f_star = reference_solve(spec, grid_points_per_axis=args.grid).f_star
    elif args.f_star is not None:
        f_star = args.f_star
    else:
        raise ConfigError("rate needs --f-star VALUE or --oracle with a "
                          "problem file")
    t = columns["t"]
    gaps = np.abs(columns["f_xbar"] - f_star)
    mask = t >= 1
    t, gaps = t[mask], gaps[mask]
    window = tuple(args.window)
    if args.series_out:
        with open(args.series_out, "w", encoding="ascii",
                  newline="\n") as fh:
            fh.write("t,gap\n")
            for ti, gi in zip(t, gaps):
                fh.write("%d,%s\n" % (int(ti), _FLOAT % gi))
        print("series: %s (%d rows)" % (args.series_out, t.size))
    fit = fit_rate(t, gaps, window=window)
    print("f_star = " + _FLOAT % f_star)
    print("gap definition: |f(xbar(t)) - f_star|")
    print("window: [%g, %g], %d points" % (fit.window[0], fit.window[1],
                                           fit.n_points))
    print("slope = %.6f" % fit.slope)
    print("amplitude = %.6e (rms residual %.3e)" % (fit.amplitude,
                                                    fit.residual))
    m = sum(1 for name in columns if name.startswith("g_xbar_"))
    g_xbar = np.column_stack([columns["g_xbar_%d" % (k + 1)]
                              for k in range(m)])
    for k in range(m):
        col = g_xbar[1:, k]
        bad = np.nonzero(col > 0.0)[0]
        if bad.size == 0:
            print("constraint %d: nonpositive from t=1 onward" % (k + 1))
        elif bad[-1] == col.size - 1:
            print("constraint %d: still positive at the final iteration"
                  % (k + 1))
        else:
            print("constraint %d: nonpositive from t=%d onward"
                  % (k + 1, bad[-1] + 2))
    return 0


def cmd_compare(args):
    spec, label = _load_spec(args)
    program, constants = _prepare(spec)
    f_star = reference_solve(spec, grid_points_per_axis=args.grid).f_star
    iterations = args.iterations
    algorithms = ("new", "pd-subgradient", "dual-type")

    def _one(alg):
        return run(program, constants, algorithm=alg,
                   iterations=iterations, step="auto")

    workers = min(len(algorithms), _thread_cap())
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_one, algorithms))
    else:
        traces = [_one(alg) for alg in algorithms]

    print("problem: %s    f_star = %s" % (label, _FLOAT % f_star))
    for alg, trace in zip(algorithms, traces):
        print("%-16s %s" % (alg + ":", _step_line(trace.meta)))
    marks = [t for t in (100, 1000, 10000, iterations) if t <= iterations]
    marks = sorted(set(marks))
    print("%-10s %-24s %-24s %-24s" % (("t",) + algorithms))
    for mark in marks:
        gaps = [trace.f_xbar[mark] - f_star for trace in traces]
        print("%-10d %-24s %-24s %-24s"
              % tuple([mark] + [_FLOAT % g for g in gaps]))
    print("max constraint value at xbar:")
    for mark in marks:
        worst = [float(np.max(trace.g_xbar[mark])) for trace in traces]
        print("%-10d %-24s %-24s %-24s"
              % tuple([mark] + [_FLOAT % w for w in worst]))
    return 0


def cmd_oracle(args):
    spec, label = _load_spec(args)
    solution = reference_solve(spec, grid_points_per_axis=args.grid)
    print("problem: %s" % label)
    print("method: %s" % solution.method)
    print("f_star = " + _FLOAT % solution.f_star)
    print("x_star = " + ",".join(_FLOAT % v for v in solution.x_star))
    print("certificate = " + _FLOAT % solution.certificate)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems as ConfigError (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _add_problem_args(sub):
    sub.add_argument("problem", nargs="?", default=None,
                     help="JSON problem file")
    sub.add_argument("--random", nargs=4, metavar=("FAMILY", "N", "M",
                                                   "SEED"), default=None,
                     help="generate a seeded random instance instead of "
                          "reading a file")


def build_parser():
    parser = _Parser(prog="queuegrad",
                     description="Queue-driven first-order solvers for "
                                 "box-constrained LPs and QPs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run a solver and write a trace CSV")
    _add_problem_args(p)
    p.add_argument("--algorithm", default="new",
                   choices=("new", "pd-subgradient", "dual-type"))
    p.add_argument("--iterations", type=int, default=100_000)
    p.add_argument("--step", default="auto",
                   help="'auto' or a positive number (gamma / c / alpha)")
    p.add_argument("--x-init", default=None,
                   help="'lower', 'upper', or comma-separated values")
    p.add_argument("--output", "-o", default="trace.csv")
    p.add_argument("--no-x-columns", action="store_true",
                   help="omit the x columns from the CSV")
    p.add_argument("--lambda-bound", type=float, default=None,
                   help="override the derived multiplier bound")
    p.add_argument("--lambda-max", type=float, default=None,
                   help="multiplier cap for pd-subgradient")
    p.add_argument("--no-objective-gradient", action="store_true",
                   help="drop the objective gradient from the "
                        "pd-subgradient primal step")
    p.add_argument("--inner-tol", type=float, default=1e-10)
    p.add_argument("--inner-max-iter", type=int, default=100_000)
    p.add_argument("--target-gap", type=float, default=None,
                   help="stop once the guaranteed objective gap bound "
                        "drops below this value")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="re-check a trace against the "
                                      "method's guarantees")
    p.add_argument("trace", help="trace CSV written by solve")
    _add_problem_args(p)
    p.add_argument("--f-star", type=float, default=None)
    p.add_argument("--oracle", action="store_true",
                   help="obtain f_star from the reference oracle")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--lambda-bound", type=float, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rate", help="fit the log-log convergence slope")
    p.add_argument("trace")
    _add_problem_args(p)
    p.add_argument("--f-star", type=float, default=None)
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--window", nargs=2, type=float, default=(1e3, 1e5),
                   metavar=("LO", "HI"))
    p.add_argument("--series-out", default=None,
                   help="write the (t, gap) series to this CSV")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("compare", help="run all three algorithms "
                                       "side by side")
    _add_problem_args(p)
    p.add_argument("--iterations", type=int, default=100_000)
    p.add_argument("--grid", type=int, default=200)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="solve with the reference oracle")
    _add_problem_args(p)
    p.add_argument("--grid", type=int, default=200)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ParseError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except (NumericalError, InfeasibleError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
