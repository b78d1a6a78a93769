"""End-to-end acceptance checks.

Each test reproduces one headline behavior of the library on the shipped
benchmarks (plus seeded random instances) at the guaranteed tolerances and
prints a single PASS line with the measured numbers.  Budgeted tests also
assert their wall time.
"""

import time

import numpy as np
import pytest

from queuegrad import (
    SplitMix64,
    build_program,
    check_gradient,
    check_trace,
    ensure_lambda_bound,
    example_lp_instance,
    example_qp_instance,
    fit_rate,
    lp_vertex_solve,
    multiplier_bound,
    qp_grid_polish,
    random_instance,
    reference_solve,
    run,
)
from queuegrad.cli import main

LP_F_STAR = -86.0 / 15.0          # exact optimum of the shipped LP
LP_F_STAR_6 = -5.73333            # the six-digit figure quoted for it
QP_F_STAR = -3.75


def test_lp_benchmark_reproduction(lp_benchmark):
    trace, wall = lp_benchmark
    gamma = trace.meta["gamma"]
    assert gamma == 1.0 / 257.0
    np.testing.assert_array_equal(trace.x[0], np.full(4, 10.0))

    t = trace.t[1:].astype(float)
    gaps_6 = trace.f_xbar[1:] - LP_F_STAR_6
    bound = 20.0 ** 2 / (2.0 * gamma * t) + 1e-9
    excess = gaps_6 - bound
    assert excess.max() <= 0.0, (
        "objective bound violated at t=%d by %.3e"
        % (trace.t[1 + int(np.argmax(excess))], excess.max()))

    final_gap = abs(trace.f_xbar[-1] - LP_F_STAR_6)
    assert final_gap <= 0.52

    late = trace.g_xbar[10:]
    assert late.max() <= 0.0, (
        "averaged constraint positive after t=10: %.3e" % late.max())

    assert wall < 5.0
    print("PASS lp-benchmark: bound margin %.3e, final gap %.3e, "
          "feasible from t>=10 (max %.3e), wall %.2fs"
          % (-excess.max(), final_gap, late.max(), wall))


def test_lp_convergence_slope(lp_benchmark):
    trace, wall = lp_benchmark
    t = trace.t[1:].astype(float)
    gaps = np.abs(trace.f_xbar[1:] - LP_F_STAR)
    fit = fit_rate(t, gaps, window=(1e3, 1e5))
    assert -1.25 <= fit.slope <= -0.75
    assert wall < 5.0
    print("PASS lp-slope: %.4f in [-1.25, -0.75] over [1e3, 1e5], "
          "%d points" % (fit.slope, fit.n_points))


def test_qp_benchmark_reproduction(qp_setup):
    _, program, constants = qp_setup
    start = time.perf_counter()
    trace = run(program, constants, iterations=10 ** 5, step=0.1395,
                x_init=np.zeros(2))
    wall = time.perf_counter() - start

    final_gap = abs(trace.f_xbar[-1] - QP_F_STAR)
    assert final_gap <= 0.01

    linear_row = trace.g_xbar[1:, 0]   # 3*x1 + x2 - 4
    quad_row = trace.g_xbar[1:, 2]     # x'Qx + d'x - e
    assert linear_row.max() <= 0.0
    assert quad_row.max() <= 0.0

    t = trace.t[1:].astype(float)
    gaps = np.abs(trace.f_xbar[1:] - QP_F_STAR)
    fit = fit_rate(t, gaps, window=(1e3, 1e5))
    assert -1.25 <= fit.slope <= -0.75

    assert wall < 5.0
    print("PASS qp-benchmark: final gap %.3e, slope %.4f, constraints "
          "1 and 3 nonpositive from t=1, wall %.2fs"
          % (final_gap, fit.slope, wall))


def test_algorithm_equivalence(lp_setup):
    _, program, constants = lp_setup
    cases = [("shipped-lp", program, constants)]
    for seed in range(10):
        spec = random_instance("lp", 2 + seed % 3, 1 + seed % 4, seed)
        p, c = build_program(spec)
        cases.append(("seed-%d" % seed, p, c))

    worst = 0.0
    for label, p, c in cases:
        a = run(p, c, algorithm="new", iterations=10 ** 4)
        b = run(p, c, algorithm="dual-type", iterations=10 ** 4)
        diff = float(np.max(np.abs(a.x - b.x)))
        assert diff <= 1e-12, "%s: iterates diverge by %.3e" % (label, diff)
        worst = max(worst, diff)
    print("PASS algorithm-equivalence: %d instances, max component "
          "difference %.3e <= 1e-12 over 1e4 iterations"
          % (len(cases), worst))


def test_invariant_suite():
    cases = [example_lp_instance(), example_qp_instance()]
    for seed in range(10):
        cases.append(random_instance("lp", 2 + seed % 3, 1 + seed % 4,
                                     seed))
    for seed in range(10):
        cases.append(random_instance("qp", 2 + seed % 2, 1 + seed % 3,
                                     seed))

    total_checks = 0
    for i, spec in enumerate(cases):
        program, constants = build_program(spec)
        constants = ensure_lambda_bound(program, constants)
        if type(spec).__name__.startswith("Lp"):
            f_star = lp_vertex_solve(spec).f_star
        else:
            f_star = qp_grid_polish(spec, grid_points_per_axis=60).f_star
        trace = run(program, constants, iterations=2000)
        report = check_trace(trace, program, constants, f_star=f_star)
        failures = ["%s (worst %.3e at t=%s)" % (c.name, c.worst, c.at)
                    for c in report.failures]
        assert not failures, "instance %d: %s" % (i, "; ".join(failures))
        assert not report.skipped, (
            "instance %d skipped: %s"
            % (i, [c.name for c in report.skipped]))
        total_checks += len(report.checks)
    print("PASS invariant-suite: %d instances, %d checks, zero failures, "
          "zero skips" % (len(cases), total_checks))


def test_multiplier_bound_value(qp_setup):
    _, program, _ = qp_setup
    bound = multiplier_bound(program, [0.0, 0.0], -50.0)
    assert bound == 50.0
    print("PASS multiplier-bound: exactly %r" % bound)


def test_oracle_certification(lp_solution, qp_solution):
    lp_err = abs(lp_solution.f_star - LP_F_STAR)
    assert lp_err <= 1e-9
    lp_x_err = float(np.max(np.abs(lp_solution.x_star
                                   - np.array([0.4, 4.0 / 3.0, 0.0, 0.0]))))
    assert lp_x_err <= 1e-9

    qp_err = abs(qp_solution.f_star - QP_F_STAR)
    assert qp_err <= 1e-6
    qp_x_err = float(np.max(np.abs(qp_solution.x_star
                                   - np.array([0.5, 0.0]))))
    assert qp_x_err <= 1e-4
    print("PASS oracle-certification: LP f err %.1e, x err %.1e; "
          "QP f err %.1e, x err %.1e"
          % (lp_err, lp_x_err, qp_err, qp_x_err))


def test_gradient_correctness():
    specs = [example_lp_instance(), example_qp_instance(),
             random_instance("lp", 3, 2, 0), random_instance("qp", 2, 2, 0),
             random_instance("qp", 3, 3, 1)]
    rng = SplitMix64(2024)
    worst = 0.0
    functions = 0
    for spec in specs:
        program, _ = build_program(spec)
        lo, hi = program.box.lower, program.box.upper
        for fn in [program.objective] + program.constraints:
            functions += 1
            for _ in range(100):
                x = np.array([rng.uniform(l, h) for l, h in zip(lo, hi)])
                worst = max(worst, check_gradient(fn, x))
    assert worst <= 1e-6
    print("PASS gradient-correctness: %d functions x 100 points, "
          "worst relative error %.2e" % (functions, worst))


def test_trace_determinism(tmp_path):
    paths = [str(tmp_path / name) for name in ("first.csv", "second.csv")]
    for path in paths:
        code = main(["solve", "problems/lp_paper.json",
                     "--iterations", "2000", "-o", path])
        assert code == 0
    first = open(paths[0], "rb").read()
    second = open(paths[1], "rb").read()
    assert first == second
    print("PASS trace-determinism: %d identical bytes" % len(first))
