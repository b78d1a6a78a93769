import numpy as np
import pytest

from queuegrad import (
    build_program,
    ensure_lambda_bound,
    example_lp_instance,
    example_qp_instance,
    lp_vertex_solve,
    qp_grid_polish,
    run,
)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile every JIT kernel once so timing assertions see steady state."""
    for spec in (example_lp_instance(), example_qp_instance()):
        program, constants = build_program(spec)
        constants = ensure_lambda_bound(program, constants)
        for algorithm in ("new", "pd-subgradient", "dual-type"):
            run(program, constants, algorithm=algorithm, iterations=2)


@pytest.fixture(scope="session")
def lp_setup():
    spec = example_lp_instance()
    program, constants = build_program(spec)
    return spec, program, ensure_lambda_bound(program, constants)


@pytest.fixture(scope="session")
def qp_setup():
    spec = example_qp_instance()
    program, constants = build_program(spec)
    return spec, program, ensure_lambda_bound(program, constants)


@pytest.fixture(scope="session")
def lp_solution(lp_setup):
    return lp_vertex_solve(lp_setup[0])


@pytest.fixture(scope="session")
def qp_solution(qp_setup):
    return qp_grid_polish(qp_setup[0])


@pytest.fixture(scope="session")
def lp_benchmark(lp_setup):
    """The 1e5-iteration LP benchmark run, shared by the acceptance tests."""
    import time

    _, program, constants = lp_setup
    start = time.perf_counter()
    trace = run(program, constants, algorithm="new", iterations=100_000,
                step="auto")
    wall = time.perf_counter() - start
    return trace, wall
