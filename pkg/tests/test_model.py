import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from queuegrad import (
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

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def _vec(n):
    return st.lists(finite, min_size=n, max_size=n).map(np.array)


def test_exception_hierarchy():
    assert issubclass(ParseError, ConfigError)
    assert issubclass(ConfigError, ValueError)
    assert issubclass(NumericalError, RuntimeError)
    assert issubclass(ConvergenceError, NumericalError)
    assert issubclass(InfeasibleError, RuntimeError)
    err = ConvergenceError("stalled", residual=0.25)
    assert err.residual == 0.25


def test_differentiable_function_holds_callables():
    fn = DifferentiableFunction(value=lambda x: float(x[0] ** 2),
                                gradient=lambda x: 2.0 * x)
    x = np.array([3.0])
    assert fn.value(x) == 9.0
    assert fn.gradient(x)[0] == 6.0
    assert fn.modulus == 0.0
    fn2 = DifferentiableFunction(lambda x: 0.0, lambda x: 0.0 * x,
                                 modulus=2.0)
    assert fn2.modulus == 2.0


class TestBox:
    def test_validation(self):
        with pytest.raises(ConfigError):
            Box([0.0, 0.0], [1.0])
        with pytest.raises(ConfigError):
            Box([2.0], [1.0])
        with pytest.raises(ConfigError):
            Box([np.nan], [1.0])
        with pytest.raises(ConfigError):
            Box([0.0], [np.inf])

    def test_project_examples(self):
        box = Box([0.0, -1.0], [1.0, 1.0])
        np.testing.assert_array_equal(box.project([2.0, -3.0]), [1.0, -1.0])
        np.testing.assert_array_equal(box.project([0.5, 0.0]), [0.5, 0.0])
        assert box.contains([0.0, 1.0])
        assert not box.contains([1.5, 0.0])

    def test_shipped_lp_geometry(self):
        box = Box([0.0] * 4, [10.0] * 4)
        assert box.dimension == 4
        assert box.diameter == 20.0
        assert box.corner_radius == 20.0

    def test_shipped_qp_geometry(self):
        box = Box([0.0, 0.0], [5.0, 5.0])
        assert box.diameter == pytest.approx(5.0 * np.sqrt(2.0), abs=0)
        assert box.corner_radius == pytest.approx(5.0 * np.sqrt(2.0), abs=0)

    @given(_vec(3))
    @settings(max_examples=50, deadline=None)
    def test_projection_lands_inside(self, x):
        box = Box([-1.0, 0.0, 2.0], [1.0, 0.0, 5.0])
        p = box.project(x)
        assert box.contains(p)
        np.testing.assert_array_equal(box.project(p), p)

    @given(_vec(3), _vec(3))
    @settings(max_examples=50, deadline=None)
    def test_projection_nonexpansive(self, x, y):
        box = Box([-2.0, -2.0, -2.0], [3.0, 3.0, 3.0])
        dp = np.linalg.norm(box.project(x) - box.project(y))
        assert dp <= np.linalg.norm(x - y) + 1e-12


def _one_d_program():
    objective = DifferentiableFunction(
        value=lambda x: float((x[0] - 1.0) ** 2),
        gradient=lambda x: np.array([2.0 * (x[0] - 1.0)]),
        modulus=2.0)
    constraint = DifferentiableFunction(
        value=lambda x: float(x[0] - 0.5),
        gradient=lambda x: np.array([1.0]))
    return ConvexProgram(objective, [constraint], Box([0.0], [1.0]))


class TestConvexProgram:
    def test_shapes(self):
        program = _one_d_program()
        assert program.n == 1
        assert program.m == 1
        g, grads = program.evaluate_constraints(np.array([0.0]))
        assert g.shape == (1,)
        assert grads.shape == (1, 1)
        assert g[0] == -0.5
        assert grads[0, 0] == 1.0

    def test_nonfinite_constraint_rejected(self):
        bad = DifferentiableFunction(value=lambda x: float("inf"),
                                     gradient=lambda x: np.zeros(1))
        program = ConvexProgram(
            DifferentiableFunction(lambda x: 0.0, lambda x: np.zeros(1)),
            [bad], Box([0.0], [1.0]))
        with pytest.raises(NumericalError):
            program.evaluate_constraints(np.array([0.5]))

    def test_needs_constraints(self):
        with pytest.raises(ConfigError):
            ConvexProgram(
                DifferentiableFunction(lambda x: 0.0, lambda x: np.zeros(1)),
                [], Box([0.0], [1.0]))


class TestConstantsPack:
    def test_linear_constraints_step(self):
        pack = ConstantsPack(L_f=2.0, L_g=[0.0], beta=1.0, C=0.5, R=1.0)
        assert pack.gamma_max == pytest.approx(1.0 / 3.0, abs=0)
        assert pack.D == 3.0

    def test_curved_constraints_step(self):
        pack = ConstantsPack(L_f=0.0, L_g=[1.0], beta=1.0, C=0.0, R=1.0,
                             lambda_bound=0.0)
        assert pack.D == 1.0
        assert pack.gamma_max == pytest.approx(0.25, abs=0)

    def test_curved_needs_lambda_bound(self):
        pack = ConstantsPack(L_f=0.0, L_g=[1.0], beta=1.0, C=0.0, R=1.0)
        assert pack.D is None
        assert pack.gamma_max is None
        filled = pack.with_lambda_bound(0.0)
        assert filled.gamma_max == pytest.approx(0.25, abs=0)

    def test_with_lambda_bound_preserves_exact_step(self):
        # an exactly representable step must survive attaching the bound
        pack = ConstantsPack(L_f=0.0, L_g=[0.0, 0.0], beta=np.sqrt(257.0),
                             C=10.0, R=20.0, gamma_max=1.0 / 257.0)
        updated = pack.with_lambda_bound(25.0)
        assert updated.gamma_max == 1.0 / 257.0
        assert updated.lambda_bound == 25.0

    def test_validation(self):
        with pytest.raises(ConfigError):
            ConstantsPack(L_f=-1.0, L_g=[0.0], beta=1.0, C=0.0, R=1.0)
        with pytest.raises(ConfigError):
            ConstantsPack(L_f=0.0, L_g=[-0.5], beta=1.0, C=0.0, R=1.0)
        with pytest.raises(ConfigError):
            ConstantsPack(L_f=0.0, L_g=[0.0], beta=1.0, C=0.0, R=1.0,
                          lambda_bound=-2.0)


class TestCheckGradient:
    def test_quadratic_is_accurate(self):
        fn = DifferentiableFunction(
            value=lambda x: float(x @ x + 3.0 * x[0]),
            gradient=lambda x: 2.0 * x + np.array([3.0, 0.0]))
        err = check_gradient(fn, np.array([0.3, -0.7]))
        assert err <= 1e-6

    def test_wrong_gradient_is_flagged(self):
        fn = DifferentiableFunction(
            value=lambda x: float(x @ x),
            gradient=lambda x: 2.0 * x + 0.01)
        err = check_gradient(fn, np.array([0.3, -0.7]))
        assert err > 1e-4

    @given(_vec(2))
    @settings(max_examples=50, deadline=None)
    def test_linear_everywhere(self, x):
        a = np.array([1.5, -2.0])
        fn = DifferentiableFunction(value=lambda v: float(a @ v),
                                    gradient=lambda v: a.copy())
        assert check_gradient(fn, x) <= 1e-6
