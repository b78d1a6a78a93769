"""Convex programs over box feasible sets, given as value/gradient oracles.

A program is ``minimize f(x) subject to g_k(x) <= 0 (k = 1..m), x in Box``
with every function smooth and convex.  Functions carry their own analytic
gradients; nothing here differentiates numerically except the gradient
*checker*, which exists precisely to distrust the analytic ones.
"""

import numpy as np


class ConfigError(ValueError):
    """Invalid option, argument, or inconsistent problem data."""


class ParseError(ConfigError):
    """Malformed problem or trace file."""


class NumericalError(RuntimeError):
    """Non-finite or diverging arithmetic during a computation."""


class ConvergenceError(NumericalError):
    """An inner iterative solve exhausted its budget.

    Attributes
    ----------
    residual : float or None
        The stopping-criterion residual at the point of failure.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InfeasibleError(RuntimeError):
    """No feasible point exists in the searched region."""


def _vector(x, n=None, name="x"):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ConfigError(f"{name} must be a 1-D vector, got shape {v.shape}")
    if n is not None and v.size != n:
        raise ConfigError(f"{name} has length {v.size}, expected {n}")
    return v


class DifferentiableFunction:
    """A smooth real-valued function given by value and gradient oracles.

    Parameters
    ----------
    value : callable
        Maps a point (1-D float array) to a float.
    gradient : callable
        Maps a point to its gradient vector.
    modulus : float, optional
        Lipschitz constant of the gradient (the smoothness modulus);
        0 for linear functions.
    """

    def __init__(self, value, gradient, modulus=0.0):
        self.value = value
        self.gradient = gradient
        self.modulus = float(modulus)
        if not self.modulus >= 0.0:
            raise ConfigError("smoothness modulus must be nonnegative")


class Box:
    """Axis-aligned box ``{x : lower <= x <= upper}``."""

    def __init__(self, lower, upper):
        self.lower = _vector(lower, name="lower").copy()
        self.upper = _vector(upper, n=self.lower.size, name="upper").copy()
        if np.any(self.lower > self.upper):
            i = int(np.argmax(self.lower - self.upper))
            raise ConfigError(f"lower[{i}] > upper[{i}]")
        if not (np.isfinite(self.lower).all() and np.isfinite(self.upper).all()):
            raise ConfigError("box bounds must be finite")

    @property
    def dimension(self):
        return self.lower.size

    @property
    def diameter(self):
        """Euclidean diameter ``||upper - lower||``."""
        return float(np.linalg.norm(self.upper - self.lower))

    @property
    def corner_radius(self):
        """Largest Euclidean norm over the box, ``||max(|lower|, |upper|)||``."""
        return float(np.linalg.norm(np.maximum(np.abs(self.lower), np.abs(self.upper))))

    def project(self, x):
        """Componentwise clip of ``x`` into the box (exact Euclidean projection)."""
        v = _vector(x, n=self.dimension)
        return np.minimum(np.maximum(v, self.lower), self.upper)

    def contains(self, x, tol=0.0):
        v = _vector(x, n=self.dimension)
        return bool(np.all(v >= self.lower - tol) and np.all(v <= self.upper + tol))


class ConvexProgram:
    """``minimize f(x) s.t. g_k(x) <= 0, x in box`` as a bundle of oracles.

    Attributes
    ----------
    objective : DifferentiableFunction
    constraints : list of DifferentiableFunction
    box : Box
    structure : object or None
        Raw instance data (e.g. an LP/QP spec) attached by builders; used to
        dispatch runs onto closed-form fast paths.  ``None`` for ad-hoc
        programs.
    """

    def __init__(self, objective, constraints, box):
        if not constraints:
            raise ConfigError("a program needs at least one constraint")
        self.objective = objective
        self.constraints = list(constraints)
        self.box = box
        self.structure = None

    @property
    def n(self):
        return self.box.dimension

    @property
    def m(self):
        return len(self.constraints)

    def evaluate_constraints(self, x):
        """All constraint values and gradients at ``x``.

        Returns
        -------
        g : (m,) ndarray
        grads : (m, n) ndarray, one gradient per row.
        """
        v = _vector(x, n=self.n)
        g = np.empty(self.m)
        grads = np.empty((self.m, self.n))
        for k, fn in enumerate(self.constraints):
            g[k] = fn.value(v)
            grads[k] = fn.gradient(v)
        if not (np.isfinite(g).all() and np.isfinite(grads).all()):
            raise NumericalError("constraint oracle returned a non-finite value")
        return g, grads

    def constraint_values(self, x):
        """Constraint values only (no gradients)."""
        v = _vector(x, n=self.n)
        g = np.array([fn.value(v) for fn in self.constraints], dtype=float)
        if not np.isfinite(g).all():
            raise NumericalError("constraint oracle returned a non-finite value")
        return g


class ConstantsPack:
    """Analysis constants of a program, driving step-size selection and bounds.

    Parameters
    ----------
    L_f : float
        Smoothness modulus of the objective.
    L_g : array_like
        Per-constraint smoothness moduli.
    beta : float
        Lipschitz modulus of the stacked constraint map g.
    C : float
        Upper bound on ``||g(x)||`` over the box.
    R : float
        Feasible-set size entering the rate bounds.
    lambda_bound : float, optional
        Upper bound on the optimal multiplier norm; required to derive the
        admissible step size whenever any constraint is non-linear.
    D, gamma_max : float, optional
        Precomputed derived values; derived from the other fields when
        omitted.  ``gamma_max`` is the largest admissible step size:
        ``1/(||L_g|| R + sqrt(D))**2``, which reduces to ``1/(beta^2 + L_f)``
        when all constraints have linear gradients (``||L_g|| = 0``).
    """

    def __init__(self, L_f, L_g, beta, C, R, lambda_bound=None, D=None, gamma_max=None):
        self.L_f = float(L_f)
        self.L_g = np.atleast_1d(np.asarray(L_g, dtype=float)).copy()
        self.beta = float(beta)
        self.C = float(C)
        self.R = float(R)
        self.lambda_bound = None if lambda_bound is None else float(lambda_bound)
        for name in ("L_f", "beta", "C", "R"):
            if not getattr(self, name) >= 0.0:
                raise ConfigError(f"constant {name} must be nonnegative")
        if np.any(self.L_g < 0):
            raise ConfigError("constraint moduli must be nonnegative")
        if self.lambda_bound is not None and self.lambda_bound < 0:
            raise ConfigError("lambda_bound must be nonnegative")
        self.L_g_norm = float(np.linalg.norm(self.L_g))
        self.D = self._derive_D() if D is None else float(D)
        self.gamma_max = self._derive_gamma_max() if gamma_max is None else float(gamma_max)

    def _derive_D(self):
        if self.L_g_norm == 0.0:
            return self.beta**2 + self.L_f
        if self.lambda_bound is None:
            return None
        return (self.beta**2 + self.L_f
                + 2.0 * self.lambda_bound * self.L_g_norm
                + 2.0 * self.C * self.L_g_norm)

    def _derive_gamma_max(self):
        if self.L_g_norm == 0.0:
            denom = self.beta**2 + self.L_f
            return np.inf if denom == 0.0 else 1.0 / denom
        if self.D is None:
            return None
        return 1.0 / (self.L_g_norm * self.R + np.sqrt(self.D)) ** 2

    def with_lambda_bound(self, lambda_bound):
        """A copy with ``lambda_bound`` set and derived fields recomputed.

        When ``||L_g|| = 0`` the stored ``gamma_max`` is preserved verbatim
        (the multiplier bound does not enter it).
        """
        return ConstantsPack(
            self.L_f, self.L_g, self.beta, self.C, self.R,
            lambda_bound=lambda_bound,
            gamma_max=self.gamma_max if self.L_g_norm == 0.0 else None,
        )


def check_gradient(fn, x):
    """Largest relative disagreement between analytic and central-difference gradients.

    Uses step ``h = 1e-6 * (1 + ||x||_inf)`` and reports
    ``max_i |analytic_i - fd_i| / (1 + |analytic_i|)``.  The caller decides
    what to make of the number; nothing is thresholded here.
    """
    v = _vector(x)
    h = 1e-6 * (1.0 + float(np.max(np.abs(v))))
    analytic = np.asarray(fn.gradient(v), dtype=float)
    worst = 0.0
    for i in range(v.size):
        step = np.zeros_like(v)
        step[i] = h
        fd = (fn.value(v + step) - fn.value(v - step)) / (2.0 * h)
        err = abs(analytic[i] - fd) / (1.0 + abs(analytic[i]))
        if err > worst:
            worst = err
    return worst
