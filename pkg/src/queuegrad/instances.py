"""LP and QP instance builders over boxes, plus a deterministic generator.

Two problem families are supported:

* ``lp``:  minimize c'x          s.t.  Ax <= b,                    x in box
* ``qp``:  minimize x'Px + c'x   s.t.  Ax <= b, x'Qx + d'x <= e,   x in box

with P, Q symmetric positive semidefinite.  Builders return the program as
oracles together with a :class:`~queuegrad.model.ConstantsPack` whose entries
are derived from the data: matrix norms are taken in the Frobenius norm
(a cheap upper bound on the spectral norm — overestimating only shrinks the
admissible step size, never breaks a guarantee), and smoothness moduli of the
quadratics use the factor-2 convention (the Hessian of ``x'Mx`` is ``2M``).
"""

import numpy as np

from .model import (
    Box,
    ConfigError,
    ConstantsPack,
    ConvexProgram,
    DifferentiableFunction,
)


def _matrix(a, name):
    v = np.asarray(a, dtype=float)
    if v.ndim != 2:
        raise ConfigError(f"{name} must be a 2-D matrix, got shape {v.shape}")
    return v


class LpSpec:
    """Raw data of an LP over a box: ``min c'x  s.t.  Ax <= b, lower <= x <= upper``."""

    def __init__(self, c, A, b, lower, upper):
        self.c = np.asarray(c, dtype=float).copy()
        self.A = _matrix(A, "A").copy()
        self.b = np.asarray(b, dtype=float).copy()
        self.lower = np.asarray(lower, dtype=float).copy()
        self.upper = np.asarray(upper, dtype=float).copy()
        n = self.c.size
        if self.A.shape[1] != n:
            raise ConfigError(f"A has {self.A.shape[1]} columns, expected {n}")
        if self.b.size != self.A.shape[0]:
            raise ConfigError(f"b has length {self.b.size}, expected {self.A.shape[0]}")
        if self.lower.size != n or self.upper.size != n:
            raise ConfigError("box bounds must match the dimension of c")
        if np.any(self.lower > self.upper):
            raise ConfigError("box has lower > upper")

    @property
    def n(self):
        return self.c.size

    @property
    def k(self):
        return self.A.shape[0]

    def __eq__(self, other):
        return (isinstance(other, LpSpec)
                and np.array_equal(self.c, other.c)
                and np.array_equal(self.A, other.A)
                and np.array_equal(self.b, other.b)
                and np.array_equal(self.lower, other.lower)
                and np.array_equal(self.upper, other.upper))


class QpSpec:
    """Raw data of a QP over a box.

    ``min x'Px + c'x  s.t.  Ax <= b,  x'Qx + d'x <= e,  lower <= x <= upper``
    with P and Q symmetric positive semidefinite.
    """

    def __init__(self, P, c, A, b, Q, d, e, lower, upper):
        self.P = _matrix(P, "P").copy()
        self.c = np.asarray(c, dtype=float).copy()
        self.A = _matrix(A, "A").copy()
        self.b = np.asarray(b, dtype=float).copy()
        self.Q = _matrix(Q, "Q").copy()
        self.d = np.asarray(d, dtype=float).copy()
        self.e = float(e)
        self.lower = np.asarray(lower, dtype=float).copy()
        self.upper = np.asarray(upper, dtype=float).copy()
        n = self.c.size
        for name, M in (("P", self.P), ("Q", self.Q)):
            if M.shape != (n, n):
                raise ConfigError(f"{name} must be {n}x{n}, got {M.shape}")
            if not np.array_equal(M, M.T):
                if np.abs(M - M.T).max() > 1e-12 * (1.0 + np.abs(M).max()):
                    raise ConfigError(f"{name} is not symmetric")
            if np.linalg.eigvalsh(0.5 * (M + M.T)).min() < -1e-10:
                raise ConfigError(f"{name} is not positive semidefinite")
        if self.A.shape[1] != n:
            raise ConfigError(f"A has {self.A.shape[1]} columns, expected {n}")
        if self.b.size != self.A.shape[0]:
            raise ConfigError(f"b has length {self.b.size}, expected {self.A.shape[0]}")
        if self.d.size != n:
            raise ConfigError(f"d has length {self.d.size}, expected {n}")
        if self.lower.size != n or self.upper.size != n:
            raise ConfigError("box bounds must match the dimension of c")
        if np.any(self.lower > self.upper):
            raise ConfigError("box has lower > upper")

    @property
    def n(self):
        return self.c.size

    @property
    def k(self):
        return self.A.shape[0]

    def __eq__(self, other):
        return (isinstance(other, QpSpec)
                and np.array_equal(self.P, other.P)
                and np.array_equal(self.c, other.c)
                and np.array_equal(self.A, other.A)
                and np.array_equal(self.b, other.b)
                and np.array_equal(self.Q, other.Q)
                and np.array_equal(self.d, other.d)
                and self.e == other.e
                and np.array_equal(self.lower, other.lower)
                and np.array_equal(self.upper, other.upper))


def _linear_constraint(a_row, b_k):
    a = a_row.copy()
    rhs = float(b_k)
    return DifferentiableFunction(
        value=lambda x, a=a, rhs=rhs: float(a @ x - rhs),
        gradient=lambda x, a=a: a.copy(),
        modulus=0.0,
    )


def build_lp(spec, lambda_bound=None):
    """Build the program and constants for an LP spec.

    Constants: ``L_f = 0``, all constraint moduli 0, ``beta = ||A||_F``,
    ``R = ||upper - lower||``, ``C = ||A||_F * r + ||b||`` where
    ``r = ||max(|lower|, |upper|)||`` bounds ``||x||`` over the box.
    ``gamma_max`` is computed from the exact sum of squares of A, so e.g.
    an integer-valued A gives an exactly representable step bound.

    Returns
    -------
    (ConvexProgram, ConstantsPack)
    """
    box = Box(spec.lower, spec.upper)
    objective = DifferentiableFunction(
        value=lambda x, c=spec.c: float(c @ x),
        gradient=lambda x, c=spec.c: c.copy(),
        modulus=0.0,
    )
    constraints = [_linear_constraint(spec.A[k], spec.b[k]) for k in range(spec.k)]
    program = ConvexProgram(objective, constraints, box)
    program.structure = spec

    frob_sq = float(np.sum(spec.A * spec.A))
    beta = float(np.sqrt(frob_sq))
    C = beta * box.corner_radius + float(np.linalg.norm(spec.b))
    constants = ConstantsPack(
        L_f=0.0,
        L_g=np.zeros(spec.k),
        beta=beta,
        C=C,
        R=box.diameter,
        lambda_bound=lambda_bound,
        D=frob_sq,
        gamma_max=np.inf if frob_sq == 0.0 else 1.0 / frob_sq,
    )
    return program, constants


def build_qp(spec, lambda_bound=None):
    """Build the program and constants for a QP spec.

    The objective is ``x'Px + c'x`` with gradient ``2Px + c``; constraints
    stack the rows of ``Ax - b`` and the single quadratic
    ``x'Qx + d'x - e`` with gradient ``2Qx + d``.  With
    ``r = ||lower|| + ||upper||`` the constants are::

        R    = r
        L_f  = 2 ||P||_F
        L_g  = [0, ..., 0, 2 ||Q||_F]
        beta = ||A||_F + 2 ||Q||_F r + ||d||
        C    = ||A||_F r + ||b|| + ||Q||_F r^2 + ||d|| r + |e|

    ``lambda_bound`` is needed before an admissible step size can be derived
    (the constraint moduli are nonzero); leave it unset to fill in later via
    :func:`queuegrad.solvers.multiplier_bound` and
    :meth:`~queuegrad.model.ConstantsPack.with_lambda_bound`.

    Returns
    -------
    (ConvexProgram, ConstantsPack)
    """
    box = Box(spec.lower, spec.upper)
    objective = DifferentiableFunction(
        value=lambda x, P=spec.P, c=spec.c: float(x @ (P @ x) + c @ x),
        gradient=lambda x, P=spec.P, c=spec.c: 2.0 * (P @ x) + c,
        modulus=2.0 * float(np.linalg.norm(spec.P)),
    )
    constraints = [_linear_constraint(spec.A[k], spec.b[k]) for k in range(spec.k)]
    quad_modulus = 2.0 * float(np.linalg.norm(spec.Q))
    constraints.append(DifferentiableFunction(
        value=lambda x, Q=spec.Q, d=spec.d, e=spec.e: float(x @ (Q @ x) + d @ x - e),
        gradient=lambda x, Q=spec.Q, d=spec.d: 2.0 * (Q @ x) + d,
        modulus=quad_modulus,
    ))
    program = ConvexProgram(objective, constraints, box)
    program.structure = spec

    r = float(np.linalg.norm(spec.lower)) + float(np.linalg.norm(spec.upper))
    norm_A = float(np.linalg.norm(spec.A))
    norm_Q = float(np.linalg.norm(spec.Q))
    norm_d = float(np.linalg.norm(spec.d))
    beta = norm_A + 2.0 * norm_Q * r + norm_d
    C = (norm_A * r + float(np.linalg.norm(spec.b))
         + norm_Q * r**2 + norm_d * r + abs(spec.e))
    constants = ConstantsPack(
        L_f=objective.modulus,
        L_g=np.concatenate([np.zeros(spec.k), [quad_modulus]]),
        beta=beta,
        C=C,
        R=r,
        lambda_bound=lambda_bound,
    )
    return program, constants


def build_program(spec, lambda_bound=None):
    """Dispatch to :func:`build_lp` or :func:`build_qp` on the instance type."""
    if isinstance(spec, LpSpec):
        return build_lp(spec, lambda_bound=lambda_bound)
    if isinstance(spec, QpSpec):
        return build_qp(spec, lambda_bound=lambda_bound)
    raise ConfigError(f"unknown spec type {type(spec).__name__}")


def example_lp_instance():
    """The shipped four-variable LP benchmark (problems/lp_paper.json).

    ``min -x1 - 4x2 - 3x3 - 2x4`` over ``[0, 10]^4`` with three inequality
    rows; the optimum is ``x* = [0.4, 4/3, 0, 0]`` with value -86/15.
    """
    return LpSpec(
        c=[-1.0, -4.0, -3.0, -2.0],
        A=[[6.0, 1.0, 5.0, 1.0],
           [0.0, 3.0, 6.0, 6.0],
           [5.0, 6.0, 4.0, 6.0]],
        b=[6.0, 4.0, 10.0],
        lower=[0.0, 0.0, 0.0, 0.0],
        upper=[10.0, 10.0, 10.0, 10.0],
    )


def example_qp_instance():
    """The shipped two-variable QP benchmark (problems/qp_paper.json).

    Quadratic objective and one quadratic plus two linear constraints over
    ``[0, 5]^2``; the optimum is ``x* = [0.5, 0]`` with value -3.75.
    """
    return QpSpec(
        P=[[1.0, 2.0], [2.0, 4.0]],
        c=[-8.0, -2.0],
        A=[[3.0, 1.0], [2.0, 2.0]],
        b=[4.0, 1.0],
        Q=[[2.0, 1.0], [1.0, 3.0]],
        d=[-1.0, 2.0],
        e=5.0,
        lower=[0.0, 0.0],
        upper=[5.0, 5.0],
    )


# Mask and mixing constants of the SplitMix64 generator.
_MASK64 = (1 << 64) - 1
_SM_GAMMA = 0x9E3779B97F4A7C15
_SM_MIX1 = 0xBF58476D1CE4E5B9
_SM_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """SplitMix64: a tiny 64-bit PRNG with a fixed, portable algorithm.

    Each draw advances the state by the golden-ratio increment and applies
    two xor-shift-multiply mixing rounds::

        state += 0x9E3779B97F4A7C15                  (mod 2^64)
        z = state
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9     (mod 2^64)
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB     (mod 2^64)
        return z ^ (z >> 31)

    Uniform doubles come from ``u64 * 2**-64``, so the full stream — and any
    instance generated from it — is bit-reproducible from the seed alone in
    any language with 64-bit integers and IEEE doubles.
    """

    def __init__(self, seed):
        self.state = int(seed) & _MASK64

    def next_u64(self):
        self.state = (self.state + _SM_GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _SM_MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _SM_MIX2) & _MASK64
        return z ^ (z >> 31)

    def uniform(self, lo=0.0, hi=1.0):
        """A double in ``[lo, hi)``, computed as ``lo + (hi - lo) * u64 / 2^64``."""
        return lo + (hi - lo) * (self.next_u64() * 2.0**-64)

    def vector(self, size, lo=0.0, hi=1.0):
        return np.array([self.uniform(lo, hi) for _ in range(size)])

    def matrix(self, rows, cols, lo=0.0, hi=1.0):
        # row-major draw order
        return np.array([[self.uniform(lo, hi) for _ in range(cols)]
                         for _ in range(rows)])


def random_instance(family, n, m, seed):
    """A deterministic pseudo-random instance of the given family.

    All raw draws are SplitMix64 uniforms (documented draw order below), raw
    entries lie in [-5, 5], quadratic matrices are formed as ``M'M`` to force
    positive semidefiniteness, and the right-hand sides are shifted so the
    box center is strictly feasible with margin at least 0.5 per constraint
    (a built-in strictly feasible point).

    Draw order — ``lp``: c (n), A (m*n row-major), lower (n, in [-5,0]),
    upper (n, in [0,5]), slack (m, in [0.5,1.5]) with ``b = A@center + slack``.
    ``qp``: M (n*n row-major, P = M'M), c (n), A (m*n), N (n*n, Q = N'N),
    d (n), lower, upper, linear slack (m), quadratic slack (1) with
    ``e = center'Q center + d'center + slack``.

    Parameters
    ----------
    family : str
        ``"lp"`` or ``"qp"``.  For ``qp``, ``m`` counts the linear rows; the
        quadratic constraint is always added on top.
    n, m : int
        Dimension and number of (linear) constraints, both >= 1.
    seed : int
        Seed of the SplitMix64 stream.
    """
    if family not in ("lp", "qp"):
        raise ConfigError(f"unknown family {family!r}, expected 'lp' or 'qp'")
    if n < 1 or m < 1:
        raise ConfigError("instance sizes n and m must be >= 1")
    rng = SplitMix64(seed)
    if family == "lp":
        c = rng.vector(n, -5.0, 5.0)
        A = rng.matrix(m, n, -5.0, 5.0)
        lower = rng.vector(n, -5.0, 0.0)
        upper = rng.vector(n, 0.0, 5.0)
        center = 0.5 * (lower + upper)
        b = A @ center + rng.vector(m, 0.5, 1.5)
        return LpSpec(c=c, A=A, b=b, lower=lower, upper=upper)
    M = rng.matrix(n, n, -5.0, 5.0)
    P = M.T @ M
    c = rng.vector(n, -5.0, 5.0)
    A = rng.matrix(m, n, -5.0, 5.0)
    N = rng.matrix(n, n, -5.0, 5.0)
    Q = N.T @ N
    d = rng.vector(n, -5.0, 5.0)
    lower = rng.vector(n, -5.0, 0.0)
    upper = rng.vector(n, 0.0, 5.0)
    center = 0.5 * (lower + upper)
    b = A @ center + rng.vector(m, 0.5, 1.5)
    e = float(center @ (Q @ center) + d @ center + rng.uniform(0.5, 1.5))
    return QpSpec(P=P, c=c, A=A, b=b, Q=Q, d=d, e=e, lower=lower, upper=upper)
