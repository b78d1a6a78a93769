"""Independent ground-truth solvers for desk-scale LP/QP instances.

These exist to certify optimal values before trusting any iterative method:
the LP oracle enumerates basic points exactly, and the QP oracle combines a
feasible-grid scan, a projected-gradient polish, and an exact KKT active-set
refinement.  Both are deliberately brute-force — at these sizes exhaustive
enumeration is cheap and has no tuning knobs to get wrong.
"""

from itertools import combinations

import numpy as np

from .model import ConfigError, InfeasibleError
from .instances import LpSpec, QpSpec

_FEAS_TOL = 1e-9
_PIVOT_TOL = 1e-10


class ReferenceSolution:
    """An optimum certified by an oracle.

    Attributes
    ----------
    x_star : ndarray
    f_star : float
    method : str
        ``"vertex-enumeration"`` or ``"grid-polish"``.
    certificate : float
        Maximum constraint violation at ``x_star`` (0 when feasible).
    """

    def __init__(self, x_star, f_star, method, certificate):
        self.x_star = np.asarray(x_star, dtype=float)
        self.f_star = float(f_star)
        self.method = method
        self.certificate = float(certificate)

    def __repr__(self):
        return (f"ReferenceSolution(f_star={self.f_star!r}, x_star={self.x_star!r}, "
                f"method={self.method!r}, certificate={self.certificate!r})")


def _lex_less(x, y):
    for a, b in zip(x, y):
        if a < b:
            return True
        if a > b:
            return False
    return False


def lp_vertex_solve(spec):
    """Exact LP solve by enumerating all basic points.

    Every choice of ``n`` active hyperplanes among the inequality rows and
    box faces is solved as an ``n x n`` linear system (singular systems are
    skipped at pivot tolerance 1e-10); feasible solutions are compared and
    the minimizer returned.  A bounded nonempty LP over a box attains its
    optimum at such a point, so the result is exact up to roundoff.  Ties
    return the lexicographically smallest optimal point.

    Raises
    ------
    ConfigError
        If ``n + rows > 20`` (enumeration budget).
    InfeasibleError
        If no feasible basic point exists.
    """
    if not isinstance(spec, LpSpec):
        raise ConfigError("lp_vertex_solve expects an LpSpec")
    n, k = spec.n, spec.k
    if n + k > 20:
        raise ConfigError(f"instance too large for enumeration: n + rows = {n + k} > 20")
    planes = [(spec.A[r], spec.b[r]) for r in range(k)]
    eye = np.eye(n)
    for i in range(n):
        planes.append((eye[i], spec.lower[i]))
        planes.append((eye[i], spec.upper[i]))

    best_f, best_x = None, None
    for combo in combinations(range(len(planes)), n):
        M = np.stack([planes[j][0] for j in combo])
        v = np.array([planes[j][1] for j in combo])
        sv = np.linalg.svd(M, compute_uv=False)
        if sv[-1] <= _PIVOT_TOL * max(1.0, sv[0]):
            continue
        x = np.linalg.solve(M, v)
        if (spec.A @ x - spec.b).max(initial=-np.inf) > _FEAS_TOL:
            continue
        if (spec.lower - x).max() > _FEAS_TOL or (x - spec.upper).max() > _FEAS_TOL:
            continue
        f = float(spec.c @ x)
        if best_f is None or f < best_f - _FEAS_TOL or (
                abs(f - best_f) <= _FEAS_TOL and _lex_less(x, best_x)):
            best_f, best_x = f, x
    if best_x is None:
        raise InfeasibleError("no feasible basic point: the LP is infeasible over the box")
    x = np.minimum(np.maximum(best_x, spec.lower), spec.upper)
    cert = max(0.0, float((spec.A @ x - spec.b).max(initial=0.0)))
    return ReferenceSolution(x, float(spec.c @ x), "vertex-enumeration", cert)


def _qp_values(spec, x):
    g_lin = spec.A @ x - spec.b
    g_quad = float(x @ (spec.Q @ x) + spec.d @ x - spec.e)
    return g_lin, g_quad


def _qp_feasible(spec, x, tol=_FEAS_TOL):
    g_lin, g_quad = _qp_values(spec, x)
    if g_lin.size and g_lin.max() > tol:
        return False
    if g_quad > tol:
        return False
    return bool(np.all(x >= spec.lower - tol) and np.all(x <= spec.upper + tol))


def _grid_scan(spec, grid):
    """Best feasible point on the tensor grid, or None."""
    n = spec.n
    axes = [np.linspace(spec.lower[i], spec.upper[i], grid) for i in range(n)]
    best_f, best_x = np.inf, None
    # chunk along the first axis to bound memory on 3-D grids
    tail = np.meshgrid(*axes[1:], indexing="ij") if n > 1 else []
    tail_pts = (np.stack([t.ravel() for t in tail], axis=1)
                if n > 1 else np.zeros((1, 0)))
    for x0 in axes[0]:
        pts = np.concatenate(
            [np.full((tail_pts.shape[0], 1), x0), tail_pts], axis=1)
        g = pts @ spec.A.T - spec.b
        q = np.einsum("ij,jk,ik->i", pts, spec.Q, pts) + pts @ spec.d - spec.e
        feas = (q <= 0)
        if g.size:
            feas &= (g <= 0).all(axis=1)
        if not feas.any():
            continue
        f = np.einsum("ij,jk,ik->i", pts, spec.P, pts) + pts @ spec.c
        f[~feas] = np.inf
        j = int(np.argmin(f))
        if f[j] < best_f:
            best_f, best_x = float(f[j]), pts[j].copy()
    return best_x


def _pg_polish(spec, x0, budget):
    """Projected-gradient descent with a feasibility/descent backtracking line search."""
    fval = lambda x: float(x @ (spec.P @ x) + spec.c @ x)
    x = x0.copy()
    fx = fval(x)
    L = 2.0 * float(np.linalg.norm(spec.P))
    base = 1.0 / L if L > 0 else 1.0
    for _ in range(budget):
        grad = 2.0 * (spec.P @ x) + spec.c
        step = base
        accepted = False
        for _ in range(60):
            cand = np.minimum(np.maximum(x - step * grad, spec.lower), spec.upper)
            if _qp_feasible(spec, cand, tol=0.0) and fval(cand) < fx:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        x, fx = cand, fval(cand)
    return x


def _kkt_solve(H, rhs, N, v):
    """Solve the stationarity system [[H, N'], [N, 0]] [x; mu] = [rhs; v].

    Returns (x, mu) or None when the system is singular at tolerance 1e-11.
    """
    n = H.shape[0]
    k = 0 if N is None else N.shape[0]
    K = np.zeros((n + k, n + k))
    K[:n, :n] = H
    if k:
        K[:n, n:] = N.T
        K[n:, :n] = N
    sv = np.linalg.svd(K, compute_uv=False)
    if sv[-1] <= 1e-11 * max(1.0, sv[0]):
        return None
    full = np.concatenate([rhs, v]) if k else rhs
    sol = np.linalg.solve(K, full)
    return sol[:n], sol[n:]


def _kkt_refine(spec, sign_tol=1e-7):
    """All KKT points by active-set enumeration; exact for convex data.

    For each subset of active linear constraints (rows and box faces) the
    equality-constrained QP is one linear solve; when the quadratic
    constraint is also active its multiplier is found by bisection on
    ``nu >= 0`` (the constraint value along the solution path is monotone
    for PSD data).  Candidates must be primal feasible with nonnegative
    multipliers.  Returns (f, x) pairs.
    """
    n, k = spec.n, spec.k
    planes = [(spec.A[r], spec.b[r]) for r in range(k)]
    eye = np.eye(n)
    for i in range(n):
        planes.append((-eye[i], -spec.lower[i]))  # -x_i <= -lower_i
        planes.append((eye[i], spec.upper[i]))

    candidates = []

    def consider(x, mu):
        if mu is not None and mu.size and mu.min() < -sign_tol:
            return
        if _qp_feasible(spec, x):
            candidates.append((float(x @ (spec.P @ x) + spec.c @ x), x))

    def solve_quad_active(N, v):
        # find nu >= 0 with the quadratic constraint exactly active
        def point(nu):
            return _kkt_solve(2.0 * spec.P + 2.0 * nu * spec.Q,
                              -(spec.c + nu * spec.d), N, v)

        def quad_value(out):
            x = out[0]
            return float(x @ (spec.Q @ x) + spec.d @ x - spec.e)

        out = point(0.0)
        if out is None or quad_value(out) <= 0:
            return None  # not binding on this manifold (covered elsewhere)
        hi = 1.0
        for _ in range(200):
            out = point(hi)
            if out is None:
                return None
            if quad_value(out) < 0:
                break
            hi *= 2.0
        else:
            return None
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            out = point(mid)
            if out is None:
                lo = mid  # nudge past an isolated singular parameter
                continue
            if quad_value(out) > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-16 * (1.0 + hi):
                break
        return point(hi)

    for size in range(0, n + 1):
        for combo in combinations(range(len(planes)), size):
            N = np.stack([planes[j][0] for j in combo]) if size else None
            v = np.array([planes[j][1] for j in combo]) if size else np.zeros(0)
            out = _kkt_solve(2.0 * spec.P, -spec.c, N, v)
            if out is not None:
                consider(out[0], out[1])
            out = solve_quad_active(N, v)
            if out is not None:
                consider(out[0], out[1])
    return candidates


def qp_grid_polish(spec, grid_points_per_axis=200, polish_steps=10_000):
    """QP solve: feasible-grid seed, projected-gradient polish, KKT refinement.

    The grid scan finds the best feasible lattice point (or proves the grid
    sees no feasible point); projected gradient with a feasibility line
    search improves it cheaply; an exact active-set refinement then solves
    the KKT systems of every candidate active set, which pins the optimum of
    a convex QP to solver precision — far below the grid resolution.  The
    best point found anywhere is returned.

    Raises
    ------
    ConfigError
        If ``n > 3`` or the grid is coarser than 50 points per axis.
    InfeasibleError
        If no grid point is feasible.
    """
    if not isinstance(spec, QpSpec):
        raise ConfigError("qp_grid_polish expects a QpSpec")
    if spec.n > 3:
        raise ConfigError(f"grid oracle supports n <= 3, got n = {spec.n}")
    if grid_points_per_axis < 50:
        raise ConfigError("need at least 50 grid points per axis")

    seed = _grid_scan(spec, grid_points_per_axis)
    if seed is None:
        raise InfeasibleError("no feasible grid point: the constraints exclude the box grid")
    best = _pg_polish(spec, seed, polish_steps)
    best_f = float(best @ (spec.P @ best) + spec.c @ best)

    for f, x in _kkt_refine(spec):
        if f < best_f - 1e-12 or (abs(f - best_f) <= 1e-12 and _lex_less(x, best)):
            best_f, best = f, x

    x = np.minimum(np.maximum(best, spec.lower), spec.upper)
    g_lin, g_quad = _qp_values(spec, x)
    cert = max(0.0, float(g_lin.max(initial=0.0)), g_quad)
    return ReferenceSolution(x, float(x @ (spec.P @ x) + spec.c @ x),
                             "grid-polish", cert)


def reference_solve(spec, grid_points_per_axis=200):
    """Dispatch to the family-appropriate oracle."""
    if isinstance(spec, LpSpec):
        return lp_vertex_solve(spec)
    if isinstance(spec, QpSpec):
        return qp_grid_polish(spec, grid_points_per_axis=grid_points_per_axis)
    raise ConfigError(f"unknown spec type {type(spec).__name__}")
