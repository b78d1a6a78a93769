"""JIT-compiled inner loops for LP/QP structured runs.

Each kernel fills preallocated per-iteration record arrays and returns the
index of the last valid record row (== the iteration budget on success, less
when the overflow guard trips).  Record row ``r`` holds the iterate produced
``r`` steps after the start (row 0 is the start point itself), the running
average over produced iterates, and the queue/multiplier vector after ``r``
updates.  All kernels are single-threaded and strictly IEEE (no fastmath),
so runs are bit-reproducible.
"""

import numpy as np
from numba import njit

GUARD = 1e100  # magnitudes beyond this abort the run as a numerical failure


@njit(cache=True, nogil=True)
def _bad(v):
    # catches overflow, inf and NaN in one comparison
    return not (np.abs(v) <= GUARD).all()


@njit(cache=True, nogil=True)
def lp_queue_run(A, b, c, lo, hi, x0, eta, T,
                 xs, xbars, qs, fx, fxbar, gxbar, qn, drift):
    """Queue-driven gradient method on an LP; also the dual-type closed form.

    One iteration: d = c + A'(Q + g(x)); x <- clip(x - eta*d);
    Q_k <- max(-g_k(x), Q_k + g_k(x)).
    """
    m, n = A.shape
    x = x0.copy()
    g = A @ x - b
    Q = np.maximum(0.0, -g)
    S = np.zeros(n)
    xs[0] = x
    xbars[0] = x
    qs[0] = Q
    fx[0] = c @ x
    fxbar[0] = fx[0]
    gxbar[0] = g
    qn[0] = np.sqrt((Q * Q).sum())
    drift[0] = 0.0
    for t in range(T):
        d = c + A.T @ (Q + g)
        for i in range(n):
            xi = x[i] - eta * d[i]
            if xi < lo[i]:
                xi = lo[i]
            elif xi > hi[i]:
                xi = hi[i]
            x[i] = xi
        g = A @ x - b
        for k in range(m):
            grow = Q[k] + g[k]
            neg = -g[k]
            Q[k] = neg if neg > grow else grow
        if _bad(x) or _bad(Q) or _bad(g):
            return t
        S += x
        xbar = S / (t + 1)
        xs[t + 1] = x
        xbars[t + 1] = xbar
        qs[t + 1] = Q
        fx[t + 1] = c @ x
        fxbar[t + 1] = c @ xbar
        gxbar[t + 1] = A @ xbar - b
        qnv = np.sqrt((Q * Q).sum())
        qn[t + 1] = qnv
        drift[t + 1] = 0.5 * (qnv * qnv - qn[t] * qn[t])
    return T


@njit(cache=True, nogil=True)
def qp_queue_run(P, c, A, b, Qc, d, e, lo, hi, x0, gamma, T,
                 xs, xbars, qs, fx, fxbar, gxbar, qn, drift):
    """Queue-driven gradient method on a QP (linear rows plus one quadratic)."""
    m_lin, n = A.shape
    m = m_lin + 1
    x = x0.copy()
    g = np.empty(m)
    g[:m_lin] = A @ x - b
    g[m_lin] = x @ (Qc @ x) + d @ x - e
    Q = np.maximum(0.0, -g)
    S = np.zeros(n)
    xs[0] = x
    xbars[0] = x
    qs[0] = Q
    fx[0] = x @ (P @ x) + c @ x
    fxbar[0] = fx[0]
    gxbar[0] = g
    qn[0] = np.sqrt((Q * Q).sum())
    drift[0] = 0.0
    for t in range(T):
        w = Q + g
        dvec = 2.0 * (P @ x) + c
        dvec += A.T @ w[:m_lin]
        dvec += w[m_lin] * (2.0 * (Qc @ x) + d)
        for i in range(n):
            xi = x[i] - gamma * dvec[i]
            if xi < lo[i]:
                xi = lo[i]
            elif xi > hi[i]:
                xi = hi[i]
            x[i] = xi
        g[:m_lin] = A @ x - b
        g[m_lin] = x @ (Qc @ x) + d @ x - e
        for k in range(m):
            grow = Q[k] + g[k]
            neg = -g[k]
            Q[k] = neg if neg > grow else grow
        if _bad(x) or _bad(Q) or _bad(g):
            return t
        S += x
        xbar = S / (t + 1)
        xs[t + 1] = x
        xbars[t + 1] = xbar
        qs[t + 1] = Q
        fx[t + 1] = x @ (P @ x) + c @ x
        fxbar[t + 1] = xbar @ (P @ xbar) + c @ xbar
        gxbar[t + 1, :m_lin] = A @ xbar - b
        gxbar[t + 1, m_lin] = xbar @ (Qc @ xbar) + d @ xbar - e
        qnv = np.sqrt((Q * Q).sum())
        qn[t + 1] = qnv
        drift[t + 1] = 0.5 * (qnv * qnv - qn[t] * qn[t])
    return T


@njit(cache=True, nogil=True)
def qp_dual_run(P, c, A, b, Qc, d, e, lo, hi, x0, alpha, L_f, L_gq,
                inner_tol, inner_cap, T,
                xs, xbars, qs, fx, fxbar, gxbar, qn, drift, inner_fail):
    """Proximal dual-type method on a QP: the per-iteration subproblem

        min_z  f(z) + w'g(z) + alpha ||z - x||^2,  w = Q + g(x),

    is solved by projected gradient with step 1/(L_f + w_q L_gq + 2 alpha)
    until the projected-gradient residual drops below
    ``inner_tol * (1 + ||z||)``.  ``inner_fail`` (length-2 out param) is set
    to (iteration, residual) if the inner cap is hit.
    """
    m_lin, n = A.shape
    m = m_lin + 1
    x = x0.copy()
    g = np.empty(m)
    g[:m_lin] = A @ x - b
    g[m_lin] = x @ (Qc @ x) + d @ x - e
    Q = np.maximum(0.0, -g)
    S = np.zeros(n)
    xs[0] = x
    xbars[0] = x
    qs[0] = Q
    fx[0] = x @ (P @ x) + c @ x
    fxbar[0] = fx[0]
    gxbar[0] = g
    qn[0] = np.sqrt((Q * Q).sum())
    drift[0] = 0.0
    inner_fail[0] = -1.0
    inner_fail[1] = 0.0
    z = x.copy()
    znext = x.copy()
    for t in range(T):
        w = Q + g
        wq = w[m_lin]
        L_phi = L_f + wq * L_gq + 2.0 * alpha
        for i in range(n):
            z[i] = x[i]
        converged = False
        for it in range(inner_cap):
            grad = 2.0 * (P @ z) + c
            grad += A.T @ w[:m_lin]
            grad += wq * (2.0 * (Qc @ z) + d)
            grad += 2.0 * alpha * (z - x)
            res = 0.0
            for i in range(n):
                zi = z[i] - grad[i] / L_phi
                if zi < lo[i]:
                    zi = lo[i]
                elif zi > hi[i]:
                    zi = hi[i]
                znext[i] = zi
                diff = z[i] - zi
                res += diff * diff
            res = np.sqrt(res)
            znorm = np.sqrt((z * z).sum())
            for i in range(n):
                z[i] = znext[i]
            if res <= inner_tol * (1.0 + znorm):
                converged = True
                break
        if not converged:
            inner_fail[0] = t
            inner_fail[1] = res
            return t
        for i in range(n):
            x[i] = z[i]
        g[:m_lin] = A @ x - b
        g[m_lin] = x @ (Qc @ x) + d @ x - e
        for k in range(m):
            grow = Q[k] + g[k]
            neg = -g[k]
            Q[k] = neg if neg > grow else grow
        if _bad(x) or _bad(Q) or _bad(g):
            return t
        S += x
        xbar = S / (t + 1)
        xs[t + 1] = x
        xbars[t + 1] = xbar
        qs[t + 1] = Q
        fx[t + 1] = x @ (P @ x) + c @ x
        fxbar[t + 1] = xbar @ (P @ xbar) + c @ xbar
        gxbar[t + 1, :m_lin] = A @ xbar - b
        gxbar[t + 1, m_lin] = xbar @ (Qc @ xbar) + d @ xbar - e
        qnv = np.sqrt((Q * Q).sum())
        qn[t + 1] = qnv
        drift[t + 1] = 0.5 * (qnv * qnv - qn[t] * qn[t])
    return T


@njit(cache=True, nogil=True)
def lp_pd_run(A, b, c, lo, hi, x0, cstep, lam_max, include_f, T,
              xs, xbars, qs, fx, fxbar, gxbar, qn, drift):
    """Primal-dual subgradient baseline on an LP.

    Multipliers start at zero and are clipped into [0, lam_max]; the primal
    step optionally includes the objective gradient.  The running average
    includes the start point.  Record row r stores the multiplier vector in
    the queue slot.
    """
    m, n = A.shape
    x = x0.copy()
    lam = np.zeros(m)
    g = A @ x - b
    S = x.copy()
    xs[0] = x
    xbars[0] = x
    qs[0] = lam
    fx[0] = c @ x
    fxbar[0] = fx[0]
    gxbar[0] = g
    qn[0] = 0.0
    drift[0] = 0.0
    for t in range(T):
        d = A.T @ lam
        if include_f:
            d = d + c
        for i in range(n):
            xi = x[i] - cstep * d[i]
            if xi < lo[i]:
                xi = lo[i]
            elif xi > hi[i]:
                xi = hi[i]
            x[i] = xi
        for k in range(m):
            lk = lam[k] + cstep * g[k]
            if lk < 0.0:
                lk = 0.0
            elif lk > lam_max[k]:
                lk = lam_max[k]
            lam[k] = lk
        g = A @ x - b
        if _bad(x) or _bad(lam) or _bad(g):
            return t
        S += x
        xbar = S / (t + 2)
        xs[t + 1] = x
        xbars[t + 1] = xbar
        qs[t + 1] = lam
        fx[t + 1] = c @ x
        fxbar[t + 1] = c @ xbar
        gxbar[t + 1] = A @ xbar - b
        qnv = np.sqrt((lam * lam).sum())
        qn[t + 1] = qnv
        drift[t + 1] = 0.5 * (qnv * qnv - qn[t] * qn[t])
    return T


@njit(cache=True, nogil=True)
def qp_pd_run(P, c, A, b, Qc, d, e, lo, hi, x0, cstep, lam_max, include_f, T,
              xs, xbars, qs, fx, fxbar, gxbar, qn, drift):
    """Primal-dual subgradient baseline on a QP."""
    m_lin, n = A.shape
    m = m_lin + 1
    x = x0.copy()
    lam = np.zeros(m)
    g = np.empty(m)
    g[:m_lin] = A @ x - b
    g[m_lin] = x @ (Qc @ x) + d @ x - e
    S = x.copy()
    xs[0] = x
    xbars[0] = x
    qs[0] = lam
    fx[0] = x @ (P @ x) + c @ x
    fxbar[0] = fx[0]
    gxbar[0] = g
    qn[0] = 0.0
    drift[0] = 0.0
    for t in range(T):
        dvec = A.T @ lam[:m_lin]
        dvec = dvec + lam[m_lin] * (2.0 * (Qc @ x) + d)
        if include_f:
            dvec = dvec + 2.0 * (P @ x) + c
        for i in range(n):
            xi = x[i] - cstep * dvec[i]
            if xi < lo[i]:
                xi = lo[i]
            elif xi > hi[i]:
                xi = hi[i]
            x[i] = xi
        for k in range(m):
            lk = lam[k] + cstep * g[k]
            if lk < 0.0:
                lk = 0.0
            elif lk > lam_max[k]:
                lk = lam_max[k]
            lam[k] = lk
        g[:m_lin] = A @ x - b
        g[m_lin] = x @ (Qc @ x) + d @ x - e
        if _bad(x) or _bad(lam) or _bad(g):
            return t
        S += x
        xbar = S / (t + 2)
        xs[t + 1] = x
        xbars[t + 1] = xbar
        qs[t + 1] = lam
        fx[t + 1] = x @ (P @ x) + c @ x
        fxbar[t + 1] = xbar @ (P @ xbar) + c @ xbar
        gxbar[t + 1, :m_lin] = A @ xbar - b
        gxbar[t + 1, m_lin] = xbar @ (Qc @ xbar) + d @ xbar - e
        qnv = np.sqrt((lam * lam).sum())
        qn[t + 1] = qnv
        drift[t + 1] = 0.5 * (qnv * qnv - qn[t] * qn[t])
    return T
