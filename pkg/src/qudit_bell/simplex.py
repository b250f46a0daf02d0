"""Phase-one simplex solvers for  min 1's  s.t.  A q + s = b,  q, s >= 0.

The optimum is zero exactly when b lies in the cone (here: the convex hull,
since one row of A is all ones) of the columns of A.

`phase1_bland` is a dense tableau with Bland's rule: slow, simple, and used
as the reference. `phase1_revised` is the production solver: revised simplex
with an explicit basis inverse, columns stored as sparse 0/1 index lists,
exact steepest-edge pricing, and a Bland fallback when the objective stalls.
Both assume b >= 0 and a 0/1 constraint matrix.
"""
from __future__ import annotations

import numba as nb
import numpy as np

OPTIMAL = 0
PIVOT_CAP = 1

_PIV_TOL = 1e-9
_DJ_TOL = 1e-11
_STALL = 50
_REFACTOR = 300
# no nnan/ninf: the ratio test starts from +inf
_FAST = {"reassoc", "contract", "nsz", "arcp"}


@nb.njit(cache=True)
def phase1_bland(A, b, tol, max_pivots):
    """Dense-tableau phase one with Bland's rule.

    Returns (objective, x, status) where x holds the structural variables.
    """
    m, n = A.shape
    width = n + m + 1
    T = np.zeros((m + 1, width))
    T[:m, :n] = A
    for i in range(m):
        T[i, n + i] = 1.0
        T[i, width - 1] = b[i]
    basis = np.arange(n, n + m)
    for j in range(n):
        s = 0.0
        for i in range(m):
            s += A[i, j]
        T[m, j] = -s
    s = 0.0
    for i in range(m):
        s += b[i]
    T[m, width - 1] = -s
    status = OPTIMAL
    pivots = 0
    while -T[m, width - 1] > tol:
        q = -1
        for j in range(n):
            if T[m, j] < -_DJ_TOL:
                q = j
                break
        if q < 0:
            break
        if pivots >= max_pivots:
            status = PIVOT_CAP
            break
        r = -1
        best = np.inf
        for i in range(m):
            a = T[i, q]
            if a > _PIV_TOL:
                ratio = max(T[i, width - 1], 0.0) / a
                if ratio < best or (ratio == best and basis[i] < basis[r]):
                    best = ratio
                    r = i
        piv = T[r, q]
        for j in range(width):
            T[r, j] /= piv
        for i in range(m + 1):
            if i != r:
                f = T[i, q]
                if f != 0.0:
                    for j in range(width):
                        T[i, j] -= f * T[r, j]
        basis[r] = q
        pivots += 1
    x = np.zeros(n)
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i, width - 1]
    return -T[m, width - 1], x, status


@nb.njit(cache=True, fastmath=_FAST)
def _col_dot(cols, j, v):
    s = 0.0
    for k in range(cols.shape[1]):
        i = cols[j, k]
        if i < 0:
            break
        s += v[i]
    return s


@nb.njit(cache=True)
def _refactor(cols, m, basis, b, Binv, xB, y):
    """Rebuild the basis inverse, primal values and duals from scratch."""
    n = cols.shape[0]
    B = np.zeros((m, m))
    for r in range(m):
        j = basis[r]
        if j >= n:
            B[j - n, r] = 1.0
        else:
            for k in range(cols.shape[1]):
                i = cols[j, k]
                if i < 0:
                    break
                B[i, r] = 1.0
    Binv[:, :] = np.linalg.inv(B)
    for i in range(m):
        s = 0.0
        for j in range(m):
            s += Binv[i, j] * b[j]
        xB[i] = s
    for j in range(m):
        s = 0.0
        for i in range(m):
            if basis[i] >= n:
                s += Binv[i, j]
        y[j] = s


@nb.njit(cache=True, fastmath=_FAST)
def phase1_revised(cols, m, b, tol, max_pivots):
    """Revised simplex, phase one, on sparse 0/1 columns.

    cols: int array (n, K); row indices of the unit entries of each column,
    padded with -1. Artificial columns are implicit and never re-enter.

    Returns (objective, basis, xB, y, status, pivots). y holds the duals of
    the final basis: when the objective is positive, y . b equals it and
    y . A_j <= 0 for every column, i.e. y is a separating hyperplane.
    """
    n, K = cols.shape
    N = n + m
    Binv = np.eye(m)
    basis = np.arange(n, N)
    isb = np.zeros(N, np.bool_)
    isb[n:] = True
    xB = b.copy()
    y = np.ones(m)
    w = np.zeros(m)
    rho = np.zeros(m)
    tau = np.zeros(m)
    dj = np.zeros(n)
    gam = np.ones(n)
    for j in range(n):
        c = 1.0
        for k in range(K):
            if cols[j, k] < 0:
                break
            c += 1.0
        gam[j] = c
    obj = 0.0
    for i in range(m):
        obj += xB[i]
    pivots = 0
    since_refactor = 0
    stall = 0
    status = OPTIMAL
    while True:
        q = -1
        if obj > tol:
            best = 0.0
            bland = stall > _STALL
            for j in range(n):
                if isb[j]:
                    continue
                v = -_col_dot(cols, j, y)
                dj[j] = v
                if v < -_DJ_TOL:
                    if bland:
                        q = j
                        break
                    score = v * v / gam[j]
                    if score > best:
                        best = score
                        q = j
        if q < 0:
            # claimed optimal or feasible: confirm on a fresh factorization
            if since_refactor == 0:
                break
            _refactor(cols, m, basis, b, Binv, xB, y)
            since_refactor = 0
            obj = 0.0
            for i in range(m):
                if basis[i] >= n:
                    obj += xB[i]
            continue
        if pivots >= max_pivots:
            status = PIVOT_CAP
            break
        for i in range(m):
            w[i] = 0.0
        for k in range(K):
            c = cols[q, k]
            if c < 0:
                break
            for i in range(m):
                w[i] += Binv[i, c]
        r = -1
        rat = np.inf
        bland = stall > _STALL
        for i in range(m):
            if w[i] > _PIV_TOL:
                t = max(xB[i], 0.0) / w[i]
                if t < rat - 1e-14:
                    rat = t
                    r = i
                elif t <= rat + 1e-14 and r >= 0:
                    if bland:
                        if basis[i] < basis[r]:
                            rat = min(t, rat)
                            r = i
                    elif w[i] > w[r]:
                        rat = min(t, rat)
                        r = i
        if r < 0:
            # unbounded direction cannot occur for a bounded phase-one objective;
            # treat as numerical trouble and refactor
            _refactor(cols, m, basis, b, Binv, xB, y)
            since_refactor = 0
            pivots += 1
            continue
        pr = w[r]
        for j in range(m):
            rho[j] = Binv[r, j]
        for j in range(m):
            tau[j] = 0.0
        for i in range(m):
            wi = w[i]
            if wi != 0.0:
                for j in range(m):
                    tau[j] += wi * Binv[i, j]
        gq = gam[q]
        for j in range(n):
            if isb[j] or j == q:
                continue
            a = _col_dot(cols, j, rho)
            if a == 0.0:
                continue
            ar = a / pr
            g = gam[j] - 2.0 * ar * _col_dot(cols, j, tau) + ar * ar * gq
            lo = 1.0 + ar * ar
            gam[j] = g if g > lo else lo
        leaving = basis[r]
        if leaving < n:
            g = gq / (pr * pr)
            gam[leaving] = g if g > 1.0 else 1.0
        dq = dj[q]
        step = max(xB[r], 0.0) / pr
        for j in range(m):
            Binv[r, j] /= pr
        xB[r] = step
        for i in range(m):
            if i != r:
                f = w[i]
                if f != 0.0:
                    xB[i] -= f * step
                    for j in range(m):
                        Binv[i, j] -= f * Binv[r, j]
        for j in range(m):
            y[j] += dq * Binv[r, j]
        isb[leaving] = False
        isb[q] = True
        basis[r] = q
        pivots += 1
        since_refactor += 1
        new_obj = 0.0
        for i in range(m):
            if basis[i] >= n:
                new_obj += xB[i]
        if new_obj < obj - 1e-14:
            stall = 0
        else:
            stall += 1
        obj = new_obj
        if since_refactor >= _REFACTOR:
            _refactor(cols, m, basis, b, Binv, xB, y)
            since_refactor = 0
            obj = 0.0
            for i in range(m):
                if basis[i] >= n:
                    obj += xB[i]
    return obj, basis, xB, y, status, pivots


@nb.njit(cache=True)
def batch_phase1(cols, m, B, tol, max_pivots):
    """Phase-one objective for each row of B; status -1 marks a pivot-cap hit."""
    N = B.shape[0]
    out = np.empty(N)
    status = np.zeros(N, np.int64)
    for s in range(N):
        obj, _, _, _, st, _ = phase1_revised(cols, m, B[s], tol, max_pivots)
        out[s] = obj
        status[s] = st
    return out, status
