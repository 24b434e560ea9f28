"""Self-contained dense simplex solver for the small LPs the kernel needs.

Problems here have at most a few dozen variables (supports of H-polytopes,
hull membership, Chebyshev centers), so a textbook two-phase tableau with
Bland's rule is plenty and avoids an external solver dependency.
"""
import numpy as np

from .errors import MalformedBodyError, NumericError

_TOL = 1e-11

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _run_simplex(T, basis, ncols, max_iter=20000):
    """Bland-rule simplex on a tableau whose last row is the objective."""
    m = T.shape[0] - 1
    for _ in range(max_iter):
        col = -1
        for j in range(ncols):
            if T[-1, j] < -_TOL:
                col = j
                break
        if col < 0:
            return OPTIMAL
        # ratio test, smallest index tiebreak
        row, best = -1, np.inf
        for i in range(m):
            if T[i, col] > _TOL:
                ratio = T[i, -1] / T[i, col]
                if ratio < best - _TOL or (ratio < best + _TOL and (row < 0 or basis[i] < basis[row])):
                    best, row = ratio, i
        if row < 0:
            return UNBOUNDED
        _pivot(T, basis, row, col)
    raise NumericError("simplex iteration cap exceeded")


def linprog_min(c, A, b):
    """Solve min c@x subject to A x = b, x >= 0.

    Returns
    -------
    (x, value, status)
        status is "optimal", "infeasible", or "unbounded"; x is None unless
        optimal.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    A = A.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # phase 1: artificial variables with identity columns
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    status = _run_simplex(T, basis, n + m)
    if status != OPTIMAL or T[-1, -1] < -1e-8:
        return None, None, INFEASIBLE
    # drive remaining artificials out of the basis
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if abs(T[i, j]) > _TOL:
                    _pivot(T, basis, i, j)
                    break
    keep = [i for i in range(m) if basis[i] < n or abs(T[i, -1]) <= 1e-9]
    redundant = [i for i in range(m) if basis[i] >= n and abs(T[i, -1]) <= 1e-9]
    if len(keep) != m and not redundant:
        return None, None, INFEASIBLE

    # phase 2
    rows = [i for i in range(m) if basis[i] < n]
    T2 = np.zeros((len(rows) + 1, n + 1))
    for k, i in enumerate(rows):
        T2[k, :n] = T[i, :n]
        T2[k, -1] = T[i, -1]
    basis2 = [basis[i] for i in rows]
    T2[-1, :n] = c
    for k, j in enumerate(basis2):
        T2[-1] -= c[j] * T2[k]
    status = _run_simplex(T2, basis2, n)
    if status == UNBOUNDED:
        return None, None, UNBOUNDED
    x = np.zeros(n)
    for k, j in enumerate(basis2):
        x[j] = T2[k, -1]
    return x, float(c @ x), OPTIMAL


def polytope_support(A, b, u):
    """Support value max <u, x> over {x : A x <= b} via the dual LP."""
    A = np.asarray(A, dtype=float)
    u = np.asarray(u, dtype=float)
    lam, val, status = linprog_min(np.asarray(b, dtype=float), A.T, u)
    if status == OPTIMAL:
        return val
    if status == INFEASIBLE:
        # dual infeasible and primal feasible => primal unbounded
        raise MalformedBodyError("H-polytope is unbounded (support LP has no dual solution)")
    raise NumericError("support LP failed")


def hull_contains(V, x, tol=1e-9):
    """Whether x is a convex combination of the rows of V, within tol."""
    V = np.asarray(V, dtype=float)
    x = np.asarray(x, dtype=float)
    k, n = V.shape
    A = np.vstack([V.T, np.ones((1, k))])
    b = np.append(x, 1.0)
    scale = max(1.0, float(np.abs(b).max()))
    # phase-1 optimum equals the minimal L1 equality residual
    m = A.shape[0]
    T = np.zeros((m + 1, k + m + 1))
    Aw = A.copy()
    bw = b.copy()
    neg = bw < 0
    Aw[neg] *= -1.0
    bw[neg] *= -1.0
    T[:m, :k] = Aw
    T[:m, k : k + m] = np.eye(m)
    T[:m, -1] = bw
    T[-1, :k] = -Aw.sum(axis=0)
    T[-1, -1] = -bw.sum()
    basis = list(range(k, k + m))
    status = _run_simplex(T, basis, k + m)
    if status != OPTIMAL:
        return False
    return -T[-1, -1] <= tol * scale + 1e-12


def chebyshev_center(A, b):
    """Largest inscribed ball of {x : A x <= b}.

    Returns
    -------
    (center, radius)
        radius < 0 means the polytope is empty.

    Raises
    ------
    MalformedBodyError
        If the region is unbounded (the inscribed radius grows without limit).
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    norms = np.linalg.norm(A, axis=1)
    # vars: x+ (n), x- (n), r (1), slacks (m); min -r
    Aeq = np.hstack([A, -A, norms[:, None], np.eye(m)])
    c = np.zeros(2 * n + 1 + m)
    c[2 * n] = -1.0
    sol, _, status = linprog_min(c, Aeq, b)
    if status == UNBOUNDED:
        raise MalformedBodyError("H-polytope is unbounded (inscribed radius unbounded)")
    if status != OPTIMAL:
        return None, -1.0
    x = sol[:n] - sol[n : 2 * n]
    return x, float(sol[2 * n])


def vpoly_radial(V, x0, u):
    """max rho >= 0 with x0 + rho*u in conv(rows of V)."""
    V = np.asarray(V, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    u = np.asarray(u, dtype=float)
    k, n = V.shape
    # vars: lambda (k), rho (1); V^T lambda - rho u = x0, sum lambda = 1
    Aeq = np.zeros((n + 1, k + 1))
    Aeq[:n, :k] = V.T
    Aeq[:n, k] = -u
    Aeq[n, :k] = 1.0
    beq = np.append(x0, 1.0)
    c = np.zeros(k + 1)
    c[k] = -1.0
    sol, _, status = linprog_min(c, Aeq, beq)
    if status != OPTIMAL:
        raise NumericError("radial LP failed (is the ray center inside the hull?)")
    return float(sol[k])
