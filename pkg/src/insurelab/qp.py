"""Dense active-set solver for small strictly convex quadratic programs.

    minimize    0.5 x'Px + q'x
    subject to  G x <= h,   A x = b

The problems here have at most half a dozen unknowns and a couple hundred
linear constraints, so an exact active-set method is both simple and
accurate.  Each equality-constrained subproblem is solved by the
null-space method, which keeps constraint feasibility at machine precision
even when P is badly scaled (GMM weighting matrices span many orders of
magnitude).  KKT residuals are verified on exit against the requested
tolerance.

``solve_qp_cg`` adds constraint generation: dense grids of near-parallel
rows (density nonnegativity at hundreds of points) make the plain
active-set walk crawl along the boundary one row at a time, so it solves
on a coarse row subset and adds the worst violated rows until none remain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .errors import NumericFailure

_STEP_EPS = 1e-14


@dataclass(frozen=True)
class QpResult:
    x: np.ndarray
    kkt_residual: float
    iterations: int
    active: tuple


def feasible_point(G, h, A_eq=None, b_eq=None) -> np.ndarray:
    """Strictly feasible point via a max-slack linear program.

    Solves ``min s`` subject to ``Gx - s <= h`` (and any equalities); a
    negative optimum certifies strict feasibility of the inequalities.
    """
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    n = G.shape[1]
    c = np.zeros(n + 1)
    c[-1] = 1.0
    G_ext = np.hstack([G, -np.ones((G.shape[0], 1))])
    if A_eq is not None:
        A_ext = np.hstack([np.asarray(A_eq, dtype=float), np.zeros((len(b_eq), 1))])
    else:
        A_ext, b_eq = None, None
    res = linprog(
        c,
        A_ub=G_ext,
        b_ub=h,
        A_eq=A_ext,
        b_eq=b_eq,
        bounds=[(None, None)] * n + [(-1.0, None)],
        method="highs",
    )
    if not res.success or res.x[-1] > 1e-9:
        raise NumericFailure(
            "constraint system has no strictly feasible point "
            f"(best slack {res.x[-1] if res.success else 'n/a'})"
        )
    x0 = res.x[:n]
    if A_eq is not None:
        # Project onto the equality manifold to remove LP solver slack.
        A_arr = np.asarray(A_eq, dtype=float)
        resid = A_arr @ x0 - np.asarray(b_eq, dtype=float)
        x0 = x0 - A_arr.T @ np.linalg.solve(A_arr @ A_arr.T, resid)
    return x0


def _eqp_solve(P, q, C, d):
    """Exact minimiser of the quadratic on the face ``Cx = d`` plus the
    multipliers; null-space method (empty C allowed)."""
    n = q.size
    if C.shape[0] == 0:
        x = np.linalg.solve(P, -q)
        return x, np.zeros(0)
    x_p, *_ = np.linalg.lstsq(C, d, rcond=None)
    N = null_space(C)
    if N.shape[1]:
        y = np.linalg.solve(N.T @ P @ N, -N.T @ (q + P @ x_p))
        x = x_p + N @ y
    else:
        x = x_p
    lam, *_ = np.linalg.lstsq(C.T, -(P @ x + q), rcond=None)
    return x, lam


def solve_qp_cg(P, q, G, h, A_eq=None, b_eq=None, x0=None,
                kkt_tol=1e-10, seed_stride=8, max_rounds=40) -> QpResult:
    """Constraint-generation wrapper around :func:`solve_qp`.

    ``x0`` must be feasible for the full row set.
    """
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    rows = list(range(0, G.shape[0], seed_stride))
    if (G.shape[0] - 1) not in rows:
        rows.append(G.shape[0] - 1)
    row_set = set(rows)
    for _ in range(max_rounds):
        res = solve_qp(P, q, G[rows], h[rows], A_eq, b_eq, x0=x0,
                       kkt_tol=kkt_tol, max_iter=4000)
        violation = G @ res.x - h
        order = np.argsort(violation)[-8:]
        new = [int(i) for i in order if violation[i] > 1e-11 and int(i) not in row_set]
        if not new:
            active = tuple(int(np.asarray(rows)[j]) for j in res.active)
            resid = max(res.kkt_residual, float(max(0.0, violation.max())))
            return QpResult(x=res.x, kkt_residual=resid,
                            iterations=res.iterations, active=active)
        rows.extend(new)
        row_set.update(new)
    raise NumericFailure(f"constraint generation did not settle in {max_rounds} rounds")


def solve_qp(P, q, G=None, h=None, A_eq=None, b_eq=None, x0=None,
             kkt_tol=1e-10, max_iter=500) -> QpResult:
    """Solve the QP from a feasible ``x0`` (or unconstrained if no G/A)."""
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float)
    n = q.size
    G = np.zeros((0, n)) if G is None else np.asarray(G, dtype=float)
    h = np.zeros(0) if h is None else np.asarray(h, dtype=float)
    n_eq = 0
    if A_eq is not None:
        A_eq = np.asarray(A_eq, dtype=float)
        b_eq = np.asarray(b_eq, dtype=float)
        n_eq = A_eq.shape[0]

    if x0 is None:
        if G.shape[0] == 0 and n_eq == 0:
            x = np.linalg.solve(P, -q)
            return _finish(P, q, G, h, A_eq, b_eq, x, 0, (), kkt_tol)
        x0 = feasible_point(G, h, A_eq, b_eq)
    x = np.asarray(x0, dtype=float).copy()

    active: list[int] = []
    scale = max(1.0, float(np.abs(h).max()) if h.size else 1.0)
    for iteration in range(1, max_iter + 1):
        rows = [A_eq] if n_eq else []
        rhs = [b_eq] if n_eq else []
        if active:
            rows.append(G[active])
            rhs.append(h[active])
        C = np.vstack(rows) if rows else np.zeros((0, n))
        d = np.concatenate(rhs) if rhs else np.zeros(0)
        x_face, lam = _eqp_solve(P, q, C, d)
        p = x_face - x
        mults = lam[n_eq:]

        if np.max(np.abs(p), initial=0.0) <= 1e-9 * max(1.0, np.max(np.abs(x))):
            if mults.size == 0 or np.min(mults) >= -1e-11:
                return _finish(P, q, G, h, A_eq, b_eq, x_face, iteration,
                               tuple(active), kkt_tol)
            active.pop(int(np.argmin(mults)))
            continue

        alpha = 1.0
        blocking = -1
        inactive = np.setdiff1d(np.arange(G.shape[0]), active, assume_unique=False)
        if inactive.size:
            step = G[inactive] @ p
            slack = h[inactive] - G[inactive] @ x
            movable = step > _STEP_EPS * scale
            if np.any(movable):
                ratios = slack[movable] / step[movable]
                j = int(np.argmin(ratios))
                if ratios[j] < alpha:
                    alpha = max(float(ratios[j]), 0.0)
                    blocking = int(inactive[movable.nonzero()[0][j]])
        x = x_face if alpha >= 1.0 else x + alpha * p
        if blocking >= 0 and alpha < 1.0:
            active.append(blocking)
    raise NumericFailure(f"active-set QP did not converge in {max_iter} iterations")


def _finish(P, q, G, h, A_eq, b_eq, x, iterations, active, kkt_tol):
    rows = []
    rhs = []
    if A_eq is not None and A_eq.shape[0]:
        rows.append(A_eq)
        rhs.append(b_eq)
    if active:
        rows.append(G[list(active)])
        rhs.append(h[list(active)])
    if rows:
        C = np.vstack(rows)
        d = np.concatenate(rhs)
        x_exact, lam = _eqp_solve(P, q, C, d)
        ok = True
        if G.shape[0]:
            inactive = np.setdiff1d(np.arange(G.shape[0]), active)
            ok = not inactive.size or np.max(G[inactive] @ x_exact - h[inactive]) <= 1e-9
        if ok:
            x = x_exact
        grad = P @ x + q
        stationarity = grad + C.T @ lam
    else:
        grad = P @ x + q
        stationarity = grad
    scale = max(1.0, float(np.max(np.abs(q))))
    resid = float(np.max(np.abs(stationarity))) / scale
    if G.shape[0]:
        resid = max(resid, float(np.max(G @ x - h)))
    if A_eq is not None and A_eq.shape[0]:
        resid = max(resid, float(np.max(np.abs(A_eq @ x - b_eq))))
    if resid > kkt_tol:
        raise NumericFailure(
            f"QP finished with KKT residual {resid:.3e} above tolerance {kkt_tol:g}",
            achieved=resid,
        )
    return QpResult(x=x, kkt_residual=resid, iterations=iterations, active=tuple(active))
