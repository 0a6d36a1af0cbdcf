"""Dense two-phase simplex for small equality-constrained programs.

Solves  maximize c.x  subject to  A x = b,  0 <= x <= u  (u finite or inf).
Nonbasic variables rest at either bound; Bland's smallest-index rule picks
both the entering and the leaving variable, which rules out cycling.  The
basis system is re-solved from scratch every iteration; at the target sizes
(a few dozen rows, a few hundred columns) this is cheaper than maintaining a
factorization and avoids drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import StructuralError

_PIVOT_TOL = 1e-10
_RC_TOL = 1e-9
_FEAS_TOL = 1e-9
_MAX_ITER = 20000

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2


@dataclass
class LinearProgram:
    """Maximize ``objective . x`` s.t. ``eq_matrix x = eq_rhs``, 0 <= x <= ub."""

    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    upper_bounds: np.ndarray | None = None  # default: all ones

    def normalized(self):
        a = np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
        b = np.asarray(self.eq_rhs, dtype=float).ravel()
        c = np.asarray(self.objective, dtype=float).ravel()
        if a.shape != (len(b), len(c)):
            raise StructuralError(
                f"inconsistent LP dimensions: A {a.shape}, b {b.shape}, c {c.shape}"
            )
        if self.upper_bounds is None:
            u = np.ones(len(c))
        else:
            u = np.asarray(self.upper_bounds, dtype=float).ravel()
            if u.shape != c.shape:
                raise StructuralError("upper_bounds length mismatch")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise StructuralError("LP coefficients must be finite")
        if np.any(u < 0):
            raise StructuralError("upper bounds must be nonnegative")
        return a, b, c, u


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    objective: float | None = None
    dual_eq: np.ndarray | None = None
    dual_upper: np.ndarray | None = None
    primal_residual: float = np.inf
    duality_gap: float = np.inf
    cs_residual: float = np.inf
    iterations: int = 0
    diagnostics: dict = field(default_factory=dict)


class _SimplexError(RuntimeError):
    pass


def _full_x(n, u, status, basis, x_basic):
    x = np.where(status == _AT_UPPER, np.where(np.isfinite(u), u, 0.0), 0.0)
    x[basis] = x_basic
    return x


def _core(a, b, c, u, basis, status):
    """Run bounded-variable simplex iterations until optimal or unbounded.

    Mutates ``basis``/``status`` in place; returns (x_basic, iterations) or
    raises _SimplexError("unbounded").
    """
    m, n = a.shape
    for it in range(_MAX_ITER):
        bmat = a[:, basis]
        x_nb = np.where(status == _AT_UPPER, np.where(np.isfinite(u), u, 0.0), 0.0)
        x_nb[basis] = 0.0
        try:
            x_basic = np.linalg.solve(bmat, b - a @ x_nb)
            y = np.linalg.solve(bmat.T, c[basis])
        except np.linalg.LinAlgError as exc:  # pragma: no cover - degenerate basis
            raise _SimplexError(f"singular basis at iteration {it}: {exc}") from exc
        rc = c - a.T @ y
        enter = -1
        direction = 0
        for j in range(n):
            if status[j] == _BASIC or u[j] <= _PIVOT_TOL:
                continue
            if status[j] == _AT_LOWER and rc[j] > _RC_TOL:
                enter, direction = j, +1
                break
            if status[j] == _AT_UPPER and rc[j] < -_RC_TOL:
                enter, direction = j, -1
                break
        if enter < 0:
            return x_basic, it
        d = np.linalg.solve(bmat, a[:, enter])
        imp = direction * d  # x_basic moves by -imp * t
        limit = np.inf if not np.isfinite(u[enter]) else u[enter]
        leave_row = -1
        hits_upper = False
        for r in range(m):
            if imp[r] > _PIVOT_TOL:
                cand = x_basic[r] / imp[r]
                to_upper = False
            elif imp[r] < -_PIVOT_TOL:
                ub = u[basis[r]]
                if not np.isfinite(ub):
                    continue
                cand = (ub - x_basic[r]) / (-imp[r])
                to_upper = True
            else:
                continue
            cand = max(cand, 0.0)
            if cand < limit - _PIVOT_TOL or (
                cand < limit + _PIVOT_TOL
                and leave_row >= 0
                and basis[r] < basis[leave_row]
            ):
                limit = cand
                leave_row = r
                hits_upper = to_upper
        if leave_row < 0:
            if not np.isfinite(limit):
                raise _SimplexError("unbounded")
            # bound flip: the entering variable traverses its whole range
            status[enter] = _AT_UPPER if direction > 0 else _AT_LOWER
            continue
        out_var = basis[leave_row]
        basis[leave_row] = enter
        status[enter] = _BASIC
        status[out_var] = _AT_UPPER if hits_upper else _AT_LOWER
    raise _SimplexError(f"no convergence within {_MAX_ITER} iterations")


def solve(program: LinearProgram) -> LpSolution:
    """Two-phase simplex with certificates.

    Certificates on an optimal solution: max-norm primal residual of the
    equalities and bounds, the weak-duality gap against the dual
    ``min b.y + u.w`` with ``w = max(0, c - A^T y)``, and the worst
    complementary-slackness product.
    """
    a, b, c, u = program.normalized()
    m, n = a.shape
    if m == 0 or n == 0:
        raise StructuralError("empty linear program")

    # Phase 1: minimize the total artificial mass.
    sign = np.where(b < 0, -1.0, 1.0)
    a1 = a * sign[:, None]
    b1 = b * sign
    a_ext = np.hstack([a1, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), -np.ones(m)])
    u_ext = np.concatenate([u, np.full(m, np.inf)])
    basis = list(range(n, n + m))
    status = np.full(n + m, _AT_LOWER, dtype=np.int8)
    status[basis] = _BASIC
    try:
        x_basic, it1 = _core(a_ext, b1, c1, u_ext, basis, status)
    except _SimplexError as exc:
        raise StructuralError(f"phase-1 breakdown: {exc}") from exc
    infeasibility = float(np.sum(_full_x(n + m, u_ext, status, basis, x_basic)[n:]))
    if infeasibility > 1e-8:
        return LpSolution(status="infeasible", iterations=it1,
                          diagnostics={"infeasibility": infeasibility})

    # Drive leftover artificials out of the basis; drop redundant rows.
    keep = list(range(m))
    for r in range(m):
        if basis[r] < n:
            continue
        bmat = a_ext[:, basis]
        z = np.linalg.solve(bmat.T, np.eye(m)[r])
        row = z @ a1
        pivot = -1
        for j in range(n):
            if status[j] != _BASIC and abs(row[j]) > 1e-9:
                pivot = j
                break
        if pivot >= 0:
            status[basis[r]] = _AT_LOWER
            basis[r] = pivot
            status[pivot] = _BASIC
        else:
            keep.remove(r)
    if len(keep) < m:
        rows = [r for r in keep]
        a1 = a1[rows]
        b1 = b1[rows]
        basis = [basis[r] for r in rows]
        m = len(rows)
    status = status[:n]

    # Phase 2 on the original objective.
    try:
        x_basic, it2 = _core(a1, b1, c, u, basis, status)
    except _SimplexError as exc:
        if str(exc) == "unbounded":
            return LpSolution(status="unbounded", iterations=it1)
        raise StructuralError(f"phase-2 breakdown: {exc}") from exc

    x = _full_x(n, u, status, basis, x_basic)
    x = np.clip(x, 0.0, np.where(np.isfinite(u), u, np.inf))
    y = np.linalg.solve(a1[:, basis].T, c[basis])
    rc = c - a1.T @ y
    w = np.maximum(rc, 0.0)
    finite = np.isfinite(u)
    primal_obj = float(c @ x)
    dual_obj = float(b1 @ y + np.sum(u[finite] * w[finite]))
    gap = dual_obj - primal_obj
    residual = float(np.max(np.abs(a1 @ x - b1))) if m else 0.0
    w_low = np.maximum(-rc, 0.0)
    cs = 0.0
    if n:
        cs = max(
            float(np.max(w_low * x)),
            float(np.max((w * np.where(finite, u - x, 0.0)))),
        )
    return LpSolution(
        status="optimal",
        x=x,
        objective=primal_obj,
        dual_eq=y,
        dual_upper=w,
        primal_residual=residual,
        duality_gap=abs(gap),
        cs_residual=cs,
        iterations=it1 + it2,
    )
