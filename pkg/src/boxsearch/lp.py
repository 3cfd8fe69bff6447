"""Dense simplex solver for the floored hider LP.

The iteration's subproblem is: maximize v subject to
v <= sum_i p_i u[i][k] for every stored column k, p_i >= delta_i, and
sum p_i = 1. Substituting p = delta + s*w with s = 1 - sum(delta) and
w on the plain simplex turns this into a standard matrix game with the
column-shifted payoffs

    u~[i][k] = s * u[i][k] + (delta . u[:,k]),

whose value equals the LP optimum and whose row/column strategies map
back as p = delta + s*w and theta unchanged. Since all entries are
positive, the game solves by one primal simplex pass on the column
player's scaled form (maximize 1'y subject to u~ y <= 1, y >= 0): the
slack basis is immediately feasible, the row strategy w falls out of the
dual prices, and a vertex solution mixes at most n columns.

Instances are tiny (n+1 effective variables, tens to hundreds of
columns), so a hand-rolled tableau keeps the solve deterministic:
Dantzig's rule with lowest-index tie-breaks, and Bland's rule as the
fallback when the pivot budget is hit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DualInconsistent, Infeasible, NumericalFailure
from .model import HidingStrategy

_ENTER_TOL = 1e-9
_PIVOT_TOL = 1e-11
BINDING_REL_TOL = 1e-9
DUAL_REL_TOL = 1e-9


@dataclass(frozen=True)
class PayoffMatrix:
    """Dense payoffs u[i][k] = u(box i, stored sequence k), all finite > 0."""

    u: np.ndarray
    column_ids: tuple[int, ...]

    def __post_init__(self):
        u = self.u
        if u.ndim != 2 or u.shape[0] < 1 or u.shape[1] < 1:
            raise Infeasible(f"payoff matrix shape {u.shape} unusable")
        if u.shape[1] != len(self.column_ids):
            raise Infeasible("one column id per column required")
        if not np.all(np.isfinite(u)) or not np.all(u > 0):
            raise NumericalFailure("payoff entries must be finite and > 0")

    @property
    def n(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True)
class LpSolution:
    """Optimal floored hider strategy p, game value v, active-floor flags,
    and the searcher's dual weights theta over columns."""

    p: HidingStrategy
    v: float
    binding: tuple[bool, ...]
    theta: np.ndarray


def _simplex_game(A: np.ndarray, bland: bool) -> tuple[np.ndarray, np.ndarray, float]:
    """Solve the positive matrix game A (rows maximize).

    Returns (w, theta, value): optimal row strategy, column strategy, and
    game value, from one tableau solve of max 1'y s.t. Ay <= 1, y >= 0.
    """
    n, m = A.shape
    T = np.zeros((n + 1, m + n + 1))
    T[0, :m] = -1.0
    T[1:, :m] = A
    T[1:, m : m + n] = np.eye(n)
    T[1:, -1] = 1.0
    basis = list(range(m, m + n))

    max_pivots = 200 + 60 * (m + n)
    for _ in range(max_pivots):
        row0 = T[0, : m + n]
        if bland:
            candidates = np.nonzero(row0 < -_ENTER_TOL)[0]
            if candidates.size == 0:
                break
            col = int(candidates[0])
        else:
            col = int(np.argmin(row0))
            if row0[col] >= -_ENTER_TOL:
                break
        column = T[1:, col]
        tol = _PIVOT_TOL * max(1.0, float(np.abs(column).max()))
        rows = np.nonzero(column > tol)[0]
        if rows.size == 0:
            raise NumericalFailure("unbounded pivot in a positive game")
        ratios = T[1 + rows, -1] / column[rows]
        best = ratios.min()
        near = rows[ratios <= best + 1e-12 * max(1.0, best)]
        leave = int(min(near, key=lambda r: basis[r]))
        piv = T[1 + leave, col]
        T[1 + leave] /= piv
        pivot_row = T[1 + leave]
        factors = T[:, col].copy()
        factors[1 + leave] = 0.0
        T -= np.outer(factors, pivot_row)
        basis[leave] = col
    else:
        raise NumericalFailure(
            f"simplex exceeded {max_pivots} pivots (bland={bland})"
        )

    obj = float(T[0, -1])
    if obj <= 0.0:
        raise NumericalFailure("nonpositive game objective")
    y = np.zeros(m)
    for r, var in enumerate(basis):
        if var < m:
            y[var] = T[1 + r, -1]
    pi = np.clip(T[0, m : m + n], 0.0, None)
    value = 1.0 / obj
    theta = np.clip(y, 0.0, None) * value
    total = float(pi.sum())
    if total <= 0.0:
        raise NumericalFailure("degenerate dual prices")
    w = pi / total
    return w, theta, value


def _solve_game(A: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    try:
        return _simplex_game(A, bland=False)
    except NumericalFailure:
        return _simplex_game(A, bland=True)


def solve_hider_lp(U: PayoffMatrix | np.ndarray, delta) -> LpSolution:
    """Maximize v s.t. v <= p.u[:,k] per column, p >= delta, sum p = 1."""
    u = U.u if isinstance(U, PayoffMatrix) else np.asarray(U, dtype=float)
    if not np.all(np.isfinite(u)) or not np.all(u > 0):
        raise NumericalFailure("payoff entries must be finite and > 0")
    n, m = u.shape
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (n,):
        raise Infeasible(f"delta shape {delta.shape} != ({n},)")
    s = 1.0 - float(delta.sum())
    if s <= 0.0:
        raise Infeasible(f"floors sum to {delta.sum()} >= 1")
    shifted = s * u + delta @ u  # u~[i,k] = s u[i,k] + b_k, broadcast over rows
    w, theta, v = _solve_game(shifted)
    p_raw = delta + s * w
    p_raw = p_raw / p_raw.sum()
    p = HidingStrategy(tuple(p_raw.tolist()))
    slack = s * w
    binding = tuple(
        bool(slack[i] <= BINDING_REL_TOL * delta[i]) for i in range(n)
    )
    # prune dual noise and renormalize; a vertex already mixes <= n columns
    theta = np.where(theta > 1e-12 * max(1.0, theta.max()), theta, 0.0)
    theta = theta / theta.sum()
    return LpSolution(p=p, v=v, binding=binding, theta=theta)


def recover_searcher_mixture(
    U: PayoffMatrix | np.ndarray,
    delta,
    solution: LpSolution,
    dual_tol: float = DUAL_REL_TOL,
) -> np.ndarray:
    """Validate and return the searcher's optimal column weights.

    Checks complementary slackness (supported columns pay exactly v
    against p), support size at most n, and, when no floor binds, the
    unconstrained-hider guarantee max_i (U theta)_i <= v + tol.
    """
    u = U.u if isinstance(U, PayoffMatrix) else np.asarray(U, dtype=float)
    n = u.shape[0]
    theta = solution.theta
    v = solution.v
    scale = dual_tol * max(1.0, abs(v))
    if np.any(theta < 0) or abs(float(theta.sum()) - 1.0) > 1e-9:
        raise DualInconsistent("theta must be a distribution over columns")
    if int(np.count_nonzero(theta)) > n:
        raise DualInconsistent(
            f"support {np.count_nonzero(theta)} exceeds box count {n}"
        )
    p = np.asarray(solution.p.p)
    col_values = p @ u
    support = np.nonzero(theta)[0]
    if np.any(np.abs(col_values[support] - v) > scale):
        raise DualInconsistent("a supported column does not pay v against p")
    if not any(solution.binding):
        row_values = u @ theta
        if float(row_values.max()) > v + scale:
            raise DualInconsistent(
                "mixture exceeds v against some box despite no binding floor"
            )
    return theta
