"""Dense two-phase primal simplex for small problems of the form A x <= b.

Variables are free unless ``var_bounds`` says otherwise; free variables are
split into nonnegative pairs. Pivoting follows Bland's rule throughout, so
the method terminates on the highly degenerate trajectory systems.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from errors import IterationLimit
from matcore import TOL


FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_PIVOT_EPS = 1e-12
_COST_EPS = 1e-11
_INTERIOR_CAP = 1.0


@dataclass
class LpProblem:
    a: np.ndarray
    b: np.ndarray
    objective: np.ndarray | None = None
    var_bounds: list[tuple[float | None, float | None]] | None = None

    def __post_init__(self) -> None:
        self.a = np.atleast_2d(np.asarray(self.a, dtype=float))
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if self.a.size == 0 and self.a.shape[0] != self.b.size:
            self.a = np.zeros((self.b.size, 0))
        if self.a.shape[0] != self.b.size:
            raise ValueError(f"row mismatch: a has {self.a.shape[0]} rows, b has {self.b.size}")
        if self.objective is not None:
            self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
            if self.objective.size != self.n_vars:
                raise ValueError("objective length does not match the variable count")
        if self.var_bounds is not None and len(self.var_bounds) != self.n_vars:
            raise ValueError("var_bounds length does not match the variable count")

    @property
    def n_rows(self) -> int:
        return self.a.shape[0]

    @property
    def n_vars(self) -> int:
        return self.a.shape[1]


@dataclass
class LpOutcome:
    status: str
    x: np.ndarray | None = None
    max_violation: float = 0.0
    degenerate: bool = False
    objective: float | None = None
    slack: np.ndarray | None = field(default=None, repr=False)

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def _standardize(p: LpProblem) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    # Returns (a_std, b_std, lift, offset) with x = lift @ y + offset, y >= 0.
    n = p.n_vars
    bounds = p.var_bounds or [(None, None)] * n
    cols: list[np.ndarray] = []
    offset = np.zeros(n)
    extra_rows: list[tuple[int, float]] = []
    for j, (lo, hi) in enumerate(bounds):
        unit = np.zeros(n)
        unit[j] = 1.0
        if lo is None and hi is None:
            cols.append(unit)
            cols.append(-unit)
        elif lo is not None:
            offset[j] = lo
            cols.append(unit)
            if hi is not None:
                extra_rows.append((len(cols) - 1, hi - lo))
        else:
            offset[j] = hi
            cols.append(-unit)
    lift = np.stack(cols, axis=1) if cols else np.zeros((n, 0))
    a_std = p.a @ lift
    b_std = p.b - p.a @ offset
    if extra_rows:
        bound_rows = np.zeros((len(extra_rows), lift.shape[1]))
        for i, (col, width) in enumerate(extra_rows):
            bound_rows[i, col] = 1.0
        a_std = np.vstack([a_std, bound_rows])
        b_std = np.concatenate([b_std, [w for _, w in extra_rows]])
    return a_std, b_std, lift, offset


class _Tableau:
    # Equality tableau [A | rhs] with an explicit basis and cost row.

    def __init__(self, body: np.ndarray, rhs: np.ndarray, basis: list[int]) -> None:
        self.body = body
        self.rhs = rhs
        self.basis = basis
        self.cost = np.zeros(body.shape[1])
        self.value = 0.0

    def set_cost(self, c: np.ndarray) -> None:
        # Reduced costs for minimizing c . z with the current basis.
        self.cost = c.astype(float).copy()
        self.value = 0.0
        for i, j in enumerate(self.basis):
            if c[j] != 0.0:
                self.cost -= c[j] * self.body[i]
                self.value += c[j] * self.rhs[i]

    def pivot(self, row: int, col: int) -> None:
        piv = self.body[row, col]
        self.body[row] /= piv
        self.rhs[row] /= piv
        column = self.body[:, col].copy()
        column[row] = 0.0
        self.body -= np.outer(column, self.body[row])
        self.rhs -= column * self.rhs[row]
        factor = self.cost[col]
        self.cost -= factor * self.body[row]
        self.value += factor * self.rhs[row]
        self.basis[row] = col

    def run(self, phase: str, limit: int, allowed: np.ndarray) -> str:
        logger = logging.getLogger(__name__)
        for step in range(limit):
            candidates = np.flatnonzero((self.cost < -_COST_EPS) & allowed)
            if candidates.size == 0:
                return FEASIBLE
            col = int(candidates[0])
            column = self.body[:, col]
            rows = np.flatnonzero(column > _PIVOT_EPS)
            if rows.size == 0:
                return UNBOUNDED
            ratios = np.maximum(self.rhs[rows], 0.0) / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + _PIVOT_EPS]
            row = int(min(ties, key=lambda r: self.basis[r]))
            leaving = self.basis[row]
            self.pivot(row, col)
            logger.debug(
                "lp_pivot phase=%s step=%s entering=%s leaving=%s objective=%.12g",
                phase,
                step,
                col,
                leaving,
                self.value,
            )
        raise IterationLimit(f"simplex {phase} exceeded {limit} pivots")

    def solution(self) -> np.ndarray:
        z = np.zeros(self.body.shape[1])
        for i, j in enumerate(self.basis):
            z[j] = self.rhs[i]
        return z


def _outcome(p: LpProblem, status: str, x: np.ndarray | None, degenerate: bool) -> LpOutcome:
    if x is None:
        return LpOutcome(status=status, degenerate=degenerate)
    slack = p.b - p.a @ x
    violation = float(max(0.0, -slack.min())) if slack.size else 0.0
    value = float(p.objective @ x) if p.objective is not None else 0.0
    return LpOutcome(
        status=status,
        x=x,
        max_violation=violation,
        degenerate=degenerate,
        objective=value,
        slack=slack,
    )


def solve(p: LpProblem) -> LpOutcome:
    """Minimize ``objective . x`` subject to ``a x <= b`` and the bounds.

    A zero or missing objective returns the Phase-I point.
    """
    logger = logging.getLogger(__name__)
    a_std, b_std, lift, offset = _standardize(p)
    m, n = a_std.shape
    limit = 50 * (m + n + 1)

    if m == 0:
        x = offset.copy()
        if p.objective is not None and np.any(np.abs(p.objective @ lift) > 0):
            return LpOutcome(status=UNBOUNDED)
        return _outcome(p, FEASIBLE, x, False)

    # Columns: structural y, slacks s, then one artificial per negative row.
    flip = b_std < 0
    sign = np.where(flip, -1.0, 1.0)
    n_art = int(flip.sum())
    body = np.zeros((m, n + m + n_art))
    body[:, :n] = a_std * sign[:, None]
    body[:, n : n + m] = np.diag(sign)
    rhs = b_std * sign
    basis = []
    art = 0
    for i in range(m):
        if flip[i]:
            body[i, n + m + art] = 1.0
            basis.append(n + m + art)
            art += 1
        else:
            basis.append(n + i)
    tab = _Tableau(body, rhs, basis)
    width = n + m + n_art
    is_art = np.zeros(width, dtype=bool)
    is_art[n + m :] = True

    degenerate = False
    if n_art:
        c1 = np.zeros(width)
        c1[is_art] = 1.0
        tab.set_cost(c1)
        tab.run("phase1", limit, np.ones(width, dtype=bool))
        phase1 = float(tab.value)
        if phase1 > TOL["lp_infeasible"]:
            logger.info("lp_infeasible rows=%s vars=%s phase1=%.3e", p.n_rows, p.n_vars, phase1)
            return LpOutcome(status=INFEASIBLE)
        if phase1 > TOL["lp_feasible"]:
            degenerate = True
            logger.warning("lp_degenerate_feasible phase1=%.3e", phase1)
        # Drive remaining artificials out of the basis where possible.
        for i, j in enumerate(list(tab.basis)):
            if not is_art[j]:
                continue
            row = tab.body[i, : n + m]
            nz = np.flatnonzero(np.abs(row) > 1e-9)
            if nz.size:
                tab.pivot(i, int(nz[0]))

    objective = p.objective
    if objective is None or not np.any(objective):
        x = lift @ tab.solution()[:n] + offset
        return _outcome(p, FEASIBLE, x, degenerate)

    c2 = np.zeros(width)
    c2[:n] = objective @ lift
    tab.set_cost(c2)
    allowed = ~is_art
    status = tab.run("phase2", limit, allowed)
    if status == UNBOUNDED:
        logger.info("lp_unbounded rows=%s vars=%s", p.n_rows, p.n_vars)
        return LpOutcome(status=UNBOUNDED, degenerate=degenerate)
    x = lift @ tab.solution()[:n] + offset
    return _outcome(p, FEASIBLE, x, degenerate)


def feasible_point(p: LpProblem, cap: float = _INTERIOR_CAP) -> LpOutcome:
    # Phase I, then maximize t in a_i x + t |a_i| <= b_i (0 <= t <= cap).
    # Flat directions leave t = 0 and the Phase-I point stands.
    logger = logging.getLogger(__name__)
    first = solve(LpProblem(a=p.a, b=p.b, var_bounds=p.var_bounds))
    if not first.feasible or p.n_vars == 0:
        return first

    norms = np.linalg.norm(p.a, axis=1)
    a_aux = np.hstack([p.a, norms[:, None]])
    bounds = list(p.var_bounds or [(None, None)] * p.n_vars) + [(0.0, cap)]
    objective = np.zeros(p.n_vars + 1)
    objective[-1] = -1.0
    centred = solve(LpProblem(a=a_aux, b=p.b, objective=objective, var_bounds=bounds))
    if not centred.feasible:
        logger.warning("lp_interior_fallback status=%s", centred.status)
        return first
    x = centred.x[: p.n_vars]
    out = _outcome(p, FEASIBLE, x, first.degenerate)
    logger.debug("lp_interior margin=%.3e violation=%.3e", centred.x[-1], out.max_violation)
    return out
