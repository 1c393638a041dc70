"""Dense primal simplex with an exact (integer-preserving) and a float tableau.

Exact mode runs the fraction-free pivoting scheme: every row is scaled to
integers once, the tableau stays integral and a single common denominator
``D`` (the previous pivot) turns stored entries into true values. Float mode
runs the textbook tableau on float64.

Pricing is Dantzig's largest reduced cost until a run of degenerate pivots
trips a counter, after which Bland's rule takes over for the rest of the
phase, so the exact path always terminates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .errors import DimensionError, NumericalBreakdown
from .numeric import EXACT, NumericMode

BLAND_AFTER = 10
PIVOT_TOL = 1e-9


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpProblem:
    """``direction  objective @ x  s.t.  A x (senses) b,  lower <= x <= upper``.

    ``senses`` holds one of ``"L"``, ``"E"``, ``"G"`` per row (default all
    ``"L"``). Bounds default to ``x >= 0``; use ``None`` or ``±math.inf``
    for a missing bound.
    """

    A: Any
    b: Any
    objective: Any
    senses: Sequence[str] | None = None
    direction: str = "max"
    lower: Sequence[Any] | None = None
    upper: Sequence[Any] | None = None

    def __post_init__(self) -> None:
        A = np.asarray(self.A, dtype=object)
        k = len(self.objective)
        if A.size == 0:
            A = A.reshape(0, k)
        if A.ndim != 2 or A.shape[1] != k:
            raise DimensionError(f"A has shape {A.shape}, objective has length {k}")
        self.A = A
        if len(self.b) != A.shape[0]:
            raise DimensionError(f"b has length {len(self.b)}, A has {A.shape[0]} rows")
        if self.senses is None:
            self.senses = ["L"] * A.shape[0]
        self.senses = [s.upper()[0] for s in self.senses]
        if len(self.senses) != A.shape[0] or any(s not in "LEG" for s in self.senses):
            raise DimensionError("senses must give one of L/E/G per row")
        if self.direction not in ("max", "min"):
            raise ValueError("direction must be 'max' or 'min'")
        self.lower = [0] * k if self.lower is None else list(self.lower)
        self.upper = [math.inf] * k if self.upper is None else list(self.upper)
        if len(self.lower) != k or len(self.upper) != k:
            raise DimensionError("bounds must have one entry per variable")
        for lo, hi in zip(self.lower, self.upper):
            if not _is_inf(lo) and not _is_inf(hi) and lo > hi:
                raise ValueError(f"lower bound {lo} exceeds upper bound {hi}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective_value: Any = None
    basis: tuple[int, ...] = ()
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    farkas: np.ndarray | None = None
    iterations: int = 0
    primary: "LpSolution | None" = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _is_inf(v: Any) -> bool:
    return v is None or (isinstance(v, float) and math.isinf(v))


def _lcm_denominator(values: Sequence[Fraction]) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, v.denominator)
    return out


class _Tableau:
    """Row 0 holds reduced costs ``c_j - z_j`` and ``-z`` in the last column."""

    def __init__(self, T: np.ndarray, basis: list[int], exact: bool, mode: NumericMode):
        self.T = T
        self.basis = basis
        self.exact = exact
        self.mode = mode
        self.D: Any = 1
        self.iterations = 0

    def value(self, i: int, j: int) -> Any:
        if self.exact:
            return Fraction(self.T[i, j], self.D)
        return self.T[i, j]

    def pivot(self, r: int, c: int) -> None:
        T = self.T
        if self.exact:
            p = T[r, c]
            row = T[r].copy()
            T = (T * p - np.outer(T[:, c], row)) // self.D
            T[r] = row
            if p < 0:
                T = -T
                p = -p
            self.T = T
            self.D = p
        else:
            T[r] /= T[r, c]
            col = T[:, c].copy()
            col[r] = 0.0
            T -= np.outer(col, T[r])
        self.basis[r - 1] = c
        self.iterations += 1

    def entering(self, allowed: int, bland: bool) -> int | None:
        row = self.T[0, :allowed]
        if self.exact:
            cand = np.flatnonzero(row > 0)
        else:
            cand = np.flatnonzero(row > self.mode.opt_tol)
        if cand.size == 0:
            return None
        if bland:
            return int(cand[0])
        return int(cand[np.argmax(row[cand])])

    def leaving(self, c: int) -> int | None:
        T = self.T
        best = None
        if self.exact:
            for i in np.flatnonzero(T[1:, c] > 0):
                i = int(i) + 1
                num, den = T[i, -1], T[i, c]
                if best is None:
                    best = (i, num, den)
                    continue
                _, bn, bd = best
                lhs, rhs = num * bd, bn * den
                if lhs < rhs or (lhs == rhs and self.basis[i - 1] < self.basis[best[0] - 1]):
                    best = (i, num, den)
            return None if best is None else best[0]
        col = T[1:, c]
        cand = np.flatnonzero(col > PIVOT_TOL)
        if cand.size == 0:
            return None
        ratios = np.maximum(T[1:, -1][cand], 0.0) / col[cand]
        low = ratios.min()
        ties = cand[ratios <= low + 1e-12 * (1.0 + abs(low))]
        basis = np.asarray(self.basis)[ties]
        return int(ties[np.argmin(basis)]) + 1

    def run(self, allowed: int, max_iter: int) -> bool:
        """Pivot to optimality over the first ``allowed`` columns.

        Returns False when the objective is unbounded.
        """
        degenerate = 0
        bland = False
        start = self.iterations
        while True:
            c = self.entering(allowed, bland)
            if c is None:
                return True
            r = self.leaving(c)
            if r is None:
                return False
            rhs = self.T[r, -1]
            if (rhs == 0) if self.exact else (abs(rhs) <= self.mode.feas_tol):
                degenerate += 1
                if degenerate >= BLAND_AFTER:
                    bland = True
            else:
                degenerate = 0
            if not self.exact and abs(self.T[r, c]) < 1e-11:
                raise NumericalBreakdown(f"pivot magnitude {self.T[r, c]:.3e}")
            self.pivot(r, c)
            if self.iterations - start > max_iter:
                if self.exact:
                    raise RuntimeError("exact simplex exceeded its iteration guard")
                raise NumericalBreakdown("float simplex iteration limit reached")


def _standardize(p: LpProblem, mode: NumericMode):
    """Shift/split variables so every internal column is ``>= 0``."""
    conv = mode.array
    A = conv(p.A) if p.A.size else p.A.astype(object if mode.exact else float)
    b = conv(list(p.b))
    c = conv(list(p.objective))
    if p.direction == "min":
        c = -c
    m, k = A.shape
    zero = Fraction(0) if mode.exact else 0.0
    cols: list[np.ndarray] = []
    costs: list[Any] = []
    maps: list[tuple[int, int]] = []  # (original var, sign)
    shift = np.array([zero] * k, dtype=object if mode.exact else float)
    ub_rows: list[tuple[int, Any]] = []
    for j in range(k):
        lo, hi = p.lower[j], p.upper[j]
        if not _is_inf(lo):
            lo = conv([lo])[0]
            shift[j] = lo
            maps.append((j, 1))
            cols.append(A[:, j])
            costs.append(c[j])
            if not _is_inf(hi):
                ub_rows.append((len(cols) - 1, conv([hi])[0] - lo))
        elif not _is_inf(hi):
            hi = conv([hi])[0]
            shift[j] = hi
            maps.append((j, -1))
            cols.append(-A[:, j])
            costs.append(-c[j])
        else:
            maps.append((j, 1))
            cols.append(A[:, j])
            costs.append(c[j])
            maps.append((j, -1))
            cols.append(-A[:, j])
            costs.append(-c[j])
    n_s = len(cols)
    M = np.column_stack(cols) if n_s else np.zeros((m, 0), dtype=A.dtype)
    rhs = b - (A @ shift if k else 0)
    senses = list(p.senses)
    if ub_rows:
        extra = np.zeros((len(ub_rows), n_s), dtype=M.dtype)
        if mode.exact:
            extra[:] = Fraction(0)
        extra_b = []
        for r, (col, width) in enumerate(ub_rows):
            extra[r, col] = 1
            extra_b.append(width)
        M = np.vstack([M, extra]) if m else extra
        rhs = np.concatenate([np.asarray(rhs, dtype=M.dtype).reshape(-1), np.asarray(extra_b, dtype=M.dtype)])
        senses += ["L"] * len(ub_rows)
    rhs = np.asarray(rhs, dtype=M.dtype).reshape(-1)
    return M, rhs, np.asarray(costs, dtype=M.dtype), senses, maps, shift


def solve_lp(p: LpProblem, mode: NumericMode = EXACT) -> LpSolution:
    """Solve ``p``; optimal answers are basic (vertex) solutions with duals."""
    M, rhs, costs, senses, maps, shift = _standardize(p, mode)
    exact = mode.exact
    m_all, n_s = M.shape
    sigma: list[Any] = []
    rows = []
    rhs_list = []
    kinds = []
    for i in range(m_all):
        row, bi, s = M[i], rhs[i], senses[i]
        sign = 1
        if bi < 0:
            row, bi, sign = -row, -bi, -1
            s = {"L": "G", "G": "L", "E": "E"}[s]
        if exact:
            scale = _lcm_denominator(list(row) + [bi])
            row = np.array([int(v * scale) for v in row], dtype=object)
            bi = int(bi * scale)
            sign *= scale
        rows.append(row)
        rhs_list.append(bi)
        kinds.append(s)
        sigma.append(sign)

    n_slack = sum(1 for s in kinds if s != "E")
    n_art = sum(1 for s in kinds if s != "L")
    ncols = n_s + n_slack + n_art
    dtype = object if exact else float
    T = np.zeros((m_all + 1, ncols + 1), dtype=dtype)
    if exact:
        T[:] = 0
    basis = [0] * m_all
    ident_col = [0] * m_all
    is_art = [False] * m_all
    slack_at, art_at = n_s, n_s + n_slack
    for i, (row, bi, s) in enumerate(zip(rows, rhs_list, kinds)):
        T[i + 1, :n_s] = row
        T[i + 1, -1] = bi
        if s != "E":
            T[i + 1, slack_at] = 1 if s == "L" else -1
            if s == "L":
                basis[i] = ident_col[i] = slack_at
            slack_at += 1
        if s != "L":
            T[i + 1, art_at] = 1
            basis[i] = ident_col[i] = art_at
            is_art[i] = True
            art_at += 1

    tab = _Tableau(T, basis, exact, mode)
    allowed = n_s + n_slack
    max_iter = 50 * (m_all + ncols + 10)

    if n_art:
        for i in range(m_all):
            if is_art[i]:
                tab.T[0, :allowed] += tab.T[i + 1, :allowed]
                tab.T[0, -1] += tab.T[i + 1, -1]
        tab.run(allowed, max_iter)
        infeas = tab.T[0, -1]
        bad = infeas > 0 if exact else infeas > mode.feas_tol * (1.0 + max(abs(v) for v in rhs_list))
        if bad:
            farkas = []
            for i in range(m_all):
                y = (-1 if is_art[i] else 0) - tab.value(0, ident_col[i])
                farkas.append(y * sigma[i])
            farkas_arr = np.asarray(farkas[: p.A.shape[0]], dtype=dtype)
            return LpSolution(LpStatus.INFEASIBLE, farkas=farkas_arr, iterations=tab.iterations)
        _drive_out_artificials(tab, allowed, n_s + n_slack)

    # phase 2 objective row
    if exact:
        obj_scale = _lcm_denominator(list(costs))
        cint = [int(v * obj_scale) for v in costs]
    else:
        obj_scale = 1
        cint = list(costs)
    row0 = np.zeros(ncols + 1, dtype=dtype)
    if exact:
        row0[:] = 0
    for j, cj in enumerate(cint):
        row0[j] = cj * tab.D if exact else cj
    for i, bcol in enumerate(tab.basis):
        cb = cint[bcol] if bcol < n_s else 0
        if cb:
            row0 = row0 - cb * tab.T[i + 1]
    tab.T[0] = row0
    if not tab.run(allowed, max_iter):
        return LpSolution(LpStatus.UNBOUNDED, iterations=tab.iterations)

    # primal
    xs = [Fraction(0) if exact else 0.0] * n_s
    for i, bcol in enumerate(tab.basis):
        if bcol < n_s:
            xs[bcol] = tab.value(i + 1, -1)
    k = len(p.objective)
    x = shift.copy()
    for col, (j, sgn) in enumerate(maps):
        x[j] = x[j] + sgn * xs[col]
    # duals of the caller's rows
    m = p.A.shape[0]
    duals = []
    for i in range(m):
        y = -tab.value(0, ident_col[i])
        y = y * sigma[i]
        y = y / obj_scale if exact else y
        duals.append(-y if p.direction == "min" else y)
    duals_arr = np.asarray(duals, dtype=dtype).reshape(m)
    c_orig = mode.array(list(p.objective))
    A_orig = mode.array(p.A) if m else np.zeros((0, k), dtype=dtype)
    reduced = c_orig - (A_orig.T @ duals_arr if m else 0)
    value = c_orig @ x if k else (Fraction(0) if exact else 0.0)
    basis_vars = tuple(sorted({maps[b][0] for b in tab.basis if b < n_s}))
    sol = LpSolution(
        LpStatus.OPTIMAL,
        x=x,
        objective_value=value,
        basis=basis_vars,
        duals=duals_arr,
        reduced_costs=np.asarray(reduced, dtype=dtype).reshape(k),
        iterations=tab.iterations,
    )
    if not exact:
        _check_float(p, sol, mode)
    return sol


def _drive_out_artificials(tab: _Tableau, allowed: int, first_art: int) -> None:
    for i, bcol in enumerate(tab.basis):
        if bcol < first_art:
            continue
        row = tab.T[i + 1, :allowed]
        if tab.exact:
            nz = np.flatnonzero(row != 0)
        else:
            nz = np.flatnonzero(np.abs(row) > PIVOT_TOL)
        if nz.size:
            tab.pivot(i + 1, int(nz[0]))


def _check_float(p: LpProblem, sol: LpSolution, mode: NumericMode) -> None:
    A = np.asarray(p.A, dtype=float)
    if A.size == 0:
        return
    b = np.asarray(p.b, dtype=float)
    lhs = A @ sol.x
    norms = 1.0 + np.abs(A).sum(axis=1) + np.abs(b)
    tol = 1e3 * mode.feas_tol * norms
    for s, l, r, t in zip(p.senses, lhs, b, tol):
        if (s in "LE" and l > r + t) or (s in "GE" and l < r - t):
            raise NumericalBreakdown("float simplex returned an infeasible point")


def solve_lexicographic(p1: LpProblem, secondary_objective: Any, mode: NumericMode = EXACT) -> LpSolution:
    """Optimize ``secondary_objective`` over the optimal face of ``p1``.

    The secondary stage keeps ``p1.direction``. The stage-one solution is kept
    on the result as ``.primary``.
    """
    first = solve_lp(p1, mode)
    if not first.optimal:
        return first
    k = len(p1.objective)
    opt = first.objective_value
    obj_row = list(p1.objective)
    if mode.exact:
        sense, bound = "E", opt
    else:
        slack = mode.opt_tol * (1.0 + abs(float(opt)))
        sense, bound = ("G", float(opt) - slack) if p1.direction == "max" else ("L", float(opt) + slack)
    A2 = np.vstack([p1.A, np.asarray(obj_row, dtype=object).reshape(1, k)]) if p1.A.shape[0] else np.asarray([obj_row], dtype=object)
    p2 = LpProblem(
        A=A2,
        b=list(p1.b) + [bound],
        objective=list(secondary_objective),
        senses=list(p1.senses) + [sense],
        direction=p1.direction,
        lower=p1.lower,
        upper=p1.upper,
    )
    second = solve_lp(p2, mode)
    if second.optimal and second.duals is not None:
        second.duals = second.duals[:-1]
    second.primary = first
    return second


def primal_dual_gap(p: LpProblem, sol: LpSolution, mode: NumericMode = EXACT) -> Any:
    """Gap between ``c x`` and the Lagrangian dual value ``b y + d x``.

    ``d`` holds the reduced costs, i.e. the bound multipliers; a zero gap is
    complementary slackness on the rows.
    """
    b = mode.array(list(p.b))
    dual_obj = (b @ sol.duals if len(b) else 0) + sol.reduced_costs @ sol.x
    return abs(sol.objective_value - dual_obj)
