"""Pareto dominance, the dominance-verification LP and supporting-weight certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DimensionError, InfeasiblePoint
from .lp import LpProblem, solve_lp
from .model import MaxParetoInstance, _bound_structure, polyhedron_problem
from .numeric import EXACT, NumericMode, decode_number, encode_vector


def dominates(u: Any, v: Any, tol: float = 0.0) -> bool:
    """True iff ``u >= v`` componentwise and ``u > v`` somewhere.

    With ``tol > 0`` the weak comparison is relaxed by ``tol`` and the strict
    one needs a margin larger than ``tol``.
    """
    u = np.asarray(u, dtype=object)
    v = np.asarray(v, dtype=object)
    if u.shape != v.shape:
        raise DimensionError(f"payoff vectors of different lengths {u.shape} and {v.shape}")
    if tol:
        u, v = u.astype(float), v.astype(float)
        return bool(np.all(u >= v - tol) and np.any(u > v + tol))
    return bool(np.all(u >= v) and np.any(u > v))


@dataclass
class DominanceResult:
    dominated: bool
    witness: np.ndarray | None = None
    improvement: np.ndarray | None = None

    @property
    def verdict(self) -> str:
        return "Dominated" if self.dominated else "NotDominated"


@dataclass
class SupportCertificate:
    w: np.ndarray
    eta: np.ndarray

    def to_json(self) -> dict:
        return {"w": encode_vector(self.w), "eta": encode_vector(self.eta)}

    @classmethod
    def from_json(cls, data: dict) -> "SupportCertificate":
        return cls(
            np.array([decode_number(v) for v in data["w"]], dtype=object),
            np.array([decode_number(v) for v in data["eta"]], dtype=object),
        )

    def ratio(self, i: int = 0, j: int = -1) -> Any:
        return self.w[i] / self.w[j]


def _require_feasible(inst: MaxParetoInstance, x: Any, mode: NumericMode) -> np.ndarray:
    x = mode.array(list(x))
    if not inst.is_feasible(x, mode):
        raise InfeasiblePoint("point violates A x <= b")
    return x


def verify_pareto(inst: MaxParetoInstance, x: Any, mode: NumericMode = EXACT) -> DominanceResult:
    """Solve ``max 1'U y  s.t.  U y >= U x,  A y <= b`` and compare with ``1'U x``."""
    x = _require_feasible(inst, x, mode)
    _, _, U, _ = inst.arrays(mode)
    ux = U @ x
    total = U.sum(axis=0)
    problem, _ = polyhedron_problem(inst, total, mode, extra_A=-U, extra_b=-ux)
    sol = solve_lp(problem, mode)
    if not sol.optimal:  # x itself is feasible and X is bounded
        raise InfeasiblePoint(f"verification LP ended {sol.status.value}")
    base = ux.sum()
    gap = sol.objective_value - base
    if mode.exact:
        dominated = gap > 0
    else:
        dominated = gap > inst.n * mode.opt_tol * (1.0 + abs(base))
    if not dominated:
        return DominanceResult(False)
    return DominanceResult(True, witness=sol.x, improvement=U @ sol.x - ux)


class WitnessCache:
    """Batch verifier that reuses attainable payoff vectors from earlier LPs.

    Every verification LP yields an attainable payoff ``U y``. A later point
    whose payoff is strictly dominated by a cached one is settled without a
    new LP; verdicts are also memoised per payoff vector, since Pareto
    optimality depends on the payoff alone.
    """

    def __init__(self, inst: MaxParetoInstance, mode: NumericMode = EXACT):
        self.inst = inst
        self.mode = mode
        self._witness_x: list[np.ndarray] = []
        self._witness_u: list[np.ndarray] = []
        self._witness_t: list[tuple] = []
        self._verdicts: dict[tuple, DominanceResult] = {}
        self.lp_calls = 0

    def _key(self, u: np.ndarray) -> tuple:
        return tuple(u) if self.mode.exact else tuple(np.round(u.astype(float), 9))

    def verify(self, x: Any, u: Any = None) -> DominanceResult:
        """Verdict for ``x``; ``u`` may pass its payoff ``U x`` if already known."""
        mode = self.mode
        x = mode.array(list(x))
        if u is None:
            _, _, U, _ = self.inst.arrays(mode)
            nz = np.flatnonzero(x != 0)
            u = U[:, nz] @ x[nz] if len(nz) else U[:, 0] * 0
        elif not isinstance(u, np.ndarray) or u.dtype != (object if mode.exact else float):
            u = mode.array(list(u))
        key = self._key(u)
        if key in self._verdicts:
            return self._verdicts[key]
        tol = 0.0 if mode.exact else self.inst.n * mode.opt_tol
        target = key if mode.exact else tuple(u)
        for y, v, vt in zip(self._witness_x, self._witness_u, self._witness_t):
            if _dominates_tuple(vt, target, tol):
                res = DominanceResult(True, witness=y, improvement=v - u)
                self._verdicts[key] = res
                return res
        self.lp_calls += 1
        res = verify_pareto(self.inst, x, mode)
        if res.dominated:
            self._remember(res.witness, u + res.improvement)
        else:
            self._remember(x, u)
        self._verdicts[key] = res
        return res

    def _remember(self, x: np.ndarray, u: np.ndarray) -> None:
        self._witness_x.append(x)
        self._witness_u.append(u)
        self._witness_t.append(tuple(u))


def _dominates_tuple(v: tuple, u: tuple, tol: float) -> bool:
    if not tol:
        return all(a >= b for a, b in zip(v, u)) and v != u
    strict = False
    for a, b in zip(v, u):
        if a < b - tol:
            return False
        if a > b + tol:
            strict = True
    return strict


def check_certificate(inst: MaxParetoInstance, x: Any, cert: SupportCertificate, mode: NumericMode = EXACT) -> bool:
    """Both certificate conditions plus ``w >= 1`` and ``eta >= 0``."""
    A, b, U, _ = inst.arrays(mode)
    x = mode.array(list(x))
    w = mode.array(list(cert.w))
    eta = mode.array(list(cert.eta))
    if w.shape != (inst.n,) or eta.shape != (inst.m,):
        return False
    lhs = A.T @ eta
    rhs = U.T @ w
    value = w @ (U @ x)
    bound = b @ eta
    if mode.exact:
        return bool(all(w >= 1) and all(eta >= 0) and all(lhs == rhs) and value >= bound)
    tol = mode.feas_tol
    scale = 1.0 + float(np.abs(w).max()) + float(np.abs(eta).max())
    return bool(
        np.all(w >= 1 - tol)
        and np.all(eta >= -tol * scale)
        and np.all(np.abs(lhs - rhs) <= tol * scale * (1.0 + np.abs(A).sum(axis=0) + np.abs(U).sum(axis=0)))
        and value >= bound - tol * scale * (1.0 + abs(float(bound)))
    )


def _certificate_system(inst: MaxParetoInstance, x: np.ndarray, mode: NumericMode):
    """Rows of the certificate system in variables ``(w, eta_kept)``.

    Multipliers of rows that act as lower bounds ``x_j >= l_j`` are
    eliminated: ``eta_r = ((U'w)_j - (A_kept' eta)_j) / a_rj``.
    """
    A, b, U, _ = inst.arrays(mode)
    kept, lower_row = _bound_structure(inst)
    n, k = inst.n, inst.k
    Ak = A[kept]
    zero = mode.array([0])[0]
    lower = np.array([zero] * k, dtype=object if mode.exact else float)
    for j, r in enumerate(lower_row):
        if r is not None:
            lower[j] = b[r] / A[r, j]
    rows, rhs, senses = [], [], []
    for j in range(k):
        rows.append(np.concatenate([-U[:, j], Ak[:, j]]))
        rhs.append(zero)
        senses.append("E" if lower_row[j] is None else "G")
    ux = U @ x
    w_coef = U @ lower - ux
    eta_coef = b[kept] - Ak @ lower
    rows.append(np.concatenate([w_coef, eta_coef]))
    rhs.append(zero)
    senses.append("L")
    M = np.array(rows, dtype=object).reshape(len(rows), n + len(kept))
    return M, rhs, senses, kept, lower_row


def _recover_eta(inst: MaxParetoInstance, w: np.ndarray, eta_kept: np.ndarray, kept, lower_row, mode: NumericMode) -> np.ndarray:
    A, _, U, _ = inst.arrays(mode)
    zero = mode.array([0])[0]
    eta = np.array([zero] * inst.m, dtype=object if mode.exact else float)
    for pos, r in enumerate(kept):
        eta[r] = eta_kept[pos]
    if kept:
        partial = A[kept].T @ eta_kept
    else:
        partial = np.array([zero] * inst.k, dtype=eta.dtype)
    uw = U.T @ w
    for j, r in enumerate(lower_row):
        if r is not None:
            eta[r] = (uw[j] - partial[j]) / A[r, j]
    return eta


def find_support_certificate(
    inst: MaxParetoInstance,
    x: Any,
    w_cap: float = math.inf,
    mode: NumericMode = EXACT,
) -> SupportCertificate | None:
    """Minimise ``1'w`` over the (linear, x fixed) certificate system.

    ``None`` means no certificate with ``1 <= w <= w_cap`` exists; with an
    infinite cap in exact mode that proves ``x`` is not Pareto-optimal.
    """
    x = _require_feasible(inst, x, mode)
    M, rhs, senses, kept, lower_row = _certificate_system(inst, x, mode)
    n = inst.n
    cap = None if math.isinf(w_cap) else w_cap
    problem = LpProblem(
        A=M,
        b=rhs,
        objective=[1] * n + [0] * len(kept),
        senses=senses,
        direction="min",
        lower=[1] * n + [0] * len(kept),
        upper=[cap if cap is not None else math.inf] * n + [math.inf] * len(kept),
    )
    sol = solve_lp(problem, mode)
    if not sol.optimal:
        return None
    w = sol.x[:n]
    eta = _recover_eta(inst, w, sol.x[n:], kept, lower_row, mode)
    cert = SupportCertificate(w=w, eta=eta)
    if not check_certificate(inst, x, cert, mode):
        return None
    return cert


def min_support_ratio(inst: MaxParetoInstance, x: Any, i: int = 0, j: int = -1, mode: NumericMode = EXACT) -> Any:
    """Infimum of ``w_i / w_j`` over all nonnegative supporting weights.

    The certificate system is homogeneous in ``(w, eta)``, so fixing
    ``w_j = 1`` and minimising ``w_i`` gives the ratio. Returns ``None``
    when no supporting weight exists.
    """
    x = _require_feasible(inst, x, mode)
    M, rhs, senses, kept, _ = _certificate_system(inst, x, mode)
    n = inst.n
    j = j % n
    objective = [0] * (n + len(kept))
    objective[i % n] = 1
    upper = [math.inf] * (n + len(kept))
    lower = [0] * (n + len(kept))
    lower[j] = upper[j] = 1
    sol = solve_lp(LpProblem(A=M, b=rhs, objective=objective, senses=senses, direction="min", lower=lower, upper=upper), mode)
    if not sol.optimal:
        return None
    return sol.objective_value


def detect_aligned_interests(inst: MaxParetoInstance, mode: NumericMode = EXACT) -> np.ndarray | None:
    """Find ``w > 0`` with ``U'w = c``, or ``None``.

    Maximises ``t`` subject to ``U'w = c``, ``w >= t``, ``t <= 1``, so the
    answer has ``w >= 1`` whenever such a solution exists.
    """
    _, _, U, c = inst.arrays(mode)
    n, k = inst.n, inst.k
    rows = [np.concatenate([U[:, j], [0]]) for j in range(k)]
    senses = ["E"] * k
    rhs = list(c)
    for i in range(n):
        row = [0] * (n + 1)
        row[i], row[n] = 1, -1
        rows.append(np.array(row, dtype=object))
        senses.append("G")
        rhs.append(0)
    problem = LpProblem(
        A=np.array(rows, dtype=object),
        b=rhs,
        objective=[0] * n + [1],
        senses=senses,
        lower=[None] * (n + 1),
        upper=[math.inf] * n + [1],
    )
    sol = solve_lp(problem, mode)
    if not sol.optimal:
        return None
    w, t = sol.x[:n], sol.x[n]
    if mode.exact:
        if t <= 0 or any(U.T @ w != c):
            return None
        return w
    if t <= mode.feas_tol:
        return None
    if np.any(np.abs(U.T @ w - c) > mode.feas_tol * (1.0 + np.abs(c))):
        return None
    return w
