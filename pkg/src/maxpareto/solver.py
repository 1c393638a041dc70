"""Max-Pareto solvers: bounded-weight heuristic, exact search and the ratio family."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Any, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import CapExceeded, InstanceRejected, NumericalBreakdown, ValidationFailed
from .lp import solve_lexicographic
from .matching import (
    BipartiteInstance,
    Matching,
    find_dominating_matching,
    graph_to_instance,
    indicator,
)
from .model import MaxParetoInstance, polyhedron_problem
from .numeric import EXACT, FLOAT, NumericMode, encode_number, encode_vector, to_fraction
from .pareto import (
    SupportCertificate,
    WitnessCache,
    check_certificate,
    detect_aligned_interests,
    find_support_certificate,
    min_support_ratio,
    verify_pareto,
)

EXACT_CAP_K = 12
EXACT_CAP_M = 24


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    TIME_LIMIT = "TimeLimit"
    NO_INCUMBENT = "NoIncumbent"


@dataclass(frozen=True)
class HeuristicConfig:
    w_cap: float = 10.0
    starts: int = 8
    local_steps: int = 20
    step_factor: float = 2.0
    time_limit: float = 60.0
    seed: int = 0
    mode: NumericMode = FLOAT
    try_aligned: bool = True

    def __post_init__(self) -> None:
        if self.w_cap < 1:
            raise ValueError("w_cap must be at least 1")
        if self.starts < 1 or self.local_steps < 1:
            raise ValueError("starts and local_steps must be at least 1")
        if self.step_factor <= 1:
            raise ValueError("step_factor must exceed 1")


@dataclass
class SolveReport:
    x: np.ndarray | None = None
    lb: Any = None
    ub: Any = None
    ub_valid: bool = False
    certificate: SupportCertificate | None = None
    po_verified: bool = False
    status: SolveStatus = SolveStatus.NO_INCUMBENT
    time_ms: int = 0
    iterations: int = 0
    weights: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        num = lambda v: None if v is None else encode_number(v)
        return {
            "lb": num(self.lb),
            "ub": num(self.ub),
            "ub_valid": self.ub_valid,
            "x": [] if self.x is None else encode_vector(self.x),
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "time_ms": self.time_ms,
            "iterations": self.iterations,
            "status": self.status.value,
            "po_verified": self.po_verified,
        }


@dataclass
class WeightEvaluation:
    x: np.ndarray
    value: Any
    certificate: SupportCertificate


def evaluate_weight(inst: MaxParetoInstance, w: Sequence[Any], mode: NumericMode = EXACT) -> WeightEvaluation:
    """Best ``c'x`` on the face of ``X`` maximising ``w'U x``.

    Any point of that face is Pareto-optimal for ``w > 0``; the certificate
    pairs ``w`` (rescaled so its minimum is 1) with the first-stage duals.
    """
    w = mode.array(list(w))
    if w.shape != (inst.n,):
        raise ValueError(f"weight vector has length {w.shape[0]}, expected n={inst.n}")
    if not all(v > 0 for v in w):
        raise ValueError("weights must be strictly positive")
    _, _, U, c = inst.arrays(mode)
    problem, rows = polyhedron_problem(inst, U.T @ w, mode)
    sol = solve_lexicographic(problem, c, mode)
    if not sol.optimal:
        raise InstanceRejected(f"weighted LP ended {sol.status.value}")
    scale = min(w)
    eta = rows.row_duals(sol.primary, mode)
    cert = SupportCertificate(w=w / scale, eta=eta / scale)
    return WeightEvaluation(x=sol.x, value=c @ sol.x, certificate=cert)


def _emit(inst: MaxParetoInstance, w: Sequence[Any]) -> WeightEvaluation | None:
    """Exact re-evaluation and verification of a candidate weight vector."""
    w_exact = [to_fraction(v) for v in w]
    ev = evaluate_weight(inst, w_exact, EXACT)
    if verify_pareto(inst, ev.x, EXACT).dominated or not check_certificate(inst, ev.x, ev.certificate, EXACT):
        return None
    return ev


def solve_heuristic(inst: MaxParetoInstance, cfg: HeuristicConfig = HeuristicConfig()) -> SolveReport:
    """Multi-start coordinate search over supporting weights in ``[1, w_cap]^n``.

    Each start draws log-uniform weights, then tries ``local_steps`` random
    coordinate moves (multiply or divide by ``step_factor``, clipped to the
    box), keeping a move when ``c'x`` improves. The best weight is
    re-evaluated and verified in exact arithmetic before it is reported.
    If the objective is a positive combination of payoffs, the weight found
    by ``detect_aligned_interests`` is optimal and is used directly.
    """
    t0 = time.perf_counter()
    deadline = t0 + cfg.time_limit
    mode = cfg.mode
    iterations = 0

    def finish(report: SolveReport) -> SolveReport:
        report.time_ms = int(round((time.perf_counter() - t0) * 1000))
        report.iterations = iterations
        return report

    if cfg.try_aligned:
        w = detect_aligned_interests(inst, EXACT)
        iterations += 1
        if w is not None:
            ev = _emit(inst, w)
            if ev is not None:
                return finish(SolveReport(ev.x, ev.value, ev.value, True, ev.certificate, True, SolveStatus.OPTIMAL, weights=w))

    log_cap = math.log(cfg.w_cap)
    candidates: list[tuple[float, int, np.ndarray]] = []
    timed_out = False

    def value_at(w: np.ndarray) -> float | None:
        nonlocal iterations
        iterations += 1
        try:
            return float(evaluate_weight(inst, w, mode).value)
        except NumericalBreakdown:
            return None

    for s in range(cfg.starts):
        if time.perf_counter() > deadline:
            timed_out = True
            break
        rng = np.random.default_rng([cfg.seed, s])
        w = np.exp(rng.uniform(0.0, log_cap, inst.n))
        if mode.exact:
            w = np.array([Fraction(v).limit_denominator(10**6) for v in w], dtype=object)
        best = value_at(w)
        for _ in range(cfg.local_steps):
            if time.perf_counter() > deadline:
                timed_out = True
                break
            i = int(rng.integers(inst.n))
            f = cfg.step_factor if rng.random() < 0.5 else 1 / cfg.step_factor
            trial = w.copy()
            trial[i] = min(max(trial[i] * (Fraction(f).limit_denominator(10**6) if mode.exact else f), 1), cfg.w_cap)
            if trial[i] == w[i]:
                continue
            v = value_at(trial)
            if v is not None and (best is None or v > best + 1e-9 * (1 + abs(best))):
                w, best = trial, v
        if best is not None:
            candidates.append((best, s, w))
        if timed_out:
            break

    candidates.sort(key=lambda t: (-t[0], t[1]))
    for _, _, w in candidates:
        ev = _emit(inst, w)
        if ev is not None:
            status = SolveStatus.TIME_LIMIT if timed_out else SolveStatus.FEASIBLE
            return finish(SolveReport(ev.x, ev.value, None, False, ev.certificate, True, status, weights=w))
    return finish(SolveReport(status=SolveStatus.TIME_LIMIT if timed_out else SolveStatus.NO_INCUMBENT))


def _solve_square(M: np.ndarray, rhs: np.ndarray) -> np.ndarray | None:
    """Exact Gaussian elimination; ``None`` when ``M`` is singular."""
    n = M.shape[0]
    T = np.concatenate([M, rhs.reshape(n, 1)], axis=1).astype(object)
    for col in range(n):
        piv = next((r for r in range(col, n) if T[r, col] != 0), None)
        if piv is None:
            return None
        if piv != col:
            T[[col, piv]] = T[[piv, col]]
        T[col] = T[col] / T[col, col]
        for r in range(n):
            if r != col and T[r, col] != 0:
                T[r] = T[r] - T[r, col] * T[col]
    return T[:, n]


def enumerate_vertices(inst: MaxParetoInstance, cap_k: int = EXACT_CAP_K, cap_m: int = EXACT_CAP_M) -> list[np.ndarray]:
    """All vertices of ``X``: feasible solutions of every nonsingular ``k``-row subsystem."""
    if inst.k > cap_k or inst.m > cap_m:
        raise CapExceeded(f"k={inst.k}, m={inst.m} exceeds the caps k<={cap_k}, m<={cap_m}")
    A, b, _, _ = inst.arrays(EXACT)
    seen: dict[tuple, np.ndarray] = {}
    for rows in combinations(range(inst.m), inst.k):
        x = _solve_square(A[list(rows)], b[list(rows)])
        if x is None:
            continue
        key = tuple(x)
        if key not in seen and inst.is_feasible(x, EXACT):
            seen[key] = x
    return [seen[k] for k in sorted(seen)]


def solve_exact(
    inst: MaxParetoInstance,
    mode: NumericMode = EXACT,
    time_limit: float | None = None,
    cap_k: int = EXACT_CAP_K,
    cap_m: int = EXACT_CAP_M,
) -> SolveReport:
    """Global optimum over Pareto-optimal vertices.

    An optimum is always attained at a vertex. Graph-encoded instances are
    searched as matchings by branch and bound; others by basis enumeration
    (subject to the caps). Arithmetic is always exact; ``mode`` is accepted
    for a uniform solver signature.
    """
    if inst.graph is not None:
        return _solve_matching(inst, time_limit)
    t0 = time.perf_counter()
    vertices = enumerate_vertices(inst, cap_k, cap_m)
    _, _, _, c = inst.arrays(EXACT)
    vertices.sort(key=lambda x: -(c @ x))
    cache = WitnessCache(inst, EXACT)
    for x in vertices:
        if not cache.verify(x).dominated:
            cert = find_support_certificate(inst, x)
            if cert is None:
                raise ValidationFailed("Pareto-optimal vertex has no supporting certificate")
            value = c @ x
            report = SolveReport(x, value, value, True, cert, True, SolveStatus.OPTIMAL)
            break
    else:
        report = SolveReport(ub_valid=False)
    report.time_ms = int(round((time.perf_counter() - t0) * 1000))
    report.iterations = cache.lp_calls
    return report


class _MatchingSearch:
    """Depth-first branch and bound over matchings, one agent per level.

    Nodes are pruned by an assignment bound on the remaining agents and by
    two necessary conditions for Pareto optimality: no two assigned agents
    gain from swapping, and every free item that some decided agent strictly
    prefers to its own must still be coverable by the undecided agents.
    """

    def __init__(self, g: BipartiteInstance, c: Sequence[Fraction]):
        self.g = g
        self.n1, self.n2 = g.n1, g.n2
        self.c = {(i, j): c[e] for e, (i, j, _) in enumerate(g.edges)}
        self.w = g.weights
        self.adj = [[(j, w) for j, w in g.adjacency[i]] for i in range(g.n1)]
        self.cmat = np.zeros((g.n1, g.n2))
        for (i, j), v in self.c.items():
            self.cmat[i, j] = max(float(v), 0.0)

    def bound(self, depth: int, used: set[int]) -> float:
        rows = list(range(depth, self.n1))
        cols = [j for j in range(self.n2) if j not in used]
        if not rows or not cols:
            return 0.0
        sub = self.cmat[np.ix_(rows, cols)]
        r, k = linear_sum_assignment(sub, maximize=True)
        return float(sub[r, k].sum())

    def feasible_prefix(self, depth: int, assign: list[int | None], used: set[int]) -> bool:
        t = depth - 1
        lt = assign[t]
        ut = self.w[(t, lt)] if lt is not None else 0
        for a in range(t):
            la = assign[a]
            ua = self.w[(a, la)] if la is not None else 0
            if lt is not None and la is not None:
                wat = self.w.get((a, lt))
                wta = self.w.get((t, la))
                if wat is not None and wta is not None and wat >= ua and wta >= ut and (wat > ua or wta > ut):
                    return False
            elif lt is not None:
                wat = self.w.get((a, lt))
                if wat is not None and wat > ua and ut == 0:
                    return False
            elif la is not None:
                wta = self.w.get((t, la))
                if wta is not None and wta > 0 and ua == 0:
                    return False
        must: set[int] = set()
        for a in range(depth):
            la = assign[a]
            ua = self.w[(a, la)] if la is not None else 0
            for j, wj in self.adj[a]:
                if wj <= ua:
                    break
                if j not in used:
                    must.add(j)
        if not must:
            return True
        return self._coverable(sorted(must), depth, used)

    def _coverable(self, items: list[int], depth: int, used: set[int]) -> bool:
        if len(items) > self.n1 - depth:
            return False
        owners: dict[int, int] = {}
        takers = {j: [i for i in range(depth, self.n1) if (i, j) in self.w] for j in items}

        def augment(j: int, seen: set[int]) -> bool:
            for i in takers[j]:
                if i in seen:
                    continue
                seen.add(i)
                if i not in owners or augment(owners[i], seen):
                    owners[i] = j
                    return True
            return False

        return all(augment(j, set()) for j in items)

    def run(self, deadline: float | None) -> tuple[Matching | None, Fraction | None, float, bool, int]:
        best: Matching | None = None
        best_val: Fraction | None = None
        nodes = 0
        # stack entries: (bound, depth, assignment, used, value)
        root_bound = self.bound(0, set())
        stack = [(root_bound, 0, [], frozenset(), Fraction(0))]
        timed_out = False
        while stack:
            if deadline is not None and time.perf_counter() > deadline:
                timed_out = True
                break
            bnd, depth, assign, used, val = stack.pop()
            nodes += 1
            if best_val is not None and bnd <= float(best_val) + 1e-9:
                continue
            if depth == self.n1:
                m = Matching.of((i, j) for i, j in enumerate(assign) if j is not None)
                if find_dominating_matching(self.g, m) is None:
                    best, best_val = m, val
                continue
            children = []
            options = [(j, self.c[(depth, j)]) for j, _ in self.adj[depth] if j not in used] + [(None, Fraction(0))]
            for j, cj in options:
                new_assign = assign + [j]
                new_used = used | {j} if j is not None else used
                if not self.feasible_prefix(depth + 1, new_assign, new_used):
                    continue
                b = float(val + cj) + self.bound(depth + 1, new_used)
                if best_val is not None and b <= float(best_val) + 1e-9:
                    continue
                children.append((b, depth + 1, new_assign, new_used, val + cj))
            children.sort(key=lambda ch: ch[0])
            stack.extend(children)
        open_bound = max((entry[0] for entry in stack), default=-math.inf) if timed_out else -math.inf
        return best, best_val, open_bound, timed_out, nodes


def _solve_matching(inst: MaxParetoInstance, time_limit: float | None) -> SolveReport:
    t0 = time.perf_counter()
    g: BipartiteInstance = inst.graph
    search = _MatchingSearch(g, list(inst.c))
    deadline = None if time_limit is None else t0 + time_limit
    best, best_val, open_bound, timed_out, nodes = search.run(deadline)
    report = SolveReport(iterations=nodes)
    if best is not None:
        x = np.array(indicator(g, best), dtype=object)
        if verify_pareto(inst, x, EXACT).dominated:
            raise ValidationFailed(f"search returned dominated matching {best}")
        cert = find_support_certificate(inst, x)
        if cert is None:
            raise ValidationFailed(f"no supporting certificate for {best}")
        report.x, report.lb, report.certificate, report.po_verified = x, best_val, cert, True
    if timed_out:
        report.status = SolveStatus.TIME_LIMIT
        ub = Fraction(math.floor(open_bound * 10**6 + 1), 10**6) if open_bound > -math.inf else None
        if best_val is not None and (ub is None or ub < best_val):
            ub = best_val
        report.ub, report.ub_valid = ub, ub is not None
    else:
        report.status = SolveStatus.OPTIMAL if best is not None else SolveStatus.NO_INCUMBENT
        report.ub, report.ub_valid = best_val, best is not None
    report.time_ms = int(round((time.perf_counter() - t0) * 1000))
    return report


def make_prop9_instance(n: int) -> BipartiteInstance:
    """Complete ``n x n`` graph: weight 1 on the diagonal, ``n`` just below it, 0 elsewhere."""
    if n < 2:
        raise ValueError("n must be at least 2")
    edges = tuple((i, j, 1 if i == j else n if i == j + 1 else 0) for i in range(n) for j in range(n))
    return BipartiteInstance(n, n, edges)


def steep_diagonal(n: int) -> tuple[MaxParetoInstance, list[Fraction]]:
    """Encoded ratio instance with ``c`` the diagonal indicator, and that indicator."""
    g = make_prop9_instance(n)
    x = [Fraction(1) if i == j else Fraction(0) for i, j, _ in g.edges]
    return graph_to_instance(g, x), x


def steep_diagonal_ratio(n: int, mode: NumericMode = EXACT) -> Any:
    """Least ``w_1 / w_n`` over weights supporting the all-diagonal matching."""
    inst, x = steep_diagonal(n)
    return min_support_ratio(inst, x, 0, -1, mode)


def heuristic_config_for(items: int, setting: str, base: HeuristicConfig = HeuristicConfig()) -> HeuristicConfig:
    """``w_cap`` of ``items/2``, ``items`` or ``2*items`` for ``half``, ``one``, ``two``."""
    factor = {"half": 0.5, "one": 1.0, "two": 2.0}[setting]
    return replace(base, w_cap=max(1.0, factor * items))
