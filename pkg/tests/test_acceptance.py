"""End-to-end acceptance checks; each records one PASS/FAIL line for the terminal summary."""
from __future__ import annotations

import math
import random
import time
from functools import lru_cache
from itertools import combinations

import numpy as np
import pytest

import oracles
from conftest import CRITERIA
from maxpareto.bench import desk_grid, format_table, run_suite, wcap_nonmonotone
from maxpareto.errors import PreconditionViolated
from maxpareto.lp import LpProblem, solve_lexicographic
from maxpareto.matching import (
    AllocationInstance,
    Matching,
    all_blocking_sets,
    encode_allocation,
    enumerate_matchings,
    three_agent_graph,
    find_blocking_set,
    fpo_verdicts,
    payoff_vector,
    union_blocking_sets,
)
from maxpareto.model import MaxParetoInstance
from maxpareto.numeric import EXACT
from maxpareto.pareto import detect_aligned_interests, find_support_certificate, verify_pareto
from maxpareto.solver import HeuristicConfig, SolveStatus, enumerate_vertices, steep_diagonal, steep_diagonal_ratio, solve_exact

pytestmark = pytest.mark.slow


def record(n: int, ok: bool, detail: str) -> None:
    CRITERIA[n] = (ok, detail)
    assert ok, f"criterion {n}: {detail}"


@lru_cache(maxsize=1)
def graph_suite(count: int = 1000, seed: int = 20240601) -> dict:
    """One pass over the random-graph suite shared by the PO/fPO and blocking-set criteria."""
    rng = random.Random(seed)
    stats = dict(graphs=0, matchings=0, po_mismatch=[], improving_edges=0, constructor_fail=[], unions=0, union_fail=[])
    t0 = time.perf_counter()
    for gi in range(count):
        g = oracles.random_graph(rng, max_side=6, max_weight=9, densities=(0.5, 1.0))
        ms = list(enumerate_matchings(g))
        us = [payoff_vector(g, m) for m in ms]
        front = oracles.skyline(us)
        fpo = fpo_verdicts(g, ms, EXACT)
        stats["graphs"] += 1
        stats["matchings"] += len(ms)
        for m, u, f in zip(ms, us, fpo):
            if (u in front) != f:
                stats["po_mismatch"].append((gi, sorted(m.pairs)))
        for m, u in zip(ms, us):
            if u not in front:
                continue
            pool = []
            for (i, j), w in g.weights.items():
                if w <= u[i]:
                    continue
                stats["improving_edges"] += 1
                try:
                    b = find_blocking_set(g, m, i, j, check_po=False)
                except PreconditionViolated as exc:
                    stats["constructor_fail"].append((gi, sorted(m.pairs), (i, j), str(exc)))
                    continue
                if not oracles.blocking_by_definition(g.weights, m.pairs, b.members):
                    stats["constructor_fail"].append((gi, sorted(m.pairs), (i, j), sorted(b.members)))
                    continue
                if b not in pool:
                    pool.append(b)
            for b1, b2 in combinations(pool, 2):
                stats["unions"] += 1
                try:
                    joined = union_blocking_sets(g, m, b1, b2)
                except PreconditionViolated:
                    joined = None
                if joined is None or not oracles.blocking_by_definition(g.weights, m.pairs, joined.members):
                    stats["union_fail"].append((gi, sorted(m.pairs)))
    stats["seconds"] = time.perf_counter() - t0
    return stats


def test_criterion_1_po_equals_fpo():
    s = graph_suite()
    ok = s["graphs"] == 1000 and not s["po_mismatch"] and s["seconds"] < 300
    detail = f"{s['graphs']} graphs, {s['matchings']} matchings, {len(s['po_mismatch'])} discrepancies, {s['seconds']:.0f}s (with blocking sets)"
    record(1, ok, detail)


def _general_instance(rng: np.random.Generator) -> MaxParetoInstance:
    k = int(rng.integers(1, 6))
    n = int(rng.integers(1, 5))
    extra = int(rng.integers(0, 10 - k))
    A = np.vstack([-np.eye(k, dtype=int), np.ones((1, k), dtype=int), rng.integers(-3, 4, size=(extra, k))])
    b = np.concatenate([np.zeros(k, dtype=int), [int(rng.integers(1, 8))], rng.integers(0, 6, size=extra)])
    U = rng.integers(-3, 4, size=(n, k))
    c = rng.integers(-3, 4, size=k)
    return MaxParetoInstance(A.astype(object), b.astype(object), U.astype(object), c.astype(object))


def test_criterion_2_certificate_iff_pareto():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    vertices = bad = supported = 0
    for _ in range(200):
        inst = _general_instance(rng)
        for x in enumerate_vertices(inst):
            vertices += 1
            po = not verify_pareto(inst, x, EXACT).dominated
            cert = find_support_certificate(inst, x, math.inf, EXACT) is not None
            supported += cert
            bad += po != cert
    secs = time.perf_counter() - t0
    record(2, bad == 0 and secs < 180, f"200 instances, {vertices} vertices ({supported} supported), {bad} discrepancies, {secs:.0f}s")


def test_criterion_3_three_agent_fixture():
    t0 = time.perf_counter()
    g = three_agent_graph()
    ms = list(enumerate_matchings(g))
    us = [payoff_vector(g, m) for m in ms]
    front = oracles.skyline(us)
    nondominated = {m.pairs for m, u in zip(ms, us) if u in front}
    expected = {
        frozenset({(1, 1), (2, 2)}),
        frozenset({(0, 1), (1, 0), (2, 2)}),
        frozenset({(0, 2), (1, 1), (2, 0)}),
    }
    lp_front = {m.pairs for m, f in zip(ms, fpo_verdicts(g, ms)) if f}
    m1 = Matching.of([(1, 1), (2, 2)])
    blocking = {b.members for b in all_blocking_sets(g, m1)}
    secs = time.perf_counter() - t0
    ok = (
        nondominated == expected == lp_front
        and {tuple(int(v) for v in u) for u in front} == {(0, 2, 4), (1, 1, 4), (2, 2, 2)}
        and blocking == {frozenset({1}), frozenset({2}), frozenset({1, 2})}
        and secs < 1
    )
    record(3, ok, f"{len(ms)} matchings, {len(nondominated)} non-dominated, blocking sets {sorted(map(sorted, blocking))}, {secs:.2f}s")


def test_criterion_4_weight_ratio_grows():
    t0 = time.perf_counter()
    parts, ok = [], True
    for n in range(2, 9):
        bound = (n - 1) ** (n - 1)
        least = steep_diagonal_ratio(n, EXACT)
        inst, x = steep_diagonal(n)
        cert = find_support_certificate(inst, x, math.inf, EXACT)
        ok &= least is not None and least >= bound and cert is not None and cert.ratio() >= bound
        parts.append(f"n={n}:{least}>={bound}")
    secs = time.perf_counter() - t0
    record(4, ok and secs < 30, " ".join(parts) + f", {secs:.1f}s")


def test_criterion_5_aligned_interests():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    bad, compared = [], 0
    for t in range(100):
        base = _general_instance(rng)
        w = rng.integers(1, 6, size=base.n).astype(object)
        inst = base.with_objective(base.U.T @ w)
        p = LpProblem(A=inst.A, b=inst.b, objective=inst.c, lower=[None] * inst.k)
        sol = solve_lexicographic(p, inst.U.T @ np.ones(inst.n, dtype=object), EXACT)
        if verify_pareto(inst, sol.x, EXACT).dominated or detect_aligned_interests(inst) is None:
            bad.append(t)
            continue
        exact = solve_exact(inst)
        compared += 1
        if exact.lb != sol.primary.objective_value:
            bad.append(t)
    secs = time.perf_counter() - t0
    record(5, not bad and secs < 120, f"100 instances, {compared} compared with the exact oracle, failures {bad}, {secs:.0f}s")


def test_criterion_6_blocking_sets():
    s = graph_suite()
    ok = s["graphs"] == 1000 and s["improving_edges"] > 0 and not s["constructor_fail"] and not s["union_fail"]
    detail = f"{s['improving_edges']} improving edges, {len(s['constructor_fail'])} validator failures, {s['unions']} unions, {len(s['union_fail'])} union failures"
    record(6, ok, detail)


def _cpom_instance(rng: random.Random) -> AllocationInstance:
    while True:
        agents, objects = rng.randint(1, 5), rng.randint(1, 5)
        prefs = tuple(tuple(rng.sample(range(objects), rng.randint(0, objects))) for _ in range(agents))
        if any(prefs):
            required = frozenset(o for o in range(objects) if rng.random() < 0.4)
            return AllocationInstance(agents, objects, prefs, required)


def test_criterion_7_reduction_soundness():
    rng = random.Random(7)
    t0 = time.perf_counter()
    bad, yes = [], 0
    for t in range(200):
        a = _cpom_instance(rng)
        rep = solve_exact(encode_allocation(a))
        mine = rep.status is SolveStatus.OPTIMAL and rep.lb >= len(a.required)
        truth = oracles.cpom_answer(a.agents, a.preferences, a.required)
        yes += truth
        if mine != truth:
            bad.append(t)
    secs = time.perf_counter() - t0
    record(7, not bad and secs < 120, f"200 instances ({yes} yes), discrepancies {bad}, {secs:.0f}s")


def test_criterion_8_heuristic_sandwich(tmp_path):
    t0 = time.perf_counter()
    light = HeuristicConfig(starts=4, local_steps=12)
    rows = run_suite(desk_grid(), time_limit=60, output=tmp_path / "desk.csv", base=light)
    secs = time.perf_counter() - t0
    (tmp_path / "desk.txt").write_text(format_table(rows))
    optimum = {r.spec: r.lb for r in rows if r.method == "exact" and r.status == "Optimal"}
    heur = [r for r in rows if r.method != "exact"]
    above = [r for r in heur if r.lb is not None and r.spec in optimum and r.lb > optimum[r.spec]]
    unverified = [r for r in rows if r.lb is not None and not r.po_verified]
    drops, total = wcap_nonmonotone(rows)
    timeouts = sum(r.method == "exact" and r.status != "Optimal" for r in rows)
    gaps = sum(r.lb is not None and r.spec in optimum and r.lb < optimum[r.spec] for r in heur)
    ok = not above and not unverified and secs < 900
    detail = (
        f"{len(rows)} rows, {len(optimum)}/160 exact optima, {timeouts} exact timeouts, "
        f"{gaps} heuristic rows below optimum, w_cap non-monotone on {drops}/{total}, {secs:.0f}s"
    )
    record(8, ok, detail)


def test_criterion_9_desk_scale_substitution():
    import maxpareto.bench as bench

    grid = desk_grid()
    shape_ok = len(grid) == 160 and {(g.agents, g.items_multiplier) for g in grid} == {(a, m) for a in (4, 6, 8, 10) for m in (1, 2)}
    documented = "desk" in (bench.__doc__ or "").lower()
    record(9, shape_ok and documented, "large-scale table not reproduced; desk grid 4-10 agents x {1,2} x 20 seeds stands in via criteria 1-8")
