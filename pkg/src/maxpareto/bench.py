"""Random allocation benchmarks: generator, suite runner and reports.

The default grid is desk scale: 4 to 10 agents, item multipliers 1 and 2,
20 seeds per cell and a 60 second limit per row. Runs with 100 agents,
thousands of items and ten-minute limits are beyond the exact oracle and a
from-scratch LP core, so the suite checks sandwich and verification
properties on small instances instead of absolute objective values.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import cached_property
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import SuiteInvariantError
from .matching import AllocationInstance, BipartiteInstance, graph_to_instance
from .model import MaxParetoInstance
from .solver import HeuristicConfig, SolveReport, SolveStatus, heuristic_config_for, solve_exact, solve_heuristic

MULTIPLIERS = (1, 2, 5, 10)
METHODS = ("heuristic:half", "heuristic:one", "heuristic:two", "exact")
CSV_HEADER = ("agents", "items", "method", "w_cap", "lb", "ub", "ub_valid", "status", "time_ms", "seed")


@dataclass(frozen=True)
class GenSpec:
    agents: int
    items_multiplier: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.agents < 1:
            raise ValueError("agents must be at least 1")
        if self.items_multiplier not in MULTIPLIERS:
            raise ValueError(f"items_multiplier must be one of {MULTIPLIERS}")

    @property
    def items(self) -> int:
        return self.agents * self.items_multiplier


@dataclass(frozen=True)
class GeneratedInstance:
    spec: GenSpec
    welfare: np.ndarray
    payoff: np.ndarray
    allocation: AllocationInstance
    graph: BipartiteInstance

    @cached_property
    def instance(self) -> MaxParetoInstance:
        """Matching-polytope encoding with welfare as objective, built on first use."""
        c = [int(self.welfare[a, i]) for a, i, _ in self.graph.edges]
        return graph_to_instance(self.graph, c)


def generate_allocation(spec: GenSpec) -> GeneratedInstance:
    """Complete agents-by-items instance with i.i.d. uniform welfare and payoffs in ``1..items``.

    The Max-Pareto instance uses the cardinal payoffs as edge weights and
    the welfare as objective. The preference lists (payoff descending, ties
    toward lower item index) are for the ordinal encoder only.
    """
    rng = np.random.default_rng(spec.seed)
    shape = (spec.agents, spec.items)
    welfare = rng.integers(1, spec.items + 1, size=shape)
    payoff = rng.integers(1, spec.items + 1, size=shape)
    prefs = tuple(tuple(int(o) for o in np.lexsort((np.arange(spec.items), -payoff[a]))) for a in range(spec.agents))
    allocation = AllocationInstance(spec.agents, spec.items, prefs)
    edges = tuple((a, i, int(payoff[a, i])) for a in range(spec.agents) for i in range(spec.items))
    graph = BipartiteInstance(spec.agents, spec.items, edges)
    return GeneratedInstance(spec, welfare, payoff, allocation, graph)


@dataclass(frozen=True)
class BenchRow:
    spec: GenSpec
    method: str
    w_cap: float | None
    lb: Fraction | None
    ub: Fraction | None
    ub_valid: bool
    status: str
    time_ms: int
    po_verified: bool = False

    def __post_init__(self) -> None:
        if self.status == SolveStatus.OPTIMAL.value and not (self.ub_valid and self.lb == self.ub):
            raise SuiteInvariantError(f"row marked optimal without matching bounds: {self}")

    def csv_fields(self, include_time: bool = True) -> list[str]:
        fmt = lambda v: "" if v is None else str(v)
        w_cap = "" if self.w_cap is None else f"{self.w_cap:g}"
        time_ms = str(self.time_ms) if include_time else ""
        return [
            str(self.spec.agents), str(self.spec.items), self.method, w_cap, fmt(self.lb), fmt(self.ub),
            str(self.ub_valid).lower(), self.status, time_ms, str(self.spec.seed),
        ]


def _run_one(spec: GenSpec, method: str, time_limit: float, base: HeuristicConfig) -> BenchRow:
    gen = generate_allocation(spec)
    if method == "exact":
        report: SolveReport = solve_exact(gen.instance, time_limit=time_limit)
        w_cap = None
    elif method.startswith("heuristic:"):
        cfg = replace(heuristic_config_for(spec.items, method.split(":", 1)[1], base), time_limit=time_limit, seed=spec.seed)
        report = solve_heuristic(gen.instance, cfg)
        w_cap = cfg.w_cap
    else:
        raise ValueError(f"unknown method {method!r}")
    return BenchRow(spec, method, w_cap, report.lb, report.ub, report.ub_valid, report.status.value, report.time_ms, report.po_verified)


def check_rows(rows: Sequence[BenchRow]) -> None:
    """Abort when a heuristic beats a proven optimum or emits an unverified incumbent."""
    optimum = {r.spec: r.lb for r in rows if r.method == "exact" and r.status == SolveStatus.OPTIMAL.value}
    for r in rows:
        if r.lb is not None and not r.po_verified:
            raise SuiteInvariantError(f"unverified incumbent in row {r}")
        best = optimum.get(r.spec)
        if best is not None and r.lb is not None and r.lb > best:
            raise SuiteInvariantError(f"lb {r.lb} above optimum {best} in row {r}")


def run_suite(
    specs: Sequence[GenSpec],
    methods: Sequence[str] = METHODS,
    time_limit: float = 60.0,
    output: str | Path | None = None,
    base: HeuristicConfig = HeuristicConfig(),
    workers: int = 1,
) -> list[BenchRow]:
    """One row per (spec, method), in input order; writes CSV to ``output`` if given."""
    for m in methods:
        if m != "exact" and m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    jobs = [(s, m) for s in specs for m in methods]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_one, *zip(*jobs), [time_limit] * len(jobs), [base] * len(jobs)))
    else:
        rows = [_run_one(s, m, time_limit, base) for s, m in jobs]
    check_rows(rows)
    if output is not None:
        write_csv(rows, output)
    return rows


def rows_to_csv(rows: Sequence[BenchRow], include_time: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(r.csv_fields(include_time))
    return buf.getvalue()


def write_csv(rows: Sequence[BenchRow], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows))


def format_table(rows: Sequence[BenchRow]) -> str:
    """Aligned text table; the best lb of each instance is tagged ``*best*``."""
    best: dict[GenSpec, Fraction] = {}
    for r in rows:
        if r.lb is not None and (r.spec not in best or r.lb > best[r.spec]):
            best[r.spec] = r.lb
    header = ["agents", "items", "seed", "method", "w_cap", "lb", "ub", "status", "time_ms"]
    body = []
    for r in rows:
        lb = "-" if r.lb is None else str(r.lb)
        if r.lb is not None and r.lb == best.get(r.spec):
            lb += " *best*"
        ub = "-" if r.ub is None else str(r.ub) + ("" if r.ub_valid else "?")
        w_cap = "-" if r.w_cap is None else f"{r.w_cap:g}"
        body.append([str(r.spec.agents), str(r.spec.items), str(r.spec.seed), r.method, w_cap, lb, ub, r.status, str(r.time_ms)])
    widths = [max(len(line[i]) for line in [header] + body) for i in range(len(header))]
    fmt = lambda line: "  ".join(cell.rjust(w) if i != 3 else cell.ljust(w) for i, (cell, w) in enumerate(zip(line, widths)))
    return "\n".join([fmt(header), fmt(["-" * w for w in widths])] + [fmt(line) for line in body]) + "\n"


def wcap_nonmonotone(rows: Sequence[BenchRow]) -> tuple[int, int]:
    """(instances whose heuristic lb drops as ``w_cap`` grows, instances with all three settings)."""
    order = ("heuristic:half", "heuristic:one", "heuristic:two")
    by_spec: dict[GenSpec, dict[str, Fraction | None]] = {}
    for r in rows:
        if r.method in order:
            by_spec.setdefault(r.spec, {})[r.method] = r.lb
    drops = total = 0
    for lbs in by_spec.values():
        if len(lbs) < 3 or any(lbs[m] is None for m in order):
            continue
        total += 1
        seq = [lbs[m] for m in order]
        if any(b < a for a, b in zip(seq, seq[1:])):
            drops += 1
    return drops, total


def desk_grid(agents: Sequence[int] = (4, 6, 8, 10), multipliers: Sequence[int] = (1, 2), seeds: Sequence[int] = range(20)) -> list[GenSpec]:
    return [GenSpec(a, m, s) for a in agents for m in multipliers for s in seeds]
