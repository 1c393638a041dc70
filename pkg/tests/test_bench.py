from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest
from scipy.stats import chisquare

from maxpareto.bench import (
    CSV_HEADER,
    BenchRow,
    GenSpec,
    check_rows,
    desk_grid,
    format_table,
    generate_allocation,
    rows_to_csv,
    run_suite,
    wcap_nonmonotone,
)
from maxpareto.errors import SuiteInvariantError
from maxpareto.solver import HeuristicConfig

LIGHT = HeuristicConfig(starts=2, local_steps=4)


def test_generator_ranges():
    gen = generate_allocation(GenSpec(10, 1, 3))
    for mat in (gen.welfare, gen.payoff):
        assert mat.shape == (10, 10)
        assert mat.min() >= 1 and mat.max() <= 10
    assert len(gen.graph.edges) == 100
    assert gen.instance.k == 100 and gen.instance.n == 10


def test_generator_preferences_follow_payoffs():
    gen = generate_allocation(GenSpec(3, 5, 8))
    for a, prefs in enumerate(gen.allocation.preferences):
        keys = [(-gen.payoff[a, i], i) for i in prefs]
        assert keys == sorted(keys) and sorted(prefs) == list(range(15))


def test_generator_is_reproducible():
    a, b = generate_allocation(GenSpec(2, 1, 42)), generate_allocation(GenSpec(2, 1, 42))
    assert a.welfare.tobytes() == b.welfare.tobytes() and a.payoff.tobytes() == b.payoff.tobytes()
    assert a.graph == b.graph
    assert not np.array_equal(a.payoff, generate_allocation(GenSpec(2, 1, 43)).payoff) or not np.array_equal(
        a.welfare, generate_allocation(GenSpec(2, 1, 43)).welfare
    )


def test_generator_is_uniform():
    samples = []
    seed = 0
    while sum(s.size for s in samples) < 100_000:
        gen = generate_allocation(GenSpec(10, 10, seed))
        samples += [gen.welfare.ravel(), gen.payoff.ravel()]
        seed += 1
    counts = np.bincount(np.concatenate(samples), minlength=101)[1:]
    assert len(counts) == 100
    assert chisquare(counts).pvalue > 1e-4


def test_genspec_validation():
    with pytest.raises(ValueError):
        GenSpec(0)
    with pytest.raises(ValueError):
        GenSpec(3, 3)
    assert GenSpec(4, 5).items == 20


def test_row_invariant():
    with pytest.raises(SuiteInvariantError):
        BenchRow(GenSpec(2), "exact", None, F(3), F(4), True, "Optimal", 0, True)
    with pytest.raises(SuiteInvariantError):
        BenchRow(GenSpec(2), "exact", None, F(3), F(3), False, "Optimal", 0, True)


def test_tripwire():
    spec = GenSpec(2)
    exact = BenchRow(spec, "exact", None, F(5), F(5), True, "Optimal", 0, True)
    greedy = BenchRow(spec, "heuristic:one", 2.0, F(6), None, False, "Feasible", 0, True)
    with pytest.raises(SuiteInvariantError):
        check_rows([exact, greedy])
    unverified = BenchRow(spec, "heuristic:one", 2.0, F(4), None, False, "Feasible", 0, False)
    with pytest.raises(SuiteInvariantError):
        check_rows([exact, unverified])
    check_rows([exact, BenchRow(spec, "heuristic:one", 2.0, F(4), None, False, "Feasible", 0, True)])


def test_small_suite_csv_and_table(tmp_path):
    specs = [GenSpec(4, 1, s) for s in range(2)]
    out = tmp_path / "run.csv"
    rows = run_suite(specs, time_limit=30, output=out, base=LIGHT)
    assert len(rows) == 8
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER) and len(lines) == 9
    for r in rows:
        if r.method == "exact":
            assert r.status == "Optimal"
    table = format_table(rows)
    assert table.count("*best*") >= 2
    drops, total = wcap_nonmonotone(rows)
    assert 0 <= drops <= total <= 2


def test_suite_is_deterministic_across_workers():
    specs = [GenSpec(4, 2, 5), GenSpec(3, 1, 6)]
    methods = ["heuristic:half", "exact"]
    a = run_suite(specs, methods, time_limit=30, base=LIGHT)
    b = run_suite(specs, methods, time_limit=30, base=LIGHT, workers=2)
    assert rows_to_csv(a, include_time=False) == rows_to_csv(b, include_time=False)


def test_suite_time_limit_gives_time_limit_status():
    rows = run_suite([GenSpec(10, 2, 0)], ["exact"], time_limit=0.05)
    assert rows[0].status == "TimeLimit" and rows[0].ub_valid


def test_exact_incumbent_is_a_po_matching():
    gen = generate_allocation(GenSpec(4, 2, 1))
    rows = run_suite([gen.spec], ["exact"], time_limit=30)
    assert rows[0].lb is not None and rows[0].po_verified


def test_unknown_method():
    with pytest.raises(ValueError):
        run_suite([GenSpec(2)], ["simulated-annealing"])


def test_nonmonotone_counter():
    spec = GenSpec(2)
    rows = [
        BenchRow(spec, "heuristic:half", 1.0, F(5), None, False, "Feasible", 0, True),
        BenchRow(spec, "heuristic:one", 2.0, F(7), None, False, "Feasible", 0, True),
        BenchRow(spec, "heuristic:two", 4.0, F(6), None, False, "Feasible", 0, True),
    ]
    assert wcap_nonmonotone(rows) == (1, 1)


def test_desk_grid_shape():
    grid = desk_grid()
    assert len(grid) == 160 and {g.agents for g in grid} == {4, 6, 8, 10}
