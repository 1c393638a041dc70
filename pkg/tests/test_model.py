from __future__ import annotations

import json
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from maxpareto.errors import DimensionError, InstanceRejected, ParseError
from maxpareto.matching import three_agent_graph, graph_to_instance
from maxpareto.model import MaxParetoInstance, load_instance, payoff, save_instance, validate_instance
from maxpareto.numeric import EXACT, FLOAT


def _write(tmp_path, data, name="inst.mpj"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


BOX = {"m": 4, "k": 2, "n": 2, "A": [[1, 0], [0, 1], [-1, 0], [0, -1]], "b": [1, 1, 0, 0], "U": [[1, 0], [0, 1]], "c": [1, 1]}


def test_load_box(tmp_path):
    inst = load_instance(_write(tmp_path, BOX))
    assert (inst.k, inst.m, inst.n) == (2, 4, 2)


def test_missing_field(tmp_path):
    data = {k: v for k, v in BOX.items() if k != "U"}
    with pytest.raises(ParseError, match="U"):
        load_instance(_write(tmp_path, data))


def test_shape_mismatch(tmp_path):
    data = dict(BOX, m=3, A=[[1, 0], [0, 1], [-1, 0]], b=[1, 1])
    with pytest.raises(DimensionError):
        load_instance(_write(tmp_path, data))


def test_rational_pairs_and_bad_numbers(tmp_path):
    inst = load_instance(_write(tmp_path, dict(BOX, c=[[1, 3], 0.5])))
    assert list(inst.c) == [F(1, 3), F(1, 2)]
    with pytest.raises(ParseError):
        load_instance(_write(tmp_path, dict(BOX, c=[[1, 0], 1])))
    with pytest.raises(ParseError):
        load_instance(_write(tmp_path, dict(BOX, c=[True, 1])))


def test_validate_examples(box):
    assert validate_instance(box) == {"nonempty": True, "bounded": True}
    ray = MaxParetoInstance([[-1]], [0], [[1]], [1])
    assert validate_instance(ray)["bounded"] is False
    empty = MaxParetoInstance([[1], [-1]], [-1, -1], [[1]], [1])
    assert validate_instance(empty)["nonempty"] is False
    assert validate_instance(empty, EXACT)["nonempty"] is False


def test_load_rejects_unbounded(tmp_path):
    data = {"m": 1, "k": 1, "n": 1, "A": [[-1]], "b": [0], "U": [[1]], "c": [1]}
    with pytest.raises(InstanceRejected):
        load_instance(_write(tmp_path, data))
    assert load_instance(_write(tmp_path, data), validate=False).k == 1


def test_payoff_examples(box):
    assert list(payoff(box, [F(3, 10), F(7, 10)])) == [F(3, 10), F(7, 10)]
    assert list(payoff(box, np.array([0.3, 0.7]))) == pytest.approx([0.3, 0.7])
    summed = MaxParetoInstance([[1, 0], [0, 1]], [5, 5], [[1, 1]], [0, 0])
    assert list(payoff(summed, [2, 3])) == [5]
    zero = MaxParetoInstance([[1, 0], [0, 1]], [5, 5], [[0, 0], [0, 0]], [0, 0])
    assert list(payoff(zero, [2, 3])) == [0, 0]


def test_dimension_checks():
    with pytest.raises(DimensionError):
        MaxParetoInstance([[1, 0]], [1], [[1]], [1, 1])
    with pytest.raises(DimensionError):
        MaxParetoInstance([[1, 0]], [1], [[1, 0]], [1])


def test_round_trip_keeps_graph(tmp_path):
    inst = graph_to_instance(three_agent_graph())
    path = tmp_path / "g.mpj"
    save_instance(inst, path)
    back = load_instance(path)
    assert back.graph == inst.graph
    assert np.array_equal(back.A, inst.A) and np.array_equal(back.U, inst.U)


@given(
    st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=7), min_size=2, max_size=2),
    st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=7), min_size=2, max_size=2),
)
def test_payoff_is_linear(x, y):
    inst = MaxParetoInstance([[1, 0], [0, 1]], [9, 9], [[1, F(-1, 3)], [2, 5]], [1, 1])
    s = [a + b for a, b in zip(x, y)]
    assert list(payoff(inst, x) + payoff(inst, y)) == list(payoff(inst, s))


@given(st.lists(st.fractions(min_value=-9, max_value=9, max_denominator=50), min_size=6, max_size=6))
def test_save_load_identity(tmp_path_factory, vals):
    inst = MaxParetoInstance([[1, vals[0]], [vals[1], 1], [-1, 0], [0, -1]], [1 + abs(vals[2]), 1, 0, 0], [[vals[3], vals[4]]], [vals[5], 1])
    path = tmp_path_factory.mktemp("rt") / "i.mpj"
    save_instance(inst, path)
    back = load_instance(path, validate=False)
    for a, b in ((inst.A, back.A), (inst.b, back.b), (inst.U, back.U), (inst.c, back.c)):
        assert np.array_equal(a, b)


def test_float_arrays_cached(box):
    A1 = box.arrays(FLOAT)[0]
    assert A1 is box.arrays(FLOAT)[0] and A1.dtype == float
