"""Max-Pareto problem data: polyhedron ``{x : A x <= b}``, payoff map ``U``, objective ``c``."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DimensionError, InstanceRejected, ParseError
from .lp import LpProblem, LpSolution, solve_lp
from .numeric import EXACT, FLOAT, NumericMode, decode_number, encode_vector, to_fraction_array

INSTANCE_FIELDS = ("m", "k", "n", "A", "b", "U", "c")


@dataclass(frozen=True, eq=False)
class MaxParetoInstance:
    """Immutable problem datum, stored exactly as Fraction object arrays.

    ``graph`` optionally records the bipartite graph an instance was encoded
    from (one variable per edge, in edge order); exact solvers use it to
    enumerate matchings instead of general vertices.
    """

    A: np.ndarray
    b: np.ndarray
    U: np.ndarray
    c: np.ndarray
    names: dict[str, list[str]] | None = None
    graph: Any = field(default=None, repr=False)

    def __post_init__(self) -> None:
        A, b, U, c = (to_fraction_array(v) for v in (self.A, self.b, self.U, self.c))
        if A.ndim != 2 or U.ndim != 2 or b.ndim != 1 or c.ndim != 1:
            raise DimensionError("A and U must be matrices, b and c vectors")
        m, k = A.shape
        if m < 1 or k < 1 or U.shape[0] < 1:
            raise DimensionError(f"need m, k, n >= 1, got m={m}, k={k}, n={U.shape[0]}")
        if b.shape != (m,):
            raise DimensionError(f"A is {m}x{k} but b has length {b.shape[0]}")
        if U.shape[1] != k:
            raise DimensionError(f"U has {U.shape[1]} columns, expected k={k}")
        if c.shape != (k,):
            raise DimensionError(f"c has length {c.shape[0]}, expected k={k}")
        for arr in (A, b, U, c):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "c", c)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def k(self) -> int:
        return self.A.shape[1]

    @property
    def n(self) -> int:
        return self.U.shape[0]

    def arrays(self, mode: NumericMode) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        if mode.exact:
            return self.A, self.b, self.U, self.c
        cache = self.__dict__.setdefault("_float_cache", None)
        if cache is None:
            cache = tuple(np.asarray(v, dtype=float) for v in (self.A, self.b, self.U, self.c))
            object.__setattr__(self, "_float_cache", cache)
        return cache

    def with_objective(self, c: Any) -> "MaxParetoInstance":
        return MaxParetoInstance(self.A, self.b, self.U, c, names=self.names, graph=self.graph)

    def is_feasible(self, x: Any, mode: NumericMode) -> bool:
        A, b, _, _ = self.arrays(mode)
        x = mode.array(list(x))
        if x.shape != (self.k,):
            raise DimensionError(f"point has length {x.shape[0]}, expected k={self.k}")
        if mode.exact:
            nz = np.flatnonzero(x != 0)
            slack = b - A[:, nz] @ x[nz] if len(nz) else b
            return bool(all(s >= 0 for s in slack))
        slack = b - A @ x
        tol = mode.feas_tol * (1.0 + np.abs(A).sum(axis=1))
        return bool(np.all(slack >= -tol))

    def to_json(self) -> dict:
        out = {
            "m": self.m,
            "k": self.k,
            "n": self.n,
            "A": [encode_vector(row) for row in self.A],
            "b": encode_vector(self.b),
            "U": [encode_vector(row) for row in self.U],
            "c": encode_vector(self.c),
        }
        if self.graph is not None:
            out["graph"] = self.graph.to_json()
        return out


def payoff(inst: MaxParetoInstance, x: Any, mode: NumericMode | None = None) -> np.ndarray:
    """Payoff vector ``U x`` (one entry per agent)."""
    arr = np.asarray(x, dtype=object)
    if arr.shape != (inst.k,):
        raise DimensionError(f"point has length {arr.size}, expected k={inst.k}")
    if mode is None:
        mode = FLOAT if np.asarray(x).dtype.kind == "f" else EXACT
    _, _, U, _ = inst.arrays(mode)
    return U @ mode.array(list(arr))


def instance_from_json(data: Any) -> MaxParetoInstance:
    if not isinstance(data, dict):
        raise ParseError("instance must be a JSON object")
    missing = [f for f in INSTANCE_FIELDS if f not in data]
    if missing:
        raise ParseError(f"instance is missing field(s): {', '.join(missing)}")
    try:
        A = [[decode_number(v) for v in row] for row in data["A"]]
        b = [decode_number(v) for v in data["b"]]
        U = [[decode_number(v) for v in row] for row in data["U"]]
        c = [decode_number(v) for v in data["c"]]
        m, k, n = int(data["m"]), int(data["k"]), int(data["n"])
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from exc
    if len(A) != m or any(len(row) != k for row in A):
        raise DimensionError(f"A is not {m}x{k}")
    if len(U) != n or any(len(row) != k for row in U):
        raise DimensionError(f"U is not {n}x{k}")
    graph = None
    if "graph" in data:
        from .matching import BipartiteInstance, graph_to_instance

        graph = BipartiteInstance.from_json(data["graph"])
        encoded = graph_to_instance(graph, c)
        if not (np.array_equal(encoded.A, np.array(A, dtype=object).reshape(m, k)) and np.array_equal(encoded.U, np.array(U, dtype=object).reshape(n, k))):
            raise ParseError("embedded graph does not match A and U")
    return MaxParetoInstance(np.array(A, dtype=object).reshape(m, k), b, np.array(U, dtype=object).reshape(n, k), c, graph=graph)


def load_instance(path: str | Path, validate: bool = True) -> MaxParetoInstance:
    """Read a ``.mpj`` file; reject empty or unbounded polyhedra when ``validate``."""
    try:
        data = json.loads(Path(path).read_text(), parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    inst = instance_from_json(data)
    if validate:
        flags = validate_instance(inst)
        if not (flags["nonempty"] and flags["bounded"]):
            raise InstanceRejected(f"{path}: polyhedron is {'empty' if not flags['nonempty'] else 'unbounded'}")
    return inst


def save_instance(inst: MaxParetoInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(inst.to_json(), indent=1) + "\n")


def polyhedron_problem(
    inst: MaxParetoInstance,
    objective: Any,
    mode: NumericMode,
    direction: str = "max",
    extra_A: Any = None,
    extra_b: Any = None,
    extra_senses: list[str] | None = None,
) -> tuple[LpProblem, "BoundRows"]:
    """LP over ``{x : A x <= b}`` plus optional extra rows.

    Rows of the form ``-a x_j <= beta`` (a > 0) become lower bounds, which
    keeps matching-polytope LPs small; ``BoundRows`` maps duals back.
    """
    A, b, _, _ = inst.arrays(mode)
    k = inst.k
    kept, lower_row = _bound_structure(inst)
    lower: list[Any] = [None if r is None else b[r] / A[r, j] for j, r in enumerate(lower_row)]
    rows = [A[r] for r in kept]
    rhs = [b[r] for r in kept]
    senses = ["L"] * len(kept)
    if extra_A is not None:
        rows += list(mode.array(extra_A).reshape(-1, k))
        rhs += list(mode.array(list(extra_b)))
        senses += list(extra_senses) if extra_senses else ["L"] * len(extra_b)
    A_lp = np.array(rows, dtype=object).reshape(len(rows), k)
    problem = LpProblem(A=A_lp, b=rhs, objective=list(objective), senses=senses, direction=direction, lower=lower)
    return problem, BoundRows(kept=kept, lower_row=lower_row, m=inst.m, A=A)


def _bound_structure(inst: MaxParetoInstance) -> tuple[list[int], list[int | None]]:
    cached = inst.__dict__.get("_bound_structure")
    if cached is not None:
        return cached
    A, b = inst.A, inst.b
    k = inst.k
    lower: list[Any] = [None] * k
    lower_row: list[int | None] = [None] * k
    kept: list[int] = []
    for r in range(inst.m):
        nz = np.flatnonzero(A[r] != 0)
        if len(nz) == 1 and A[r, nz[0]] < 0:
            j = int(nz[0])
            bound = b[r] / A[r, j]
            if lower[j] is None or bound > lower[j]:
                if lower_row[j] is not None:
                    kept.append(lower_row[j])
                lower[j], lower_row[j] = bound, r
                continue
        kept.append(r)
    kept.sort()
    object.__setattr__(inst, "_bound_structure", (kept, lower_row))
    return kept, lower_row


@dataclass
class BoundRows:
    kept: list[int]
    lower_row: list[int | None]
    m: int
    A: np.ndarray

    def row_duals(self, sol: LpSolution, mode: NumericMode) -> np.ndarray:
        """Multipliers for every original row, including those turned into bounds."""
        zero = mode.array([0])[0]
        eta = np.array([zero] * self.m, dtype=object if mode.exact else float)
        for pos, r in enumerate(self.kept):
            eta[r] = sol.duals[pos]
        for j, r in enumerate(self.lower_row):
            if r is not None:
                eta[r] = sol.reduced_costs[j] / self.A[r, j]
        return eta


def validate_instance(inst: MaxParetoInstance, mode: NumericMode = FLOAT) -> dict[str, bool]:
    """Nonemptiness by a phase-one solve, boundedness by 2k coordinate LPs."""
    zero = [0] * inst.k
    first, _ = polyhedron_problem(inst, zero, mode)
    if not solve_lp(first, mode).optimal:
        return {"nonempty": False, "bounded": True}
    for j in range(inst.k):
        e = [0] * inst.k
        e[j] = 1
        for direction in ("max", "min"):
            p, _ = polyhedron_problem(inst, e, mode, direction=direction)
            sol = solve_lp(p, mode)
            if not sol.optimal or (not mode.exact and not math.isfinite(float(sol.objective_value))):
                return {"nonempty": True, "bounded": False}
    return {"nonempty": True, "bounded": True}
