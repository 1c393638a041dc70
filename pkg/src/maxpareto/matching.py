"""Weighted bipartite matchings, blocking sets and the allocation encoder.

Vertices are zero-based on both sides. An edge weight is the payoff the
``V1`` endpoint receives when matched along that edge; unmatched vertices
receive 0.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Any, Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import InvalidMatching, ParseError, PreconditionViolated, ValidationFailed
from .model import MaxParetoInstance
from .numeric import EXACT, NumericMode, decode_number, encode_number, to_fraction
from .pareto import WitnessCache, verify_pareto

ENUM_CAP = 10


@dataclass(frozen=True)
class BipartiteInstance:
    n1: int
    n2: int
    edges: tuple[tuple[int, int, Fraction], ...]

    def __post_init__(self) -> None:
        edges = tuple((int(i), int(j), to_fraction(w)) for i, j, w in self.edges)
        seen = set()
        for i, j, w in edges:
            if not (0 <= i < self.n1 and 0 <= j < self.n2):
                raise ValueError(f"edge ({i}, {j}) outside {self.n1}x{self.n2}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            if w < 0:
                raise ValueError(f"negative weight on edge ({i}, {j})")
            seen.add((i, j))
        object.__setattr__(self, "edges", edges)

    @property
    def weights(self) -> dict[tuple[int, int], Fraction]:
        cached = self.__dict__.get("_weights")
        if cached is None:
            cached = {(i, j): w for i, j, w in self.edges}
            object.__setattr__(self, "_weights", cached)
        return cached

    @property
    def adjacency(self) -> list[list[tuple[int, Fraction]]]:
        """Per ``V1`` vertex, ``(V2 vertex, weight)`` sorted by weight desc, then index."""
        cached = self.__dict__.get("_adjacency")
        if cached is None:
            cached = [[] for _ in range(self.n1)]
            for i, j, w in self.edges:
                cached[i].append((j, w))
            for lst in cached:
                lst.sort(key=lambda t: (-t[1], t[0]))
            object.__setattr__(self, "_adjacency", cached)
        return cached

    def neighbors(self, i: int) -> list[int]:
        return sorted(j for j, _ in self.adjacency[i])

    def weight(self, i: int, j: int) -> Fraction:
        return self.weights[(i, j)]

    def to_json(self) -> dict:
        return {"n1": self.n1, "n2": self.n2, "edges": [[i, j, encode_number(w)] for i, j, w in self.edges]}

    @classmethod
    def from_json(cls, data: Any) -> "BipartiteInstance":
        try:
            return cls(int(data["n1"]), int(data["n2"]), tuple((int(i), int(j), decode_number(w)) for i, j, w in data["edges"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad graph: {exc}") from exc


@dataclass(frozen=True)
class Matching:
    pairs: frozenset[tuple[int, int]]

    @classmethod
    def of(cls, pairs: Iterable[tuple[int, int]]) -> "Matching":
        return cls(frozenset((int(i), int(j)) for i, j in pairs))

    @property
    def partner(self) -> dict[int, int]:
        return dict(self.pairs)

    def agents(self) -> set[int]:
        return {i for i, _ in self.pairs}

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self.pairs))

    def __repr__(self) -> str:
        return f"Matching({sorted(self.pairs)})"


@dataclass(frozen=True)
class BlockingSet:
    members: frozenset[int]

    def __repr__(self) -> str:
        return f"BlockingSet({sorted(self.members)})"


@dataclass(frozen=True)
class AllocationInstance:
    agents: int
    objects: int
    preferences: tuple[tuple[int, ...], ...]
    required: frozenset[int] | None = None

    def __post_init__(self) -> None:
        prefs = tuple(tuple(int(o) for o in p) for p in self.preferences)
        if len(prefs) != self.agents:
            raise ValueError(f"{len(prefs)} preference lists for {self.agents} agents")
        for a, p in enumerate(prefs):
            if len(set(p)) != len(p):
                raise ValueError(f"agent {a} lists an object twice")
            if any(not 0 <= o < self.objects for o in p):
                raise ValueError(f"agent {a} lists an unknown object")
        object.__setattr__(self, "preferences", prefs)
        if self.required is not None:
            req = frozenset(int(o) for o in self.required)
            if any(not 0 <= o < self.objects for o in req):
                raise ValueError("required objects must exist")
            object.__setattr__(self, "required", req)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"agents": self.agents, "objects": self.objects, "preferences": [list(p) for p in self.preferences]}
        if self.required is not None:
            out["Q"] = sorted(self.required)
        return out

    @classmethod
    def from_json(cls, data: Any) -> "AllocationInstance":
        try:
            q = data.get("Q")
            return cls(int(data["agents"]), int(data["objects"]), tuple(tuple(p) for p in data["preferences"]), None if q is None else frozenset(q))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"bad allocation instance: {exc}") from exc


def load_graph(path: str | Path) -> BipartiteInstance:
    try:
        return BipartiteInstance.from_json(json.loads(Path(path).read_text(), parse_float=Fraction))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def save_graph(g: BipartiteInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(g.to_json()) + "\n")


def load_allocation(path: str | Path) -> AllocationInstance:
    try:
        return AllocationInstance.from_json(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def save_allocation(a: AllocationInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(a.to_json()) + "\n")


def validate_matching(g: BipartiteInstance, m: Matching) -> None:
    left, right = set(), set()
    for i, j in m.pairs:
        if (i, j) not in g.weights:
            raise InvalidMatching(f"({i}, {j}) is not an edge")
        if i in left or j in right:
            raise InvalidMatching(f"vertex reused in {m}")
        left.add(i)
        right.add(j)


def payoff_vector(g: BipartiteInstance, m: Matching) -> tuple[Fraction, ...]:
    validate_matching(g, m)
    u = [Fraction(0)] * g.n1
    for i, j in m.pairs:
        u[i] = g.weights[(i, j)]
    return tuple(u)


def enumerate_matchings(g: BipartiteInstance) -> Iterator[Matching]:
    """Every matching of ``g``, the empty one included."""
    adj = [g.neighbors(i) for i in range(g.n1)]
    used: set[int] = set()
    chosen: list[tuple[int, int]] = []

    def rec(i: int) -> Iterator[Matching]:
        if i == g.n1:
            yield Matching(frozenset(chosen))
            return
        yield from rec(i + 1)
        for j in adj[i]:
            if j not in used:
                used.add(j)
                chosen.append((i, j))
                yield from rec(i + 1)
                chosen.pop()
                used.discard(j)

    yield from rec(0)


def find_dominating_matching(g: BipartiteInstance, m: Matching) -> Matching | None:
    """Depth-first search for a matching whose payoff dominates ``m``'s.

    Each vertex may only take edges worth at least its current payoff, which
    prunes the search to a small fraction of all matchings.
    """
    u = payoff_vector(g, m)
    adj = g.adjacency
    used: set[int] = set()
    chosen: list[tuple[int, int]] = []

    def rec(i: int, strict: bool) -> bool:
        if i == g.n1:
            return strict
        for j, w in adj[i]:
            if w < u[i]:
                break
            if j in used:
                continue
            used.add(j)
            chosen.append((i, j))
            if rec(i + 1, strict or w > u[i]):
                return True
            chosen.pop()
            used.discard(j)
        if u[i] == 0 and rec(i + 1, strict):
            return True
        return False

    if rec(0, False):
        return Matching.of(chosen)
    return None


def is_po_matching(g: BipartiteInstance, m: Matching, enum_cap: int = ENUM_CAP, mode: NumericMode = EXACT) -> bool:
    """Pareto optimality among integral matchings.

    Exhaustive (pruned) search up to ``enum_cap`` vertices in ``V1``; above
    it the LP check is used, which is equivalent because PO and fPO coincide
    on bipartite graphs.
    """
    validate_matching(g, m)
    if g.n1 <= enum_cap:
        return find_dominating_matching(g, m) is None
    return is_fpo_matching(g, m, mode)


def graph_to_instance(g: BipartiteInstance, objective: Sequence[Any] | None = None) -> MaxParetoInstance:
    """Matching polytope of ``g`` with one payoff row per ``V1`` vertex.

    Variables follow ``g.edges``. The default objective is total payoff.
    """
    E = len(g.edges)
    if E == 0:
        raise PreconditionViolated("graph has no edges, so there are no variables")
    rows: list[list[Any]] = []
    b: list[int] = []
    for side, count in ((0, g.n1), (1, g.n2)):
        for v in range(count):
            row = [1 if e[side] == v else 0 for e in g.edges]
            if any(row):
                rows.append(row)
                b.append(1)
    for e in range(E):
        row = [0] * E
        row[e] = -1
        rows.append(row)
        b.append(0)
    U = [[w if i == a else 0 for (i, _, w) in g.edges] for a in range(g.n1)]
    c = list(objective) if objective is not None else [w for _, _, w in g.edges]
    return MaxParetoInstance(np.array(rows, dtype=object), b, np.array(U, dtype=object).reshape(g.n1, E), c, graph=g)


def indicator(g: BipartiteInstance, m: Matching) -> list[Fraction]:
    validate_matching(g, m)
    return [Fraction(1) if (i, j) in m.pairs else Fraction(0) for i, j, _ in g.edges]


def matching_from_vector(g: BipartiteInstance, x: Sequence[Any], tol: float = 1e-6) -> Matching:
    pairs = []
    for (i, j, _), v in zip(g.edges, x):
        if abs(float(v) - 1.0) <= tol:
            pairs.append((i, j))
        elif abs(float(v)) > tol:
            raise InvalidMatching(f"fractional value {v} on edge ({i}, {j})")
    m = Matching.of(pairs)
    validate_matching(g, m)
    return m


def is_fpo_matching(g: BipartiteInstance, m: Matching, mode: NumericMode = EXACT) -> bool:
    """No convex combination of matchings dominates ``m`` (one LP)."""
    validate_matching(g, m)
    if not g.edges:
        return True
    inst = graph_to_instance(g)
    return not verify_pareto(inst, indicator(g, m), mode).dominated


def fpo_verdicts(g: BipartiteInstance, matchings: Sequence[Matching], mode: NumericMode = EXACT) -> list[bool]:
    """``is_fpo_matching`` for many matchings of one graph.

    Matchings are processed by decreasing total payoff through a
    ``WitnessCache``, so most dominated ones are settled by an attainable
    payoff vector found by an earlier LP.
    """
    if not g.edges:
        return [True] * len(matchings)
    inst = graph_to_instance(g)
    cache = WitnessCache(inst, mode)
    payoffs = [payoff_vector(g, m) for m in matchings]
    order = sorted(range(len(matchings)), key=lambda t: -sum(payoffs[t]))
    out = [False] * len(matchings)
    for t in order:
        out[t] = not cache.verify(indicator(g, matchings[t]), payoffs[t]).dominated
    return out


class Reduction(NamedTuple):
    graph: BipartiteInstance
    matching: Matching
    v1_labels: tuple[int, ...]
    v2_labels: tuple[int, ...]


def reduced_graph(g: BipartiteInstance, m: Matching, R: Iterable[int]) -> Reduction:
    """Drop ``R`` from ``V1``, their partners from ``V2`` and re-index.

    ``v1_labels[new] == old`` (likewise for ``V2``).
    """
    validate_matching(g, m)
    R = set(R)
    partner = m.partner
    gone = {partner[i] for i in R if i in partner}
    v1 = tuple(i for i in range(g.n1) if i not in R)
    v2 = tuple(j for j in range(g.n2) if j not in gone)
    new1 = {old: new for new, old in enumerate(v1)}
    new2 = {old: new for new, old in enumerate(v2)}
    edges = tuple((new1[i], new2[j], w) for i, j, w in g.edges if i in new1 and j in new2)
    sub = BipartiteInstance(len(v1), len(v2), edges)
    induced = Matching.of((new1[i], new2[j]) for i, j in m.pairs if i not in R)
    return Reduction(sub, induced, v1, v2)


def is_blocking_set(g: BipartiteInstance, m: Matching, members: Iterable[int]) -> bool:
    """Both blocking-set conditions, checked directly."""
    B = set(members)
    partner = m.partner
    if not B or not B <= set(partner):
        return False
    taken = {partner[i] for i in B}
    for i in B:
        own = g.weights[(i, partner[i])]
        for j, w in g.adjacency[i]:
            if w > own or (j not in taken and w >= own):
                return False
    return True


def all_blocking_sets(g: BipartiteInstance, m: Matching) -> list[BlockingSet]:
    """Every blocking set, by checking all subsets of the matched vertices."""
    matched = sorted(m.agents())
    out = []
    for r in range(1, len(matched) + 1):
        for combo in combinations(matched, r):
            if is_blocking_set(g, m, combo):
                out.append(BlockingSet(frozenset(combo)))
    return out


def _hall_violator(adj: dict[int, list[int]]) -> set[int] | None:
    """Left vertices alternating-reachable from a vertex a maximum matching misses.

    ``None`` when the bipartite graph ``adj`` (left -> right lists) has a
    matching saturating the left side.
    """
    match_r: dict[int, int] = {}

    def augment(k: int, seen: set[int]) -> bool:
        for l in adj[k]:
            if l in seen:
                continue
            seen.add(l)
            if l not in match_r or augment(match_r[l], seen):
                match_r[l] = k
                return True
        return False

    free = [k for k in sorted(adj) if not augment(k, set())]
    if not free:
        return None
    reach = set(free)
    stack = list(free)
    while stack:
        k = stack.pop()
        for l in adj[k]:
            o = match_r.get(l)
            if o is not None and o not in reach:
                reach.add(o)
                stack.append(o)
    return reach


def find_blocking_set(g: BipartiteInstance, m: Matching, i: int, j: int, check_po: bool = True) -> BlockingSet:
    """Constructive blocking set for a PO matching with an improving edge ``(i, j)``.

    Each round builds the auxiliary graph in which every matched vertex keeps
    only the edges it weakly prefers to its own, and ``i`` keeps only
    ``(i, j)``. It has no perfect matching (that would dominate ``m``), so a
    Hall violator ``R`` exists; ``R' = R - {i}``. If nobody in ``R'`` strictly
    prefers the partner of another member, ``R'`` is blocking. Otherwise
    ``i`` and its partner are deleted, the strict preference becomes the next
    improving edge, and the answer is intersected with ``R'`` on the way back.
    """
    validate_matching(g, m)
    weights = g.weights
    if (i, j) not in weights:
        raise PreconditionViolated(f"({i}, {j}) is not an edge")
    u = payoff_vector(g, m)
    if not weights[(i, j)] > u[i]:
        raise PreconditionViolated(f"edge ({i}, {j}) does not improve vertex {i}")
    if check_po and g.n1 <= ENUM_CAP and find_dominating_matching(g, m) is not None:
        raise PreconditionViolated("matching is not Pareto-optimal")

    partner = m.partner
    removed_v2: set[int] = set()
    ci, cj = i, j
    trail: list[tuple[bool, set[int]]] = []
    for _ in range(g.n1 + 1):
        aux = {ci: [cj]}
        for k, own in partner.items():
            if k != ci:
                own_w = weights[(k, own)]
                aux[k] = [l for l, w in g.adjacency[k] if w >= own_w and l not in removed_v2]
        R = _hall_violator(aux)
        if R is None or ci not in R:
            raise PreconditionViolated("auxiliary graph has a perfect matching, so the matching is not Pareto-optimal")
        members = R - {ci}
        items = {partner[k] for k in members}
        if cj not in items:
            raise PreconditionViolated(f"vertex {cj} is not held by the violator, so the matching is not Pareto-optimal")
        trail.append((ci in partner, members))
        strict = sorted(
            (k, l)
            for k in members
            for l, w in g.adjacency[k]
            if l in items and w > weights[(k, partner[k])]
        )
        if not strict:
            break
        if ci in partner:
            removed_v2.add(partner.pop(ci))
        ci, cj = strict[0]
    else:
        raise ValidationFailed("blocking-set construction did not terminate")

    result = set(trail[-1][1])
    for was_matched, members in reversed(trail[:-1]):
        if was_matched:
            result &= members
    if not is_blocking_set(g, m, result):
        raise ValidationFailed(f"constructed set {sorted(result)} is not blocking")
    return BlockingSet(frozenset(result))


def union_blocking_sets(g: BipartiteInstance, m: Matching, b1: BlockingSet, b2: BlockingSet) -> BlockingSet:
    for b in (b1, b2):
        if not is_blocking_set(g, m, b.members):
            raise PreconditionViolated(f"{b} is not a blocking set")
    union = b1.members | b2.members
    if not is_blocking_set(g, m, union):
        raise ValidationFailed(f"union {sorted(union)} of blocking sets is not blocking")
    return BlockingSet(union)


def allocation_graph(a: AllocationInstance) -> BipartiteInstance:
    """Agents to objects; an object ranked above ``r`` others is worth ``1 + r``."""
    edges = []
    for agent, prefs in enumerate(a.preferences):
        for pos, obj in enumerate(prefs):
            edges.append((agent, obj, len(prefs) - pos))
    edges.sort()
    return BipartiteInstance(a.agents, a.objects, tuple(edges))


def encode_allocation(a: AllocationInstance, welfare: Any = None) -> MaxParetoInstance:
    """Max-Pareto instance over the matching polytope of the preference graph.

    The objective counts matched required objects, or, when ``welfare``
    (agents x objects) is given, sums welfare over matched pairs.
    """
    g = allocation_graph(a)
    if not g.edges:
        raise PreconditionViolated("no agent admits any object")
    if welfare is not None:
        c = [to_fraction(welfare[i][o]) for i, o, _ in g.edges]
    elif a.required is not None:
        c = [1 if o in a.required else 0 for _, o, _ in g.edges]
    else:
        c = [0] * len(g.edges)
    return graph_to_instance(g, c)


def serial_dictatorship(g: BipartiteInstance, order: Sequence[int]) -> Matching:
    """Agents pick in ``order``; each takes its best free positive-weight edge."""
    used: set[int] = set()
    pairs = []
    for i in order:
        for j, w in g.adjacency[i]:
            if w > 0 and j not in used:
                used.add(j)
                pairs.append((i, j))
                break
    return Matching.of(pairs)


def three_agent_graph() -> BipartiteInstance:
    """Six-vertex graph with PO payoff vectors (0,2,4), (1,1,4) and (2,2,2).

    ``V1 = {v1, v2, v3}`` and ``V2 = {v4, v5, v6}`` map to indices 0..2.
    """
    return BipartiteInstance(3, 3, ((0, 1, 1), (0, 2, 2), (1, 0, 1), (1, 1, 2), (2, 0, 2), (2, 2, 4)))
