"""Exact backtracking solvers for the scheduling indices.

Everything here is brute force by design: these routines are the reference
oracles for the closed-form classifiers and for the constructive schedulers,
so they favor obvious correctness over speed.  Instances are desk scale.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .bounds import ub_shannon
from .model import AbsenceAssignment, BudgetMap, Multigraph, Schedule, Vertex


class SearchBudgetExceeded(RuntimeError):
    """The configured node budget ran out before the search finished."""

    def __init__(self, nodes: int):
        super().__init__(f"search budget exceeded after {nodes} nodes")
        self.nodes = nodes


@dataclass
class SolveResult:
    value: int
    witness: Optional[object] = None
    certificate: str = "witness"  # "witness" or "exhausted-search"
    nodes: int = 0
    elapsed: float = 0.0

    def to_json_dict(self) -> dict:
        out = {"value": self.value, "certificate": self.certificate,
               "nodes": self.nodes, "elapsed": round(self.elapsed, 6)}
        if isinstance(self.witness, Schedule):
            out["witness"] = self.witness.to_json_dict()
        elif self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class ColoringResult:
    feasible: bool
    coloring: Optional[List[int]]  # per edge index, actual color values
    nodes: int = 0
    elapsed: float = 0.0
    certificate: str = "witness"


# ---------- core list-coloring backtracking ----------

class _Budget:
    __slots__ = ("limit", "nodes")

    def __init__(self, limit: Optional[int]):
        self.limit = limit
        self.nodes = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.limit is not None and self.nodes > self.limit:
            raise SearchBudgetExceeded(self.nodes)


def edge_adjacency(g: Multigraph) -> Sequence[Sequence[int]]:
    """For each edge index, the indices of edges sharing an endpoint."""
    return g.edge_adjacency()


def _solve_masks(adj: Sequence[Sequence[int]], masks: List[int],
                 budget: _Budget) -> Optional[List[int]]:
    """Assign one allowed bit per edge so adjacent edges differ.

    Most-constrained-edge-first with forward pruning of emptied lists.
    Returns bit indices per edge, or None after exhausting the search space.
    """
    n = len(masks)
    color_bits = [-1] * n
    avail = list(masks)
    done = [False] * n

    def choose() -> int:
        best, best_count = -1, 1 << 30
        for e in range(n):
            if not done[e]:
                cnt = avail[e].bit_count()
                if cnt < best_count:
                    best, best_count = e, cnt
                    if cnt <= 1:
                        break
        return best

    def rec(remaining: int) -> bool:
        if remaining == 0:
            return True
        e = choose()
        options = avail[e]
        if options == 0:
            return False
        done[e] = True
        while options:
            bit = options & -options
            options ^= bit
            budget.tick()
            color_bits[e] = bit.bit_length() - 1
            touched: List[int] = []
            dead = False
            for f in adj[e]:
                if not done[f] and avail[f] & bit:
                    avail[f] ^= bit
                    touched.append(f)
                    if avail[f] == 0:
                        dead = True
                        break
            if not dead and rec(remaining - 1):
                return True
            for f in touched:
                avail[f] |= bit
        done[e] = False
        color_bits[e] = -1
        return False

    if rec(n):
        return color_bits
    return None


def list_edge_colorable(g: Multigraph, lists: Mapping[int, Iterable[int]],
                        node_budget: Optional[int] = None) -> ColoringResult:
    """Proper edge coloring of g choosing each edge's color from its list.

    ``lists`` maps edge indices (positions in ``g.edges``) to allowed colors.
    Infeasibility is certified by exhaustion of the backtracking search.
    """
    start = time.perf_counter()
    m_edges = g.num_edges()
    for e in range(m_edges):
        if e not in lists:
            raise ValueError(f"missing color list for edge index {e} ({g.edges[e]})")
    palette = sorted({c for values in lists.values() for c in values})
    bit_of = {c: i for i, c in enumerate(palette)}
    masks = []
    for e in range(m_edges):
        mask = 0
        for c in lists[e]:
            mask |= 1 << bit_of[c]
        masks.append(mask)
    budget = _Budget(node_budget)
    bits = _solve_masks(edge_adjacency(g), masks, budget)
    elapsed = time.perf_counter() - start
    if bits is None:
        return ColoringResult(False, None, budget.nodes, elapsed, "exhausted-search")
    return ColoringResult(True, [palette[b] for b in bits], budget.nodes, elapsed, "witness")


# ---------- levels: lists of the form {1..m} minus forbidden rounds ----------

def level_masks(g: Multigraph, c: AbsenceAssignment, m: int) -> List[int]:
    """Bitmasks of the allowed rounds {1..m} minus the forbidden rounds of the
    endpoints; bit i stands for round i+1."""
    full = (1 << m) - 1
    masks = []
    for e in g.edges:
        mask = full
        for r in c.edge_forbidden(e):
            if r <= m:
                mask &= ~(1 << (r - 1))
        masks.append(mask)
    return masks


def feasible_at_level(g: Multigraph, c: AbsenceAssignment, m: int,
                      budget: Optional[_Budget] = None) -> Optional[List[int]]:
    """A c-avoiding proper edge coloring with rounds in {1..m}, or None."""
    budget = budget or _Budget(None)
    bits = _solve_masks(edge_adjacency(g), level_masks(g, c, m), budget)
    if bits is None:
        return None
    return [b + 1 for b in bits]


# ---------- chromatic index ----------

def chi_prime(g: Multigraph, node_budget: Optional[int] = None) -> SolveResult:
    """Smallest number of rounds with no absences at all."""
    start = time.perf_counter()
    if g.num_edges() == 0:
        return SolveResult(0, Schedule.from_rounds([], graph=g), "witness", 0,
                           time.perf_counter() - start)
    budget = _Budget(node_budget)
    empty = AbsenceAssignment({})
    m = g.max_degree()
    while True:
        colors = feasible_at_level(g, empty, m, budget)
        if colors is not None:
            schedule = Schedule.from_coloring(g, colors)
            return SolveResult(m, schedule, "witness", budget.nodes,
                               time.perf_counter() - start)
        m += 1


_CHI_PRIME_CACHE: Dict[Multigraph, int] = {}


def chi_prime_value(g: Multigraph) -> int:
    """The absence-free optimum, cached per graph (exhaustive sweeps ask for
    the same graph's value thousands of times)."""
    value = _CHI_PRIME_CACHE.get(g)
    if value is None:
        value = chi_prime(g).value
        if len(_CHI_PRIME_CACHE) > 4096:
            _CHI_PRIME_CACHE.clear()
        _CHI_PRIME_CACHE[g] = value
    return value


def chi_prime_c(g: Multigraph, c: AbsenceAssignment,
                node_budget: Optional[int] = None) -> SolveResult:
    """Smallest number of rounds that accommodates all matches while avoiding
    the pre-fixed absences ``c``.  Searches levels upward from the absence-free
    optimum; the certified general upper bound caps the ascent."""
    start = time.perf_counter()
    if g.num_edges() == 0:
        return SolveResult(0, Schedule.from_rounds([], graph=g), "witness", 0,
                           time.perf_counter() - start)
    budget = _Budget(node_budget)
    t_c = BudgetMap({v: len(c.forbidden(v)) for v in g.vertices})
    cap = ub_shannon(g, t_c)
    for m in range(chi_prime_value(g), cap + 1):
        colors = feasible_at_level(g, c, m, budget)
        if colors is not None:
            schedule = Schedule.from_coloring(g, colors, absences=c)
            return SolveResult(m, schedule, "witness", budget.nodes,
                               time.perf_counter() - start)
    raise AssertionError("no feasible level at or below the certified upper bound; solver bug")


# ---------- worst-case over t-labelings ----------

def _compressed_labelings(vertices: Sequence[Vertex], budgets: Sequence[int],
                          max_values: int) -> Iterator[Dict[Vertex, FrozenSet[int]]]:
    """All absence assignments whose set of round values is exactly 1..k for
    some k, assigning at most ``budgets[i]`` rounds to vertex i.

    Order-preserving compression of round values never lowers the avoidance
    index, so the worst case over all bounded assignments is attained in this
    family.  No further value symmetry is exploited: feasibility at a level m
    is not invariant under bijections that move values across m.
    """
    n = len(vertices)
    assignment: List[FrozenSet[int]] = [frozenset()] * n
    suffix_capacity = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_capacity[i] = suffix_capacity[i + 1] + budgets[i]

    def rec(i: int, k: int, covered: int, full: int) -> Iterator[Dict[Vertex, FrozenSet[int]]]:
        missing = (full ^ covered).bit_count()
        if missing > suffix_capacity[i]:
            return
        if i == n:
            if covered == full:
                yield {vertices[j]: assignment[j] for j in range(n) if assignment[j]}
            return
        b = budgets[i]
        values = range(1, k + 1)
        for size in range(0, min(b, k) + 1):
            for chosen in combinations(values, size):
                mask = 0
                for value in chosen:
                    mask |= 1 << (value - 1)
                assignment[i] = frozenset(chosen)
                yield from rec(i + 1, k, covered | mask, full)
        assignment[i] = frozenset()

    cap = min(max_values, suffix_capacity[0])
    for k in range(0, cap + 1):
        yield from rec(0, k, 0, (1 << k) - 1)


def _seed_labeling(g: Multigraph, t: BudgetMap) -> AbsenceAssignment:
    """The degree-bound witness: a busiest player blocks the first rounds and
    every neighbor blocks the immediately following ones."""
    v0 = max(g.vertices, key=lambda v: (g.degree(v), -g.vertex_index(v)))
    t0 = t.get(v0)
    rounds: Dict[Vertex, List[int]] = {}
    if t0:
        rounds[v0] = list(range(1, t0 + 1))
    for u in g.neighbors(v0):
        tu = t.get(u)
        if tu:
            rounds[u] = list(range(t0 + 1, t0 + tu + 1))
    return AbsenceAssignment(rounds)


def chi_t_exact(g: Multigraph, t: BudgetMap,
                node_budget: Optional[int] = None) -> Tuple[SolveResult, AbsenceAssignment]:
    """Worst case of the avoidance index over all assignments within budget,
    together with a worst-case assignment.

    Enumerates compressed assignments only (see ``_compressed_labelings``) and
    tests each against the current record: an assignment still schedulable in
    ``best`` rounds cannot beat the record and is dismissed with one
    feasibility check.
    """
    start = time.perf_counter()
    if g.num_edges() == 0:
        return (SolveResult(0, Schedule.from_rounds([], graph=g), "witness", 0,
                            time.perf_counter() - start), AbsenceAssignment({}))
    budget = _Budget(node_budget)
    cap = ub_shannon(g, t)

    def exact_value(c: AbsenceAssignment, lower: int) -> Tuple[int, List[int]]:
        for m in range(lower, cap + 1):
            colors = feasible_at_level(g, c, m, budget)
            if colors is not None:
                return m, colors
        raise AssertionError("no feasible level at or below the certified upper bound; solver bug")

    seed = _seed_labeling(g, t)
    best_c = seed
    best, best_colors = exact_value(seed, chi_prime_value(g))

    budget_list = [t.get(v) for v in g.vertices]
    max_values = min(cap, sum(budget_list))
    for rounds in _compressed_labelings(g.vertices, budget_list, max_values):
        c = AbsenceAssignment(rounds)
        if feasible_at_level(g, c, best, budget) is not None:
            continue
        best, best_colors = exact_value(c, best + 1)
        best_c = c
    schedule = Schedule.from_coloring(g, best_colors, absences=best_c)
    result = SolveResult(best, schedule, "witness", budget.nodes,
                         time.perf_counter() - start)
    return result, best_c


# ---------- total coloring ----------

def _canonical_vertex_colorings(g: Multigraph, m: int) -> Iterator[List[int]]:
    """Proper vertex colorings with colors 1..m, canonical under color
    permutation (each vertex uses at most one more color than seen so far)."""
    n = len(g.vertices)
    vert_adj: List[List[int]] = [[] for _ in range(n)]
    for u, v in g.edges:
        iu, iv = g.vertex_index(u), g.vertex_index(v)
        if iv not in vert_adj[iu]:
            vert_adj[iu].append(iv)
            vert_adj[iv].append(iu)
    colors = [0] * n

    def rec(i: int, used: int) -> Iterator[List[int]]:
        if i == n:
            yield list(colors)
            return
        forbidden = {colors[j] for j in vert_adj[i] if j < i}
        for col in range(1, min(used + 1, m) + 1):
            if col in forbidden:
                continue
            colors[i] = col
            yield from rec(i + 1, max(used, col))
        colors[i] = 0

    yield from rec(0, 0)


def chi_total(g: Multigraph, node_budget: Optional[int] = None) -> SolveResult:
    """Smallest m admitting a proper vertex m-coloring and a proper edge
    m-coloring in which every match's round differs from both players'
    colors."""
    start = time.perf_counter()
    if g.num_edges() == 0:
        value = 1 if g.vertices else 0
        witness = {"vertex_colors": {v: 1 for v in g.vertices}, "edge_colors": []}
        return SolveResult(value, witness, "witness", 0, time.perf_counter() - start)
    budget = _Budget(node_budget)
    adj = edge_adjacency(g)
    m = g.max_degree() + 1
    while True:
        full = (1 << m) - 1
        for vcolors in _canonical_vertex_colorings(g, m):
            budget.tick()
            masks = []
            for u, v in g.edges:
                mask = full
                mask &= ~(1 << (vcolors[g.vertex_index(u)] - 1))
                mask &= ~(1 << (vcolors[g.vertex_index(v)] - 1))
                masks.append(mask)
            bits = _solve_masks(adj, masks, budget)
            if bits is not None:
                witness = {"vertex_colors": {v: vcolors[g.vertex_index(v)] for v in g.vertices},
                           "edge_colors": [b + 1 for b in bits]}
                return SolveResult(m, witness, "witness", budget.nodes,
                                   time.perf_counter() - start)
        m += 1
