"""Core data model: multigraphs, absence assignments, budgets, schedules.

Every other module builds on the types here.  All types are immutable after
construction and safe to share; the schedule verifier is the single source of
truth for what counts as a valid tournament schedule.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

Vertex = str
EdgePair = Tuple[Vertex, Vertex]


class ModelError(ValueError):
    """Raised for invalid graphs, assignments, budgets or schedules."""


# ---------- Multigraph ----------

class Multigraph:
    """A loopless multigraph with an explicit, ordered vertex list.

    Vertices are opaque identifiers; their declaration order is the stable
    total order used everywhere (canonical forms, circular layouts, tie
    breaking).  Edges are stored as an ordered tuple so parallel edges are
    distinct occurrences addressable by index.
    """

    __slots__ = ("vertices", "edges", "_index", "_incident", "_edge_adj")

    def __init__(self, vertices: Sequence[Vertex], edges: Iterable[EdgePair]):
        verts = tuple(vertices)
        if len(set(verts)) != len(verts):
            raise ModelError("duplicate vertex identifiers")
        index = {v: i for i, v in enumerate(verts)}
        normalized: List[EdgePair] = []
        for u, v in edges:
            if u not in index:
                raise ModelError(f"edge endpoint {u!r} is not a declared vertex")
            if v not in index:
                raise ModelError(f"edge endpoint {v!r} is not a declared vertex")
            if u == v:
                raise ModelError(f"loop edge at {u!r} is not allowed")
            if index[u] > index[v]:
                u, v = v, u
            normalized.append((u, v))
        self.vertices: Tuple[Vertex, ...] = verts
        self.edges: Tuple[EdgePair, ...] = tuple(normalized)
        self._index: Dict[Vertex, int] = index
        incident: Dict[Vertex, List[int]] = {v: [] for v in verts}
        for i, (u, v) in enumerate(self.edges):
            incident[u].append(i)
            incident[v].append(i)
        self._incident = {v: tuple(ixs) for v, ixs in incident.items()}
        self._edge_adj: Optional[Tuple[Tuple[int, ...], ...]] = None

    # -- basic queries --

    def edge_adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        """For each edge index, the indices of edges sharing an endpoint
        (parallel copies included).  Computed once per graph."""
        if self._edge_adj is None:
            adj: List[Set[int]] = [set() for _ in self.edges]
            for v in self.vertices:
                incident = self._incident[v]
                for a in incident:
                    adj[a].update(incident)
            self._edge_adj = tuple(tuple(sorted(s - {i})) for i, s in enumerate(adj))
        return self._edge_adj

    def vertex_index(self, v: Vertex) -> int:
        return self._index[v]

    def has_vertex(self, v: Vertex) -> bool:
        return v in self._index

    def incident_edges(self, v: Vertex) -> Tuple[int, ...]:
        return self._incident[v]

    def degree(self, v: Vertex) -> int:
        return len(self._incident[v])

    def max_degree(self) -> int:
        return max((len(ixs) for ixs in self._incident.values()), default=0)

    def degree_profile(self) -> "DegreeProfile":
        degrees = {v: len(self._incident[v]) for v in self.vertices}
        return DegreeProfile(degrees=degrees, max_degree=max(degrees.values(), default=0))

    def num_edges(self) -> int:
        return len(self.edges)

    def edge_multiset(self) -> Dict[EdgePair, int]:
        counts: Dict[EdgePair, int] = {}
        for e in self.edges:
            counts[e] = counts.get(e, 0) + 1
        return counts

    def neighbors(self, v: Vertex) -> Set[Vertex]:
        out: Set[Vertex] = set()
        for i in self._incident[v]:
            a, b = self.edges[i]
            out.add(b if a == v else a)
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Multigraph):
            return NotImplemented
        return (self.vertices == other.vertices
                and self.edge_multiset() == other.edge_multiset())

    def __hash__(self) -> int:
        return hash((self.vertices, tuple(sorted(self.edges))))

    def __repr__(self) -> str:
        return f"Multigraph({len(self.vertices)} vertices, {len(self.edges)} edges)"

    # -- JSON --

    def to_json_dict(self, budgets: Optional["BudgetMap"] = None) -> dict:
        out: dict = {
            "vertices": list(self.vertices),
            "edges": [[u, v] for u, v in self.edges],
        }
        if budgets is not None:
            out["budgets"] = {v: budgets.get(v) for v in self.vertices}
        return out

    @staticmethod
    def from_json_dict(data: Mapping) -> Tuple["Multigraph", Optional["BudgetMap"]]:
        try:
            vertices = [str(v) for v in data["vertices"]]
            edges = [(str(u), str(v)) for u, v in data["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"malformed graph JSON: {exc}") from exc
        g = Multigraph(vertices, edges)
        budgets = None
        if "budgets" in data and data["budgets"] is not None:
            budgets = BudgetMap.from_json_dict(g, data["budgets"])
        return g, budgets


def build_graph(vertices: Sequence[Vertex], edges: Iterable[EdgePair]) -> Multigraph:
    """Validate and build a multigraph from a vertex list and edge pair list."""
    return Multigraph(vertices, edges)


def complete_graph(n: int) -> Multigraph:
    """K_n on vertices "1".."n"."""
    if n < 1:
        raise ModelError("complete_graph needs n >= 1")
    verts = [str(i) for i in range(1, n + 1)]
    edges = [(verts[i], verts[j]) for i in range(n) for j in range(i + 1, n)]
    return Multigraph(verts, edges)


def thick_triangle(s: int) -> Multigraph:
    """The triangle with s parallel edges between each pair of its 3 vertices."""
    if s < 1:
        raise ModelError("thick_triangle needs s >= 1")
    verts = ["1", "2", "3"]
    edges = [(a, b) for a, b in (("1", "2"), ("1", "3"), ("2", "3")) for _ in range(s)]
    return Multigraph(verts, edges)


def complete_bipartite(a: int, b: int) -> Multigraph:
    """K_{a,b} with blocks x1..xa and y1..yb."""
    if a < 1 or b < 1:
        raise ModelError("complete_bipartite needs a, b >= 1")
    xs = [f"x{i}" for i in range(1, a + 1)]
    ys = [f"y{j}" for j in range(1, b + 1)]
    return Multigraph(xs + ys, [(x, y) for x in xs for y in ys])


# ---------- DegreeProfile ----------

@dataclass(frozen=True)
class DegreeProfile:
    degrees: Mapping[Vertex, int]
    max_degree: int

    def check(self, g: Multigraph) -> None:
        if sum(self.degrees.values()) != 2 * g.num_edges():
            raise ModelError("degree sum does not equal twice the edge count")


# ---------- AbsenceAssignment ----------

class AbsenceAssignment:
    """Per-vertex finite sets of forbidden round numbers (all >= 1).

    Vertices missing from the mapping have no forbidden rounds.
    """

    __slots__ = ("_rounds",)

    def __init__(self, rounds: Mapping[Vertex, Iterable[int]]):
        cleaned: Dict[Vertex, FrozenSet[int]] = {}
        for v, rs in rounds.items():
            fs = frozenset(int(r) for r in rs)
            if any(r < 1 for r in fs):
                raise ModelError(f"absence rounds must be >= 1 (vertex {v!r})")
            if fs:
                cleaned[v] = fs
        self._rounds = cleaned

    def forbidden(self, v: Vertex) -> FrozenSet[int]:
        return self._rounds.get(v, frozenset())

    def edge_forbidden(self, e: EdgePair) -> FrozenSet[int]:
        u, v = e
        return self.forbidden(u) | self.forbidden(v)

    def absent_in_round(self, i: int) -> FrozenSet[Vertex]:
        return frozenset(v for v, rs in self._rounds.items() if i in rs)

    def vertices(self) -> FrozenSet[Vertex]:
        return frozenset(self._rounds)

    def max_round(self) -> int:
        return max((max(rs) for rs in self._rounds.values()), default=0)

    def is_t_labeling(self, budgets: "BudgetMap") -> bool:
        return all(len(rs) <= budgets.get(v) for v, rs in self._rounds.items())

    def items(self):
        return self._rounds.items()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AbsenceAssignment):
            return NotImplemented
        return self._rounds == other._rounds

    def __hash__(self) -> int:
        return hash(frozenset(self._rounds.items()))

    def __repr__(self) -> str:
        inner = {v: sorted(rs) for v, rs in sorted(self._rounds.items())}
        return f"AbsenceAssignment({inner})"

    def to_json_dict(self) -> dict:
        return {v: sorted(rs) for v, rs in sorted(self._rounds.items())}

    @staticmethod
    def from_json_dict(data: Mapping) -> "AbsenceAssignment":
        try:
            return AbsenceAssignment({str(v): [int(r) for r in rs] for v, rs in data.items()})
        except (TypeError, ValueError, AttributeError) as exc:
            raise ModelError(f"malformed absences JSON: {exc}") from exc


# ---------- BudgetMap ----------

class BudgetMap:
    """Per-vertex allowed-absence counts (nonnegative)."""

    __slots__ = ("_budgets",)

    def __init__(self, budgets: Mapping[Vertex, int]):
        cleaned: Dict[Vertex, int] = {}
        for v, t in budgets.items():
            t = int(t)
            if t < 0:
                raise ModelError(f"budget for {v!r} must be >= 0")
            cleaned[v] = t
        self._budgets = cleaned

    @staticmethod
    def constant(g: Multigraph, t: int) -> "BudgetMap":
        return BudgetMap({v: t for v in g.vertices})

    def get(self, v: Vertex) -> int:
        return self._budgets.get(v, 0)

    def support(self) -> FrozenSet[Vertex]:
        return frozenset(v for v, t in self._budgets.items() if t > 0)

    def decremented(self, absent: Iterable[Vertex]) -> "BudgetMap":
        out = dict(self._budgets)
        for v in absent:
            if out.get(v, 0) <= 0:
                raise ModelError(f"budget of {v!r} is exhausted")
            out[v] -= 1
        return BudgetMap(out)

    def items(self):
        return self._budgets.items()

    def total(self) -> int:
        return sum(self._budgets.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BudgetMap):
            return NotImplemented
        keys = set(self._budgets) | set(other._budgets)
        return all(self.get(v) == other.get(v) for v in keys)

    def __repr__(self) -> str:
        return f"BudgetMap({dict(sorted(self._budgets.items()))})"

    def to_json_dict(self) -> dict:
        return dict(sorted(self._budgets.items()))

    @staticmethod
    def from_json_dict(g: Multigraph, data) -> "BudgetMap":
        if isinstance(data, int):
            return BudgetMap.constant(g, data)
        try:
            budgets = {str(v): int(t) for v, t in data.items()}
        except (TypeError, ValueError, AttributeError) as exc:
            raise ModelError(f"malformed budgets JSON: {exc}") from exc
        for v in budgets:
            if not g.has_vertex(v):
                raise ModelError(f"budget for undeclared vertex {v!r}")
        return BudgetMap(budgets)


# ---------- Schedule ----------

@dataclass(frozen=True)
class Round:
    absent: FrozenSet[Vertex]
    matches: Tuple[EdgePair, ...]


@dataclass(frozen=True)
class Schedule:
    """Ordered rounds, each an absentee set plus a set of matches."""

    rounds: Tuple[Round, ...]
    graph: Optional[Multigraph] = field(default=None, compare=False)

    @staticmethod
    def from_rounds(rounds: Iterable[Tuple[Iterable[Vertex], Iterable[EdgePair]]],
                    graph: Optional[Multigraph] = None) -> "Schedule":
        rs = tuple(Round(frozenset(a), tuple((u, v) for u, v in ms)) for a, ms in rounds)
        return Schedule(rounds=rs, graph=graph)

    @staticmethod
    def from_coloring(g: Multigraph, colors: Sequence[int],
                      absences: Optional[AbsenceAssignment] = None) -> "Schedule":
        """Rounds 1..max(colors); round i holds the edges colored i and the
        absentees that the assignment declares for round i."""
        m = max(colors, default=0)
        rounds = []
        for i in range(1, m + 1):
            matches = tuple(g.edges[k] for k in range(g.num_edges()) if colors[k] == i)
            absent = absences.absent_in_round(i) if absences is not None else frozenset()
            rounds.append(Round(frozenset(absent), matches))
        return Schedule(rounds=tuple(rounds), graph=g)

    def num_rounds(self) -> int:
        return len(self.rounds)

    def scheduled_multiset(self) -> Dict[EdgePair, int]:
        counts: Dict[EdgePair, int] = {}
        for rnd in self.rounds:
            for e in rnd.matches:
                counts[e] = counts.get(e, 0) + 1
        return counts

    def to_json_dict(self) -> dict:
        return {"rounds": [{"absent": sorted(r.absent),
                            "matches": [[u, v] for u, v in r.matches]}
                           for r in self.rounds]}

    @staticmethod
    def from_json_dict(data: Mapping, graph: Optional[Multigraph] = None) -> "Schedule":
        try:
            rounds = [(r.get("absent", []), [(str(u), str(v)) for u, v in r.get("matches", [])])
                      for r in data["rounds"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"malformed schedule JSON: {exc}") from exc
        return Schedule.from_rounds(rounds, graph=graph)

    # -- timetable export --

    def timetable_rows(self, g: Multigraph) -> List[List[str]]:
        """One row per player, one cell per round: opponent, "free" or "ABSENT"."""
        header = ["player"] + [f"round {i}" for i in range(1, self.num_rounds() + 1)]
        rows = [header]
        for v in g.vertices:
            cells = [v]
            for rnd in self.rounds:
                if v in rnd.absent:
                    cells.append("ABSENT")
                    continue
                opponent = "free"
                for (a, b) in rnd.matches:
                    if a == v:
                        opponent = b
                        break
                    if b == v:
                        opponent = a
                        break
                cells.append(opponent)
            rows.append(cells)
        return rows

    def timetable_csv(self, g: Multigraph) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(self.timetable_rows(g))
        return buf.getvalue()


# ---------- Verification ----------

@dataclass(frozen=True)
class Violation:
    kind: str
    round: Optional[int]
    detail: str

    def __str__(self) -> str:
        where = f"round {self.round}: " if self.round is not None else ""
        return f"{self.kind}: {where}{self.detail}"


def verify_schedule(g: Multigraph, c: AbsenceAssignment, s: Schedule) -> List[Violation]:
    """Check a schedule against a graph and an absence assignment.

    Returns a list of violations; an empty list means the schedule is a valid
    complete tournament plan: every round is a matching of edges of g, no
    match touches a forbidden or recorded-absent player, and every edge of g
    is played exactly once.
    """
    violations: List[Violation] = []
    total = g.edge_multiset()
    available = dict(total)
    for i, rnd in enumerate(s.rounds, start=1):
        used_vertices: Set[Vertex] = set()
        forbidden_now = c.absent_in_round(i)
        for e in rnd.matches:
            u, v = e
            if not (g.has_vertex(u) and g.has_vertex(v)):
                violations.append(Violation("unknown-edge", i, f"match {u}-{v} is not an edge of the graph"))
            else:
                key = (u, v) if g.vertex_index(u) <= g.vertex_index(v) else (v, u)
                if key not in total:
                    violations.append(Violation("unknown-edge", i, f"match {u}-{v} is not an edge of the graph"))
                elif available[key] <= 0:
                    violations.append(Violation("duplicate-edge", i, f"match {u}-{v} scheduled more often than it exists"))
                else:
                    available[key] -= 1
            if u in used_vertices or v in used_vertices:
                violations.append(Violation("overlap", i, f"match {u}-{v} shares a player with another match"))
            used_vertices.update((u, v))
            for w in (u, v):
                if w in forbidden_now:
                    violations.append(Violation("forbidden-round", i, f"player {w} must not play in this round but is matched {u}-{v}"))
                if w in rnd.absent:
                    violations.append(Violation("absent-player", i, f"player {w} is recorded absent but is matched {u}-{v}"))
    for e, left in sorted(available.items()):
        if left > 0:
            violations.append(Violation("uncovered-edge", None, f"match {e[0]}-{e[1]} never scheduled ({left} occurrence(s) missing)"))
    return violations


def absence_log_to_assignment(s: Schedule) -> AbsenceAssignment:
    """Reconstruct the per-player forbidden-round sets from a schedule's
    recorded absentee sets."""
    rounds: Dict[Vertex, Set[int]] = {}
    for i, rnd in enumerate(s.rounds, start=1):
        for v in rnd.absent:
            rounds.setdefault(v, set()).add(i)
    return AbsenceAssignment(rounds)


# ---------- small JSON helpers ----------

def load_graph_json(text: str) -> Tuple[Multigraph, Optional[BudgetMap]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from exc
    return Multigraph.from_json_dict(data)
