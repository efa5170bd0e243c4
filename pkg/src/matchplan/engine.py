"""Organizer engines, Indisposer adversaries, the simulation harness, and the
live-session state machine behind the CLI and the HTTP service."""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from .bipartite import NotBipartiteError, PaintingEngine, detect_bipartition
from .bounds import ub_shannon
from .game import GameSolver, GameStateLosing
from .model import (
    AbsenceAssignment,
    BudgetMap,
    EdgePair,
    ModelError,
    Multigraph,
    Round,
    Schedule,
    Vertex,
    absence_log_to_assignment,
    verify_schedule,
)
from .solvers import SearchBudgetExceeded, chi_prime_value


class SimulationError(RuntimeError):
    """An engine emitted an invalid matching (an engine bug, never repaired)."""


class SessionError(RuntimeError):
    """Invalid live-session operation (finished session, budget violation...)."""


# ---------- round context shared by engines and adversaries ----------

@dataclass(frozen=True)
class RoundContext:
    graph: Multigraph
    remaining: FrozenSet[int]
    budgets: BudgetMap
    rounds_played: int
    limit: int

    @property
    def rounds_left(self) -> int:
        return self.limit - self.rounds_played

    @property
    def round_index(self) -> int:
        return self.rounds_played + 1

    def remaining_degree(self, v: Vertex) -> int:
        return sum(1 for e in self.graph.incident_edges(v) if e in self.remaining)


# ---------- engines ----------

class GreedyEngine:
    """Maximal matching among playable matches, most urgent first: endpoints
    with little absence budget left, then busy endpoints."""

    name = "greedy"

    def respond(self, ctx: RoundContext, absent: FrozenSet[Vertex]) -> List[int]:
        g = ctx.graph

        def urgency(e: int) -> tuple:
            u, v = g.edges[e]
            bu, bv = ctx.budgets.get(u), ctx.budgets.get(v)
            deg = ctx.remaining_degree(u) + ctx.remaining_degree(v)
            return (min(bu, bv), bu + bv, -deg, e)

        chosen: List[int] = []
        used: Set[Vertex] = set(absent)
        for e in sorted(ctx.remaining, key=urgency):
            u, v = g.edges[e]
            if u in used or v in used:
                continue
            chosen.append(e)
            used.update((u, v))
        return chosen


class OptimalSmallEngine:
    """Plays a matching that keeps the position winning, per the exact game
    solver.  Only meaningful while the position is winning for the session's
    declared round limit."""

    name = "optimal"

    def __init__(self, g: Multigraph, use_canonical: bool = False,
                 node_budget: Optional[int] = None):
        self.solver = GameSolver(g, use_canonical=use_canonical, node_budget=node_budget)

    def respond(self, ctx: RoundContext, absent: FrozenSet[Vertex]) -> List[int]:
        solver = self.solver
        g = ctx.graph
        mask = 0
        for e in ctx.remaining:
            mask |= 1 << e
        budgets = solver.budgets_tuple(ctx.budgets)
        if not solver.wins(mask, budgets, ctx.rounds_left):
            raise GameStateLosing(
                f"position not winnable within {ctx.rounds_left} more rounds")
        blocked = 0
        new_budgets = list(budgets)
        for v in absent:
            i = g.vertex_index(v)
            new_budgets[i] -= 1
            blocked |= solver.touch[i]
        nb = tuple(new_budgets)
        for f in solver.moves(mask & ~blocked):
            if solver.wins(mask & ~f, nb, ctx.rounds_left - 1):
                return [bit.bit_length() - 1 for bit in _iter_bits(f)]
        raise GameStateLosing("no reply preserves the win; absences exceeded the solve")


class PaintingEngineAdapter:
    """Bridges the bipartite kernel engine to the common round interface."""

    name = "painting"

    def __init__(self, g: Multigraph):
        self.inner = PaintingEngine(g)

    def respond(self, ctx: RoundContext, absent: FrozenSet[Vertex]) -> List[int]:
        return self.inner.respond(ctx.remaining, absent)


def _iter_bits(mask: int) -> Iterator[int]:
    while mask:
        bit = mask & -mask
        mask ^= bit
        yield bit


# ---------- adversaries ----------

class LowerBoundAdversary:
    """Everyone shows up until the absence-free optimum round; then the two
    players of one still-unplayed match dodge alternately until their budgets
    run dry, which stalls that match for two extra budgets' worth of rounds."""

    name = "lower-bound"

    def __init__(self, g: Multigraph, t: BudgetMap):
        values = {t.get(v) for v in g.vertices}
        if len(values) != 1 or values == {0}:
            raise ModelError("lower-bound adversary needs a constant positive budget")
        self.t = values.pop()
        self.chi_prime = chi_prime_value(g)
        self._target: Optional[EdgePair] = None

    def choose(self, ctx: RoundContext) -> FrozenSet[Vertex]:
        i = ctx.round_index
        if i < self.chi_prime:
            return frozenset()
        if self._target is None:
            unplayed = sorted(ctx.remaining)
            if not unplayed:
                return frozenset()
            self._target = ctx.graph.edges[unplayed[0]]
        u, v = self._target
        if i < self.chi_prime + self.t:
            culprit = u
        elif i < self.chi_prime + 2 * self.t:
            culprit = v
        else:
            return frozenset()
        if ctx.budgets.get(culprit) > 0:
            return frozenset({culprit})
        return frozenset()


class ScriptedAdversary:
    """Plays a pre-fixed absence assignment round by round."""

    name = "scripted"

    def __init__(self, c: AbsenceAssignment):
        self.c = c

    def validate(self, g: Multigraph, t: BudgetMap) -> None:
        if not self.c.is_t_labeling(t):
            raise ModelError("scripted absences exceed the session budgets")
        for v in self.c.vertices():
            if not g.has_vertex(v):
                raise ModelError(f"scripted absence for unknown player {v!r}")

    def choose(self, ctx: RoundContext) -> FrozenSet[Vertex]:
        return self.c.absent_in_round(ctx.round_index)


class RandomAdversary:
    """Budgeted players flip a seeded coin each round."""

    name = "random"

    def __init__(self, seed: int, density: float):
        if not 0.0 <= density <= 1.0:
            raise ModelError("density must lie in [0, 1]")
        self.rng = random.Random(seed)
        self.density = density

    def choose(self, ctx: RoundContext) -> FrozenSet[Vertex]:
        return frozenset(v for v in sorted(ctx.budgets.support())
                         if self.rng.random() < self.density)


def exhaustive_absence_sets(ctx: RoundContext) -> Iterator[FrozenSet[Vertex]]:
    """All budget-respecting absentee sets that can matter this round: subsets
    of the budgeted players still involved in unplayed matches."""
    active = sorted(v for v in ctx.budgets.support()
                    if any(e in ctx.remaining for e in ctx.graph.incident_edges(v)))
    for size in range(len(active) + 1):
        for subset in combinations(active, size):
            yield frozenset(subset)


# ---------- the harness ----------

@dataclass
class SimulationResult:
    schedule: Schedule
    completed: bool
    rounds_used: int

    def to_json_dict(self) -> dict:
        return {"completed": self.completed, "rounds": self.rounds_used,
                "schedule": self.schedule.to_json_dict()}


def _validated_matching(g: Multigraph, remaining: FrozenSet[int],
                        absent: FrozenSet[Vertex], matching: Sequence[int]) -> None:
    used: Set[Vertex] = set()
    for e in matching:
        if e not in remaining:
            raise SimulationError(f"engine scheduled unavailable match index {e}")
        u, v = g.edges[e]
        if u in absent or v in absent:
            raise SimulationError(f"engine scheduled {u}-{v} despite an absence")
        if u in used or v in used:
            raise SimulationError(f"engine scheduled overlapping matches at {u}/{v}")
        used.update((u, v))


def simulate(g: Multigraph, t: BudgetMap, engine, adversary,
             limit: int) -> SimulationResult:
    """Run engine versus adversary for at most ``limit`` rounds; every round
    is validated and the transcript replays deterministically."""
    if isinstance(adversary, ScriptedAdversary):
        adversary.validate(g, t)
    remaining: FrozenSet[int] = frozenset(range(g.num_edges()))
    budgets = t
    rounds: List[Tuple[FrozenSet[Vertex], List[EdgePair]]] = []
    while remaining and len(rounds) < limit:
        ctx = RoundContext(g, remaining, budgets, len(rounds), limit)
        absent = frozenset(adversary.choose(ctx))
        overdrawn = [v for v in absent if budgets.get(v) <= 0]
        if overdrawn:
            raise SimulationError(f"adversary overdrew budgets of {overdrawn}")
        matching = engine.respond(ctx, absent)
        _validated_matching(g, remaining, absent, matching)
        rounds.append((absent, [g.edges[e] for e in sorted(matching)]))
        remaining = remaining - frozenset(matching)
        budgets = budgets.decremented(absent)
    schedule = Schedule.from_rounds(rounds, graph=g)
    return SimulationResult(schedule, completed=not remaining, rounds_used=len(rounds))


@dataclass
class WorstCaseReport:
    rounds: int            # worst rounds used over all absence branches
    all_completed: bool
    branches: int


def worst_case(g: Multigraph, t: BudgetMap, engine, limit: int) -> WorstCaseReport:
    """Exhaustively drive one deterministic engine against every
    budget-respecting absence pattern, memoizing on reached positions."""
    memo: Dict[Tuple[FrozenSet[int], Tuple[int, ...], int], Tuple[int, bool]] = {}
    branches = 0

    def budgets_key(b: BudgetMap) -> Tuple[int, ...]:
        return tuple(b.get(v) for v in g.vertices)

    def rec(remaining: FrozenSet[int], budgets: BudgetMap, played: int) -> Tuple[int, bool]:
        nonlocal branches
        if not remaining:
            return 0, True
        if played >= limit:
            return 0, False
        key = (remaining, budgets_key(budgets), played)
        hit = memo.get(key)
        if hit is not None:
            return hit
        ctx = RoundContext(g, remaining, budgets, played, limit)
        worst_rounds, all_ok = 0, True
        for absent in exhaustive_absence_sets(ctx):
            branches += 1
            matching = engine.respond(ctx, absent)
            _validated_matching(g, remaining, absent, matching)
            sub, ok = rec(remaining - frozenset(matching),
                          budgets.decremented(absent), played + 1)
            worst_rounds = max(worst_rounds, 1 + sub)
            all_ok = all_ok and ok
        memo[key] = (worst_rounds, all_ok)
        return memo[key]

    rounds, ok = rec(frozenset(range(g.num_edges())), t, 0)
    return WorstCaseReport(rounds=rounds, all_completed=ok, branches=branches)


# ---------- live sessions ----------

@dataclass(frozen=True)
class SessionState:
    """Replayable state of one live tournament."""

    graph: Multigraph
    initial_budgets: BudgetMap
    mode: str  # "online" or "prefixed"
    limit: int
    engine_name: str
    transcript: Tuple[Round, ...] = ()
    remaining: FrozenSet[int] = frozenset()
    budgets: BudgetMap = None  # type: ignore[assignment]

    @staticmethod
    def create(g: Multigraph, t: BudgetMap, mode: str, limit: int,
               engine_name: str) -> "SessionState":
        return SessionState(graph=g, initial_budgets=t, mode=mode, limit=limit,
                            engine_name=engine_name, transcript=(),
                            remaining=frozenset(range(g.num_edges())), budgets=t)

    @property
    def finished(self) -> bool:
        return not self.remaining

    @property
    def rounds_played(self) -> int:
        return len(self.transcript)

    def context(self) -> RoundContext:
        return RoundContext(self.graph, self.remaining, self.budgets,
                            self.rounds_played, self.limit)

    def schedule(self) -> Schedule:
        return Schedule(rounds=self.transcript, graph=self.graph)

    def check_replay(self) -> None:
        s = self.schedule()
        problems = [v for v in verify_schedule(self.graph, absence_log_to_assignment(s), s)
                    if v.kind != "uncovered-edge"]
        if problems:
            raise SessionError("transcript does not verify: " + str(problems[0]))


def session_advance(state: SessionState, engine, absent: Iterable[Vertex]) -> Tuple[SessionState, List[EdgePair]]:
    """Append one round: validate the absences, let the engine answer, verify
    the matching and produce the successor state."""
    if state.finished:
        raise SessionError("session is already finished")
    absent = frozenset(absent)
    for v in absent:
        if not state.graph.has_vertex(v):
            raise ModelError(f"unknown player {v!r}")
        if state.budgets.get(v) <= 0:
            raise SessionError(f"player {v} has no absences left")
    ctx = state.context()
    matching = engine.respond(ctx, absent)
    _validated_matching(state.graph, state.remaining, absent, matching)
    pairs = [state.graph.edges[e] for e in sorted(matching)]
    new_state = replace(
        state,
        transcript=state.transcript + (Round(absent, tuple(pairs)),),
        remaining=state.remaining - frozenset(matching),
        budgets=state.budgets.decremented(absent),
    )
    return new_state, pairs


# ---------- engine selection policy ----------

@dataclass
class EnginePlan:
    engine: object
    name: str
    limit: int
    note: str


def plan_engine(g: Multigraph, t: BudgetMap, requested: Optional[str] = None,
                game_node_budget: int = 2_000_000) -> EnginePlan:
    """Session policy: bipartite graphs get the painting engine, instances the
    game solver can afford get optimal play, everything else greedy.  The
    declared round limit is the engine's own guarantee, never more than the
    general upper bound."""
    from .game import chi_ol_exact  # local import to avoid cycle at module load

    if g.num_edges() == 0:
        return EnginePlan(GreedyEngine(), "greedy", 0, "edgeless")
    shannon = ub_shannon(g, t)
    if requested in (None, "painting"):
        try:
            adapter = PaintingEngineAdapter(g)
            limit = adapter.inner.declared_bound(t)
            return EnginePlan(adapter, "painting", limit,
                              f"bipartite kernel engine ({adapter.inner.orientation.kind} orientation)")
        except NotBipartiteError:
            if requested == "painting":
                raise
    if requested in (None, "optimal"):
        try:
            solved = chi_ol_exact(g, t, node_budget=game_node_budget)
            engine = OptimalSmallEngine(g)
            engine.solver = solved.oracle.solver
            return EnginePlan(engine, "optimal", solved.value,
                              f"exact game value {solved.value}")
        except SearchBudgetExceeded:
            if requested == "optimal":
                raise
    return EnginePlan(GreedyEngine(), "greedy", shannon, "fallback heuristic")


def make_engine(name: str, g: Multigraph, t: BudgetMap) -> EnginePlan:
    if name == "greedy":
        return EnginePlan(GreedyEngine(), "greedy", ub_shannon(g, t) if g.num_edges() else 0,
                          "requested")
    if name in ("optimal", "painting"):
        return plan_engine(g, t, requested=name)
    if name == "auto":
        return plan_engine(g, t)
    raise ModelError(f"unknown engine {name!r}")
