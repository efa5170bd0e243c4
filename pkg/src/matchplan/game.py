"""Exact solver for the round-by-round scheduling game.

The Organizer must finish all matches within a declared number of rounds; the
Indisposer reveals each round's absentees first, subject to per-player
budgets.  Winnability is decided by memoized search over (remaining matches,
remaining budgets, rounds left); optimal play for both sides is extractable
from the finished search.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .bounds import lb_online, ub_shannon
from .model import BudgetMap, EdgePair, Multigraph, Vertex
from .solvers import SearchBudgetExceeded, chi_prime_value


class GameStateLosing(RuntimeError):
    """Asked for a winning move in a state the Organizer cannot win."""


@dataclass(frozen=True)
class GameState:
    """Position in the scheduling game: matches still to play, remaining
    absence budgets, rounds left on the clock."""

    remaining: FrozenSet[int]  # edge indices into the graph's edge tuple
    budgets: BudgetMap
    rounds_left: int

    @staticmethod
    def initial(g: Multigraph, t: BudgetMap, rounds: int) -> "GameState":
        return GameState(frozenset(range(g.num_edges())), t, rounds)


class GameSolver:
    """Owns the memo table for one graph; shareable across round limits.

    ``restrict_maximal=False`` switches the Organizer's move generation from
    maximal matchings to all matchings (the empty one included) for
    cross-validation on tiny instances.
    """

    def __init__(self, g: Multigraph, restrict_maximal: bool = True,
                 use_canonical: bool = False, node_budget: Optional[int] = None):
        self.g = g
        self.restrict_maximal = restrict_maximal
        self.use_canonical = use_canonical
        self.node_budget = node_budget
        self.nodes = 0
        n = len(g.vertices)
        self.n_vertices = n
        self.full_mask = (1 << g.num_edges()) - 1
        self.touch = [0] * n
        for i, v in enumerate(g.vertices):
            for e in g.incident_edges(v):
                self.touch[i] |= 1 << e
        adj = g.edge_adjacency()
        self.closed_nbhd = [(1 << e) | sum(1 << f for f in adj[e])
                            for e in range(g.num_edges())]
        self._memo: Dict[Tuple[int, Tuple[int, ...], int], bool] = {}
        self._moves_cache: Dict[int, Tuple[int, ...]] = {}
        self._canon_cache: Dict[Tuple[int, Tuple[int, ...]], Tuple[int, Tuple[int, ...]]] = {}
        self._pairs = [(g.vertex_index(u), g.vertex_index(v)) for u, v in g.edges]

    # -- move generation --

    def _maximal_matchings(self, avail: int) -> Tuple[int, ...]:
        cached = self._moves_cache.get(avail)
        if cached is not None:
            return cached
        found = set()
        closed = self.closed_nbhd

        def rec(s: int, chosen: int) -> None:
            if s == 0:
                found.add(chosen)
                return
            e = (s & -s).bit_length() - 1
            cands = s & closed[e]
            while cands:
                bit = cands & -cands
                cands ^= bit
                f = bit.bit_length() - 1
                rec(s & ~closed[f], chosen | bit)

        rec(avail, 0)
        result = tuple(sorted(found, key=lambda m: (-m.bit_count(), m)))
        self._moves_cache[avail] = result
        return result

    def _all_matchings(self, avail: int) -> Tuple[int, ...]:
        key = ~avail  # separate cache namespace from the maximal variant
        cached = self._moves_cache.get(key)
        if cached is not None:
            return cached
        found: List[int] = []

        def rec(s: int, chosen: int) -> None:
            found.append(chosen)
            cands = s
            while cands:
                bit = cands & -cands
                cands ^= bit
                f = bit.bit_length() - 1
                # only extend with higher-index edges to avoid duplicates
                rec(s & ~self.closed_nbhd[f] & ~(bit - 1), chosen | bit)

        rec(avail, 0)
        result = tuple(sorted(found, key=lambda m: (-m.bit_count(), m)))
        self._moves_cache[key] = result
        return result

    def moves(self, avail: int) -> Tuple[int, ...]:
        if self.restrict_maximal:
            return self._maximal_matchings(avail)
        return self._all_matchings(avail)

    # -- canonical forms (optional) --

    def _canonical(self, mask: int, budgets: Tuple[int, ...]):
        key = (mask, budgets)
        cached = self._canon_cache.get(key)
        if cached is not None:
            return cached
        n = self.n_vertices
        pairs = self._pairs
        deg = [0] * n
        m = mask
        while m:
            bit = m & -m
            m ^= bit
            a, b = pairs[bit.bit_length() - 1]
            deg[a] += 1
            deg[b] += 1
        # refine vertex classes by (budget, degree, neighbor class profile)
        labels = [(budgets[i], deg[i]) for i in range(n)]
        for _ in range(n):
            profiles = []
            for i in range(n):
                neigh = []
                mm = mask & self.touch[i]
                while mm:
                    bit = mm & -mm
                    mm ^= bit
                    a, b = pairs[bit.bit_length() - 1]
                    neigh.append(labels[b if a == i else a])
                profiles.append((labels[i], tuple(sorted(neigh))))
            ranks = {p: r for r, p in enumerate(sorted(set(profiles)))}
            new_labels = [ranks[p] for p in profiles]
            if new_labels == labels:
                break
            labels = new_labels
        classes: Dict[int, List[int]] = {}
        for i, lab in enumerate(labels):
            classes.setdefault(lab, []).append(i)
        groups = [classes[lab] for lab in sorted(classes)]
        bases = []
        start = 0
        for group in groups:
            bases.append(start)
            start += len(group)
        best: Optional[Tuple[Tuple[Tuple[int, int], ...], Tuple[int, ...]]] = None
        perm = [0] * n
        edge_pairs = []
        m = mask
        while m:
            bit = m & -m
            m ^= bit
            edge_pairs.append(pairs[bit.bit_length() - 1])

        def assign(gi: int) -> None:
            nonlocal best
            if gi == len(groups):
                mapped = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in edge_pairs))
                buds = [0] * n
                for i in range(n):
                    buds[perm[i]] = budgets[i]
                cand = (mapped, tuple(buds))
                if best is None or cand < best:
                    best = cand
                return
            group = groups[gi]
            base = bases[gi]
            for order in permutations(range(len(group))):
                for src, offset in zip(group, order):
                    perm[src] = base + offset
                assign(gi + 1)

        assign(0)
        assert best is not None
        # the relabeled pair multiset itself is the key: the game value depends
        # only on (remaining matches, budget vector) up to consistent renaming
        self._canon_cache[key] = best
        return best

    # -- the recursion --

    def wins(self, mask: int, budgets: Tuple[int, ...], rounds_left: int) -> bool:
        if mask == 0:
            return True
        if rounds_left <= 0:
            return False
        remaining = mask.bit_count()
        if remaining > rounds_left * (self.n_vertices // 2):
            return False
        active = [i for i in range(self.n_vertices)
                  if budgets[i] > 0 and mask & self.touch[i]]
        if rounds_left >= remaining + sum(budgets[i] for i in active):
            return True
        if self.use_canonical:
            cstate = self._canonical(mask, budgets)
        else:
            cstate = (mask, budgets)
        key = (cstate, rounds_left)
        memo = self._memo
        hit = memo.get(key)
        if hit is not None:
            return hit
        self.nodes += 1
        if self.node_budget is not None and self.nodes > self.node_budget:
            raise SearchBudgetExceeded(self.nodes)
        result = True
        for size in range(len(active), -1, -1):
            for absent in combinations(active, size):
                blocked = 0
                for i in absent:
                    blocked |= self.touch[i]
                avail = mask & ~blocked
                new_budgets = list(budgets)
                for i in absent:
                    new_budgets[i] -= 1
                nb = tuple(new_budgets)
                if not any(self.wins(mask & ~f, nb, rounds_left - 1)
                           for f in self.moves(avail)):
                    result = False
                    break
            if not result:
                break
        memo[key] = result
        return result

    # -- public helpers on GameState --

    def budgets_tuple(self, t: BudgetMap) -> Tuple[int, ...]:
        return tuple(t.get(v) for v in self.g.vertices)

    def state_wins(self, state: GameState) -> bool:
        mask = 0
        for e in state.remaining:
            mask |= 1 << e
        return self.wins(mask, self.budgets_tuple(state.budgets), state.rounds_left)


def organizer_wins(g: Multigraph, state: GameState, *,
                   restrict_maximal: bool = True,
                   use_canonical: bool = False,
                   node_budget: Optional[int] = None) -> bool:
    """Whether the Organizer can certainly finish the remaining matches within
    the state's round budget, per the recursive game definition."""
    solver = GameSolver(g, restrict_maximal=restrict_maximal,
                        use_canonical=use_canonical, node_budget=node_budget)
    return solver.state_wins(state)


@dataclass
class StrategyOracle:
    """Optimal play reconstructed from a finished solve.

    For winning states, maps (state, absentee set) to a matching that keeps
    the win; for losing states, produces a refuting absentee set.
    """

    solver: GameSolver
    rounds: int
    root_budgets: Tuple[int, ...]

    def _mask_of(self, remaining: Iterable[int]) -> int:
        mask = 0
        for e in remaining:
            mask |= 1 << e
        return mask

    def _winning_reply_mask(self, mask: int, budgets: Tuple[int, ...],
                            rounds_left: int, absent_idx: Sequence[int]) -> int:
        solver = self.solver
        if not solver.wins(mask, budgets, rounds_left):
            raise GameStateLosing("no winning move from a losing or overdrawn state")
        new_budgets = list(budgets)
        blocked = 0
        for i in absent_idx:
            if new_budgets[i] <= 0:
                raise ValueError(f"absence by {solver.g.vertices[i]} exceeds its budget")
            new_budgets[i] -= 1
            blocked |= solver.touch[i]
        nb = tuple(new_budgets)
        avail = mask & ~blocked
        for f in solver.moves(avail):
            if solver.wins(mask & ~f, nb, rounds_left - 1):
                return f
        raise GameStateLosing("state was winning but the absentee set admits no reply; "
                              "absences may exceed what the solve accounted for")

    def organizer_move(self, state: GameState, absent: Iterable[Vertex]) -> List[EdgePair]:
        g = self.solver.g
        absent = set(absent)
        unknown = absent - set(g.vertices)
        if unknown:
            raise ValueError(f"unknown vertices in absentee set: {sorted(unknown)}")
        mask = self._mask_of(state.remaining)
        budgets = self.solver.budgets_tuple(state.budgets)
        absent_idx = sorted(g.vertex_index(v) for v in absent)
        f = self._winning_reply_mask(mask, budgets, state.rounds_left, absent_idx)
        return self._edges_of(f)

    def indisposer_refutation(self, state: GameState) -> List[Vertex]:
        g = self.solver.g
        mask = self._mask_of(state.remaining)
        budgets = self.solver.budgets_tuple(state.budgets)
        if self.solver.wins(mask, budgets, state.rounds_left):
            raise ValueError("state is winning for the Organizer; nothing to refute")
        active = [i for i in range(self.solver.n_vertices)
                  if budgets[i] > 0 and mask & self.solver.touch[i]]
        for size in range(len(active), -1, -1):
            for absent in combinations(active, size):
                blocked = 0
                new_budgets = list(budgets)
                for i in absent:
                    blocked |= self.solver.touch[i]
                    new_budgets[i] -= 1
                nb = tuple(new_budgets)
                avail = mask & ~blocked
                if not any(self.solver.wins(mask & ~f, nb, state.rounds_left - 1)
                           for f in self.solver.moves(avail)):
                    return [g.vertices[i] for i in absent]
        raise AssertionError("losing state without refuting absentee set; solver bug")

    def _edges_of(self, f: int) -> List[EdgePair]:
        out = []
        while f:
            bit = f & -f
            f ^= bit
            out.append(self.solver.g.edges[bit.bit_length() - 1])
        return out

    def to_json_dict(self, max_states: int = 20000) -> dict:
        """Reachable winning states with one stored reply per absentee set."""
        g = self.solver.g
        solver = self.solver
        entries: Dict[str, dict] = {}
        seen = set()
        stack = [(solver.full_mask, self.root_budgets, self.rounds)]
        while stack and len(entries) < max_states:
            mask, budgets, rl = stack.pop()
            key = f"{mask:x}/{','.join(map(str, budgets))}/{rl}"
            if key in seen:
                continue
            seen.add(key)
            if mask == 0 or rl <= 0 or not solver.wins(mask, budgets, rl):
                continue
            responses = {}
            active = [i for i in range(solver.n_vertices)
                      if budgets[i] > 0 and mask & solver.touch[i]]
            for size in range(len(active) + 1):
                for absent in combinations(active, size):
                    fmask = self._winning_reply_mask(mask, budgets, rl, absent)
                    vertices = [g.vertices[i] for i in absent]
                    responses[",".join(vertices)] = [[u, v] for u, v in self._edges_of(fmask)]
                    nb = list(budgets)
                    for i in absent:
                        nb[i] -= 1
                    stack.append((mask & ~fmask, tuple(nb), rl - 1))
            entries[key] = responses
        return {"rounds": self.rounds, "states": entries}


def _bits(mask: int) -> List[int]:
    out = []
    while mask:
        bit = mask & -mask
        mask ^= bit
        out.append(bit.bit_length() - 1)
    return out


@dataclass
class OnlineSolveResult:
    value: int
    oracle: StrategyOracle
    nodes: int
    elapsed: float

    def to_json_dict(self) -> dict:
        return {"value": self.value, "nodes": self.nodes, "elapsed": round(self.elapsed, 6)}


def chi_ol_exact(g: Multigraph, t: BudgetMap, *,
                 restrict_maximal: bool = True,
                 use_canonical: bool = False,
                 node_budget: Optional[int] = None) -> OnlineSolveResult:
    """Least round limit under which the Organizer wins against every
    budget-respecting absence pattern.  Ascends from the proven online lower
    bound; the general upper bound caps the ascent."""
    start = time.perf_counter()
    solver = GameSolver(g, restrict_maximal=restrict_maximal,
                        use_canonical=use_canonical, node_budget=node_budget)
    budgets = solver.budgets_tuple(t)
    if g.num_edges() == 0:
        return OnlineSolveResult(0, StrategyOracle(solver, 0, budgets), 0,
                                 time.perf_counter() - start)
    lb = lb_online(g, t, chi_prime_value(g))
    ub = ub_shannon(g, t)
    for m in range(lb, ub + 1):
        if solver.wins(solver.full_mask, budgets, m):
            return OnlineSolveResult(m, StrategyOracle(solver, m, budgets), solver.nodes,
                                     time.perf_counter() - start)
    raise AssertionError("not winnable at the certified upper bound; solver bug")


def play_optimal_round(oracle: StrategyOracle, state: GameState,
                       absent: Iterable[Vertex]) -> List[EdgePair]:
    """A matching that keeps the state winning after the given absences."""
    return oracle.organizer_move(state, absent)
