"""Independent brute-force oracles used only by the test suite.

These deliberately avoid the library's search code: colorings are enumerated
with itertools.product and the online game is evaluated straight from its
recursive definition with no move restrictions, so they can arbitrate the
production solvers on tiny instances.
"""

from __future__ import annotations

from itertools import chain, combinations, product
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from matchplan.model import AbsenceAssignment, BudgetMap, Multigraph


def proper(g: Multigraph, colors: Sequence[int]) -> bool:
    for v in g.vertices:
        seen = set()
        for e in g.incident_edges(v):
            if colors[e] in seen:
                return False
            seen.add(colors[e])
    return True


def avoids(g: Multigraph, c: AbsenceAssignment, colors: Sequence[int]) -> bool:
    return all(colors[i] not in c.edge_forbidden(e) for i, e in enumerate(g.edges))


def brute_feasible_level(g: Multigraph, c: AbsenceAssignment, m: int) -> bool:
    for colors in product(range(1, m + 1), repeat=g.num_edges()):
        if proper(g, colors) and avoids(g, c, colors):
            return True
    return False


def brute_chi_prime_c(g: Multigraph, c: AbsenceAssignment, cap: int = 12) -> int:
    if g.num_edges() == 0:
        return 0
    for m in range(1, cap + 1):
        if brute_feasible_level(g, c, m):
            return m
    raise AssertionError(f"no coloring within {cap} rounds")


def brute_chi_prime(g: Multigraph, cap: int = 12) -> int:
    return brute_chi_prime_c(g, AbsenceAssignment({}), cap)


def brute_list_colorable(g: Multigraph, lists: Dict[int, Iterable[int]]) -> bool:
    pools = [sorted(lists[i]) for i in range(g.num_edges())]
    for colors in product(*pools):
        if proper(g, colors):
            return True
    return False


def brute_chi_total(g: Multigraph, cap: int = 10) -> int:
    n = len(g.vertices)
    for m in range(1, cap + 1):
        for vcolors in product(range(1, m + 1), repeat=n):
            if any(vcolors[g.vertex_index(u)] == vcolors[g.vertex_index(v)] for u, v in g.edges):
                continue
            pools = []
            for u, v in g.edges:
                banned = {vcolors[g.vertex_index(u)], vcolors[g.vertex_index(v)]}
                pools.append([col for col in range(1, m + 1) if col not in banned])
            if not g.edges:
                return m
            for ecolors in product(*pools):
                if proper(g, ecolors):
                    return m
    raise AssertionError(f"no total coloring within {cap} colors")


# ---------- unrestricted online game, straight from the definition ----------

def _powerset(items: Sequence) -> Iterable[Tuple]:
    return chain.from_iterable(combinations(items, r) for r in range(len(items) + 1))


def _all_matchings(g: Multigraph, edge_ids: FrozenSet[int]) -> List[FrozenSet[int]]:
    """Every independent edge subset of the given edges, the empty one included."""
    ids = sorted(edge_ids)
    out: List[FrozenSet[int]] = []

    def rec(i: int, used: Set[str], chosen: Tuple[int, ...]) -> None:
        if i == len(ids):
            out.append(frozenset(chosen))
            return
        rec(i + 1, used, chosen)
        u, v = g.edges[ids[i]]
        if u not in used and v not in used:
            used.update((u, v))
            rec(i + 1, used, chosen + (ids[i],))
            used.difference_update((u, v))

    rec(0, set(), ())
    return out


def brute_online_colorable(g: Multigraph, t: BudgetMap, m: int) -> bool:
    """Recursive definition, with no restriction at all on either side's moves."""
    memo: Dict[Tuple[FrozenSet[int], Tuple[int, ...], int], bool] = {}
    vlist = list(g.vertices)

    def wins(remaining: FrozenSet[int], budgets: Tuple[int, ...], rounds: int) -> bool:
        if not remaining:
            return True
        if rounds == 0:
            return False
        key = (remaining, budgets, rounds)
        if key in memo:
            return memo[key]
        supp = [i for i, b in enumerate(budgets) if b > 0]
        result = True
        for absent in _powerset(supp):
            absent_set = {vlist[i] for i in absent}
            playable = frozenset(e for e in remaining
                                 if not (set(g.edges[e]) & absent_set))
            new_budgets = tuple(b - 1 if i in absent else b for i, b in enumerate(budgets))
            if not any(wins(remaining - f, new_budgets, rounds - 1)
                       for f in _all_matchings(g, playable)):
                result = False
                break
        memo[key] = result
        return result

    return wins(frozenset(range(g.num_edges())), tuple(t.get(v) for v in vlist), m)


def brute_chi_ol(g: Multigraph, t: BudgetMap, cap: int = 10) -> int:
    if g.num_edges() == 0:
        return 0
    for m in range(1, cap + 1):
        if brute_online_colorable(g, t, m):
            return m
    raise AssertionError(f"not online colorable within {cap} rounds")
