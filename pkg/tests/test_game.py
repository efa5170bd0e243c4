from __future__ import annotations

import random

import pytest

from matchplan.bounds import lb_online, ub_shannon
from matchplan.game import (
    GameSolver,
    GameState,
    GameStateLosing,
    StrategyOracle,
    chi_ol_exact,
    organizer_wins,
    play_optimal_round,
)
from matchplan.model import BudgetMap, build_graph, complete_graph
from matchplan.solvers import SearchBudgetExceeded, chi_prime_value, chi_t_exact

from oracles import brute_chi_ol, brute_online_colorable


def c4() -> "Multigraph":
    return build_graph(["a", "b", "c", "d"], [("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")])


def random_small(rng: random.Random):
    n = rng.randint(2, 5)
    verts = [f"v{i}" for i in range(n)]
    edges = [tuple(rng.sample(verts, 2)) for _ in range(rng.randint(1, 5))]
    return build_graph(verts, edges)


def test_empty_board_is_won_at_zero_rounds():
    g = complete_graph(3)
    state = GameState(frozenset(), BudgetMap.constant(g, 3), 0)
    assert organizer_wins(g, state)


def test_k3_unit_budget_needs_five_rounds():
    g = complete_graph(3)
    t = BudgetMap.constant(g, 1)
    assert not organizer_wins(g, GameState.initial(g, t, 4))
    assert organizer_wins(g, GameState.initial(g, t, 5))


def test_chi_ol_small_complete_graphs():
    for n, expected in ((3, 5), (4, 5)):
        g = complete_graph(n)
        assert chi_ol_exact(g, BudgetMap.constant(g, 1)).value == expected


def test_chi_ol_zero_budget_is_chromatic_index():
    rng = random.Random(61)
    for _ in range(10):
        g = random_small(rng)
        assert chi_ol_exact(g, BudgetMap.constant(g, 0)).value == chi_prime_value(g)


def test_chi_ol_c4_unit_budget():
    g = c4()
    assert chi_ol_exact(g, BudgetMap.constant(g, 1)).value == 4


def test_chi_ol_matches_raw_definition():
    rng = random.Random(67)
    for _ in range(25):
        g = random_small(rng)
        t = BudgetMap({v: rng.randint(0, 1) for v in g.vertices})
        assert chi_ol_exact(g, t).value == brute_chi_ol(g, t)


def test_move_restrictions_agree_with_unrestricted_search():
    rng = random.Random(71)
    for _ in range(15):
        g = random_small(rng)
        t = BudgetMap({v: rng.randint(0, 1) for v in g.vertices})
        value = chi_ol_exact(g, t).value
        for m in (value - 1, value):
            if m < 0:
                continue
            a = GameSolver(g, restrict_maximal=True)
            b = GameSolver(g, restrict_maximal=False)
            c = GameSolver(g, restrict_maximal=True, use_canonical=True)
            bt = a.budgets_tuple(t)
            raw = brute_online_colorable(g, t, m)
            assert a.wins(a.full_mask, bt, m) == raw
            assert b.wins(b.full_mask, bt, m) == raw
            assert c.wins(c.full_mask, bt, m) == raw


def test_winnability_monotone_under_edge_removal():
    # Winning with more matches left implies winning with a subset, at equal
    # budgets and rounds; exercised exhaustively on small instances.
    rng = random.Random(73)
    for _ in range(10):
        g = random_small(rng)
        t = BudgetMap({v: rng.randint(0, 1) for v in g.vertices})
        solver = GameSolver(g)
        bt = solver.budgets_tuple(t)
        m = chi_ol_exact(g, t).value
        full = solver.full_mask
        for sub in range(full + 1):
            if solver.wins(full, bt, m):
                assert solver.wins(sub, bt, m) or not (sub & full) == sub
                assert solver.wins(sub & full, bt, m)


def test_chi_ol_at_least_chi_t_and_within_bounds():
    rng = random.Random(79)
    for _ in range(12):
        g = random_small(rng)
        t = BudgetMap({v: rng.randint(0, 1) for v in g.vertices})
        ol = chi_ol_exact(g, t).value
        pre, _ = chi_t_exact(g, t)
        assert ol >= pre.value
        assert lb_online(g, t, chi_prime_value(g)) <= ol <= ub_shannon(g, t)


def test_oracle_round_play_keeps_the_win():
    g = complete_graph(3)
    t = BudgetMap.constant(g, 1)
    result = chi_ol_exact(g, t)
    state = GameState.initial(g, t, result.value)
    move = play_optimal_round(result.oracle, state, absent=())
    assert len(move) == 1
    played = next(i for i, e in enumerate(g.edges) if e == move[0])
    successor = GameState(state.remaining - {played}, t, state.rounds_left - 1)
    assert organizer_wins(g, successor)


def test_oracle_terminal_state_returns_empty_matching():
    g = complete_graph(3)
    t = BudgetMap.constant(g, 1)
    result = chi_ol_exact(g, t)
    terminal = GameState(frozenset(), t, 1)
    assert play_optimal_round(result.oracle, terminal, absent=()) == []


def test_oracle_losing_state_raises():
    g = complete_graph(3)
    t = BudgetMap.constant(g, 1)
    result = chi_ol_exact(g, t)
    losing = GameState.initial(g, t, 4)
    with pytest.raises(GameStateLosing):
        play_optimal_round(result.oracle, losing, absent=())


def test_oracle_refutation_on_losing_state():
    g = complete_graph(3)
    t = BudgetMap.constant(g, 1)
    result = chi_ol_exact(g, t)
    losing = GameState.initial(g, t, 4)
    refute = result.oracle.indisposer_refutation(losing)
    assert all(v in g.vertices for v in refute)


def test_oracle_full_playthrough_against_every_absence_pattern():
    # Walk the oracle against an exhaustive adversary: the game must always
    # finish within the solved number of rounds.
    g = complete_graph(3)
    t = BudgetMap.constant(g, 1)
    result = chi_ol_exact(g, t)
    solver = result.oracle.solver

    def walk(mask, budgets, rl):
        if mask == 0:
            return
        assert rl > 0, "ran out of rounds against some absence pattern"
        active = [i for i in range(solver.n_vertices)
                  if budgets[i] > 0 and mask & solver.touch[i]]
        from itertools import combinations
        for size in range(len(active) + 1):
            for absent in combinations(active, size):
                f = result.oracle._winning_reply_mask(mask, budgets, rl, absent)
                nb = list(budgets)
                for i in absent:
                    nb[i] -= 1
                walk(mask & ~f, tuple(nb), rl - 1)

    walk(solver.full_mask, result.oracle.root_budgets, result.value)


def test_strategy_export_contains_root():
    g = complete_graph(3)
    t = BudgetMap.constant(g, 1)
    result = chi_ol_exact(g, t)
    data = result.oracle.to_json_dict(max_states=500)
    assert data["rounds"] == 5
    root_key = f"{(1 << 3) - 1:x}/1,1,1/5"
    assert root_key in data["states"]
    assert "" in data["states"][root_key]


def test_node_budget_enforced():
    g = complete_graph(5)
    t = BudgetMap.constant(g, 1)
    with pytest.raises(SearchBudgetExceeded):
        chi_ol_exact(g, t, node_budget=5)
