from __future__ import annotations

import random

import pytest

from matchplan.engine import (
    EnginePlan,
    GreedyEngine,
    LowerBoundAdversary,
    OptimalSmallEngine,
    PaintingEngineAdapter,
    RandomAdversary,
    RoundContext,
    ScriptedAdversary,
    SessionError,
    SessionState,
    SimulationError,
    exhaustive_absence_sets,
    make_engine,
    plan_engine,
    session_advance,
    simulate,
    worst_case,
)
from matchplan.game import GameStateLosing, chi_ol_exact
from matchplan.model import (
    AbsenceAssignment,
    BudgetMap,
    ModelError,
    absence_log_to_assignment,
    build_graph,
    complete_bipartite,
    complete_graph,
    verify_schedule,
)
from matchplan.solvers import chi_prime_value


def ctx_for(g, t, limit=10, remaining=None, played=0):
    remaining = frozenset(range(g.num_edges())) if remaining is None else frozenset(remaining)
    return RoundContext(g, remaining, t, played, limit)


def test_greedy_single_edge():
    g = build_graph(["a", "b"], [("a", "b")])
    moves = GreedyEngine().respond(ctx_for(g, BudgetMap.constant(g, 0)), frozenset())
    assert moves == [0]


def test_greedy_k3_plays_one_match():
    g = complete_graph(3)
    moves = GreedyEngine().respond(ctx_for(g, BudgetMap.constant(g, 1)), frozenset())
    assert len(moves) == 1


def test_greedy_star_plays_one_spoke():
    g = build_graph(["c", "l1", "l2", "l3"], [("c", "l1"), ("c", "l2"), ("c", "l3")])
    moves = GreedyEngine().respond(ctx_for(g, BudgetMap.constant(g, 0)), frozenset())
    assert len(moves) == 1


def test_greedy_is_maximal_and_respects_absences():
    rng = random.Random(53)
    for _ in range(50):
        n = rng.randint(2, 7)
        verts = [f"v{i}" for i in range(n)]
        edges = [tuple(rng.sample(verts, 2)) for _ in range(rng.randint(1, 8))]
        g = build_graph(verts, edges)
        t = BudgetMap({v: rng.randint(0, 2) for v in verts})
        absent = frozenset(v for v in verts if rng.random() < 0.3)
        moves = GreedyEngine().respond(ctx_for(g, t), absent)
        used = set()
        for e in moves:
            u, v = g.edges[e]
            assert not {u, v} & absent
            assert u not in used and v not in used
            used.update((u, v))
        for e in range(g.num_edges()):
            u, v = g.edges[e]
            if e not in moves and not {u, v} & absent:
                assert {u, v} & used, "greedy matching was not maximal"


def test_optimal_engine_keeps_win_on_k3():
    g = complete_graph(3)
    t = BudgetMap.constant(g, 1)
    value = chi_ol_exact(g, t).value
    engine = OptimalSmallEngine(g)
    moves = engine.respond(ctx_for(g, t, limit=value), frozenset())
    assert len(moves) == 1


def test_optimal_engine_raises_below_game_value():
    g = complete_graph(3)
    t = BudgetMap.constant(g, 1)
    engine = OptimalSmallEngine(g)
    with pytest.raises(GameStateLosing):
        engine.respond(ctx_for(g, t, limit=4), frozenset())


def test_optimal_engine_empty_when_done():
    g = complete_graph(3)
    t = BudgetMap.constant(g, 1)
    engine = OptimalSmallEngine(g)
    assert engine.respond(ctx_for(g, t, limit=5, remaining=(), played=1), frozenset()) == []


def test_lower_bound_adversary_script_on_k3():
    g = complete_graph(3)
    t = BudgetMap.constant(g, 1)
    adv = LowerBoundAdversary(g, t)
    ctx1 = ctx_for(g, t, limit=10, played=0)
    ctx2 = ctx_for(g, t, limit=10, played=1)
    assert adv.choose(ctx1) == frozenset()
    assert adv.choose(ctx2) == frozenset()
    remaining = frozenset({0})  # match 1-2 unplayed at round 3
    ctx3 = ctx_for(g, t, limit=10, remaining=remaining, played=2)
    assert adv.choose(ctx3) == {"1"}
    ctx4 = RoundContext(g, remaining, t.decremented(["1"]), 3, 10)
    assert adv.choose(ctx4) == {"2"}
    ctx5 = RoundContext(g, remaining, t.decremented(["1", "2"]), 4, 10)
    assert adv.choose(ctx5) == frozenset()


def test_lower_bound_adversary_needs_constant_positive_budget():
    g = complete_graph(3)
    with pytest.raises(ModelError):
        LowerBoundAdversary(g, BudgetMap({"1": 1, "2": 0, "3": 1}))


def test_scripted_adversary_follows_figure1():
    g = complete_graph(3)
    c = AbsenceAssignment({"1": {3}, "2": {3}, "3": {4}})
    adv = ScriptedAdversary(c)
    adv.validate(g, BudgetMap.constant(g, 1))
    seen = [adv.choose(ctx_for(g, BudgetMap.constant(g, 1), played=i)) for i in range(4)]
    assert seen == [frozenset(), frozenset(), {"1", "2"}, {"3"}]


def test_scripted_adversary_rejects_overbudget_script():
    g = complete_graph(3)
    adv = ScriptedAdversary(AbsenceAssignment({"1": {1, 2}}))
    with pytest.raises(ModelError):
        adv.validate(g, BudgetMap.constant(g, 1))


def test_random_adversary_density_zero_never_absent():
    g = complete_graph(4)
    adv = RandomAdversary(seed=1, density=0.0)
    assert adv.choose(ctx_for(g, BudgetMap.constant(g, 2))) == frozenset()


def test_exhaustive_absences_k2_unit_budget():
    g = build_graph(["u", "v"], [("u", "v")])
    sets = list(exhaustive_absence_sets(ctx_for(g, BudgetMap.constant(g, 1))))
    assert sorted(map(sorted, sets)) == [[], ["u"], ["u", "v"], ["v"]]


def test_simulate_greedy_vs_lower_bound_on_k3():
    g = complete_graph(3)
    t = BudgetMap.constant(g, 1)
    result = simulate(g, t, GreedyEngine(), LowerBoundAdversary(g, t), limit=5)
    assert result.completed and result.rounds_used == 5
    s = result.schedule
    assert verify_schedule(g, absence_log_to_assignment(s), s) == []


def test_simulate_zero_budgets_completes_quickly():
    rng = random.Random(59)
    for _ in range(20):
        n = rng.randint(2, 6)
        verts = [f"v{i}" for i in range(n)]
        edges = [tuple(rng.sample(verts, 2)) for _ in range(rng.randint(1, 7))]
        g = build_graph(verts, edges)
        t = BudgetMap.constant(g, 0)
        limit = chi_prime_value(g) + g.num_edges()
        result = simulate(g, t, GreedyEngine(), RandomAdversary(1, 0.0), limit=limit)
        assert result.completed


def test_simulate_transcripts_verify():
    rng = random.Random(61)
    for _ in range(25):
        n = rng.randint(2, 6)
        verts = [f"v{i}" for i in range(n)]
        edges = [tuple(rng.sample(verts, 2)) for _ in range(rng.randint(1, 7))]
        g = build_graph(verts, edges)
        t = BudgetMap({v: rng.randint(0, 1) for v in verts})
        result = simulate(g, t, GreedyEngine(), RandomAdversary(7, 0.4), limit=25)
        s = result.schedule
        violations = [v for v in verify_schedule(g, absence_log_to_assignment(s), s)
                      if v.kind != "uncovered-edge"]
        assert violations == []
        if result.completed:
            assert verify_schedule(g, absence_log_to_assignment(s), s) == []


def test_simulate_rejects_invalid_engine():
    class BrokenEngine:
        name = "broken"

        def respond(self, ctx, absent):
            return [0, 1]  # overlapping on K3

    g = complete_graph(3)
    with pytest.raises(SimulationError):
        simulate(g, BudgetMap.constant(g, 0), BrokenEngine(), RandomAdversary(1, 0.0), limit=5)


def test_optimal_vs_exhaustive_matches_game_value_k3_k4():
    for n in (3, 4):
        g = complete_graph(n)
        t = BudgetMap.constant(g, 1)
        value = chi_ol_exact(g, t).value
        plan = plan_engine(g, t)
        assert plan.name == "optimal" and plan.limit == value
        report = worst_case(g, t, plan.engine, value)
        assert report.all_completed and report.rounds == value
        # one round fewer is not enough for any engine: the game is lost
        engine = OptimalSmallEngine(g)
        with pytest.raises(GameStateLosing):
            worst_case(g, t, engine, value - 1)


def test_plan_engine_policy():
    gb = complete_bipartite(2, 3)
    plan = plan_engine(gb, BudgetMap.constant(gb, 1))
    assert plan.name == "painting"
    g = complete_graph(4)
    plan = plan_engine(g, BudgetMap.constant(g, 1))
    assert plan.name == "optimal" and plan.limit == 5
    forced = make_engine("greedy", g, BudgetMap.constant(g, 1))
    assert forced.name == "greedy" and forced.limit == 6


def test_session_lifecycle_and_budget_enforcement():
    g = complete_graph(4)
    t = BudgetMap.constant(g, 1)
    plan = plan_engine(g, t)
    state = SessionState.create(g, t, "online", plan.limit, plan.name)
    state, pairs = session_advance(state, plan.engine, [])
    assert len(pairs) == 2
    state, _ = session_advance(state, plan.engine, ["1"])
    with pytest.raises(SessionError):
        session_advance(state, plan.engine, ["1"])  # budget exhausted
    with pytest.raises(ModelError):
        session_advance(state, plan.engine, ["zz"])
    while not state.finished:
        state, _ = session_advance(state, plan.engine, [])
    assert state.finished
    state.check_replay()
    with pytest.raises(SessionError):
        session_advance(state, plan.engine, [])


def test_budgets_never_negative_in_sessions():
    g = complete_graph(3)
    t = BudgetMap.constant(g, 1)
    plan = plan_engine(g, t)
    state = SessionState.create(g, t, "online", plan.limit, plan.name)
    state, _ = session_advance(state, plan.engine, ["1", "2"])
    assert state.budgets.get("1") == 0 and state.budgets.get("2") == 0
    assert min(state.budgets.get(v) for v in g.vertices) >= 0
