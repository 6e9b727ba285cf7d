import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timedparity.parity import (
    FiniteParityGame,
    LiftingBudget,
    MalformedGame,
    Solution,
    attractor,
    certify_partition,
    solve_spm,
    solve_zielonka,
    strategy_violation,
    verify_strategy,
)

from conftest import brute_force_win1, random_parity_game


def test_single_states():
    for p in range(4):
        g = FiniteParityGame([1], [p], [[0]])
        assert solve_zielonka(g).win1 == ({0} if p % 2 == 0 else set())
        assert solve_spm(g) == solve_zielonka(g).win1


def test_choice_between_loops():
    # state 0 (player 1) picks the even or the odd self-loop
    g = FiniteParityGame([1, 2, 2], [0, 2, 1], [[1, 2], [1], [2]])
    sol = solve_zielonka(g)
    assert sol.win1 == {0, 1}
    assert sol.strategy1[0] == 1
    assert solve_spm(g) == {0, 1}
    assert verify_strategy(g, sol)
    g2 = FiniteParityGame([2, 2, 2], [0, 2, 1], [[1, 2], [1], [2]])
    assert solve_zielonka(g2).win1 == {1}


def test_attractor():
    g = FiniteParityGame([1, 2, 1, 2], [0] * 4, [[1, 3], [2, 3], [2], [3]])
    strat = {}
    assert attractor(g, 1, {2}, strategy=strat) == {2}  # player 2 escapes to 3 from 0 and 1
    assert attractor(g, 2, {3}) == {0, 1, 3}
    assert attractor(g, 1, {1}, strategy=strat) == {0, 1}
    assert strat[0] == 1


def test_check_rejects_dead_ends():
    with pytest.raises(MalformedGame):
        FiniteParityGame([1, 1], [0, 0], [[1], []]).check()
    with pytest.raises(MalformedGame):
        FiniteParityGame([1], [0], [[0], [0]])


@pytest.mark.parametrize("seed", range(200))
def test_solvers_agree_on_random_games(seed):
    g = random_parity_game(seed)
    sol = solve_zielonka(g)
    assert solve_spm(g) == sol.win1
    assert sol.win2 == set(range(len(g))) - sol.win1
    assert strategy_violation(g, sol) is None


@pytest.mark.parametrize("seed", range(60))
def test_brute_force_oracle(seed):
    g = random_parity_game(1000 + seed, max_states=7)
    assert solve_zielonka(g).win1 == brute_force_win1(g)
    assert solve_spm(g) == brute_force_win1(g)


@pytest.mark.parametrize("seed", range(40))
def test_certificate_catches_mutations(seed):
    g = random_parity_game(2000 + seed, max_states=20)
    sol = solve_zielonka(g)
    rng = random.Random(seed)
    # send one player-1 choice to a losing successor when such a choice exists
    bad = [(v, w) for v in sol.win1 if g.owner[v] == 1 for w in g.succ[v] if w in sol.win2]
    if bad:
        v, w = rng.choice(bad)
        s1 = {**sol.strategy1, v: w}
        assert not verify_strategy(g, Solution(sol.win1, sol.win2, s1, sol.strategy2))
    # claiming a state for the wrong player must be caught too
    if sol.win1 and sol.win2:
        v = rng.choice(sorted(sol.win2))
        w1 = sol.win1 | {v}
        w2 = sol.win2 - {v}
        s1 = dict(sol.strategy1)
        if g.owner[v] == 1:
            s1[v] = g.succ[v][0]
        s2 = {u: t for u, t in sol.strategy2.items() if u != v}
        assert not verify_strategy(g, Solution(w1, w2, s1, s2))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_priority_shift_invariance(seed, shift):
    g = random_parity_game(seed, max_states=25)
    g2 = FiniteParityGame(g.owner, [p + 2 * shift for p in g.priority], g.succ)
    assert solve_zielonka(g2).win1 == solve_zielonka(g).win1
    assert solve_spm(g2) == solve_spm(g)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_duality(seed):
    # swapping the players and shifting priorities by one swaps the winning sets
    g = random_parity_game(seed, max_states=25)
    dual = FiniteParityGame([3 - o for o in g.owner], [p + 1 for p in g.priority], g.succ)
    assert solve_zielonka(dual).win1 == solve_zielonka(g).win2


@pytest.mark.parametrize("seed", range(40))
def test_certificate_proves_correct_partitions(seed):
    g = random_parity_game(3000 + seed)
    sol = solve_zielonka(g)
    proved1, proved2 = certify_partition(g, sol.win1)
    assert proved1 == sol.win1 and proved2 == sol.win2


@pytest.mark.parametrize("seed", range(40))
def test_certificate_rejects_wrong_partitions(seed):
    g = random_parity_game(4000 + seed)
    sol = solve_zielonka(g)
    v = random.Random(seed).randrange(len(g))
    claim = sol.win1 ^ {v}
    proved1, proved2 = certify_partition(g, claim)
    assert proved1 != claim or proved2 != set(range(len(g))) - claim
    # whatever is proved is true
    assert proved1 <= sol.win1 and proved2 <= sol.win2


def test_budget(monkeypatch):
    import timedparity.parity as parity

    monkeypatch.setattr(parity, "_CHUNK", 1)
    # player 2 cycles through odd priorities: the dual side needs 30 lifts
    ring = FiniteParityGame([2] * 30, [1, 3] * 15, [[(i + 1) % 30] for i in range(30)])
    with pytest.raises(LiftingBudget):
        solve_spm(ring, budget=10)
    assert solve_spm(ring, budget=10**6) == set()
