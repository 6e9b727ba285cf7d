import random
from fractions import Fraction
from itertools import product
from pathlib import Path

import pytest

from timedparity import Edge, GameState, TimedAutomatonGame, load_game
from timedparity.model import Ge, Le, Not, conj
from timedparity.parity import FiniteParityGame

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def fig1():
    return load_game(FIXTURES / "fig1.game")


def state(loc, **vals):
    return GameState(loc, {x: Fraction(v) for x, v in vals.items()})


# ---------------------------------------------------------------------------
# random timed games


def _atom(rng, x, open_only):
    d = rng.randint(0, 2)
    if open_only:
        kinds = ["lt", "gt"] if d > 0 else ["gt"]
    else:
        kinds = ["le", "ge", "lt", "gt"] if d > 0 else ["le", "ge", "gt"]
    k = rng.choice(kinds)
    return {"le": Le(x, d), "ge": Ge(x, d), "lt": Not(Ge(x, d)), "gt": Not(Le(x, d))}[k]


def _guard(rng, clocks, open_only):
    n = rng.choice([0, 1, 1, 2])
    return conj(*(_atom(rng, rng.choice(clocks), open_only) for _ in range(n)))


def random_timed_game(seed, open_only=False, max_locations=3, max_clocks=2):
    """Small random game: at most 3 locations, 2 clocks, constants <= 2.

    Invariants are ``true`` so every region of the initial location is
    admissible; priorities are drawn from 0..2.
    """
    rng = random.Random(seed)
    nl = rng.randint(1, max_locations)
    locs = tuple(f"l{i}" for i in range(nl))
    clocks = tuple(["x", "y"][: rng.randint(1, max_clocks)])
    edges = []
    for l in locs:
        for player in (1, 2):
            for j in range(rng.randint(0, 2)):
                resets = frozenset(x for x in clocks if rng.random() < 0.4)
                edges.append(Edge(l, player, f"{'ab'[player - 1]}{l}_{j}", _guard(rng, clocks, open_only),
                                  rng.choice(locs), resets))
    pri = {l: rng.randint(0, 2) for l in locs}
    g = TimedAutomatonGame(locs, clocks, tuple(edges), {}, pri)
    return g, GameState("l0", {x: Fraction(0) for x in clocks})


# ---------------------------------------------------------------------------
# random parity games and a brute-force oracle


def random_parity_game(seed, max_states=40, max_priority=3):
    rng = random.Random(seed)
    n = rng.randint(1, max_states)
    owner = [rng.choice((1, 2)) for _ in range(n)]
    prio = [rng.randint(0, max_priority) for _ in range(n)]
    succ = []
    for _ in range(n):
        k = rng.randint(1, min(3, n))
        succ.append(sorted(set(rng.sample(range(n), k))))
    return FiniteParityGame(owner, prio, succ)


def _reach(succ, src):
    seen = {src}
    stack = [src]
    while stack:
        v = stack.pop()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _odd_cycle_reachable(succ, prio, v):
    """In a one-player graph, can the odd player reach a cycle whose top priority is odd?"""
    for u in _reach(succ, v):
        p = prio[u]
        if p % 2 == 0:
            continue
        sub = [[w for w in succ[a] if prio[w] <= p] if prio[a] <= p else [] for a in range(len(succ))]
        if any(u in _reach(sub, w) for w in sub[u]):
            return True
    return False


def brute_force_win1(g):
    """Player-1 winning set by enumerating positional player-1 strategies.

    Uses positional determinacy: v is winning iff some positional strategy
    leaves player 2 no reachable cycle with an odd maximum.
    """
    n = len(g)
    mine = [v for v in range(n) if g.owner[v] == 1]
    win = set()
    for choice in product(*(g.succ[v] for v in mine)):
        succ = [list(s) for s in g.succ]
        for v, w in zip(mine, choice):
            succ[v] = [w]
        for v in range(n):
            if v not in win and not _odd_cycle_reachable(succ, g.priority, v):
                win.add(v)
    return win
