"""Check bounded <= limit-robust <= exact on a batch of random games.

Prints one line per game with the number of regions where the exact
winner is strictly larger than the limit-robust one, and where the
limit-robust winner is strictly larger than the bounded one.

    python3 demos/inclusion_chain.py [num_games] [jitter]
"""
import random
import sys
from fractions import Fraction

from timedparity import BoundedRobustParams, Edge, GameState, TimedAutomatonGame, compare_modes
from timedparity.model import Ge, Le, Not, conj


def random_game(seed, n_locs=3, n_clocks=2, cmax=2):
    rng = random.Random(seed)
    locs = tuple(f"l{i}" for i in range(rng.randint(1, n_locs)))
    clocks = tuple("xy"[:rng.randint(1, n_clocks)])

    def guard():
        parts = []
        for _ in range(rng.randint(0, 2)):
            x, c = rng.choice(clocks), rng.randint(0, cmax)
            parts.append(rng.choice([Le(x, c), Ge(x, c), Not(Le(x, c)), Not(Ge(x, c))]))
        return conj(*parts)

    edges = []
    for l in locs:
        for player, tag in ((1, "a"), (2, "b")):
            for k in range(rng.randint(0, 2)):
                resets = frozenset(x for x in clocks if rng.random() < 0.4)
                edges.append(Edge(l, player, f"{tag}{l}_{k}", guard(), rng.choice(locs), resets))
    g = TimedAutomatonGame(locs, clocks, tuple(edges), {l: conj() for l in locs},
                           {l: rng.randint(0, 2) for l in locs})
    return g, GameState(locs[0], {x: Fraction(0) for x in clocks})


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 10
    eps = Fraction(sys.argv[2]) if len(sys.argv) > 2 else Fraction(1, 2)
    broken = 0
    for seed in range(n):
        g, s0 = random_game(seed)
        rep = compare_modes(g, s0, BoundedRobustParams(eps, 0))
        broken += not rep.chain_holds
        print(f"seed {seed:3d}: {len(g.locations)} locations, {len(g.edges)} edges, "
              f"{rep.regions_checked:4d} regions, exact>lr at {len(rep.strict_exact_lr):3d}, "
              f"lr>bounded at {len(rep.strict_lr_bounded):3d}, chain {'holds' if rep.chain_holds else 'BROKEN'}")
    print(f"\n{n - broken}/{n} games satisfy the chain")


if __name__ == "__main__":
    main()
