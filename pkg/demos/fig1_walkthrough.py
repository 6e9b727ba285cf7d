"""Walk through the fixture game fixtures/fig1.game under the three winning notions.

Player 1 tries to stay out of l3.  From l0 it may return within one time
unit through l2, or leave for l1 where it must wait strictly more than one
unit before coming back.  With exact timing player 1 wins even from
x = y = 1; as soon as moves must target open regions that state is lost,
and any jitter on player 1's delays loses the game from x = y = 0.

    python3 demos/fig1_walkthrough.py
"""
from fractions import Fraction
from pathlib import Path

from timedparity import (
    BoundedRobustParams,
    EnlargedGame,
    GameState,
    load_game,
    region_of,
    solve_bounded_robust,
    solve_exact,
    solve_limit_robust,
)
from timedparity.regions import format_region

GAME = Path(__file__).resolve().parents[1] / "fixtures" / "fig1.game"


def main():
    g, s0 = load_game(GAME)
    eg = EnlargedGame(g)
    one = GameState("l0", {"x": Fraction(1), "y": Fraction(1)})
    r0, r1 = region_of(eg, s0), region_of(eg, one)
    print("initial region:", format_region(eg, r0))
    print("x = y = 1 region:", format_region(eg, r1))

    ex = solve_exact(g, s0, seeds=[r1])
    lr = solve_limit_robust(g, s0, seeds=[r1])
    for name, res in (("exact", ex), ("limit-robust", lr)):
        fg = res.report.game
        print(f"\n{name}: {len(fg)} states, {fg.num_edges} edges, solvers agree: {res.report.agree}")
        print(f"  wins from x=y=0: {res.report.wins(r0)}")
        print(f"  wins from x=y=1: {res.report.wins(r1)}")

    # the bounded game grows quickly as the jitter shrinks, so stop at 1/3 here
    print()
    for eps in (Fraction(1), Fraction(1, 2), Fraction(1, 3)):
        jr = solve_bounded_robust(g, BoundedRobustParams(eps, 0), s0)
        tr = jr.extra["transformed"]
        print(f"bounded-robust eps={eps}: wins={jr.winning}  "
              f"({len(tr.game.locations)} locations, scale x{tr.factor}, {len(jr.report.game)} states)")


if __name__ == "__main__":
    main()
