"""Export the exact finite game of fixtures/fig1.game in PGSolver format,
read it back and solve it with both parity solvers.

    python3 demos/export_and_resolve.py out.pg
"""
import sys
from pathlib import Path

from timedparity import EnlargedGame, build_finite_game, from_pgsolver, load_game, region_of, to_pgsolver
from timedparity.parity import solve_spm, solve_zielonka

GAME = Path(__file__).resolve().parents[1] / "fixtures" / "fig1.game"


def main():
    g, s0 = load_game(GAME)
    eg = EnlargedGame(g)
    fg = build_finite_game(eg, "exact", seeds=[region_of(eg, s0)])
    text = to_pgsolver(fg)
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else None
    if out:
        out.write_text(text)
        print(f"wrote {out}")
    back = from_pgsolver(text)
    z = solve_zielonka(back)
    spm = solve_spm(back)
    print(f"{len(back)} states, {sum(map(len, back.succ))} edges")
    # owner 0 in the file is the even player, which wins from state 0 (the initial region)
    print(f"even player wins {len(z.win1)} states, initial state won: {0 in z.win1}")
    print(f"progress measures agree: {spm == z.win1}")


if __name__ == "__main__":
    main()
