"""Command line front end.

Exit codes: 0 initial state winning (or inclusion chain holds for
``compare``), 10 losing, 11 bad input file, 12 usage error, 13 resource
limit, 14 failed internal check (solver disagreement, broken chain).
"""
from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

from .gamefile import GameFileError, load_game
from .model import NonConjunctiveGuard, validate_game
from .reduction import ResourceLimit, build_finite_game, regstates, to_pgsolver
from .regions import EnlargedGame, format_region, region_of
from .robust import (
    BoundedRobustParams,
    compare_modes,
    solve_bounded_robust,
    solve_exact,
    solve_limit_robust,
)

EXIT_WIN, EXIT_LOSE, EXIT_INPUT, EXIT_USAGE, EXIT_LIMIT, EXIT_CHECK = 0, 10, 11, 12, 13, 14


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rational(text):
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")
    if q < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return q


def _q(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _state_text(s):
    return s.location + " " + " ".join(f"{x}={_q(v)}" for x, v in s.valuation.items())


def _plain(r, eg):
    """Winning region that stands for states of the game itself (tick clock 0, no flags)."""
    return not r.tick and not r.bl1 and r.classes[0] >> eg.z & 1


def _stats(fg):
    return [
        ("states", len(fg)),
        ("edges", fg.num_edges),
        ("region_states", len(fg.region_states())),
        ("priorities", len(set(fg.priority))),
    ]


def cmd_solve(args, out):
    game, s0 = load_game(args.game)
    t0 = time.perf_counter()
    if args.bounded_robust:
        if args.jitter is None:
            raise _Usage("--bounded-robust needs --jitter")
        p = BoundedRobustParams(args.jitter, args.response or 0)
        res = solve_bounded_robust(game, p, s0)
        eg = res.extra["eg"]
        tr = res.extra["transformed"]
        mode = "bounded-robust"
        listing = [f"{format_region(eg, q.region)} (time scale x{q.factor})" for q in res.winning_regions]
        extra = [("jitter", _q(p.jitter)), ("response", _q(p.response)), ("scale", tr.factor),
                 ("fresh_clock", tr.fresh_clock)]
        notes = tr.notes
    else:
        limit = args.limit_robust
        res = (solve_limit_robust if limit else solve_exact)(game, s0)
        eg = res.extra["eg"]
        mode = "limit-robust" if limit else "exact"
        listing = [format_region(eg, r) for r in res.winning_regions if _plain(r, eg)]
        extra = []
        notes = []
    elapsed = time.perf_counter() - t0
    rep = res.report
    fg = rep.game
    win_regions = len(regstates(fg, rep.solution.win1))
    print(f"game: {args.game}", file=out)
    print(f"mode: {mode}", file=out)
    for k, v in extra:
        print(f"{k}: {v}", file=out)
    print(f"initial state: {_state_text(s0)}", file=out)
    print(f"result: {'winning' if res.winning else 'losing'} for player 1", file=out)
    print("finite game: " + ", ".join(f"{v} {k.replace('_', ' ')}" for k, v in _stats(fg)), file=out)
    print(f"solvers agree: {'yes' if rep.agree else 'NO'}", file=out)
    for n in notes:
        print(f"note: {n}", file=out)
    print(f"winning regions: {win_regions} in total, {len(listing)} with the tick clock at 0 and flags clear",
          file=out)
    for line in listing:
        print(f"  {line}", file=out)
    print("", file=out)
    print("[result]", file=out)
    print(f"mode={mode}", file=out)
    for k, v in extra:
        print(f"{k}={v}", file=out)
    print(f"initial_winning={int(res.winning)}", file=out)
    print(f"winning_region_states={win_regions}", file=out)
    print(f"winning_listed={len(listing)}", file=out)
    for k, v in _stats(fg):
        print(f"{k}={v}", file=out)
    print(f"solvers_agree={int(rep.agree)}", file=out)
    if args.timing:
        print(f"wall_time_s={elapsed:.3f}", file=out)
    if not rep.agree:
        print("error: Zielonka and small progress measures disagree", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_WIN if res.winning else EXIT_LOSE


def cmd_export(args, out):
    game, s0 = load_game(args.game)
    eg = EnlargedGame(game)
    fg = build_finite_game(eg, "exact", seeds=[region_of(eg, s0)])
    text = to_pgsolver(fg)
    if args.out == "-":
        out.write(text)
    else:
        Path(args.out).write_text(text)
        print(f"wrote {len(fg)} states to {args.out}", file=out)
    return 0


def cmd_compare(args, out):
    game, s0 = load_game(args.game)
    p = BoundedRobustParams(args.jitter, args.response)
    rep = compare_modes(game, s0, p)
    yn = lambda b: "win" if b else "lose"
    print(f"game: {args.game}", file=out)
    print(f"initial state: {_state_text(s0)}", file=out)
    print(f"jitter: {_q(p.jitter)}  response: {_q(p.response)}", file=out)
    print(f"bounded-robust: {yn(rep.bounded)}", file=out)
    print(f"limit-robust:   {yn(rep.limit_robust)}", file=out)
    print(f"exact:          {yn(rep.exact)}", file=out)
    print(f"regions compared: {rep.regions_checked}", file=out)
    print(f"chain bounded <= limit-robust <= exact: {'holds' if rep.chain_holds else 'VIOLATED'}", file=out)
    print(f"strict exact/limit-robust witnesses: {len(rep.strict_exact_lr)}", file=out)
    for w in rep.strict_exact_lr:
        print(f"  {w}", file=out)
    print(f"strict limit-robust/bounded witnesses: {len(rep.strict_lr_bounded)}", file=out)
    for w in rep.strict_lr_bounded:
        print(f"  {w}", file=out)
    for v in rep.violations:
        print(f"violation: {v}", file=out)
    print("", file=out)
    print("[result]", file=out)
    print(f"exact={int(rep.exact)}", file=out)
    print(f"limit_robust={int(rep.limit_robust)}", file=out)
    print(f"bounded={int(rep.bounded)}", file=out)
    print(f"chain_holds={int(rep.chain_holds)}", file=out)
    print(f"strict_exact_limit_robust={len(rep.strict_exact_lr)}", file=out)
    print(f"strict_limit_robust_bounded={len(rep.strict_lr_bounded)}", file=out)
    return EXIT_WIN if rep.chain_holds else EXIT_CHECK


def cmd_check(args, out):
    game, _ = load_game(args.game)
    rep = validate_game(game)
    print(f"open: {'yes' if rep.is_open else 'no'}", file=out)
    print("clock bounds: " + ", ".join(f"{x}={c}" for x, c in rep.clock_bounds.items()), file=out)
    for w in rep.warnings:
        print(f"warning: {w}", file=out)
    return 0


class _Usage(Exception):
    pass


def build_parser():
    ap = _Parser(prog="timedparity", description="Solve timed automaton games with parity objectives.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="decide whether player 1 wins from the initial state")
    s.add_argument("game")
    m = s.add_mutually_exclusive_group()
    m.add_argument("--exact", action="store_true", help="exact winning (default)")
    m.add_argument("--limit-robust", action="store_true")
    m.add_argument("--bounded-robust", action="store_true")
    s.add_argument("--jitter", type=_rational)
    s.add_argument("--response", type=_rational)
    s.add_argument("--timing", action="store_true", help="also print wall time (output is then not reproducible)")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("export", help="write the exact finite game in PGSolver format")
    e.add_argument("game")
    e.add_argument("out", help="output path, or - for stdout")
    e.set_defaults(func=cmd_export)

    c = sub.add_parser("compare", help="check the inclusion chain of the three winning notions")
    c.add_argument("game")
    c.add_argument("--jitter", type=_rational, required=True)
    c.add_argument("--response", type=_rational, default=Fraction(0))
    c.set_defaults(func=cmd_compare)

    k = sub.add_parser("check", help="validate a game file")
    k.add_argument("game")
    k.set_defaults(func=cmd_check)
    return ap


def main(argv=None, out=None):
    out = out or sys.stdout
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "solve" and not args.bounded_robust and (args.jitter is not None or args.response is not None):
        ap.error("--jitter/--response only apply to --bounded-robust")
    try:
        return args.func(args, out)
    except _Usage as exc:
        ap.error(str(exc))
    except (GameFileError, NonConjunctiveGuard) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
