"""Reader and writer for the textual game format.

    clocks x, y;
    location l0 { invariant: "true"; priority: 0; initial: x=0, y=0; }
    edge a { player: 1; from: l0; to: l1; guard: "x <= 1"; reset: [x]; }

``#`` starts a comment that runs to the end of the line.
"""
from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path

from .model import (
    ConstraintError,
    Edge,
    GameState,
    TimedAutomatonGame,
    format_constraint,
    parse_constraint,
    validate_game,
)


class GameFileError(ValueError):
    def __init__(self, message, line=None, col=None, path=None):
        where = ""
        if line is not None:
            where = f"{path or '<input>'}:{line}:{col}: "
        super().__init__(where + message)
        self.line = line
        self.col = col


_TOKENS = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<str>"[^"\n]*")
  | (?P<num>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}\[\];:,=])
""", re.VERBOSE)


def _tokenize(text, path):
    toks = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKENS.match(text, pos)
        if not m:
            raise GameFileError(f"unexpected character {text[pos]!r}", line, pos - start + 1, path)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append((kind, m.group(), line, pos - start + 1))
        pos = m.end()
    toks.append(("eof", "", line, pos - start + 1))
    return toks


class _Reader:
    def __init__(self, text, path):
        self.toks = _tokenize(text, path)
        self.i = 0
        self.path = path

    def peek(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return GameFileError(msg, tok[2], tok[3], self.path)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = repr(value) if value is not None else kind
            got = tok[1] or "end of file"
            raise self.error(f"expected {want}, got {got!r}")
        self.i += 1
        return tok

    def keyword(self, word):
        self.take("ident", word)
        self.take("punct", ":")

    def end(self):
        self.take("punct", ";")


def loads(text: str, path=None):
    """Parse game text; returns ``(game, initial_state)``."""
    rd = _Reader(text, path)
    clocks = []
    locations = []
    invariants_raw = {}
    priorities = {}
    initial = None
    edges_raw = []
    if rd.peek()[0] == "eof":
        raise rd.error("empty game file")
    while rd.peek()[0] != "eof":
        tok = rd.take("ident")
        if tok[1] == "clocks":
            while True:
                c = rd.take("ident")
                if c[1] in clocks:
                    raise rd.error(f"clock {c[1]!r} declared twice", c)
                clocks.append(c[1])
                if rd.peek()[1] == ",":
                    rd.take()
                    continue
                break
            rd.end()
        elif tok[1] == "location":
            name = rd.take("ident")
            if name[1] in locations:
                raise rd.error(f"location {name[1]!r} declared twice", name)
            locations.append(name[1])
            rd.take("punct", "{")
            rd.keyword("invariant")
            invariants_raw[name[1]] = rd.take("str")
            rd.end()
            rd.keyword("priority")
            ptok = rd.take("num")
            if "/" in ptok[1]:
                raise rd.error("priority must be a natural number", ptok)
            priorities[name[1]] = int(ptok[1])
            rd.end()
            if rd.peek()[1] == "initial":
                if initial is not None:
                    raise rd.error("more than one location carries 'initial:'")
                rd.keyword("initial")
                vals = {}
                while True:
                    x = rd.take("ident")
                    rd.take("punct", "=")
                    vals[x[1]] = (Fraction(rd.take("num")[1]), x)
                    if rd.peek()[1] == ",":
                        rd.take()
                        continue
                    break
                rd.end()
                initial = (name[1], vals)
            rd.take("punct", "}")
        elif tok[1] == "edge":
            name = rd.take("ident")
            rd.take("punct", "{")
            rd.keyword("player")
            ptok = rd.take("num")
            if ptok[1] not in ("1", "2"):
                raise rd.error("player must be 1 or 2", ptok)
            rd.end()
            rd.keyword("from")
            src = rd.take("ident")
            rd.end()
            rd.keyword("to")
            dst = rd.take("ident")
            rd.end()
            rd.keyword("guard")
            guard = rd.take("str")
            rd.end()
            rd.keyword("reset")
            rd.take("punct", "[")
            resets = []
            if rd.peek()[1] != "]":
                while True:
                    resets.append(rd.take("ident"))
                    if rd.peek()[1] == ",":
                        rd.take()
                        continue
                    break
            rd.take("punct", "]")
            rd.end()
            rd.take("punct", "}")
            edges_raw.append((name, int(ptok[1]), src, dst, guard, resets))
        else:
            raise rd.error(f"expected 'clocks', 'location' or 'edge', got {tok[1]!r}", tok)

    def constraint(tok):
        try:
            return parse_constraint(tok[1][1:-1], clocks)
        except ConstraintError as exc:
            # +1 for the opening quote
            raise GameFileError(exc.reason, tok[2], tok[3] + 1 + exc.pos, path) from None

    invariants = {l: constraint(t) for l, t in invariants_raw.items()}
    edges = []
    for name, player, src, dst, guard, resets in edges_raw:
        for loc in (src, dst):
            if loc[1] not in locations:
                raise GameFileError(f"unknown location {loc[1]!r}", loc[2], loc[3], path)
        for x in resets:
            if x[1] not in clocks:
                raise GameFileError(f"undeclared clock {x[1]!r}", x[2], x[3], path)
        edges.append(Edge(src[1], player, name[1], constraint(guard), dst[1],
                          frozenset(x[1] for x in resets)))
    game = TimedAutomatonGame(tuple(locations), tuple(clocks), tuple(edges), invariants, priorities)
    rep = validate_game(game)
    if rep.duplicate_actions:
        loc, act = rep.duplicate_actions[0]
        tok = next(t[0] for t in reversed(edges_raw) if t[2][1] == loc and t[0][1] == act)
        raise GameFileError(f"duplicate action {act!r} at location {loc!r}", tok[2], tok[3], path)
    if not rep.ok:
        raise GameFileError("; ".join(map(str, rep.errors + rep.undeclared)), path=path)
    if initial is None:
        raise GameFileError("no location carries 'initial:'", path=path)
    loc, vals = initial
    for x, (_, tok) in vals.items():
        if x not in clocks:
            raise GameFileError(f"undeclared clock {x!r}", tok[2], tok[3], path)
    missing = [x for x in clocks if x not in vals]
    if missing:
        raise GameFileError(f"initial valuation misses clocks {missing}", path=path)
    return game, GameState(loc, {x: vals[x][0] for x in clocks})


def load_game(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GameFileError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text, str(path))


def _fmt_q(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def dumps(game: TimedAutomatonGame, initial: GameState = None) -> str:
    out = []
    if game.clocks:
        out.append(f"clocks {', '.join(game.clocks)};")
    for l in game.locations:
        init = ""
        if initial is not None and initial.location == l:
            vals = ", ".join(f"{x}={_fmt_q(initial.valuation[x])}" for x in game.clocks)
            init = f" initial: {vals};"
        out.append(f'location {l} {{ invariant: "{format_constraint(game.invariants[l])}"; '
                   f"priority: {game.priorities[l]};{init} }}")
    for e in game.edges:
        resets = ", ".join(x for x in game.clocks if x in e.resets)
        out.append(f"edge {e.action} {{ player: {e.player}; from: {e.source}; to: {e.target}; "
                   f'guard: "{format_constraint(e.guard)}"; reset: [{resets}]; }}')
    return "\n".join(out) + "\n"
