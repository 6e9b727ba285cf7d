"""Timed automaton games: clock constraints, edges, games and validation.

Constants are kept as exact :class:`fractions.Fraction` values.  Parsed
games only ever contain integers; rational bounds show up transiently
while guards are tightened for the bounded-robust construction and are
removed again by :func:`rescale_constants`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping


class ConstraintError(ValueError):
    """Raised for malformed clock constraint text."""

    def __init__(self, message: str, pos: int = 0):
        super().__init__(f"{message} (at offset {pos})")
        self.pos = pos
        self.reason = message


class NonConjunctiveGuard(ValueError):
    """Guard tightening was asked for a constraint outside the conjunctive fragment."""


# ---------------------------------------------------------------------------
# constraint syntax tree


@dataclass(frozen=True)
class Le:
    """``clock <= bound``"""

    clock: str
    bound: Fraction


@dataclass(frozen=True)
class Ge:
    """``bound <= clock``"""

    clock: str
    bound: Fraction


@dataclass(frozen=True)
class Not:
    arg: "Constraint"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Const:
    value: bool


TRUE = Const(True)
FALSE = Const(False)

Constraint = Le | Ge | Not | And | Const


def conj(*parts) -> Constraint:
    """Conjunction that flattens nested ``And`` and drops ``true`` leaves."""
    args = []
    for p in parts:
        if isinstance(p, And):
            args.extend(p.args)
        elif p == TRUE:
            continue
        elif p == FALSE:
            return FALSE
        else:
            args.append(p)
    if not args:
        return TRUE
    if len(args) == 1:
        return args[0]
    return And(tuple(args))


def atoms(c: Constraint):
    """Yield every ``Le``/``Ge`` leaf of ``c``."""
    if isinstance(c, (Le, Ge)):
        yield c
    elif isinstance(c, Not):
        yield from atoms(c.arg)
    elif isinstance(c, And):
        for a in c.args:
            yield from atoms(a)


def clocks_of(c: Constraint) -> set:
    return {a.clock for a in atoms(c)}


def is_strict(c: Constraint) -> bool:
    """True when every atom of ``c`` is a strict comparison (an open set)."""
    if isinstance(c, Const):
        return True
    if isinstance(c, Not):
        return isinstance(c.arg, (Le, Ge))
    if isinstance(c, And):
        return all(is_strict(a) for a in c.args)
    return False


def eval_constraint(v: Mapping[str, Fraction], c: Constraint) -> bool:
    if isinstance(c, Le):
        return v[c.clock] <= c.bound
    if isinstance(c, Ge):
        return c.bound <= v[c.clock]
    if isinstance(c, Not):
        return not eval_constraint(v, c.arg)
    if isinstance(c, And):
        return all(eval_constraint(v, a) for a in c.args)
    return c.value


def map_bounds(c: Constraint, fn) -> Constraint:
    if isinstance(c, Le):
        return Le(c.clock, fn(c.bound))
    if isinstance(c, Ge):
        return Ge(c.clock, fn(c.bound))
    if isinstance(c, Not):
        return Not(map_bounds(c.arg, fn))
    if isinstance(c, And):
        return And(tuple(map_bounds(a, fn) for a in c.args))
    return c


def _fmt_num(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_constraint(c: Constraint) -> str:
    """Print ``c`` in the surface syntax accepted by :func:`parse_constraint`."""
    if isinstance(c, Le):
        return f"{c.clock} <= {_fmt_num(c.bound)}"
    if isinstance(c, Ge):
        return f"{c.clock} >= {_fmt_num(c.bound)}"
    if isinstance(c, Const):
        return "true" if c.value else "false"
    if isinstance(c, Not):
        a = c.arg
        if isinstance(a, Ge):
            return f"{a.clock} < {_fmt_num(a.bound)}"
        if isinstance(a, Le):
            return f"{a.clock} > {_fmt_num(a.bound)}"
        return f"!({format_constraint(a)})"
    parts = []
    for a in c.args:
        s = format_constraint(a)
        parts.append(f"({s})" if isinstance(a, And) else s)
    return " && ".join(parts)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9']*)"
    r"|(?P<op><=|>=|&&|<|>|!|\(|\)|-)|(?P<bad>\S))"
)

_FLIP = {"<=": ">=", ">=": "<=", "<": ">", ">": "<"}


def _tokenize(text):
    pos = 0
    out = []
    while True:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        kind = m.lastgroup
        start = m.start(kind)
        if kind == "bad":
            raise ConstraintError(f"unexpected character {m.group(kind)!r}", start)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    if text[pos:].strip():
        raise ConstraintError("unexpected trailing input", pos)
    out.append(("end", "", len(text)))
    return out


def _atom(clock, op, bound):
    if op == "<=":
        return Le(clock, bound)
    if op == ">=":
        return Ge(clock, bound)
    if op == "<":
        return Not(Ge(clock, bound))
    return Not(Le(clock, bound))


class _Parser:
    def __init__(self, text, clocks):
        self.toks = _tokenize(text)
        self.i = 0
        self.clocks = clocks

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ConstraintError(f"expected {op!r}, found {val or 'end of input'!r}", pos)

    def parse(self):
        c = self.conjunction()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ConstraintError(f"unexpected {val!r}", pos)
        return c

    def conjunction(self):
        parts = [self.unary()]
        while self.peek()[:2] == ("op", "&&"):
            self.take()
            parts.append(self.unary())
        if len(parts) == 1:
            return parts[0]
        flat = []
        for p in parts:
            flat.extend(p.args if isinstance(p, And) else (p,))
        return And(tuple(flat))

    def unary(self):
        kind, val, pos = self.peek()
        if kind == "op" and val == "!":
            self.take()
            return Not(self.unary())
        if kind == "op" and val == "(":
            self.take()
            c = self.conjunction()
            self.expect_op(")")
            return c
        if kind == "id" and val in ("true", "false"):
            self.take()
            return TRUE if val == "true" else FALSE
        return self.comparison()

    def number(self):
        kind, val, pos = self.take()
        if kind == "op" and val == "-":
            raise ConstraintError("negative constant", pos)
        if kind != "num":
            raise ConstraintError(f"expected a constant, found {val or 'end of input'!r}", pos)
        q = Fraction(val)
        if q.denominator != 1:
            raise ConstraintError(f"non-integer constant {val}", pos)
        return q

    def clock(self):
        kind, val, pos = self.take()
        if kind != "id":
            raise ConstraintError(f"expected a clock, found {val or 'end of input'!r}", pos)
        if val not in self.clocks:
            raise ConstraintError(f"undeclared clock {val!r}", pos)
        return val

    def comparison(self):
        kind, val, pos = self.peek()
        if kind in ("num",) or (kind == "op" and val == "-"):
            bound = self.number()
            op = self.relop()
            return _atom(self.clock(), _FLIP[op], bound)
        clock = self.clock()
        op = self.relop()
        return _atom(clock, op, self.number())

    def relop(self):
        kind, val, pos = self.take()
        if kind != "op" or val not in _FLIP:
            raise ConstraintError(f"expected a comparison, found {val or 'end of input'!r}", pos)
        return val


def parse_constraint(text: str, declared_clocks: Iterable[str]) -> Constraint:
    """Parse the guard/invariant surface syntax.

    ``x < d`` becomes ``Not(Ge(x, d))`` and ``x > d`` becomes ``Not(Le(x, d))``.
    """
    return _Parser(text, frozenset(declared_clocks)).parse()


# ---------------------------------------------------------------------------
# guard tightening


def _tighten_leaf(c, eps):
    if isinstance(c, Le):
        d = c.bound - eps
        return FALSE if d < 0 else Le(c.clock, d)
    if isinstance(c, Not) and isinstance(c.arg, Ge):
        d = c.arg.bound - eps
        return FALSE if d <= 0 else Not(Ge(c.arg.clock, d))
    if isinstance(c, (Ge, Const)) or (isinstance(c, Not) and isinstance(c.arg, Le)):
        # lower bounds bind at the start of the window
        return c
    raise NonConjunctiveGuard(f"cannot tighten {format_constraint(c)!r}: only conjunctions of atoms are supported")


def tighten_upper(c: Constraint, eps) -> Constraint:
    """Constraint equivalent to "``c`` holds at every point of ``[v, v + eps]``".

    Only conjunctions of (possibly strict) atoms are accepted: upper
    bounds shrink by ``eps`` and lower bounds stay as they are.
    """
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if isinstance(c, And):
        return conj(*(_tighten_leaf(a, eps) for a in c.args))
    return _tighten_leaf(c, eps)


def has_strict_lower_bound(c: Constraint) -> bool:
    if isinstance(c, Not):
        return isinstance(c.arg, Le)
    if isinstance(c, And):
        return any(has_strict_lower_bound(a) for a in c.args)
    return False


# ---------------------------------------------------------------------------
# games


@dataclass(frozen=True)
class Edge:
    source: str
    player: int
    action: str
    guard: Constraint
    target: str
    resets: frozenset = frozenset()

    @property
    def key(self) -> str:
        return f"{self.source}.{self.action}"


@dataclass(frozen=True)
class GameState:
    location: str
    valuation: Mapping[str, Fraction]


@dataclass(frozen=True, eq=False)
class TimedAutomatonGame:
    """``<L, C, A1, A2, E, inv>`` together with a location priority map."""

    locations: tuple
    clocks: tuple
    edges: tuple
    invariants: Mapping[str, Constraint]
    priorities: Mapping[str, int]

    def __post_init__(self):
        inv = {l: self.invariants.get(l, TRUE) for l in self.locations}
        pri = {l: self.priorities.get(l, 0) for l in self.locations}
        object.__setattr__(self, "invariants", inv)
        object.__setattr__(self, "priorities", pri)

    def constraints(self):
        yield from self.invariants.values()
        for e in self.edges:
            yield e.guard

    @property
    def clock_bounds(self) -> dict:
        """Largest constant each clock is compared with (1 when unconstrained)."""
        c = {x: 1 for x in self.clocks}
        for con in self.constraints():
            for a in atoms(con):
                c[a.clock] = max(c[a.clock], math.ceil(a.bound))
        return c

    @property
    def max_constant(self) -> int:
        return max(self.clock_bounds.values(), default=1)

    @property
    def order(self) -> int:
        return max(self.priorities.values(), default=0) + 1

    def edges_from(self, location, player=None):
        return [e for e in self.edges if e.source == location and (player is None or e.player == player)]

    def actions(self, player):
        return sorted({e.action for e in self.edges if e.player == player})

    def replace(self, **kw) -> "TimedAutomatonGame":
        fields = dict(locations=self.locations, clocks=self.clocks, edges=self.edges,
                      invariants=self.invariants, priorities=self.priorities)
        fields.update(kw)
        return TimedAutomatonGame(**fields)


def lcm_of_denominators(values) -> int:
    out = 1
    for q in values:
        out = math.lcm(out, Fraction(q).denominator)
    return out


def rescale_constants(g: TimedAutomatonGame, extra_rationals=()) -> tuple:
    """Multiply every constant by the lcm of all denominators.

    Returns ``(scaled_game, factor)``; a state ``<l, v>`` of ``g``
    corresponds to ``<l, factor * v>`` of the scaled game.
    """
    consts = [a.bound for con in g.constraints() for a in atoms(con)]
    factor = lcm_of_denominators(list(consts) + [Fraction(q) for q in extra_rationals])
    if factor == 1:
        return g, 1
    scale = lambda q: q * factor
    edges = tuple(Edge(e.source, e.player, e.action, map_bounds(e.guard, scale), e.target, e.resets)
                  for e in g.edges)
    inv = {l: map_bounds(c, scale) for l, c in g.invariants.items()}
    return g.replace(edges=edges, invariants=inv), factor


def scale_state(s: GameState, factor) -> GameState:
    return GameState(s.location, {x: Fraction(v) * factor for x, v in s.valuation.items()})


@dataclass
class ValidationReport:
    duplicate_actions: list = field(default_factory=list)
    undeclared: list = field(default_factory=list)
    is_open: bool = True
    clock_bounds: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.duplicate_actions or self.undeclared or self.errors)


def validate_game(g: TimedAutomatonGame) -> ValidationReport:
    rep = ValidationReport()
    seen = set()
    locs = set(g.locations)
    for e in g.edges:
        if (e.source, e.action) in seen:
            rep.duplicate_actions.append((e.source, e.action))
        seen.add((e.source, e.action))
        if e.player not in (1, 2):
            rep.errors.append(f"edge {e.key}: player must be 1 or 2")
        for l in (e.source, e.target):
            if l not in locs:
                rep.errors.append(f"edge {e.key}: unknown location {l!r}")
        for x in set(e.resets) - set(g.clocks):
            rep.undeclared.append((e.key, x))
    declared = set(g.clocks)
    for con in g.constraints():
        for a in atoms(con):
            if a.clock not in declared:
                rep.undeclared.append(("constraint", a.clock))
            if a.bound < 0 or Fraction(a.bound).denominator != 1:
                rep.errors.append(f"constant {a.bound} is not a nonnegative integer")
    for l, p in g.priorities.items():
        if p < 0:
            rep.errors.append(f"location {l}: negative priority")
    p1 = {e.action for e in g.edges if e.player == 1}
    p2 = {e.action for e in g.edges if e.player == 2}
    if p1 & p2:
        rep.errors.append(f"actions shared between players: {sorted(p1 & p2)}")
    rep.is_open = all(is_strict(c) for c in g.constraints())
    rep.clock_bounds = g.clock_bounds
    rep.warnings.append("receptiveness (well-formedness) of the game is assumed, not checked")
    return rep
