"""Reduction of a timed automaton game to a finite turn-based parity game.

Player-1 states of the finite game are regions of the enlarged
structure.  A player-1 move picks a time successor ``Y`` of the current
region together with a player-1 edge enabled in ``Y`` (or relinquishes),
and leads to a player-2 tuple state.  Player 2 then answers with a time
successor of its own plus an optional player-2 edge; the earlier of the
two proposals is carried out.  When both proposals reach the same
region, player 2 chooses which one is taken.

Outcomes of a tuple state only depend on the location and clock data
of the source region (never on its flags), so they are computed once
per ``(location, clock key)`` and shared.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .model import Edge, GameState, TimedAutomatonGame
from .parity import FiniteParityGame, LiftingBudget, Solution, certify_partition, solve_spm, solve_zielonka
from .regions import (
    EnlargedGame,
    Region,
    SuccessorParams,
    format_region,
    compile_constraint,
    jump_key,
    key_satisfies,
    region_count_bound,
    region_of,
    second_region,
    successor_keys,
    time_successors,
)

__all__ = [
    "TupleState", "Sink", "SINK", "FiniteGame", "PriorityLifting", "ResourceLimit",
    "build_finite_game", "lift_priorities", "regstates", "second_region",
    "player1_moves", "player2_moves", "beats", "to_pgsolver", "from_pgsolver",
    "solve", "state_bound", "edge_bound",
]

EXACT = "exact"
LIMIT_ROBUST = "limit_robust"


class ResourceLimit(RuntimeError):
    pass


class TupleState(NamedTuple):
    """Player-2 state: source region, player-1 proposal and relinquish flag.

    ``index`` is the position of the proposed region in the deduplicated
    time-successor list of ``source``; ``edge`` is the pending player-1
    edge (None together with ``tev=True`` for the relinquish move).
    """

    source: Region
    params: SuccessorParams
    index: int
    edge: Edge | None
    tev: bool

    @property
    def pending(self):
        if self.edge is None:
            return self.source.location, frozenset()
        return self.edge.target, frozenset(self.edge.resets)


class Sink(NamedTuple):
    reason: str


SINK = Sink("closed player-1 move")


@dataclass(frozen=True)
class PriorityLifting:
    """``tick -> omega + 2``, ``bl1 -> 1``, otherwise ``0``."""

    omega: dict
    order: int

    @property
    def lifted_order(self):
        return self.order + 2

    def __call__(self, location, tick, bl1) -> int:
        if tick:
            return self.omega[location] + 2
        return 1 if bl1 else 0


def lift_priorities(omega, d=None) -> PriorityLifting:
    omega = dict(omega)
    if d is None:
        d = max(omega.values(), default=0) + 1
    if d < 1:
        raise ValueError("order must be at least 1")
    return PriorityLifting(omega, d)


# ---------------------------------------------------------------------------
# local structure per (location, clock key)


@dataclass
class _Local:
    succ: list            # valid prefix of (params, key, tick)
    p2: list              # per index: list of outcome regions for player 2
    p1: list              # (index, edge, outcome region or SINK)


class _Builder:
    def __init__(self, eg: EnlargedGame, mode, blame_override, max_states):
        if mode not in (EXACT, LIMIT_ROBUST):
            raise ValueError(f"unknown mode {mode!r}")
        self.eg = eg
        self.g = eg.base
        self.mode = mode
        self.override = dict(blame_override or {})
        self.max_states = max_states
        self.local = {}
        self.compiled = {}
        for l in self.g.locations:
            for player in (1, 2):
                self.compiled[(l, player)] = [
                    (e, compile_constraint(eg, e.guard), eg.mask(e.resets),
                     compile_constraint(eg, self.g.invariants[e.target]), self.blame(e, player == 1))
                    for e in self.g.edges_from(l, player)]

    def blame(self, edge, default):
        if edge is not None and edge.action in self.override:
            return self.override[edge.action]
        return default

    def structure(self, loc, key) -> _Local:
        out = self.local.get((loc, key))
        if out is not None:
            return out
        eg, g = self.eg, self.g
        inv = compile_constraint(eg, g.invariants[loc])
        valid = []
        for item in successor_keys(eg, key):
            if not inv(item[1]):
                break
            valid.append(item)
        p2 = []
        p1 = []
        p1_edges = self.compiled[(loc, 1)]
        p2_edges = self.compiled[(loc, 2)]
        robust = self.mode == LIMIT_ROBUST
        for i, (params, k, tick) in enumerate(valid):
            outs = [Region(loc, tick, False, *k)]
            for e, guard, mask, tinv, bl in p2_edges:
                if guard(k):
                    jk = jump_key(eg, k, mask)
                    if tinv(jk):
                        outs.append(Region(e.target, tick, bl, *jk))
            p2.append(outs)
            for e, guard, mask, tinv, bl in p1_edges:
                if guard(k):
                    jk = jump_key(eg, k, mask)
                    if tinv(jk):
                        res = SINK if robust and k[2][0] else Region(e.target, tick, bl, *jk)
                        p1.append((i, e, res))
        out = self.local[(loc, key)] = _Local(valid, p2, p1)
        return out


class FiniteGame(FiniteParityGame):
    """``FiniteParityGame`` with the bookkeeping of the reduction attached."""

    def __init__(self, *a, eg=None, mode=EXACT, lifting=None, initial=(), **kw):
        super().__init__(*a, **kw)
        self.eg = eg
        self.mode = mode
        self.lifting = lifting
        self.initial = list(initial)
        self.index = {}

    def region_states(self):
        return [v for v, p in enumerate(self.payload) if isinstance(p, Region)]

    def tuple_states(self):
        return [v for v, p in enumerate(self.payload) if isinstance(p, TupleState)]

    def sinks(self):
        return [v for v, p in enumerate(self.payload) if isinstance(p, Sink)]

    def state_of(self, region: Region):
        return self.index.get(region)


def build_finite_game(eg: EnlargedGame, mode=EXACT, seeds=None, blame_override=None,
                      max_states=3_000_000) -> FiniteGame:
    """Reachable part of the finite game from the ``seeds`` regions.

    ``seeds`` defaults to the regions of the initial states with
    ``z = 0`` and both flags false; it must be given for a game without
    a designated initial state.  ``blame_override`` maps action names to
    the value assigned to ``bl1`` when that action is taken.
    """
    g = eg.base
    if seeds is None:
        raise ValueError("seed regions are required")
    b = _Builder(eg, mode, blame_override, max_states)
    lift = lift_priorities(g.priorities, g.order)

    owner, prio, succ, payload = [], [], [], []
    index = {}
    queue = []

    def add(p, o, pr):
        if len(owner) >= max_states:
            raise ResourceLimit(f"finite game exceeds {max_states} states")
        owner.append(o)
        prio.append(pr)
        succ.append(None)
        payload.append(p)
        return len(owner) - 1

    sink_id = None

    def region_id(r):
        nonlocal sink_id
        if r is SINK:
            if sink_id is None:
                sink_id = add(SINK, 2, 1)
                succ[sink_id] = [sink_id]
            return sink_id
        v = index.get(r)
        if v is None:
            v = index[r] = add(r, 1, lift(r.location, r.tick, r.bl1))
            queue.append(v)
        return v

    for r in seeds:
        if not key_satisfies(eg, r.clock_key, g.invariants[r.location]):
            raise ValueError(f"seed region violates its invariant: {format_region(eg, r)}")
        region_id(r)

    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        r = payload[v]
        loc = b.structure(r.location, r.clock_key)
        pr = prio[v]
        # prefix unions of player-2 outcomes, as id lists
        prefix = []
        seen = set()
        acc = []
        for outs in loc.p2:
            for o in outs:
                w = region_id(o)
                if w not in seen:
                    seen.add(w)
                    acc.append(w)
            prefix.append(len(acc))
        moves = []
        z = add(TupleState(r, SuccessorParams(0, 0, False), 0, None, True), 2, pr)
        succ[z] = list(acc)
        moves.append(z)
        for i, e, res in loc.p1:
            params = loc.succ[i][0]
            z = add(TupleState(r, params, i, e, False), 2, pr)
            out = acc[:prefix[i]]
            w = region_id(res)
            if w not in out:
                out.append(w)
            succ[z] = out
            moves.append(z)
        succ[v] = moves

    fg = FiniteGame(owner, prio, succ, payload=payload, label_fn=lambda v: _label(eg, payload[v]), eg=eg, mode=mode,
                    lifting=lift, initial=[index[r] for r in seeds])
    fg.index = index
    fg.local_structures = b.local
    return fg


def _label(eg, p):
    if isinstance(p, Region):
        return format_region(eg, p)
    if isinstance(p, TupleState):
        if p.tev:
            act = "relinquish"
        else:
            act = p.edge.action
        k, w, om = p.params
        return f"{format_region(eg, p.source)} >> k={k} w={w} om={int(om)} {act}"
    return f"sink: {p.reason}"


# ---------------------------------------------------------------------------
# move sets (standalone views of what the builder does)


def player1_moves(eg: EnlargedGame, r: Region, mode=EXACT):
    """``[(params, edge)]`` available to player 1 at ``r``; ``(None, None)`` is relinquish."""
    b = _Builder(eg, mode, None, 0)
    loc = b.structure(r.location, r.clock_key)
    return [(None, None)] + [(loc.succ[i][0], e) for i, e, _ in loc.p1]


def valid_successors(eg: EnlargedGame, r: Region):
    """Time successors of ``r`` reachable without leaving the invariant of its location."""
    out = []
    inv = eg.base.invariants[r.location]
    for p, y in time_successors(eg, r):
        if not key_satisfies(eg, y.clock_key, inv):
            break
        out.append((p, y))
    return out


def player2_moves(eg: EnlargedGame, z: TupleState):
    """``[(params, edge or None, tag)]`` player-2 options at tuple state ``z``.

    The tag is 1 when player 2 lets the pending player-1 move through
    (only meaningful when both reach the same region), 2 otherwise.
    """
    out = []
    g = eg.base
    for p, y in valid_successors(eg, z.source):
        opts = [None] + [e for e in g.edges_from(z.source.location, 2)
                         if key_satisfies(eg, y.clock_key, e.guard)
                         and key_satisfies(eg, jump_key(eg, y.clock_key, eg.mask(e.resets)),
                                           g.invariants[e.target])]
        for e in opts:
            for tag in (1, 2):
                out.append((p, e, tag))
    return out


def beats(eg: EnlargedGame, z: TupleState, p2_target: Region) -> bool:
    """True iff player 1's proposed region comes strictly before ``p2_target`` in time."""
    keys = [k for _, k, _ in successor_keys(eg, z.source.clock_key)]
    j = keys.index(p2_target.clock_key)
    return z.index < j


def resolve(eg: EnlargedGame, z: TupleState, option, mode=EXACT, blame_override=None):
    """Region (or ``SINK``) reached when player 2 answers ``z`` with ``option``."""
    b = _Builder(eg, mode, blame_override, 0)
    p2params, e2, tag = option
    lst = successor_keys(eg, z.source.clock_key)
    j = next(i for i, (p, _, _) in enumerate(lst) if p == p2params)
    loc = z.source.location
    p1_wins = not z.tev and (z.index < j or (z.index == j and tag == 1))
    if p1_wins:
        _, k, tick = lst[z.index]
        if mode == LIMIT_ROBUST and k[2][0] != 0:
            return SINK
        jk = jump_key(eg, k, eg.mask(z.edge.resets))
        return Region(z.edge.target, tick, b.blame(z.edge, True), *jk)
    _, k, tick = lst[j]
    if e2 is None:
        return Region(loc, tick, False, *k)
    jk = jump_key(eg, k, eg.mask(e2.resets))
    return Region(e2.target, tick, b.blame(e2, False), *jk)


# ---------------------------------------------------------------------------
# projections, bounds, solving


def regstates(fg: FiniteGame, states) -> set:
    return {fg.payload[v] for v in states if isinstance(fg.payload[v], Region)}


def state_bound(fg: FiniteGame, num_regions=None) -> int:
    """``|S_reg| (1 + (M+1)(|C|+2) 2 (|A1|* + 1))``."""
    g = fg.eg.base
    nreg = len(fg.region_states()) if num_regions is None else num_regions
    a1 = min(len(g.actions(1)), len(g.locations) * 2 ** len(g.clocks))
    return nreg * (1 + (g.max_constant + 1) * (len(g.clocks) + 2) * 2 * (a1 + 1))


def edge_bound(fg: FiniteGame, num_regions=None) -> int:
    g = fg.eg.base
    nreg = len(fg.region_states()) if num_regions is None else num_regions
    a1 = min(len(g.actions(1)), len(g.locations) * 2 ** len(g.clocks))
    a2 = min(len(g.actions(2)), len(g.locations) * 2 ** len(g.clocks))
    t = (g.max_constant + 1) * (len(g.clocks) + 2) * 2
    return nreg * t * (a1 + 1) * (1 + (a2 + 1) * t)


@dataclass
class WinningReport:
    game: FiniteGame
    solution: Solution
    spm_win1: set
    agree: bool
    winning_regions: list = field(default_factory=list)
    spm_mode: str = "independent"    # or "certificate", or "off"

    def wins(self, region: Region) -> bool:
        v = self.game.state_of(region)
        if v is None:
            raise KeyError("region was not constructed")
        return v in self.solution.win1

    def region_strategy(self):
        """Map winning region -> (params, action) chosen by player 1; action None is relinquish."""
        out = {}
        for v, w in self.solution.strategy1.items():
            z = self.game.payload[w]
            r = self.game.payload[v]
            out[r] = (z.params, None if z.tev else z.edge.action)
        return out


def solve(fg: FiniteGame, cross_check=True, spm_budget=None) -> WinningReport:
    """Solve with Zielonka and cross-check with small progress measures.

    The independent progress-measure run gets ``spm_budget`` lifts
    (default ``2 * |E| + 20000``).  Large components won partly by each
    player can need far more, because losing states climb through the
    whole measure space; then Zielonka's partition is certified by
    lifting each side separately instead (``spm_mode == "certificate"``).
    """
    sol = solve_zielonka(fg)
    regs = sorted(regstates(fg, sol.win1), key=lambda r: fg.index[r])
    if not cross_check:
        return WinningReport(fg, sol, set(sol.win1), True, regs, "off")
    if spm_budget is None:
        spm_budget = 2 * fg.num_edges + 20_000
    try:
        spm = solve_spm(fg, budget=spm_budget)
        return WinningReport(fg, sol, spm, spm == sol.win1, regs, "independent")
    except LiftingBudget:
        proved1, proved2 = certify_partition(fg, sol.win1)
        agree = proved1 == sol.win1 and proved2 == sol.win2
        return WinningReport(fg, sol, proved1, agree, regs, "certificate")


def seed_regions(eg: EnlargedGame, states):
    return [region_of(eg, s) for s in states]


# ---------------------------------------------------------------------------
# PGSolver text format


def to_pgsolver(fg: FiniteParityGame) -> str:
    """``parity <max-id>;`` then one line per state; player 1 is owner 0."""
    lines = [f"parity {len(fg) - 1};"]
    for v in range(len(fg)):
        label = fg.labels[v].replace('"', "'")
        succs = ",".join(str(w) for w in fg.succ[v])
        lines.append(f'{v} {fg.priority[v]} {fg.owner[v] - 1} {succs} "{label}";')
    return "\n".join(lines) + "\n"


_PG_LINE = re.compile(r'^\s*(\d+)\s+(\d+)\s+([01])\s+([\d,]+)(?:\s+"([^"]*)")?\s*;\s*$')


def from_pgsolver(text: str) -> FiniteParityGame:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty PGSolver input")
    m = re.match(r"^\s*parity\s+(\d+)\s*;\s*$", lines[0])
    if not m:
        raise ValueError("line 1: expected 'parity <max-id>;'")
    n = int(m.group(1)) + 1
    owner = [0] * n
    prio = [0] * n
    succ = [None] * n
    labels = [""] * n
    for no, ln in enumerate(lines[1:], start=2):
        m = _PG_LINE.match(ln)
        if not m:
            raise ValueError(f"line {no}: malformed state line")
        v = int(m.group(1))
        if v >= n:
            raise ValueError(f"line {no}: id {v} exceeds header")
        prio[v] = int(m.group(2))
        owner[v] = int(m.group(3)) + 1
        succ[v] = [int(x) for x in m.group(4).split(",")]
        labels[v] = m.group(5) or str(v)
    missing = [v for v in range(n) if succ[v] is None]
    if missing:
        raise ValueError(f"states without a line: {missing[:5]}")
    return FiniteParityGame(owner, prio, succ, labels=labels)


def region_stats(fg: FiniteGame):
    """Region count, its theoretical bound, and the largest successor list seen."""
    eg = fg.eg
    regs = fg.region_states()
    longest = max((len(successor_keys(eg, fg.payload[v].clock_key)) for v in regs), default=0)
    return {
        "regions": len(regs),
        "region_bound": region_count_bound(eg.base),
        "max_successors": longest,
    }
