"""Limit-robust and bounded-robust (jitter / response) winning.

Limit-robust winning reuses the finite game construction in
``limit_robust`` mode.  Bounded-robust winning is reduced to exact
winning on a transformed game: every player-1 edge ``e`` out of ``l`` is
split into an entry edge to a fresh location ``l_e``, where player 2
either completes the move within the jitter window or preempts it.  A
fresh clock ``u`` measures the time since the last discrete action.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .model import (
    Edge,
    GameState,
    Ge,
    Le,
    TimedAutomatonGame,
    conj,
    has_strict_lower_bound,
    rescale_constants,
    scale_state,
    tighten_upper,
)
from .reduction import EXACT, LIMIT_ROBUST, build_finite_game, solve
from .regions import EnlargedGame, Region, format_region, region_of, representative_state


@dataclass(frozen=True)
class BoundedRobustParams:
    jitter: Fraction
    response: Fraction

    def __post_init__(self):
        object.__setattr__(self, "jitter", Fraction(self.jitter))
        object.__setattr__(self, "response", Fraction(self.response))
        if self.jitter < 0 or self.response < 0:
            raise ValueError("jitter and response must be nonnegative")


@dataclass
class Transformed:
    game: TimedAutomatonGame
    blame: dict              # action -> forced bl1 value
    fresh_clock: str
    factor: int
    origin: dict             # location of the transformed game -> original location
    intermediate: set
    notes: list = field(default_factory=list)

    def __iter__(self):
        # (game, override, clock, factor), as the tuple-style API
        return iter((self.game, self.blame, self.fresh_clock, self.factor))


def _fresh(base, taken):
    name, i = base, 1
    while name in taken:
        name, i = f"{base}{i}", i + 1
    return name


def build_bounded_robust(g: TimedAutomatonGame, p: BoundedRobustParams, tick_clock="z") -> Transformed:
    eps, rho = p.jitter, p.response
    u = _fresh("u", set(g.clocks) | {tick_clock})
    clocks = g.clocks + (u,)
    locs = list(g.locations)
    taken_locs = set(locs)
    taken_actions = {e.action for e in g.edges}
    inv = dict(g.invariants)
    pri = dict(g.priorities)
    origin = {l: l for l in locs}
    intermediate = set()
    blame = {}
    edges = []
    notes = []

    def action(name):
        name = _fresh(name, taken_actions)
        taken_actions.add(name)
        return name

    for l in g.locations:
        p2 = g.edges_from(l, 2)
        for e in g.edges_from(l, 1):
            if has_strict_lower_bound(e.guard):
                notes.append(f"strict lower bound in guard of {e.key} is kept unchanged by tightening")
            if eps == 0:
                guard = conj(g.invariants[l], Ge(u, rho), e.guard)
                edges.append(Edge(l, 1, e.action, guard, e.target, e.resets | {u}))
                continue
            le = _fresh(f"{l}_{e.action}", taken_locs)
            taken_locs.add(le)
            locs.append(le)
            origin[le] = l
            intermediate.add(le)
            inv[le] = Le(u, eps)
            pri[le] = g.priorities[l]
            entry = conj(tighten_upper(g.invariants[l], eps), Ge(u, rho), tighten_upper(e.guard, eps))
            a1 = action(f"p1_{e.action}")
            edges.append(Edge(l, 1, a1, entry, le, frozenset({u})))
            blame[a1] = False
            a2 = action(f"p2_{e.action}")
            edges.append(Edge(le, 2, a2, e.guard, e.target, e.resets | {u}))
            blame[a2] = True
            for f in p2:
                b = action(f"{f.action}_{e.action}")
                edges.append(Edge(le, 2, b, f.guard, f.target, f.resets | {u}))
                blame[b] = False
        for f in p2:
            edges.append(Edge(l, 2, f.action, f.guard, f.target, f.resets | {u}))

    tg = TimedAutomatonGame(tuple(locs), clocks, tuple(edges), inv, pri)
    tg, factor = rescale_constants(tg, [eps, rho])
    return Transformed(tg, blame, u, factor, origin, intermediate, notes)


# ---------------------------------------------------------------------------
# projection


@dataclass(frozen=True)
class ProjectedRegion:
    """A winning region of the transformed game seen as a set of original states.

    ``region`` lives in the enlarged transformed game, with the fresh
    clock and the tick clock at 0; ``factor`` converts original clock
    values to the transformed time scale.
    """

    location: str
    region: Region
    factor: int

    def contains(self, eg: EnlargedGame, fresh: str, state: GameState) -> bool:
        if state.location != self.location:
            return False
        return _lift_state(eg, fresh, self.factor, state) == self.region


def _lift_state(eg, fresh, factor, s):
    v = dict(scale_state(s, factor).valuation)
    v[fresh] = Fraction(0)
    return region_of(eg, GameState(s.location, v))


def jstates(regions, eg: EnlargedGame, tr: Transformed) -> set:
    """Project regions of the transformed game onto states of the original game.

    Keeps regions at a non-intermediate location with the fresh clock and
    the tick clock at 0 and both flags cleared.
    """
    u = eg.index[tr.fresh_clock]
    z = eg.z
    out = set()
    for r in regions:
        if r.location in tr.intermediate or r.tick or r.bl1:
            continue
        zero = r.classes[0]
        if not (zero >> u & 1 and zero >> z & 1 and r.h[u] == 0):
            continue
        out.add(ProjectedRegion(r.location, r, tr.factor))
    return out


# ---------------------------------------------------------------------------
# pipelines


MAX_STATES = 3_000_000


@dataclass
class RobustResult:
    winning: bool
    report: object
    winning_regions: list
    seeds: list
    extra: dict = field(default_factory=dict)


def solve_exact(g, s0, seeds=(), cross_check=True, max_states=MAX_STATES) -> RobustResult:
    return _solve_mode(g, s0, EXACT, seeds, cross_check, max_states)


def solve_limit_robust(g, s0, seeds=(), cross_check=True, max_states=MAX_STATES) -> RobustResult:
    return _solve_mode(g, s0, LIMIT_ROBUST, seeds, cross_check, max_states)


def _solve_mode(g, s0, mode, seeds, cross_check, max_states):
    eg = EnlargedGame(g)
    r0 = region_of(eg, s0)
    seeds = [r0] + [r for r in seeds if r != r0]
    fg = build_finite_game(eg, mode, seeds=seeds, max_states=max_states)
    rep = solve(fg, cross_check)
    return RobustResult(rep.wins(r0), rep, rep.winning_regions, seeds, {"eg": eg})


def solve_bounded_robust(g, p: BoundedRobustParams, s0, extra_states=(), cross_check=True,
                         max_states=MAX_STATES) -> RobustResult:
    tr = build_bounded_robust(g, p)
    eg = EnlargedGame(tr.game)
    states = [s0] + list(extra_states)
    seeds = []
    for s in states:
        r = _lift_state(eg, tr.fresh_clock, tr.factor, s)
        if r not in seeds:
            seeds.append(r)
    fg = build_finite_game(eg, EXACT, seeds=seeds, blame_override=tr.blame, max_states=max_states)
    rep = solve(fg, cross_check)
    proj = jstates(rep.winning_regions, eg, tr)
    member = [rep.wins(_lift_state(eg, tr.fresh_clock, tr.factor, s)) for s in states]
    return RobustResult(member[0], rep, sorted(proj, key=lambda q: fg.index[q.region]), seeds,
                        {"eg": eg, "transformed": tr, "members": member})


# ---------------------------------------------------------------------------
# comparison of the three notions


@dataclass
class InclusionReport:
    exact: bool
    limit_robust: bool
    bounded: bool
    params: BoundedRobustParams
    regions_checked: int = 0
    violations: list = field(default_factory=list)
    strict_exact_lr: list = field(default_factory=list)     # exact wins, limit-robust loses
    strict_lr_bounded: list = field(default_factory=list)   # limit-robust wins, bounded loses

    @property
    def chain_holds(self):
        return not self.violations


def compare_modes(g: TimedAutomatonGame, s0: GameState, p: BoundedRobustParams,
                  cross_check=True) -> InclusionReport:
    """Check ``bounded <= limit-robust <= exact`` on the regions reachable in the exact game.

    The exact and limit-robust games are seeded with every constructed
    exact region having ``z = 0`` and clear flags; the bounded game is
    checked at the representative of each such region.
    """
    ex = solve_exact(g, s0, cross_check=cross_check)
    eg = ex.extra["eg"]
    fg = ex.report.game
    base = [fg.payload[v] for v in fg.region_states()]
    base = [r for r in base if not r.tick and not r.bl1 and r.classes[0] >> eg.z & 1]
    lr = solve_limit_robust(g, s0, seeds=base, cross_check=cross_check)
    reps = [representative_state(eg, r)[0] for r in base]
    jr = solve_bounded_robust(g, p, s0, extra_states=reps, cross_check=cross_check)
    rep = InclusionReport(ex.winning, lr.winning, jr.winning, p, len(base))
    win_ex = ex.report.solution.win1
    lrg = lr.report.game
    for r, s, jr_win in zip(base, reps, jr.extra["members"][1:]):
        e = fg.index[r] in win_ex
        l = lr.report.wins(r)
        label = format_region(eg, r)
        if l and not e:
            rep.violations.append(f"limit-robust wins but exact loses at {label}")
        if jr_win and not l:
            rep.violations.append(f"bounded wins but limit-robust loses at {label}")
        if e and not l:
            rep.strict_exact_lr.append(label)
        if l and not jr_win:
            rep.strict_lr_bounded.append(label)
    if not ex.report.agree or not lr.report.agree or not jr.report.agree:
        rep.violations.append("solver disagreement")
    rep.reports = {"exact": ex.report, "limit_robust": lr.report, "bounded": jr.report}
    rep.games = {k: r.game for k, r in rep.reports.items()}
    return rep
