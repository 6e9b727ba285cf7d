"""Clock regions of the enlarged game structure.

A region is stored as ``(location, tick, bl1, h, unbounded, classes)``:

* ``h`` holds the integer part of every clock (tick clock last),
  capped at the clock's maximal constant;
* ``unbounded`` is a bitmask of the clocks above their maximal constant;
* ``classes`` is ``(C0, C1, ..., Cn)`` as bitmasks.  ``C0`` holds the
  clocks with zero fractional part (it may be empty), ``C1..Cn`` are
  nonempty and ordered by increasing fractional part.

The tick clock wraps at 1, so it is never unbounded and its integer
part is always 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

from .model import Const, Ge, GameState, Le, Not, And, TimedAutomatonGame


class Region(NamedTuple):
    location: str
    tick: bool
    bl1: bool
    h: tuple
    unbounded: int
    classes: tuple

    @property
    def clock_key(self):
        return (self.h, self.unbounded, self.classes)

    @property
    def is_open(self) -> bool:
        return self.classes[0] == 0


class SuccessorParams(NamedTuple):
    k: int
    w: int
    om: bool


@lru_cache(maxsize=None)
def bits(mask: int) -> tuple:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _fresh_name(base, taken):
    name = base
    i = 1
    while name in taken:
        name = f"{base}{i}"
        i += 1
    return name


class EnlargedGame:
    """A timed automaton game extended with the tick clock and the tick/bl1 flags.

    Also owns the memo tables used while enumerating regions; these are
    keyed on clock data only, so they are shared by all locations.
    """

    def __init__(self, game: TimedAutomatonGame, tick_clock: str = "z"):
        self.base = game
        self.tick_clock = _fresh_name(tick_clock, set(game.clocks))
        self.clocks = tuple(game.clocks) + (self.tick_clock,)
        self.index = {x: i for i, x in enumerate(self.clocks)}
        self.z = len(game.clocks)
        cb = game.clock_bounds
        self.bounds = tuple(cb[x] for x in game.clocks) + (1,)
        self.max_constant = max(self.bounds[:-1], default=1)
        self.num_clocks = len(game.clocks)
        self._succ = {}
        self._compiled = {}
        self._jump = {}

    def mask(self, names) -> int:
        m = 0
        for x in names:
            m |= 1 << self.index[x]
        return m


# ---------------------------------------------------------------------------
# classification and witnesses


def region_of(eg: EnlargedGame, state: GameState, z=0, tick=False, bl1=False) -> Region:
    z = Fraction(z)
    if not 0 <= z < 1:
        raise ValueError("tick clock value must lie in [0, 1)")
    vals = [Fraction(state.valuation[x]) for x in eg.clocks[:-1]] + [z]
    if any(v < 0 for v in vals):
        raise ValueError("clock valuations must be nonnegative")
    h = []
    unbounded = 0
    fracs = {}
    for i, v in enumerate(vals):
        c = eg.bounds[i]
        if i != eg.z and v > c:
            unbounded |= 1 << i
            h.append(c)
            continue
        n = v.numerator // v.denominator
        h.append(0 if i == eg.z else n)
        fracs.setdefault(v - n, []).append(i)
    c0 = 0
    classes = []
    for f in sorted(fracs):
        m = 0
        for i in fracs[f]:
            m |= 1 << i
        if f == 0:
            c0 = m
        else:
            classes.append(m)
    return Region(state.location, bool(tick), bool(bl1), tuple(h), unbounded, (c0, *classes))


def representative(eg: EnlargedGame, r: Region) -> dict:
    """Canonical member valuation (tick clock included under its name)."""
    n = len(r.classes) - 1
    out = {}
    for x in bits(r.unbounded):
        out[eg.clocks[x]] = Fraction(eg.bounds[x]) + Fraction(1, 2)
    for i, cls in enumerate(r.classes):
        for x in bits(cls):
            out[eg.clocks[x]] = r.h[x] + Fraction(i, n + 2)
    return out


def representative_state(eg: EnlargedGame, r: Region) -> tuple:
    """``(GameState, z)`` pair for the representative of ``r``."""
    v = representative(eg, r)
    z = v.pop(eg.tick_clock)
    return GameState(r.location, v), z


def check_region(eg: EnlargedGame, r: Region):
    """Assert the structural invariants of a region."""
    seen = r.unbounded
    assert not r.unbounded & (1 << eg.z), "tick clock cannot be unbounded"
    for i, cls in enumerate(r.classes):
        assert i == 0 or cls, "empty fractional class"
        assert not seen & cls, "classes overlap"
        seen |= cls
    assert seen == (1 << len(eg.clocks)) - 1, "partition does not cover the clocks"
    for x in bits(r.unbounded):
        assert r.h[x] == eg.bounds[x]
    for x in range(len(eg.clocks)):
        assert 0 <= r.h[x] <= eg.bounds[x]
    assert r.h[eg.z] == 0


def format_region(eg: EnlargedGame, r: Region) -> str:
    """Stable debug form, e.g. ``l0 | h: x=1 y=0 z=0 | {z}{x}{y} | tick=0 bl1=0``.

    Unbounded clocks are listed first as ``[x]``; an empty zero class is
    shown as ``{}``.
    """
    hs = " ".join(f"{eg.clocks[i]}={r.h[i]}" for i in range(len(eg.clocks)))
    blocks = ""
    if r.unbounded:
        blocks += "[" + ",".join(eg.clocks[i] for i in bits(r.unbounded)) + "]"
    blocks += "".join("{" + ",".join(eg.clocks[i] for i in bits(c)) + "}" for c in r.classes)
    return f"{r.location} | h: {hs} | {blocks} | tick={int(r.tick)} bl1={int(r.bl1)}"


# ---------------------------------------------------------------------------
# constraints over regions


def compile_constraint(eg: EnlargedGame, c):
    """Predicate on clock keys equivalent to ``c`` (memoised per constraint)."""
    f = eg._compiled.get(c)
    if f is None:
        f = eg._compiled[c] = _compile(eg, c)
    return f


def _compile(eg, c):
    if isinstance(c, (Le, Ge)):
        x = eg.index[c.clock]
        bit = 1 << x
        d = c.bound
        if Fraction(d).denominator == 1:
            d = int(d)
        if isinstance(c, Ge):
            return lambda key: bool(key[1] & bit) or key[0][x] >= d
        return lambda key: not key[1] & bit and (key[0][x] < d or (key[0][x] == d and bool(key[2][0] & bit)))
    if isinstance(c, Not):
        f = _compile(eg, c.arg)
        return lambda key: not f(key)
    if isinstance(c, And):
        fs = tuple(_compile(eg, a) for a in c.args)
        return lambda key: all(f(key) for f in fs)
    if isinstance(c, Const):
        v = c.value
        return lambda key: v
    raise TypeError(c)


def key_satisfies(eg: EnlargedGame, key, c) -> bool:
    return compile_constraint(eg, c)(key)


def region_satisfies(eg: EnlargedGame, r: Region, c) -> bool:
    """Truth of ``c`` on ``r``; constants of ``c`` must not exceed the clock bounds."""
    return key_satisfies(eg, r.clock_key, c)


# ---------------------------------------------------------------------------
# time elapse


def _second_key(eg, key, k, w, om):
    h, unbounded, classes = key
    n = len(classes) - 1
    c = eg.bounds
    z = eg.z
    newh = list(h)
    hmax = {}
    slots = [0] * (n + 1)
    tick = k > 0
    for j, cls in enumerate(classes):
        wraps = j + w > n
        slots[(j + w) % (n + 1)] = cls
        for x in bits(cls):
            if x == z:
                if wraps:
                    tick = True
                continue
            hm = h[x] + k + wraps
            hmax[x] = hm
            newh[x] = hm if hm <= c[x] else c[x]
    if om:
        slots.insert(0, 0)
    s0 = slots[0]
    for x in bits(s0):
        if x != z and hmax[x] > c[x]:
            unbounded |= 1 << x
            s0 &= ~(1 << x)
    out = [s0]
    for cls in slots[1:]:
        for x in bits(cls):
            if x != z and newh[x] == c[x]:
                unbounded |= 1 << x
                cls &= ~(1 << x)
        if cls:
            out.append(cls)
    return (tuple(newh), unbounded, tuple(out)), tick


def second_region(eg: EnlargedGame, src: Region, p: SuccessorParams) -> Region:
    """Region reached from ``src`` by the elapse described by ``p = (k, w, om)``.

    ``w`` rotates the fractional classes, ``k`` counts completed unit
    cycles and ``om`` adds the small step after which no clock is
    integral.  ``bl1`` is carried over; ``tick`` is recomputed.
    """
    key, tick = _second_key(eg, src.clock_key, p.k, p.w, p.om)
    return Region(src.location, tick, src.bl1, *key)


def successor_keys(eg: EnlargedGame, key) -> list:
    """Deduplicated ``(params, key, tick)`` list in time order (memoised)."""
    out = eg._succ.get(key)
    if out is not None:
        return out
    out = []
    seen = set()
    # rotating by more than n + 1 classes adds a unit to every clock
    # while also shifting the order, which no delay achieves
    wmax = min(len(key[2]), eg.num_clocks + 1)
    # once k pushes every user clock past its bound, larger k repeat the
    # same keys (z only depends on w and om, and tick is already set)
    h, unbounded = key[0], key[1]
    kstop = 1 + max((eg.bounds[x] - h[x] for x in range(eg.num_clocks) if not unbounded >> x & 1), default=0)
    for k in range(min(eg.max_constant, kstop) + 1):
        for w in range(wmax + 1):
            for om in (False, True):
                nk, tick = _second_key(eg, key, k, w, om)
                if (nk, tick) in seen:
                    continue
                seen.add((nk, tick))
                out.append((SuccessorParams(k, w, om), nk, tick))
    eg._succ[key] = out
    return out


def time_successors(eg: EnlargedGame, r: Region) -> list:
    """Time successors of ``r`` as ``(params, region)`` pairs in elapse order.

    The first entry is the zero delay.  Its region equals ``r`` except
    that the tick flag is cleared (no wrap of the tick clock happened).
    """
    return [(p, Region(r.location, tick, r.bl1, *key))
            for p, key, tick in successor_keys(eg, r.clock_key)]


def successor_bound(eg: EnlargedGame, with_tick_clock=True) -> int:
    """``4 * sum(c_x + 1)`` over the user clocks (and the tick clock if asked)."""
    cs = eg.bounds if with_tick_clock else eg.bounds[:-1]
    return 4 * sum(c + 1 for c in cs)


# ---------------------------------------------------------------------------
# discrete jumps


def jump_key(eg: EnlargedGame, key, reset_mask: int):
    if not reset_mask:
        return key
    memo = eg._jump
    k = (key, reset_mask)
    out = memo.get(k)
    if out is not None:
        return out
    h, unbounded, classes = key
    newh = list(h)
    for x in bits(reset_mask):
        newh[x] = 0
    keep = ~reset_mask
    rest = [cls & keep for cls in classes[1:]]
    out = (tuple(newh), unbounded & keep, ((classes[0] & keep) | reset_mask, *(c for c in rest if c)))
    memo[k] = out
    return out


def jump(eg: EnlargedGame, r: Region, target: str, resets=()) -> Region:
    """``r[loc := target, resets := 0]``; flags are left untouched."""
    key = jump_key(eg, r.clock_key, eg.mask(resets))
    return Region(target, r.tick, r.bl1, *key)


# ---------------------------------------------------------------------------
# counting


def region_count_bound(game: TimedAutomatonGame) -> int:
    """``16 |L| prod(c_x + 1) (|C|+1)! 2^(|C|+1)`` for the enlarged structure."""
    import math

    prod = 1
    for c in game.clock_bounds.values():
        prod *= c + 1
    n = len(game.clocks)
    return 16 * len(game.locations) * prod * math.factorial(n + 1) * 2 ** (n + 1)


@dataclass
class RegionStats:
    regions: int
    max_successors: int
