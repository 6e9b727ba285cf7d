"""Turn-based parity games: attractors, Zielonka, small progress measures.

Max-parity convention: a play is won by player 1 iff the largest
priority seen infinitely often is even.  Player 1 is the even player.
"""
from __future__ import annotations

from collections import deque
from itertools import chain
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


class MalformedGame(ValueError):
    pass


class FiniteParityGame:
    """Game graph with per-state owner (1 or 2) and priority.

    ``payload`` and ``labels`` are optional per-state annotations; solvers
    only look at ``owner``, ``priority`` and ``succ``.
    """

    def __init__(self, owner, priority, succ, payload=None, labels=None, label_fn=None):
        self.owner = list(owner)
        self.priority = list(priority)
        self.succ = [s if isinstance(s, list) else list(s) for s in succ]
        n = len(self.owner)
        if not (len(self.priority) == len(self.succ) == n):
            raise MalformedGame("owner, priority and succ must have equal length")
        self.payload = list(payload) if payload is not None else [None] * n
        self._labels = list(labels) if labels is not None else None
        self._label_fn = label_fn or str
        self._pred = None

    @property
    def labels(self):
        if self._labels is None:
            self._labels = [self._label_fn(v) for v in range(len(self))]
        return self._labels

    def __len__(self):
        return len(self.owner)

    @property
    def num_edges(self):
        return sum(len(s) for s in self.succ)

    @property
    def pred(self):
        if self._pred is None:
            pred = [[] for _ in self.owner]
            for v, ws in enumerate(self.succ):
                for w in ws:
                    pred[w].append(v)
            self._pred = pred
        return self._pred

    def check(self):
        n = len(self)
        for v, ws in enumerate(self.succ):
            if not ws:
                raise MalformedGame(f"state {v} ({self.labels[v]}) has no successor")
            for w in ws:
                if not 0 <= w < n:
                    raise MalformedGame(f"state {v} has out-of-range successor {w}")
            if self.owner[v] not in (1, 2):
                raise MalformedGame(f"state {v} has owner {self.owner[v]}")
            if self.priority[v] < 0:
                raise MalformedGame(f"state {v} has negative priority")

    def is_bipartite(self, exempt=()):
        exempt = set(exempt)
        for v, ws in enumerate(self.succ):
            if v in exempt:
                continue
            for w in ws:
                if w not in exempt and self.owner[w] == self.owner[v]:
                    return False
        return True


@dataclass
class Solution:
    win1: set
    win2: set
    strategy1: dict = field(default_factory=dict)
    strategy2: dict = field(default_factory=dict)


def _even_player(p):
    return 1 if p % 2 == 0 else 2


def attractor(g: FiniteParityGame, player, target, within=None, strategy=None):
    """Set of states (inside ``within``) from which ``player`` forces a visit to ``target``.

    If ``strategy`` is a dict it receives an attracting successor for
    every added state owned by ``player``.
    """
    within = set(range(len(g))) if within is None else within
    attr = set(target) & within
    count = {}
    pred = g.pred
    succ = g.succ
    owner = g.owner
    queue = deque(attr)
    while queue:
        w = queue.popleft()
        for v in pred[w]:
            if v in attr or v not in within:
                continue
            if owner[v] == player:
                attr.add(v)
                if strategy is not None:
                    strategy[v] = w
                queue.append(v)
            else:
                c = count.get(v)
                if c is None:
                    c = sum(1 for u in succ[v] if u in within)
                c -= 1
                count[v] = c
                if c == 0:
                    attr.add(v)
                    queue.append(v)
    return attr


def solve_zielonka(g: FiniteParityGame) -> Solution:
    """Zielonka's recursive algorithm, with the second recursive call unrolled into a loop."""
    g.check()
    strategy = {}
    win1, win2 = _zielonka(g, set(range(len(g))), strategy)
    s1 = {v: strategy[v] for v in win1 if g.owner[v] == 1}
    s2 = {v: strategy[v] for v in win2 if g.owner[v] == 2}
    return Solution(win1, win2, s1, s2)


def _zielonka(g, V, strategy):
    if not V:
        return set(), set()
    pri = g.priority
    owner = g.owner
    p = max(pri[v] for v in V)
    a = _even_player(p)
    b = 3 - a
    won_b = set()
    sub = V
    while True:
        top = {v for v in sub if pri[v] == p}
        A = attractor(g, a, top, sub, strategy)
        rest = sub - A
        w1, w2 = _zielonka(g, rest, strategy)
        wa, wb = (w1, w2) if a == 1 else (w2, w1)
        if not wb:
            for v in top:
                if owner[v] == a:
                    strategy[v] = next(w for w in g.succ[v] if w in sub)
            won_a = sub
            break
        B = attractor(g, b, wb, sub, strategy)
        won_b = won_b | B
        sub = sub - B
        if not sub:
            won_a = set()
            break
    return (won_a, won_b) if a == 1 else (won_b, won_a)


# ---------------------------------------------------------------------------
# small progress measures


class LiftingBudget(RuntimeError):
    """Raised by :func:`solve_spm` when the lifting budget runs out."""


def solve_spm(g: FiniteParityGame, budget=None) -> set:
    """Winning set of player 1 via Jurdzinski's small progress measures.

    Strongly connected components are solved sinks first.  Inside a
    component, states that leave it are fixed sinks won by whoever won
    them downstream, so measures only count the component's own states.
    Player 1's lifting and the dual lifting for player 2 run in turns and
    the first one to reach its fixpoint decides the component.

    ``budget`` caps the total number of lifts (``LiftingBudget`` is
    raised when it is exceeded).
    """
    g.check()
    n = len(g)
    owner, pri = g.owner, g.priority
    dual_owner = [3 - o for o in owner]
    dual_pri = [p + 1 for p in pri]
    comp, order = _scc_order(g)
    label = [0] * n
    for c, vs in enumerate(comp):
        for v in vs:
            label[v] = c
    win = [False] * n
    spent = 0
    succ = g.succ
    for c in order:
        nodes = comp[c]
        if len(nodes) == 1 and nodes[0] not in succ[nodes[0]]:
            # no cycle: one lift from the fixed successors settles it
            v = nodes[0]
            win[v] = (any if owner[v] == 1 else all)(win[w] for w in succ[v])
            continue
        lift1 = _lifting(g, nodes, label, c, owner, pri, lambda w: win[w])
        lift2 = _lifting(g, nodes, label, c, dual_owner, dual_pri, lambda w: not win[w])
        w1 = None
        while w1 is None:
            for lift, mine in ((lift1, True), (lift2, False)):
                try:
                    spent += next(lift)
                except StopIteration as stop:
                    w1 = stop.value if mine else set(nodes) - stop.value
                    break
            if budget is not None and spent > budget:
                raise LiftingBudget(f"more than {budget} lifts")
        for v in w1:
            win[v] = True
    return {v for v in range(n) if win[v]}


def certify_partition(g: FiniteParityGame, win1) -> tuple:
    """Check a claimed partition with progress measures on each side.

    Lifts player 1's measures on ``win1`` and the dual measures on its
    complement, treating every state outside the lifted side as lost.
    A finite measure proves the state is won by that side (progress
    measures are sound), and winners never climb, so this stays cheap.
    Returns the two proved sets; the claim holds iff they are ``win1``
    and its complement.
    """
    g.check()
    n = len(g)
    win1 = set(win1)
    side = [1 if v in win1 else 0 for v in range(n)]
    nodes1 = [v for v in range(n) if side[v]]
    nodes2 = [v for v in range(n) if not side[v]]
    dual_owner = [3 - o for o in g.owner]
    dual_pri = [p + 1 for p in g.priority]
    lost = lambda w: False
    proved1 = _run(_lifting(g, nodes1, side, 1, g.owner, g.priority, lost))
    proved2 = _run(_lifting(g, nodes2, side, 0, dual_owner, dual_pri, lost))
    return proved1, proved2


def _run(gen):
    while True:
        try:
            next(gen)
        except StopIteration as stop:
            return stop.value


_CHUNK = 2048


def _lifting(g, nodes, label, c, owner, pri, exit_good):
    """Generator lifting ``nodes`` (the states with ``label[v] == c``) for the even player.

    Yields the number of lifts done every ``_CHUNK`` lifts and returns
    the set of states whose measure stays below top.  A successor ``w``
    outside the set is a fixed sink, won by the even player iff
    ``exit_good(w)``.

    A measure is stored as one integer in mixed radix: the component of
    odd priority ``q`` counts up to the number of ``q``-states, larger
    priorities are more significant, and ``top`` is the first value that
    does not fit.  Truncating below priority ``p`` is then ``m - m % w``
    and the strict increase for odd ``p`` adds ``w`` (carries included).
    """
    odd = sorted({pri[v] for v in nodes if pri[v] % 2})
    count = {q: 0 for q in odd}
    for v in nodes:
        if pri[v] % 2:
            count[pri[v]] += 1
    weight = {}
    top = 1
    for q in odd:
        weight[q] = top
        top *= count[q] + 1
    step = {}
    for p in {pri[v] for v in nodes}:
        if p % 2:
            step[p] = (weight[p], weight[p])
        else:
            above = [q for q in odd if q > p]
            step[p] = (weight[above[0]] if above else top, 0)

    rho = {v: 0 for v in nodes}
    for v in nodes:
        for w in g.succ[v]:
            if label[w] != c:
                rho[w] = 0 if exit_good(w) else top
    succ, pred = g.succ, g.pred
    queue = deque(nodes)
    queued = set(nodes)
    steps = 0
    while queue:
        v = queue.popleft()
        queued.discard(v)
        old = rho[v]
        if old == top:
            continue
        # prog is monotone, so the best successor can be picked first
        if owner[v] == 1:
            m = min([rho[w] for w in succ[v]])
        else:
            m = max([rho[w] for w in succ[v]])
        w, inc = step[pri[v]]
        new = m - m % w + inc
        if new > top:
            new = top
        if new > old:
            rho[v] = new
            for u in pred[v]:
                if u not in queued and label[u] == c and rho[u] != top:
                    queued.add(u)
                    queue.append(u)
        steps += 1
        if steps == _CHUNK:
            yield steps
            steps = 0
    return {v for v in nodes if rho[v] != top}


def _csr(g):
    n = len(g)
    lengths = np.fromiter((len(s) for s in g.succ), dtype=np.int64, count=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(lengths, out=indptr[1:])
    indices = np.fromiter(chain.from_iterable(g.succ), dtype=np.int64, count=int(indptr[-1]))
    data = np.ones(len(indices), dtype=np.int8)
    return csr_matrix((data, indices, indptr), shape=(n, n)), lengths


def _scc_order(g):
    """Strongly connected components, listed sinks first.

    Returns ``(members, order)`` where ``members[c]`` lists the states of
    component ``c`` and ``order`` is a reverse topological order.
    """
    m, lengths = _csr(g)
    ncomp, label = connected_components(m, directed=True, connection="strong")
    label = label.astype(np.int64)
    src = np.repeat(label, lengths)
    dst = label[m.indices]
    cross = src != dst
    pairs = np.unique(src[cross] * ncomp + dst[cross])
    csrc, cdst = pairs // ncomp, pairs % ncomp
    outdeg = np.bincount(csrc, minlength=ncomp)
    rev = [[] for _ in range(ncomp)]
    for a, b in zip(csrc.tolist(), cdst.tolist()):
        rev[b].append(a)
    outdeg = outdeg.tolist()
    order = [c for c in range(ncomp) if outdeg[c] == 0]
    i = 0
    while i < len(order):
        for a in rev[order[i]]:
            outdeg[a] -= 1
            if outdeg[a] == 0:
                order.append(a)
        i += 1
    members = [[] for _ in range(ncomp)]
    for v, c in enumerate(label.tolist()):
        members[c].append(v)
    return members, order


# ---------------------------------------------------------------------------
# certificates


def _bad_cycle(nodes, edges, pri, parity):
    """Search for a cycle whose maximal priority has the given parity.

    ``edges`` maps node -> successors (already restricted to ``nodes``).
    Returns a list of nodes forming such a cycle, or None.
    """
    if not nodes:
        return None
    order = sorted(nodes)
    for p in sorted({pri[v] for v in nodes if pri[v] % 2 == parity}):
        keep = [v for v in order if pri[v] <= p]
        kidx = {v: i for i, v in enumerate(keep)}
        rows, cols = [], []
        for v in keep:
            for w in edges[v]:
                if w in kidx:
                    rows.append(kidx[v])
                    cols.append(kidx[w])
        m = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(len(keep), len(keep)))
        _, comp = connected_components(m, directed=True, connection="strong")
        sizes = np.bincount(comp)
        for v in keep:
            if pri[v] != p:
                continue
            c = comp[kidx[v]]
            if sizes[c] > 1 or v in edges[v]:
                members = {u for u in keep if comp[kidx[u]] == c}
                return _cycle_through(v, members, edges)
    return None


def _cycle_through(v, members, edges):
    parent = {}
    queue = deque([v])
    seen = {v}
    while queue:
        u = queue.popleft()
        for w in edges[u]:
            if w not in members:
                continue
            if w == v:
                path = [u]
                while path[-1] != v:
                    path.append(parent[path[-1]])
                return path[::-1]
            if w not in seen:
                seen.add(w)
                parent[w] = u
                queue.append(w)
    return [v]


def strategy_violation(g: FiniteParityGame, sol: Solution):
    """First defect of ``sol`` as a human-readable string, or None."""
    n = len(g)
    if sol.win1 & sol.win2 or (sol.win1 | sol.win2) != set(range(n)):
        return "winning sets do not partition the states"
    for player, win, strat, parity in ((1, sol.win1, sol.strategy1, 1), (2, sol.win2, sol.strategy2, 0)):
        edges = {}
        for v in win:
            if g.owner[v] == player:
                w = strat.get(v)
                if w is None or w not in g.succ[v]:
                    return f"player {player} has no valid move at state {v}"
                if w not in win:
                    return f"player {player} strategy leaves its winning set at state {v}"
                edges[v] = [w]
            else:
                if any(w not in win for w in g.succ[v]):
                    return f"opponent can leave player {player}'s winning set at state {v}"
                edges[v] = g.succ[v]
        cyc = _bad_cycle(win, edges, g.priority, parity)
        if cyc is not None:
            return f"player {player} losing cycle {cyc}"
    return None


def verify_strategy(g: FiniteParityGame, sol: Solution) -> bool:
    return strategy_violation(g, sol) is None


SOLVERS = {
    "zielonka": lambda g: solve_zielonka(g).win1,
    "spm": solve_spm,
}
