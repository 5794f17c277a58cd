"""Map construction with a stationary token.

The explorer grows a map of the graph rooted at the token node. Every known
node keeps the port path from the token to it and the way back. To explore
an unknown edge (v, p) the explorer walks to v, takes p and lands on some
node w with degree d and entry port q. For each known node u of degree d it
then walks u's way back from w, checking every entry port, and looks for the
token at the end. The walk back from w can only end on the token with all
entry ports matching if w is u, since the reversed walk is exactly u's path
from the token. If no known node matches, w is new. Each failed check is
undone move by move.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

from ..engine import Context, Fragment, Move, Observation
from ..family import enumerate_graphs
from ..graph import PortLabeledGraph
from . import cache

TokenTest = Callable[[Observation], bool]


@dataclass(frozen=True)
class _Known:
    path: tuple[int, ...]  # ports from the token
    back: tuple[int, ...]  # ports from this node to the token
    expect: tuple[int, ...]  # entry ports seen while walking `back`
    degree: int


def est(ctx: Context, at_token: TokenTest) -> Fragment:
    """Explore from the token node; returns the number of nodes. Ends on the token."""

    def move(p: int) -> Fragment:
        yield Move(p)

    known = [_Known((), (), (), ctx.obs.degree)]
    edges: dict[tuple[int, int], tuple[int, int]] = {}

    def probe(u: _Known) -> Fragment:
        taken: list[int] = []
        ok = True
        for port, want in zip(u.back, u.expect):
            if port >= ctx.obs.degree:
                ok = False
                break
            yield from move(port)
            taken.append(ctx.obs.entry_port)
            if ctx.obs.entry_port != want:
                ok = False
                break
        if ok and at_token(ctx.obs):
            return True
        for q in reversed(taken):
            yield from move(q)
        return False

    i = 0
    while i < len(known):
        v = known[i]
        for p in range(v.degree):
            if (i, p) in edges:
                continue
            for port in v.path:
                yield from move(port)
            yield from move(p)
            d, q = ctx.obs.degree, ctx.obs.entry_port
            match = None
            for j, u in enumerate(known):
                if u.degree != d or (j, q) in edges:
                    continue
                if (yield from probe(u)):
                    match = j
                    break
            if match is None:
                match = len(known)
                known.append(_Known(v.path + (p,), (q,) + v.back, (p,) + v.expect, d))
                yield from move(q)
                for port in v.back:
                    yield from move(port)
            edges[(i, p)] = (match, q)
            edges[(match, q)] = (i, p)
        i += 1
    return len(known)


def run_est(g: PortLabeledGraph, token: int) -> tuple[int, int, int]:
    """Drive est directly on a graph with a fixed token. Returns (learned size, end node, moves)."""
    ctx = Context(1)
    v = token
    entry: Optional[int] = None

    def observe() -> Observation:
        return Observation(g.degree(v), entry, 2 if v == token else 1, 1)

    ctx.obs = observe()
    gen = est(ctx, lambda o: o.cur_card > 1)
    moves = 0
    try:
        req = next(gen)
        while True:
            assert isinstance(req, Move)
            v, entry = g.adj[v][req.port]
            moves += 1
            ctx.obs = observe()
            req = gen.send(None)
    except StopIteration as fin:
        return fin.value, v, moves


def _worst_moves(n: int) -> int:
    worst = 0
    for g in enumerate_graphs(n):
        if g.n < 2:
            continue
        for t in range(g.n):
            size, end, moves = run_est(g, t)
            if size != g.n or end != t:
                raise RuntimeError("map construction failed on a graph")
            worst = max(worst, moves)
    return worst


EST_EXHAUSTIVE_LIMIT = 4


@lru_cache(maxsize=None)
def t_est_measured(n: int) -> int:
    """Worst-case number of moves over every graph with at most n nodes and every token node."""
    if n > EST_EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive EST bound only for n <= {EST_EXHAUSTIVE_LIMIT}")
    return int(cache.cached("test", f"n{n}", lambda: _worst_moves(n), meta={"n": n}))


def est_plus(ctx: Context, n_h: int, budget: int) -> Fragment:
    """Token simulated by co-located agents (CurCard > 1).

    Part 1 runs est for at most `budget` rounds; part 2 retraces every part-1
    move in reverse. True iff est finished in time and found exactly n_h nodes.
    """
    from ..flow import for_rounds, recording

    trail: list[int] = []
    finished, size = yield from recording(ctx, for_rounds(ctx, est(ctx, lambda o: o.cur_card > 1), budget), trail)
    for q in reversed(trail):
        yield Move(q)
    return bool(finished and size == n_h)
