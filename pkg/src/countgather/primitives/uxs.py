"""Exploration sequences found by greedy search and the EXPLO fragment built on them.

A sequence x_1..x_M drives a walk: after entering a degree-d node through
port p, leave through (p + x_i) mod d. The very first step acts as if the
agent had entered through port 0. The search grows the sequence one offset
at a time, simulating the walk from every start node of every connected
port-labeled simple graph with at most N nodes, and picks the offset that
finishes or advances the most walks. A walk drops out once it has seen its
whole graph.
"""

from __future__ import annotations

import random
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from ..engine import Context, Fragment, Move, Observation
from ..family import enumerate_graphs, graphs_of_size
from ..graph import PortLabeledGraph
from . import cache

MAX_LENGTH = 10_000


def _tables(graphs: Sequence[PortLabeledGraph], width: int):
    G = len(graphs)
    nbr = np.zeros((G, width, max(width - 1, 1)), dtype=np.int8)
    rev = np.zeros_like(nbr)
    deg = np.ones((G, width), dtype=np.int8)
    for gi, g in enumerate(graphs):
        for v, row in enumerate(g.adj):
            deg[gi, v] = max(len(row), 1)
            for p, (u, q) in enumerate(row):
                nbr[gi, v, p] = u
                rev[gi, v, p] = q
    return nbr, rev, deg


def _walkers(graphs: Sequence[PortLabeledGraph]):
    gi, start, full = [], [], []
    for i, g in enumerate(graphs):
        for s in range(g.n):
            gi.append(i)
            start.append(s)
            full.append((1 << g.n) - 1)
    gi_a = np.array(gi, dtype=np.int64)
    node = np.array(start, dtype=np.int8)
    seen = (np.ones(len(start), dtype=np.int64) << node.astype(np.int64)).astype(np.int64)
    return gi_a, node, np.zeros(len(start), dtype=np.int8), seen, np.array(full, dtype=np.int64)


def _family(N: int) -> list[PortLabeledGraph]:
    return [g for n in range(2, N + 1) for g in graphs_of_size(n)]


def search_sequence(N: int) -> list[int]:
    graphs = _family(N)
    nbr, rev, deg = _tables(graphs, N)
    gi, node, entry, seen, full = _walkers(graphs)
    rng = random.Random(N)
    seq: list[int] = []
    node64 = node.astype(np.int64)
    entry64 = entry.astype(np.int64)
    while len(gi):
        if len(seq) >= MAX_LENGTH:
            raise RuntimeError(f"no exploration sequence for N={N} within {MAX_LENGTH} steps")
        d = deg[gi, node64].astype(np.int64)
        best = None
        for x in range(N - 1):
            q = (entry64 + x) % d
            nxt = nbr[gi, node64, q].astype(np.int64)
            s2 = seen | (np.int64(1) << nxt)
            done = int(np.count_nonzero(s2 == full))
            fresh = int(np.count_nonzero(s2 != seen))
            score = (done, fresh)
            if best is None or score > best[0]:
                best = (score, x)
        assert best is not None
        x = best[1] if best[0] != (0, 0) else rng.randrange(N - 1)
        seq.append(x)
        q = (entry64 + x) % d
        nxt = nbr[gi, node64, q].astype(np.int64)
        entry64 = rev[gi, node64, q].astype(np.int64)
        node64 = nxt
        seen = seen | (np.int64(1) << nxt)
        keep = seen != full
        gi, node64, entry64, seen, full = gi[keep], node64[keep], entry64[keep], seen[keep], full[keep]
    return seq


def covers_all(N: int, seq: Sequence[int]) -> bool:
    """Vectorized check of a sequence against the whole family; used right after the search."""
    graphs = _family(N)
    nbr, rev, deg = _tables(graphs, N)
    gi, node, entry, seen, full = _walkers(graphs)
    node64 = node.astype(np.int64)
    entry64 = entry.astype(np.int64)
    for x in seq:
        d = deg[gi, node64].astype(np.int64)
        q = (entry64 + x) % d
        nxt = nbr[gi, node64, q].astype(np.int64)
        entry64 = rev[gi, node64, q].astype(np.int64)
        node64 = nxt
        seen = seen | (np.int64(1) << nxt)
    return bool(np.all(seen == full))


def walk(g: PortLabeledGraph, start: int, seq: Sequence[int]) -> list[int]:
    """Nodes visited by the walk, start included."""
    v, p = start, 0
    out = [v]
    for x in seq:
        d = g.degree(v)
        v, p = g.adj[v][(p + x) % d]
        out.append(v)
    return out


@lru_cache(maxsize=None)
def build_uxs(N: int) -> tuple[int, ...]:
    if N < 2:
        raise ValueError("N must be at least 2")

    def build():
        seq = search_sequence(N)
        if not covers_all(N, seq):
            raise RuntimeError("sequence search produced a non-covering sequence")
        return seq

    return tuple(cache.cached("uxs", f"N{N}", build, meta={"N": N}))


def t_explo(N: int) -> int:
    return 2 * len(build_uxs(N))


def explo(ctx: Context, seq: Sequence[int]) -> Fragment:
    """Effective part then backtrack, one move per round. Returns the least CurCard seen while executing it."""
    low = ctx.obs.cur_card
    back: list[int] = []
    p = 0
    for x in seq:
        low = min(low, ctx.obs.cur_card)
        yield Move((p + x) % ctx.obs.degree)
        p = ctx.obs.entry_port
        back.append(p)
    for q in reversed(back):
        low = min(low, ctx.obs.cur_card)
        yield Move(q)
    return low


__all__ = ["build_uxs", "t_explo", "explo", "walk", "search_sequence", "covers_all", "enumerate_graphs"]
