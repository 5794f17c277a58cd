"""Gathering without any bound on the graph size.

Agents walk through the shared enumeration of configurations. Under
hypothesis h an agent first sweeps a ball around its start node (waking
anyone who could interfere), waits S_h, walks to where the configuration
puts the smallest label, and then runs three checks with the agents it finds
there: a star dance that certifies who is present, two clean sweeps, and
size checks with the others acting as a token. Any failure retraces every
move of the first part, slowly, and pads the hypothesis to exactly T_h
rounds so all agents stay in step.
"""

from __future__ import annotations

import itertools
from typing import Optional

from ..engine import Context, Declare, Fragment, Mark, Move, Wait
from ..flow import recording, wait_until_spent
from ..primitives.est import est_plus
from ..primitives.profile import ConstantsProfile, get_profile
from .configs import Configuration, enumerate_config


def ball_traversal(ctx: Context, h: int, prof: ConstantsProfile, cfg: Configuration) -> Fragment:
    n_h = cfg.n
    R = prof.ball_radius(h)
    slow = prof.slowdown(h)
    for x in itertools.product(range(n_h - 1), repeat=R):
        back: list[int] = []
        i = 0
        while i < R:
            if ctx.obs.degree >= n_h:
                return False
            if x[i] >= ctx.obs.degree:
                break
            yield Wait(slow)
            yield Move(x[i])
            back.append(ctx.obs.entry_port)
            i += 1
        while back:
            yield Wait(slow)
            yield Move(back.pop())
    return True


def move_to_central(ctx: Context, h: int, prof: ConstantsProfile, cfg: Configuration) -> Fragment:
    L = ctx.label
    if L not in cfg.labels:
        return False
    for p in cfg.path(L):
        if p >= ctx.obs.degree:
            return False
        yield Move(p)
    k = cfg.k
    patience = prof.s(h) + cfg.n
    yield Wait(patience, lambda o: o.cur_card == k)
    if ctx.obs.cur_card != k:
        return False
    yield Wait(patience)
    if ctx.obs.cur_card != k:
        return False
    # The agent holding the smallest label started at this node and may have
    # been sitting here while the others already began their confirmation
    # wait. Its step out and back is the cue from which everyone starts the
    # star dance in the same round.
    if cfg.rank(L) == 0:
        yield Move(0)
        yield Move(ctx.obs.entry_port)
        return ctx.obs.cur_card == k
    yield Wait(patience + 1, lambda o: o.cur_card != k)
    if ctx.obs.cur_card != k - 1:
        return False
    yield Wait(1)
    return ctx.obs.cur_card == k


def star_check(ctx: Context, h: int, prof: ConstantsProfile, cfg: Configuration) -> Fragment:
    d = ctx.obs.degree
    k = cfg.k
    mine = cfg.rank(ctx.label)
    ok = True
    for t in (1, 2):
        for i in range(k):
            if i == mine and (t == 1 or ok):
                for j in range(d):
                    yield Move(j)
                    back = ctx.obs.entry_port
                    if t == 1 and ctx.obs.cur_card != 1:
                        ok = False
                    yield Move(back)
                    if ctx.obs.cur_card != k:
                        ok = False
            else:
                for j in range(1, 2 * d + 1):
                    yield Wait(1)
                    want = k - 1 if j % 2 else k
                    if ctx.obs.cur_card != want:
                        ok = False
    return ok


def ensure_clean_exploration(ctx: Context, h: int, prof: ConstantsProfile, cfg: Configuration) -> Fragment:
    E = prof.sweep_length(h)
    k = cfg.k
    for _ in (1, 2):
        for x in itertools.product(range(cfg.n - 1), repeat=E):
            back: list[int] = []
            for p in x:
                if p >= ctx.obs.degree:
                    break
                yield Move(p)
                back.append(ctx.obs.entry_port)
                if ctx.obs.cur_card != k:
                    return False
            for q in reversed(back):
                yield Move(q)
    return True


def graph_size_check(ctx: Context, h: int, prof: ConstantsProfile, cfg: Configuration) -> Fragment:
    start = ctx.clock
    budget = prof.t_est(cfg.n)
    turn = cfg.rank(ctx.label) + 1
    ok = False
    for i in range(1, cfg.k + 1):
        if i == turn:
            ok = yield from est_plus(ctx, cfg.n, budget)
        yield from wait_until_spent(ctx, start, 2 * i * budget)
    return ok


ROUTINES = (
    ("ball", ball_traversal),
    ("central", move_to_central),
    ("star", star_check),
    ("clean", ensure_clean_exploration),
    ("size", graph_size_check),
)


def first_part(ctx: Context, h: int, prof: ConstantsProfile, cfg: Configuration) -> Fragment:
    for name, routine in ROUTINES:
        yield Mark("routine", {"h": h, "name": name})
        ok = yield from routine(ctx, h, prof, cfg)
        if not ok:
            yield Mark("routine_false", {"h": h, "name": name})
            return False
        if name == "ball":
            yield Wait(prof.s(h))
    return True


def hypothesis(ctx: Context, h: int, prof: ConstantsProfile) -> Fragment:
    cfg = enumerate_config(h)
    prof.check_unknown(h)
    start = ctx.clock
    yield Mark("hypothesis", {"h": h})
    trail: list[int] = []
    if (yield from recording(ctx, first_part(ctx, h, prof, cfg), trail)):
        return True
    slow = prof.slowdown(h)
    for q in reversed(trail):
        yield Wait(slow)
        yield Move(q)
    yield from wait_until_spent(ctx, start, prof.t_hyp(h))
    yield Mark("hypothesis_false", {"h": h, "spent": ctx.clock - start})
    return False


def gather_unknown(ctx: Context, profile: Optional[ConstantsProfile] = None, gossip_after: Optional[str] = None) -> Fragment:
    prof = profile or get_profile("desk")
    h = 0
    while True:
        h += 1
        if (yield from hypothesis(ctx, h, prof)):
            break
    cfg = enumerate_config(h)
    result = {"leader": min(cfg.labels), "size": cfg.n, "h": h}
    if gossip_after is not None:
        yield Mark("gathered", result)
        return result
    yield Declare(result)
    return result
