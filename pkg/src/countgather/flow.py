"""Combinators for fragment generators."""

from __future__ import annotations

from typing import Callable, Optional

from .engine import Context, Fragment, Mark, Move, Observation, Wait

Pred = Callable[[Observation], bool]


def _either(a: Optional[Pred], b: Pred) -> Pred:
    if a is None:
        return b
    return lambda o: a(o) or b(o)


def interruptible(ctx: Context, body: Fragment, stop: Pred) -> Fragment:
    """Run body, abandoning it at the first round-start snapshot where stop holds.

    Returns (True, body result) on completion and (False, None) on interruption.
    """
    send = None
    started = False
    while True:
        if stop(ctx.obs):
            body.close()
            return False, None
        try:
            req = body.send(send) if started else next(body)
        except StopIteration as fin:
            return True, fin.value
        started = True
        if type(req) is Wait:
            req = Wait(req.rounds, _either(req.until, stop))
        send = yield req


def for_rounds(ctx: Context, body: Fragment, k: int) -> Fragment:
    """Run body for exactly k rounds (or until it ends, whichever is first), then drop it.

    Returns (finished, result) where finished tells whether body ran to its end.
    """
    end = ctx.clock + k
    send = None
    started = False
    cut = False
    while True:
        if cut and ctx.clock >= end:
            # the body asked to wait past the budget; it never sees the wait end
            body.close()
            return False, None
        try:
            req = body.send(send) if started else next(body)
        except StopIteration as fin:
            return True, fin.value
        started = True
        if type(req) is Mark:
            send = yield req
            continue
        if ctx.clock >= end:
            body.close()
            return False, None
        cut = False
        if type(req) is Wait:
            left = end - ctx.clock
            cut = req.rounds is None or req.rounds > left
            if cut:
                req = Wait(left, req.until)
        send = yield req


def recording(ctx: Context, body: Fragment, trail: list[int]) -> Fragment:
    """Pass body through, appending the entry port after every move it makes."""
    send = None
    started = False
    while True:
        try:
            req = body.send(send) if started else next(body)
        except StopIteration as fin:
            return fin.value
        started = True
        send = yield req
        if type(req) is Move:
            trail.append(ctx.obs.entry_port)


def wait_until_spent(ctx: Context, since: int, total: int) -> Fragment:
    """Wait until exactly `total` rounds have passed since local time `since`."""
    spent = ctx.clock - since
    if spent > total:
        raise AssertionError(f"schedule overrun: {spent} rounds spent, budget {total}")
    if total > spent:
        yield Wait(total - spent)


def stable_wait(ctx: Context, rounds: int) -> Fragment:
    """Wait until `rounds` consecutive rounds have passed with no change of CurCard.

    The run is counted from the current round; any change restarts it. With a
    steady count this waits exactly `rounds` rounds.
    """
    while True:
        card = ctx.obs.cur_card
        waited = yield Wait(rounds, lambda o, c=card: o.cur_card != c)
        if waited >= rounds:
            return


def mark(name: str, data=None) -> Fragment:
    yield Mark(name, data)
