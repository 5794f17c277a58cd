"""Label-driven rendezvous walk.

The label's code word is repeated forever and read one bit per block of
3T rounds (T = T_EXPLO(N)). A 1 means: wait T, explore, wait T. A 0 means:
stay put for the whole block. Every block ends on the start node.

Two distinct code words differ within the first |code(shorter)| bits, since
no code word is a prefix of another. In that block one agent explores while
the other sits still for the full 3T rounds, so with start times at most T/2
apart the explorer passes the sitter's node.
"""

from __future__ import annotations

from typing import Sequence

from ..engine import Context, Fragment, Wait
from .bits import code, to_binary
from .uxs import explo


def tz_word(label: int) -> str:
    return code(to_binary(label))


def tz(ctx: Context, label: int, seq: Sequence[int]) -> Fragment:
    T = 2 * len(seq)
    word = tz_word(label)
    while True:
        for b in word:
            if b == "1":
                yield Wait(T)
                yield from explo(ctx, seq)
                yield Wait(T)
            else:
                yield Wait(3 * T)


def tz_meeting_bound(N_explo: int, length: int) -> int:
    """P(N, l) for a given T_EXPLO(N): 3(2l+4)T."""
    return 3 * (2 * length + 4) * N_explo
