"""All-to-all message exchange for a gathered team.

Once the team stands together and in step, repeated calls to `communicate`
with growing probe length pull out the messages one distinct value at a time:
shortest first, lexicographically smallest among equals, together with how
many agents hold it. Messages travel as code words, so a probe of length j
returns a word ending in 01 exactly when some pending message has length j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .engine import Context, Declare, Fragment, Mark
from .primitives.bits import code, decode
from .primitives.profile import ConstantsProfile
from .primitives.uxs import build_uxs
from .protocol_known import communicate, gather_known
from .protocol_unknown.routines import gather_unknown


@dataclass
class MessageInventory:
    S: dict[str, int] = field(default_factory=dict)
    i: int = 0
    b: bool = True
    j: int = 2
    harvests: list[tuple[int, str, int]] = field(default_factory=list)  # (round, word, count)

    def check(self) -> None:
        if sum(self.S.values()) != self.i:
            raise AssertionError("message counts do not add up to i")
        for m, k in self.S.items():
            if k < 1 or not _is_code(m):
                raise AssertionError(f"bad inventory entry {m!r}: {k}")

    def messages(self) -> dict[str, int]:
        """The inventory with code words turned back into raw payloads."""
        return {decode(m): k for m, k in self.S.items()}


def _is_code(m: str) -> bool:
    try:
        decode(m)
    except ValueError:
        return False
    return True


def gossip(ctx: Context, message: str, N: int) -> Fragment:
    """Run the exchange with raw payload `message`; returns the final MessageInventory."""
    seq = build_uxs(N)
    M = code(message)
    a = ctx.obs.cur_card
    inv = MessageInventory()
    while inv.i != a:
        yield Mark("probe", {"j": inv.j})
        m, k = yield from communicate(ctx, inv.j, M, inv.b, seq)
        if m.endswith("01"):
            inv.S[m] = k
            inv.i += k
            inv.j = 2
            inv.harvests.append((ctx.clock, m, k))
            yield Mark("harvest", {"word": m, "count": k})
            if M in inv.S:
                inv.b = False
        else:
            inv.j += 2
    inv.check()
    return inv


def gossip_rounds(T: int, words: list[str]) -> int:
    """Rounds the exchange takes for the given harvested words: per word of length L, sum over s <= L/2 of 10 s T."""
    return sum(10 * s * T for w in words for s in range(1, len(w) // 2 + 1))


def _payload(base: dict, inv: MessageInventory) -> dict:
    out = dict(base)
    out["messages"] = sorted(inv.messages().items())
    return out


def gossip_known(ctx: Context, N: int, message: str, profile: Optional[ConstantsProfile] = None) -> Fragment:
    base = yield from gather_known(ctx, N, profile, gossip_after="gossip")
    inv = yield from gossip(ctx, message, N)
    yield Declare(_payload(base, inv))
    return inv


def gossip_unknown(ctx: Context, message: str, profile: Optional[ConstantsProfile] = None) -> Fragment:
    base = yield from gather_unknown(ctx, profile, gossip_after="gossip")
    inv = yield from gossip(ctx, message, base["size"])
    yield Declare(_payload(base, inv))
    return inv
