"""Gathering with a known upper bound N on the graph size.

`communicate` broadcasts code words bit by bit through cardinality dips.
`gather_known` is the phase loop: explore, merge on meetings, elect a label
through communicate, chase other groups with the rendezvous walk keyed by
that label, and declare once a phase passes with no change.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .engine import Context, Declare, Fragment, Mark, Wait
from .flow import for_rounds, interruptible, stable_wait
from .primitives.bits import code, decode, terminal_pair_index, to_binary
from .primitives.profile import ConstantsProfile, get_profile
from .primitives.tz import tz
from .primitives.uxs import build_uxs, explo


def communicate(ctx: Context, i: int, s: str, flag: bool, seq: Sequence[int]) -> Fragment:
    """Returns (l, k) after exactly 5 i T rounds, T = 2 len(seq)."""
    T = 2 * len(seq)
    c = ctx.obs.cur_card
    k = 1
    bits = []
    participate = len(s) <= i and flag
    for j in range(1, i + 1):
        if participate and j <= len(s) and s[j - 1] == "0":
            yield Wait(T)
            low = yield from explo(ctx, seq)
            yield Wait(3 * T)
            bits.append("0")
            if c > 1:
                k = low
        else:
            yield Wait(3 * T)
            low = yield from explo(ctx, seq)
            yield Wait(T)
            if c == 1 or low == c:
                bits.append("1")
            else:
                bits.append("0")
                participate = False
                k = c - low
    return "".join(bits), k


def communicate_closed_form(i: int, entries: Sequence[tuple[str, bool]]) -> tuple[str, int]:
    """What every member of a co-located group gets back, from the (s, flag) pairs of all members."""
    part = [s for s, flag in entries if flag and len(s) <= i]
    if not part:
        return "1" * i, 1
    sigma = min(part)
    return sigma + "1" * (i - len(sigma)), part.count(sigma)


def label_from(l: str) -> int:
    z = terminal_pair_index(l)
    if z is None:
        return 0
    return int(decode(l[: z + 1]), 2)


@dataclass(frozen=True)
class KnownBoundSettings:
    N: int
    profile: ConstantsProfile

    @property
    def T(self) -> int:
        return self.profile.t_explo(self.N)

    def D(self, i: int) -> int:
        return self.profile.d(self.N, i)


def phase_length(settings: KnownBoundSettings, i: int) -> int:
    """Rounds spent in an uninterrupted phase i (phase 0 is 2T)."""
    T = settings.T
    if i == 0:
        return 2 * T
    return settings.D(i + 1) + 2 * settings.D(i) + (5 * i + 6) * T


def gather_known(ctx: Context, N: int, profile: Optional[ConstantsProfile] = None, gossip_after: Optional[str] = None) -> Fragment:
    """The full protocol for one agent. With `gossip_after` set, returns after gathering instead of declaring."""
    profile = profile or get_profile("desk")
    profile.check_known(N)
    seq = build_uxs(N)
    st = KnownBoundSettings(N, profile)
    T = st.T
    L = ctx.label
    yield Mark("phase", {"i": 0})
    yield from explo(ctx, seq)
    yield Wait(T)
    i = 1
    while True:
        yield Mark("phase", {"i": i})
        c = ctx.obs.cur_card
        lam = 0
        rise = lambda o, c=c: o.cur_card > c  # noqa: E731

        def block_one() -> Fragment:
            yield Wait(st.D(i))
            yield from explo(ctx, seq)
            yield Wait(T)
            yield from explo(ctx, seq)

        yield from interruptible(ctx, block_one(), rise)
        if ctx.obs.cur_card > c:
            yield Mark("stabilize", {"i": i, "after": 1})
            yield from stable_wait(ctx, st.D(i + 1))
        else:
            l, k = yield from communicate(ctx, i, code(to_binary(L)), True, seq)
            lam = label_from(l)
            yield Mark("communicated", {"i": i, "l": l, "k": k, "lambda": lam})

            def block_two() -> Fragment:
                yield Wait(T)
                yield from for_rounds(ctx, tz(ctx, lam, seq), st.D(i))
                yield Wait(T)
                yield from explo(ctx, seq)

            yield from interruptible(ctx, block_two(), rise)
            if ctx.obs.cur_card > c:
                yield Mark("stabilize", {"i": i, "after": 2})
                yield from stable_wait(ctx, st.D(i + 1))
        yield Wait(st.D(i + 1))
        if ctx.obs.cur_card == c and lam != 0:
            if gossip_after is not None:
                yield Mark("gathered", {"i": i, "lambda": lam})
                return {"leader": lam, "phase": i}
            yield Declare({"leader": lam, "phase": i})
            return None
        i += 1


def declaration_bound(settings: KnownBoundSettings, smallest_label: int) -> int:
    """Rounds after the earliest wake-up by which all agents have declared."""
    N = settings.N
    ell = smallest_label.bit_length()
    lg = N.bit_length() - 1  # floor(log2 N)
    top = lg + 2 * ell
    return (top + 4) * (4 * settings.D(top + 3) + (5 * (top + 2) + 6) * settings.T)
