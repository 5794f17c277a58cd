"""Trace properties, each a function (trace, scenario, context) -> (ok, notes).

They are registered by id in PROPERTIES so sweeps and the `verify` command
can apply any subset by name.
"""

from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ..engine import DECLARE_I, WAIT_I, Scenario, Trace, verify_gathering
from ..gossip import gossip_rounds
from ..primitives.bits import code
from ..primitives.profile import ConstantsProfile, get_profile
from ..protocol_known import KnownBoundSettings, phase_length, declaration_bound


class Positions:
    """Where each agent stands at the start of any round, rebuilt from step records."""

    def __init__(self, trace: Trace, scenario: Scenario):
        self.start = dict(scenario.agents)
        self._r0: dict[int, list[int]] = {}
        self._recs: dict[int, list[list[int]]] = {}
        for lab in scenario.agents:
            recs = sorted(trace.agent_steps(lab), key=lambda s: s[0])
            self._recs[lab] = recs
            self._r0[lab] = [s[0] for s in recs]

    def at(self, label: int, r: int) -> int:
        recs = self._recs[label]
        k = bisect.bisect_right(self._r0[label], r) - 1
        if k < 0:
            return self.start[label]
        rec = recs[k]
        return rec[3] if r <= rec[1] else rec[5]


Outcome = tuple[bool, list[str]]


@dataclass
class CheckContext:
    """What a property may need beyond the trace: the protocol's parameters and the ground truth."""

    protocol: str = "known"
    N: Optional[int] = None
    profile: ConstantsProfile = field(default_factory=lambda: get_profile("desk"))
    messages: dict[int, str] = field(default_factory=dict)
    expect_h: Optional[int] = None


def engine_consistency(trace: Trace, scenario: Scenario, cx: CheckContext) -> Outcome:
    """Moves follow the graph, records chain up per agent, and each card matches the occupancy."""
    g = scenario.graph
    notes: list[str] = []
    pos = Positions(trace, scenario)
    for lab, recs in pos._recs.items():
        prev_end, prev_node = None, scenario.agents[lab]
        for r0, r1, _, a, ins, b, card in recs:
            if a != prev_node:
                notes.append(f"agent {lab} jumps from {prev_node} to {a} at round {r0}")
            if prev_end is not None and r0 != prev_end + 1:
                notes.append(f"agent {lab} has a gap before round {r0}")
            if ins >= 0:
                if r1 != r0 or ins >= g.degree(a) or g.adj[a][ins][0] != b:
                    notes.append(f"agent {lab} makes an impossible move at round {r0}")
            elif ins in (WAIT_I, DECLARE_I):
                if a != b:
                    notes.append(f"agent {lab} moves while staying at round {r0}")
            here = sum(1 for o in scenario.agents if pos.at(o, r0) == a)
            if here != card:
                notes.append(f"agent {lab} saw {card} agents at round {r0}, there were {here}")
            prev_end, prev_node = r1, b
            if len(notes) > 20:
                return False, notes
    return not notes, notes


def _phase_starts(trace: Trace) -> dict[int, dict[int, int]]:
    """phase i -> {label: round the phase starts}"""
    out: dict[int, dict[int, int]] = {}
    for r, lab, data in trace.marks_named("phase"):
        out.setdefault(data["i"], {})[lab] = r
    return out


def phase_schedule(trace: Trace, scenario: Scenario, cx: CheckContext) -> Outcome:
    """Phase-start synchrony (P1), co-located alignment (P2) and the per-phase trichotomy P3/P4/P5."""
    if cx.N is None:
        return False, ["known-bound checks need N"]
    st = KnownBoundSettings(cx.N, cx.profile)
    T = st.T
    starts = _phase_starts(trace)
    pos = Positions(trace, scenario)
    labels = sorted(scenario.agents)
    ell = min(labels).bit_length()
    notes: list[str] = []
    decl = trace.declarations
    for i in sorted(starts):
        t = starts[i]
        if set(t) != set(labels):
            notes.append(f"phase {i}: started by {sorted(t)} only")
            continue
        D = st.D(i)
        # P1
        if max(t.values()) - min(t.values()) > D:
            notes.append(f"P1({i}) fails: spread {max(t.values()) - min(t.values())} > {D}")
        nxt = starts.get(i + 1, {})
        full_next = set(nxt) == set(labels)
        # P2
        if full_next:
            for A in labels:
                for B in labels:
                    if A < B and pos.at(A, nxt[A]) == pos.at(B, nxt[A]) and nxt[A] != nxt[B]:
                        notes.append(f"P2({i}) fails for agents {A}, {B}")
        tF = min(t.values())
        length = phase_length(st, i)
        phi_i = {(pos.at(A, t[A]), t[A]) for A in labels}
        p3 = p4 = p5 = False
        if full_next:
            phi_next = {(pos.at(A, nxt[A]), nxt[A]) for A in labels}
            if i > 0:
                D1 = st.D(i + 1)
                lo1, hi1 = tF + D + 2 * D1, tF + 2 * D + 2 * D1 + 3 * T
                lo2, hi2 = tF + 2 * D1 + D + (5 * i + 4) * T, tF + 2 * D1 + 2 * D + (5 * i + 6) * T
                inside = lambda lo, hi: all(lo <= nxt[A] <= hi for A in labels)  # noqa: E731
                p3 = len(phi_next) <= len(phi_i) // 2 and (inside(lo1, hi1) or inside(lo2, hi2))
            p5 = i < 2 * ell + 2 and all(nxt[A] - t[A] == length for A in labels)
        elif set(decl) == set(labels):
            when = tF + length
            spots = {(r, v) for r, v, _ in decl.values()}
            leaders = {p.get("leader") for _, _, p in decl.values()}
            p4 = spots and all(r == when for r, _ in spots) and len(spots) == 1 and len(leaders) == 1 and leaders <= set(labels)
        if not (p3 or p4 or p5):
            notes.append(f"phase {i}: none of P3, P4, P5 holds")
    return not notes, notes


def known_bound(trace: Trace, scenario: Scenario, cx: CheckContext) -> Outcome:
    """Everyone declares by the closed-form bound counted from the earliest wake-up."""
    if cx.N is None:
        return False, ["known-bound checks need N"]
    st = KnownBoundSettings(cx.N, cx.profile)
    if not trace.declarations:
        return False, ["no declarations"]
    first = min(r for r, _ in trace.wakes.values())
    last = max(r for r, _, _ in trace.declarations.values())
    bound = declaration_bound(st, min(scenario.agents))
    if last - first > bound:
        return False, [f"declared {last - first} rounds after the first wake-up, bound {bound}"]
    return True, []


def gathering(trace: Trace, scenario: Scenario, cx: CheckContext) -> Outcome:
    """Simultaneous co-located declaration with a unanimous leader (and the right size when unknown)."""
    size_key = "size" if cx.protocol in ("unknown", "gossip-unknown") else None
    rep = verify_gathering(trace, scenario, size_key=size_key)
    notes = [k for k, v in rep.checks.items() if not v] + rep.notes
    if cx.protocol in ("unknown", "gossip-unknown") and rep.ok:
        leaders = {p["leader"] for _, _, p in trace.declarations.values()}
        if leaders != {min(scenario.agents)}:
            notes.append(f"leader {leaders} is not the smallest label")
    return not notes, notes


def unknown_timing(trace: Trace, scenario: Scenario, cx: CheckContext) -> Outcome:
    """Each failed hypothesis lasts exactly T_h, hypothesis x starts at wake + sum of earlier T_i, at the start node."""
    prof = cx.profile
    notes: list[str] = []
    pos = Positions(trace, scenario)
    starts: dict[int, dict[int, int]] = {}
    for r, lab, data in trace.marks_named("hypothesis"):
        starts.setdefault(lab, {})[data["h"]] = r
    for r, lab, data in trace.marks_named("hypothesis_false"):
        h = data["h"]
        if data["spent"] != prof.t_hyp(h):
            notes.append(f"agent {lab} spent {data['spent']} rounds in failed hypothesis {h}, expected {prof.t_hyp(h)}")
        nxt = starts.get(lab, {}).get(h + 1)
        if nxt is not None and nxt - starts[lab][h] != prof.t_hyp(h):
            notes.append(f"agent {lab}: hypothesis {h + 1} starts {nxt - starts[lab][h]} rounds after hypothesis {h}")
    for lab, hs in starts.items():
        wake = trace.wakes[lab][0]
        offset = 0
        for h in sorted(hs):
            if h != 1 and h - 1 not in hs:
                notes.append(f"agent {lab} skipped hypothesis {h - 1}")
                break
            if hs[h] != wake + offset:
                notes.append(f"agent {lab} starts hypothesis {h} at round {hs[h]}, expected {wake + offset}")
                break
            if pos.at(lab, hs[h]) != scenario.agents[lab]:
                notes.append(f"agent {lab} starts hypothesis {h} away from its start node")
            offset += prof.t_hyp(h)
        if len(notes) > 20:
            break
    if cx.expect_h is not None and trace.declarations:
        hs_declared = {p.get("h") for _, _, p in trace.declarations.values()}
        if any(h is None or h > cx.expect_h for h in hs_declared):
            notes.append(f"declared under hypothesis {hs_declared}, configuration first enumerated at {cx.expect_h}")
    return not notes, notes


def gossip_inventory(trace: Trace, scenario: Scenario, cx: CheckContext) -> Outcome:
    """Every agent ends with the exact message multiset, the team is together at each probe, and the round count matches the accounting."""
    notes: list[str] = []
    truth = sorted(Counter(cx.messages[lab] for lab in scenario.agents).items())
    for lab, (_, _, payload) in sorted(trace.declarations.items()):
        got = [tuple(x) for x in payload.get("messages", [])]
        if got != truth:
            notes.append(f"agent {lab} ends with {got}, truth {truth}")
    if set(trace.declarations) != set(scenario.agents):
        notes.append("not every agent finished gossiping")
        return False, notes
    pos = Positions(trace, scenario)
    for r, lab, _ in trace.marks_named("probe"):
        spots = {pos.at(o, r) for o in scenario.agents}
        if len(spots) != 1:
            notes.append(f"team split at the probe of round {r}")
            break
    gathered = {r for r, _, _ in trace.marks_named("gathered")}
    if len(gathered) != 1:
        notes.append(f"gathering finished in rounds {sorted(gathered)}")
        return False, notes
    t0 = gathered.pop()
    N = cx.N
    if N is None:
        N = next(iter(trace.declarations.values()))[2].get("size")
    T = cx.profile.t_explo(N)
    words = [code(m) for m in set(cx.messages[lab] for lab in scenario.agents)]
    expected = gossip_rounds(T, words)
    for lab, (r, _, _) in trace.declarations.items():
        if r - t0 != expected:
            notes.append(f"agent {lab} gossiped for {r - t0} rounds, accounting gives {expected}")
    return not notes, notes


PROPERTIES: dict[str, Callable[[Trace, Scenario, CheckContext], Outcome]] = {
    "engine.consistency": engine_consistency,
    "gathering": gathering,
    "known.phases": phase_schedule,
    "known.bound": known_bound,
    "unknown.timing": unknown_timing,
    "gossip.inventory": gossip_inventory,
}

DEFAULT_PROPERTIES = {
    "known": ("engine.consistency", "gathering", "known.phases", "known.bound"),
    "unknown": ("engine.consistency", "gathering", "unknown.timing"),
    "gossip-known": ("engine.consistency", "gathering", "gossip.inventory"),
    "gossip-unknown": ("engine.consistency", "gathering", "gossip.inventory"),
}


def verify_trace(trace: Trace, scenario: Scenario, cx: CheckContext, ids: Optional[tuple[str, ...]] = None) -> dict[str, Outcome]:
    ids = ids or DEFAULT_PROPERTIES[cx.protocol]
    unknown = [i for i in ids if i not in PROPERTIES]
    if unknown:
        raise KeyError(f"unknown properties: {unknown}")
    return {i: PROPERTIES[i](trace, scenario, cx) for i in ids}


def summarize(report: dict[str, Outcome]) -> dict[str, Any]:
    return {k: {"ok": ok, "notes": notes[:5]} for k, (ok, notes) in report.items()}
