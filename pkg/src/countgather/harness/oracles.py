"""Brute-force oracles for the primitives.

Each oracle recomputes the contract from first principles (plain walks,
explicit trajectories) rather than through the engine, so a bug in the
fragments and a bug in the oracle have to coincide to slip through.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from ..engine import GeneratorProgram, Scenario, run
from ..family import enumerate_graphs, graphs_of_size
from ..graph import PortLabeledGraph
from ..primitives.bits import code, to_binary
from ..primitives.est import run_est
from ..primitives.profile import ConstantsProfile, get_profile
from ..primitives.tz import tz_word
from ..primitives.uxs import build_uxs, walk
from ..protocol_known import communicate, communicate_closed_form


@dataclass
class OracleSummary:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)
    worst: int = 0  # largest measured quantity (meeting delay, moves, ...)

    @property
    def ok(self) -> bool:
        return self.checked > 0 and not self.failures

    def fail(self, msg: str) -> None:
        if len(self.failures) < 50:
            self.failures.append(msg)


def _graphs(n_max: int) -> Iterator[PortLabeledGraph]:
    return (g for g in enumerate_graphs(n_max) if g.n >= 2)


def explo_oracle(N: int) -> OracleSummary:
    """From every start of every graph with at most N nodes the sequence reaches every node."""
    seq = build_uxs(N)
    out = OracleSummary(f"explo N={N}")
    for g in _graphs(N):
        for s in range(g.n):
            out.checked += 1
            seen = walk(g, s, seq)
            if len(set(seen)) != g.n:
                out.fail(f"{g.to_text()!r} from {s}: visits {sorted(set(seen))}")
            first = max(seen.index(v) for v in range(g.n)) if len(set(seen)) == g.n else len(seq)
            out.worst = max(out.worst, first)
    return out


def tz_trajectory(g: PortLabeledGraph, start: int, label: int, seq: Sequence[int], rounds: int) -> np.ndarray:
    """Node occupied at the start of each of the first `rounds` rounds of the rendezvous walk."""
    T = 2 * len(seq)
    w = walk(g, start, seq)
    active = [start] * T + w[:-1] + w[:0:-1] + [start] * T
    passive = [start] * (3 * T)
    word = tz_word(label)
    out: list[int] = []
    k = 0
    while len(out) < rounds:
        out.extend(active if word[k % len(word)] == "1" else passive)
        k += 1
    return np.asarray(out[:rounds], dtype=np.int16)


def tz_oracle(N: int, max_label: int = 8, profile: Optional[ConstantsProfile] = None) -> OracleSummary:
    """Distinct labels, any two distinct starts, later start at most T/2 behind: they share a node within P(N, l)."""
    prof = profile or get_profile("desk")
    seq = build_uxs(N)
    T = 2 * len(seq)
    labels = range(1, max_label + 1)
    out = OracleSummary(f"tz N={N}")
    P = {l: prof.p(N, l) for l in range(1, max_label.bit_length() + 1)}
    horizon = T // 2 + max(P.values()) + 1
    for g in _graphs(N):
        traj = {(s, L): tz_trajectory(g, s, L, seq, horizon) for s in range(g.n) for L in labels}
        for (u, v) in itertools.permutations(range(g.n), 2):
            for L1, L2 in itertools.permutations(labels, 2):
                bound = P[min(L1.bit_length(), L2.bit_length())]
                a = traj[(u, L1)]
                b = traj[(v, L2)]
                for delta in range(T // 2 + 1):
                    # a starts at round 0, b at round delta; look from delta to delta + bound
                    hit = np.nonzero(a[delta : delta + bound + 1] == b[: bound + 1])[0]
                    out.checked += 1
                    if hit.size == 0:
                        out.fail(f"graph {g.adj} starts {u},{v} labels {L1},{L2} delay {delta}: no meeting within {bound}")
                    else:
                        out.worst = max(out.worst, int(hit[0]))
    return out


def est_oracle(n_max: int, profile: Optional[ConstantsProfile] = None) -> OracleSummary:
    """Map construction learns the size, ends on the token, and stays within T_EST(n) moves."""
    prof = profile or get_profile("desk")
    out = OracleSummary(f"est n<={n_max}")
    for g in _graphs(n_max):
        budget = prof.t_est(g.n)
        for t in range(g.n):
            size, end, moves = run_est(g, t)
            out.checked += 1
            out.worst = max(out.worst, moves)
            if size != g.n or end != t or moves > budget:
                out.fail(f"graph {g.adj} token {t}: size {size}, end {end}, moves {moves} (budget {budget})")
    return out


# communicate -----------------------------------------------------------------

CODES = tuple(code(to_binary(x)) for x in range(1, 16))


def run_communicate(g: PortLabeledGraph, node: int, i: int, entries: Sequence[tuple[str, bool]], N: int) -> tuple[list[tuple[str, int]], list[int], list[int]]:
    """Put one agent per entry on `node`, let all run communicate(i, s, flag) from round 0.

    Returns every agent's (l, k), the round each finished and the node it finished on.
    """
    seq = build_uxs(N)
    labels = list(range(1, len(entries) + 1))
    sc = Scenario(g, {lab: node for lab in labels}, {lab: 0 for lab in labels}, shared_starts=True)
    done: dict[int, int] = {}

    def body(lab: int):
        s, flag = entries[lab - 1]

        def frag(ctx):
            value = yield from communicate(ctx, i, s, flag, seq)
            done[lab] = ctx.clock
            return value

        return GeneratorProgram(lab, frag)

    res = run(sc, body, 5 * i * 2 * len(seq) + 2, stop_when_declared=False)
    if res.error:
        raise RuntimeError(res.error)
    values = [res.programs[lab].result for lab in labels]
    finals = []
    for lab in labels:
        recs = res.trace.agent_steps(lab)
        finals.append(recs[-1][5] if recs else node)
    return values, [done.get(lab, -1) for lab in labels], finals


def communicate_cases(rng: random.Random, group: int) -> tuple[tuple[str, bool], ...]:
    return tuple((rng.choice(CODES), rng.random() < 0.7) for _ in range(group))


def communicate_oracle(
    N: int,
    graphs: Optional[Sequence[PortLabeledGraph]] = None,
    max_i: int = 8,
    groups: Sequence[int] = (1, 2, 3, 4),
    seed: int = 0,
    exhaustive_on: Sequence[PortLabeledGraph] = (),
    exhaustive_i: Sequence[int] = (4, 6, 8),
    exhaustive_group: int = 3,
) -> OracleSummary:
    """Engine runs of communicate against the closed form.

    Placement grid: every graph, every node, every group size and every i, with
    codes and flags drawn from a seeded generator. On the graphs listed in
    `exhaustive_on` every multiset of codes (up to `exhaustive_group` agents)
    with every flag vector is run as well.
    """
    prof = get_profile("desk")
    T = prof.t_explo(N)
    rng = random.Random(seed)
    out = OracleSummary(f"communicate N={N}")
    graphs = list(graphs) if graphs is not None else [g for n in range(2, N + 1) for g in graphs_of_size(n)]

    def check(g: PortLabeledGraph, v: int, i: int, entries: tuple[tuple[str, bool], ...]) -> None:
        values, ends, finals = run_communicate(g, v, i, entries, N)
        want = communicate_closed_form(i, entries)
        out.checked += 1
        if any(val != want for val in values) or any(e != 5 * i * T for e in ends) or any(f != v for f in finals):
            out.fail(f"graph {g.adj} node {v} i={i} entries {entries}: got {values} ends {ends} at {finals}, want {want}")

    for g in graphs:
        for v in range(g.n):
            for size in groups:
                for i in range(1, max_i + 1):
                    check(g, v, i, communicate_cases(rng, size))
    for g in exhaustive_on:
        for size in range(1, exhaustive_group + 1):
            for codes in itertools.combinations_with_replacement(CODES, size):
                for flags in itertools.product((False, True), repeat=size):
                    for i in exhaustive_i:
                        check(g, 0, i, tuple(zip(codes, flags)))
    return out
