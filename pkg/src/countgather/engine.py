"""Synchronous round engine.

Rounds follow one fixed order: positions are frozen at the start of round r,
every awake agent observes that snapshot, all of them act at once, and moves
land at the boundary to round r+1. A dormant agent wakes in round r when the
adversary says so or when the round-r snapshot shows another agent on its
node; it acts in that same round.

Programs are written as generators that yield requests (Move, Wait, Declare,
Mark). A Wait may carry an `until` predicate over observations, checked at
the start of each round before waiting in it. Because a Wait knows how many
rounds it still has to go when nothing changes, the engine can skip ahead
whenever every running agent is waiting: no one moves during the skip, so
every snapshot stays the same and the skip is exact.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Generator, Iterable, Iterator, Mapping, Optional

from .graph import PortLabeledGraph, validate

INF = float("inf")


@dataclass(frozen=True)
class Observation:
    degree: int
    entry_port: Optional[int]
    cur_card: int
    own_label: int


# requests yielded by fragments ---------------------------------------------


@dataclass(frozen=True)
class Move:
    port: int


@dataclass(frozen=True)
class Wait:
    """Wait `rounds` rounds (None = forever), stopping early at the first round whose snapshot satisfies `until`.

    The generator is resumed with the number of rounds actually waited.
    """

    rounds: Optional[int] = 1
    until: Optional[Callable[[Observation], bool]] = None


@dataclass(frozen=True)
class Declare:
    payload: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Mark:
    """Zero-time annotation copied into the trace."""

    name: str
    data: Any = None


Request = Move | Wait | Declare | Mark
Fragment = Generator[Request, Any, Any]


class Context:
    """What a fragment may look at: its label, the current snapshot, and its local clock."""

    __slots__ = ("label", "obs", "clock")

    def __init__(self, label: int):
        self.label = label
        self.obs: Observation = Observation(0, None, 1, label)
        self.clock = 0  # instructions executed since waking


class ProtocolError(RuntimeError):
    pass


WAIT_I = -1
DECLARE_I = -2


class GeneratorProgram:
    """Drives a fragment generator one round at a time.

    Call `prepare(obs)` at the start of every round the agent is running,
    then either `act()` (one round) or `skip(k)` (k waiting rounds, allowed
    only when `horizon() >= k`).
    """

    def __init__(self, label: int, body: Callable[[Context], Fragment]):
        self.ctx = Context(label)
        self._gen = body(self.ctx)
        self._pending: Optional[Request] = None
        self._started = False
        self._waited = 0
        self._left: float = 0
        self.marks: list[tuple[str, Any]] = []
        self.result: Any = None

    def _resume(self, value: Any) -> Request:
        while True:
            try:
                req = self._gen.send(value) if self._started else next(self._gen)
            except StopIteration as stop:
                self.result = stop.value
                return Wait(None)
            self._started = True
            value = None
            if type(req) is Mark:
                self.marks.append((req.name, req.data))
                continue
            return req

    def prepare(self, obs: Observation) -> None:
        self.ctx.obs = obs
        req = self._pending
        if req is None:
            req = self._resume(None)
            if type(req) is Wait:
                self._waited = 0
                self._left = INF if req.rounds is None else req.rounds
        while type(req) is Wait:
            if self._left <= 0 or (req.until is not None and req.until(obs)):
                req = self._resume(self._waited)
                if type(req) is Wait:
                    self._waited = 0
                    self._left = INF if req.rounds is None else req.rounds
                continue
            break
        self._pending = req

    def horizon(self) -> float:
        return self._left if type(self._pending) is Wait else 0

    def act(self) -> int:
        req = self._pending
        self.ctx.clock += 1
        if type(req) is Wait:
            self._waited += 1
            self._left -= 1
            return WAIT_I
        if type(req) is Declare:
            return DECLARE_I
        self._pending = None
        if type(req) is Move:
            return req.port
        raise ProtocolError(f"unknown request {req!r}")

    def skip(self, k: int) -> None:
        self.ctx.clock += k
        self._waited += k
        self._left -= k

    @property
    def declaration(self) -> Optional[Declare]:
        return self._pending if type(self._pending) is Declare else None


ProgramFactory = Callable[[int], GeneratorProgram]


def program(body: Callable[..., Fragment], *args: Any, **kwargs: Any) -> ProgramFactory:
    """Factory building a GeneratorProgram that runs body(ctx, *args, **kwargs)."""
    return lambda label: GeneratorProgram(label, lambda ctx: body(ctx, *args, **kwargs))


# scenario and trace --------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    graph: PortLabeledGraph
    agents: Mapping[int, int]  # label -> start node
    wakeups: Mapping[int, Optional[int]]  # label -> adversary wake round or None
    shared_starts: bool = False  # fragment tests put whole groups on one node

    def __post_init__(self) -> None:
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if not validate(self.graph).ok:
            out.append("graph is invalid")
        if len(self.agents) < 2 and not self.shared_starts:
            out.append("need at least two agents")
        if any(lab < 1 for lab in self.agents):
            out.append("labels must be positive")
        if not self.shared_starts and len(set(self.agents.values())) != len(self.agents):
            out.append("start nodes must be distinct")
        if any(not 0 <= v < self.graph.n for v in self.agents.values()):
            out.append("start node out of range")
        if set(self.wakeups) - set(self.agents):
            out.append("wake-up for unknown label")
        if not any(self.wakeups.get(lab) is not None for lab in self.agents):
            out.append("no agent is woken by the adversary")
        return out

    def wake_round(self, label: int) -> Optional[int]:
        return self.wakeups.get(label)


@dataclass
class Trace:
    """Event log. Each step record is [round_from, round_to, label, node_before, instruction, node_after, cur_card].

    `instruction` is -1 for WAIT, -2 for DECLARE, else the port taken. A record
    with round_to > round_from is a run of identical waits.
    """

    steps: list[list[int]] = field(default_factory=list)
    marks: list[tuple[int, int, str, Any]] = field(default_factory=list)
    wakes: dict[int, tuple[int, str]] = field(default_factory=dict)  # label -> (round, cause)
    declarations: dict[int, tuple[int, int, dict]] = field(default_factory=dict)  # label -> (round, node, payload)
    final_round: int = 0

    def expanded(self) -> Iterator[tuple[int, int, int, int, int, int]]:
        """Per-round records, wait runs unrolled."""
        for r0, r1, lab, a, ins, b, card in self.steps:
            for r in range(r0, r1 + 1):
                yield (r, lab, a, ins, b, card)

    def agent_steps(self, label: int) -> list[list[int]]:
        return [s for s in self.steps if s[2] == label]

    def marks_named(self, name: str) -> list[tuple[int, int, Any]]:
        return [(r, lab, data) for r, lab, nm, data in self.marks if nm == name]

    def lines(self) -> Iterator[str]:
        for r0, r1, lab, a, ins, b, card in self.steps:
            if ins == WAIT_I:
                word = "WAIT"
            elif ins == DECLARE_I:
                word = "DECLARE"
            else:
                word = f"PORT {ins}"
            if r1 > r0:
                yield f"({r0}, {r1}, WAIT) label={lab} node={a} card={card}"
            else:
                yield f"{r0} label={lab} {a} {word} {b} card={card}"
        for r, lab, nm, data in self.marks:
            yield f"MARK {r} label={lab} {nm} {json.dumps(data, default=str)}"
        for lab in sorted(self.wakes):
            r, cause = self.wakes[lab]
            yield f"WAKE {r} label={lab} {cause}"
        for lab in sorted(self.declarations):
            r, v, payload = self.declarations[lab]
            yield f"DECLARED {r} label={lab} node={v} {json.dumps(payload, sort_keys=True, default=str)}"

    def dump(self, path: str) -> None:
        with open(path, "w") as fh:
            for ln in self.lines():
                fh.write(ln + "\n")

    @classmethod
    def parse(cls, lines: Iterable[str]) -> Trace:
        """Inverse of `lines()`."""
        tr = cls()
        for raw in lines:
            ln = raw.strip()
            if not ln:
                continue
            m = _RUN_RE.fullmatch(ln)
            if m:
                r0, r1, lab, a, card = map(int, m.groups())
                tr.steps.append([r0, r1, lab, a, WAIT_I, a, card])
                continue
            m = _STEP_RE.fullmatch(ln)
            if m:
                r, lab, a, word, port, b, card = m.groups()
                ins = WAIT_I if word == "WAIT" else DECLARE_I if word == "DECLARE" else int(port)
                tr.steps.append([int(r), int(r), int(lab), int(a), ins, int(b), int(card)])
                continue
            head, _, rest = ln.partition(" ")
            if head == "MARK":
                r, lab, name, data = rest.split(" ", 3)
                tr.marks.append((int(r), int(lab[6:]), name, json.loads(data)))
            elif head == "WAKE":
                r, lab, cause = rest.split(" ")
                tr.wakes[int(lab[6:])] = (int(r), cause)
            elif head == "DECLARED":
                r, lab, node, payload = rest.split(" ", 3)
                tr.declarations[int(lab[6:])] = (int(r), int(node[5:]), json.loads(payload))
            else:
                raise ValueError(f"unreadable trace line: {ln!r}")
        if tr.steps:
            tr.final_round = max(s[1] for s in tr.steps) + 1
        return tr


_RUN_RE = re.compile(r"\((\d+), (\d+), WAIT\) label=(\d+) node=(\d+) card=(\d+)")
_STEP_RE = re.compile(r"(\d+) label=(\d+) (\d+) (WAIT|DECLARE|PORT (\d+)) (\d+) card=(\d+)")


OUTCOME_DECLARED = "gathered-and-declared"
OUTCOME_LIMIT = "limit-exceeded"
OUTCOME_ERROR = "protocol-error"


@dataclass
class RunResult:
    trace: Trace
    outcome: str
    error: Optional[str] = None
    programs: dict[int, GeneratorProgram] = field(default_factory=dict)


def run(
    scenario: Scenario,
    factory: ProgramFactory,
    limit: int,
    fast_forward: bool = True,
    stop_when_declared: bool = True,
) -> RunResult:
    g = scenario.graph
    adj = g.adj
    deg = g.degrees
    labels = sorted(scenario.agents)
    pos = {lab: scenario.agents[lab] for lab in labels}
    entry: dict[int, Optional[int]] = {lab: None for lab in labels}
    progs: dict[int, GeneratorProgram] = {}
    dormant = set(labels)
    running: list[int] = []
    trace = Trace()
    open_wait: dict[int, list[int]] = {}
    pending_wakes = sorted({w for w in scenario.wakeups.values() if w is not None})
    wake_of = scenario.wakeups
    r = 0
    result = RunResult(trace, OUTCOME_LIMIT, programs=progs)

    def record(lab: int, r0: int, r1: int, a: int, ins: int, b: int, card: int) -> None:
        if ins == WAIT_I:
            rec = open_wait.get(lab)
            if rec is not None and rec[1] == r0 - 1 and rec[3] == a and rec[6] == card:
                rec[1] = r1
                return
            rec = [r0, r1, lab, a, ins, b, card]
            open_wait[lab] = rec
            trace.steps.append(rec)
        else:
            open_wait.pop(lab, None)
            trace.steps.append([r0, r1, lab, a, ins, b, card])

    try:
        while r < limit:
            card: dict[int, int] = {}
            for v in pos.values():
                card[v] = card.get(v, 0) + 1
            if dormant:
                for lab in sorted(dormant):
                    cause = None
                    if wake_of.get(lab) == r:
                        cause = "adversary"
                    elif any(pos[o] == pos[lab] for o in progs):
                        cause = "visitor"
                    if cause:
                        dormant.discard(lab)
                        progs[lab] = factory(lab)
                        running.append(lab)
                        trace.wakes[lab] = (r, cause)
                running.sort()
                while pending_wakes and pending_wakes[0] <= r:
                    pending_wakes.pop(0)
            if not running:
                if not pending_wakes:
                    break
                r = min(pending_wakes[0], limit)
                continue
            for lab in running:
                v = pos[lab]
                p = progs[lab]
                p.prepare(Observation(deg[v], entry[lab], card[v], lab))
                if p.marks:
                    for nm, data in p.marks:
                        trace.marks.append((r, lab, nm, data))
                    p.marks.clear()
            if fast_forward:
                jump = min(progs[lab].horizon() for lab in running)
                if jump >= 2:
                    if pending_wakes:
                        jump = min(jump, pending_wakes[0] - r)
                    jump = min(jump, limit - r)
                    if jump == INF:
                        raise ProtocolError("unbounded wait with nothing pending")
                    jump = int(jump)
                    if jump >= 2:
                        for lab in running:
                            progs[lab].skip(jump)
                            v = pos[lab]
                            record(lab, r, r + jump - 1, v, WAIT_I, v, card[v])
                        r += jump
                        continue
            moves = []
            declared_now = []
            for lab in running:
                p = progs[lab]
                v = pos[lab]
                ins = p.act()
                if ins >= 0:
                    if ins >= deg[v]:
                        raise ProtocolError(f"agent {lab} took port {ins} at a node of degree {deg[v]} in round {r}")
                    u, q = adj[v][ins]
                    moves.append((lab, u, q))
                    record(lab, r, r, v, ins, u, card[v])
                elif ins == DECLARE_I:
                    declared_now.append(lab)
                    record(lab, r, r, v, ins, v, card[v])
                    trace.declarations[lab] = (r, v, dict(p.declaration.payload))  # type: ignore[union-attr]
                else:
                    record(lab, r, r, v, ins, v, card[v])
            for lab, u, q in moves:
                pos[lab] = u
                entry[lab] = q
            if declared_now:
                running = [lab for lab in running if lab not in declared_now]
            r += 1
            if stop_when_declared and len(trace.declarations) == len(labels):
                result.outcome = OUTCOME_DECLARED
                break
    except (ProtocolError, AssertionError) as exc:
        result.outcome = OUTCOME_ERROR
        result.error = str(exc) or type(exc).__name__
    trace.final_round = r
    return result


# verification --------------------------------------------------------------


@dataclass
class GatheringReport:
    checks: dict[str, bool]
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def verify_gathering(
    trace: Trace,
    scenario: Scenario,
    leader_key: Optional[str] = "leader",
    size_key: Optional[str] = None,
) -> GatheringReport:
    labels = set(scenario.agents)
    decl = trace.declarations
    checks = {}
    notes = []
    checks["all_declared"] = set(decl) == labels
    spots = {(r, v) for r, v, _ in decl.values()}
    checks["same_round_and_node"] = len(spots) == 1 and checks["all_declared"]
    if not checks["same_round_and_node"]:
        notes.append(f"declaration spots: {sorted(spots)}")
    if leader_key is not None:
        leaders = {payload.get(leader_key) for _, _, payload in decl.values()}
        checks["leader_unanimous_and_real"] = len(leaders) == 1 and next(iter(leaders)) in labels
        if not checks["leader_unanimous_and_real"]:
            notes.append(f"leaders: {sorted(leaders, key=str)}")
    if size_key is not None:
        sizes = {payload.get(size_key) for _, _, payload in decl.values()}
        checks["size_correct"] = sizes == {scenario.graph.n}
        if not checks["size_correct"]:
            notes.append(f"sizes: {sorted(sizes, key=str)}")
    return GatheringReport(checks, notes)


def expand_waits(records: Iterable[list[int]]) -> list[tuple[int, ...]]:
    out = []
    for r0, r1, lab, a, ins, b, card in records:
        for r in range(r0, r1 + 1):
            out.append((r, lab, a, ins, b, card))
    return out
