"""Deterministic instance grids, runners, and result records.

A Sweep is plain data; its JSON form reproduces it exactly. `instances()`
expands it into scenarios in a fixed order, `run_sweep` runs them one after
another and checks every registered trace property.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterator, Optional, Sequence

from ..engine import GeneratorProgram, ProgramFactory, RunResult, Scenario, program, run
from ..family import graphs_of_size
from ..graph import PortLabeledGraph, generate
from ..gossip import gossip_known, gossip_rounds, gossip_unknown
from ..primitives.bits import code
from ..primitives.profile import get_profile
from ..protocol_known import KnownBoundSettings, gather_known, declaration_bound
from ..protocol_unknown.configs import Configuration, first_index
from ..protocol_unknown.routines import gather_unknown
from .properties import CheckContext, summarize, verify_trace
from .scenario_io import scenario_to_dict

PROTOCOLS = ("known", "unknown", "gossip-known", "gossip-unknown")


@dataclass
class Sweep:
    protocol: str = "known"
    graphs: list[str] = field(default_factory=lambda: ["all:3"])  # "all:<n>" or "<kind>:<n>[:seed]"
    agent_counts: list[int] = field(default_factory=lambda: [2])
    labels: list[int] = field(default_factory=lambda: [1, 2, 3])
    wake_grid: list[str] = field(default_factory=lambda: ["0", "1"])  # integers, "T/2", "D1"
    bound: str = "n"  # "n", "n+<k>" or an integer
    profile: str = "desk"
    variants: int = 1  # label/wake choices per placement
    exhaustive: bool = False  # every label tuple and wake vector instead of a rotating choice
    message_bits: int = 8
    seed: int = 0
    properties: Optional[list[str]] = None

    def __post_init__(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> Sweep:
        return cls(**json.loads(text))

    def bound_for(self, n: int) -> int:
        if self.bound == "n":
            return n
        if self.bound.startswith("n+"):
            return n + int(self.bound[2:])
        return int(self.bound)

    def graph_list(self) -> list[tuple[str, PortLabeledGraph]]:
        out = []
        for spec in self.graphs:
            parts = spec.split(":")
            if parts[0] == "all":
                lo, _, hi = parts[1].partition("-")
                lo_n, hi_n = (int(lo), int(hi)) if hi else (2, int(lo))
                for n in range(max(2, lo_n), hi_n + 1):
                    for i, g in enumerate(graphs_of_size(n)):
                        out.append((f"g{n}.{i}", g))
            else:
                seed = int(parts[2]) if len(parts) > 2 else 0
                out.append((spec, generate(parts[0], int(parts[1]), seed)))
        return out

    def wake_value(self, token: str, N: int) -> Optional[int]:
        prof = get_profile(self.profile)
        if token == "none":
            return None
        if token == "T/2":
            return prof.t_explo(N) // 2
        if token == "D1":
            return prof.d(N, 1)
        return int(token)

    def instances(self) -> Iterator[Instance]:
        counter = 0
        for gname, g in self.graph_list():
            N = self.bound_for(g.n)
            for k in self.agent_counts:
                if k > g.n:
                    continue
                label_tuples = list(itertools.combinations(sorted(self.labels), k))
                wake_vectors = [w for w in itertools.product(self.wake_grid, repeat=k) if any(x != "none" for x in w)]
                for p, nodes in enumerate(itertools.combinations(range(g.n), k)):
                    if self.exhaustive:
                        choices = [
                            (perm, wv)
                            for labs in label_tuples
                            for perm in itertools.permutations(labs)
                            for wv in wake_vectors
                        ]
                    else:
                        choices = []
                        for v in range(self.variants):
                            pick = counter + v * 7919
                            choices.append((label_tuples[pick % len(label_tuples)], wake_vectors[(pick * 31 + p) % len(wake_vectors)]))
                    for labs, wv in choices:
                        counter += 1
                        agents = dict(zip(labs, nodes))
                        wakes = {lab: self.wake_value(t, N) for lab, t in zip(labs, wv)}
                        iid = f"{gname}/k{k}/p{p}/{'-'.join(map(str, labs))}/{'-'.join(wv)}"
                        messages = {}
                        if self.protocol.startswith("gossip"):
                            rng = random.Random(f"{self.seed}/{iid}")
                            messages = {lab: "".join(rng.choice("01") for _ in range(rng.randint(0, self.message_bits))) for lab in labs}
                        yield Instance(iid, Scenario(g, agents, wakes), N, messages)


@dataclass
class Instance:
    id: str
    scenario: Scenario
    N: int
    messages: dict[int, str] = field(default_factory=dict)


@dataclass
class OracleResult:
    property: str
    instance: str
    passed: bool
    notes: list[str] = field(default_factory=list)
    counterexample: Optional[str] = None

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        extra = f" -> {self.counterexample}" if self.counterexample else ""
        return f"{verdict} {self.property} {self.instance}{extra}"


def _per_label(body, messages: dict[int, str], *args: Any) -> ProgramFactory:
    return lambda lab: GeneratorProgram(lab, lambda ctx: body(ctx, *args, messages[lab]) if args else body(ctx, messages[lab]))


def run_limit(protocol: str, inst: Instance, profile: str) -> int:
    prof = get_profile(profile)
    sc = inst.scenario
    latest = max((w for w in sc.wakeups.values() if w is not None), default=0)
    if protocol in ("known", "gossip-known"):
        st = KnownBoundSettings(inst.N, prof)
        limit = latest + declaration_bound(st, min(sc.agents)) + 1
        if protocol == "gossip-known":
            words = [code(m) for m in inst.messages.values()]
            limit += gossip_rounds(st.T, words) + 1
        return limit
    h = first_index(Configuration.of(sc.graph, sc.agents))
    limit = latest + sum(prof.t_hyp(i) for i in range(1, h + 1)) + 1
    if protocol == "gossip-unknown":
        words = [code(m) for m in inst.messages.values()]
        limit += gossip_rounds(prof.t_explo(sc.graph.n), words) + 1
    return limit


def execute(protocol: str, inst: Instance, profile: str = "desk", fast_forward: bool = True, limit: Optional[int] = None) -> RunResult:
    prof = get_profile(profile)
    if protocol == "known":
        factory = program(gather_known, inst.N, prof)
    elif protocol == "unknown":
        factory = program(gather_unknown, prof)
    elif protocol == "gossip-known":
        factory = _per_label(lambda ctx, N, msg: gossip_known(ctx, N, msg, prof), inst.messages, inst.N)
    elif protocol == "gossip-unknown":
        factory = _per_label(lambda ctx, msg: gossip_unknown(ctx, msg, prof), inst.messages)
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    if limit is None:
        limit = run_limit(protocol, inst, profile)
    return run(inst.scenario, factory, limit, fast_forward=fast_forward)


def check_context(protocol: str, inst: Instance, profile: str) -> CheckContext:
    expect_h = None
    if protocol == "unknown":
        expect_h = first_index(Configuration.of(inst.scenario.graph, inst.scenario.agents))
    N = inst.N if protocol in ("known", "gossip-known") else None
    return CheckContext(protocol, N, get_profile(profile), dict(inst.messages), expect_h)


def _persist(out_dir: Path, inst: Instance, res: RunResult, report: dict) -> str:
    safe = inst.id.replace("/", "_")
    d = out_dir / "failures" / safe
    d.mkdir(parents=True, exist_ok=True)
    (d / "scenario.json").write_text(json.dumps(scenario_to_dict(inst.scenario, inst.messages), indent=1) + "\n")
    res.trace.dump(str(d / "trace.txt"))
    (d / "report.json").write_text(json.dumps({"outcome": res.outcome, "error": res.error, "N": inst.N, "report": summarize(report)}, indent=1, default=str) + "\n")
    return str(d)


def run_instance(sweep: Sweep, inst: Instance, out_dir: Optional[Path] = None) -> list[OracleResult]:
    res = execute(sweep.protocol, inst, sweep.profile)
    cx = check_context(sweep.protocol, inst, sweep.profile)
    ids = tuple(sweep.properties) if sweep.properties else None
    report = verify_trace(res.trace, inst.scenario, cx, ids)
    if res.outcome != "gathered-and-declared":
        report["run.outcome"] = (False, [f"{res.outcome}: {res.error}"])
    failed = not all(ok for ok, _ in report.values())
    where = _persist(out_dir, inst, res, report) if (failed and out_dir is not None) else None
    return [OracleResult(pid, inst.id, ok, notes[:5], None if ok else where) for pid, (ok, notes) in report.items()]


def run_sweep(sweep: Sweep, out_dir: Optional[Path] = None, progress=None) -> list[OracleResult]:
    """Every instance in order; failures are kept as counterexample directories under out_dir."""
    results: list[OracleResult] = []
    for inst in sweep.instances():
        try:
            rs = run_instance(sweep, inst, out_dir)
        except Exception as exc:  # recorded, the sweep goes on
            rs = [OracleResult("run.exception", inst.id, False, [f"{type(exc).__name__}: {exc}"])]
        results.extend(rs)
        if progress is not None:
            progress(inst, rs)
    results.sort(key=lambda r: (r.instance, r.property))
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "sweep.json").write_text(sweep.to_json() + "\n")
        with open(out_dir / "results.tsv", "w") as fh:
            fh.write("instance\tproperty\tpassed\tnotes\n")
            for r in results:
                fh.write(f"{r.instance}\t{r.property}\t{int(r.passed)}\t{'; '.join(r.notes)}\n")
    return results


def failures(results: Sequence[OracleResult]) -> list[OracleResult]:
    return [r for r in results if not r.passed]
