"""Command line entry point: `countgather <subcommand> ...`.

Every run writes its trace and a manifest next to it when --trace is given.
The exit code is 0 exactly when every checked property holds.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from collections import Counter
from pathlib import Path
from typing import Optional, Sequence

from ..engine import Scenario, Trace
from ..graph import GENERATORS, PortLabeledGraph, canonical_form, generate, validate
from ..primitives.profile import PROFILES, get_profile
from .properties import CheckContext, summarize, verify_trace
from .scenario_io import parse_agents, parse_map, scenario_from_dict, scenario_to_dict, write_manifest
from .sweep import PROTOCOLS, Instance, Sweep, check_context, execute, failures, run_sweep

log = logging.getLogger("countgather")


def _load_graph(path: str) -> PortLabeledGraph:
    g = PortLabeledGraph.from_text(Path(path).read_text())
    rep = validate(g)
    if not rep.ok:
        raise SystemExit(f"invalid graph {path}: {'; '.join(rep.violations)}")
    return g


def _scenario(args: argparse.Namespace) -> Scenario:
    g = _load_graph(args.graph)
    agents = parse_agents(args.agents)
    wake = parse_map(args.wake) if args.wake else {}
    if not wake:
        wake = {lab: 0 for lab in agents}
    for lab in agents:
        wake.setdefault(lab, None)
    return Scenario(g, agents, wake)


def _report(args: argparse.Namespace, protocol: str, inst: Instance) -> int:
    t0 = time.perf_counter()
    res = execute(protocol, inst, args.profile, fast_forward=not args.no_fast_forward, limit=_limit(args, inst))
    cx = check_context(protocol, inst, args.profile)
    report = verify_trace(res.trace, inst.scenario, cx)
    ok = res.outcome == "gathered-and-declared" and all(v for v, _ in report.values())
    out = {
        "outcome": res.outcome,
        "error": res.error,
        "declarations": {str(k): {"round": r, "node": v, "payload": p} for k, (r, v, p) in sorted(res.trace.declarations.items())},
        "properties": summarize(report),
        "seconds": round(time.perf_counter() - t0, 3),
    }
    if protocol.startswith("gossip"):
        truth = sorted(Counter(inst.messages.values()).items())
        out["inventories"] = {
            str(lab): [{"message_hex": _hex(m), "bits": m, "count": c} for m, c in p.get("messages", [])]
            for lab, (_, _, p) in sorted(res.trace.declarations.items())
        }
        out["all_equal_truth"] = all([tuple(x) for x in p.get("messages", [])] == truth for _, _, p in res.trace.declarations.values())
    text = json.dumps(out, indent=2, default=str)
    print(text)
    if args.trace:
        trace_path = Path(args.trace)
        res.trace.dump(str(trace_path))
        report_path = trace_path.with_suffix(".report.json")
        report_path.write_text(text + "\n")
        inputs = {"protocol": protocol, "N": inst.N, "scenario": scenario_to_dict(inst.scenario, inst.messages)}
        write_manifest(trace_path.with_suffix(".manifest.json"), inputs, args.profile, {"trace": trace_path, "report": report_path})
    return 0 if ok else 1


def _limit(args: argparse.Namespace, inst: Instance) -> Optional[int]:
    """--limit wins; --omega-limit H stops after the first H hypotheses; otherwise the protocol's own bound."""
    if args.limit is not None:
        return args.limit
    H = getattr(args, "omega_limit", None)
    if H is None:
        return None
    prof = get_profile(args.profile)
    latest = max((w for w in inst.scenario.wakeups.values() if w is not None), default=0)
    return latest + sum(prof.t_hyp(h) for h in range(1, H + 1)) + 1


def _hex(bits: str) -> str:
    """Bit string as hex, with the bit length in front so leading zeros survive."""
    return f"{len(bits)}:{int(bits, 2):x}" if bits else "0:"


def cmd_gen_graph(args: argparse.Namespace) -> int:
    g = generate(args.kind, args.n, args.seed)
    if args.canonical:
        g = canonical_form(g)
    text = g.to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_run_known(args: argparse.Namespace) -> int:
    sc = _scenario(args)
    return _report(args, "known", Instance("cli", sc, args.bound))


def cmd_run_unknown(args: argparse.Namespace) -> int:
    sc = _scenario(args)
    return _report(args, "unknown", Instance("cli", sc, sc.graph.n))


def cmd_gossip(args: argparse.Namespace) -> int:
    sc = _scenario(args)
    messages = parse_map(args.messages, value=lambda v: v if v != "-" else "")
    for lab in sc.agents:
        messages.setdefault(lab, "")
    if any(set(m) - {"0", "1"} for m in messages.values()):
        raise SystemExit("messages must be bit strings ('-' for the empty one)")
    if args.bound == "auto":
        return _report(args, "gossip-unknown", Instance("cli", sc, sc.graph.n, messages))
    return _report(args, "gossip-known", Instance("cli", sc, int(args.bound), messages))


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.config:
        sweep = Sweep.from_json(Path(args.config).read_text())
    else:
        sweep = Sweep(
            protocol=args.protocol,
            graphs=args.graphs,
            agent_counts=args.agents,
            labels=args.labels,
            wake_grid=args.wake_grid,
            bound=args.bound,
            profile=args.profile,
            variants=args.variants,
            exhaustive=args.exhaustive,
            seed=args.seed,
        )
    out = Path(args.out) if args.out else None

    def progress(inst, rs):
        bad = [r for r in rs if not r.passed]
        log.info("%s %s", "FAIL" if bad else "ok", inst.id)

    results = run_sweep(sweep, out, progress)
    bad = failures(results)
    for r in bad:
        print(r.line(), "; ".join(r.notes))
    instances = len({r.instance for r in results})
    print(f"{instances} instances, {len(results)} checks, {len(bad)} failed")
    return 0 if not bad else 1


def cmd_verify(args: argparse.Namespace) -> int:
    sc, messages = scenario_from_dict(json.loads(Path(args.scenario).read_text()))
    trace = Trace.parse(Path(args.trace).read_text().splitlines())
    N = args.bound
    cx = CheckContext(args.protocol, N, get_profile(args.profile), messages)
    ids = tuple(args.property) if args.property else None
    report = verify_trace(trace, sc, cx, ids)
    print(json.dumps(summarize(report), indent=2))
    return 0 if all(ok for ok, _ in report.values()) else 1


def cmd_build_primitives(args: argparse.Namespace) -> int:
    from ..primitives.est import EST_EXHAUSTIVE_LIMIT

    prof = get_profile(args.profile)
    rows = []
    for N in range(2, args.max_n + 1):
        t0 = time.perf_counter()
        T = prof.t_explo(N)
        test = prof.t_est(N) if N <= EST_EXHAUSTIVE_LIMIT else None
        rows.append({"N": N, "T_EXPLO": T, "P(N,1)": prof.p(N, 1), "D1": prof.d(N, 1), "T_EST": test, "seconds": round(time.perf_counter() - t0, 2)})
    print("N\tT_EXPLO\tP(N,1)\tD1\tT_EST\tseconds")
    for r in rows:
        print("\t".join(str(r[k]) for k in ("N", "T_EXPLO", "P(N,1)", "D1", "T_EST", "seconds")))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="countgather", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen-graph", help="write a generated graph in text form")
    g.add_argument("--kind", choices=GENERATORS, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--canonical", action="store_true", help="renumber nodes into canonical order")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen_graph)

    def scenario_args(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--graph", required=True, help="graph text file")
        sp.add_argument("--agents", required=True, help="label@node,... e.g. 1@0,5@2")
        sp.add_argument("--wake", default="", help="label=round,... (default: everyone at 0; 'none' = dormant)")
        sp.add_argument("--profile", choices=PROFILES, default="desk")
        sp.add_argument("--trace", help="write the trace here, plus .report.json and .manifest.json")
        sp.add_argument("--no-fast-forward", action="store_true")
        sp.add_argument("--limit", type=int, help="round limit (default: derived from the protocol's own bound)")

    k = sub.add_parser("run-known", help="gathering with a known bound N")
    scenario_args(k)
    k.add_argument("--bound", type=int, required=True)
    k.set_defaults(func=cmd_run_known)

    u = sub.add_parser("run-unknown", help="gathering without any bound")
    scenario_args(u)
    u.add_argument("--omega-limit", type=int, help="give up after this many hypotheses")
    u.set_defaults(func=cmd_run_unknown)

    gs = sub.add_parser("gossip", help="gather, then exchange messages")
    scenario_args(gs)
    gs.add_argument("--messages", required=True, help="label=bits,... ('-' for the empty message)")
    gs.add_argument("--bound", default="auto", help="N, or 'auto' to learn the size by unknown-bound gathering")
    gs.set_defaults(func=cmd_gossip)

    s = sub.add_parser("sweep", help="run a grid of instances and check every property")
    s.add_argument("--config", help="sweep JSON; overrides the flags below")
    s.add_argument("--protocol", choices=PROTOCOLS, default="known")
    s.add_argument("--graphs", nargs="+", default=["all:3"], help="all:<n>, all:<lo>-<hi>, or kind:n[:seed]")
    s.add_argument("--agents", nargs="+", type=int, default=[2])
    s.add_argument("--labels", nargs="+", type=int, default=[1, 2, 3])
    s.add_argument("--wake-grid", nargs="+", default=["0", "1"])
    s.add_argument("--bound", default="n")
    s.add_argument("--profile", choices=PROFILES, default="desk")
    s.add_argument("--variants", type=int, default=1)
    s.add_argument("--exhaustive", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="directory for results.tsv, sweep.json and counterexamples")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="check a saved trace against its scenario")
    v.add_argument("--scenario", required=True)
    v.add_argument("--trace", required=True)
    v.add_argument("--protocol", choices=PROTOCOLS, default="known")
    v.add_argument("--bound", type=int)
    v.add_argument("--profile", choices=PROFILES, default="desk")
    v.add_argument("--property", action="append", help="property id; repeat for several (default: all for the protocol)")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("build-primitives", help="build and cache exploration sequences and size-learning bounds")
    b.add_argument("--max-n", type=int, default=4)
    b.add_argument("--profile", choices=PROFILES, default="desk")
    b.set_defaults(func=cmd_build_primitives)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return int(args.func(args))


if __name__ == "__main__":
    sys.exit(main())
