"""JSON forms of scenarios, sweeps and run manifests."""

from __future__ import annotations

import hashlib
import json
import platform
from pathlib import Path
from typing import Any, Mapping, Optional

from ..engine import Scenario
from ..graph import PortLabeledGraph


def scenario_to_dict(sc: Scenario, messages: Optional[Mapping[int, str]] = None) -> dict[str, Any]:
    out: dict[str, Any] = {
        "graph": [[list(h) for h in row] for row in sc.graph.adj],
        "agents": {str(k): v for k, v in sorted(sc.agents.items())},
        "wakeups": {str(k): v for k, v in sorted(sc.wakeups.items())},
    }
    if messages:
        out["messages"] = {str(k): v for k, v in sorted(messages.items())}
    return out


def scenario_from_dict(d: Mapping[str, Any]) -> tuple[Scenario, dict[int, str]]:
    g = PortLabeledGraph.from_lists(d["graph"])
    agents = {int(k): int(v) for k, v in d["agents"].items()}
    wakeups = {int(k): (None if v is None else int(v)) for k, v in d.get("wakeups", {}).items()}
    messages = {int(k): str(v) for k, v in d.get("messages", {}).items()}
    return Scenario(g, agents, wakeups), messages


def parse_agents(spec: str) -> dict[int, int]:
    """'1@0,2@3' -> {1: 0, 2: 3}"""
    out = {}
    for part in spec.split(","):
        lab, _, node = part.strip().partition("@")
        out[int(lab)] = int(node)
    return out


def parse_map(spec: str, value=int) -> dict[int, Any]:
    """'1=0,2=5' -> {1: 0, 2: 5}; a value of 'none' maps to None."""
    out: dict[int, Any] = {}
    if not spec:
        return out
    for part in spec.split(","):
        lab, _, v = part.strip().partition("=")
        out[int(lab)] = None if v.lower() == "none" else value(v)
    return out


def sha256_of(obj: Any) -> str:
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(path: Path, inputs: Mapping[str, Any], profile: str, outputs: Mapping[str, Path]) -> None:
    from .. import __version__

    files = {}
    for name, p in outputs.items():
        if Path(p).exists():
            files[name] = {"path": str(p), "sha256": hashlib.sha256(Path(p).read_bytes()).hexdigest()}
    manifest = {
        "version": __version__,
        "python": platform.python_version(),
        "profile": profile,
        "inputs": inputs,
        "inputs_sha256": sha256_of(inputs),
        "outputs": files,
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
