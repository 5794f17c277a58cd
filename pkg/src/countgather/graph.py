"""Anonymous connected port-labeled graphs.

Node ids are integers 0..n-1 used only by the engine and by tests. Agents
never see them; they only see degrees and port numbers.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Half = tuple[int, int]  # (neighbor, reverse port)

MAGIC = b"PLG1"


@dataclass(frozen=True)
class PathFailure:
    """Returned by follow_path when a port is missing. `index` is 1-based."""

    index: int


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class PortLabeledGraph:
    """adj[v][p] = (u, q): port p at v leads to u, arriving through port q."""

    adj: tuple[tuple[Half, ...], ...]
    _degrees: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_degrees", tuple(len(row) for row in self.adj))

    @classmethod
    def from_lists(cls, adj: Iterable[Iterable[Sequence[int]]]) -> PortLabeledGraph:
        return cls(tuple(tuple((int(u), int(q)) for u, q in row) for row in adj))

    @property
    def n(self) -> int:
        return len(self.adj)

    @property
    def degrees(self) -> tuple[int, ...]:
        return self._degrees

    def degree(self, v: int) -> int:
        return self._degrees[v]

    def edge_count(self) -> int:
        return sum(self._degrees) // 2

    def step(self, v: int, p: int) -> Half:
        return self.adj[v][p]

    def distances_from(self, s: int) -> list[int]:
        dist = [-1] * self.n
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for u, _ in self.adj[v]:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        return dist

    def diameter(self) -> int:
        return max(max(self.distances_from(v)) for v in range(self.n))

    def relabel(self, perm: Sequence[int]) -> PortLabeledGraph:
        """Rename node v to perm[v]; ports are unchanged."""
        out: list[tuple[Half, ...]] = [()] * self.n
        for v, row in enumerate(self.adj):
            out[perm[v]] = tuple((perm[u], q) for u, q in row)
        return PortLabeledGraph(tuple(out))

    # text format -----------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"n={self.n}"]
        for v, row in enumerate(self.adj):
            lines.append(f"{v}: " + " ".join(f"({u},{q})" for u, q in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> PortLabeledGraph:
        rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or not rows[0].startswith("n="):
            raise ValueError("graph text must start with 'n=<count>'")
        n = int(rows[0][2:])
        if n < 1:
            raise ValueError("graph needs at least one node")
        adj: list[list[Half] | None] = [None] * n
        for ln in rows[1:]:
            head, _, rest = ln.partition(":")
            v = int(head)
            if not 0 <= v < n or adj[v] is not None:
                raise ValueError(f"bad or repeated node line: {ln!r}")
            pairs = []
            for tok in rest.replace(" ", "").split(")"):
                if not tok:
                    continue
                u, q = tok.lstrip("(").split(",")
                pairs.append((int(u), int(q)))
            adj[v] = pairs
        if any(row is None for row in adj):
            raise ValueError("missing node lines")
        return cls.from_lists(adj)  # type: ignore[arg-type]


def validate(g: PortLabeledGraph) -> ValidationReport:
    bad: list[str] = []
    n = g.n
    if n < 1:
        return ValidationReport(("graph has no nodes",))
    for v, row in enumerate(g.adj):
        seen: set[int] = set()
        for p, (u, q) in enumerate(row):
            if not 0 <= u < n:
                bad.append(f"node {v} port {p}: neighbor {u} out of range")
                continue
            if u == v:
                bad.append(f"node {v} port {p}: self-loop")
            if u in seen:
                bad.append(f"node {v} port {p}: parallel edge to {u}")
            seen.add(u)
            if not 0 <= q < g.degree(u):
                bad.append(f"node {v} port {p}: reverse port {q} missing at node {u}")
                continue
            if g.adj[u][q] != (v, p):
                bad.append(f"node {v} port {p}: port symmetry broken ({u},{q}) -> {g.adj[u][q]}")
    if not bad:
        reach = g.distances_from(0)
        if min(reach) < 0:
            bad.append("graph is not connected")
    return ValidationReport(tuple(bad))


def follow_path(g: PortLabeledGraph, start: int, path: Sequence[int]) -> int | PathFailure:
    v = start
    for i, p in enumerate(path):
        if p < 0:
            raise ValueError("ports are non-negative")
        if p >= g.degree(v):
            return PathFailure(i + 1)
        v = g.adj[v][p][0]
    return v


def entry_ports(g: PortLabeledGraph, start: int, path: Sequence[int]) -> list[int]:
    """Entry ports collected while walking a valid path."""
    out = []
    v = start
    for p in path:
        v, q = g.adj[v][p]
        out.append(q)
    return out


# generators ----------------------------------------------------------------


def _from_neighbor_lists(nbrs: Sequence[Sequence[int]]) -> PortLabeledGraph:
    index = [{u: p for p, u in enumerate(row)} for row in nbrs]
    return PortLabeledGraph(tuple(tuple((u, index[u][v]) for u in row) for v, row in enumerate(nbrs)))


def ring(n: int) -> PortLabeledGraph:
    """Port 0 goes to v+1, port 1 to v-1."""
    if n < 3:
        raise ValueError("a simple ring needs n >= 3")
    return PortLabeledGraph(tuple((((v + 1) % n, 1), ((v - 1) % n, 0)) for v in range(n)))


def line(n: int) -> PortLabeledGraph:
    if n == 1:
        return PortLabeledGraph(((),))
    nbrs = []
    for v in range(n):
        row = [u for u in (v - 1, v + 1) if 0 <= u < n]
        nbrs.append(row)
    return _from_neighbor_lists(nbrs)


def complete(n: int) -> PortLabeledGraph:
    return _from_neighbor_lists([[u for u in range(n) if u != v] for v in range(n)])


def random_connected(n: int, seed: int, extra: float = 0.3) -> PortLabeledGraph:
    rng = random.Random(seed)
    if n == 1:
        return PortLabeledGraph(((),))
    # Wilson's algorithm gives a uniformly random spanning tree of K_n
    in_tree = [False] * n
    nxt = [-1] * n
    in_tree[rng.randrange(n)] = True
    for s in range(n):
        u = s
        while not in_tree[u]:
            nxt[u] = rng.choice([w for w in range(n) if w != u])
            u = nxt[u]
        u = s
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
    edges = {frozenset((v, nxt[v])) for v in range(n) if nxt[v] >= 0}
    for a in range(n):
        for b in range(a + 1, n):
            if frozenset((a, b)) not in edges and rng.random() < extra:
                edges.add(frozenset((a, b)))
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for e in sorted(tuple(sorted(e)) for e in edges):
        a, b = e
        nbrs[a].append(b)
        nbrs[b].append(a)
    for row in nbrs:
        rng.shuffle(row)
    return _from_neighbor_lists(nbrs)


GENERATORS = ("ring", "line", "complete", "random_connected")


def generate(kind: str, n: int, seed: int = 0) -> PortLabeledGraph:
    if n < 1:
        raise ValueError("n must be at least 1")
    if kind == "ring":
        return ring(n)
    if kind == "line":
        return line(n)
    if kind == "complete":
        return complete(n)
    if kind == "random_connected":
        return random_connected(n, seed)
    raise ValueError(f"unknown graph kind {kind!r}")


# canonical form ------------------------------------------------------------
#
# Port numbers make a breadth-first search from a fixed root deterministic, so
# the numbering it produces is the same for isomorphic copies. The canonical
# form is the smallest such encoding over all roots. Node labels (for
# configurations) ride along as one extra integer per node.


def bfs_order(g: PortLabeledGraph, root: int) -> list[int]:
    order = [root]
    seen = {root}
    i = 0
    while i < len(order):
        for u, _ in g.adj[order[i]]:
            if u not in seen:
                seen.add(u)
                order.append(u)
        i += 1
    return order


def _key_from(g: PortLabeledGraph, order: Sequence[int], marks: Sequence[int] | None) -> tuple[int, ...]:
    pos = {v: i for i, v in enumerate(order)}
    key: list[int] = [g.n]
    for v in order:
        if marks is not None:
            key.append(marks[v])
        key.append(g.degree(v))
        for u, q in g.adj[v]:
            key.append(pos[u])
            key.append(q)
    return tuple(key)


def canonical_order(g: PortLabeledGraph, marks: Sequence[int] | None = None) -> list[int]:
    best: tuple[int, ...] | None = None
    best_order: list[int] = []
    for r in range(g.n):
        order = bfs_order(g, r)
        if len(order) != g.n:
            raise ValueError("canonical form needs a connected graph")
        key = _key_from(g, order, marks)
        if best is None or key < best:
            best, best_order = key, order
    return best_order


def canonical_key(g: PortLabeledGraph, marks: Sequence[int] | None = None) -> tuple[int, ...]:
    return _key_from(g, canonical_order(g, marks), marks)


def canonical_form(g: PortLabeledGraph) -> PortLabeledGraph:
    order = canonical_order(g)
    perm = [0] * g.n
    for i, v in enumerate(order):
        perm[v] = i
    return g.relabel(perm)


def _varint(x: int) -> bytes:
    out = bytearray()
    while True:
        b = x & 0x7F
        x >>= 7
        if x:
            out.append(b | 0x80)
        else:
            out.append(b)
            return bytes(out)


def encode_raw(g: PortLabeledGraph) -> bytes:
    """Encode the graph with its current node numbering."""
    out = bytearray(MAGIC)
    out += _varint(g.n)
    for row in g.adj:
        out += _varint(len(row))
        for u, q in row:
            out += _varint(u)
            out += _varint(q)
    return bytes(out)


def canonical_encode(g: PortLabeledGraph) -> bytes:
    return encode_raw(canonical_form(g))


class DecodeError(ValueError):
    def __init__(self, position: int, reason: str):
        super().__init__(f"byte {position}: {reason}")
        self.position = position
        self.reason = reason


def canonical_decode(data: bytes) -> PortLabeledGraph:
    if data[: len(MAGIC)] != MAGIC:
        raise DecodeError(0, "bad magic")
    pos = len(MAGIC)

    def read() -> int:
        nonlocal pos
        x = shift = 0
        while True:
            if pos >= len(data):
                raise DecodeError(pos, "truncated")
            b = data[pos]
            pos += 1
            x |= (b & 0x7F) << shift
            shift += 7
            if not b & 0x80:
                return x

    n = read()
    if n < 1:
        raise DecodeError(pos, "node count must be positive")
    adj = []
    for _ in range(n):
        d = read()
        adj.append(tuple((read(), read()) for _ in range(d)))
    if pos != len(data):
        raise DecodeError(pos, "trailing bytes")
    g = PortLabeledGraph(tuple(adj))
    report = validate(g)
    if not report.ok:
        raise DecodeError(pos, "; ".join(report.violations))
    return g
