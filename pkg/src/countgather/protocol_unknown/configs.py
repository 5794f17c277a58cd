"""The shared enumeration of labeled initial configurations.

Order: by weight n + edges + total bit length of the labels, then by the
canonical byte encoding of (graph, labels). Every agent computes the same
sequence, so hypothesis h means the same configuration to all of them.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, Optional

from ..family import graphs_with_edges
from ..graph import PortLabeledGraph, _varint, canonical_order

CONFIG_MAGIC = b"CFG1"


@dataclass(frozen=True)
class Configuration:
    graph: PortLabeledGraph
    placement: tuple[tuple[int, int], ...]  # (label, node), sorted by label

    def __post_init__(self) -> None:
        labels = [lab for lab, _ in self.placement]
        nodes = [v for _, v in self.placement]
        if self.graph.n < 2 or len(labels) < 2:
            raise ValueError("a configuration needs at least two nodes and two labels")
        if len(set(labels)) != len(labels) or len(set(nodes)) != len(nodes) or min(labels) < 1:
            raise ValueError("labels must be distinct positive integers on distinct nodes")

    @classmethod
    def of(cls, graph: PortLabeledGraph, labels: Mapping[int, int]) -> Configuration:
        return cls(graph, tuple(sorted(labels.items())))

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def k(self) -> int:
        return len(self.placement)

    @cached_property
    def labels(self) -> dict[int, int]:
        return dict(self.placement)

    @property
    def label_set(self) -> frozenset[int]:
        return frozenset(self.labels)

    @property
    def central(self) -> int:
        return self.placement[0][1]

    def rank(self, label: int) -> int:
        return sum(1 for lab, _ in self.placement if lab < label)

    def path(self, label: int) -> tuple[int, ...]:
        """Lexicographically smallest shortest port path from the node of `label` to the central node."""
        return smallest_shortest_path(self.graph, self.labels[label], self.central)

    def weight(self) -> int:
        return self.n + self.graph.edge_count() + sum(lab.bit_length() for lab, _ in self.placement)

    def marks(self) -> list[int]:
        out = [0] * self.n
        for lab, v in self.placement:
            out[v] = lab
        return out

    @cached_property
    def encoding(self) -> bytes:
        marks = self.marks()
        order = canonical_order(self.graph, marks)
        pos = {v: i for i, v in enumerate(order)}
        out = bytearray(CONFIG_MAGIC)
        out += _varint(self.n)
        for v in order:
            out += _varint(marks[v])
            out += _varint(self.graph.degree(v))
            for u, q in self.graph.adj[v]:
                out += _varint(pos[u])
                out += _varint(q)
        return bytes(out)


def smallest_shortest_path(g: PortLabeledGraph, src: int, dst: int) -> tuple[int, ...]:
    # a FIFO expanded in port order reaches every node first along its
    # lexicographically smallest shortest path
    parent: dict[int, tuple[int, int]] = {src: (-1, -1)}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        if v == dst:
            break
        for p, (u, _) in enumerate(g.adj[v]):
            if u not in parent:
                parent[u] = (v, p)
                queue.append(u)
    out = []
    v = dst
    while v != src:
        v, p = parent[v]
        out.append(p)
    return tuple(reversed(out))


def label_sets(budget: int, max_count: int, smallest: int = 1) -> Iterator[tuple[int, ...]]:
    """Increasing label tuples (at least two labels, at most max_count) whose bit lengths sum to budget."""

    def rec(lo: int, left: int, count: int) -> Iterator[tuple[int, ...]]:
        if left == 0:
            if count >= 2:
                yield ()
            return
        if count >= max_count:
            return
        lab = lo
        while lab.bit_length() <= left:
            for rest in rec(lab + 1, left - lab.bit_length(), count + 1):
                yield (lab,) + rest
            lab += 1

    yield from rec(smallest, budget, 0)


MAX_CONFIG_NODES = 5


def configurations_of_weight(w: int) -> list[Configuration]:
    found: dict[bytes, Configuration] = {}
    for n in range(2, w):
        for e in range(n - 1, n * (n - 1) // 2 + 1):
            budget = w - n - e
            if budget < 3:  # two labels cost at least 1 + 2 bits
                break
            if n > MAX_CONFIG_NODES:
                raise ValueError(f"weight {w} needs graphs with {n} nodes; the enumeration stops at {MAX_CONFIG_NODES}")
            sets = list(label_sets(budget, n))
            if not sets:
                continue
            for g in graphs_with_edges(n, e):
                for labs in sets:
                    for nodes in itertools.permutations(range(n), len(labs)):
                        c = Configuration(g, tuple(zip(labs, nodes)))
                        found.setdefault(c.encoding, c)
    return [found[key] for key in sorted(found)]


@dataclass
class Omega:
    """Lazily materialized enumeration; index h is 1-based."""

    _items: list[Configuration] = field(default_factory=list)
    _weight: int = 5
    _index: dict[bytes, int] = field(default_factory=dict)

    def _grow(self) -> None:
        self._weight += 1
        for c in configurations_of_weight(self._weight):
            self._items.append(c)
            self._index[c.encoding] = len(self._items)

    def __getitem__(self, h: int) -> Configuration:
        if h < 1:
            raise IndexError("hypotheses start at 1")
        while len(self._items) < h:
            self._grow()
        return self._items[h - 1]

    def index_of(self, config: Configuration, max_weight: Optional[int] = None) -> int:
        target = config.weight() if max_weight is None else max_weight
        while self._weight < target:
            self._grow()
        return self._index[config.encoding]


OMEGA = Omega()


def enumerate_config(h: int) -> Configuration:
    return OMEGA[h]


def first_index(config: Configuration) -> int:
    return OMEGA.index_of(config)
