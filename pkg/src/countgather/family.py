"""Exhaustive families of small port-labeled graphs."""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterator

import networkx as nx
from networkx.generators.atlas import graph_atlas_g

from .graph import PortLabeledGraph, canonical_form, encode_raw

ENUMERATION_LIMIT = 5


@lru_cache(maxsize=None)
def unlabeled_shapes(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Edge lists of all connected simple graphs on n nodes, one per isomorphism class."""
    if n == 1:
        return ((),)
    if n > 7:
        raise ValueError("the graph atlas stops at 7 nodes")
    out = []
    for h in graph_atlas_g():
        if h.number_of_nodes() == n and nx.is_connected(h):
            out.append(tuple(sorted(tuple(sorted(e)) for e in h.edges())))
    return tuple(out)


def _automorphisms(n: int, edges: tuple[tuple[int, int], ...]) -> list[tuple[int, ...]]:
    es = {frozenset(e) for e in edges}
    out = []
    for perm in itertools.permutations(range(n)):
        if all(frozenset((perm[a], perm[b])) in es for a, b in edges):
            out.append(perm)
    return out


def port_labelings(n: int, edges: tuple[tuple[int, int], ...], reduce: bool = True) -> Iterator[PortLabeledGraph]:
    """All port labelings of one shape.

    With `reduce`, the port order at one node of maximum degree is only taken
    up to the automorphisms fixing that node. Every isomorphism class is still
    hit at least once, just with fewer duplicates.
    """
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        nbrs[a].append(b)
        nbrs[b].append(a)
    choices = [list(itertools.permutations(row)) for row in nbrs]
    if reduce and n > 1:
        hub = max(range(n), key=lambda v: (len(nbrs[v]), -v))
        stab = [p for p in _automorphisms(n, edges) if p[hub] == hub]
        kept = []
        seen: set[tuple[int, ...]] = set()
        for order in choices[hub]:
            if order in seen:
                continue
            kept.append(order)
            for p in stab:
                seen.add(tuple(p[u] for u in order))
        choices[hub] = kept
    for combo in itertools.product(*choices):
        index = [{u: p for p, u in enumerate(row)} for row in combo]
        yield PortLabeledGraph(tuple(tuple((u, index[u][v]) for u in row) for v, row in enumerate(combo)))


@lru_cache(maxsize=None)
def graphs_of_size(n: int) -> tuple[PortLabeledGraph, ...]:
    """One canonical representative per isomorphism class, sorted by encoding."""
    if n > ENUMERATION_LIMIT:
        raise ValueError(f"exhaustive enumeration is limited to n <= {ENUMERATION_LIMIT}")
    reps: dict[bytes, PortLabeledGraph] = {}
    for edges in unlabeled_shapes(n):
        for g in port_labelings(n, edges):
            c = canonical_form(g)
            reps.setdefault(encode_raw(c), c)
    return tuple(reps[k] for k in sorted(reps))


def enumerate_graphs(n_max: int) -> Iterator[PortLabeledGraph]:
    """Every connected port-labeled simple graph with at most n_max nodes, once per canonical form."""
    if n_max > ENUMERATION_LIMIT:
        raise ValueError(f"exhaustive enumeration is limited to n <= {ENUMERATION_LIMIT}")
    for n in range(1, n_max + 1):
        yield from graphs_of_size(n)


@lru_cache(maxsize=None)
def graphs_with_edges(n: int, e: int) -> tuple[PortLabeledGraph, ...]:
    return tuple(g for g in graphs_of_size(n) if g.edge_count() == e)
