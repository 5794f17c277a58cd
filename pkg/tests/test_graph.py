from __future__ import annotations

import itertools
import random

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from countgather.family import ENUMERATION_LIMIT, enumerate_graphs, graphs_of_size, port_labelings
from countgather.graph import (
    DecodeError,
    PathFailure,
    PortLabeledGraph,
    canonical_decode,
    canonical_encode,
    canonical_form,
    entry_ports,
    follow_path,
    generate,
    validate,
)


def random_graph(seed: int, n: int) -> PortLabeledGraph:
    return generate("random_connected", n, seed)


def test_generators_are_valid_and_sized():
    for kind in ("ring", "line", "complete", "random_connected"):
        for n in range(3, 8):
            g = generate(kind, n, seed=n)
            assert g.n == n
            assert validate(g).ok, kind


def test_ring_of_two_is_refused():
    # the two-node "ring" would need a doubled edge
    with pytest.raises(ValueError):
        generate("ring", 2)


def test_line_ports_and_diameter():
    g = generate("line", 4)
    assert g.degrees == (1, 2, 2, 1)
    assert g.diameter() == 3
    assert follow_path(g, 0, [0, 1, 1]) == 3


def test_complete_graph_degrees():
    g = generate("complete", 5)
    assert set(g.degrees) == {4}
    assert g.edge_count() == 10


def test_validate_catches_each_fault():
    good = generate("line", 3)
    assert validate(good).ok
    asym = PortLabeledGraph.from_lists([[(1, 0)], [(0, 1), (2, 0)], [(1, 1)]])
    assert any("symmetr" in v for v in validate(asym).violations)
    loop = PortLabeledGraph.from_lists([[(0, 0), (1, 0)], [(0, 1)]])
    assert not validate(loop).ok
    parallel = PortLabeledGraph.from_lists([[(1, 0), (1, 1)], [(0, 0), (0, 1)]])
    assert not validate(parallel).ok
    split = PortLabeledGraph.from_lists([[(1, 0)], [(0, 0)], [(3, 0)], [(2, 0)]])
    assert not validate(split).ok
    out_of_range = PortLabeledGraph.from_lists([[(5, 0)], [(0, 0)]])
    assert not validate(out_of_range).ok


def test_follow_path_reports_missing_port():
    g = generate("line", 3)
    assert follow_path(g, 0, [0, 1]) == 2
    assert follow_path(g, 0, [0, 5]) == PathFailure(2)
    assert entry_ports(g, 0, [0, 1]) == [0, 0]


def test_text_round_trip():
    g = random_graph(3, 6)
    assert PortLabeledGraph.from_text(g.to_text()) == g
    with pytest.raises(ValueError):
        PortLabeledGraph.from_text("0: (1,0)\n")


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.integers(0, 10_000), st.randoms(use_true_random=False))
def test_canonical_form_ignores_node_names(n, seed, rnd):
    g = random_graph(seed, n)
    perm = list(range(n))
    rnd.shuffle(perm)
    h = g.relabel(perm)
    assert canonical_encode(g) == canonical_encode(h)
    assert canonical_form(g) == canonical_form(h)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.integers(0, 10_000))
def test_canonical_encoding_round_trips(n, seed):
    g = canonical_form(random_graph(seed, n))
    assert canonical_decode(canonical_encode(g)) == g


def test_decoder_points_at_the_bad_byte():
    blob = canonical_encode(generate("line", 3))
    with pytest.raises(DecodeError) as err:
        canonical_decode(b"XXXX" + blob[4:])
    assert err.value.position == 0
    with pytest.raises(DecodeError):
        canonical_decode(blob[:-1])


def test_port_swap_changes_the_form_on_an_asymmetric_graph():
    # a path with a pendant: swapping the ports of the middle node is a different port graph
    g = PortLabeledGraph.from_lists([[(1, 0)], [(0, 0), (2, 0), (3, 0)], [(1, 1)], [(1, 2)]])
    h = PortLabeledGraph.from_lists([[(1, 1)], [(2, 0), (0, 0), (3, 0)], [(1, 0)], [(1, 2)]])
    # both are stars, so every port order at the hub is equivalent
    assert canonical_encode(g) == canonical_encode(h)
    p = generate("line", 4)
    q = PortLabeledGraph.from_lists([[(1, 1)], [(2, 0), (0, 0)], [(1, 0), (3, 0)], [(2, 1)]])
    assert validate(q).ok
    assert canonical_encode(p) != canonical_encode(q)


# family ---------------------------------------------------------------------

FROZEN_COUNTS = {1: 1, 2: 1, 3: 3, 4: 119}  # port-labeled isomorphism classes, measured once


def test_class_counts():
    for n, count in FROZEN_COUNTS.items():
        assert len(graphs_of_size(n)) == count


def test_enumeration_is_duplicate_free_and_ordered():
    gs = list(enumerate_graphs(4))
    keys = [canonical_encode(g) for g in gs]
    assert len(set(keys)) == len(keys) == sum(FROZEN_COUNTS.values())
    assert all(validate(g).ok for g in gs)


def test_enumeration_refuses_large_sizes():
    with pytest.raises(ValueError):
        list(enumerate_graphs(ENUMERATION_LIMIT + 1))


def slow_classes(n: int) -> set[bytes]:
    """Independent enumerator: every adjacency matrix, keep the connected ones, every port order at every node."""
    found = set()
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        G = nx.Graph()
        G.add_nodes_from(range(n))
        G.add_edges_from(edges)
        if not nx.is_connected(G):
            continue
        nbrs = [sorted(G[v]) for v in range(n)]
        for orders in itertools.product(*(itertools.permutations(row) for row in nbrs)):
            index = [{u: p for p, u in enumerate(row)} for row in orders]
            adj = [[(u, index[u][v]) for u in row] for v, row in enumerate(orders)]
            found.add(canonical_encode(PortLabeledGraph.from_lists(adj)))
    return found


@pytest.mark.parametrize("n", [2, 3, 4])
def test_matches_slow_enumerator(n):
    assert slow_classes(n) == {canonical_encode(g) for g in graphs_of_size(n)}


def test_stabilizer_reduction_keeps_every_class():
    edges = ((0, 1), (0, 2), (0, 3), (1, 2))
    full = {canonical_encode(g) for g in port_labelings(4, edges, reduce=False)}
    reduced = {canonical_encode(g) for g in port_labelings(4, edges, reduce=True)}
    assert full == reduced


def test_random_connected_is_seeded():
    assert random_graph(11, 6) == random_graph(11, 6)
    assert len({random_graph(s, 6) for s in range(10)}) > 1
    random.seed(0)  # global state must not matter
    a = random_graph(5, 5)
    random.seed(1)
    assert a == random_graph(5, 5)
