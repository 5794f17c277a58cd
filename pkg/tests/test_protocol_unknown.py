from __future__ import annotations

import itertools

import pytest

from countgather.engine import GeneratorProgram, Scenario, Wait, program, run
from countgather.family import graphs_of_size
from countgather.graph import generate
from countgather.harness.properties import CheckContext, verify_trace
from countgather.primitives.profile import get_profile
from countgather.protocol_unknown.configs import (
    Configuration,
    configurations_of_weight,
    enumerate_config,
    first_index,
    label_sets,
    smallest_shortest_path,
)
from countgather.protocol_unknown.routines import (
    ball_traversal,
    ensure_clean_exploration,
    gather_unknown,
    graph_size_check,
    hypothesis,
    move_to_central,
    star_check,
)

DESK = get_profile("desk")
LINE2 = generate("line", 2)


# enumeration ---------------------------------------------------------------------


def test_first_hypothesis_is_the_lightest_configuration():
    c = enumerate_config(1)
    assert c.n == 2 and c.k == 2
    assert c.label_set == {1, 2}
    assert c.weight() == 6


def test_nothing_is_lighter_than_six():
    # brute force: every graph with at most 3 nodes, every pair of labels up to 7
    lightest = min(
        Configuration(g, ((a, u), (b, v))).weight()
        for n in (2, 3)
        for g in graphs_of_size(n)
        for a, b in itertools.combinations(range(1, 8), 2)
        for u, v in itertools.permutations(range(n), 2)
    )
    assert lightest == 6
    for w in range(1, 6):
        assert configurations_of_weight(w) == []


FROZEN_WEIGHT_COUNTS = {6: 2, 7: 5, 8: 28, 9: 84, 10: 310, 11: 1148}


def test_counts_per_weight():
    for w, count in FROZEN_WEIGHT_COUNTS.items():
        assert len(configurations_of_weight(w)) == count


def test_enumeration_is_injective_up_to_weight_eleven():
    total = sum(FROZEN_WEIGHT_COUNTS.values())
    seen = {enumerate_config(h).encoding for h in range(1, total + 1)}
    assert len(seen) == total
    weights = [enumerate_config(h).weight() for h in range(1, total + 1)]
    assert weights == sorted(weights)


H0 = 347  # largest first index over the configurations below, measured once


def test_every_small_configuration_appears_early():
    worst = 0
    for n in (2, 3):
        for g in graphs_of_size(n):
            for labs in itertools.combinations((1, 2, 3), 2):
                for nodes in itertools.permutations(range(n), 2):
                    c = Configuration.of(g, dict(zip(labs, nodes)))
                    h = first_index(c)
                    assert enumerate_config(h).encoding == c.encoding
                    worst = max(worst, h)
    assert worst == H0


def test_index_ignores_node_names():
    g = generate("random_connected", 4, 2)
    c = Configuration.of(g, {1: 0, 3: 2})
    d = Configuration.of(g.relabel([3, 1, 0, 2]), {1: 3, 3: 0})
    assert c.encoding == d.encoding
    assert first_index(c) == first_index(d)


def test_label_sets():
    assert list(label_sets(3, 2)) == [(1, 2), (1, 3)]
    assert all(sum(x.bit_length() for x in s) == 5 for s in label_sets(5, 3))


def test_configuration_accessors():
    g = generate("line", 4)
    c = Configuration.of(g, {4: 0, 2: 3, 7: 1})
    assert c.central == 3
    assert c.rank(7) == 2 and c.rank(2) == 0
    assert c.path(4) == (0, 1, 1)
    assert c.path(2) == ()
    with pytest.raises(ValueError):
        Configuration.of(g, {1: 0, 2: 0})
    with pytest.raises(ValueError):
        Configuration.of(g, {1: 0})


def test_smallest_shortest_path_prefers_low_ports():
    g = generate("ring", 4)
    # two shortest paths from 0 to 2; the one starting with port 0 wins
    p = smallest_shortest_path(g, 0, 2)
    assert len(p) == 2 and p[0] == 0


# routines --------------------------------------------------------------------------


def run_routine(g, agents, routine, h, cfg, limit=10**7, others=None):
    """Every agent in `agents` runs routine(ctx, h, DESK, cfg); agents in `others` just sit."""
    out = {}
    labels = dict(agents)
    labels.update(others or {})
    sc = Scenario(g, labels, {lab: 0 for lab in labels}, shared_starts=True)

    def factory(lab):
        def body(ctx):
            if lab in agents:
                out[lab] = yield from routine(ctx, h, DESK, cfg)
                out[(lab, "clock")] = ctx.clock
            else:
                yield Wait(None)

        return GeneratorProgram(lab, body)

    res = run(sc, factory, limit, stop_when_declared=False)
    assert res.error is None, res.error
    return out, res


def test_ball_traversal_on_two_nodes():
    cfg = enumerate_config(1)
    out, _ = run_routine(LINE2, {1: 0}, ball_traversal, 1, cfg)
    assert out[1] is True


def test_ball_traversal_stops_on_a_high_degree_node():
    g = generate("complete", 4)
    cfg = enumerate_config(1)
    out, res = run_routine(g, {1: 0}, ball_traversal, 1, cfg)
    assert out[1] is False
    assert out[(1, "clock")] == 0


def test_ball_traversal_visits_the_whole_ball():
    g = generate("line", 5)
    cfg = Configuration.of(generate("line", 3), {1: 0, 2: 2})
    h = first_index(cfg)
    out, res = run_routine(g, {1: 2}, ball_traversal, h, cfg)
    assert out[1] is True
    visited = {s[3] for s in res.trace.agent_steps(1)} | {s[5] for s in res.trace.agent_steps(1)}
    dist = g.distances_from(2)
    radius = DESK.ball_radius(h)
    assert visited == {v for v in range(g.n) if dist[v] <= radius}
    assert res.trace.agent_steps(1)[-1][5] == 2


def test_move_to_central_refuses_unknown_labels_and_bad_paths():
    cfg = Configuration.of(generate("line", 3), {1: 1, 2: 0})
    out, res = run_routine(LINE2, {5: 0}, move_to_central, 1, cfg)
    assert out[5] is False and out[(5, "clock")] == 0
    # label 2's path starts with port 1, which a degree-1 node does not have
    cfg = Configuration.of(generate("line", 3), {1: 2, 2: 0})
    out, _ = run_routine(LINE2, {2: 0}, move_to_central, 1, cfg)
    assert out[2] is False


def test_move_to_central_succeeds_with_everyone_present():
    cfg = enumerate_config(1)
    out, _ = run_routine(LINE2, {1: 0, 2: 1}, move_to_central, 1, cfg)
    assert out[1] is True and out[2] is True
    # both leave at the same time, so the star dance starts aligned
    assert out[(1, "clock")] == out[(2, "clock")]


def test_star_check_passes_for_an_aligned_pair():
    g = generate("ring", 3)
    cfg = Configuration.of(g, {1: 0, 2: 1})
    out, _ = run_routine(g, {1: 0, 2: 0}, star_check, 1, cfg)
    assert out[1] and out[2]
    d = g.degree(0)
    assert out[(1, "clock")] == out[(2, "clock")] == 4 * d * cfg.k


def test_star_check_sees_a_planted_intruder():
    g = generate("line", 3)
    cfg = Configuration.of(g, {1: 1, 2: 0})
    out, _ = run_routine(g, {1: 1, 2: 1}, star_check, 1, cfg, others={7: 0})
    assert not out[1] or not out[2]
    assert out[(1, "clock")] == 4 * 2 * 2


def test_clean_exploration_alone_and_with_an_intruder():
    g = generate("line", 3)
    cfg = Configuration.of(g, {1: 0, 2: 2})
    h = first_index(cfg)
    out, _ = run_routine(g, {1: 1, 2: 1}, ensure_clean_exploration, h, cfg)
    assert out[1] and out[2]
    out, _ = run_routine(g, {1: 1, 2: 1}, ensure_clean_exploration, h, cfg, others={9: 2})
    assert not out[1] and not out[2]


@pytest.mark.parametrize("shape,n_h,expect", [(("ring", 3), 3, True), (("ring", 4), 3, False), (("line", 2), 3, False)])
def test_graph_size_check(shape, n_h, expect):
    g = generate(*shape)
    base = generate("ring", 3) if n_h == 3 else LINE2
    cfg = Configuration.of(base, {1: 0, 2: 1})
    h = first_index(cfg)
    out, _ = run_routine(g, {1: 0, 2: 0}, graph_size_check, h, cfg)
    assert out[1] is expect and out[2] is expect
    assert out[(1, "clock")] == out[(2, "clock")] == 2 * cfg.k * DESK.t_est(n_h)


def test_failed_hypothesis_takes_exactly_its_budget():
    # a 3-node line can never match the 2-node configuration of hypothesis 1
    g = generate("line", 3)
    sc = Scenario(g, {1: 0, 2: 2}, {1: 0, 2: 0})
    results = {}

    def factory(lab):
        def body(ctx):
            results[lab] = yield from hypothesis(ctx, 1, DESK)
            results[(lab, "clock")] = ctx.clock

        return GeneratorProgram(lab, body)

    res = run(sc, factory, DESK.t_hyp(1) + 5, stop_when_declared=False)
    assert results[1] is False and results[2] is False
    assert results[(1, "clock")] == results[(2, "clock")] == DESK.t_hyp(1)
    for lab in (1, 2):
        assert res.trace.agent_steps(lab)[-1][5] == sc.agents[lab]


# whole runs ------------------------------------------------------------------------


@pytest.mark.parametrize(
    "shape,agents,wakes",
    [
        (("line", 2), {1: 0, 2: 1}, {1: 0, 2: 1}),
        (("line", 3), {2: 1, 3: 0}, {2: 0, 3: 1}),
        (("line", 3), {2: 1, 3: 0}, {2: 1, 3: 0}),
        (("ring", 3), {1: 0, 3: 2}, {1: 0, 3: None}),
    ],
)
def test_runs_declare_correctly(shape, agents, wakes):
    g = generate(*shape)
    sc = Scenario(g, agents, wakes)
    h = first_index(Configuration.of(g, agents))
    limit = 2 + sum(DESK.t_hyp(i) for i in range(1, h + 1))
    res = run(sc, program(gather_unknown), limit)
    assert res.outcome == "gathered-and-declared", res.error
    report = verify_trace(res.trace, sc, CheckContext("unknown", None, DESK, expect_h=h))
    assert all(ok for ok, _ in report.values()), report


def test_paper_profile_two_node_run_has_exact_wait_spans():
    prof = get_profile("paper")
    sc = Scenario(LINE2, {1: 0, 2: 1}, {1: 0, 2: 0})
    res = run(sc, program(gather_unknown, prof), 10**400)
    assert res.outcome == "gathered-and-declared"
    R, slow, S = prof.ball_radius(1), prof.slowdown(1), prof.s(1)
    # ball: R slowed steps out and R back; wait S; central wait S + 2 and the
    # 3-round hand-off; star 4dk = 8; two sweeps of 33 steps out and back; size 2k n^5
    expected = 2 * R * (slow + 1) + S + (1 + S + 2 + 2) + 8 + 2 * 2 * 33 + 2 * 2 * 32
    assert {r for r, _, _ in res.trace.declarations.values()} == {expected}
    spans = [s[1] - s[0] + 1 for s in res.trace.agent_steps(1) if s[4] == -1]
    assert spans.count(slow) == 2 * R
