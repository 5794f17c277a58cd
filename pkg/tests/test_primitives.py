from __future__ import annotations

import pytest
from hypothesis import assume, given, settings, strategies as st

from countgather.engine import Context, Move, Scenario, Wait, program, run
from countgather.graph import generate
from countgather.harness.oracles import est_oracle, explo_oracle, tz_oracle, tz_trajectory
from countgather.primitives import cache
from countgather.primitives.bits import (
    NotACodeword,
    bit,
    code,
    decode,
    is_codeword,
    sub,
    terminal_pair_index,
    to_binary,
)
from countgather.primitives.est import est_plus, run_est, t_est_measured
from countgather.primitives.profile import ConstantsProfile, get_profile
from countgather.primitives.tz import tz, tz_meeting_bound, tz_word
from countgather.primitives.uxs import build_uxs, covers_all, explo, t_explo, walk

bitstrings = st.text(alphabet="01", max_size=12)


# bits -------------------------------------------------------------------------


def test_code_examples():
    assert code("") == "01"
    assert code("1") == "1101"
    assert code("10") == "110001"
    assert decode("110001") == "10"


@settings(max_examples=200, deadline=None)
@given(bitstrings)
def test_decode_inverts_code(x):
    assert decode(code(x)) == x
    assert is_codeword(code(x))


@settings(max_examples=200, deadline=None)
@given(bitstrings, bitstrings)
def test_no_codeword_is_a_prefix_of_another(x, y):
    assume(x != y)
    a, b = code(x), code(y)
    assert not b.startswith(a)
    # and so they differ within the shorter length
    m = min(len(a), len(b))
    assert a[:m] != b[:m]


def test_decode_rejects_with_position():
    with pytest.raises(NotACodeword):
        decode("110")
    with pytest.raises(NotACodeword) as err:
        decode("1011" + "01")
    assert err.value.index == 1
    assert not is_codeword("0101")  # "01" pair before the end


def test_indexing_helpers():
    assert bit("0110", 2) == "1"
    assert sub("0110", 2, 3) == "11"
    assert sub("0110", 3, 2) == ""
    assert sub("0110", 0, 2) == ""
    assert to_binary(5) == "101"
    with pytest.raises(ValueError):
        to_binary(-1)


@settings(max_examples=200, deadline=None)
@given(bitstrings, st.integers(0, 6))
def test_terminal_pair_finds_the_end_of_a_code(x, pad):
    s = code(x) + "1" * pad
    z = terminal_pair_index(s)
    assert z == len(code(x)) - 1
    assert decode(s[: z + 1]) == x


def test_terminal_pair_absent():
    assert terminal_pair_index("1111") is None
    assert terminal_pair_index("") is None


# exploration sequences ---------------------------------------------------------

FROZEN_UXS = {2: (0,), 3: (0, 1, 1), 4: (0, 1, 1, 1, 2, 1, 1, 0, 1, 1, 1)}


def test_sequences_are_the_cached_ones():
    for N, seq in FROZEN_UXS.items():
        assert build_uxs(N) == seq
        assert t_explo(N) == 2 * len(seq)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_sequence_is_universal(N):
    summary = explo_oracle(N)
    assert summary.ok, summary.failures[:3]
    assert covers_all(N, build_uxs(N))


def test_short_sequence_is_not_universal():
    assert not covers_all(4, build_uxs(4)[:-1])


def test_explo_fragment_walks_and_returns():
    g = generate("line", 4)
    seq = build_uxs(4)
    seen = []

    def body(ctx):
        low = yield from explo(ctx, seq)
        seen.append(low)

    sc = Scenario(g, {1: 0, 2: 3}, {1: 0, 2: None})
    res = run(sc, lambda lab: program(body)(lab), 2 * len(seq) + 1, stop_when_declared=False)
    moves = [s for s in res.trace.agent_steps(1) if s[4] >= 0]
    assert len(moves) == 2 * len(seq)
    assert moves[-1][5] == 0
    assert [s[3] for s in moves[: len(seq)]] == walk(g, 0, seq)[:-1]


def test_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv("COUNTGATHER_CACHE", str(tmp_path))
    calls = []

    def build():
        calls.append(1)
        return [1, 2, 3]

    assert cache.cached("demo", "k1", build) == [1, 2, 3]
    assert cache.cached("demo", "k1", build) == [1, 2, 3]
    assert len(calls) == 1
    # a tampered body is rebuilt
    path = next(tmp_path.glob("demo-k1*.json"))
    path.write_text(path.read_text().replace("[1, 2, 3]", "[9]"))
    assert cache.cached("demo", "k1", build) == [1, 2, 3]
    assert len(calls) == 2


# rendezvous walk ------------------------------------------------------------------


def test_tz_word_and_bound():
    assert tz_word(1) == "1101"
    assert tz_word(2) == "110001"
    assert tz_meeting_bound(22, 1) == 3 * 6 * 22
    prof = get_profile("desk")
    assert prof.p(4, 2) == 3 * 8 * t_explo(4)


def test_tz_trajectory_matches_the_fragment():
    g = generate("ring", 4)
    seq = build_uxs(4)
    T = 2 * len(seq)
    rounds = 12 * T
    sc = Scenario(g, {3: 1, 9: 3}, {3: 0, 9: None})
    res = run(sc, program_for_tz(seq), rounds, stop_when_declared=False, fast_forward=False)
    nodes = [a for r, lab, a, *_ in res.trace.expanded() if lab == 3]
    assert nodes[:rounds] == list(tz_trajectory(g, 1, 3, seq, rounds))


def program_for_tz(seq):
    return lambda lab: program(tz, lab, seq)(lab)


def test_tz_oracle_small():
    summary = tz_oracle(3, max_label=6)
    assert summary.ok, summary.failures[:3]
    assert summary.worst <= get_profile("desk").p(3, 3)


# size learning ---------------------------------------------------------------------

FROZEN_EST_WORST = {2: 2, 3: 9, 4: 27}


def test_measured_bounds():
    for n, worst in FROZEN_EST_WORST.items():
        assert t_est_measured(n) == worst
        assert worst <= n**5


def test_est_oracle():
    summary = est_oracle(4)
    assert summary.ok, summary.failures[:3]
    assert summary.worst == FROZEN_EST_WORST[4]


def test_est_on_two_nodes():
    size, end, moves = run_est(generate("line", 2), 0)
    assert (size, end, moves) == (2, 0, 2)


@pytest.mark.parametrize("kind,n", [("ring", 5), ("complete", 5), ("line", 6), ("random_connected", 7)])
def test_est_on_larger_graphs(kind, n):
    g = generate(kind, n, seed=3)
    for t in range(n):
        size, end, _ = run_est(g, t)
        assert (size, end) == (n, t)


def _est_plus_run(g, n_h, budget):
    out = {}

    def explorer(ctx):
        out["ok"] = yield from est_plus(ctx, n_h, budget)
        out["clock"] = ctx.clock

    def token(ctx):
        yield Wait(None)

    sc = Scenario(g, {1: 0, 2: 0}, {1: 0, 2: 0}, shared_starts=True)
    factory = lambda lab: program(explorer if lab == 1 else token)(lab)  # noqa: E731
    res = run(sc, factory, 10 * budget + 10, stop_when_declared=False)
    final = res.trace.agent_steps(1)[-1][5]
    return out, final


def test_est_plus_accepts_the_right_size_and_returns_home():
    g = generate("ring", 3)
    out, final = _est_plus_run(g, 3, t_est_measured(3))
    assert out["ok"] and final == 0


def test_est_plus_rejects_the_wrong_size_and_a_short_budget():
    g = generate("ring", 4)
    out, final = _est_plus_run(g, 3, t_est_measured(4))
    assert not out["ok"] and final == 0
    out, final = _est_plus_run(g, 4, 3)
    assert not out["ok"] and final == 0
    assert out["clock"] == 6  # three steps out, three back


# constants ------------------------------------------------------------------------


def test_known_bound_inequalities_hold():
    for name in ("desk", "paper"):
        prof = get_profile(name)
        for N in (2, 3, 4):
            prof.check_known(N)


def test_profiles_agree_on_the_known_bound_part():
    a, b = get_profile("desk"), get_profile("paper")
    for N in (2, 3, 4):
        for i in range(6):
            assert a.d(N, i) == b.d(N, i)


FROZEN_DESK_H1 = {"slowdown": 49, "t_bt": 300, "s": 300, "t_hyp": 79458}


def test_desk_schedule_values():
    prof = get_profile("desk")
    assert prof.slowdown(1) == FROZEN_DESK_H1["slowdown"]
    assert prof.t_bt(1) == FROZEN_DESK_H1["t_bt"]
    assert prof.s(1) == FROZEN_DESK_H1["s"]
    assert prof.t_hyp(1) == FROZEN_DESK_H1["t_hyp"]
    assert prof.s(2) == prof.t_bt(2) + prof.t_hyp(1)


def test_unknown_bound_inequalities_hold():
    prof = ConstantsProfile("desk")
    prof.check_unknown(400)
    paper = ConstantsProfile("paper")
    paper.check_unknown(3)
    assert paper.t_hyp(1) > 2**64


def test_profile_rejects_bad_settings():
    with pytest.raises(ValueError):
        ConstantsProfile("fast")
    with pytest.raises(ValueError):
        ConstantsProfile("desk", diameter_cap=0)
