"""Timing constants as one swappable schedule.

Known-bound constants (both profiles):
    T(N)   = T_EXPLO(N) = 2 * length of the exploration sequence for N
    P(N,l) = 3(2l+4) T(N)               meeting bound of the rendezvous walk
    D(N,i) = P(N,i) + 3(i+2) T(N)

Unknown-bound constants per hypothesis h, with n_h, k_h from the enumeration
and m_h = max n_i over i <= h:

    paper profile                          desk profile (diameter cap C)
    ball radius   4h m_h^5                 C
    sweep length  n_h^5 + 1                min(n_h^5 + 1, C + 1)
    slowdown      7 m_h^(2 m_h^5)          1 + max over i <= h of sensitive(i)
    T_EST(n)      n^5                      worst case measured over all graphs
    T_BT(h)       64h m_h^(7h m_h^5)       (n_h-1)^R 2R (slowdown + 1)
    S_h           T_BT(h) + sum_{i<h} T_i  same
    T_h           8 m_h^(2m_h^5)(3S_h + 2T_BT(h))   F_h (slowdown + 2)

where sensitive(i) bounds StarCheck + EnsureCleanExploration + GraphSizeCheck
of hypothesis i, and F_h bounds the whole first part of hypothesis h. The
desk profile is sound for graphs whose diameter and maximum degree are at
most C; with the default C = 3 that covers every graph with n <= 4.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

from .est import EST_EXHAUSTIVE_LIMIT, t_est_measured
from .uxs import t_explo as _t_explo

PROFILES = ("paper", "desk")


@dataclass
class ConstantsProfile:
    name: str = "desk"
    diameter_cap: int = 3
    _memo: dict[tuple[str, int], Any] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.name not in PROFILES:
            raise ValueError(f"unknown profile {self.name!r}")
        if self.diameter_cap < 1:
            raise ValueError("diameter cap must be positive")

    # known bound ---------------------------------------------------------

    def t_explo(self, N: int) -> int:
        return _t_explo(N)

    def p(self, N: int, l: int) -> int:
        return 3 * (2 * l + 4) * self.t_explo(N)

    def d(self, N: int, i: int) -> int:
        return self.p(N, i) + 3 * (i + 2) * self.t_explo(N)

    def check_known(self, N: int, upto: int = 64) -> None:
        T = self.t_explo(N)
        if T % 2 or T <= 0:
            raise AssertionError("T_EXPLO must be even and positive")
        for i in range(1, upto):
            if not self.d(N, i + 1) > self.d(N, i) + 3 * T:
                raise AssertionError(f"D_{i+1} <= D_{i} + 3T")
            if not 2 * self.d(N, i) >= 2 * self.p(N, i) + T:
                raise AssertionError(f"D_{i} < P(N,{i}) + T/2")

    # token exploration ---------------------------------------------------

    def t_est(self, n: int) -> int:
        if self.name == "desk" and n <= EST_EXHAUSTIVE_LIMIT:
            value = t_est_measured(n)
            if value > n**5:
                raise AssertionError("measured exploration bound exceeds n^5")
            return value
        return n**5

    # unknown bound -------------------------------------------------------

    def _config(self, h: int):
        from ..protocol_unknown.configs import enumerate_config

        return enumerate_config(h)

    def _cached(self, key: str, h: int, fn):
        k = (key, h)
        if k not in self._memo:
            self._memo[k] = fn()
        return self._memo[k]

    def m(self, h: int) -> int:
        return self._cached("m", h, lambda: max(self._config(i).n for i in range(1, h + 1)))

    def ball_radius(self, h: int) -> int:
        return 4 * h * self.m(h) ** 5 if self.name == "paper" else self.diameter_cap

    def sweep_length(self, h: int) -> int:
        n = self._config(h).n
        return n**5 + 1 if self.name == "paper" else min(n**5 + 1, self.diameter_cap + 1)

    def max_degree(self, h: int) -> int:
        return max(self._config(h).n - 1, self.diameter_cap)

    def sensitive(self, h: int) -> int:
        c = self._config(h)
        E = self.sweep_length(h)
        return 4 * self.max_degree(h) * c.k + 2 * (c.n - 1) ** E * 2 * E + 2 * c.k * self.t_est(c.n)

    def slowdown(self, h: int) -> int:
        if self.name == "paper":
            m = self.m(h)
            return 7 * m ** (2 * m**5)
        return 1 + self.max_sensitive(h)

    def max_sensitive(self, h: int) -> int:
        """max of sensitive(i) over i <= h, filled in incrementally."""
        start = h
        while start > 1 and ("maxsens", start - 1) not in self._memo:
            start -= 1
        for x in range(start, h + 1):
            prev = self._memo.get(("maxsens", x - 1), 0)
            self._memo[("maxsens", x)] = max(prev, self.sensitive(x))
        return self._memo[("maxsens", h)]

    def t_bt(self, h: int) -> int:
        if self.name == "paper":
            m = self.m(h)
            return 64 * h * m ** (7 * h * m**5)
        n = self._config(h).n
        R = self.ball_radius(h)
        return (n - 1) ** R * 2 * R * (self.slowdown(h) + 1)

    def s(self, h: int) -> int:
        return self._cached("s", h, lambda: self.t_bt(h) + sum(self.t_hyp(i) for i in range(1, h)))

    def first_part_bound(self, h: int) -> int:
        c = self._config(h)
        S = self.s(h)
        move_to_central = (c.n - 1) + 3 * (S + c.n) + 3
        return self.t_bt(h) + S + move_to_central + self.sensitive(h)

    def t_hyp(self, h: int) -> int:
        def compute() -> int:
            if self.name == "paper":
                m = self.m(h)
                return 8 * m ** (2 * m**5) * (3 * self.s(h) + 2 * self.t_bt(h))
            return self.first_part_bound(h) * (self.slowdown(h) + 2)

        return self._cached("T", h, compute)

    def check_unknown(self, h: int) -> None:
        """Re-derive the inequalities the unknown-bound protocol relies on, up to hypothesis h."""
        done = self._memo.get(("checked", 0), 0)
        for x in range(done + 1, h + 1):
            if self.slowdown(x) <= self.max_sensitive(x):
                raise AssertionError(f"slowdown of hypothesis {x} does not exceed the sensitive parts")
            if self.t_hyp(x) < self.first_part_bound(x) * (self.slowdown(x) + 2):
                raise AssertionError(f"T_{x} is below the first-part bound")
            if self.s(x) < self.t_bt(x) + sum(self.t_hyp(i) for i in range(1, x)):
                raise AssertionError(f"S_{x} is below its recurrence")
            if self.name == "desk" and self.ball_radius(x) < self.diameter_cap:
                raise AssertionError("ball radius below the diameter cap")
            self._memo[("checked", 0)] = x


@lru_cache(maxsize=None)
def get_profile(name: str = "desk", diameter_cap: int = 3) -> ConstantsProfile:
    return ConstantsProfile(name, diameter_cap)
