"""Binary strings as Python str over {'0','1'} with 1-indexed helpers."""

from __future__ import annotations


class NotACodeword(ValueError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"position {index}: {reason}")
        self.index = index


def bit(s: str, i: int) -> str:
    """s[i] with 1-based indexing."""
    return s[i - 1]


def sub(s: str, i: int, j: int) -> str:
    """s[i,j] inclusive and 1-based; empty when i > j or the indices fall outside s."""
    if i < 1 or j > len(s) or i > j:
        return ""
    return s[i - 1 : j]


def to_binary(x: int) -> str:
    if x < 0:
        raise ValueError("negative integers have no binary representation here")
    return format(x, "b")


def code(s: str) -> str:
    return "".join(c + c for c in s) + "01"


def decode(c: str) -> str:
    if len(c) % 2:
        raise NotACodeword(len(c), "odd length")
    if len(c) < 2 or c[-2:] != "01":
        raise NotACodeword(max(len(c) - 1, 1), "missing 01 terminator")
    out = []
    for k in range(0, len(c) - 2, 2):
        a, b = c[k], c[k + 1]
        if a not in "01" or b not in "01":
            raise NotACodeword(k + 1, "not a bit")
        if a != b:
            raise NotACodeword(k + 1, "pair is not doubled")
        out.append(a)
    return "".join(out)


def is_codeword(c: str) -> bool:
    try:
        decode(c)
    except NotACodeword:
        return False
    return True


def terminal_pair_index(l: str) -> int | None:
    """Smallest odd z < |l| with l[z,z+1] = 01, or None."""
    for z in range(1, len(l), 2):
        if l[z - 1 : z + 1] == "01":
            return z
    return None
