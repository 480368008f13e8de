"""Longest common subsequence length.

Two routes that must agree exactly: a row-wise O(|a|*|b|) dynamic program and
the bit-vector recurrence of Allison-Dix / Hyyro, which processes one token of
the shorter sequence per step using arbitrary-precision ints as bit vectors
over the longer one.
"""

from __future__ import annotations

from collections.abc import Hashable, Sequence

from .textproc import TokenSeq

METHODS = ("auto", "dp", "bitparallel")


def lcs_len_dp(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        push = cur.append
        left = 0
        # diag = prev[j], up = prev[j + 1]
        for y, diag, up in zip(b, prev, prev[1:]):
            if x == y:
                left = diag + 1
            elif up > left:
                left = up
            push(left)
        prev = cur
    return prev[-1]


def lcs_len_bitparallel(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    if len(a) > len(b):
        a, b = b, a
    n = len(b)
    if not a:
        return 0
    masks: dict[Hashable, int] = {}
    bit = 1
    for y in b:
        masks[y] = masks.get(y, 0) | bit
        bit <<= 1
    full = bit - 1
    v = full
    get = masks.get
    for x in a:
        m = get(x)
        if m is None:
            continue
        u = v & m
        v = ((v + u) | (v - u)) & full
    return n - v.bit_count()


def lcs_len(a: TokenSeq, b: TokenSeq, method: str = "auto") -> int:
    """LCS length of two token sequences of the same level.

    ``auto`` uses the bit-parallel route; ``dp`` forces the reference DP.
    """
    if a.level != b.level:
        raise ValueError(f"token levels differ: {a.level.value} vs {b.level.value}")
    if method == "dp":
        return lcs_len_dp(a.tokens, b.tokens)
    if method in ("auto", "bitparallel"):
        return lcs_len_bitparallel(a.tokens, b.tokens)
    raise ValueError(f"unknown LCS method {method!r}; expected one of {METHODS}")
