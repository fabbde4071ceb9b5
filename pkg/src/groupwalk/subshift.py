"""The distance-constrained subshift: patterns, legality, enumeration.

Configurations carry at most two 1s, and when there are exactly two, the
word-metric distance between their cells must avoid a set A of naturals.
A is always supplied as a finite 0/1 prefix of its characteristic
sequence, so legality of a window is decidable exactly when the prefix is
long enough to see the relevant distance.

Patterns are dense 0/1 windows over a canonical ball of the group, so a
ball index addresses the same cell in every pattern of the same radius.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import groups
from .errors import PrefixTooShortError


@dataclass(frozen=True)
class OraclePrefix:
    """A finite prefix of the characteristic sequence of a set of naturals."""

    bits: str

    def __post_init__(self):
        if any(ch not in "01" for ch in self.bits):
            raise ValueError("oracle prefix must consist of 0/1 characters")

    def __len__(self):
        return len(self.bits)

    def bit(self, i):
        """0/1 inside the prefix, None beyond it."""
        if 0 <= i < len(self.bits):
            return int(self.bits[i])
        return None

    def members(self):
        return [i for i, ch in enumerate(self.bits) if ch == "1"]

    def letterwise_le(self, other):
        """u <= v bitwise; both prefixes must have equal length."""
        if len(self.bits) != len(other.bits):
            raise ValueError("letterwise comparison needs equal lengths")
        return all(a <= b for a, b in zip(self.bits, other.bits))

    def extends(self, shorter):
        return self.bits.startswith(shorter.bits)

    @classmethod
    def zeros(cls, length):
        return cls("0" * length)

    @classmethod
    def from_members(cls, members, length):
        bits = ["0"] * length
        for m in members:
            if 0 <= m < length:
                bits[m] = "1"
        return cls("".join(bits))


@dataclass(frozen=True)
class Pattern:
    """A 0/1 window over the canonical ball of a given radius.

    `bits[i]` is the value at the i-th element of the ball, in canonical
    ball order.  At most two positions may hold a 1.
    """

    ctx_name: str
    radius: int
    bits: tuple

    def __post_init__(self):
        if sum(self.bits) > 2:
            raise ValueError("patterns carry at most two 1s")

    @property
    def ones(self):
        return tuple(i for i, b in enumerate(self.bits) if b)

    def value_at(self, index):
        return self.bits[index]

    def describe(self):
        return f"ball radius {self.radius} of {self.ctx_name}, ones at {list(self.ones)}"


def make_pattern(ctx, radius, ones=()):
    """Pattern over ball(ctx, radius) with 1s at the given ball indices."""
    size = len(groups.ball(ctx, radius))
    ones = tuple(sorted(set(ones)))
    if any(i < 0 or i >= size for i in ones):
        raise ValueError("one-position outside the ball")
    bits = [0] * size
    for i in ones:
        bits[i] = 1
    return Pattern(ctx.name, radius, tuple(bits))


@dataclass(frozen=True)
class Legality:
    kind: str  # "legal" | "illegal" | "unknown"
    distance: int | None = None

    def __bool__(self):
        return self.kind == "legal"


LEGAL = Legality("legal")


def pattern_legal(ctx, prefix, pattern):
    """Classify a pattern against an oracle prefix.

    Illegal iff it has two 1s whose distance is a known member; unknown
    when the needed distance lies beyond the prefix; legal otherwise.
    """
    ones = pattern.ones
    if len(ones) < 2:
        return LEGAL
    elems = groups.ball(ctx, pattern.radius)
    d = groups.distance(ctx, elems[ones[0]], elems[ones[1]])
    b = prefix.bit(d)
    if b is None:
        return Legality("unknown", d)
    return Legality("illegal", d) if b == 1 else LEGAL


def enumerate_language(ctx, prefix, n):
    """All legal patterns over the radius-n ball, in canonical order.

    Order: the all-zero pattern, single-1 patterns by ball position, then
    two-1 patterns by (i, j) position pairs lexicographically.  Requires
    the prefix to determine every pairwise distance in the ball, i.e.
    |prefix| >= 2n + 1.
    """
    if len(prefix) < 2 * n + 1:
        raise PrefixTooShortError(2 * n + 1, len(prefix))
    elems = groups.ball(ctx, n)
    out = [make_pattern(ctx, n)]
    for i in range(len(elems)):
        out.append(make_pattern(ctx, n, (i,)))
    for i in range(len(elems)):
        for j in range(i + 1, len(elems)):
            d = groups.distance(ctx, elems[i], elems[j])
            if prefix.bit(d) == 0:
                out.append(make_pattern(ctx, n, (i, j)))
    return out


def count_language(ctx, prefix, n):
    """Closed-form size of enumerate_language: 1 + |ball| + legal pairs."""
    if len(prefix) < 2 * n + 1:
        raise PrefixTooShortError(2 * n + 1, len(prefix))
    elems = groups.ball(ctx, n)
    pairs = 0
    for i in range(len(elems)):
        for j in range(i + 1, len(elems)):
            if prefix.bit(groups.distance(ctx, elems[i], elems[j])) == 0:
                pairs += 1
    return 1 + len(elems) + pairs


def forbidden_pattern_stream(ctx, member_iter, max_radius=None):
    """Stream the forbidden two-1 windows induced by an enumeration of A.

    Dovetails ball growth against the enumerator: at round R it pulls one
    more member (while any remain) and emits, for every member seen so
    far, all two-1 patterns over ball(R) whose distance equals that member
    and which were not emitted at a smaller radius.  Every forbidden
    window over any ball is eventually produced; the stream is infinite
    unless max_radius is given (it stops after that round).
    """
    member_iter = iter(member_iter)
    known = []  # (member value, radius already swept)
    exhausted = False
    radius = 0
    while True:
        radius += 1
        if max_radius is not None and radius > max_radius:
            return
        if not exhausted:
            try:
                known.append([next(member_iter), 0])
            except StopIteration:
                exhausted = True
        if exhausted and not known:
            return
        elems = groups.ball(ctx, radius)
        if (
            exhausted
            and ctx._exhausted
            and len(elems) == len(groups.ball(ctx, radius - 1))
            and all(swept >= radius - 1 for _, swept in known)
        ):
            return  # finite group fully swept for every known member
        for entry in known:
            a, swept = entry
            # new pairs only: at least one endpoint entered at a radius
            # beyond this member's last sweep
            lo = len(groups.ball(ctx, swept))
            for j in range(lo, len(elems)):
                for i in range(j):
                    if groups.distance(ctx, elems[i], elems[j]) == a:
                        yield make_pattern(ctx, radius, (i, j))
            entry[1] = radius


def pattern_record(pattern):
    """Serialisable form: ordered (ball index, bit) list against a named ball."""
    return {
        "ctx": pattern.ctx_name,
        "radius": pattern.radius,
        "cells": [[i, b] for i, b in enumerate(pattern.bits)],
    }


def pattern_from_record(ctx, record):
    if record["ctx"] != ctx.name:
        raise ValueError(f"pattern belongs to {record['ctx']}, not {ctx.name}")
    bits = [0] * len(groups.ball(ctx, record["radius"]))
    for i, b in record["cells"]:
        bits[i] = int(b)
    return Pattern(ctx.name, record["radius"], tuple(bits))
