"""Closed rational intervals as ``(lo, hi)`` tuples, unions and grid partitions."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .rational import ValidationError, parse_rat

Interval = tuple[Fraction, Fraction]

UNIT: Interval = (Fraction(0), Fraction(1))


def interval(lo, hi) -> Interval:
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    return (lo, hi)


def merge(parts: Iterable[Interval]) -> list[Interval]:
    """Sort and merge overlapping or touching closed intervals."""
    out: list[list[Fraction]] = []
    for lo, hi in sorted(parts):
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    return [(a, b) for a, b in out]


def intersect(a: Interval, b: Interval) -> Interval | None:
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return (lo, hi) if lo <= hi else None


def overlap_length(a: Interval, b: Interval) -> Fraction:
    return max(Fraction(0), min(a[1], b[1]) - max(a[0], b[0]))


def total_length(parts: Iterable[Interval]) -> Fraction:
    return sum((hi - lo for lo, hi in merge(parts)), Fraction(0))


def grid_edges(kind: str, bins: int) -> list[Fraction]:
    """Edges ``0 = e_0 < ... < e_bins = 1`` of a uniform grid.

    ``dyadic`` and ``ternary`` additionally require ``bins`` to be a power of
    2 or 3 so that cells align with the maps' breakpoints.
    """
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    base = {"dyadic": 2, "ternary": 3}.get(kind)
    if kind not in ("dyadic", "ternary", "uniform"):
        raise ValidationError(f"unknown grid {kind!r}")
    if base is not None:
        b = bins
        while b % base == 0:
            b //= base
        if b != 1:
            raise ValidationError(f"{kind} grid needs a power of {base}, got {bins}")
    return [Fraction(i, bins) for i in range(bins + 1)]


def grid_partition(kind: str, depth: int) -> list[Interval]:
    """Cells of the dyadic/ternary partition at ``depth`` (``base**depth`` cells)."""
    base = {"dyadic": 2, "ternary": 3}[kind]
    edges = grid_edges(kind, base**depth)
    return list(zip(edges[:-1], edges[1:]))


def parse_partition(spec: str) -> list[Interval]:
    """Parse ``dyadic:D``, ``ternary:D`` or ``uniform:B``."""
    try:
        kind, arg = spec.split(":")
        n = int(arg)
    except ValueError as exc:
        raise ValidationError(f"partition {spec!r}: expected KIND:N") from exc
    if kind == "uniform":
        e = grid_edges("uniform", n)
        return list(zip(e[:-1], e[1:]))
    if kind not in ("dyadic", "ternary") or n < 0:
        raise ValidationError(f"partition {spec!r}: unknown kind or negative depth")
    return grid_partition(kind, n)


def parse_interval(text: str) -> Interval:
    lo, hi = (parse_rat(t, field="interval") for t in text.split(","))
    return interval(lo, hi)


def is_partition(cells: Sequence[Interval]) -> bool:
    """Cells cover [0,1] in order with disjoint interiors."""
    if not cells or cells[0][0] != 0 or cells[-1][1] != 1:
        return False
    return all(a[1] == b[0] for a, b in zip(cells, cells[1:])) and all(lo < hi for lo, hi in cells)
