"""Exact step functions on [0,1] (constant on open cells)."""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .rational import ValidationError, as_rat, fmt_rat


@dataclass(frozen=True)
class StepFunction:
    breakpoints: tuple[Fraction, ...]
    values: tuple[Fraction, ...]
    point_values: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        bp = tuple(as_rat(b) for b in self.breakpoints)
        vals = tuple(as_rat(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if len(bp) != len(vals) + 1 or any(not a < b for a, b in zip(bp, bp[1:])):
            raise ValidationError("step function needs ascending breakpoints and one value per cell")

    def cells(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        return list(zip(self.breakpoints, self.breakpoints[1:], self.values))

    def value_at(self, x) -> Fraction:
        """Cell value, or the recorded point value when ``x`` is a breakpoint."""
        if x in self.point_values:
            return self.point_values[x]
        i = bisect_right(self.breakpoints, x) - 1
        i = min(max(i, 0), len(self.values) - 1)
        return self.values[i]

    def eval_float(self, xs) -> np.ndarray:
        edges = np.array([float(b) for b in self.breakpoints])
        vals = np.array([float(v) for v in self.values])
        i = np.clip(np.searchsorted(edges, np.asarray(xs, float), side="right") - 1, 0, len(vals) - 1)
        return vals[i]

    def simplify(self) -> "StepFunction":
        bp, vals = [self.breakpoints[0]], [self.values[0]]
        for b, v in zip(self.breakpoints[1:-1], self.values[1:]):
            if v != vals[-1]:
                bp.append(b)
                vals.append(v)
        bp.append(self.breakpoints[-1])
        pv = {x: v for x, v in self.point_values.items() if x in bp}
        return StepFunction(tuple(bp), tuple(vals), pv)

    def integrate(self, m) -> Fraction:
        """``∫ f dm`` for an exact atomless measure (open-cell values only)."""
        tot = Fraction(0)
        for a, b, v in self.cells():
            e = m.interval_mass((a, b))
            if not e.is_exact:
                raise ValueError("integral needs exact cell masses")
            tot += v * e.lo
        return tot

    def max_value(self) -> Fraction:
        return max(self.values)

    def min_value(self) -> Fraction:
        return min(self.values)

    def to_json(self) -> dict:
        return {
            "breakpoints": [fmt_rat(b) for b in self.breakpoints],
            "values": [fmt_rat(v) for v in self.values],
            "point_values": [{"x": fmt_rat(x), "value": fmt_rat(v)} for x, v in sorted(self.point_values.items())],
        }


def indicator(lo, hi, value=1) -> StepFunction:
    """``value · 1_[lo,hi]`` on [0,1]; endpoint values are ``value``."""
    lo, hi = as_rat(lo), as_rat(hi)
    bp, vals = [Fraction(0)], []
    if lo > 0:
        bp.append(lo)
        vals.append(Fraction(0))
    vals.append(as_rat(value))
    bp.append(hi)
    if hi < 1:
        vals.append(Fraction(0))
        bp.append(Fraction(1))
    pv = {lo: as_rat(value), hi: as_rat(value)}
    return StepFunction(tuple(bp), tuple(vals), pv)


def constant(value) -> StepFunction:
    return StepFunction((Fraction(0), Fraction(1)), (as_rat(value),))
