"""Mean preimage counts ``x ↦ ∫ n(g, x) dμ(g)`` and μ-injectivity."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..intervals import Interval, merge
from ..rational import fmt_rat
from ..sds import SdsSystem
from ..stepfun import StepFunction


def preimage_count_function(sys: SdsSystem) -> StepFunction:
    """Exact step function; breakpoints are 0, 1 and every critical value of every map."""
    pts = {Fraction(0), Fraction(1)}
    for g in sys.maps:
        pts.update(g.values)
    bp = sorted(pts)

    def count(y):
        return sum((p * g.preimage_count(y) for g, p in sys.items()), Fraction(0))

    vals = tuple(count((a + b) / 2) for a, b in zip(bp, bp[1:]))
    return StepFunction(tuple(bp), vals, {b: count(b) for b in bp})


@dataclass
class InjectivityReport:
    injective: bool
    count: StepFunction
    violating_cells: list[tuple[Fraction, Fraction, Fraction]]
    exceptional_points: list[Fraction]

    @property
    def violating_set(self) -> list[Interval]:
        return merge([(a, b) for a, b, _ in self.violating_cells])

    @property
    def min_violation(self) -> Fraction | None:
        return min((v for _, _, v in self.violating_cells), default=None)

    def summary(self) -> str:
        if self.injective:
            return "μ-injective on (0,1) off the finite exceptional set"
        parts = " ∪ ".join(f"({fmt_rat(a)},{fmt_rat(b)})" for a, b in self.violating_set)
        return f"violated on {parts}; min ∫n dμ = {fmt_rat(self.min_violation)}"

    def to_json(self) -> dict:
        return {
            "injective": self.injective,
            "summary": self.summary(),
            "count_function": self.count.to_json(),
            "violating_cells": [{"lo": fmt_rat(a), "hi": fmt_rat(b), "value": fmt_rat(v)} for a, b, v in self.violating_cells],
            "exceptional_points": [fmt_rat(x) for x in self.exceptional_points],
        }


def check_mu_injectivity(sys: SdsSystem) -> InjectivityReport:
    """Injective iff the count function is ≤ 1 on every open cell; breakpoints are the allowed exceptions."""
    f = preimage_count_function(sys)
    bad = [(a, b, v) for a, b, v in f.cells() if v > 1]
    exc = [x for x, v in sorted(f.point_values.items()) if 0 < x < 1 and v > 1]
    return InjectivityReport(not bad, f, bad, exc)
