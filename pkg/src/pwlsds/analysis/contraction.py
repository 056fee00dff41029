"""Exact neighbourhood-contraction checks and interval-length decay along random compositions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..intervals import Interval
from ..rational import as_rat, fmt_rat, log_rat
from ..sds import SdsSystem, sample_choices

MODULUS_ONE = "all slopes have modulus 1"
NO_FIXER = "no map fixes x0"
EXPANDING = "every map fixing x0 has a slope of modulus >= 1 beside it"


@dataclass
class ContractionCertificate:
    x0: Fraction
    eps: Fraction
    holds: bool
    witnesses: list[dict] = field(default_factory=list)
    rejected: list[dict] = field(default_factory=list)
    reason: str = ""

    def to_json(self) -> dict:
        return {
            "x0": fmt_rat(self.x0),
            "eps": fmt_rat(self.eps),
            "holds": self.holds,
            "witnesses": self.witnesses,
            "rejected": self.rejected,
            "reason": self.reason,
        }


def _side_slopes(g, x0: Fraction) -> list[tuple[str, Fraction, Fraction]]:
    """``(side, slope, radius)`` of the pieces touching ``x0`` from inside [0,1]."""
    out = []
    for p in g.pieces():
        if p.lo < x0 <= p.hi:
            out.append(("left", p.slope, x0 - p.lo))
        if p.lo <= x0 < p.hi:
            out.append(("right", p.slope, p.hi - x0))
    return out


def contracts_neighborhood_check(sys: SdsSystem, x0) -> ContractionCertificate:
    """Exact Def.-style check: some map fixes ``x0`` and ``|g(x) − x0| < |x − x0|`` near ``x0``.

    Near a fixed point a piecewise-linear map is ``x0 + s (x − x0)`` on each
    side, so the cone inequality holds iff every adjacent slope has ``|s| < 1``;
    ``eps`` is the smallest adjacent-piece radius.
    """
    x0 = as_rat(x0)
    if not 0 <= x0 <= 1:
        raise ValueError("x0 must lie in [0,1]")
    witnesses, rejected = [], []
    for i, (g, prob) in enumerate(sys.items()):
        if g(x0) != x0:
            continue
        sides = _side_slopes(g, x0)
        info = {"map": i, "prob": fmt_rat(prob), "slopes": {side: fmt_rat(s) for side, s, _ in sides}}
        if all(abs(s) < 1 for _, s, _ in sides):
            eps = min(r for _, _, r in sides)
            witnesses.append(dict(info, eps=fmt_rat(eps)))
        else:
            info["modulus_one"] = all(abs(s) == 1 for _, s, _ in sides if abs(s) >= 1)
            rejected.append(info)
    if witnesses:
        best = max(witnesses, key=lambda w: Fraction(w["eps"]))
        return ContractionCertificate(x0, Fraction(best["eps"]), True, witnesses, rejected)
    if not rejected:
        reason = NO_FIXER
    elif all(r["modulus_one"] for r in rejected):
        reason = MODULUS_ONE
    else:
        reason = EXPANDING
    return ContractionCertificate(x0, Fraction(0), False, [], rejected, reason)


@dataclass
class ContractionRun:
    x: Fraction
    I0: Interval
    choices: list[int]
    lengths: list[Fraction]
    rate: float
    bound_checks: dict

    def to_json(self) -> dict:
        return {
            "x": fmt_rat(self.x),
            "I0": [fmt_rat(self.I0[0]), fmt_rat(self.I0[1])],
            "choices": self.choices,
            "lengths": [fmt_rat(L) for L in self.lengths],
            "lengths_decimal": [float(L) for L in self.lengths],
            "rate": self.rate,
            "bound_checks": self.bound_checks,
        }


def interval_contraction_sim(sys: SdsSystem, x, I0: Interval, n: int, seed: int, hs=(0.5,)) -> ContractionRun:
    """Exact lengths ``|g_k ∘ … ∘ g_1(I0)|``, the rate ``−(1/n) ln(len_n/len_0)`` and
    whether ``len_k ≤ e^{−h k}`` for all ``k ≥ 1`` for each ``h``."""
    x = as_rat(x)
    lo, hi = as_rat(I0[0]), as_rat(I0[1])
    if not lo < x < hi:
        raise ValueError("x must lie in the interior of I0")
    rng = np.random.default_rng(seed)
    choices = [int(c) for c in sample_choices(rng, sys.probs, n)]
    J = (lo, hi)
    lengths = [hi - lo]
    for c in choices:
        J = sys.maps[c].image_interval(J)
        lengths.append(J[1] - J[0])
    if lengths[-1] > 0:
        rate = -(log_rat(lengths[-1]) - log_rat(lengths[0])) / n
    else:
        rate = float("inf")
    checks = {}
    for h in hs:
        ok = all(L == 0 or log_rat(L) <= -h * k for k, L in enumerate(lengths) if k >= 1)
        checks[str(h)] = ok
    return ContractionRun(x, (lo, hi), choices, lengths, rate, checks)
