"""Continuous, piecewise strictly monotone, piecewise-linear self-maps of [0,1].

All coordinates are exact :class:`~fractions.Fraction` values, so evaluation,
images, preimages and compositions are exact.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .intervals import Interval, merge
from .rational import ValidationError, as_rat

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Piece:
    """One linear piece ``x -> slope * x + intercept`` on ``[lo, hi]``."""

    lo: Fraction
    hi: Fraction
    slope: Fraction
    intercept: Fraction

    @property
    def increasing(self) -> bool:
        return self.slope > 0

    @property
    def direction(self) -> str:
        return "increasing" if self.slope > 0 else "decreasing"

    def __call__(self, x):
        return self.slope * x + self.intercept

    def image(self) -> Interval:
        a, b = self(self.lo), self(self.hi)
        return (a, b) if a <= b else (b, a)

    def inverse(self, y):
        """The affine inverse of the piece's extension (``gamma_i^{-1}``)."""
        return (y - self.intercept) / self.slope


@dataclass(frozen=True)
class PwlMap:
    """Linear interpolation of ``values`` at ascending ``breakpoints``.

    Breakpoints that do not change the slope are allowed; :meth:`simplify`
    removes them and yields the canonical representation used for equality
    of maps.
    """

    breakpoints: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        bp = tuple(as_rat(b) for b in self.breakpoints)
        vals = tuple(as_rat(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if len(bp) < 2 or len(bp) != len(vals):
            raise ValidationError("need >= 2 breakpoints and one value per breakpoint")
        if bp[0] != 0 or bp[-1] != 1:
            raise ValidationError("breakpoints must start at 0 and end at 1")
        for i, (a, b) in enumerate(zip(bp, bp[1:])):
            if not a < b:
                raise ValidationError(f"breakpoints not ascending at index {i + 1}")
        for i, v in enumerate(vals):
            if not 0 <= v <= 1:
                raise ValidationError(f"value {v} at index {i} outside [0,1]")
        for i, (a, b) in enumerate(zip(vals, vals[1:])):
            if a == b:
                raise ValidationError(f"equal consecutive values at index {i + 1} (map not strictly monotone)")

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_points(cls, breakpoints: Sequence, values: Sequence) -> "PwlMap":
        return cls(tuple(breakpoints), tuple(values))

    @classmethod
    def affine(cls, slope, offset) -> "PwlMap":
        slope, offset = as_rat(slope), as_rat(offset)
        return cls((ZERO, ONE), (offset, slope + offset))

    @classmethod
    def identity(cls) -> "PwlMap":
        return cls((ZERO, ONE), (ZERO, ONE))

    # -- basic queries ---------------------------------------------------

    @property
    def n_pieces(self) -> int:
        return len(self.breakpoints) - 1

    @cached_property
    def _pieces(self) -> tuple[Piece, ...]:
        out = []
        bp, v = self.breakpoints, self.values
        for i in range(len(bp) - 1):
            s = (v[i + 1] - v[i]) / (bp[i + 1] - bp[i])
            out.append(Piece(bp[i], bp[i + 1], s, v[i] - s * bp[i]))
        return tuple(out)

    def pieces(self) -> tuple[Piece, ...]:
        return self._pieces

    def piece_index(self, x) -> int:
        """Index of a piece containing ``x`` (the left one at a breakpoint)."""
        x = as_rat(x) if not isinstance(x, (Fraction, float)) else x
        if not 0 <= x <= 1:
            raise ValueError(f"x = {x} outside [0,1]")
        return max(0, min(self.n_pieces - 1, bisect_left(self.breakpoints, x) - 1))

    def __call__(self, x):
        if not 0 <= x <= 1:
            raise ValueError(f"x = {x} outside [0,1]")
        bp, v = self.breakpoints, self.values
        i = bisect_right(bp, x) - 1
        if i >= len(bp) - 1:
            return v[-1]
        if x == bp[i]:
            return v[i]
        t = (x - bp[i]) / (bp[i + 1] - bp[i])
        return v[i] + (v[i + 1] - v[i]) * t

    eval = __call__

    def critical_points(self) -> tuple[Fraction, ...]:
        """0, 1 and the breakpoints where the direction of monotonicity flips."""
        bp, v = self.breakpoints, self.values
        pts = [bp[0]]
        for i in range(1, len(bp) - 1):
            if (v[i] - v[i - 1]) * (v[i + 1] - v[i]) < 0:
                pts.append(bp[i])
        pts.append(bp[-1])
        return tuple(pts)

    def laps(self) -> list[Interval]:
        """Maximal intervals of monotonicity."""
        c = self.critical_points()
        return list(zip(c[:-1], c[1:]))

    def slope_breaks(self) -> tuple[Fraction, ...]:
        """Interior breakpoints where the slope actually changes."""
        return self.simplify().breakpoints[1:-1]

    def image_interval(self, I: Interval) -> Interval:
        lo, hi = as_rat(I[0]), as_rat(I[1])
        if lo > hi:
            raise ValueError("empty interval")
        if lo < 0 or hi > 1:
            raise ValueError("interval not inside [0,1]")
        ys = [self(lo), self(hi)]
        i0, i1 = bisect_right(self.breakpoints, lo), bisect_left(self.breakpoints, hi)
        ys.extend(self.values[i0:i1])
        return (min(ys), max(ys))

    @property
    def range(self) -> Interval:
        return (min(self.values), max(self.values))

    def preimage_points(self, y) -> tuple[tuple[Fraction, ...], int]:
        """Exact solution set of ``g(x) = y`` and its cardinality ``n(g, y)``."""
        y = as_rat(y)
        sols = set()
        for p in self._pieces:
            a, b = p.image()
            if a <= y <= b:
                sols.add(p.inverse(y))
        pts = tuple(sorted(sols))
        return pts, len(pts)

    def preimage_count(self, y) -> int:
        return self.preimage_points(y)[1]

    def preimage_intervals(self, I: Interval) -> list[Interval]:
        """Connected components of ``g^{-1}(I)``; degenerate points are kept."""
        lo, hi = as_rat(I[0]), as_rat(I[1])
        parts = []
        for p in self._pieces:
            a, b = p.image()
            ya, yb = max(a, lo), min(b, hi)
            if ya > yb:
                continue
            xa, xb = p.inverse(ya), p.inverse(yb)
            parts.append((min(xa, xb), max(xa, xb)))
        return merge(parts)

    def covering_count(self, y) -> int:
        """Number of linear pieces whose image contains ``y``."""
        return sum(1 for p in self._pieces if p.image()[0] <= y <= p.image()[1])

    # -- algebra ----------------------------------------------------------

    def simplify(self) -> "PwlMap":
        bp, v = self.breakpoints, self.values
        keep_b, keep_v = [bp[0]], [v[0]]
        for i in range(1, len(bp) - 1):
            s_left = (v[i] - keep_v[-1]) / (bp[i] - keep_b[-1])
            s_right = (v[i + 1] - v[i]) / (bp[i + 1] - bp[i])
            if s_left != s_right:
                keep_b.append(bp[i])
                keep_v.append(v[i])
        keep_b.append(bp[-1])
        keep_v.append(v[-1])
        if len(keep_b) == len(bp):
            return self
        return PwlMap(tuple(keep_b), tuple(keep_v))

    def canonical_key(self) -> tuple:
        s = self.simplify()
        return (s.breakpoints, s.values)

    def same_function(self, other: "PwlMap") -> bool:
        return self.canonical_key() == other.canonical_key()

    def compose(self, inner: "PwlMap") -> "PwlMap":
        """``self ∘ inner``."""
        return compose(self, inner)

    def conjugate(self) -> "PwlMap":
        """The map ``x -> 1 - g(1 - x)``."""
        bp = tuple(ONE - b for b in reversed(self.breakpoints))
        vals = tuple(ONE - v for v in reversed(self.values))
        return PwlMap(bp, vals)

    def fixed_points(self) -> tuple[list[Fraction], list[Interval]]:
        """Isolated fixed points and whole fixed intervals (pieces equal to the identity)."""
        pts, ivs = set(), []
        for p in self._pieces:
            if p.slope == 1:
                if p.intercept == 0:
                    ivs.append((p.lo, p.hi))
                continue
            x = p.intercept / (1 - p.slope)
            if p.lo <= x <= p.hi:
                pts.add(x)
        ivs = merge(ivs)
        pts = [x for x in sorted(pts) if not any(a <= x <= b for a, b in ivs)]
        return pts, ivs

    def to_json(self) -> dict:
        from .rational import fmt_rat

        return {"breakpoints": [fmt_rat(b) for b in self.breakpoints], "values": [fmt_rat(v) for v in self.values]}

    def __repr__(self) -> str:
        pts = ", ".join(f"({b}, {v})" for b, v in zip(self.breakpoints, self.values))
        return f"PwlMap[{pts}]"


def compose(outer: PwlMap, inner: PwlMap) -> PwlMap:
    """Exact ``outer ∘ inner``.

    Breakpoints are the inner breakpoints refined by the inner-preimages of
    every outer breakpoint, so the composition is linear between them.
    """
    pts = set(inner.breakpoints)
    for d in outer.breakpoints[1:-1]:
        pts.update(inner.preimage_points(d)[0])
    bp = sorted(pts)
    vals = [outer(inner(x)) for x in bp]
    return PwlMap(tuple(bp), tuple(vals)).simplify()


def eval_map(g: PwlMap, x) -> Fraction:
    return g(x)


def pieces(g: PwlMap) -> tuple[Piece, ...]:
    return g.pieces()


def critical_points(g: PwlMap) -> tuple[Fraction, ...]:
    return g.critical_points()


def image_interval(g: PwlMap, I: Interval) -> Interval:
    return g.image_interval(I)


def preimage_points(g: PwlMap, y) -> tuple[tuple[Fraction, ...], int]:
    return g.preimage_points(y)


def preimage_intervals(g: PwlMap, I: Interval) -> list[Interval]:
    return g.preimage_intervals(I)
