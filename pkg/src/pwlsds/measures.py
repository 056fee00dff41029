"""Measures on [0,1] answering interval-mass queries with rigorous enclosures.

Every query returns a :class:`MassEnclosure` ``[lo, hi]`` that contains the
true mass.  Piecewise-constant densities and atomic measures are exact
(``lo == hi``); self-similar measures are resolved to a recursion depth and
report the unresolved mass as the enclosure width; mixtures add a declared
tail-mass bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .intervals import UNIT, Interval, merge
from .pwl import PwlMap
from .rational import ValidationError, as_rat, fmt_rat

ZERO = Fraction(0)
ONE = Fraction(1)
DEFAULT_DEPTH = 40


@dataclass(frozen=True)
class MassEnclosure:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"inverted enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, v) -> "MassEnclosure":
        v = Fraction(v)
        return cls(v, v)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __add__(self, other: "MassEnclosure") -> "MassEnclosure":
        return MassEnclosure(self.lo + other.lo, self.hi + other.hi)

    def scale(self, k) -> "MassEnclosure":
        k = Fraction(k)
        if k < 0:
            raise ValueError("negative scale")
        return MassEnclosure(self.lo * k, self.hi * k)

    def contains(self, v) -> bool:
        return self.lo <= v <= self.hi

    def intersects(self, other: "MassEnclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __float__(self) -> float:
        return float(self.mid)

    def to_json(self) -> dict:
        return {"lo": fmt_rat(self.lo), "hi": fmt_rat(self.hi), "lo_decimal": float(self.lo), "hi_decimal": float(self.hi)}

    def __repr__(self) -> str:
        if self.is_exact:
            return f"Mass({self.lo})"
        return f"Mass[{self.lo}, {self.hi}]"


def clip_nonneg(lo, hi) -> MassEnclosure:
    return MassEnclosure(max(ZERO, lo), max(ZERO, hi))


def abs_diff(a: MassEnclosure, b: MassEnclosure) -> MassEnclosure:
    """Enclosure of ``|A - B|`` for ``A ∈ a``, ``B ∈ b``."""
    hi = max(a.hi - b.lo, b.hi - a.lo)
    lo = max(ZERO, a.lo - b.hi, b.lo - a.hi)
    return MassEnclosure(lo, hi)


def enclosure_max(items: Iterable[MassEnclosure]) -> MassEnclosure:
    items = list(items)
    return MassEnclosure(max(e.lo for e in items), max(e.hi for e in items))


def _clip_unit(I: Interval) -> Interval | None:
    lo, hi = max(ZERO, Fraction(I[0])), min(ONE, Fraction(I[1]))
    return (lo, hi) if lo <= hi else None


class Measure:
    """Common interface.  Subclasses implement :meth:`interval_mass`."""

    atomless = True

    def interval_mass(self, I: Interval, depth: int | None = None) -> MassEnclosure:
        raise NotImplementedError

    def union_mass(self, parts: Sequence[Interval], depth: int | None = None) -> MassEnclosure:
        """Mass of a union of pairwise disjoint closed intervals."""
        out = MassEnclosure.exact(0)
        for I in merge(parts):
            out = out + self.interval_mass(I, depth)
        return out

    def total_mass(self, depth: int | None = None) -> MassEnclosure:
        return self.interval_mass(UNIT, depth)

    def cdf(self, x, depth: int | None = None) -> MassEnclosure:
        return self.interval_mass((ZERO, Fraction(x)), depth)

    def is_probability(self) -> bool:
        return self.total_mass() == MassEnclosure.exact(1)

    def sample(self, rng: np.random.Generator) -> float:
        raise NotImplementedError(f"sampling not supported for {type(self).__name__}")

    def sample_many(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.array([self.sample(rng) for _ in range(n)])

    def float_cdf(self):
        """Float CDF encoding consumed by the Monte Carlo kernels."""
        raise NotImplementedError(f"no float CDF for {type(self).__name__}")

    def cdf_knots(self) -> list[tuple[Fraction, Fraction]] | None:
        """Exact knots of a continuous piecewise-linear CDF, if the measure has one."""
        return None


# ---------------------------------------------------------------------------
# exact types


@dataclass(frozen=True, eq=False)
class PwcDensity(Measure):
    """Piecewise-constant density: ``densities[i]`` on ``[bp[i], bp[i+1]]``."""

    breakpoints: tuple[Fraction, ...]
    densities: tuple[Fraction, ...]

    def __post_init__(self):
        bp = tuple(as_rat(b) for b in self.breakpoints)
        d = tuple(as_rat(v) for v in self.densities)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "densities", d)
        if len(bp) != len(d) + 1 or len(d) < 1:
            raise ValidationError("need len(breakpoints) == len(densities) + 1")
        if bp[0] != 0 or bp[-1] != 1:
            raise ValidationError("density breakpoints must run from 0 to 1")
        if any(not a < b for a, b in zip(bp, bp[1:])):
            raise ValidationError("density breakpoints not ascending")
        if any(v < 0 for v in d):
            raise ValidationError("negative density")

    @classmethod
    def lebesgue(cls) -> "PwcDensity":
        return cls((ZERO, ONE), (ONE,))

    @classmethod
    def uniform(cls, lo, hi) -> "PwcDensity":
        lo, hi = as_rat(lo), as_rat(hi)
        if not 0 <= lo < hi <= 1:
            raise ValidationError("uniform needs 0 <= lo < hi <= 1")
        return cls.from_cells([(lo, hi, 1 / (hi - lo))])

    @classmethod
    def from_cells(cls, cells: Iterable[tuple]) -> "PwcDensity":
        """Build from ``(lo, hi, density)`` triples; the rest of [0,1] gets 0."""
        cells = sorted((as_rat(a), as_rat(b), as_rat(f)) for a, b, f in cells)
        bp, dens = [ZERO], []
        for a, b, f in cells:
            if a < bp[-1]:
                raise ValidationError("overlapping density cells")
            if a > bp[-1]:
                dens.append(ZERO)
                bp.append(a)
            dens.append(f)
            bp.append(b)
        if bp[-1] < 1:
            dens.append(ZERO)
            bp.append(ONE)
        return cls(tuple(bp), tuple(dens)).simplify()

    def __eq__(self, other):
        if not isinstance(other, PwcDensity):
            return NotImplemented
        a, b = self.simplify(), other.simplify()
        return a.breakpoints == b.breakpoints and a.densities == b.densities

    def __hash__(self):
        s = self.simplify()
        return hash((s.breakpoints, s.densities))

    def simplify(self) -> "PwcDensity":
        bp, d = [self.breakpoints[0]], [self.densities[0]]
        for b, f in zip(self.breakpoints[1:-1], self.densities[1:]):
            if f == d[-1]:
                continue
            bp.append(b)
            d.append(f)
        bp.append(self.breakpoints[-1])
        if len(d) == len(self.densities):
            return self
        return PwcDensity(tuple(bp), tuple(d))

    def cells(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        return [(a, b, f) for a, b, f in zip(self.breakpoints, self.breakpoints[1:], self.densities)]

    def density_at(self, x) -> Fraction:
        """Density on the open cell containing ``x``; raises at a jump."""
        from bisect import bisect_right

        i = min(bisect_right(self.breakpoints, x) - 1, len(self.densities) - 1)
        if x == self.breakpoints[i] and 0 < i:
            if self.densities[i - 1] != self.densities[i]:
                raise ValueError(f"density jumps at {x}")
        return self.densities[i]

    def is_jump(self, x) -> bool:
        s = self.simplify()
        return x in s.breakpoints[1:-1]

    def mass_exact(self, lo, hi) -> Fraction:
        tot = ZERO
        for a, b, f in self.cells():
            if b <= lo:
                continue
            if a >= hi:
                break
            tot += f * (min(b, hi) - max(a, lo))
        return tot

    def interval_mass(self, I, depth=None) -> MassEnclosure:
        J = _clip_unit(I)
        if J is None:
            return MassEnclosure.exact(0)
        return MassEnclosure.exact(self.mass_exact(*J))

    def cdf_knots(self):
        out, acc = [(ZERO, ZERO)], ZERO
        for a, b, f in self.cells():
            acc += f * (b - a)
            out.append((b, acc))
        return out

    def sample(self, rng):
        if self.total_mass().lo != 1:
            raise ValueError("cannot sample an unnormalized density")
        knots = self.cdf_knots()
        xs = np.array([float(k[0]) for k in knots])
        Fs = np.array([float(k[1]) for k in knots])
        u = rng.random()
        i = int(np.searchsorted(Fs, u, side="right")) - 1
        i = min(max(i, 0), len(xs) - 2)
        while Fs[i + 1] == Fs[i]:
            i += 1
        t = (u - Fs[i]) / (Fs[i + 1] - Fs[i])
        return float(xs[i] + t * (xs[i + 1] - xs[i]))

    def sample_many(self, rng, n):
        if self.total_mass().lo != 1:
            raise ValueError("cannot sample an unnormalized density")
        cells = [(float(a), float(b), float(f * (b - a))) for a, b, f in self.cells() if f > 0]
        w = np.array([c[2] for c in cells])
        idx = rng.choice(len(cells), size=n, p=w / w.sum())
        lo = np.array([c[0] for c in cells])[idx]
        hi = np.array([c[1] for c in cells])[idx]
        return lo + rng.random(n) * (hi - lo)

    def float_cdf(self):
        k = self.cdf_knots()
        return ("knots", np.array([float(a) for a, _ in k]), np.array([float(b) for _, b in k]))

    def scaled(self, c) -> "PwcDensity":
        c = as_rat(c)
        return PwcDensity(self.breakpoints, tuple(c * f for f in self.densities))

    def to_json(self) -> dict:
        return {"breakpoints": [fmt_rat(b) for b in self.breakpoints], "densities": [fmt_rat(f) for f in self.densities]}

    def __repr__(self) -> str:
        s = self.simplify()
        cells = ", ".join(f"[{a},{b}]:{f}" for a, b, f in s.cells())
        return f"PwcDensity({cells})"


def sum_pwc(dens: Sequence[PwcDensity]) -> PwcDensity:
    bps = sorted({b for d in dens for b in d.breakpoints})
    vals = []
    for a, b in zip(bps, bps[1:]):
        m = (a + b) / 2
        vals.append(sum((d.density_at(m) for d in dens), ZERO))
    return PwcDensity(tuple(bps), tuple(vals)).simplify()


@dataclass(frozen=True)
class AtomicMeasure(Measure):
    atoms: tuple[tuple[Fraction, Fraction], ...]
    atomless = False

    def __post_init__(self):
        atoms = tuple(sorted((as_rat(p), as_rat(w)) for p, w in self.atoms))
        object.__setattr__(self, "atoms", atoms)
        pts = [p for p, _ in atoms]
        if len(set(pts)) != len(pts):
            raise ValidationError("atom points must be distinct")
        if any(w <= 0 for _, w in atoms) or any(not 0 <= p <= 1 for p in pts):
            raise ValidationError("atoms need positive weights at points of [0,1]")

    @classmethod
    def point_mass(cls, x) -> "AtomicMeasure":
        return cls(((as_rat(x), ONE),))

    def interval_mass(self, I, depth=None):
        lo, hi = Fraction(I[0]), Fraction(I[1])
        return MassEnclosure.exact(sum((w for p, w in self.atoms if lo <= p <= hi), ZERO))

    def sample(self, rng):
        if sum(w for _, w in self.atoms) != 1:
            raise ValueError("cannot sample an unnormalized atomic measure")
        w = np.array([float(w) for _, w in self.atoms])
        i = int(rng.choice(len(w), p=w / w.sum()))
        return float(self.atoms[i][0])


# ---------------------------------------------------------------------------
# self-similar measures


@dataclass(frozen=True)
class SelfSimilarMeasure(Measure):
    """Invariant probability of an affine IFS ``{S_j(x) = s_j x + t_j}``.

    The images ``S_j([0,1])`` must have disjoint interiors, so the measure of
    a cylinder is the product of the weights along its address.
    """

    maps: tuple[tuple[Fraction, Fraction], ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        maps = tuple((as_rat(s), as_rat(t)) for s, t in self.maps)
        w = tuple(as_rat(x) for x in self.weights)
        if len(maps) < 2 or len(maps) != len(w):
            raise ValidationError("self-similar measure needs >= 2 maps with one weight each")
        if any(x <= 0 for x in w) or sum(w) != 1:
            raise ValidationError("IFS weights must be positive and sum to 1")
        imgs = []
        for s, t in maps:
            if not 0 < abs(s) < 1:
                raise ValidationError("IFS maps must be strict contractions")
            lo, hi = sorted((t, s + t))
            if lo < 0 or hi > 1:
                raise ValidationError("IFS image leaves [0,1]")
            imgs.append((lo, hi))
        order = sorted(range(len(maps)), key=lambda j: imgs[j])
        for a, b in zip(order, order[1:]):
            if imgs[a][1] > imgs[b][0]:
                raise ValidationError("IFS images overlap")
        object.__setattr__(self, "maps", tuple(maps[j] for j in order))
        object.__setattr__(self, "weights", tuple(w[j] for j in order))

    @classmethod
    def cantor(cls) -> "SelfSimilarMeasure":
        third = Fraction(1, 3)
        return cls(((third, ZERO), (third, Fraction(2, 3))), (Fraction(1, 2), Fraction(1, 2)))

    @property
    def images(self) -> list[Interval]:
        return [tuple(sorted((t, s + t))) for s, t in self.maps]

    @property
    def max_weight(self) -> Fraction:
        return max(self.weights)

    def cdf(self, x, depth=None) -> MassEnclosure:
        return _ss_cdf(self, Fraction(x), DEFAULT_DEPTH if depth is None else depth)

    def interval_mass(self, I, depth=None) -> MassEnclosure:
        J = _clip_unit(I)
        if J is None or J[0] == J[1]:
            return MassEnclosure.exact(0)
        d = DEFAULT_DEPTH if depth is None else depth
        fa, fb = _ss_cdf(self, J[0], d), _ss_cdf(self, J[1], d)
        return clip_nonneg(fb.lo - fa.hi, fb.hi - fa.lo)

    def cylinder(self, word: Sequence[int]) -> Interval:
        lo, hi = ZERO, ONE
        for j in reversed(word):
            s, t = self.maps[j]
            lo, hi = sorted((s * lo + t, s * hi + t))
        return (lo, hi)

    def cylinder_weight(self, word: Sequence[int]) -> Fraction:
        out = ONE
        for j in word:
            out *= self.weights[j]
        return out

    def _anchor(self) -> float:
        # fixed point of S_0 ∘ S_1: inside the attractor, away from cylinder edges
        (s0, t0), (s1, t1) = self.maps[0], self.maps[1]
        return float((s0 * t1 + t0) / (1 - s0 * s1))

    def sample(self, rng, digits: int = 48):
        w = np.array([float(x) for x in self.weights])
        idx = rng.choice(len(w), size=digits, p=w / w.sum())
        y = self._anchor()
        for j in idx[::-1]:
            s, t = self.maps[j]
            y = float(s) * y + float(t)
        return y

    def sample_many(self, rng, n, digits: int = 48):
        w = np.array([float(x) for x in self.weights])
        idx = rng.choice(len(w), size=(n, digits), p=w / w.sum())
        s = np.array([float(a) for a, _ in self.maps])
        t = np.array([float(b) for _, b in self.maps])
        y = np.full(n, self._anchor())
        for k in range(digits - 1, -1, -1):
            j = idx[:, k]
            y = s[j] * y + t[j]
        return y

    def float_cdf(self):
        s = np.array([float(a) for a, _ in self.maps])
        t = np.array([float(b) for _, b in self.maps])
        if np.any(s <= 0):
            raise NotImplementedError("float CDF kernel needs increasing IFS maps")
        w = np.array([float(x) for x in self.weights])
        return ("ifs", s, t, w, 1.0)


@lru_cache(maxsize=1 << 17)
def _ss_cdf(m: SelfSimilarMeasure, x: Fraction, depth: int) -> MassEnclosure:
    # F(x) = acc + sign * scale * F(y); stop once scale <= max_weight**depth / 2,
    # so an interval query (two CDF calls) has width <= max_weight**depth.
    thr = m.max_weight**depth / 2
    acc, scale, sign, y = ZERO, ONE, 1, x
    imgs = m.images
    while True:
        if y <= 0:
            return MassEnclosure.exact(acc)
        if y >= 1:
            return MassEnclosure.exact(acc + sign * scale)
        below = ZERO
        hit = None
        for j, (lo, hi) in enumerate(imgs):
            if y > hi:
                below += m.weights[j]
            elif y >= lo:
                hit = j
                break
            else:
                break
        if hit is None:
            return MassEnclosure.exact(acc + sign * scale * below)
        s, t = m.maps[hit]
        wj = m.weights[hit]
        acc += sign * scale * below
        if s > 0:
            y = (y - t) / s
        else:
            # decreasing branch: mass below y is w_j * (1 - F(S^{-1} y))
            acc += sign * scale * wj
            sign = -sign
            y = (y - t) / s
        scale *= wj
        if scale <= thr:
            a, b = acc, acc + sign * scale
            return MassEnclosure(min(a, b), max(a, b))


# ---------------------------------------------------------------------------
# derived measures


@dataclass(frozen=True)
class AffineImageMeasure(Measure):
    """Pushforward of ``base`` under ``L(x) = slope * x + offset``."""

    base: Measure
    slope: Fraction
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "slope", as_rat(self.slope))
        object.__setattr__(self, "offset", as_rat(self.offset))
        if self.slope == 0:
            raise ValidationError("affine image needs a nonzero slope")

    @property
    def atomless(self):
        return self.base.atomless

    def _pull(self, I) -> Interval | None:
        a = (Fraction(I[0]) - self.offset) / self.slope
        b = (Fraction(I[1]) - self.offset) / self.slope
        return _clip_unit((min(a, b), max(a, b)))

    def interval_mass(self, I, depth=None):
        J = self._pull(I)
        return MassEnclosure.exact(0) if J is None else self.base.interval_mass(J, depth)

    def union_mass(self, parts, depth=None):
        pulled = [J for J in (self._pull(I) for I in parts) if J is not None]
        return self.base.union_mass(pulled, depth) if pulled else MassEnclosure.exact(0)

    def sample(self, rng):
        return float(self.slope) * self.base.sample(rng) + float(self.offset)

    def float_cdf(self):
        kind, *rest = self.base.float_cdf()
        if kind != "knots" or self.slope < 0:
            raise NotImplementedError("float CDF of affine image")
        xs, Fs = rest
        return ("knots", float(self.slope) * xs + float(self.offset), Fs)


@dataclass(frozen=True)
class RestrictedMeasure(Measure):
    """``base(· ∩ [lo, hi])``."""

    base: Measure
    lo: Fraction
    hi: Fraction

    @property
    def atomless(self):
        return self.base.atomless

    def interval_mass(self, I, depth=None):
        lo, hi = max(self.lo, Fraction(I[0])), min(self.hi, Fraction(I[1]))
        if lo > hi:
            return MassEnclosure.exact(0)
        return self.base.interval_mass((lo, hi), depth)

    def union_mass(self, parts, depth=None):
        clipped = []
        for I in parts:
            lo, hi = max(self.lo, Fraction(I[0])), min(self.hi, Fraction(I[1]))
            if lo <= hi:
                clipped.append((lo, hi))
        return self.base.union_mass(clipped, depth) if clipped else MassEnclosure.exact(0)


@dataclass(frozen=True)
class CantorStageMeasure(Measure):
    """Normalized Lebesgue measure on the level-``n`` Cantor approximation.

    Equals the average of the uniform probabilities on the ``2**n`` Cantor
    intervals of level ``n``.
    """

    level: int

    def cdf_exact(self, x: Fraction) -> Fraction:
        acc, scale = ZERO, ONE
        third, two_thirds = Fraction(1, 3), Fraction(2, 3)
        x = min(max(Fraction(x), ZERO), ONE)
        for _ in range(self.level):
            if x <= third:
                x = 3 * x
            elif x >= two_thirds:
                acc += scale / 2
                x = 3 * x - 2
            else:
                return acc + scale / 2
            scale /= 2
        return acc + scale * x

    def cdf(self, x, depth=None):
        return MassEnclosure.exact(self.cdf_exact(x))

    def interval_mass(self, I, depth=None):
        J = _clip_unit(I)
        if J is None:
            return MassEnclosure.exact(0)
        return MassEnclosure.exact(self.cdf_exact(J[1]) - self.cdf_exact(J[0]))

    def intervals(self) -> list[Interval]:
        ivs = [(ZERO, ONE)]
        for _ in range(self.level):
            nxt = []
            for lo, hi in ivs:
                w = (hi - lo) / 3
                nxt.append((lo, lo + w))
                nxt.append((hi - w, hi))
            ivs = nxt
        return ivs

    def cdf_knots(self):
        out = [(ZERO, ZERO)]
        for lo, hi in self.intervals():
            out.append((lo, self.cdf_exact(lo)))
            out.append((hi, self.cdf_exact(hi)))
        out = sorted(set(out))
        return out

    def sample(self, rng):
        bits = rng.integers(0, 2, size=self.level)
        u = rng.random()
        y = u
        for b in bits[::-1]:
            y = y / 3 + (2 / 3 if b else 0.0)
        return float(y)

    def float_cdf(self):
        k = self.cdf_knots()
        return ("knots", np.array([float(a) for a, _ in k]), np.array([float(b) for _, b in k]))


@dataclass(frozen=True, eq=False)
class MixtureMeasure(Measure):
    """``Σ w_k m_k`` plus an unresolved tail of mass at most ``tail``.

    When ``tail_carrier`` is given, the tail is known to be an atomless
    measure supported inside ``supp(tail_carrier)``; intervals that carrier
    does not charge receive no tail contribution.
    """

    components: tuple[tuple[Fraction, Measure], ...]
    tail: Fraction = ZERO
    tail_carrier: Measure | None = None

    def __post_init__(self):
        merged: dict = {}
        order = []
        for w, m in self.components:
            w = as_rat(w)
            if w < 0:
                raise ValidationError("negative mixture weight")
            if w == 0:
                continue
            key = _measure_key(m)
            if key not in merged:
                merged[key] = [ZERO, m]
                order.append(key)
            merged[key][0] += w
        object.__setattr__(self, "components", tuple((merged[k][0], merged[k][1]) for k in order))
        object.__setattr__(self, "tail", as_rat(self.tail))
        if self.tail < 0:
            raise ValidationError("negative tail bound")

    @property
    def atomless(self):
        return all(m.atomless for _, m in self.components)

    @property
    def captured_mass(self) -> Fraction:
        return sum((w * m.total_mass().lo for w, m in self.components), ZERO)

    def _tail_term(self, parts: Sequence[Interval], depth) -> Fraction:
        if self.tail == 0:
            return ZERO
        if self.tail_carrier is None:
            return self.tail
        for lo, hi in parts:
            if lo < hi and self.tail_carrier.interval_mass((lo, hi), depth).hi > 0:
                return self.tail
        return ZERO

    def interval_mass(self, I, depth=None):
        lo = hi = ZERO
        for w, m in self.components:
            e = m.interval_mass(I, depth)
            lo += w * e.lo
            hi += w * e.hi
        return MassEnclosure(lo, hi + self._tail_term([I], depth))

    def union_mass(self, parts, depth=None):
        parts = merge(parts)
        lo = hi = ZERO
        for w, m in self.components:
            e = m.union_mass(parts, depth)
            lo += w * e.lo
            hi += w * e.hi
        return MassEnclosure(lo, hi + self._tail_term(parts, depth))

    def normalized(self) -> "MixtureMeasure":
        """Drop the tail and rescale the captured components to total mass 1."""
        tot = sum((w * m.total_mass().mid for w, m in self.components), ZERO)
        return MixtureMeasure(tuple((w / tot, m) for w, m in self.components))

    def sample(self, rng):
        if self.tail != 0 or sum(w for w, _ in self.components) != 1:
            raise ValueError("cannot sample an unnormalized mixture; call normalized() first")
        w = np.array([float(x) for x, _ in self.components])
        i = int(rng.choice(len(w), p=w / w.sum()))
        return self.components[i][1].sample(rng)

    def cdf_knots(self):
        if self.tail != 0:
            return None
        knots = [m.cdf_knots() for _, m in self.components]
        if any(k is None for k in knots):
            return None
        xs = sorted({x for k in knots for x, _ in k})
        out = []
        for x in xs:
            out.append((x, sum((w * _interp_knots(k, x) for (w, _), k in zip(self.components, knots)), ZERO)))
        return out

    def float_cdf(self):
        encs = [m.float_cdf() for _, m in self.components]
        ws = [float(w) for w, _ in self.components]
        if all(e[0] == "knots" for e in encs):
            xs = np.unique(np.concatenate([e[1] for e in encs]))
            Fs = sum(w * np.interp(xs, e[1], e[2]) for w, e in zip(ws, encs))
            return ("knots", xs, Fs)
        if len(encs) == 1 and encs[0][0] == "ifs":
            kind, s, t, wt, scale = encs[0]
            return ("ifs", s, t, wt, scale * ws[0])
        raise NotImplementedError("float CDF of heterogeneous mixture")


def _measure_key(m: Measure):
    try:
        hash(m)
        return ("v", m)
    except TypeError:
        return ("id", id(m))


def _interp_knots(knots, x) -> Fraction:
    from bisect import bisect_right

    xs = [a for a, _ in knots]
    i = bisect_right(xs, x) - 1
    if i >= len(knots) - 1:
        return knots[-1][1]
    if i < 0:
        return knots[0][1]
    (x0, f0), (x1, f1) = knots[i], knots[i + 1]
    return f0 + (f1 - f0) * (x - x0) / (x1 - x0)


LEBESGUE = PwcDensity.lebesgue()
ETA = SelfSimilarMeasure.cantor()


# ---------------------------------------------------------------------------
# operations


def interval_mass(m: Measure, I: Interval, depth: int | None = None) -> MassEnclosure:
    return m.interval_mass(I, depth)


def cdf(m: Measure, x, depth: int | None = None) -> MassEnclosure:
    return m.cdf(x, depth)


def pushforward_pwc(g: PwlMap, m: PwcDensity) -> PwcDensity:
    """Exact density of ``g_* m``: each branch contributes ``f(γ⁻¹(y)) / |slope|``."""
    contribs = []
    for p in g.pieces():
        for a, b, f in m.cells():
            lo, hi = max(a, p.lo), min(b, p.hi)
            if lo >= hi or f == 0:
                continue
            ya, yb = sorted((p(lo), p(hi)))
            contribs.append((ya, yb, f / abs(p.slope)))
    bps = sorted({ZERO, ONE} | {c[0] for c in contribs} | {c[1] for c in contribs})
    dens = []
    for a, b in zip(bps, bps[1:]):
        dens.append(sum((f for lo, hi, f in contribs if lo <= a and b <= hi), ZERO))
    return PwcDensity(tuple(bps), tuple(dens)).simplify()


def pushbackward_mass(g: PwlMap, m: Measure, A: Interval, depth=None) -> MassEnclosure:
    """``g⁻¹ν(A) := ν(g(A))`` for an interval ``A``."""
    return m.interval_mass(g.image_interval(A), depth)


def local_pullback(g: PwlMap, i: int, m: Measure) -> Measure:
    """``ν_i^g(A) = ν(γ_i(A ∩ I_i))`` for the ``i``-th linear piece of ``g``."""
    p = g.pieces()[i]
    if isinstance(m, PwcDensity):
        pts = {p.lo, p.hi}
        ia, ib = p.image()
        for b in m.breakpoints:
            if ia < b < ib:
                pts.add(p.inverse(b))
        pts = sorted(pts)
        cells = []
        for a, b in zip(pts, pts[1:]):
            y = p((a + b) / 2)
            cells.append((a, b, m.density_at(y) * abs(p.slope)))
        return PwcDensity.from_cells(cells)
    ia, ib = p.image()
    inv_slope = 1 / p.slope
    return AffineImageMeasure(RestrictedMeasure(m, ia, ib), inv_slope, -p.intercept * inv_slope)


def nu_bar_upper(g: PwlMap, m: Measure) -> MixtureMeasure:
    """``ν̄^g = Σ_i ν_i^g``, an upper bound for the set function ``g⁻¹ν``."""
    return MixtureMeasure(tuple((ONE, local_pullback(g, i, m)) for i in range(g.n_pieces)))


def sample(m: Measure, seed: int) -> float:
    return m.sample(np.random.default_rng(seed))


def wasserstein1(m1: Measure, m2: Measure, resolution: int = 1024, depth: int | None = None) -> MassEnclosure:
    """Enclosure of ``∫_0^1 |F_1 - F_2|``.

    Exact when both CDFs are continuous piecewise linear with known knots;
    otherwise brackets each CDF on the cells of a uniform grid, using
    monotonicity of CDFs.
    """
    k1, k2 = m1.cdf_knots(), m2.cdf_knots()
    if k1 is not None and k2 is not None:
        return MassEnclosure.exact(_abs_integral(k1, k2))
    xs = [Fraction(i, resolution) for i in range(resolution + 1)]
    F1 = [m1.cdf(x, depth) for x in xs]
    F2 = [m2.cdf(x, depth) for x in xs]
    lo = hi = ZERO
    h = Fraction(1, resolution)
    for k in range(resolution):
        a1, b1 = F1[k].lo, F1[k + 1].hi
        a2, b2 = F2[k].lo, F2[k + 1].hi
        lo += h * max(ZERO, a1 - b2, a2 - b1)
        hi += h * max(b1 - a2, b2 - a1)
    return MassEnclosure(lo, hi)


def _abs_integral(k1, k2) -> Fraction:
    xs = sorted({x for x, _ in k1} | {x for x, _ in k2} | {ZERO, ONE})
    tot = ZERO
    for a, b in zip(xs, xs[1:]):
        da = _interp_knots(k1, a) - _interp_knots(k2, a)
        db = _interp_knots(k1, b) - _interp_knots(k2, b)
        if da * db >= 0:
            tot += (abs(da) + abs(db)) * (b - a) / 2
        else:
            # linear difference crosses zero inside the cell
            t = da / (da - db)
            tot += (abs(da) * t + abs(db) * (1 - t)) * (b - a) / 2
    return tot
