"""Builtin example systems and the two-measure construction on the Cantor family.

The triple-tent system ``{φ1 (slope ±3), x/3, x/3 + 2/3}`` with probabilities
``(p, (1-p)/2, (1-p)/2)`` carries two different invariant probabilities built
from the same weights ``ν̄(I) = c (a/2)^lev(I)`` on the ternary Cantor
intervals: one with uniform leaves (full support) and one with Cantor-measure
leaves (supported on the Cantor set).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .intervals import Interval
from .measures import (
    ETA,
    AffineImageMeasure,
    CantorStageMeasure,
    MassEnclosure,
    Measure,
    MixtureMeasure,
    PwcDensity,
)
from .pwl import PwlMap
from .rational import ResourceCapError, ValidationError, as_rat, fmt_rat
from .sds import SdsSystem

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)

MAX_CANTOR_DEPTH = 20


# ---------------------------------------------------------------------------
# builtin systems


def tent_pair() -> tuple[PwlMap, PwlMap]:
    phi1 = PwlMap.from_points([0, HALF, 1], [0, HALF, 0])
    phi2 = PwlMap.from_points([0, HALF, 1], [1, HALF, 1])
    return phi1, phi2


def triple_tent() -> PwlMap:
    return PwlMap.from_points([0, THIRD, 2 * THIRD, 1], [0, 1, 0, 1])


def left_third() -> PwlMap:
    return PwlMap.affine(THIRD, 0)


def right_third() -> PwlMap:
    return PwlMap.affine(THIRD, 2 * THIRD)


def example34() -> SdsSystem:
    return SdsSystem(tent_pair(), (HALF, HALF), "example34")


def check_p(p) -> Fraction:
    p = as_rat(p)
    if not HALF < p < 1:
        raise ValidationError(f"p = {fmt_rat(p)} must lie in (1/2, 1)")
    return p


def prop42(p=Fraction(3, 5)) -> SdsSystem:
    p = check_p(p)
    q = (1 - p) / 2
    return SdsSystem((triple_tent(), left_third(), right_third()), (p, q, q), f"prop42?p={fmt_rat(p)}")


def ifs_cantor() -> SdsSystem:
    return SdsSystem((left_third(), right_third()), (HALF, HALF), "ifs-cantor")


BUILTINS = ("example34", "prop42", "ifs-cantor")


def builtin_system(name: str, p=None) -> SdsSystem:
    if name == "example34":
        return example34()
    if name == "prop42":
        return prop42(Fraction(3, 5) if p is None else p)
    if name == "ifs-cantor":
        return ifs_cantor()
    raise ValidationError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")


# ---------------------------------------------------------------------------
# weights


def radical_a(p: float) -> float:
    """Float evaluation of the smaller root of ``p a² − a + (1 − p) = 0`` by the quadratic formula."""
    return (1 - math.sqrt(1 - 4 * p * (1 - p))) / (2 * p)


def a_of_p(p) -> Fraction:
    """``a = (1 − p)/p``; since ``1 − 4p(1−p) = (2p − 1)²`` this is the radical root exactly."""
    p = check_p(p)
    a = (1 - p) / p
    assert 1 - 4 * p * (1 - p) == (2 * p - 1) ** 2
    assert p * a * a - a + (1 - p) == 0
    return a


def c_of_p(p) -> Fraction:
    return 1 - a_of_p(p)


@dataclass(frozen=True)
class CantorInterval:
    level: int
    index: int

    @property
    def interval(self) -> Interval:
        w = Fraction(1, 3**self.level)
        return (self.index * w, (self.index + 1) * w)

    @property
    def digits(self) -> list[int]:
        """Base-3 digits ``k_0 … k_{n-1}`` (least significant first)."""
        out, k = [], self.index
        for _ in range(self.level):
            out.append(k % 3)
            k //= 3
        return out

    @property
    def length(self) -> Fraction:
        return Fraction(1, 3**self.level)


def cantor_indices(n: int) -> list[int]:
    """``K_n``: integers below ``3**n`` whose base-3 digits are all 0 or 2."""
    ks = [0]
    for j in range(n):
        ks = [k + d * 3**j for k in ks for d in (0, 2)]
    return sorted(ks)


def cantor_level(n: int) -> list[CantorInterval]:
    return [CantorInterval(n, k) for k in cantor_indices(n)]


def cantor_intervals(depth: int, max_depth: int = MAX_CANTOR_DEPTH) -> list[CantorInterval]:
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth > max_depth:
        raise ResourceCapError(f"Cantor family depth {depth} exceeds cap {max_depth}")
    return [ci for n in range(depth + 1) for ci in cantor_level(n)]


def as_cantor_interval(I: Interval) -> CantorInterval | None:
    """The family member equal to ``I``, if any."""
    lo, hi = Fraction(I[0]), Fraction(I[1])
    w = hi - lo
    if w <= 0 or w.numerator != 1:
        return None
    n = round(math.log(w.denominator, 3))
    if 3**n != w.denominator:
        return None
    k = lo * 3**n
    if k.denominator != 1:
        return None
    ci = CantorInterval(n, int(k))
    if not 0 <= ci.index < 3**n or any(d == 1 for d in ci.digits):
        return None
    return ci


def gap_intervals(depth: int) -> list[Interval]:
    """Open middle thirds removed at levels ``1..depth`` (as closed-interval queries of their interiors)."""
    out = []
    for n in range(depth):
        for ci in cantor_level(n):
            lo, hi = ci.interval
            w = (hi - lo) / 3
            out.append((lo + w, hi - w))
    return out


@dataclass(frozen=True)
class CantorWeights:
    p: Fraction
    depth: int

    def __post_init__(self):
        object.__setattr__(self, "p", check_p(self.p))

    @property
    def a(self) -> Fraction:
        return a_of_p(self.p)

    @property
    def c(self) -> Fraction:
        return 1 - self.a

    def weight(self, I: CantorInterval) -> Fraction:
        return self.c * (self.a / 2) ** I.level

    def level_total(self, n: int) -> Fraction:
        return self.c * self.a**n

    def cumulative(self) -> Fraction:
        return 1 - self.a ** (self.depth + 1)

    @property
    def tail(self) -> Fraction:
        return self.a ** (self.depth + 1)

    def table(self) -> list[tuple[CantorInterval, Fraction]]:
        return [(ci, self.weight(ci)) for ci in cantor_intervals(self.depth)]

    def to_json(self) -> dict:
        return {
            "p": fmt_rat(self.p),
            "a": fmt_rat(self.a),
            "c": fmt_rat(self.c),
            "depth": self.depth,
            "levels": [{"level": n, "per_interval": fmt_rat(self.c * (self.a / 2) ** n), "level_total": fmt_rat(self.level_total(n))} for n in range(self.depth + 1)],
            "captured": fmt_rat(self.cumulative()),
            "tail": fmt_rat(self.tail),
        }


def nu_bar_weight(I: CantorInterval, w: CantorWeights) -> Fraction:
    return w.weight(I)


def nu_bar_invariance_identity(n: int, p, a=None) -> bool:
    """Exact check of ``2p(a/2)^{n+1} + ((1−p)/2)(a/2)^{n−1} = (a/2)^n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = check_p(p)
    a = a_of_p(p) if a is None else as_rat(a)
    r = a / 2
    return 2 * p * r ** (n + 1) + (1 - p) / 2 * r ** (n - 1) == r**n


def nu_bar_pullback_by_enumeration(sys: SdsSystem, weights: CantorWeights, n: int) -> tuple[Fraction, Fraction]:
    """``(Σ_g μ(g) Σ_{I: g(I) = J} ν̄(I), ν̄(J))`` for ``J`` the first level-``n`` interval.

    Preimage intervals are found by mapping every family member of level
    ``≤ n + 1`` with the actual maps, independent of the closed form.
    """
    J = cantor_level(n)[0].interval
    tot = ZERO
    for g, prob in sys.items():
        for ci in cantor_intervals(n + 1):
            if g.image_interval(ci.interval) == J:
                tot += prob * weights.weight(ci)
    return tot, weights.weight(cantor_level(n)[0])


# ---------------------------------------------------------------------------
# leaf measures and mixtures


def uniform_leaf(I) -> PwcDensity:
    lo, hi = I.interval if isinstance(I, CantorInterval) else I
    return PwcDensity.uniform(lo, hi)


def cantor_leaf(I) -> Measure:
    """``η(· ∩ I)/η(I)``: an affine copy of η squeezed onto the cylinder ``I``."""
    lo, hi = I.interval if isinstance(I, CantorInterval) else I
    if lo == 0 and hi == 1:
        return ETA
    return AffineImageMeasure(ETA, hi - lo, lo)


def lemma43_mixture(
    weights: Iterable[tuple[object, Fraction]],
    leaves: Callable[[object], Measure],
    tail: Fraction = ZERO,
    tail_carrier: Measure | None = None,
) -> MixtureMeasure:
    """``Σ_I w(I) ν_I``; no invariance is claimed by construction."""
    comps = []
    for I, w in weights:
        w = as_rat(w)
        if w < 0:
            raise ValidationError("mixture weights must be nonnegative")
        comps.append((w, leaves(I)))
    return MixtureMeasure(tuple(comps), tail, tail_carrier)


def build_nu1(p, depth: int) -> MixtureMeasure:
    """Uniform leaves, grouped by level: level ``n`` contributes ``c aⁿ`` times the stage-``n`` Cantor uniform."""
    w = CantorWeights(as_rat(p), depth)
    comps = tuple((w.level_total(n), CantorStageMeasure(n)) for n in range(depth + 1))
    return MixtureMeasure(comps, w.tail, CantorStageMeasure(depth + 1))


def build_nu2(p, depth: int) -> MixtureMeasure:
    """Cantor leaves: the ``2ⁿ`` leaves of level ``n`` average to η, so the truncation is ``(1 − a^{d+1}) η``."""
    w = CantorWeights(as_rat(p), depth)
    comps = tuple((w.level_total(n), ETA) for n in range(depth + 1))
    return MixtureMeasure(comps, w.tail, ETA)


def build_nu1_flat(p, depth: int) -> MixtureMeasure:
    """``build_nu1`` with one component per Cantor interval (slow; cross-check)."""
    w = CantorWeights(as_rat(p), depth)
    return lemma43_mixture(w.table(), uniform_leaf, w.tail, CantorStageMeasure(depth + 1))


def build_nu2_flat(p, depth: int) -> MixtureMeasure:
    w = CantorWeights(as_rat(p), depth)
    return lemma43_mixture(w.table(), cantor_leaf, w.tail, ETA)


# ---------------------------------------------------------------------------
# equivariance


@dataclass
class EquivariantFamily:
    """Interval family with a leaf constructor ``I ↦ ν_I``."""

    name: str
    members: list[Interval]
    leaf: Callable[[Interval], Measure]
    contains: Callable[[Interval], bool]


def cantor_uniform_family(depth: int) -> EquivariantFamily:
    return EquivariantFamily(
        "uniform",
        [ci.interval for ci in cantor_intervals(depth)],
        uniform_leaf,
        lambda I: as_cantor_interval(I) is not None,
    )


def cantor_eta_family(depth: int) -> EquivariantFamily:
    return EquivariantFamily(
        "cantor",
        [ci.interval for ci in cantor_intervals(depth)],
        cantor_leaf,
        lambda I: as_cantor_interval(I) is not None,
    )


@dataclass
class EquivarianceReport:
    map: PwlMap
    family: str
    checks: int
    failures: list[dict] = field(default_factory=list)
    closure_violations: list[Interval] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and not self.closure_violations

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "checks": self.checks,
            "passed": self.passed,
            "failures": self.failures,
            "closure_violations": [[fmt_rat(a), fmt_rat(b)] for a, b in self.closure_violations],
        }


def _test_intervals(rng: np.random.Generator, count: int, grid: int = 81) -> list[Interval]:
    out = []
    for _ in range(count):
        a, b = sorted(rng.integers(0, grid + 1, size=2))
        if a == b:
            b = min(a + 1, grid)
            a = b - 1
        out.append((Fraction(int(a), grid), Fraction(int(b), grid)))
    return out


def equivariance_check(
    g: PwlMap,
    fam: EquivariantFamily,
    samples: int = 32,
    seed: int = 0,
    members: Sequence[Interval] | None = None,
    depth: int | None = None,
) -> EquivarianceReport:
    """Compare ``ν_{g(I)}(A)`` with ``ν_I(g⁻¹(A))`` on sampled test intervals ``A``."""
    rng = np.random.default_rng(seed)
    members = list(fam.members if members is None else members)
    rep = EquivarianceReport(g, fam.name, 0)
    tests = _test_intervals(rng, samples)
    for I in members:
        J = g.image_interval(I)
        if not fam.contains(J):
            rep.closure_violations.append(I)
            continue
        nu_I, nu_J = fam.leaf(I), fam.leaf(J)
        for A in tests:
            lhs = nu_J.interval_mass(A, depth)
            rhs = nu_I.union_mass(g.preimage_intervals(A), depth) if g.preimage_intervals(A) else MassEnclosure.exact(0)
            rep.checks += 1
            if not lhs.intersects(rhs):
                rep.failures.append({"I": [fmt_rat(I[0]), fmt_rat(I[1])], "A": [fmt_rat(A[0]), fmt_rat(A[1])], "lhs": lhs.to_json(), "rhs": rhs.to_json()})
    return rep
