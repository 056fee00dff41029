"""Radon–Nikodym derivatives ``d_ν g`` and the entropy ``h_μ(ν) = −∫∫ ln d_ν g dμ dν``.

Three methods:

* ``exact-density``: ν is a piecewise-constant density; the integrand is
  constant on a finite refinement, so the entropy is a finite rational
  combination of logarithms, kept symbolically.
* ``cylinder``: ν is self-similar; each system map must send cylinders to
  cylinders with a ratio that does not change under refinement.
* ``monte-carlo``: Birkhoff averages of ``−ln(ν(g(I))/ν(I))`` over nested
  dyadic cells along simulated orbits, replicas seeded by ``mix_seed``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .. import kernels
from ..measures import Measure, PwcDensity, SelfSimilarMeasure
from ..pwl import PwlMap
from ..rational import fmt_decimal, fmt_rat
from ..sds import SdsSystem, run_replicas, sample_choices


class UndefinedDerivative(ValueError):
    """``d_ν g(x)`` requested at a breakpoint of ``g`` or a density jump."""


class IncompatibleIFS(ValueError):
    """A system map does not send cylinders of the measure's IFS to cylinders."""


# ---------------------------------------------------------------------------
# symbolic Σ q ln r


def _factor(n: int) -> dict[int, int]:
    from sympy import factorint

    return {int(p): int(e) for p, e in factorint(n).items()}


@dataclass(frozen=True)
class SymbolicLog:
    """``Σ_p c_p ln p`` over primes ``p``; the canonical form of any ``Σ q_i ln r_i``."""

    coeffs: tuple[tuple[int, Fraction], ...] = ()

    @classmethod
    def zero(cls) -> "SymbolicLog":
        return cls(())

    @classmethod
    def log_of(cls, r, q=1) -> "SymbolicLog":
        """``q · ln r`` for a positive rational ``r``."""
        r, q = Fraction(r), Fraction(q)
        if r <= 0:
            raise ValueError("log of non-positive rational")
        acc: dict[int, Fraction] = {}
        for p, e in _factor(r.numerator).items():
            acc[p] = acc.get(p, Fraction(0)) + q * e
        for p, e in _factor(r.denominator).items():
            acc[p] = acc.get(p, Fraction(0)) - q * e
        return cls._from(acc)

    @classmethod
    def _from(cls, acc: dict) -> "SymbolicLog":
        return cls(tuple(sorted((p, c) for p, c in acc.items() if c != 0 and p != 1)))

    def __add__(self, other: "SymbolicLog") -> "SymbolicLog":
        acc = dict(self.coeffs)
        for p, c in other.coeffs:
            acc[p] = acc.get(p, Fraction(0)) + c
        return SymbolicLog._from(acc)

    def __neg__(self) -> "SymbolicLog":
        return SymbolicLog(tuple((p, -c) for p, c in self.coeffs))

    def scale(self, k) -> "SymbolicLog":
        k = Fraction(k)
        return SymbolicLog._from({p: c * k for p, c in self.coeffs})

    def coeff(self, p: int) -> Fraction:
        return dict(self.coeffs).get(p, Fraction(0))

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __float__(self) -> float:
        return float(sum(float(c) * math.log(p) for p, c in self.coeffs))

    def terms(self) -> list[dict]:
        return [{"coeff": fmt_rat(c), "log_of": str(p)} for p, c in self.coeffs]

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        return " + ".join(f"({fmt_rat(c)})·ln {p}" for p, c in self.coeffs)


# ---------------------------------------------------------------------------
# reports


@dataclass
class EntropyReport:
    method: str
    value: float
    symbolic: SymbolicLog | None = None
    infinite: bool = False
    ci_low: float | None = None
    ci_high: float | None = None
    per_map: list[dict] = field(default_factory=list)
    cells: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    replicas: list[float] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return self.method != "monte-carlo"

    def to_json(self) -> dict:
        out = {
            "method": self.method,
            "value": "inf" if self.infinite else fmt_decimal(self.value),
            "value_decimal": None if self.infinite else self.value,
            "symbolic": None if self.symbolic is None else self.symbolic.terms(),
            "infinite": self.infinite,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "per_map": self.per_map,
            "cells": self.cells,
            "notes": self.notes,
        }
        if self.replicas:
            out["replicas"] = self.replicas
        return out


# ---------------------------------------------------------------------------
# derivatives


def rn_derivative(g: PwlMap, m: PwcDensity, x) -> Fraction:
    """``d_ν g(x) = f(g(x)) · |slope| / f(x)`` away from breakpoints and density jumps."""
    x = Fraction(x)
    if x in g.simplify().breakpoints:
        raise UndefinedDerivative(f"x = {fmt_rat(x)} is a breakpoint of the map")
    p = g.pieces()[g.piece_index(x)]
    y = p(x)
    try:
        fx, fy = m.density_at(x), m.density_at(y)
    except ValueError as exc:
        raise UndefinedDerivative(str(exc)) from exc
    if m.is_jump(x) or m.is_jump(y):
        raise UndefinedDerivative("density jumps at x or g(x)")
    if fx == 0:
        raise UndefinedDerivative(f"density vanishes at x = {fmt_rat(x)}")
    return fy * abs(p.slope) / fx


def _refined_cells(g: PwlMap, m: PwcDensity) -> list[tuple[Fraction, Fraction]]:
    pts = set(g.breakpoints) | set(m.breakpoints)
    for b in m.breakpoints:
        pts.update(g.preimage_points(b)[0])
    pts = sorted(pts)
    return list(zip(pts, pts[1:]))


def entropy_exact(sys: SdsSystem, m: PwcDensity) -> EntropyReport:
    """Exact ``−Σ_g μ(g) Σ_cells ν(cell) ln d_ν g`` with the integrand constant per refined cell."""
    total = SymbolicLog.zero()
    infinite = False
    per_map, cells = [], []
    for gi, (g, prob) in enumerate(sys.items()):
        part = SymbolicLog.zero()
        for a, b in _refined_cells(g, m):
            mass = m.mass_exact(a, b)
            if mass == 0:
                continue
            mid = (a + b) / 2
            p = g.pieces()[g.piece_index(mid)]
            d = m.density_at(p(mid)) * abs(p.slope) / m.density_at(mid)
            entry = {"map": gi, "lo": fmt_rat(a), "hi": fmt_rat(b), "mass": fmt_rat(mass), "d": fmt_rat(d)}
            if d == 0:
                infinite = True
                entry["contribution"] = "inf"
            else:
                c = SymbolicLog.log_of(d, -prob * mass)
                part = part + c
                entry["contribution"] = c.terms()
            cells.append(entry)
        total = total + part
        per_map.append({"map": gi, "prob": fmt_rat(prob), "symbolic": part.terms(), "value": float(part)})
    rep = EntropyReport("exact-density", math.inf if infinite else float(total), None if infinite else total, infinite, per_map=per_map, cells=cells)
    if infinite:
        rep.notes.append("d_ν g = 0 on a cell of positive ν-mass")
    return rep


def _words(k: int, n: int):
    return itertools.product(range(k), repeat=n)


def _cylinder_ratio(g: PwlMap, m: SelfSimilarMeasure, word) -> Fraction:
    I = m.cylinder(word)
    inner = [b for b in g.breakpoints if I[0] < b < I[1]]
    if inner:
        raise IncompatibleIFS(f"cylinder [{fmt_rat(I[0])}, {fmt_rat(I[1])}] straddles a breakpoint of the map")
    num = m.interval_mass(g.image_interval(I))
    if not num.is_exact:
        raise IncompatibleIFS(f"image of cylinder [{fmt_rat(I[0])}, {fmt_rat(I[1])}] is not a finite union of cylinders")
    return num.lo / m.cylinder_weight(word)


def entropy_cylinder(sys: SdsSystem, m: SelfSimilarMeasure, depth: int = 3) -> EntropyReport:
    """Entropy from exact cylinder ratios ``ν(g(I))/ν(I)`` at ``depth``, checked stable at ``depth + 1``."""
    total = SymbolicLog.zero()
    infinite = False
    per_map, cells = [], []
    k = len(m.maps)
    for gi, (g, prob) in enumerate(sys.items()):
        part = SymbolicLog.zero()
        for word in _words(k, depth):
            r = _cylinder_ratio(g, m, word)
            for j in range(k):
                if _cylinder_ratio(g, m, word + (j,)) != r:
                    raise IncompatibleIFS(f"ratio changes under refinement of cylinder {word}")
            w = m.cylinder_weight(word)
            I = m.cylinder(word)
            entry = {"map": gi, "lo": fmt_rat(I[0]), "hi": fmt_rat(I[1]), "mass": fmt_rat(w), "d": fmt_rat(r)}
            if r == 0:
                infinite = True
                entry["contribution"] = "inf"
            else:
                c = SymbolicLog.log_of(r, -prob * w)
                part = part + c
                entry["contribution"] = c.terms()
            cells.append(entry)
        total = total + part
        per_map.append({"map": gi, "prob": fmt_rat(prob), "symbolic": part.terms(), "value": float(part)})
    return EntropyReport("cylinder", math.inf if infinite else float(total), None if infinite else total, infinite, per_map=per_map, cells=cells)


def entropy_birkhoff_mc(
    sys: SdsSystem,
    m: Measure,
    n: int,
    replicas: int = 16,
    seed: int = 0,
    levels: int = 12,
    mode: str = "orbit",
    workers: int = 1,
    backend: str | None = None,
) -> EntropyReport:
    """Monte Carlo ``−(1/n) Σ_k ln d_ν g_{k+1}(X_k)`` averaged over replicas.

    ``mode="orbit"`` starts each replica at ``X_0 ~ ν`` and follows the chain;
    ``mode="reference"`` draws every ``X_k`` independently from ν, which
    estimates the integrand average against ν even when ν is not invariant.
    Derivatives use the finest dyadic cell of level ``≤ levels`` with ν-mass.
    """
    if not m.atomless:
        raise ValueError("Monte Carlo entropy needs an atomless measure")
    if mode not in ("orbit", "reference"):
        raise ValueError(f"unknown mode {mode!r}")
    table = kernels.pack_maps(sys.maps)
    cdf = kernels.pack_cdf(m.float_cdf())

    def one(k, s):
        rng = np.random.default_rng(s)
        if mode == "orbit":
            x0 = m.sample(rng)
            choices = sample_choices(rng, sys.probs, n)
            states = kernels.float_orbits(table, choices[None, :], np.array([x0]), backend)[0][:-1]
        else:
            states = m.sample_many(rng, n)
            choices = sample_choices(rng, sys.probs, n)
        r = kernels.derivative_ratios(table, cdf, states, choices, levels, backend)
        ok = np.isfinite(r) & (r > 0)
        if not ok.any():
            return math.nan, n
        return float(-np.mean(np.log(r[ok]))), int(n - np.count_nonzero(ok))

    results = run_replicas(one, seed, replicas, workers)
    vals = np.array([v for v, _ in results])
    bad = sum(b for _, b in results)
    est = float(np.mean(vals))
    if replicas > 1:
        from scipy.stats import t

        half = float(t.ppf(0.975, replicas - 1) * np.std(vals, ddof=1) / math.sqrt(replicas))
    else:
        half = math.nan
    rep = EntropyReport("monte-carlo", est, ci_low=est - half, ci_high=est + half, replicas=[float(v) for v in vals])
    rep.notes.append(f"mode={mode}; n={n}; replicas={replicas}; dyadic levels={levels}")
    if bad:
        rep.notes.append(f"{bad} steps skipped: zero-mass image or zero-mass cell")
    return rep
