"""Stochastic dynamical systems: exact transfer, invariance residuals, orbits.

Seeding: map choices for a run with seed ``s`` come from
``numpy.random.default_rng(s)``.  Replica ``k`` of a parallel experiment with
master seed ``s`` uses seed ``mix_seed(s, k)`` (splitmix64 finalizer over
``s + (k + 1) * 0x9E3779B97F4A7C15``), so results never depend on how replicas
are scheduled.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .intervals import Interval, is_partition
from .measures import MassEnclosure, Measure, PwcDensity, abs_diff, pushforward_pwc, sum_pwc
from .pwl import PwlMap
from .rational import ResourceCapError, ValidationError, as_rat, fmt_rat
from .stepfun import StepFunction

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN64 = 0x9E3779B97F4A7C15
DEFAULT_DENOM_CAP = 1 << 128
DEFAULT_SEMIGROUP_CAP = 100_000


def mix_seed(master: int, k: int) -> int:
    z = (int(master) + (k + 1) * GOLDEN64) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class SdsSystem:
    maps: tuple[PwlMap, ...]
    probs: tuple[Fraction, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        object.__setattr__(self, "probs", tuple(as_rat(p) for p in self.probs))
        if not self.maps:
            raise ValidationError("system needs at least one map")
        if len(self.maps) != len(self.probs):
            raise ValidationError("one probability per map")
        for i, p in enumerate(self.probs):
            if p <= 0:
                raise ValidationError(f"maps[{i}].prob: probability {fmt_rat(p)} must be positive")
        s = sum(self.probs)
        if s != 1:
            raise ValidationError(f"probabilities sum {fmt_rat(s)} ≠ 1")

    def __len__(self) -> int:
        return len(self.maps)

    def items(self):
        return zip(self.maps, self.probs)

    def conjugate(self) -> "SdsSystem":
        return SdsSystem(tuple(g.conjugate() for g in self.maps), self.probs, self.name + "~" if self.name else "")

    def to_json(self) -> dict:
        return {"maps": [dict(g.to_json(), prob=fmt_rat(p)) for g, p in self.items()]}


# ---------------------------------------------------------------------------
# exact transfer


def transfer_pwc(sys: SdsSystem, m: PwcDensity) -> PwcDensity:
    """``πν = Σ μ(g) gν`` for an exact density."""
    return sum_pwc([pushforward_pwc(g, m).scaled(p) for g, p in sys.items()])


def pulled_mass(sys: SdsSystem, m: Measure, I: Interval, depth=None) -> MassEnclosure:
    """``πν(I) = Σ μ(g) ν(g⁻¹(I))`` via exact preimages."""
    lo = hi = Fraction(0)
    for g, p in sys.items():
        parts = g.preimage_intervals(I)
        if not parts:
            continue
        e = m.union_mass(parts, depth)
        lo += p * e.lo
        hi += p * e.hi
    return MassEnclosure(lo, hi)


def residual_cells(sys: SdsSystem, m: Measure, partition: Sequence[Interval], depth=None) -> list[MassEnclosure]:
    return [abs_diff(pulled_mass(sys, m, I, depth), m.interval_mass(I, depth)) for I in partition]


def invariance_residual(sys: SdsSystem, m: Measure, partition: Sequence[Interval], depth=None, workers: int = 1) -> MassEnclosure:
    """Enclosure of ``max_I |πν(I) − ν(I)|`` over the cells of ``partition``."""
    partition = list(partition)
    if not is_partition(partition):
        raise ValidationError("partition must cover [0,1] with disjoint interiors")
    if workers > 1:
        chunks = [partition[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda c: residual_cells(sys, m, c, depth), chunks))
        cells = [e for part in parts for e in part]
    else:
        cells = residual_cells(sys, m, partition, depth)
    return MassEnclosure(max(e.lo for e in cells), max(e.hi for e in cells))


# ---------------------------------------------------------------------------
# orbits


def sample_choices(rng: np.random.Generator, probs: Sequence[Fraction], n: int) -> np.ndarray:
    """I.i.d. map indices drawn exactly: uniform integers over the common denominator."""
    den = math.lcm(*(Fraction(p).denominator for p in probs))
    cum = np.cumsum([int(Fraction(p) * den) for p in probs])
    if den < (1 << 62):
        u = rng.integers(0, den, size=n)
        return np.searchsorted(cum, u, side="right").astype(np.int64)
    # huge denominators: fall back to float thresholds
    u = rng.random(size=n)
    return np.searchsorted(cum / den, u, side="right").astype(np.int64)


@dataclass
class OrbitPath:
    start: object
    choices: np.ndarray
    exact_states: list  # X_0 .. X_s as Fractions
    float_states: np.ndarray  # X_s .. X_n as floats (X_s repeated)
    switch_step: int | None  # None when the whole run stayed exact

    @property
    def n(self) -> int:
        return len(self.choices)

    @property
    def states(self) -> list:
        """All states; exact prefix, then floats."""
        return list(self.exact_states) + list(self.float_states[1:])

    def as_float(self) -> np.ndarray:
        exact = np.array([float(x) for x in self.exact_states])
        return np.concatenate([exact, self.float_states[1:]])


def run_orbit(sys: SdsSystem, x0, choices: np.ndarray, denom_cap: int = DEFAULT_DENOM_CAP, backend=None) -> OrbitPath:
    x = x0
    exact = []
    if isinstance(x0, (Fraction, int)):
        x = Fraction(x0)
        exact.append(x)
        maps = sys.maps
        for k in range(len(choices)):
            y = maps[choices[k]](x)
            if y.denominator > denom_cap:
                break
            x = y
            exact.append(x)
        else:
            return OrbitPath(x0, choices, exact, np.array([float(x)]), None)
        switch = len(exact) - 1
        log.info("orbit left exact arithmetic at step %d (denominator cap %d)", switch, denom_cap)
    else:
        switch = 0
        x = float(x0)
    table = kernels.pack_maps(sys.maps)
    rest = kernels.float_orbits(table, choices[None, switch:], np.array([float(x)]), backend)[0]
    return OrbitPath(x0, choices, exact, rest, switch)


def simulate_orbit(sys: SdsSystem, x0, n: int, seed: int, denom_cap: int = DEFAULT_DENOM_CAP, backend=None) -> OrbitPath:
    if not 0 <= x0 <= 1:
        raise ValueError("x0 must lie in [0,1]")
    rng = np.random.default_rng(seed)
    choices = sample_choices(rng, sys.probs, n)
    return run_orbit(sys, x0, choices, denom_cap, backend)


def _observable_values(path: OrbitPath, f) -> np.ndarray:
    # f evaluated at X_1 .. X_n: exact prefix first, then the float tail
    exact = path.exact_states[1:]
    flt = path.float_states[1:]
    if isinstance(f, StepFunction):
        a = np.array([float(f.value_at(x)) for x in exact])
        b = f.eval_float(flt)
    else:
        a = np.array([float(f(x)) for x in exact])
        b = np.array([float(f(x)) for x in flt])
    return np.concatenate([a, b])


def birkhoff_average(sys: SdsSystem, x0, n: int, seed: int, f) -> float:
    """``(1/n) Σ_{k=1}^n f(X_k)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    path = simulate_orbit(sys, x0, n, seed)
    return float(np.mean(_observable_values(path, f)))


def _bin_indices(path: OrbitPath, bins: int) -> np.ndarray:
    exact = path.exact_states[1:]
    idx_e = np.array([min(math.floor(x * bins), bins - 1) for x in exact], dtype=np.int64)
    flt = path.float_states[1:]
    idx_f = np.clip(np.floor(flt * bins).astype(np.int64), 0, bins - 1)
    return np.concatenate([idx_e, idx_f])


@dataclass
class CesaroHistogram:
    edges: list[Fraction]
    counts: np.ndarray
    n: int

    @property
    def masses(self) -> np.ndarray:
        return self.counts / self.n

    def to_json(self) -> dict:
        return {
            "edges": [fmt_rat(e) for e in self.edges],
            "counts": [int(c) for c in self.counts],
            "masses": [float(m) for m in self.masses],
        }


def cesaro_histogram(sys: SdsSystem, x0, n: int, seed: int, bins: int) -> CesaroHistogram:
    """Empirical ``(1/n) Σ_{k=1}^n δ_{X_k}`` binned on a uniform grid."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    path = simulate_orbit(sys, x0, n, seed)
    counts = np.bincount(_bin_indices(path, bins), minlength=bins)
    return CesaroHistogram([Fraction(i, bins) for i in range(bins + 1)], counts, n)


def endpoint_mass(sys: SdsSystem, x0, n: int, seed: int, delta) -> float:
    """Cesàro fraction of time spent in ``[0, δ) ∪ (1 − δ, 1]``."""
    delta = as_rat(delta)
    if not 0 < delta < Fraction(1, 2):
        raise ValueError("delta must lie in (0, 1/2)")
    path = simulate_orbit(sys, x0, n, seed)
    exact = [x < delta or x > 1 - delta for x in path.exact_states[1:]]
    d = float(delta)
    flt = path.float_states[1:]
    hits = sum(exact) + int(np.count_nonzero((flt < d) | (flt > 1 - d)))
    return hits / n


# ---------------------------------------------------------------------------
# replicas


def replica_seeds(master: int, count: int) -> list[int]:
    return [mix_seed(master, k) for k in range(count)]


def run_replicas(fn: Callable[[int, int], object], master: int, count: int, workers: int = 1) -> list:
    """``[fn(k, mix_seed(master, k)) for k in range(count)]``, optionally threaded; order is preserved."""
    seeds = replica_seeds(master, count)
    if workers <= 1:
        return [fn(k, s) for k, s in enumerate(seeds)]
    with ThreadPoolExecutor(workers) as ex:
        return list(ex.map(fn, range(count), seeds))


# ---------------------------------------------------------------------------
# semigroup


@dataclass
class SemigroupLevel:
    depth: int
    elements: list[PwlMap]

    def contains(self, g: PwlMap) -> bool:
        key = g.canonical_key()
        return any(e.canonical_key() == key for e in self.elements)


def semigroup_cap() -> int:
    raw = os.environ.get("SDS_MAX_SEMIGROUP", "")
    try:
        return int(float(raw)) if raw else DEFAULT_SEMIGROUP_CAP
    except ValueError as exc:
        raise ValidationError(f"SDS_MAX_SEMIGROUP={raw!r} is not a number") from exc


def semigroup_expand(sys: SdsSystem, depth: int, cap: int | None = None) -> list[SemigroupLevel]:
    """All ``k``-fold compositions ``g_k ∘ … ∘ g_1`` for ``k = 1..depth``, deduplicated per level."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    cap = semigroup_cap() if cap is None else cap
    gens = [g.simplify() for g in sys.maps]
    levels = []
    current: dict = {}
    for g in gens:
        current.setdefault(g.canonical_key(), g)
    total = len(current)
    levels.append(SemigroupLevel(1, list(current.values())))
    for k in range(2, depth + 1):
        nxt: dict = {}
        for h in current.values():
            for g in gens:
                c = g.compose(h)
                nxt.setdefault(c.canonical_key(), c)
                if total + len(nxt) > cap:
                    raise ResourceCapError(f"semigroup expansion exceeded {cap} elements at depth {k}")
        total += len(nxt)
        current = nxt
        levels.append(SemigroupLevel(k, list(current.values())))
    return levels
