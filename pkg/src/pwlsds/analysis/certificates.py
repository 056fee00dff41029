"""Uniqueness certificate (injectivity + contraction) and the five-bullet tightness diagnostic."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .. import kernels
from ..measures import Measure
from ..rational import fmt_rat
from ..sds import SdsSystem, endpoint_mass, mix_seed, sample_choices, semigroup_expand, simulate_orbit
from .contraction import ContractionCertificate, contracts_neighborhood_check
from .injectivity import InjectivityReport, check_mu_injectivity

UNIQUE = "entropy-positive-uniqueness-on-support"
INCONCLUSIVE = "inconclusive"
INAPPLICABLE = "inapplicable"


def in_support(m: Measure, x0, max_k: int = 30) -> bool:
    """Every neighbourhood ``[x0 − 2^-k, x0 + 2^-k]``, ``k ≤ max_k``, has positive mass."""
    x0 = Fraction(x0)
    for k in range(1, max_k + 1):
        r = Fraction(1, 2**k)
        lo, hi = max(Fraction(0), x0 - r), min(Fraction(1), x0 + r)
        if m.interval_mass((lo, hi)).lo <= 0:
            return False
    return True


def fixed_point_candidates(sys: SdsSystem) -> list[Fraction]:
    pts = set()
    for g in sys.maps:
        iso, ivs = g.fixed_points()
        pts.update(iso)
        for a, b in ivs:
            pts.update((a, (a + b) / 2, b))
    return sorted(pts)


@dataclass
class UniquenessCertificate:
    conclusion: str
    injectivity: InjectivityReport | None
    contraction: list[ContractionCertificate] = field(default_factory=list)
    reason: str = ""

    @property
    def witness(self) -> ContractionCertificate | None:
        return next((c for c in self.contraction if c.holds), None)

    def to_json(self) -> dict:
        return {
            "conclusion": self.conclusion,
            "reason": self.reason,
            "injectivity": None if self.injectivity is None else {"injective": self.injectivity.injective, "summary": self.injectivity.summary()},
            "witnesses": [c.to_json() for c in self.contraction],
        }


def theorem36_certificate(sys: SdsSystem, m: Measure, x0=None) -> UniquenessCertificate:
    """Both premises verified exactly ⇒ positive entropy, hence uniqueness on the support.

    Contraction is tried at ``x0`` or, if omitted, at every fixed point of a
    system map lying in ``supp(m)``.
    """
    if not m.atomless:
        return UniquenessCertificate(INAPPLICABLE, None, reason="measure has atoms")
    inj = check_mu_injectivity(sys)
    if not inj.injective:
        return UniquenessCertificate(INAPPLICABLE, inj, reason=f"μ-injectivity violated: {inj.summary()}")
    cands = [Fraction(x0)] if x0 is not None else fixed_point_candidates(sys)
    certs = []
    for y in cands:
        if not in_support(m, y):
            continue
        c = contracts_neighborhood_check(sys, y)
        certs.append(c)
        if c.holds:
            return UniquenessCertificate(UNIQUE, inj, [c], reason=f"contraction at {fmt_rat(y)} ∈ supp")
    if not certs:
        return UniquenessCertificate(INCONCLUSIVE, inj, [], reason="no candidate point in the support")
    reasons = sorted({c.reason for c in certs})
    return UniquenessCertificate(INCONCLUSIVE, inj, certs, reason="contraction fails: " + "; ".join(reasons))


# ---------------------------------------------------------------------------
# diagnostic


@dataclass
class Bullet:
    id: int
    name: str
    status: str  # exact-pass | exact-fail | heuristic-pass | heuristic-fail
    detail: dict

    @property
    def passed(self) -> bool:
        return self.status.endswith("pass")

    @property
    def heuristic(self) -> bool:
        return self.status.startswith("heuristic")

    def to_json(self) -> dict:
        return {"id": self.id, "name": self.name, "status": self.status, "detail": self.detail}


@dataclass
class DiagnosticReport:
    bullets: list[Bullet]

    @property
    def all_pass(self) -> bool:
        return all(b.passed for b in self.bullets)

    def bullet(self, i: int) -> Bullet:
        return self.bullets[i - 1]

    def to_json(self) -> dict:
        return {"bullets": [b.to_json() for b in self.bullets], "all_pass": self.all_pass}


def _status(exact: bool, ok: bool) -> str:
    return ("exact-" if exact else "heuristic-") + ("pass" if ok else "fail")


def _common_cover(sys: SdsSystem, budget: int, seed: int, starts: int = 9, cells: int = 64) -> set[int]:
    """Cells of width 1/cells visited by all orbits (second half of each run) from a grid of starts."""
    table = kernels.pack_maps(sys.maps)
    common = None
    for j in range(starts):
        rng = np.random.default_rng(mix_seed(seed, j))
        ch = sample_choices(rng, sys.probs, budget)
        x = kernels.float_orbits(table, ch[None, :], np.array([j / (starts - 1)]))[0]
        tail = x[budget // 2 :]
        hit = set(np.clip((tail * cells).astype(int), 0, cells - 1).tolist())
        common = hit if common is None else common & hit
    return common or set()


def _preimage_counts(levels, y: Fraction) -> list[int]:
    return [sum(h.preimage_count(y) for h in lev.elements) for lev in levels]


def corollary41_diagnostic(sys: SdsSystem, depth: int = 4, mc_budget: int = 10_000, seed: int = 0, samples: int = 8) -> DiagnosticReport:
    """Five checks, exact where possible, labeled heuristic otherwise.

    1. a common point of all orbit closures (δ-cells visited from every start);
    2. tightness: endpoint mass at small δ stays small as ``n`` grows;
    3. contraction at a candidate point (exact);
    4. μ-injectivity on (0,1) (exact);
    5. preimage counts along the semigroup are 0 or keep growing to ``depth``
       for points sampled from late exact orbit states.
    """
    bullets = []

    common = _common_cover(sys, mc_budget, seed)
    bullets.append(Bullet(1, "common orbit-closure point", _status(False, bool(common)), {"common_cells": sorted(common)[:32], "cell_width": "1/64"}))

    deltas = [Fraction(1, 16), Fraction(1, 128), Fraction(1, 1024)]
    ns = [max(1, mc_budget // 4), max(1, mc_budget // 2), mc_budget]
    table = {}
    for d in deltas:
        table[fmt_rat(d)] = [endpoint_mass(sys, Fraction(1, 2), n, mix_seed(seed, 100 + i), d) for i, n in enumerate(ns)]
    small = table[fmt_rat(deltas[-1])]
    tight = max(small) <= 0.05
    bullets.append(Bullet(2, "tightness in (0,1)", _status(False, tight), {"endpoint_mass": table, "steps": ns, "threshold": 0.05}))

    cands = fixed_point_candidates(sys)
    certs = [contracts_neighborhood_check(sys, y) for y in cands]
    good = [c for c in certs if c.holds]
    bullets.append(
        Bullet(
            3,
            "contraction at a candidate point",
            _status(True, bool(good)),
            {"candidates": [fmt_rat(y) for y in cands], "certificates": [c.to_json() for c in (good or certs)]},
        )
    )

    inj = check_mu_injectivity(sys)
    bullets.append(Bullet(4, "μ-injectivity on (0,1)", _status(True, inj.injective), {"summary": inj.summary()}))

    levels = semigroup_expand(sys, depth)
    pts = []
    for j in range(samples):
        path = simulate_orbit(sys, Fraction(1, 2), 4 * depth, mix_seed(seed, 200 + j))
        late = path.exact_states[depth + 1 :]
        if late:
            pts.append(late[-1])
    rows, ok = [], bool(pts)
    for y in pts:
        counts = _preimage_counts(levels, y)
        verdict = all(c == 0 for c in counts) or all(c >= 1 for c in counts)
        ok &= verdict
        rows.append({"y": fmt_rat(y), "counts_per_depth": counts, "zero_or_unbounded": verdict})
    bullets.append(Bullet(5, "zero or infinitely many preimages", _status(False, ok), {"depth": depth, "threshold": depth, "samples": rows}))
    return DiagnosticReport(bullets)
