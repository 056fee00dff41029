from fractions import Fraction as F

import numpy as np
import pytest

from pwlsds.constructions import (
    CantorInterval,
    CantorWeights,
    a_of_p,
    as_cantor_interval,
    build_nu1,
    build_nu1_flat,
    build_nu2,
    build_nu2_flat,
    builtin_system,
    c_of_p,
    cantor_eta_family,
    cantor_indices,
    cantor_intervals,
    cantor_level,
    cantor_uniform_family,
    cantor_leaf,
    equivariance_check,
    gap_intervals,
    lemma43_mixture,
    nu_bar_invariance_identity,
    nu_bar_pullback_by_enumeration,
    nu_bar_weight,
    prop42,
    radical_a,
    triple_tent,
    left_third,
    uniform_leaf,
)
from pwlsds.measures import ETA, LEBESGUE, MassEnclosure, PwcDensity
from pwlsds.pwl import PwlMap
from pwlsds.rational import ResourceCapError, ValidationError

E = MassEnclosure.exact
P_VALUES = [F(51, 100), F(3, 5), F(3, 4), F(9, 10), F(99, 100)]


def test_builtins():
    s = builtin_system("example34")
    assert len(s) == 2 and s.probs == (F(1, 2), F(1, 2))
    assert s.maps[0](F(1, 2)) == F(1, 2) and s.maps[0].critical_points() == (0, F(1, 2), 1)
    s = builtin_system("prop42", F(3, 5))
    assert s.probs == (F(3, 5), F(1, 5), F(1, 5))
    s = builtin_system("ifs-cantor")
    assert s.probs == (F(1, 2), F(1, 2)) and s.maps[0](1) == F(1, 3) and s.maps[1](0) == F(2, 3)
    with pytest.raises(ValidationError):
        builtin_system("nope")
    with pytest.raises(ValidationError):
        prop42(F(1, 2))


def test_a_of_p_against_radical_oracle():
    for k in range(51, 100):
        p = F(k, 100)
        assert abs(float(a_of_p(p)) - radical_a(float(p))) < 1e-12
    assert a_of_p(F(3, 5)) == F(2, 3) and c_of_p(F(3, 5)) == F(1, 3)
    assert a_of_p(F(3, 4)) == F(1, 3)
    vals = [a_of_p(F(k, 1000)) for k in range(501, 1000)]
    assert all(a > b for a, b in zip(vals, vals[1:])) and vals[-1] < F(1, 500)
    with pytest.raises(ValidationError):
        a_of_p(F(1, 3))


def test_quadratic_identity():
    for p in P_VALUES + [F(k, 37) for k in range(19, 37)]:
        a = a_of_p(p)
        assert p * a * a - a + (1 - p) == 0


def test_cantor_intervals():
    assert [ci.interval for ci in cantor_intervals(1)] == [(0, 1), (0, F(1, 3)), (F(2, 3), 1)]
    assert cantor_indices(2) == [0, 2, 6, 8]
    assert len(cantor_level(3)) == 8
    for ci in cantor_level(4):
        assert all(d in (0, 2) for d in ci.digits)
    with pytest.raises(ResourceCapError):
        cantor_intervals(25)
    assert as_cantor_interval((F(2, 9), F(1, 3))) == CantorInterval(2, 2)
    assert as_cantor_interval((F(1, 3), F(2, 3))) is None


def test_weights():
    w = CantorWeights(F(3, 5), 2)
    # oracle for c: 1 / Σ_{n≥0} aⁿ summed numerically
    a = 2 / 3
    assert abs(float(w.c) - 1 / sum(a**n for n in range(2000))) < 1e-12
    assert nu_bar_weight(CantorInterval(0, 0), w) == F(1, 3)
    assert nu_bar_weight(CantorInterval(1, 2), w) == F(1, 9)
    total = sum(wt for _, wt in w.table())
    assert total == F(19, 27) == 1 - F(2, 3) ** 3
    for n in range(6):
        assert sum(w.weight(ci) for ci in cantor_level(n)) == w.c * w.a**n


def test_invariance_identity():
    assert nu_bar_invariance_identity(5, F(3, 5))
    for p in P_VALUES:
        assert all(nu_bar_invariance_identity(n, p) for n in range(1, 21))
    assert not nu_bar_invariance_identity(5, F(3, 5), a=F(1, 2))


def test_invariance_identity_against_enumeration():
    # independent oracle: push the actual maps over the family and collect weights
    for p in (F(3, 5), F(3, 4)):
        w = CantorWeights(p, 8)
        for n in range(1, 6):
            pulled, own = nu_bar_pullback_by_enumeration(prop42(p), w, n)
            assert pulled == own


def test_build_nu1_examples():
    m = build_nu1(F(3, 5), 0)
    assert m.components == ((F(1, 3), m.components[0][1]),)
    assert m.components[0][1].interval_mass((0, 1)) == E(1)
    assert m.tail == F(2, 3)
    for d in (0, 4, 12):
        assert build_nu1(F(3, 5), d).interval_mass((F(1, 3), F(2, 3))) == E(F(1, 9))
    assert build_nu1(F(3, 5), 12).tail == F(2, 3) ** 13
    assert abs(float(build_nu1(F(3, 5), 12).tail) - 5.1e-3) < 1e-4


def test_build_nu2_examples():
    m = build_nu2(F(3, 5), 8)
    assert m.interval_mass((F(1, 3), F(2, 3))).hi == 0
    e = m.interval_mass((0, F(1, 3)))
    assert e.lo == (1 - F(2, 3) ** 9) / 2 and e.width <= m.tail
    assert cantor_leaf((0, 1)) is ETA


def test_grouped_equals_flat():
    parts = [(F(k, 81), F(k + 1, 81)) for k in range(0, 81, 7)] + [(0, F(1, 3)), (F(1, 9), F(8, 9))]
    for d in (0, 1, 3):
        a, b = build_nu1(F(3, 5), d), build_nu1_flat(F(3, 5), d)
        c, e = build_nu2(F(3, 5), d), build_nu2_flat(F(3, 5), d)
        for I in parts:
            assert a.interval_mass(I) == b.interval_mass(I)
            assert c.interval_mass(I, 20).intersects(e.interval_mass(I, 20))


def test_mixture_builder_examples():
    w = CantorWeights(F(3, 5), 2)
    m = lemma43_mixture(w.table(), uniform_leaf, w.tail)
    ref = build_nu1(F(3, 5), 2)
    for k in range(9):
        I = (F(k, 9), F(k + 1, 9))
        assert m.interval_mass(I).lo == ref.interval_mass(I).lo
    single = lemma43_mixture([((0, 1), 1)], lambda I: LEBESGUE)
    assert single.interval_mass((F(1, 5), F(1, 2))) == E(F(3, 10))
    with pytest.raises(ValidationError):
        lemma43_mixture([((0, 1), -1)], uniform_leaf)


def test_equivariance_examples():
    fam = cantor_uniform_family(3)
    assert equivariance_check(left_third(), fam, members=[(0, 1)]).passed
    assert equivariance_check(triple_tent(), fam, members=[(0, F(1, 3))]).passed
    eta_fam = cantor_eta_family(3)
    assert equivariance_check(triple_tent(), eta_fam, members=[(0, 1)], depth=30).passed


def test_equivariance_whole_family():
    for g in prop42().maps:
        for fam in (cantor_uniform_family(2), cantor_eta_family(2)):
            members = [I for I in fam.members if fam.contains(g.image_interval(I))]
            assert equivariance_check(g, fam, samples=8, members=members, depth=25).passed


def test_equivariance_reports_closure_violation():
    rep = equivariance_check(PwlMap.affine(F(1, 2), 0), cantor_uniform_family(1), members=[(0, 1)])
    assert rep.closure_violations == [(0, 1)] and not rep.passed


def test_monotone_truncations():
    prev = None
    for d in range(0, 7):
        m = build_nu1(F(3, 5), d)
        e = m.interval_mass((0, F(1, 4)))
        if prev is not None:
            assert m.captured_mass > prev[0]
            assert prev[1].lo <= e.lo and e.hi <= prev[1].hi
        prev = (m.captured_mass, e)


def test_support_separation():
    nu1, nu2 = build_nu1(F(3, 5), 12), build_nu2(F(3, 5), 12)
    for gap in gap_intervals(5):
        assert nu2.interval_mass(gap).hi == 0
    for ci in cantor_level(5):
        assert nu1.interval_mass(ci.interval).lo > 0


def test_mirror_symmetry():
    nu1, nu2 = build_nu1(F(3, 5), 6), build_nu2(F(3, 5), 6)
    for k in range(27):
        I = (F(k, 27), F(k + 1, 27))
        J = (1 - I[1], 1 - I[0])
        assert nu1.interval_mass(I) == nu1.interval_mass(J)
        assert nu2.interval_mass(I) == nu2.interval_mass(J)
