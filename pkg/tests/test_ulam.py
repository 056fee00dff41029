from fractions import Fraction as F

import numpy as np
import pytest

from pwlsds.constructions import prop42
from pwlsds.pwl import PwlMap
from pwlsds.sds import SdsSystem
from pwlsds.ulam import EXACT_LIMIT, build_ulam, closed_classes, stationary_distributions

HALF = F(1, 2)


def single(g):
    return SdsSystem((g,), (F(1),))


def test_build_examples(ex34, p42, phi2):
    M = build_ulam(ex34, 2, "dyadic")
    assert M.entries == [[HALF, HALF], [HALF, HALF]]
    M = build_ulam(single(phi2), 3, "ternary")
    assert all(r == [1, 0, 0] for r in M.entries)
    M = build_ulam(p42, 3, "ternary")
    assert M.entries[0] == [F(2, 5), F(1, 5), F(2, 5)]


def test_row_stochastic(ex34, p42, cantor):
    for sys_, B, grid in ((ex34, 16, "dyadic"), (p42, 27, "ternary"), (cantor, 9, "ternary"), (p42, 10, "uniform")):
        M = build_ulam(sys_, B, grid)
        assert all(s == 1 for s in M.row_sums())
        assert all(v >= 0 for r in M.entries for v in r)


def test_classes_examples(ex34, p42):
    assert closed_classes(build_ulam(ex34, 8, "dyadic")) == [[0, 7], [1, 6], [2, 5], [3, 4]]
    assert closed_classes(build_ulam(p42, 27, "ternary")) == [list(range(27))]
    assert closed_classes(build_ulam(single(PwlMap.identity()), 5, "uniform")) == [[i] for i in range(5)]


def test_stationary_examples(ex34, phi2):
    r = stationary_distributions(build_ulam(ex34, 2, "dyadic"))
    assert r.distributions == [[HALF, HALF]]
    r = stationary_distributions(build_ulam(ex34, 8, "dyadic"))
    assert len(r.distributions) == 4
    for cls, d in zip(r.classes, r.distributions):
        assert [d[i] for i in cls] == [HALF, HALF]
        assert sum(d) == 1
    r = stationary_distributions(build_ulam(single(phi2), 3, "ternary"))
    assert r.distributions == [[1, 0, 0]]


def test_binned_invariant_density_is_stationary(ex34):
    # Lebesgue binned on 8 dyadic cells is a stationary row vector of P
    M = build_ulam(ex34, 8, "dyadic")
    pi = [F(1, 8)] * 8
    out = [sum(pi[i] * M.entries[i][j] for i in range(8)) for j in range(8)]
    assert out == pi


def test_mirror_pairs_split_under_refinement(ex34):
    # every mirror pair {x, 1−x} is closed, so the class count is B/2 rather than refinement-invariant
    assert len(closed_classes(build_ulam(ex34, 4, "dyadic"))) == 2
    assert len(closed_classes(build_ulam(ex34, 8, "dyadic"))) == 4
    assert len(closed_classes(build_ulam(ex34, 16, "dyadic"))) == 8


def test_class_count_invariant_when_all_breakpoints_on_coarse_grid(p42):
    for B in (3, 9, 27, 81):
        assert len(closed_classes(build_ulam(p42, B, "ternary"))) == 1


def test_prop42_single_class_blind_spot(p42):
    # two invariant measures exist, the discretized chain only ever sees one class
    for B in (3, 9, 27, 81):
        assert len(stationary_distributions(build_ulam(p42, B, "ternary")).classes) == 1


def test_float_path_above_exact_limit(ex34):
    B = 128
    assert B > EXACT_LIMIT
    r = stationary_distributions(build_ulam(ex34, B, "dyadic"))
    assert not r.exact
    assert len(r.classes) == 64
    assert max(r.residuals) < 1e-12
    for cls, d in zip(r.classes, r.distributions):
        assert np.allclose([d[i] for i in cls], 0.5)


def test_grid_validation(ex34):
    from pwlsds.rational import ValidationError

    with pytest.raises(ValidationError):
        build_ulam(ex34, 6, "dyadic")
