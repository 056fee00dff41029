import sys
from fractions import Fraction as F

import pytest
from hypothesis import settings, strategies as st

from pwlsds.constructions import example34, ifs_cantor, left_third, prop42, right_third, tent_pair, triple_tent
from pwlsds.pwl import PwlMap

settings.register_profile("pwlsds", max_examples=60, deadline=None)
settings.load_profile("pwlsds")


@pytest.fixture
def ex34():
    return example34()


@pytest.fixture
def p42():
    return prop42(F(3, 5))


@pytest.fixture
def cantor():
    return ifs_cantor()


@pytest.fixture
def phi1():
    return triple_tent()


@pytest.fixture
def phi2():
    return left_third()


@pytest.fixture
def phi3():
    return right_third()


@pytest.fixture
def tent():
    return tent_pair()[0]


def rationals(den=24):
    return st.integers(0, den).map(lambda k: F(k, den))


@st.composite
def pwl_maps(draw, max_pieces=4, den=12):
    """Random valid maps on a small rational grid."""
    n = draw(st.integers(1, max_pieces))
    inner = sorted(draw(st.sets(st.integers(1, den - 1), min_size=n - 1, max_size=n - 1)))
    bp = [F(0)] + [F(k, den) for k in inner] + [F(1)]
    vals = [F(draw(st.integers(0, den)), den)]
    for _ in range(n):
        v = draw(st.integers(0, den).filter(lambda k, prev=vals[-1]: F(k, den) != prev))
        vals.append(F(v, den))
    return PwlMap(tuple(bp), tuple(vals))


@st.composite
def densities(draw, max_cells=4, den=12):
    from pwlsds.measures import PwcDensity

    n = draw(st.integers(1, max_cells))
    inner = sorted(draw(st.sets(st.integers(1, den - 1), min_size=n - 1, max_size=n - 1)))
    bp = [F(0)] + [F(k, den) for k in inner] + [F(1)]
    w = [draw(st.integers(0, 5)) for _ in range(n)]
    if not any(w):
        w[0] = 1
    mass = sum(F(wi) * (b - a) for wi, a, b in zip(w, bp, bp[1:]))
    return PwcDensity(tuple(bp), tuple(F(wi) / mass for wi in w))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
