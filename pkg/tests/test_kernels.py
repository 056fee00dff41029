import subprocess
import sys
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pwlsds import _accel, kernels
from pwlsds.constructions import build_nu1, ifs_cantor, prop42
from pwlsds.measures import ETA, LEBESGUE, PwcDensity
from pwlsds.sds import sample_choices, simulate_orbit

from conftest import pwl_maps

numba = pytest.importorskip("numba")


def test_resolve_backend(monkeypatch):
    monkeypatch.delenv(_accel.ENV_FLAG, raising=False)
    assert _accel.resolve_backend(None) == "numba"
    monkeypatch.setenv(_accel.ENV_FLAG, "1")
    assert _accel.resolve_backend(None) == "numpy"
    assert _accel.resolve_backend("numba") == "numba"
    with pytest.raises(ValueError):
        _accel.resolve_backend("cuda")


def test_env_flag_in_subprocess():
    code = "from pwlsds._accel import resolve_backend; print(resolve_backend(None))"
    out = subprocess.run([sys.executable, "-c", code], env={"PWLSDS_DISABLE_NUMBA": "1", "PATH": ""}, capture_output=True, text=True)
    assert out.stdout.strip() == "numpy"


@given(pwl_maps(4), pwl_maps(4), st.integers(0, 2**32))
def test_orbits_backends_agree(g, h, seed):
    table = kernels.pack_maps([g, h])
    rng = np.random.default_rng(seed)
    ch = rng.integers(0, 2, size=(3, 200))
    x0 = rng.random(3)
    a = kernels.float_orbits(table, ch, x0, "numpy")
    b = kernels.float_orbits(table, ch, x0, "numba")
    assert np.array_equal(a, b)


def test_orbits_match_exact_arithmetic():
    sys_ = prop42()
    path = simulate_orbit(sys_, F(1, 7), 40, seed=1)
    table = kernels.pack_maps(sys_.maps)
    fl = kernels.float_orbits(table, path.choices[None, :], np.array([1 / 7]), "numba")[0]
    exact = np.array([float(x) for x in path.states])
    # slope 3 amplifies the initial rounding by at most 3^k
    err = np.abs(fl - exact)
    assert np.all(err <= 1e-16 * 3.0 ** np.arange(41) + 1e-15)


@pytest.mark.parametrize("measure", [LEBESGUE, ETA, PwcDensity.from_cells([(0, F(1, 3), F(3, 2)), (F(2, 3), 1, F(3, 2))])])
def test_ratios_backends_agree(measure):
    sys_ = prop42()
    table = kernels.pack_maps(sys_.maps)
    cdf = kernels.pack_cdf(measure.float_cdf())
    rng = np.random.default_rng(0)
    xs = measure.sample_many(rng, 3000)
    ch = sample_choices(rng, sys_.probs, 3000)
    a = kernels.derivative_ratios(table, cdf, xs, ch, 12, "numpy")
    b = kernels.derivative_ratios(table, cdf, xs, ch, 12, "numba")
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12, equal_nan=True)


def test_ratios_exact_values():
    sys_ = ifs_cantor()
    table = kernels.pack_maps(sys_.maps)
    cdf = kernels.pack_cdf(LEBESGUE.float_cdf())
    xs = np.array([0.1, 0.5, 0.9])
    for backend in ("numpy", "numba"):
        r = kernels.derivative_ratios(table, cdf, xs, np.array([0, 1, 0]), 12, backend)
        assert np.allclose(r, 1 / 3)


def test_cdf_values_match_exact():
    xs = np.linspace(0, 1, 101)
    nu = build_nu1(F(3, 5), 4).normalized()
    for m in (ETA, nu):
        cdf = kernels.pack_cdf(m.float_cdf())
        ref = np.array([float(m.cdf(F(x).limit_denominator(10**9), 40).mid) for x in xs])
        for backend in ("numpy", "numba"):
            assert np.allclose(kernels.cdf_values(cdf, xs, backend), ref, atol=1e-8)
