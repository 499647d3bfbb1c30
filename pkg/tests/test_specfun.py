import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bandharvest import specfun

mp.mp.dps = 40


def _mp_gauss_erfi(x, y, c):
    v = mp.exp(c) * mp.erfi(mp.mpc(x, y))
    return complex(v)


def test_erf_reference_values():
    assert specfun.erf(0.0) == 0.0
    assert specfun.erf(40.0) == 1.0
    # 2/sqrt(pi) * integral_0^1 exp(-t^2) dt
    assert specfun.erf(1.0) == pytest.approx(0.8427007929497149, rel=1e-14)


def test_erfi_reference_and_series():
    assert specfun.erfi(0.0) == 0.0
    assert specfun.erfi(1.0) == pytest.approx(1.6504257587975428, rel=1e-13)
    x = 3e-9
    assert specfun.erfi(x) == pytest.approx(2 * x / math.sqrt(math.pi), rel=1e-15)


def test_erfi_overflow_guard():
    assert math.isfinite(specfun.erfi(26.0))
    with pytest.raises(OverflowError):
        specfun.erfi(26.5)
    with pytest.raises(OverflowError):
        specfun.erfi(np.array([1.0, -30.0]))


@pytest.mark.parametrize("x", [0.1, 0.7, 2.5, 5.0, 10.0, 20.0, 25.9, -3.3])
def test_erfi_against_mpmath(x):
    assert specfun.erfi(x) == pytest.approx(float(mp.erfi(x)), rel=1e-12)


def test_erfi_complex_special_lines():
    assert specfun.erfi_complex(0j) == 0j
    for y in (0.3, 1.0, 4.0):
        val = specfun.erfi_complex(1j * y)
        assert val.real == pytest.approx(0.0, abs=1e-15)
        assert val.imag == pytest.approx(math.erf(y), rel=1e-14)


def test_erfi_complex_one_plus_i():
    val = specfun.erfi_complex(1 + 1j)
    assert val.real == pytest.approx(0.19045346923783468628, rel=1e-12)
    assert val.imag == pytest.approx(1.3161512816979476449, rel=1e-12)


def test_gauss_erfi_reference_points():
    assert specfun.gauss_erfi(0.0, 0.0, 0.0) == 0j
    val = specfun.gauss_erfi(2.0, 3.0, -4.0)
    assert val.real == pytest.approx(-2.1148563407883001510e-07, rel=1e-9)
    assert val.imag == pytest.approx(0.018296650678647329707, rel=1e-10)
    big = specfun.gauss_erfi(30.0, 0.0, -900.0)
    assert big.real == pytest.approx(0.018816784868660727790, rel=1e-12)
    x = 30.0
    assert big.real == pytest.approx(1 / (math.sqrt(math.pi) * x) * (1 + 1 / (2 * x * x)), rel=1e-5)


@pytest.mark.parametrize(
    "x,y,c",
    [
        (0.5, 0.5, 0.0),
        (4.9, 2.0, -24.0),
        (5.1, 2.0, -26.0),
        (12.0, 0.3, -144.0),
        (12.0, 40.0, -144.0),
        (-7.0, 3.0, -49.0),
        (100.0, 5.0, -1e4),
        (3.0, -2.0, -9.0),
        (8.0, -1.5, -64.0),
    ],
)
def test_gauss_erfi_against_mpmath(x, y, c):
    ref = _mp_gauss_erfi(x, y, c)
    got = specfun.gauss_erfi(x, y, c)
    assert abs(got - ref) <= 1e-9 * abs(ref) + 1e-300


def test_gauss_erfi_huge_damped_arguments_stay_finite():
    # (S + T)/2a with a = 1e-4: erfi alone is far beyond double range
    val = specfun.gauss_erfi(9000.0, 0.5, -9000.0 ** 2)
    assert np.isfinite(val)
    ref = _mp_gauss_erfi(9000.0, 0.5, -9000.0 ** 2)
    assert abs(val - ref) <= 1e-9 * abs(ref)
    on_axis = specfun.gauss_erfi(9000.0, 0.0, -9000.0 ** 2)
    assert on_axis.real == pytest.approx(1 / (math.sqrt(math.pi) * 9000.0), rel=1e-8)


def test_gauss_erfi_overflow_precondition():
    with pytest.raises(OverflowError):
        specfun.gauss_erfi(30.0, 0.0, 0.0)


def test_gauss_erfi_vectorised_matches_scalar():
    xs = np.array([0.2, 3.0, 6.0, 40.0])
    ys = np.array([0.0, 1.0, 2.0, 0.5])
    cs = -xs ** 2
    vec = specfun.gauss_erfi(xs, ys, cs)
    for i in range(len(xs)):
        assert vec[i] == specfun.gauss_erfi(xs[i], ys[i], cs[i])


def test_sine_integral_reference():
    assert specfun.sine_integral(0.0) == 0.0
    assert specfun.sine_integral(math.pi) == pytest.approx(1.8519370519824661703, rel=1e-14)
    assert specfun.sine_integral(1e8) == pytest.approx(math.pi / 2, abs=1e-7)


def test_spherical_bessel_j1_reference():
    assert specfun.spherical_bessel_j1(0.0) == 0.0
    assert specfun.spherical_bessel_j1(1e-7) == pytest.approx(1e-7 / 3, rel=1e-13)
    assert specfun.spherical_bessel_j1(math.pi) == pytest.approx(1 / math.pi, rel=1e-14)


@pytest.mark.parametrize("x", [0.01, 0.3, 0.49, 0.51, 1.7, 12.0, 300.0])
def test_spherical_bessel_j1_against_mpmath(x):
    ref = float(mp.sqrt(mp.pi / (2 * x)) * mp.besselj(1.5, x))
    assert specfun.spherical_bessel_j1(x) == pytest.approx(ref, rel=1e-13, abs=1e-16)


def test_sinc():
    assert specfun.sinc(0.0) == 1.0
    assert specfun.sinc(math.pi) == pytest.approx(0.0, abs=1e-16)
    assert specfun.sinc(2.0) == pytest.approx(math.sin(2.0) / 2.0, rel=1e-15)


finite = st.floats(-25.0, 25.0, allow_nan=False)


@given(finite)
def test_oddness(x):
    assert specfun.erf(-x) == -specfun.erf(x)
    assert specfun.erfi(-x) == -specfun.erfi(x)
    assert specfun.sine_integral(-x) == -specfun.sine_integral(x)
    assert specfun.spherical_bessel_j1(-x) == -specfun.spherical_bessel_j1(x)


@given(st.floats(-20, 20), st.floats(-20, 20))
def test_conjugate_symmetry(x, y):
    z = complex(x, y)
    try:
        a = specfun.erfi_complex(z.conjugate())
        b = specfun.erfi_complex(z)
    except OverflowError:
        return
    assert a == pytest.approx(b.conjugate(), rel=1e-12, abs=1e-300)


@given(st.floats(-20, 20), st.floats(-6, 6))
def test_fused_kernel_consistent_with_plain(x, y):
    try:
        plain = specfun.erfi_complex(complex(x, y))
    except OverflowError:
        return
    fused = specfun.gauss_erfi(x, y, 0.0)
    assert abs(fused - plain) <= 1e-9 * abs(plain) + 1e-300


@pytest.mark.parametrize("y", [0.0, 0.7, 3.0])
def test_switchover_continuity_in_gauss_erfi(y):
    # the direct/Faddeeva boundary sits at |Re z| = 5
    lo = specfun.gauss_erfi(np.nextafter(5.0, 0.0), y, -25.0)
    hi = specfun.gauss_erfi(np.nextafter(5.0, 10.0), y, -25.0)
    assert abs(lo - hi) < 1e-11


def test_switchover_continuity_j1_series():
    lo = specfun.spherical_bessel_j1(np.nextafter(0.5, 0.0))
    hi = specfun.spherical_bessel_j1(np.nextafter(0.5, 1.0))
    assert abs(lo - hi) < 1e-11


def test_sine_integral_continuity_at_four():
    lo = specfun.sine_integral(np.nextafter(4.0, 0.0))
    hi = specfun.sine_integral(np.nextafter(4.0, 5.0))
    assert abs(lo - hi) < 1e-11
