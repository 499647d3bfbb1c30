"""Special functions used by the detector-response closed forms.

Everything here accepts scalars or numpy arrays. The complex error-function
family is evaluated through the Faddeeva function w(z) = exp(-z^2) erfc(-iz)
so that the huge factor exp(x^2) carried by erfi never has to be formed on
its own: callers that multiply erfi by a Gaussian damping factor pass the
log of that factor to :func:`gauss_erfi` and get the finite product back.
"""

import math

import numpy as np
from scipy import special

__all__ = [
    "erf",
    "erfc",
    "erfcx",
    "erfi",
    "erfi_complex",
    "gauss_erfi",
    "sine_integral",
    "spherical_bessel_j1",
    "sinc",
]

# erfi(26.6) is already ~1e305
ERFI_REAL_LIMIT = 26.0
# log of the largest finite double, minus headroom for the 1/z prefactors
_EXP_LIMIT = 700.0
# below this |Re z| the library erfi is used as is (no cancellation, no overflow)
_DIRECT_RE_LIMIT = 5.0


def _scalar_or_array(value, was_scalar):
    if was_scalar:
        return value.item() if hasattr(value, "item") else value
    return value


def erf(x):
    """Error function, 2/sqrt(pi) * integral_0^x exp(-t^2) dt."""
    return special.erf(x)


def erfc(x):
    """Complementary error function 1 - erf(x), accurate in the right tail."""
    return special.erfc(x)


def erfcx(x):
    """Scaled complementary error function exp(x^2) erfc(x)."""
    return special.erfcx(x)


def erfi(x):
    """Imaginary error function erfi(x) = -i erf(ix) for real ``x``.

    Raises
    ------
    OverflowError
        If any ``|x| > 26``. Beyond that point erfi(x) ~ exp(x^2) leaves the
        double range; use :func:`gauss_erfi` with the damping factor folded in.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > ERFI_REAL_LIMIT):
        raise OverflowError(
            f"erfi argument beyond |x| <= {ERFI_REAL_LIMIT:g}; use gauss_erfi"
        )
    return _scalar_or_array(special.erfi(arr), np.ndim(x) == 0)


def _faddeeva_erfi(z, c):
    """exp(c) * erfi(z) from w(z) on whichever half-plane keeps w bounded.

    For Im z >= 0:  erfi(z) = i - i exp(z^2) w(z)
    For Im z <  0:  erfi(z) = -i + i exp(z^2) w(-z)
    """
    upper = z.imag >= 0
    sign = np.where(upper, 1.0, -1.0)
    w = special.wofz(sign * z)
    x, y = z.real, z.imag
    # exp(c + z^2) with the real part of the exponent assembled first
    expo = (c + x * x) - y * y + 2j * x * y
    return sign * 1j * (np.exp(c) - np.exp(expo) * w)


def gauss_erfi(x, y, c):
    """Fused kernel ``exp(c) * erfi(x + i y)``.

    The Gaussian-damped erfi values that appear in the Gaussian switching
    and Gaussian profile formulas have ``c = -x**2`` and ``|x|`` up to
    several thousand, where erfi alone overflows. Here exp(c) is combined
    with exp(z^2) before anything is exponentiated.

    Parameters
    ----------
    x, y : float or array_like
        Real and imaginary parts of the erfi argument.
    c : float or array_like
        Log of the prefactor. Must satisfy ``c + x**2 <= 700``.

    Returns
    -------
    complex or ndarray of complex

    Raises
    ------
    OverflowError
        If ``c + x**2`` exceeds 700 anywhere, or the product itself is not
        representable.
    """
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0 and np.ndim(c) == 0
    x, y, c = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(y, dtype=float), np.asarray(c, dtype=float)
    )
    if np.any(c + x * x > _EXP_LIMIT):
        raise OverflowError("gauss_erfi: c + x^2 exceeds 700, result not representable")
    z = x + 1j * y
    out = np.empty(z.shape, dtype=complex)
    direct = np.abs(x) <= _DIRECT_RE_LIMIT
    if np.any(direct):
        zd = z[direct]
        out[direct] = np.exp(c[direct]) * special.erfi(zd)
    if not np.all(direct):
        far = ~direct
        out[far] = _faddeeva_erfi(z[far], c[far])
    if not np.all(np.isfinite(out)):
        raise OverflowError("gauss_erfi: result not representable")
    return out[()] if scalar else out


def erfi_complex(z):
    """erfi of a complex argument.

    Raises ``OverflowError`` when ``Re(z)^2 - Im(z)^2`` is too large for the
    value to exist in double precision.
    """
    zz = np.asarray(z, dtype=complex)
    return gauss_erfi(zz.real, zz.imag, 0.0)


def sine_integral(x):
    """Sine integral Si(x) = integral_0^x sin(t)/t dt."""
    si, _ = special.sici(x)
    return si


_J1_SERIES_LIMIT = 0.5


def spherical_bessel_j1(x):
    """Spherical Bessel function j1(x) = sin(x)/x^2 - cos(x)/x.

    A short power series is used for ``|x| < 0.5`` where the closed form
    cancels; j1(0) = 0.
    """
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < _J1_SERIES_LIMIT
    xs = x[small]
    # x * sum_k (-x^2/2)^k / (k! (2k+3)!!)
    term = xs / 3.0
    acc = term.copy()
    u = -0.5 * xs * xs
    for k in range(1, 10):
        term = term * u / (k * (2 * k + 3))
        acc = acc + term
    out[small] = acc
    xl = x[~small]
    out[~small] = np.sin(xl) / (xl * xl) - np.cos(xl) / xl
    return out[()] if scalar else out


def sinc(x):
    """Unnormalised sinc, sin(x)/x with sinc(0) = 1."""
    return np.sinc(np.asarray(x, dtype=float) / math.pi)
