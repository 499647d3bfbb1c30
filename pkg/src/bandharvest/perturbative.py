"""Gaussian-switching, point-like detectors to second order in the coupling.

All quantities are dimensionless in units of the switching width sigma
(sigma = 1): ``gap`` is Omega*sigma, ``separation`` is S/sigma, a bandlimit
is Lambda*sigma and may be ``math.inf``. Probabilities and the coherence
term carry the factor coupling**2.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .quadrature import IntegralSpec, integrate
from .roots import BracketError, golden_section_max

__all__ = [
    "DetectorParams",
    "PairGeometry",
    "XStateDensityMatrix",
    "check_bandlimit",
    "pd_gaussian",
    "pd_decomposed",
    "x_gaussian",
    "re_x_gaussian",
    "im_x_gaussian",
    "im_x_infinite",
    "imx_si_approx",
    "negativity_xstate",
    "negativity_perturbative",
    "rho_perturbative",
    "effective_profile_pointlike",
    "omega_crit",
]

SQRT_PI = math.sqrt(math.pi)
# stand-in for Lambda = inf in Re X; exp(-Lambda^2) is exactly 0 in double here
RE_X_INFINITE_PROXY = 1e3


@dataclass(frozen=True)
class DetectorParams:
    """Single-detector parameters: gap Omega*sigma (negative = initially
    excited) and the coupling lambda."""

    gap: float
    coupling: float = 1.0

    def __post_init__(self):
        if not np.all(np.asarray(self.coupling) > 0):
            raise ValueError(f"coupling must be positive, got {self.coupling}")


@dataclass(frozen=True)
class PairGeometry:
    """Separation S/sigma of the two detectors and switching delay T/sigma."""

    separation: float
    delay: float = 0.0

    def __post_init__(self):
        if not np.all(np.asarray(self.separation) > 0):
            raise ValueError(f"separation must be positive, got {self.separation}")


def check_bandlimit(bandlimit):
    if np.any(np.isnan(bandlimit)) or np.any(np.asarray(bandlimit) < 0):
        raise ValueError(f"bandlimit must be >= 0 (inf allowed), got {bandlimit}")
    return bandlimit


@dataclass(frozen=True)
class XStateDensityMatrix:
    """Two-qubit state with support on the diagonal and anti-diagonal.

    Basis order |00>, |01>, |10>, |11> (detector A first). ``r14`` and
    ``r23`` are the upper-triangle entries; the lower ones are their
    conjugates.
    """

    r11: float
    r22: float
    r33: float
    r44: float
    r14: complex = 0j
    r23: complex = 0j

    def __post_init__(self):
        tr = self.r11 + self.r22 + self.r33 + self.r44
        if abs(tr - 1.0) > 1e-12:
            raise ValueError(f"trace must be 1, got {tr!r}")

    @property
    def trace(self):
        return self.r11 + self.r22 + self.r33 + self.r44

    def matrix(self):
        r14, r23 = complex(self.r14), complex(self.r23)
        return np.array([
            [self.r11, 0, 0, r14],
            [0, self.r22, r23, 0],
            [0, r23.conjugate(), self.r33, 0],
            [r14.conjugate(), 0, 0, self.r44],
        ], dtype=complex)

    def eigenvalues(self):
        """Eigenvalues of the state itself, ascending."""
        return np.sort(np.concatenate([
            _block_eigs(self.r11, self.r44, abs(self.r14)),
            _block_eigs(self.r22, self.r33, abs(self.r23)),
        ]))

    def partial_transpose_eigenvalues(self):
        """The four eigenvalues of the partial transpose on A.

        Transposing A swaps the roles of the coherences: r14 couples the
        |01>,|10> block and r23 the |00>,|11> block.
        """
        lam1, lam2 = _block_eigs(self.r22, self.r33, abs(self.r14))
        lam3, lam4 = _block_eigs(self.r11, self.r44, abs(self.r23))
        return np.array([lam1, lam2, lam3, lam4])


def _block_eigs(p, q, c):
    """Eigenvalues (small, large) of [[p, c], [c*, q]] with |c| given."""
    large = 0.5 * (p + q + math.hypot(p - q, 2.0 * c))
    # small one from the determinant avoids cancellation near zero
    small = (p * q - c * c) / large if large > 0 else 0.5 * (p + q - math.hypot(p - q, 2.0 * c))
    return small, large


def negativity_xstate(rho: XStateDensityMatrix) -> float:
    """Sum of |negative eigenvalues| of the partial transpose of ``rho``."""
    eig = rho.partial_transpose_eigenvalues()
    return float(-eig[eig < 0].sum())


def _erf_diff(a, b):
    """erf(a) - erf(b), picking the tail form that avoids cancellation."""
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    return np.where(
        (a >= 0) & (b >= 0),
        specfun.erfc(b) - specfun.erfc(a),
        np.where(
            (a <= 0) & (b <= 0),
            specfun.erfc(-a) - specfun.erfc(-b),
            specfun.erf(a) - specfun.erf(b),
        ),
    )


def _pd_unit(gap, bandlimit):
    """4*pi * P_D / coupling^2 for arrays of gap and bandlimit."""
    om, lam = np.broadcast_arrays(np.asarray(gap, float), np.asarray(bandlimit, float))
    out = np.empty(om.shape)
    inf = np.isinf(lam)
    pos = om > 0
    # Omega > 0: exp(-t^2)(1 - sqrt(pi) Omega erfcx(t)) differences, no overflow
    with np.errstate(over="ignore", invalid="ignore"):
        g_self = np.exp(-om * om) * (1.0 - SQRT_PI * om * specfun.erfcx(om))
        b = om + np.where(inf, 0.0, lam)
        g_shift = np.exp(-b * b) * (1.0 - SQRT_PI * om * specfun.erfcx(b))
        pos_val = np.where(inf, g_self, g_self - g_shift)
        neg_inf = np.exp(-om * om) - SQRT_PI * om * specfun.erfc(om)
        neg_fin = np.exp(-om * om) - np.exp(-b * b) + SQRT_PI * om * _erf_diff(om, b)
        neg_val = np.where(inf, neg_inf, neg_fin)
    out[...] = np.where(pos, pos_val, neg_val)
    return out


def pd_gaussian(d: DetectorParams, bandlimit):
    """Transition probability of one point-like detector with Gaussian switching.

    At ``bandlimit = inf`` this is the unbandlimited value
    lambda^2/(4 pi) (exp(-Omega^2) - sqrt(pi) Omega erfc(Omega)).
    """
    check_bandlimit(bandlimit)
    val = d.coupling ** 2 / (4 * math.pi) * _pd_unit(d.gap, bandlimit)
    return val[()] if np.ndim(val) == 0 else val


def pd_decomposed(d: DetectorParams, bandlimit):
    """P_D rebuilt from unbandlimited values at shifted gaps.

    P(Omega, Lambda) = P_inf(Omega) - P_inf(Omega + Lambda)
                       - lambda^2 Lambda erfc(Omega + Lambda) / (4 sqrt(pi))

    Kept as an independent cross-check of :func:`pd_gaussian`.
    """
    check_bandlimit(bandlimit)
    if np.any(np.isinf(bandlimit)):
        raise ValueError("pd_decomposed needs a finite bandlimit")
    shifted = DetectorParams(np.asarray(d.gap) + bandlimit, d.coupling)
    tail = d.coupling ** 2 * bandlimit / (4 * SQRT_PI) * specfun.erfc(np.asarray(d.gap) + bandlimit)
    return pd_gaussian(d, math.inf) - pd_gaussian(shifted, math.inf) - tail


def _dawson_kernel(k):
    # exp(-k^2) erfi(k), real and bounded by ~1/(sqrt(pi) k)
    return specfun.gauss_erfi(k, 0.0, -k * k).real


def re_x_gaussian(d: DetectorParams, g: PairGeometry, bandlimit):
    """Real part of the coherence term X_Lambda (closed form)."""
    check_bandlimit(bandlimit)
    s = np.asarray(g.separation, float)
    lam = np.where(np.isinf(bandlimit), RE_X_INFINITE_PROXY, bandlimit)
    half = 0.5 * s
    c = -half * half
    bracket = specfun.gauss_erfi(half, 0.0, c).real - specfun.gauss_erfi(half, lam, c).real
    pref = d.coupling ** 2 / (4 * SQRT_PI * s) * np.exp(-np.asarray(d.gap, float) ** 2)
    val = pref * bracket
    return val[()] if np.ndim(val) == 0 else val


def im_x_infinite(d: DetectorParams, g: PairGeometry):
    """Im X at infinite bandlimit.

    The momentum integral tends to (sqrt(pi)/2) exp(-S^2/4), giving
    lambda^2 exp(-Omega^2) exp(-S^2/4) / (4 sqrt(pi) S).
    """
    s = np.asarray(g.separation, float)
    val = d.coupling ** 2 * np.exp(-np.asarray(d.gap, float) ** 2) * np.exp(-s * s / 4) / (4 * SQRT_PI * s)
    return val[()] if np.ndim(val) == 0 else val


def _momentum_integral(separation, upper, rel_tol, abs_tol):
    """integral_0^upper exp(-k^2) erfi(k) sin(S k) dk."""
    if upper == 0:
        return 0.0
    s = separation
    spec = IntegralSpec(
        integrand=lambda k: _dawson_kernel(k) * np.sin(s * k),
        lower=0.0,
        upper=float(upper),
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        oscillation_period=math.pi / s,
    )
    return integrate(spec)


def im_x_gaussian(d: DetectorParams, g: PairGeometry, bandlimit, rel_tol=1e-10, abs_tol=1e-14):
    """Imaginary part of X_Lambda.

    Finite bandlimits go through the panel quadrature of the momentum
    integral; ``inf`` uses the closed form of :func:`im_x_infinite`.
    """
    check_bandlimit(bandlimit)
    if math.isinf(bandlimit):
        return float(im_x_infinite(d, g))
    s = float(g.separation)
    integral = _momentum_integral(s, bandlimit, rel_tol, abs_tol)
    return d.coupling ** 2 / (2 * math.pi * s) * math.exp(-d.gap ** 2) * integral


def x_gaussian(d: DetectorParams, g: PairGeometry, bandlimit) -> complex:
    """Coherence term X_Lambda for two identical point-like detectors."""
    return complex(re_x_gaussian(d, g, bandlimit), im_x_gaussian(d, g, bandlimit))


def imx_si_approx(d: DetectorParams, g: PairGeometry, bandlimit):
    """Large-bandlimit approximation of Im X through the sine integral,

        lambda^2 exp(-Omega^2) / (4 sqrt(pi) |S|) (exp(-S^2/4) - 1 + (2/pi) Si(|S| Lambda)),

    from replacing exp(-k^2) erfi(k) by 1/(sqrt(pi) k) above the cutoff.
    Only meaningful for bandlimit*sigma above ~5; no check is made.
    """
    s = np.abs(np.asarray(g.separation, float))
    lam = np.asarray(bandlimit, float)
    si = np.where(np.isinf(lam), math.pi / 2, specfun.sine_integral(s * np.where(np.isinf(lam), 0.0, lam)))
    val = (
        d.coupling ** 2 / (4 * SQRT_PI) * np.exp(-np.asarray(d.gap, float) ** 2) / s
        * (np.exp(-s * s / 4) - 1.0 + 2.0 / math.pi * si)
    )
    return val[()] if np.ndim(val) == 0 else val


def negativity_perturbative(d: DetectorParams, g: PairGeometry, bandlimit) -> float:
    """max(0, |X| - P_D) for identical detectors."""
    return max(0.0, abs(x_gaussian(d, g, bandlimit)) - float(pd_gaussian(d, bandlimit)))


def rho_perturbative(d: DetectorParams, g: PairGeometry, bandlimit) -> XStateDensityMatrix:
    """The leading-order two-detector state with the total-correlation term
    left out (it does not enter the negativity at this order)."""
    p = float(pd_gaussian(d, bandlimit))
    x = x_gaussian(d, g, bandlimit)
    return XStateDensityMatrix(1.0 - 2.0 * p, p, p, 0.0, r14=x.conjugate(), r23=0j)


def effective_profile_pointlike(x, bandlimit):
    """Bandlimited kernel seen by a point-like detector,
    sqrt(2/pi) Lambda^2 j1(Lambda |x|) / |x|, with value sqrt(2/pi) Lambda^3 / 3 at x = 0.
    """
    lam = float(check_bandlimit(bandlimit))
    if math.isinf(lam):
        raise ValueError("effective profile needs a finite bandlimit")
    x = np.abs(np.asarray(x, float))
    u = lam * x
    safe = np.where(x > 0, x, 1.0)
    ratio = np.where(x > 0, specfun.spherical_bessel_j1(u) / safe, lam / 3.0)
    val = math.sqrt(2 / math.pi) * lam ** 2 * ratio
    return val[()] if np.ndim(val) == 0 else val


def omega_crit(bandlimit, search_halfwidth=10.0, xtol=1e-8):
    """|Omega| of the maximal de-excitation probability at a finite bandlimit.

    Golden-section search over Omega in [-(Lambda + search_halfwidth), 0].
    """
    lam = float(check_bandlimit(bandlimit))
    if not (0 < lam < math.inf):
        raise ValueError("omega_crit needs a finite positive bandlimit")
    lo = -(lam + search_halfwidth)

    def prob(om):
        return float(_pd_unit(om, lam))

    x, _ = golden_section_max(prob, lo, 0.0, xtol=xtol)
    if x - lo <= 2 * xtol or -x <= 2 * xtol:
        raise BracketError(
            f"no interior maximum of the de-excitation probability on [{lo}, 0]"
        )
    return -x
