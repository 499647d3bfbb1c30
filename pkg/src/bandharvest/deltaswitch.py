"""Exact two-detector state for delta switching and Gaussian smearing.

Detector A couples at t = 0 and detector B at t = T >= 0. Both have a
Gaussian spatial profile of width ``a`` (units of sigma, as everywhere
else). The state is built from three real functions of the field:

* ``f``      - vacuum overlap left after one kick (same for A and B),
* ``theta``  - field commutator between the two kicks,
* ``omega``  - symmetrised field correlation between the two kicks.

``f`` is carried in log form because it underflows long before the
products f^2 cosh(omega) that appear in the state stop being meaningful.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .perturbative import DetectorParams, PairGeometry, XStateDensityMatrix, check_bandlimit, negativity_xstate
from .roots import BracketError, bisect, expand_bracket

__all__ = [
    "GaussianProfile",
    "DeltaPairConfig",
    "log_f_gaussian_profile",
    "f_gaussian_profile",
    "theta_gaussian_profile",
    "omega_gaussian_profile",
    "theta_pointlike",
    "pa_delta_pointlike",
    "rho_delta",
    "pd_delta",
    "negativity_delta",
    "effective_profile_gaussian",
    "lambda_max",
    "lambda_max_sweep",
    "spectral_peaks",
    "FIG6_WIDTHS",
]

SQRT_PI = math.sqrt(math.pi)
FIG6_WIDTHS = (0.001, 0.2, 0.5, 1.0)
LAMBDA_MAX_XTOL = 1e-6


@dataclass(frozen=True)
class GaussianProfile:
    """Gaussian smearing exp(-|x|^2 / 2a^2) / ((2 pi)^(3/2) a^3), width a/sigma."""

    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"profile width must be positive, got {self.width}")

    def __call__(self, x):
        a = self.width
        x = np.asarray(x, float)
        return np.exp(-x * x / (2 * a * a)) / ((2 * math.pi) ** 1.5 * a ** 3)


@dataclass(frozen=True)
class DeltaPairConfig:
    detector: DetectorParams
    geometry: PairGeometry
    profile: GaussianProfile
    bandlimit: float

    def __post_init__(self):
        if self.geometry.delay < 0:
            raise ValueError("detector A must switch first (delay >= 0)")
        check_bandlimit(self.bandlimit)


def log_f_gaussian_profile(cfg: DeltaPairConfig) -> float:
    """log f = -lambda^2 (1 - exp(-a^2 Lambda^2)) / (2 pi a^2)."""
    lam2 = cfg.detector.coupling ** 2
    a = cfg.profile.width
    if math.isinf(cfg.bandlimit):
        frac = 1.0
    else:
        frac = -math.expm1(-(a * cfg.bandlimit) ** 2)
    return -lam2 * frac / (2 * math.pi * a * a)


def f_gaussian_profile(cfg: DeltaPairConfig) -> float:
    return math.exp(log_f_gaussian_profile(cfg))


def _shifted_args(cfg):
    s, t = cfg.geometry.separation, cfg.geometry.delay
    a = cfg.profile.width
    return np.array([(s + t) / (2 * a), (s - t) / (2 * a)])


def theta_gaussian_profile(cfg: DeltaPairConfig) -> float:
    """Commutator parameter theta.

    Each erfi value is taken together with its exp(-((S +- T)/2a)^2) damping
    through :func:`specfun.gauss_erfi`, so narrow profiles do not overflow.
    """
    a = cfg.profile.width
    s = cfg.geometry.separation
    x = _shifted_args(cfg)
    pref = cfg.detector.coupling ** 2 / (4 * SQRT_PI * a * s)
    if math.isinf(cfg.bandlimit):
        # Im erfi(x + i y) -> 1 as y -> inf
        damp = np.exp(-x * x)
        return float(pref * (damp[0] - damp[1]))
    vals = specfun.gauss_erfi(x, a * cfg.bandlimit, -x * x).imag
    return float(pref * (vals[0] - vals[1]))


def omega_gaussian_profile(cfg: DeltaPairConfig) -> float:
    """Correlation parameter omega.

    The sign follows the defining momentum integral, under which omega is
    positive for small bandlimits; only cosh(omega) and |sinh(omega)| reach
    any observable.
    """
    a = cfg.profile.width
    s = cfg.geometry.separation
    x = _shifted_args(cfg)
    pref = cfg.detector.coupling ** 2 / (2 * SQRT_PI * a * s)
    full = specfun.gauss_erfi(x, 0.0, -x * x).real
    if math.isinf(cfg.bandlimit):
        cut = 0.0
    else:
        cut = specfun.gauss_erfi(x, a * cfg.bandlimit, -x * x).real
    return float(pref * np.sum(full - cut))


def theta_pointlike(coupling, geometry: PairGeometry, bandlimit):
    """Point-like (a -> 0) limit of theta,

    lambda^2 Lambda / (2 pi S) [sinc(Lambda (T + S)) - sinc(Lambda (T - S))].
    """
    s, t = geometry.separation, geometry.delay
    lam = np.asarray(bandlimit, float)
    val = coupling ** 2 * lam / (2 * math.pi * s) * (specfun.sinc(lam * (t + s)) - specfun.sinc(lam * (t - s)))
    return val[()] if np.ndim(val) == 0 else val


def pa_delta_pointlike(coupling, bandlimit):
    """Single-detector transition probability for a point-like detector,
    (1 - exp(-lambda^2 Lambda^2 / 2 pi)) / 2; exactly 1/2 at Lambda = inf."""
    lam = np.asarray(bandlimit, float)
    with np.errstate(invalid="ignore"):
        val = np.where(np.isinf(lam), 0.5, -0.5 * np.expm1(-(coupling * lam) ** 2 / (2 * math.pi)))
    return val[()] if np.ndim(val) == 0 else val


def _rho_from_parameters(log_fa, log_fb, theta, omega, phase_sum, phase_diff):
    """Assemble the state from (f_A, f_B, theta, omega) and the two phases
    Omega_A T_A +- Omega_B T_B."""
    fa, fb = math.exp(log_fa), math.exp(log_fb)
    # f_A f_B cosh(omega), f_A f_B sinh(omega) without overflow of cosh
    lp = log_fa + log_fb
    ffc = 0.5 * (math.exp(lp + omega) + math.exp(lp - omega))
    ffs = 0.5 * (math.exp(lp + omega) - math.exp(lp - omega))
    c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
    coh = fb * 1j * s2 + ffs
    r11 = 0.25 * (1 + fa + fb * c2 + ffc)
    r22 = 0.25 * (1 + fa - fb * c2 - ffc)
    r33 = 0.25 * (1 - fa + fb * c2 - ffc)
    r44 = 0.25 * (1 - fa - fb * c2 + ffc)
    r14 = 0.25 * complex(math.cos(phase_sum), -math.sin(phase_sum)) * coh
    r23 = -0.25 * complex(math.cos(phase_diff), -math.sin(phase_diff)) * coh
    return XStateDensityMatrix(r11, r22, r33, r44, r14=r14, r23=r23)


def rho_delta(cfg: DeltaPairConfig) -> XStateDensityMatrix:
    """Exact two-detector state after both delta kicks (A at t=0, B at t=T)."""
    lf = log_f_gaussian_profile(cfg)
    theta = theta_gaussian_profile(cfg)
    omega = omega_gaussian_profile(cfg)
    gap = cfg.detector.gap
    t_b = cfg.geometry.delay
    return _rho_from_parameters(lf, lf, theta, omega, gap * t_b, -gap * t_b)


def pd_delta(cfg: DeltaPairConfig):
    """Transition probabilities ``(P_A, P_B)``; independent of the gap."""
    lf = log_f_gaussian_profile(cfg)
    theta = theta_gaussian_profile(cfg)
    p_a = -0.5 * math.expm1(lf)
    # (1 - f cos 2 theta)/2 rewritten so that theta = 0 gives P_A exactly
    p_b = p_a + math.exp(lf) * math.sin(theta) ** 2
    return p_a, p_b


def negativity_delta(cfg: DeltaPairConfig) -> float:
    return negativity_xstate(rho_delta(cfg))


def effective_profile_gaussian(x, profile: GaussianProfile, bandlimit):
    """Gaussian profile seen through the bandlimit.

    With u = a Lambda / sqrt(2), v = |x| / (sqrt(2) a):

        G = [Re(exp(-v^2) erf(u + i v)) - (2u/sqrt(pi)) exp(-u^2) sinc(Lambda |x|)] / ((2 pi)^(3/2) a^3)

    which tends to the bare profile as Lambda -> inf.
    """
    lam = float(check_bandlimit(bandlimit))
    if math.isinf(lam):
        return profile(x)
    a = profile.width
    r = np.abs(np.asarray(x, float))
    u = a * lam / math.sqrt(2)
    v = r / (math.sqrt(2) * a)
    # exp(-v^2) erf(u + i v) = i exp(-v^2) erfi(v - i u)
    damped_erf = 1j * specfun.gauss_erfi(v, -u, -v * v)
    val = (damped_erf.real - 2 * u / SQRT_PI * math.exp(-u * u) * specfun.sinc(lam * r)) / (
        (2 * math.pi) ** 1.5 * a ** 3
    )
    return val[()] if np.ndim(val) == 0 else val


def lambda_max(width, tolerance, coupling=1.0, xtol=LAMBDA_MAX_XTOL):
    """Bandlimit above which |P_A(Lambda) - P_A(inf)| stays below ``tolerance``.

    |P_A(Lambda) - P_A(inf)| = (f(Lambda) - f(inf)) / 2 falls monotonically
    from (1 - f(inf)) / 2 at Lambda = 0, so the root is unique; it is
    bracketed by doubling from Lambda = 0 and refined by bisection.
    """
    if not 0 < tolerance < 0.5:
        raise ValueError("tolerance must lie in (0, 1/2)")
    det = DetectorParams(0.0, coupling)
    geo = PairGeometry(1.0)
    prof = GaussianProfile(width)
    f_inf = f_gaussian_profile(DeltaPairConfig(det, geo, prof, math.inf))

    def excess(lam):
        f_lam = f_gaussian_profile(DeltaPairConfig(det, geo, prof, lam))
        return 0.5 * (f_lam - f_inf) - tolerance

    if excess(0.0) <= 0:
        raise BracketError(
            f"|P_A - P_A(inf)| never reaches {tolerance} for width {width}"
        )
    lo, hi = expand_bracket(excess, 0.0, 1.0)
    return bisect(excess, lo, hi, xtol=xtol)


def lambda_max_sweep(profile_widths, tolerance, coupling=1.0):
    """``[(width, lambda_max), ...]`` in the order given."""
    return [(float(a), lambda_max(a, tolerance, coupling)) for a in profile_widths]


def spectral_peaks(samples, spacing, count=2):
    """Angular frequencies of the ``count`` largest local maxima of |FFT|.

    The mean is removed first; the DC bin is never reported. Returns
    ``(frequencies, bin_width)``, both in radians per unit of the sample
    coordinate.
    """
    y = np.asarray(samples, float)
    y = y - y.mean()
    mag = np.abs(np.fft.rfft(y))
    freqs = 2 * math.pi * np.fft.rfftfreq(len(y), spacing)
    interior = np.arange(1, len(mag) - 1)
    is_peak = (mag[interior] >= mag[interior - 1]) & (mag[interior] > mag[interior + 1])
    idx = interior[is_peak]
    idx = idx[np.argsort(mag[idx])[::-1]][:count]
    return freqs[idx], freqs[1] - freqs[0]
