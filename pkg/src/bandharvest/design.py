"""Detector pairs that can only harvest below a chosen bandlimit.

Above a cutoff Lambda, Im X oscillates under the decaying envelope

    env(Lambda) = lambda^2 exp(-Omega^2) / (2 pi^(3/2) S^2 Lambda) + Im X_inf,

while P_D keeps growing towards its unbandlimited value. A pair whose
gap and separation satisfy

    P_D(Lambda_th) = |Re X(Lambda_th) + i env(Lambda_th)|

therefore has zero negativity for every Lambda >= Lambda_th, and may still
harvest at some smaller cutoffs. Pairs with different separations
oscillate at different rates in Lambda, so an array of them can flag most
of (0, Lambda_th].
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .perturbative import (
    DetectorParams,
    PairGeometry,
    im_x_infinite,
    negativity_perturbative,
    pd_gaussian,
    re_x_gaussian,
)
from .roots import BracketError, bisect, sign_changes

__all__ = [
    "ThresholdSpec",
    "DetectorArray",
    "CoverageReport",
    "InsufficientRootsError",
    "envelope_imx",
    "threshold_residual",
    "threshold_roots",
    "solve_threshold_pair",
    "design_array",
    "smallest_threshold_separation",
    "array_coverage_check",
    "SEPARATION_RANGE",
    "GAP_RANGE",
]

SEPARATION_RANGE = (0.05, 10.0)
GAP_RANGE = (0.0, 5.0)
SEPARATION_SCAN_STEP = 0.01
GAP_SCAN_STEP = 0.01
SOLVE_XTOL = 1e-8
# negativity below this (times lambda^2) counts as zero
POSITIVITY_FLOOR = 1e-12
DEFAULT_GRID_STEP = 0.1


class InsufficientRootsError(BracketError):
    """Fewer threshold solutions in range than pairs requested."""


@dataclass(frozen=True)
class ThresholdSpec:
    """Which of (gap, separation) is held fixed while the other is solved for.

    Exactly one of ``gap`` and ``separation`` must be given.
    """

    lambda_threshold: float
    gap: Optional[float] = None
    separation: Optional[float] = None
    coupling: float = 1.0
    refined_envelope: bool = False

    def __post_init__(self):
        if not self.lambda_threshold > 0 or math.isinf(self.lambda_threshold):
            raise ValueError("lambda_threshold must be finite and positive")
        if (self.gap is None) == (self.separation is None):
            raise ValueError("fix exactly one of gap and separation")

    @property
    def solve_for(self):
        return "separation" if self.separation is None else "gap"


@dataclass(frozen=True)
class DetectorArray:
    pairs: Tuple[Tuple[float, float], ...]
    threshold: float
    coupling: float = 1.0

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("a detector array needs at least one pair")
        seps = [s for _, s in self.pairs]
        if any(b <= a for a, b in zip(seps, seps[1:])):
            raise ValueError("separations must be strictly increasing")


@dataclass
class CoverageReport:
    grid: np.ndarray
    covered: np.ndarray
    per_pair: np.ndarray = field(repr=False)

    @property
    def covered_fraction(self):
        return float(self.covered.mean()) if self.covered.size else 0.0

    @property
    def uncovered(self):
        return self.grid[~self.covered]

    def uncovered_intervals(self):
        """Runs of consecutive uncovered grid points as ``(first, last)``."""
        runs = []
        start = prev = None
        for x, c in zip(self.grid, self.covered):
            if not c:
                if start is None:
                    start = x
                prev = x
            elif start is not None:
                runs.append((float(start), float(prev)))
                start = None
        if start is not None:
            runs.append((float(start), float(prev)))
        return runs


def _refined_amplitude(separation, bandlimit):
    """Next-order amplitude of the Im X oscillation relative to the plain
    envelope. Expanding exp(-k^2) erfi(k) to 1/k^3 and integrating by parts
    once more gives

        sqrt((1 + (1/2 - 2/S^2) / Lambda^2)^2 + 1 / (S Lambda)^2),

    which exceeds 1 for S > sqrt(3); it is never allowed to go below 1.
    """
    s, lam = separation, bandlimit
    amp = np.sqrt((1 + (0.5 - 2 / (s * s)) / lam ** 2) ** 2 + 1 / (s * lam) ** 2)
    return np.maximum(amp, 1.0)


def envelope_imx(d: DetectorParams, g: PairGeometry, bandlimit, refined=False):
    """Decaying upper envelope of Im X at cutoff ``bandlimit``.

    The plain envelope holds to leading order in 1/Lambda. For S > sqrt(3)
    the true oscillation overshoots it by a relative O(1/Lambda^2);
    ``refined=True`` scales the decaying term by the next-order amplitude,
    which cuts the overshoot to O(1/Lambda^4).
    """
    lam = np.asarray(bandlimit, float)
    if np.any(lam <= 0):
        raise ValueError("envelope needs a positive bandlimit")
    s = float(g.separation)
    finite = np.where(np.isinf(lam), 1.0, lam)
    decay = d.coupling ** 2 * math.exp(-d.gap ** 2) / (2 * math.pi ** 1.5 * s * s * finite)
    if refined:
        decay = decay * _refined_amplitude(s, finite)
    val = np.where(np.isinf(lam), 0.0, decay) + im_x_infinite(d, g)
    return val[()] if np.ndim(val) == 0 else val


def threshold_residual(gap, separation, lambda_threshold, coupling=1.0, refined=False):
    """P_D - |Re X + i env| at the threshold; zero on a threshold pair,
    positive when the pair cannot harvest at the threshold even at the
    envelope's peak."""
    d = DetectorParams(gap, coupling)
    g = PairGeometry(separation)
    re = float(re_x_gaussian(d, g, lambda_threshold))
    env = float(envelope_imx(d, g, lambda_threshold, refined=refined))
    return float(pd_gaussian(d, lambda_threshold)) - math.hypot(re, env)


def _scan_roots(f, lo, hi, step):
    xs = np.arange(lo, hi + 0.5 * step, step)
    xs = xs[xs <= hi]
    ys = [f(x) for x in xs]
    return [bisect(f, a, b, xtol=SOLVE_XTOL) for a, b in sign_changes(xs, ys)]


def threshold_roots(spec: ThresholdSpec, step=None):
    """All solutions of the threshold equation in the search range, ascending."""
    th, lam, refined = spec.lambda_threshold, spec.coupling, spec.refined_envelope
    if spec.solve_for == "separation":
        def f(s):
            return threshold_residual(spec.gap, s, th, lam, refined)
        return _scan_roots(f, *SEPARATION_RANGE, step or SEPARATION_SCAN_STEP)

    def f(om):
        return threshold_residual(om, spec.separation, th, lam, refined)
    return _scan_roots(f, *GAP_RANGE, step or GAP_SCAN_STEP)


def solve_threshold_pair(spec: ThresholdSpec):
    """``(gap, separation)`` solving the threshold equation.

    The free variable is scanned over S in [0.05, 10] or Omega in [0, 5]
    and the first sign change is refined by bisection to 1e-8.

    Raises
    ------
    BracketError
        If the residual does not change sign in the search range.
    """
    roots = threshold_roots(spec)
    if not roots:
        raise BracketError(
            f"no threshold solution for {spec.solve_for} at Lambda_th={spec.lambda_threshold}"
        )
    if spec.solve_for == "separation":
        return float(spec.gap), roots[0]
    return roots[0], float(spec.separation)


def _spread_pick(values, n):
    """Indices of ``n`` entries of sorted ``values`` spread as evenly as possible,
    always keeping both ends."""
    m = len(values)
    if n >= m:
        return list(range(m))
    if n == 1:
        return [0]
    targets = np.linspace(values[0], values[-1], n)
    chosen = []
    for t in targets:
        order = np.argsort(np.abs(np.asarray(values) - t))
        for i in order:
            if i not in chosen:
                chosen.append(int(i))
                break
    return sorted(chosen)


DEFAULT_MAX_SEPARATION = 8.0


def smallest_threshold_separation(threshold, coupling=1.0, refined_envelope=True):
    """Separation at which a gapless pair sits exactly on the threshold.

    Closer pairs still harvest at the threshold for every gap in [0, 5]
    scanned here, so this is where gap-tuned arrays start.
    """
    spec = ThresholdSpec(threshold, gap=0.0, coupling=coupling, refined_envelope=refined_envelope)
    return solve_threshold_pair(spec)[1]


def design_array(threshold, n_pairs, gap=None, separations=None, coupling=1.0, refined_envelope=True):
    """Build an array of threshold pairs.

    With ``gap`` given, every pair shares that gap and the separations are
    roots of the threshold equation in S; the ``n_pairs`` roots spread most
    widely in S (the oscillation rate in Lambda grows with S) are kept.

    Without ``gap``, each separation gets its own gap solved on [0, 5]
    (largest root). ``separations`` defaults to ``n_pairs`` values spread
    evenly from just above :func:`smallest_threshold_separation` to 8.

    ``refined_envelope`` solves against the next-order envelope, so the
    pairs stay silent above the threshold also for S > sqrt(3).

    Raises
    ------
    InsufficientRootsError
        If fewer than ``n_pairs`` solutions exist.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    if gap is not None:
        spec = ThresholdSpec(threshold, gap=gap, coupling=coupling, refined_envelope=refined_envelope)
        roots = threshold_roots(spec)
        if len(roots) < n_pairs:
            raise InsufficientRootsError(
                f"only {len(roots)} threshold separations for gap {gap}, need {n_pairs}"
            )
        picked = [roots[i] for i in _spread_pick(roots, n_pairs)]
        pairs = tuple((float(gap), float(s)) for s in picked)
        return DetectorArray(pairs, float(threshold), coupling)

    if separations is None:
        s_min = smallest_threshold_separation(threshold, coupling, refined_envelope) + SEPARATION_SCAN_STEP
        s_max = max(DEFAULT_MAX_SEPARATION, s_min)
        separations = np.linspace(s_min, s_max, n_pairs) if n_pairs > 1 else [s_min]
    separations = sorted(float(s) for s in separations)
    if len(separations) != n_pairs:
        raise ValueError("need exactly n_pairs separations")
    pairs = []
    for s in separations:
        spec = ThresholdSpec(threshold, separation=s, coupling=coupling, refined_envelope=refined_envelope)
        roots = threshold_roots(spec)
        if roots:
            pairs.append((float(roots[-1]), s))
    if len(pairs) < n_pairs:
        raise InsufficientRootsError(
            f"only {len(pairs)} of {n_pairs} separations admit a threshold gap"
        )
    return DetectorArray(tuple(pairs), float(threshold), coupling)


def array_coverage_check(arr: DetectorArray, grid_step=DEFAULT_GRID_STEP, lower=0.0, upper=None):
    """Which cutoffs on a grid in (lower, upper] are flagged by at least one pair.

    ``upper`` defaults to the array threshold. A pair flags a cutoff when its
    negativity exceeds 1e-12 lambda^2.
    """
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    upper = arr.threshold if upper is None else upper
    n = int(math.floor((upper - lower) / grid_step + 1e-9))
    grid = lower + grid_step * np.arange(1, n + 1)
    floor = POSITIVITY_FLOOR * arr.coupling ** 2
    per_pair = np.zeros((len(arr.pairs), len(grid)), dtype=bool)
    for i, (gap, sep) in enumerate(arr.pairs):
        d = DetectorParams(gap, arr.coupling)
        g = PairGeometry(sep)
        per_pair[i] = [negativity_perturbative(d, g, float(lam)) > floor for lam in grid]
    covered = per_pair.any(axis=0) if len(arr.pairs) else np.zeros(len(grid), bool)
    return CoverageReport(grid=grid, covered=covered, per_pair=per_pair)
