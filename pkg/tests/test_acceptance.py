"""One test per acceptance criterion, tolerances pinned.

Each test records a ``criterion N: PASS|FAIL ...`` line, printed as it runs
and repeated in the terminal summary.
"""

import math
import time

import mpmath as mp
import numpy as np

from bandharvest.deltaswitch import (
    DeltaPairConfig,
    GaussianProfile,
    lambda_max_sweep,
    log_f_gaussian_profile,
    negativity_delta,
    omega_gaussian_profile,
    pa_delta_pointlike,
    pd_delta,
    rho_delta,
    spectral_peaks,
    theta_gaussian_profile,
)
from bandharvest.design import array_coverage_check, design_array, envelope_imx
from bandharvest.perturbative import (
    DetectorParams,
    PairGeometry,
    im_x_gaussian,
    imx_si_approx,
    negativity_perturbative,
    omega_crit,
    pd_decomposed,
    pd_gaussian,
    x_gaussian,
)
from conftest import ACCEPTANCE_LINES
from oracles import mp_oracle

SEED = 20240611


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def random_delta_configs(count, seed):
    """Configurations spanning coupling [0.1, 10], width [0.01, 1], S [0.1, 5],
    T [0, 3], Lambda [0, 50], gap [-3, 3]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        coupling, a = rng.uniform(0.1, 10), rng.uniform(0.01, 1)
        s, t, lam, gap = rng.uniform(0.1, 5), rng.uniform(0, 3), rng.uniform(0, 50), rng.uniform(-3, 3)
        out.append(DeltaPairConfig(DetectorParams(gap, coupling), PairGeometry(s, t), GaussianProfile(a), lam))
    return out


def test_criterion_01_zero_cutoff_vanishing():
    rng = np.random.default_rng(SEED)
    gaps = rng.uniform(-10, 10, 100)
    worst = max(abs(float(pd_gaussian(DetectorParams(om), 0.0))) for om in gaps)
    x0 = x_gaussian(DetectorParams(0.01), PairGeometry(1.0), 0.0)
    report(1, worst <= 1e-15 and x0 == 0, f"max |P_D(Lambda=0)|={worst:.1e} X(Lambda=0)={x0}")


def test_criterion_02_decomposition_identity():
    rng = np.random.default_rng(SEED + 2)
    gaps = rng.uniform(-2, 5, 1000)
    lams = rng.uniform(0.5, 20, 1000)
    worst = 0.0
    for om, lam in zip(gaps, lams):
        d = DetectorParams(float(om))
        ref = float(pd_gaussian(d, lam))
        worst = max(worst, abs(float(pd_decomposed(d, lam)) - ref) / ref)
    report(2, worst <= 1e-12, f"max rel err={worst:.2e} on 1000 points")


def test_criterion_03_si_approximation():
    d = DetectorParams(0.01)
    worst = 0.0
    for lam in (5.5, 10.0, 20.0, 50.0):
        for s in (0.5, 1.0, 2.0):
            g = PairGeometry(s)
            exact = float(im_x_gaussian(d, g, lam))
            worst = max(worst, abs(float(imx_si_approx(d, g, lam)) - exact) / abs(exact))
    report(3, worst <= 1e-2, f"max rel err={worst:.2e}")


def test_criterion_04_envelope_bound():
    d, g = DetectorParams(0.01), PairGeometry(1.0)
    lams = np.arange(5.0, 100.0 + 0.25, 0.5)
    margin = max(float(im_x_gaussian(d, g, lam)) - float(envelope_imx(d, g, lam)) for lam in lams)
    report(4, margin <= 1e-10, f"max(Im X - env)={margin:.2e} over {len(lams)} cutoffs")


def test_criterion_05_critical_gap_asymptote():
    results = []
    for lam, target in ((40.0, 38.0), (20.0, 18.0)):
        t0 = time.perf_counter()
        val = omega_crit(lam)
        results.append((lam, val, abs(val - target), time.perf_counter() - t0))
    ok = all(err <= 0.5 and dt < 10 for _, _, err, dt in results)
    detail = " ".join(f"Omega_crit({lam:g})={val:.3f} ({dt:.2f}s)" for lam, val, _, dt in results)
    report(5, ok, detail)


def test_criterion_06_harvesting_enhancement():
    d, g = DetectorParams(0.01), PairGeometry(1.5)
    n_inf = negativity_perturbative(d, g, math.inf)
    lams = 0.05 * np.arange(1, 401)
    vals = np.array([negativity_perturbative(d, g, float(lam)) for lam in lams])
    best = int(np.argmax(vals))
    report(6, n_inf == 0 and vals[best] > 0, f"N_inf={n_inf} max N={vals[best]:.4e} at Lambda={lams[best]:.2f}")


def _spherical_j1_zeros(limit):
    """Positive roots of tan x = x below ``limit``, via mpmath."""
    zeros, n = [], 1
    while True:
        x = float(mp.findroot(lambda z: mp.sin(z) - z * mp.cos(z), (n + 0.5) * mp.pi - 0.2))
        if x > limit:
            return np.array(zeros)
        zeros.append(x)
        n += 1


def test_criterion_07_oscillation_nodes():
    lam = 50.0
    d = DetectorParams(0.01)
    seps = np.linspace(0.2, 2.0, 1801)
    diff = np.array(
        [negativity_perturbative(d, PairGeometry(s), lam) - negativity_perturbative(d, PairGeometry(s), math.inf) for s in seps]
    )
    idx = np.nonzero(np.sign(diff[:-1]) * np.sign(diff[1:]) < 0)[0]
    crossings = seps[idx] - diff[idx] * (seps[idx + 1] - seps[idx]) / (diff[idx + 1] - diff[idx])
    nodes = _spherical_j1_zeros(lam * 2.0 + 5) / lam
    dist = np.array([np.min(np.abs(nodes - c)) for c in crossings])
    ok = len(crossings) > 0 and dist.max() <= 0.05
    report(7, ok, f"{len(crossings)} crossings, max distance to a j1 node={dist.max():.4f}")


def test_criterion_08_delta_checkpoints():
    det, geo = DetectorParams(0.0, 1.0), PairGeometry(1.0)

    def pa(a, lam):
        return pd_delta(DeltaPairConfig(det, geo, GaussianProfile(a), lam))[0]

    ref = 0.5 * (1 - math.exp(-1))
    err_point = abs(float(pa_delta_pointlike(1.0, math.sqrt(2 * math.pi))) - ref)
    err_narrow = abs(pa(1e-5, math.sqrt(2 * math.pi)) - ref)
    err_limit = abs(float(pa_delta_pointlike(1.0, 1e3)) - 0.5)
    # a -> 0 after Lambda -> inf versus Lambda -> inf after a -> 0
    err_order = max(abs(pa(1e-5, math.inf) - 0.5), abs(pa(1e-5, 1e3) - float(pa_delta_pointlike(1.0, 1e3))))
    ok = err_point <= 1e-9 and err_narrow <= 1e-9 and err_limit <= 1e-6 and err_order <= 1e-6
    report(8, ok, f"P_A err={max(err_point, err_narrow):.1e} Lambda=1e3 err={err_limit:.1e} order err={err_order:.1e}")


def test_criterion_09_no_go():
    worst = max(negativity_delta(c) for c in random_delta_configs(1000, SEED + 9)) + 0.0
    report(9, abs(worst) <= 1e-12, f"max negativity={worst:.1e} on 1000 configs")


def test_criterion_10_sensitivity_maximum():
    widths = np.logspace(-3, math.log10(2.0), 60)
    sweep = lambda_max_sweep(widths, 0.01, 1.0)
    lmax = np.array([v for _, v in sweep])
    a_best = widths[int(np.argmax(lmax))]
    tail = lmax[widths >= 0.5]
    decreasing = bool(np.all(np.diff(tail) < 0))
    report(10, 0.1 <= a_best <= 0.35 and decreasing, f"argmax width={a_best:.3f} Lambda_max={lmax.max():.3f} decreasing for a>=0.5: {decreasing}")


def test_criterion_11_theta_spectrum():
    lams = np.linspace(0.0, 60.0, 601)
    geo = PairGeometry(0.8, 1.0)
    prof = GaussianProfile(0.01)
    theta = [theta_gaussian_profile(DeltaPairConfig(DetectorParams(0.0), geo, prof, float(x))) for x in lams]
    freqs, width = spectral_peaks(theta, lams[1] - lams[0], count=2)
    hi, lo = max(freqs), min(freqs)
    ok = abs(hi - 1.8) <= width and abs(lo - 0.2) <= width
    report(11, ok, f"peaks at {hi:.3f} and {lo:.3f}, bin width {width:.3f}")


def test_criterion_12_oracle_equivalence():
    rng = np.random.default_rng(SEED + 12)
    worst = 0.0
    for _ in range(20):
        coupling, a = rng.uniform(0.1, 10), rng.uniform(0.01, 1)
        s, t, lam = rng.uniform(0.1, 5), rng.uniform(0, 3), rng.uniform(0.5, 50)
        cfg = DeltaPairConfig(DetectorParams(0.0, coupling), PairGeometry(s, t), GaussianProfile(a), lam)
        ref = mp_oracle(coupling, a, s, t, lam)
        got = (log_f_gaussian_profile(cfg), theta_gaussian_profile(cfg), omega_gaussian_profile(cfg))
        for g, r in zip(got, ref):
            worst = max(worst, abs(g - r) / abs(r))
    report(12, worst <= 1e-6, f"max rel err={worst:.2e} over log f, theta, omega")


def test_criterion_13_state_physicality():
    trace_err, min_eig = 0.0, math.inf
    for cfg in random_delta_configs(1000, SEED + 9):
        rho = rho_delta(cfg)
        trace_err = max(trace_err, abs(rho.trace - 1))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(rho.matrix()).min()))
    report(13, trace_err <= 1e-14 and min_eig >= -1e-12, f"max trace err={trace_err:.1e} min eigenvalue={min_eig:.1e}")


def test_criterion_14_array_soundness():
    arr = design_array(20.0, 12)
    above = np.arange(20.0, 101.0)
    leak = max(
        negativity_perturbative(DetectorParams(gap, arr.coupling), PairGeometry(sep), float(lam))
        for gap, sep in arr.pairs
        for lam in above
    )
    cover = array_coverage_check(arr, grid_step=0.1, lower=0.5, upper=20.0)
    ok = len(arr.pairs) >= 4 and leak == 0 and cover.covered_fraction >= 0.9
    report(14, ok, f"{len(arr.pairs)} pairs, max N above threshold={leak:.1e}, covered={cover.covered_fraction:.3f}")
