"""``bandharvest`` command line: figure-data sweeps as CSV or JSON.

Every physical input is a dimensionless product with the switching width
(``--omega-sigma``, ``--lambda-sigma``, ``--s-over-sigma``, ...). Grids are
``start:stop:points[:log]``; lists are comma separated and accept ``inf``
where a bandlimit is expected.

Exit status: 0 on success, 2 on a usage error, 3 when a computation fails
(non-converging quadrature, missing bracket, overflow). Errors are reported
as a single ``key=value`` line on stderr.
"""

import argparse
import math
import re
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import deltaswitch as ds
from . import design
from . import perturbative as pt
from . import quadrature
from .roots import BracketError
from .sweep import SweepResult, format_float, parallel_map, parse_float_list, parse_grid

PROG = "bandharvest"
NORMALIZATIONS = ("per-lambda-sq", "raw", "both")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _grid(name):
    def conv(text):
        try:
            return parse_grid(name, text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    return conv


def _floats(name, allow_inf=False):
    def conv(text):
        try:
            return parse_float_list(name, text, allow_inf)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    return conv


def _positive(text):
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not val > 0 or math.isinf(val):
        raise argparse.ArgumentTypeError(f"must be finite and positive: {text!r}")
    return val


def _finite(text):
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(val):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return val


def _label(x):
    return format_float(x)


# --- per-point workers (module level so worker processes can import them) ---

def _negativity_point(args):
    gap, coupling, s, lam = args
    return pt.negativity_perturbative(pt.DetectorParams(gap, coupling), pt.PairGeometry(s), lam)


def _omega_crit_point(lam):
    return pt.omega_crit(lam)


def _theta_point(args):
    coupling, a, s, t, lam = args
    cfg = ds.DeltaPairConfig(pt.DetectorParams(0.0, coupling), pt.PairGeometry(s, t), ds.GaussianProfile(a), lam)
    p_a, p_b = ds.pd_delta(cfg)
    return ds.theta_gaussian_profile(cfg), p_a, p_b


def _lambda_max_point(args):
    a, tol, coupling = args
    try:
        return ds.lambda_max(a, tol, coupling)
    except BracketError:
        return math.nan


# --- normalisation helpers ---

def _norm_columns(base, suffix, norm):
    cols = []
    if norm in ("per-lambda-sq", "both"):
        cols.append(f"{base}_per_lambda_sq{suffix}")
    if norm in ("raw", "both"):
        cols.append(f"{base}{suffix}")
    return cols


def _norm_values(values, coupling, norm):
    values = np.asarray(values, float)
    out = []
    if norm in ("per-lambda-sq", "both"):
        out.append(values / coupling ** 2)
    if norm in ("raw", "both"):
        out.append(values)
    return out


# --- commands ---

def cmd_pd_sweep(args):
    omegas = args.omega_sigma.values()
    cols, data = ["omega_sigma"], [omegas]
    for lam in args.lambda_sigma:
        vals = pt.pd_gaussian(pt.DetectorParams(omegas, args.coupling), lam)
        cols += _norm_columns("pd", f"_L{_label(lam)}", args.normalization)
        data += _norm_values(vals, args.coupling, args.normalization)
    return SweepResult(cols, np.column_stack(data)), {}


def cmd_negativity_map(args):
    ss, lams = args.s_over_sigma.values(), args.lambda_sigma.values()
    pts = [(args.omega_sigma, args.coupling, float(s), float(lam)) for s in ss for lam in lams]
    neg = parallel_map(_negativity_point, pts)
    cols = ["s_over_sigma", "lambda_sigma"] + _norm_columns("negativity", "", args.normalization)
    data = [np.array([p[2] for p in pts]), np.array([p[3] for p in pts])]
    data += _norm_values(neg, args.coupling, args.normalization)
    return SweepResult(cols, np.column_stack(data)), {}


def cmd_negativity_vs_lambda(args):
    lams = args.lambda_sigma.values()
    cols, data = ["lambda_sigma"], [lams]
    extra = {}
    for s in args.s_over_sigma:
        pts = [(args.omega_sigma, args.coupling, s, float(lam)) for lam in lams]
        neg = parallel_map(_negativity_point, pts)
        n_inf = _negativity_point((args.omega_sigma, args.coupling, s, math.inf))
        extra[f"negativity_inf_S{_label(s)}"] = format_float(n_inf)
        cols += _norm_columns("negativity", f"_S{_label(s)}", args.normalization)
        data += _norm_values(neg, args.coupling, args.normalization)
        cols += _norm_columns("negativity_inf", f"_S{_label(s)}", args.normalization)
        data += _norm_values(np.full(len(lams), n_inf), args.coupling, args.normalization)
    return SweepResult(cols, np.column_stack(data)), extra


def cmd_negativity_vs_s(args):
    ss = args.s_over_sigma.values()
    lam = args.lambda_sigma
    neg = parallel_map(_negativity_point, [(args.omega_sigma, args.coupling, float(s), lam) for s in ss])
    neg_inf = parallel_map(_negativity_point, [(args.omega_sigma, args.coupling, float(s), math.inf) for s in ss])
    cols = ["s_over_sigma"]
    cols += _norm_columns("negativity", "", args.normalization)
    cols += _norm_columns("negativity_inf", "", args.normalization)
    cols += ["effective_profile_over_300"]
    data = [ss]
    data += _norm_values(neg, args.coupling, args.normalization)
    data += _norm_values(neg_inf, args.coupling, args.normalization)
    data += [pt.effective_profile_pointlike(ss, lam) / 300.0]
    return SweepResult(cols, np.column_stack(data)), {}


def cmd_omega_crit(args):
    lams = args.lambda_sigma.values()
    crit = parallel_map(_omega_crit_point, [float(x) for x in lams], min_parallel=16)
    return SweepResult(["lambda_sigma", "omega_crit_sigma", "fit_lambda_minus_2"],
                       np.column_stack([lams, crit, lams - 2.0])), {}


def cmd_array_design(args):
    arr = design.design_array(args.threshold_sigma, args.pairs, gap=args.omega_sigma, coupling=args.coupling)
    lams = args.lambda_sigma.values()
    extra = {"n_pairs": str(len(arr.pairs))}
    cols, data = ["lambda_sigma"], [lams]
    per_pair = []
    for i, (gap, s) in enumerate(arr.pairs):
        extra[f"pair{i}_omega_sigma"] = format_float(gap)
        extra[f"pair{i}_s_over_sigma"] = format_float(s)
        neg = np.array(parallel_map(_negativity_point, [(gap, args.coupling, s, float(lam)) for lam in lams]))
        per_pair.append(neg)
        cols.append(f"negativity_per_lambda_sq_pair{i}")
        data.append(neg / args.coupling ** 2)
    flagged = np.any(np.array(per_pair) > design.POSITIVITY_FLOOR * args.coupling ** 2, axis=0)
    cols.append("any_pair_harvests")
    data.append(flagged.astype(float))
    report = design.array_coverage_check(arr, args.grid_step)
    extra["covered_fraction"] = format_float(report.covered_fraction)
    extra["uncovered_intervals"] = ";".join(
        f"{format_float(a)}-{format_float(b)}" for a, b in report.uncovered_intervals()
    )
    return SweepResult(cols, np.column_stack(data)), extra


def cmd_delta_pa(args):
    lams = args.lambda_sigma.values()
    cols, data = ["lambda_sigma"], [lams]
    extra = {}
    geo = pt.PairGeometry(1.0)
    det = pt.DetectorParams(0.0, args.coupling)
    for a in args.a_over_sigma:
        prof = ds.GaussianProfile(a)
        pa = [ds.pd_delta(ds.DeltaPairConfig(det, geo, prof, float(lam)))[0] for lam in lams]
        pa_inf = ds.pd_delta(ds.DeltaPairConfig(det, geo, prof, math.inf))[0]
        extra[f"pa_inf_a{_label(a)}"] = format_float(pa_inf)
        cols += [f"pa_a{_label(a)}", f"pa_inf_a{_label(a)}"]
        data += [np.array(pa), np.full(len(lams), pa_inf)]
    return SweepResult(cols, np.column_stack(data)), extra


def cmd_lambda_max(args):
    widths = args.a_over_sigma.values()
    cols, data = ["a_over_sigma"], [widths]
    unreachable = []
    for tol in args.tolerance:
        vals = parallel_map(_lambda_max_point, [(float(a), tol, args.coupling) for a in widths], min_parallel=16)
        unreachable += [f"{format_float(a)}@{format_float(tol)}" for a, v in zip(widths, vals) if math.isnan(v)]
        cols.append(f"lambda_max_tol{_label(tol)}")
        data.append(np.array(vals))
    return SweepResult(cols, np.column_stack(data)), {"unreachable": ";".join(unreachable)}


def cmd_delta_theta_pb(args):
    lams = args.lambda_sigma.values()
    pts = [(args.coupling, args.a_over_sigma, args.s_over_sigma, args.t_over_sigma, float(lam)) for lam in lams]
    vals = np.array(parallel_map(_theta_point, pts))
    return SweepResult(["lambda_sigma", "theta", "p_a", "p_b"], np.column_stack([lams, vals])), {}


# --- parser ---

def _add_common(p):
    p.add_argument("--coupling", type=_positive, default=1.0, help="coupling lambda (default 1)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "structured"), default="csv")
    p.add_argument("--config", default=None, help="key=value file; command-line flags override it")


def _add_norm(p):
    p.add_argument("--normalization", choices=NORMALIZATIONS, default="per-lambda-sq",
                   help="report values divided by coupling^2, raw, or both")


def build_parser():
    parser = _Parser(prog=PROG, description="Detector response and entanglement harvesting in a bandlimited field.")
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("pd-sweep", help="single-detector transition probability vs gap")
    p.add_argument("--omega-sigma", type=_grid("omega-sigma"), default=parse_grid("omega-sigma", "-10:5:301"))
    p.add_argument("--lambda-sigma", type=_floats("lambda-sigma", True), default=[0.5, 1.0, 2.0, math.inf])
    _add_norm(p)
    _add_common(p)
    p.set_defaults(func=cmd_pd_sweep)

    p = sub.add_parser("negativity-map", help="negativity over (separation, bandlimit)")
    p.add_argument("--s-over-sigma", type=_grid("s-over-sigma"), default=parse_grid("s-over-sigma", "0.05:3:60"))
    p.add_argument("--lambda-sigma", type=_grid("lambda-sigma"), default=parse_grid("lambda-sigma", "0.2:20:100"))
    p.add_argument("--omega-sigma", type=_finite, default=0.01)
    _add_norm(p)
    _add_common(p)
    p.set_defaults(func=cmd_negativity_map)

    p = sub.add_parser("negativity-vs-lambda", help="negativity vs bandlimit at fixed separations")
    p.add_argument("--s-over-sigma", type=_floats("s-over-sigma"), default=[0.1, 1.0, 1.5])
    p.add_argument("--lambda-sigma", type=_grid("lambda-sigma"), default=parse_grid("lambda-sigma", "0.05:20:400"))
    p.add_argument("--omega-sigma", type=_finite, default=0.01)
    _add_norm(p)
    _add_common(p)
    p.set_defaults(func=cmd_negativity_vs_lambda)

    p = sub.add_parser("negativity-vs-s", help="negativity vs separation at one bandlimit, with the effective profile")
    p.add_argument("--s-over-sigma", type=_grid("s-over-sigma"), default=parse_grid("s-over-sigma", "0.05:3:591"))
    p.add_argument("--lambda-sigma", type=_positive, default=50.0)
    p.add_argument("--omega-sigma", type=_finite, default=0.01)
    _add_norm(p)
    _add_common(p)
    p.set_defaults(func=cmd_negativity_vs_s)

    p = sub.add_parser("omega-crit", help="gap of maximal de-excitation vs bandlimit")
    p.add_argument("--lambda-sigma", type=_grid("lambda-sigma"), default=parse_grid("lambda-sigma", "2:40:39"))
    _add_common(p)
    p.set_defaults(func=cmd_omega_crit)

    p = sub.add_parser("array-design", help="pairs that harvest only below a threshold bandlimit")
    p.add_argument("--threshold-sigma", type=_positive, default=20.0)
    p.add_argument("--pairs", type=int, default=12)
    p.add_argument("--omega-sigma", type=_finite, default=None,
                   help="shared gap for all pairs (default: gap tuned per pair)")
    p.add_argument("--lambda-sigma", type=_grid("lambda-sigma"), default=parse_grid("lambda-sigma", "0.1:40:400"))
    p.add_argument("--grid-step", type=_positive, default=design.DEFAULT_GRID_STEP)
    _add_common(p)
    p.set_defaults(func=cmd_array_design)

    p = sub.add_parser("delta-pa", help="delta-switched transition probability vs bandlimit")
    p.add_argument("--a-over-sigma", type=_floats("a-over-sigma"), default=list(ds.FIG6_WIDTHS))
    p.add_argument("--lambda-sigma", type=_grid("lambda-sigma"), default=parse_grid("lambda-sigma", "0:10:501"))
    _add_common(p)
    p.set_defaults(func=cmd_delta_pa)

    p = sub.add_parser("lambda-max", help="bandlimit sensitivity vs profile width")
    p.add_argument("--a-over-sigma", type=_grid("a-over-sigma"), default=parse_grid("a-over-sigma", "0.001:2:60:log"))
    p.add_argument("--tolerance", type=_floats("tolerance"), default=[0.02, 0.01, 0.005])
    _add_common(p)
    p.set_defaults(func=cmd_lambda_max)

    p = sub.add_parser("delta-theta-pb", help="commutator parameter theta and P_B vs bandlimit")
    p.add_argument("--lambda-sigma", type=_grid("lambda-sigma"), default=parse_grid("lambda-sigma", "0:60:601"))
    p.add_argument("--a-over-sigma", type=_positive, default=0.01)
    p.add_argument("--s-over-sigma", type=_positive, default=0.8)
    p.add_argument("--t-over-sigma", type=_finite, default=1.0)
    _add_common(p)
    p.set_defaults(func=cmd_delta_theta_pb)
    return parser


def _config_tokens(path):
    tokens = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}")
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        key = key.strip().lstrip("-")
        if not sep or not key:
            raise UsageError(f"config {path}:{n}: expected key=value")
        if key == "config":
            raise UsageError(f"config {path}:{n}: nested config not allowed")
        tokens += [f"--{key}", val.strip()]
    return tokens


def _expand_config(argv):
    """Insert config-file flags right after the subcommand so that later
    command-line flags win."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None or not argv or argv[0].startswith("-"):
        return argv
    return [argv[0]] + _config_tokens(path) + argv[1:]


def _param_text(val):
    if isinstance(val, (list, tuple)):
        return ",".join(_param_text(v) for v in val)
    if isinstance(val, float):
        return format_float(val)
    return str(val)


def _metadata(args, extra):
    meta = {
        "tool": PROG,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "command": args.command,
    }
    skip = {"func", "command", "out", "format", "config"}
    for key, val in sorted(vars(args).items()):
        if key not in skip:
            meta[f"param.{key}"] = _param_text(val)
    meta["tol.quadrature_rel"] = format_float(quadrature.DEFAULT_REL_TOL)
    meta["tol.quadrature_abs"] = format_float(quadrature.DEFAULT_ABS_TOL)
    meta["tol.root_xtol"] = format_float(design.SOLVE_XTOL)
    meta["tol.lambda_max_xtol"] = format_float(ds.LAMBDA_MAX_XTOL)
    meta.update(extra)
    return meta


def _fail(kind, message, code):
    text = " ".join(str(message).split())
    sys.stderr.write(f"{PROG}: error={kind} message={text}\n")
    return code


_NEGATIVE_VALUE = re.compile(r"^-(\d|\.\d|inf)")


def _attach_negative_values(argv):
    """``--opt -1:2:3`` -> ``--opt=-1:2:3``; argparse would read the value as a flag."""
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE_VALUE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_attach_negative_values(_expand_config(argv)))
    except UsageError as exc:
        return _fail("usage", exc, 2)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        result, extra = args.func(args)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, BracketError):
            return _fail("computation", f"{type(exc).__name__}: {exc}", 3)
        return _fail("usage", exc, 2)
    except (ArithmeticError, OverflowError) as exc:
        return _fail("computation", f"{type(exc).__name__}: {exc}", 3)
    result.metadata = _metadata(args, extra)
    try:
        result.write(args.out, args.format, stream=sys.stdout)
    except OSError as exc:
        return _fail("io", exc, 3)
    return 0


if __name__ == "__main__":
    sys.exit(main())
