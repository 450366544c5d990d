"""Command-line entry point.

Exit codes: 0 success, 2 invalid arguments or configuration, 3 numerical
failure.  Tables are CSV with a ``#`` line holding the JSON run
configuration; summaries are JSON on stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

import numpy as np

from . import exact_tails as et
from . import montecarlo as mc
from .deviation import Beta, as_beta, rate_I
from .errors import InvalidArgumentError, NumericalError, RegimeError, RegimeWarning
from .sampling import SeedSpec, eigenvalues, sample_ginibre

DEFAULT_ROW_CAP = 10**7
# options that do not change results and stay out of the config header
_NOT_CONFIG = {"workers", "output", "figure", "format", "func"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _jnum(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _prob(log_p):
    return {"log_p": _jnum(log_p), "p": min(1.0, math.exp(log_p)) if log_p > -math.inf else 0.0}


def _int_list(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise UsageError("empty list")
    return vals


def _float_list(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise UsageError("empty list")
    return vals


def _config(args):
    cfg = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    return json.dumps(cfg, sort_keys=True)


def _emit_json(obj, out):
    out.write(json.dumps(obj, sort_keys=True, allow_nan=False) + "\n")


def _emit_table(args, header, rows, out):
    """Write rows as CSV (to ``--output`` or stdout) or as JSON when ``--format json``."""
    buf = io.StringIO()
    if args.format == "json":
        recs = [{h: (_jnum(v) if isinstance(v, float) else v) for h, v in zip(header, r)} for r in rows]
        json.dump({"config": json.loads(_config(args)), "rows": recs}, buf, sort_keys=True, allow_nan=False)
        buf.write("\n")
    else:
        buf.write("# " + _config(args) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        out.write(buf.getvalue())


def _summary(args, obj, out):
    # with no --output the table owns stdout, so the summary goes to stderr
    _emit_json(obj, out if args.output else sys.stderr)


def _workers(args):
    return args.workers if args.workers is not None else mc.default_workers()


def _query(args):
    return et.TailQuery(as_beta(args.ensemble), args.stat, args.n, args.t)


# ---------------------------------------------------------------------------
# commands


def cmd_rate(args, out):
    r = rate_I(args.beta, args.t)
    _emit_json({"t": args.t, "beta": int(r.beta), "rate": _jnum(r.rate), "finite": r.finite}, out)


def cmd_exact_tail(args, out):
    q = _query(args)
    res = et.exact_tail(q)
    if res is None:
        raise InvalidArgumentError("no closed form for this query; use tail-bracket")
    body = {"ensemble": q.ensemble.name.lower(), "stat": q.statistic, "n": q.n, "t": q.t, "kind": res.kind}
    body.update(_prob(res.log_p))
    body.update({k: _jnum(v) for k, v in res.info.items()})
    _emit_json(body, out)


def _count_json(c: et.ExpectedCount):
    return {
        "count": c.count,
        "log_count": _jnum(c.log_count),
        "route": c.route,
        "error_bound": math.exp(c.log_error) if c.log_error > -math.inf else 0.0,
        "truncation_bound": math.exp(c.log_truncation) if c.log_truncation > -math.inf else 0.0,
    }


def _check_real_n(q):
    if q.ensemble == Beta.REAL and q.n < 3:
        raise InvalidArgumentError("the real ensemble needs n >= 3")


def cmd_expected_count(args, out):
    q = _query(args)
    _check_real_n(q)
    body = {"ensemble": q.ensemble.name.lower(), "stat": q.statistic, "n": q.n, "t": q.t}
    body.update(_count_json(et.expected_count(q)))
    _emit_json(body, out)


def cmd_tail_bracket(args, out):
    q = _query(args)
    _check_real_n(q)
    b = et.tail_bracket(q)
    body = {
        "ensemble": q.ensemble.name.lower(),
        "stat": q.statistic,
        "n": q.n,
        "t": q.t,
        "lower": dict(kind=b.lower.kind, **_prob(b.lower.log_p)),
        "upper": dict(kind=b.upper.kind, **_prob(b.upper.log_p)),
        "expected_count": _count_json(b.count),
        "exact": None if b.exact is None else dict(kind=b.exact.kind, **_prob(b.exact.log_p)),
    }
    _emit_json(body, out)


def cmd_mc(args, out):
    q = _query(args)
    mc._check_route(q, args.route)
    rec = mc.sample_records(q.ensemble, q.n, args.trials, args.seed, _workers(args), args.route)
    col = rec[:, mc.RECORD_FIELDS.index(q.statistic)]
    hit = col >= q.t
    est = mc.ProbEstimate.from_counts(int(hit.sum()), args.trials)
    rows = [(i, None if math.isnan(v) else float(v), bool(h)) for i, (v, h) in enumerate(zip(col, hit))]
    _emit_table(args, ["trial", "value", "hit"], rows, out)
    body = {"hits": est.hits, "trials": est.trials, "p_hat": est.p_hat, "ci95": list(est.ci95), "ci_method": est.method}
    body.update(_prob(est.log_p))
    _summary(args, body, out)


def cmd_ldp_curve(args, out):
    rows = mc.ldp_curve(args.ensemble, args.stat, args.t, args.n_list, args.trials, args.seed, _workers(args))
    _emit_table(
        args,
        ["n", "minus_log_p_over_n", "rate_target", "gap", "route"],
        [(r.n, r.minus_log_p_over_n, r.rate_target, r.gap, r.route) for r in rows],
        out,
    )
    _summary(
        args,
        {
            "rows": len(rows),
            "flagged": [r.n for r in rows if r.flagged],
            "envelope_ok": [r.envelope_ok for r in rows],
        },
        out,
    )
    if args.figure:
        from .plotting import ldp_figure

        ldp_figure(rows, args.figure)


def cmd_mdp_scaling(args, out):
    rows = mc.mdp_scaling(args.ensemble, args.stat, args.d_exponent, args.t_grid, args.n_list, args.trials, args.seed, _workers(args))
    _emit_table(
        args,
        ["n", "t", "d", "value", "target", "regime_ok"],
        [(r.n, r.t, r.d, r.value, r.target, r.regime_ok) for r in rows],
        out,
    )
    _summary(args, {"rows": len(rows), "regime_violations": sum(not r.regime_ok for r in rows)}, out)
    if args.figure:
        from .plotting import mdp_figure

        mdp_figure(rows, args.figure)


def cmd_gumbel(args, out):
    chk = mc.gumbel_check(args.n, args.mode, args.ensemble, args.stat, args.trials, args.seed, _workers(args))
    _emit_table(
        args,
        ["grid_t", "empirical_or_exact_cdf", "limit_cdf"],
        list(zip(chk.grid.tolist(), chk.cdf.tolist(), chk.limit.tolist())),
        out,
    )
    _summary(
        args,
        {
            "n": chk.n,
            "mode": chk.mode,
            "trials": chk.trials,
            "ks_stat": chk.ks_stat,
            "location_fit": chk.location_fit,
            "scale_fit": chk.scale_fit,
            "fitted_ks": chk.fitted_ks,
            "gamma_fit": chk.gamma_fit,
            "centering": chk.centering,
        },
        out,
    )
    if args.figure:
        from .plotting import gumbel_figure

        gumbel_figure(chk, args.figure)


def cmd_saturn(args, out):
    res = mc.saturn_counts(args.n, args.trials, args.threshold, args.seed, _workers(args))
    rows = [
        (int(r[0]),) + tuple(None if math.isnan(v) else float(v) for v in r[1:])
        for r in res.records
    ]
    _emit_table(args, ["trial", "real_max", "complex_max_modulus", "rightmost"], rows, out)
    _summary(
        args,
        {"trials": res.trials, "real_exceed": res.real_exceed, "complex_exceed": res.complex_exceed, "both": res.both},
        out,
    )
    if args.figure:
        from .plotting import saturn_figure

        saturn_figure(res, args.figure)


def cmd_sample(args, out):
    beta = as_beta(args.ensemble)
    if args.trials * args.n > args.row_cap:
        raise InvalidArgumentError(f"trials*n = {args.trials * args.n} exceeds the row cap {args.row_cap}")
    rows = []
    for i in range(args.trials):
        seed = SeedSpec(args.seed, i)
        spec = eigenvalues(sample_ginibre(beta, args.n, seed), beta, seed)
        if beta == Beta.COMPLEX:
            rows.extend((i, float(z.real), float(z.imag), False) for z in spec.points)
        else:
            rows.extend((i, float(x), 0.0, True) for x in spec.real_eigs)
            for z in spec.complex_pairs:
                rows.append((i, float(z.real), float(z.imag), False))
                rows.append((i, float(z.real), -float(z.imag), False))
    _emit_table(args, ["trial", "re", "im", "is_real"], rows, out)
    if args.figure:
        from .plotting import spectrum_figure

        re, im, is_real = zip(*[(r[1], r[2], r[3]) for r in rows])
        spectrum_figure(re, im, np.array(is_real, dtype=bool), args.figure)


# ---------------------------------------------------------------------------
# parser


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _finite_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("value must be finite")
    return v


def _beta_arg(text):
    try:
        return int(as_beta(text))
    except InvalidArgumentError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ginibre-tails", description="Extremal eigenvalue tails of Ginibre matrices.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, stat=True, n=True, t=True):
        sp.add_argument("--ensemble", choices=["real", "complex"], default="complex")
        if stat:
            sp.add_argument("--stat", default="radius", help="radius, rightmost, real (real_max), complex (complex_max_modulus)")
        if n:
            sp.add_argument("--n", type=_positive_int, required=True)
        if t:
            sp.add_argument("--t", type=_finite_float, required=True)

    def run_opts(sp, trials_required=True, figure=True):
        sp.add_argument("--trials", type=_positive_int, required=trials_required)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=_positive_int, default=None)
        sp.add_argument("--output", default=None)
        sp.add_argument("--format", choices=["csv", "json"], default="csv")
        if figure:
            sp.add_argument("--figure", default=None, help="also render a PNG/PDF figure to this path")

    sp = sub.add_parser("rate", help="large-deviation rate function")
    sp.add_argument("--beta", type=_beta_arg, required=True)
    sp.add_argument("--t", type=_finite_float, required=True)
    sp.set_defaults(func=cmd_rate)

    for name, fn, helptext in (
        ("exact-tail", cmd_exact_tail, "closed-form tail probability"),
        ("expected-count", cmd_expected_count, "expected number of exceedances"),
        ("tail-bracket", cmd_tail_bracket, "first-moment bracket on the tail"),
    ):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("mc", help="Monte Carlo tail estimate")
    common(sp)
    sp.add_argument("--route", choices=["matrix", "kostlan"], default="matrix")
    run_opts(sp, figure=False)
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("ldp-curve", help="-(1/n) log P against the rate")
    common(sp, n=False)
    sp.add_argument("--n-list", type=_int_list, required=True)
    run_opts(sp, trials_required=False)
    sp.set_defaults(func=cmd_ldp_curve)

    sp = sub.add_parser("mdp-scaling", help="moderate-deviation scaling table")
    common(sp, n=False, t=False)
    sp.add_argument("--d-exponent", type=_finite_float, default=0.25)
    sp.add_argument("--t-grid", type=_float_list, required=True)
    sp.add_argument("--n-list", type=_int_list, required=True)
    run_opts(sp, trials_required=False)
    sp.set_defaults(func=cmd_mdp_scaling)

    sp = sub.add_parser("gumbel", help="distance to the Gumbel limit")
    common(sp, t=False)
    sp.add_argument("--mode", choices=["exact_cdf", "mc"], default="exact_cdf")
    run_opts(sp, trials_required=False)
    sp.set_defaults(func=cmd_gumbel, trials=0)

    sp = sub.add_parser("saturn", help="real versus non-real exceedances")
    sp.add_argument("--n", type=_positive_int, required=True)
    sp.add_argument("--threshold", type=_finite_float, required=True)
    run_opts(sp)
    sp.set_defaults(func=cmd_saturn)

    sp = sub.add_parser("sample", help="dump eigenvalues")
    common(sp, stat=False, t=False)
    sp.add_argument("--row-cap", type=_positive_int, default=DEFAULT_ROW_CAP)
    run_opts(sp)
    sp.set_defaults(func=cmd_sample)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "stat", None) is not None:
            args.stat = et.normalize_stat(args.stat)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            args.func(args, out)
    except (UsageError, InvalidArgumentError, RegimeError) as exc:
        sys.stderr.write(f"error: {' '.join(str(exc).split())}\n")
        return 2
    except NumericalError as exc:
        bound = f" (achieved bound {exc.bound:.3g})" if exc.bound is not None else ""
        sys.stderr.write(f"numerical error: {' '.join(str(exc).split())}{bound}\n")
        return 3
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
