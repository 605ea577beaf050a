"""Command-line interface: ``efwe fit | compare | sample | table``.

Exit codes: 0 success, 1 usage error, 2 numerical failure (non-convergence,
sampling into the defect mass), 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import distributions as dist
from .datasets import DataError, Dataset, aarset, load_csv
from .distributions import EfweParams, Family, SampleDefectError, SamplePolicy
from .inference import FitResult, fit_mle, kaplan_meier

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_DATA = 0, 1, 2, 3

log = logging.getLogger("efwe")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _g(v: float) -> str:
    return f"{v:.6g}"


def _params(text: str) -> EfweParams:
    try:
        vals = [float(t) for t in text.split(",")]
        return EfweParams(*vals)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"--params expects three positive numbers 'alpha,beta,lambda': {exc}") from None


def _dataset(args) -> Dataset:
    if args.aarset:
        return aarset()
    if args.data:
        return load_csv(args.data, _column(args.column))
    raise UsageError("one of --data or --aarset is required")


def _column(col: str):
    return int(col) if col.lstrip("-").isdigit() else col


def _add_data_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--data", metavar="PATH", help="CSV file with one lifetime per row")
    g.add_argument("--aarset", action="store_true", help="use the embedded Aarset data")
    p.add_argument("--column", default="0", help="column index or header name (default 0)")


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def _fit_text(fit: FitResult) -> str:
    lines = [f"model: {fit.family.value}   n = {fit.n}   likelihood = {fit.likelihood}"]
    se = fit.std_errors
    for i, name in enumerate(fit.param_names):
        row = f"  {name:<8} {_g(fit.estimates[i]):>12}"
        if se is not None:
            lo, hi = fit.ci[name]
            row += f"   se {_g(se[i]):>12}   {fit.level:.0%} CI [{_g(lo)}, {_g(hi)}]"
        lines.append(row)
    lines += [
        f"loglik   {_g(fit.loglik)}",
        f"AIC      {_g(fit.aic)}",
        f"AICc     {_g(fit.aicc)}",
        f"BIC      {_g(fit.bic)}",
        f"K-S      {_g(fit.ks_stat)}   p = {_g(fit.ks_pvalue)}",
        f"defect   {_g(fit.defect)}",
        f"converged {fit.converged}",
    ]
    if fit.vcov is not None:
        lines.append("vcov")
        for row in fit.vcov:
            lines.append("  " + "  ".join(f"{_g(v):>12}" for v in row))
    lines += [f"note: {n}" for n in fit.notes]
    return "\n".join(lines)


def cmd_fit(args, out) -> int:
    data = _dataset(args)
    fit = fit_mle(data, args.model, level=args.level, likelihood=args.likelihood)
    if args.out == "json":
        out.write(json.dumps(fit.to_dict(), indent=2) + "\n")
    else:
        out.write(_fit_text(fit) + "\n")
    return EXIT_OK if fit.converged else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def _parse_models(text: str) -> list[Family]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise UsageError("--models needs at least one family")
    try:
        return [Family(n.lower()) for n in names]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_compare(args, out) -> int:
    families = _parse_models(args.models)
    data = _dataset(args)
    rows = []
    for fam in families:
        try:
            fit = fit_mle(data, fam, level=args.level)
            rows.append({"model": fam.value, "ok": fit.converged, "fit": fit})
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            log.info("fit of %s failed: %s", fam.value, exc)
            rows.append({"model": fam.value, "ok": False, "fit": None, "error": str(exc)})

    def key(r):
        f = r["fit"]
        return (math.inf, math.inf) if f is None else (f.aic, f.bic)

    ranked = sorted(rows, key=key)
    if args.out == "json":
        payload = []
        for rank, r in enumerate(ranked, start=1):
            entry = {"rank": rank, "model": r["model"], "converged": r["ok"]}
            if r["fit"] is not None:
                entry.update(r["fit"].to_dict())
            else:
                entry["error"] = r["error"]
            payload.append(entry)
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        out.write(f"{'rank':<5}{'model':<9}{'loglik':>12}{'AIC':>12}{'AICc':>12}{'BIC':>12}{'K-S':>12}{'p':>12}  flag\n")
        for rank, r in enumerate(ranked, start=1):
            f = r["fit"]
            if f is None:
                out.write(f"{rank:<5}{r['model']:<9}{'failed: ' + r['error']}\n")
                continue
            flag = "" if r["ok"] else "NOT CONVERGED"
            out.write(
                f"{rank:<5}{r['model']:<9}{_g(f.loglik):>12}{_g(f.aic):>12}{_g(f.aicc):>12}"
                f"{_g(f.bic):>12}{_g(f.ks_stat):>12}{_g(f.ks_pvalue):>12}  {flag}\n"
            )
    return EXIT_OK if all(r["ok"] for r in rows) else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# sample / table
# ---------------------------------------------------------------------------

def cmd_sample(args, out) -> int:
    p = _params(args.params)
    policy = SamplePolicy(args.policy)
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    x = dist.sample(p, args.n, seed=args.seed, policy=policy)
    out.write("x\n")
    for v in x:
        out.write(repr(float(v)) + "\n")
    return EXIT_OK


def _grid(text: str) -> np.ndarray:
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise UsageError("--grid expects lo:hi:steps") from None
    if not (0 < lo < hi) or steps < 2:
        raise UsageError("--grid needs 0 < lo < hi and steps >= 2")
    return np.linspace(lo, hi, steps)


def cmd_table(args, out) -> int:
    if args.what == "km-overlay":
        data = _dataset(args)
        km = kaplan_meier(data)
        if args.params:
            model = _params(args.params)
        else:
            fit = fit_mle(data, args.model)
            model = fit.model
        t = _grid(args.grid) if args.grid else km.times
        out.write("t,km_survival,fitted_survival\n")
        for ti, s_km, s_fit in zip(t, km(t), dist.model_survival(model, t)):
            out.write(f"{float(ti)!r},{float(s_km)!r},{float(s_fit)!r}\n")
        return EXIT_OK

    if not args.params:
        raise UsageError(f"--params is required for --what {args.what}")
    p = _params(args.params)
    t = _grid(args.grid or "0.01:5:100")
    fn = {"cdf": dist.cdf, "pdf": dist.pdf, "hazard": dist.hazard, "survival": dist.survival,
          "reversed-hazard": dist.reversed_hazard, "cumulative-hazard": dist.cumulative_hazard}[args.what]
    col = args.what.replace("-", "_")
    out.write(f"x,{col}\n")
    for ti, v in zip(t, fn(p, t)):
        out.write(f"{float(ti)!r},{float(v)!r}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="efwe", description="EFWE lifetime distribution toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="maximum-likelihood fit of one family")
    _add_data_args(p)
    p.add_argument("--model", default="efwe", choices=[f.value for f in Family])
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--likelihood", default="full", choices=["full", "conditional"])
    p.add_argument("--out", default="text", choices=["text", "json"])
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="fit several families and rank by AIC")
    _add_data_args(p)
    p.add_argument("--models", default="efwe,fwe,weibull,lfr")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--out", default="text", choices=["text", "json"])
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sample", help="draw EFWE variates as CSV")
    p.add_argument("--params", required=True, metavar="A,B,L")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", default="conditional", choices=[s.value for s in SamplePolicy])
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("table", help="emit plot-ready CSV of a curve")
    p.add_argument("--params", metavar="A,B,L")
    p.add_argument(
        "--what",
        required=True,
        choices=["cdf", "pdf", "hazard", "survival", "reversed-hazard", "cumulative-hazard", "km-overlay"],
    )
    p.add_argument("--grid", metavar="LO:HI:STEPS")
    p.add_argument("--model", default="efwe", choices=[f.value for f in Family],
                   help="family fitted for km-overlay when --params is absent")
    _add_data_args(p, required=False)
    p.set_defaults(func=cmd_table)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("EFWE_LOG", "error").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.ERROR),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def main(argv: Sequence[str] | None = None, out=None) -> int:
    _setup_logging()
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"efwe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SampleDefectError as exc:
        print(f"efwe: defect: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"efwe: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"efwe: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
