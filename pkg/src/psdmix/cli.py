"""Command-line interface: ``psdmix {fit,simulate,bootstrap,cv,tail-ratios,theory}``.

Exit status is 0 on success, 2 on a usage error and 1 when the command fails
at run time.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .datasets import load_counts
from .estimators import canonical_name, fit_estimators
from .kernels import KernelSpec, theory_constants
from .mixtures import DiscreteMixing, MixturePmf
from .resampling import bootstrap_ci, two_fold_cv
from .simlab import run_convergence_study, scenario, scenario_names, tail_error_ratios, write_records
from .wlse import HybridPmf


# --- argument types ----------------------------------------------------------


def _kernel(text):
    try:
        return KernelSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _estimator(text):
    try:
        return canonical_name(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _estimator_list(text):
    return [_estimator(t) for t in text.split(",") if t.strip()]


def _int_list(text):
    try:
        return [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _k_range(text):
    parts = text.replace(",", ":").split(":")
    try:
        lo, hi = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError("k range must satisfy 0 <= LO <= HI")
    return lo, hi


def _scenario_name(text):
    if text not in scenario_names():
        raise argparse.ArgumentTypeError(f"unknown scenario {text!r}; available: {', '.join(scenario_names())}")
    return text


def _unit_open(text):
    x = float(text)
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1)")
    return x


# --- result records ----------------------------------------------------------


def result_record(estimate, kernel: KernelSpec, seed) -> dict:
    """JSON-ready record of a fitted estimator."""
    rec = {"kernel": kernel.to_record(), "estimator": estimate.name, "seed": seed}
    fit = estimate.fit
    if fit is None:
        emp = estimate.pmf
        rec.update(values=emp.values.tolist(), probs=emp.freqs.tolist(), n=emp.n, converged=True)
        return rec
    rec.update(
        support=fit.mixing.support.tolist(),
        weights=fit.mixing.weights.tolist(),
        objective=fit.objective,
        grad_sup=fit.grad_sup,
        iterations=fit.iterations,
        converged=fit.converged,
    )
    if fit.estimator == "mle":
        rec["loglik"] = fit.objective
    if fit.alpha is not None:
        rec["alpha"] = fit.alpha
    if fit.flags:
        rec["flags"] = list(fit.flags)
    if isinstance(estimate.pmf, HybridPmf):
        rec["k_tilde"] = estimate.pmf.k_tilde
        rec["empirical"] = {"values": estimate.pmf.empirical.values.tolist(),
                            "counts": estimate.pmf.empirical.counts.tolist()}
    return rec


def mixture_from_result(rec: dict) -> MixturePmf:
    """Rebuild the fitted mixture pmf from a ``fit`` result record."""
    kernel = KernelSpec.from_record(rec["kernel"])
    return MixturePmf(kernel, DiscreteMixing(rec["support"], rec["weights"]))


# --- commands ----------------------------------------------------------------


def _write_json(obj, path):
    text = json.dumps(obj, indent=2, allow_nan=True)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _open_out(path):
    return (sys.stdout, False) if path in (None, "-") else (open(path, "w", newline=""), True)


def _write_csv(header, rows, path):
    fh, own = _open_out(path)
    try:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    finally:
        if own:
            fh.close()


def cmd_fit(args):
    data = load_counts(args.data).observations
    fits = fit_estimators(data, args.kernel, [args.estimator])
    _write_json(result_record(fits[args.estimator], args.kernel, args.seed), args.out)
    return 0


def cmd_simulate(args):
    recs = run_convergence_study(args.scenario, args.ns, args.estimators, args.reps, args.seed)
    fh, own = _open_out(args.out)
    try:
        write_records(recs, fh)
    finally:
        if own:
            fh.close()
    return 0


def cmd_bootstrap(args):
    data = load_counts(args.data).observations
    ci = bootstrap_ci(data, args.kernel, args.mode, args.B, args.level, args.k_range, seed=args.seed)
    rows = [(k, p, lo, hi, ci.mode, ci.B, ci.level) for k, p, lo, hi in ci.rows()]
    _write_csv(("k", "point", "lower", "upper", "mode", "B", "level"), rows, args.out)
    if ci.dropped:
        print(f"dropped {ci.dropped} of {ci.B} bootstrap replicates", file=sys.stderr)
    return 0


def cmd_cv(args):
    data = load_counts(args.data).observations
    rows = two_fold_cv(data, args.kernel, args.estimators, args.runs, args.seed)
    _write_csv(("estimator", "metric", "mean", "se", "runs"),
               [(r.estimator, r.metric, r.mean, r.se, r.runs) for r in rows], args.out)
    return 0


def cmd_tail_ratios(args):
    res = tail_error_ratios(args.scenario, args.n, args.reps, args.seed)
    _write_json({"scenario": args.scenario, "n": args.n, "reps": res.reps, "dropped": res.dropped,
                 "seed": args.seed, "mean": res.mean, "median": res.median}, args.out)
    return 0


def cmd_theory(args):
    c = theory_constants(args.kernel, args.support_bound, args.delta0, args.eta0)
    rec = {"kernel": args.kernel.to_record(), **c.to_record()}
    _write_json(rec, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="psdmix", description="Mixtures of power-series distributions for count data.")
    sub = p.add_subparsers(dest="command", required=True)
    kernel_help = "poisson | geometric | negbinomial:R | logarithmic"

    f = sub.add_parser("fit", help="fit an estimator to a count dataset")
    f.add_argument("--data", required=True, help="count file or built-in name (earthquakes)")
    f.add_argument("--kernel", type=_kernel, required=True, help=kernel_help)
    f.add_argument("--estimator", type=_estimator, default="mle", help="mle | wlse:ALPHA | hybrid | empirical")
    f.add_argument("--seed", type=int, default=None, help="recorded in the output; fitting is deterministic")
    f.add_argument("--out", default="-")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("simulate", help="sqrt(n)-scaled convergence study")
    s.add_argument("--scenario", type=_scenario_name, required=True)
    s.add_argument("--ns", type=_int_list, required=True, help="comma-separated sample sizes")
    s.add_argument("--reps", type=int, default=100)
    s.add_argument("--estimators", type=_estimator_list, default=["empirical", "mle", "hybrid", "wlse:0.4"])
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bootstrap", help="percentile bootstrap intervals for the NPMLE pmf")
    b.add_argument("--data", required=True)
    b.add_argument("--kernel", type=_kernel, required=True, help=kernel_help)
    b.add_argument("--mode", choices=("np", "param"), default="param")
    b.add_argument("-B", type=int, default=200)
    b.add_argument("--level", type=_unit_open, default=0.95)
    b.add_argument("--k-range", type=_k_range, required=True, help="LO:HI, inclusive")
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--out", default="-")
    b.set_defaults(func=cmd_bootstrap)

    c = sub.add_parser("cv", help="repeated two-fold cross-validation")
    c.add_argument("--data", required=True)
    c.add_argument("--kernel", type=_kernel, required=True, help=kernel_help)
    c.add_argument("--runs", type=int, default=200)
    c.add_argument("--estimators", type=_estimator_list, default=["empirical", "mle", "hybrid"])
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_cv)

    t = sub.add_parser("tail-ratios", help="empirical vs NPMLE error beyond the sample maximum")
    t.add_argument("--scenario", type=_scenario_name, required=True)
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--reps", type=int, default=100)
    t.add_argument("--seed", type=int, required=True)
    t.add_argument("--out", default="-")
    t.set_defaults(func=cmd_tail_ratios)

    th = sub.add_parser("theory", help="print the tail-bound constants as JSON")
    th.add_argument("--kernel", type=_kernel, required=True, help=kernel_help)
    th.add_argument("--support-bound", type=float, required=True, help="M (Poisson) or q0*R")
    th.add_argument("--delta0", type=float, default=None, help="defaults to support-bound / 2")
    th.add_argument("--eta0", type=_unit_open, default=0.5)
    th.add_argument("--out", default="-")
    th.set_defaults(func=cmd_theory)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "delta0", 0) is None:
        args.delta0 = args.support_bound / 2.0
    try:
        return args.func(args)
    except (ValueError, KeyError, RuntimeError, OSError, ZeroDivisionError) as exc:
        print(f"psdmix {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
