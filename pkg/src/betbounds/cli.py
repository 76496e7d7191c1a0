"""Command-line front end.

Every subcommand writes CSV (header row, 17 significant digits) to standard
output or ``--output``. Exit status is 0 on success, 1 on a usage error and
2 on a numeric or domain failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .betting import CsState, Fixed, GridConfig, Mixture, PrPlLambda, betting_ci
from .classical import bernstein_ci, hoeffding_ci, mp_eb_ci, prpl_eb_ci
from .core import (
    Bernoulli,
    GaussianFamily,
    Seed,
    draw_sample,
    format_float,
    parse_distribution,
    read_values,
    validate_sample,
)
from .exceptions import BetBoundsError, ParameterError, UsageError
from .klinf import ci_width_lower_bound, gaussian_lower_bound, a_n_alpha, oracle_ci_width
from .sim import (
    ExperimentSpec,
    coverage_experiment,
    effective_width_estimate,
    rows_to_csv,
    second_order_statistic,
)
from .wor import FinitePopulation, bernstein_serfling_ci, draw_wor, wor_betting_ci, wor_prpl_eb_ci

__all__ = ["Command", "parse_args", "run_command", "main"]

CI_METHODS = ("hoeffding", "bernstein", "mp-eb", "prpl-eb", "betting-mixture", "betting-prpl",
              "bernstein-serfling", "wor-prpl-eb", "wor-betting")
EXPERIMENT_METHODS = ("hoeffding", "bernstein", "mp-eb", "prpl-eb", "betting-mixture",
                      "betting-prpl")
COMPARE_DEFAULT = ("betting-prpl", "prpl-eb", "mp-eb", "hoeffding")

_EPILOG = {
    "ci": "CSV columns: method,n,alpha,lower,upper,width,flags",
    "cs": "reads one observation per line from stdin (or --input); "
          "CSV columns: t,lower,upper,width",
    "lower-bound": "CSV columns: dist,n,alpha,a,lower_bound,upper_dev,lower_dev,oracle,"
                   "ratio,ratio_factor2",
    "compare": "CSV columns: n, then the median width of each method",
    "coverage": "CSV columns: method,n,replicates,covered,coverage,min_required,"
                "width_median,width_q25,width_q75",
    "effective-width": "CSV columns: w,mean_T_w,censored,reached; "
                       "w_e(n) goes to the --summary JSON",
    "second-order": "CSV columns: n,alpha,replicates,mean,target,variance,target_variance,"
                    "delta_method_variance",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Command:
    subcommand: str
    args: argparse.Namespace


def _alpha(text):
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < a < 1.0:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return a


def _count(text):
    try:
        v = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a count: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("counts must be nonnegative")
    return v


def _seed(text):
    v = _count(text)
    if v >= 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def parse_n_grid(text: str) -> List[int]:
    """``start:stop:log[:k]``, ``start:stop:lin[:k]`` or a comma list."""
    if ":" not in text:
        vals = [_count(t) for t in text.split(",") if t]
    else:
        parts = text.split(":")
        if len(parts) not in (3, 4) or parts[2] not in ("log", "lin"):
            raise argparse.ArgumentTypeError(f"bad n-grid {text!r}")
        start, stop = _count(parts[0]), _count(parts[1])
        k = _count(parts[3]) if len(parts) == 4 else 5
        if start < 1 or stop < start or k < 1:
            raise argparse.ArgumentTypeError(f"bad n-grid {text!r}")
        pts = np.geomspace(start, stop, k) if parts[2] == "log" else np.linspace(start, stop, k)
        vals = sorted({int(round(p)) for p in pts})
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"bad n-grid {text!r}")
    return sorted(set(vals))


def _dist_arg(allow_gaussian):
    def parse(text):
        try:
            d = parse_distribution(text)
        except ParameterError as e:
            raise argparse.ArgumentTypeError(str(e)) from None
        if isinstance(d, GaussianFamily) and not allow_gaussian:
            raise argparse.ArgumentTypeError("gaussian is only accepted by lower-bound")
        return text
    return parse


def _n_grid(text):
    return parse_n_grid(text)


def _methods(allowed):
    def parse(text):
        ms = [m.strip() for m in text.split(",") if m.strip()]
        for m in ms:
            if m not in allowed:
                raise argparse.ArgumentTypeError(f"unknown method {m!r}")
        return ms
    return parse


def _add_io(p, output=True):
    if output:
        p.add_argument("--output", "-o", help="write CSV here instead of stdout")


def _add_grid(p, default_points):
    p.add_argument("--grid-points", type=_count, default=default_points)
    p.add_argument("--refine-tol", type=float, default=1e-6)
    p.add_argument("--nodes", type=_count, default=64, help="mixture quadrature nodes")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="betbounds", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("ci", help="confidence interval from a file or a simulated sample",
                       epilog=_EPILOG["ci"])
    c.add_argument("--method", required=True, choices=CI_METHODS)
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="sample file, one value per line, '#' comments")
    src.add_argument("--dist", type=_dist_arg(False), help="bernoulli:p, beta:a,b, pointmass:c, uniform:x1,x2,...")
    src.add_argument("--population", help="population file for without-replacement draws")
    c.add_argument("--n", type=_count)
    c.add_argument("--M", type=_count, help="population size (file input, WoR methods)")
    c.add_argument("--alpha", type=_alpha, default=0.05)
    c.add_argument("--sigma", type=float, help="known standard deviation")
    c.add_argument("--seed", type=_seed, default=0)
    c.add_argument("--no-clip", action="store_true", help="report the unclipped interval")
    _add_grid(c, 2048)
    _add_io(c)

    s = sub.add_parser("cs", help="running betting CS over observations on stdin",
                       epilog=_EPILOG["cs"])
    s.add_argument("--alpha", type=_alpha, default=0.05)
    s.add_argument("--strategy", default="mixture", help="mixture or fixed:lambda")
    s.add_argument("--input", help="read observations from this file instead of stdin")
    _add_grid(s, 512)
    _add_io(s)

    lb = sub.add_parser("lower-bound", help="method-agnostic CI width lower bound",
                        epilog=_EPILOG["lower-bound"])
    lb.add_argument("--dist", type=_dist_arg(True), required=True)
    lb.add_argument("--n", type=_count, required=True)
    lb.add_argument("--alpha", type=_alpha, default=0.05)
    _add_io(lb)

    cmp_ = sub.add_parser("compare", help="median widths of several CIs over an n-grid",
                          epilog=_EPILOG["compare"])
    cmp_.add_argument("--dist", type=_dist_arg(False), required=True)
    cmp_.add_argument("--alpha", type=_alpha, default=0.05)
    cmp_.add_argument("--n-grid", type=_n_grid, required=True)
    cmp_.add_argument("--reps", type=_count, default=200)
    cmp_.add_argument("--seed", type=_seed, default=0)
    cmp_.add_argument("--methods", type=_methods(EXPERIMENT_METHODS), default=list(COMPARE_DEFAULT))
    cmp_.add_argument("--summary", help="also write a JSON summary here")
    _add_grid(cmp_, 2048)
    _add_io(cmp_)

    cov = sub.add_parser("coverage", help="Monte Carlo coverage of CI methods",
                         epilog=_EPILOG["coverage"])
    cov.add_argument("--dist", type=_dist_arg(False), required=True)
    cov.add_argument("--alpha", type=_alpha, default=0.05)
    cov.add_argument("--n", type=_count, required=True)
    cov.add_argument("--reps", type=_count, default=2000)
    cov.add_argument("--seed", type=_seed, default=0)
    cov.add_argument("--methods", type=_methods(EXPERIMENT_METHODS),
                     default=list(EXPERIMENT_METHODS))
    cov.add_argument("--summary")
    _add_grid(cov, 2048)
    _add_io(cov)

    ew = sub.add_parser("effective-width", help="stopping times of the betting CS",
                        epilog=_EPILOG["effective-width"])
    ew.add_argument("--dist", type=_dist_arg(False), required=True)
    ew.add_argument("--alpha", type=_alpha, default=0.05)
    ew.add_argument("--reps", type=_count, default=500)
    ew.add_argument("--n-max", type=_count, default=100_000)
    ew.add_argument("--w-max", type=float, default=1.0)
    ew.add_argument("--w-min", type=float, default=1e-3)
    ew.add_argument("--w-points", type=_count, default=20)
    ew.add_argument("--n-query", type=_n_grid, default=[1000, 10000])
    ew.add_argument("--seed", type=_seed, default=0)
    ew.add_argument("--allow-censored", action="store_true")
    ew.add_argument("--summary")
    _add_grid(ew, 512)
    _add_io(ew)

    so = sub.add_parser("second-order", help="second-order width statistic of MP-EB",
                        epilog=_EPILOG["second-order"])
    so.add_argument("--dist", type=_dist_arg(False), required=True)
    so.add_argument("--alpha", type=_alpha, default=0.05)
    so.add_argument("--n", type=_count, required=True)
    so.add_argument("--reps", type=_count, default=200)
    so.add_argument("--seed", type=_seed, default=0)
    so.add_argument("--summary")
    _add_io(so)
    return p


def parse_args(argv: Sequence[str]) -> Command:
    ns = build_parser().parse_args(list(argv))
    return Command(ns.subcommand, ns)


# ---------------------------------------------------------------------------


def _bounded_dist(text):
    d = parse_distribution(text)
    if isinstance(d, GaussianFamily):
        raise UsageError("gaussian is only accepted by lower-bound")
    return d


def _grid(a) -> GridConfig:
    return GridConfig(a.grid_points, a.refine_tol)


def _read_file(path) -> List[float]:
    with open(path, encoding="utf-8") as fh:
        return read_values(fh)


def _emit(text: str, a):
    out = getattr(a, "output", None)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summary(a, doc):
    path = getattr(a, "summary", None)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _run_ci(a):
    wor = a.method in ("bernstein-serfling", "wor-prpl-eb", "wor-betting")
    sigma = a.sigma
    M = a.M
    if a.population:
        if a.n is None:
            raise UsageError("--population needs --n")
        pop = FinitePopulation(np.asarray(_read_file(a.population)))
        sample = draw_wor(pop, a.n, Seed(a.seed))
        M = pop.M
        if sigma is None:
            sigma = math.sqrt(pop.sigma2_M)
    elif a.dist:
        if a.n is None:
            raise UsageError("--dist needs --n")
        d = _bounded_dist(a.dist)
        sample = draw_sample(d, a.n, Seed(a.seed))
        if sigma is None:
            sigma = math.sqrt(d.variance)
    else:
        sample = validate_sample(_read_file(a.input), source=a.input)
    if wor and M is None:
        raise UsageError(f"{a.method} needs --M or --population")
    g = _grid(a)
    m = a.method
    if m == "hoeffding":
        iv = hoeffding_ci(sample, a.alpha)
    elif m == "bernstein":
        if sigma is None:
            raise UsageError("bernstein needs --sigma for file input")
        iv = bernstein_ci(sample, a.alpha, min(sigma, 0.5))
    elif m == "mp-eb":
        iv = mp_eb_ci(sample, a.alpha)
    elif m == "prpl-eb":
        iv = prpl_eb_ci(sample, a.alpha)
    elif m == "betting-mixture":
        iv = betting_ci(sample, a.alpha, Mixture(a.nodes), g)
    elif m == "betting-prpl":
        iv = betting_ci(sample, a.alpha, PrPlLambda(), g)
    elif m == "bernstein-serfling":
        if sigma is None:
            raise UsageError("bernstein-serfling needs --sigma for file input")
        iv = bernstein_serfling_ci(sample, M, a.alpha, sigma)
    elif m == "wor-prpl-eb":
        iv = wor_prpl_eb_ci(sample, M, a.alpha)
    else:
        iv = wor_betting_ci(sample, M, a.alpha, PrPlLambda(), g)
    if not a.no_clip:
        iv = iv.clipped()
    rows = [{"method": iv.method, "n": iv.n, "alpha": iv.alpha, "lower": iv.lower,
             "upper": iv.upper, "width": iv.width, "flags": ";".join(iv.flags)}]
    _emit(rows_to_csv(rows), a)


def _parse_strategy(text, nodes):
    if text == "mixture":
        return Mixture(nodes)
    if text.startswith("fixed:"):
        try:
            return Fixed(float(text.split(":", 1)[1]))
        except ValueError:
            raise UsageError(f"bad fixed bet in {text!r}") from None
    if text.startswith("prpl"):
        # the CS rejects this with a domain error; keep the message explicit
        return PrPlLambda(n_target=1)
    raise UsageError(f"unknown strategy {text!r}")


def _run_cs(a):
    strategy = _parse_strategy(a.strategy, a.nodes)
    cs = CsState(a.alpha, strategy, _grid(a))
    fh = open(a.input, encoding="utf-8") if a.input else sys.stdin
    out = open(a.output, "w", encoding="utf-8", newline="") if a.output else sys.stdout
    try:
        out.write("t,lower,upper,width\n")
        for x in read_values(fh):
            iv = cs.step(x)
            out.write(f"{iv.n},{format_float(iv.lower)},{format_float(iv.upper)},"
                      f"{format_float(iv.width)}\n")
            out.flush()
    finally:
        if a.input:
            fh.close()
        if a.output:
            out.close()


def _run_lower_bound(a):
    d = parse_distribution(a.dist)
    row = {"dist": a.dist, "n": a.n, "alpha": a.alpha, "a": a_n_alpha(a.n, a.alpha)}
    if isinstance(d, GaussianFamily):
        row.update(lower_bound=gaussian_lower_bound(d.sigma, a.n, a.alpha),
                   upper_dev=float("nan"), lower_dev=float("nan"))
    else:
        res = ci_width_lower_bound(d, a.n, a.alpha)
        row.update(lower_bound=res.w_star, upper_dev=res.upper_dev, lower_dev=res.lower_dev)
    if isinstance(d, (Bernoulli, GaussianFamily)):
        o = oracle_ci_width(d, a.n, a.alpha)
        r = o / row["lower_bound"]
        row.update(oracle=o, ratio=r, ratio_factor2=2 * r)
    else:
        row.update(oracle=float("nan"), ratio=float("nan"), ratio_factor2=float("nan"))
    _emit(rows_to_csv([row]), a)


def _spec(a, methods, n_grid, reps):
    return ExperimentSpec(_bounded_dist(a.dist), methods, n_grid, a.alpha, reps, a.seed,
                          grid=_grid(a), mixture_nodes=a.nodes)


def _run_compare(a):
    spec = _spec(a, a.methods, a.n_grid, a.reps)
    res = coverage_experiment(spec)
    rows = []
    for n in a.n_grid:
        row = {"n": n}
        for s in res:
            if s.n == n:
                row[s.method] = s.width_median
        rows.append(row)
    _emit(rows_to_csv(rows, ["n"] + list(a.methods)), a)
    _summary(a, {"command": "compare", "dist": a.dist, "alpha": a.alpha, "seed": a.seed,
                 "replicates": a.reps, "rows": [{k: (float(v) if k != "n" else v)
                                                 for k, v in r.items()} for r in rows]})


def _run_coverage(a):
    spec = _spec(a, a.methods, [a.n], a.reps)
    res = coverage_experiment(spec)
    rows = [{"method": s.method, "n": s.n, "replicates": s.replicates, "covered": s.covered,
             "coverage": s.coverage, "min_required": s.min_coverage(a.alpha),
             "width_median": s.width_median, "width_q25": s.width_q25,
             "width_q75": s.width_q75} for s in res]
    _emit(rows_to_csv(rows), a)
    _summary(a, {"command": "coverage", "dist": a.dist, "alpha": a.alpha, "seed": a.seed,
                 "rows": rows})


def _run_effective_width(a):
    d = _bounded_dist(a.dist)
    if not a.w_max > a.w_min > 0:
        raise UsageError("need w-max > w-min > 0")
    w_grid = np.geomspace(a.w_max, a.w_min, a.w_points)
    rep = effective_width_estimate(d, Mixture(a.nodes), a.alpha, w_grid, a.reps, a.n_max,
                                   a.seed, _grid(a), a.n_query, a.allow_censored)
    _emit(rows_to_csv(rep.rows()), a)
    _summary(a, {"command": "effective-width", "dist": a.dist, "alpha": a.alpha,
                 "seed": a.seed, "w_e": {str(k): v for k, v in rep.w_e.items()},
                 "monotone_paths": rep.monotone_paths, "rows": rep.rows()})


def _run_second_order(a):
    d = _bounded_dist(a.dist)
    rep = second_order_statistic(d, a.alpha, a.n, a.reps, a.seed)
    row = {"n": a.n, "alpha": a.alpha, "replicates": a.reps, "mean": rep.mean,
           "target": rep.target, "variance": rep.variance,
           "target_variance": rep.target_variance,
           "delta_method_variance": rep.delta_method_variance}
    _emit(rows_to_csv([row]), a)
    _summary(a, dict(row, command="second-order", dist=a.dist, seed=a.seed))


_DISPATCH = {
    "ci": _run_ci,
    "cs": _run_cs,
    "lower-bound": _run_lower_bound,
    "compare": _run_compare,
    "coverage": _run_coverage,
    "effective-width": _run_effective_width,
    "second-order": _run_second_order,
}


def run_command(cmd: Command) -> int:
    try:
        _DISPATCH[cmd.subcommand](cmd.args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (BetBoundsError, ArithmeticError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return run_command(cmd)


if __name__ == "__main__":
    sys.exit(main())
