"""Command line interface: ``singular-lrt <subcommand> ...``.

Data go to stdout as CSV (default, with a header row) or a single JSON
document; diagnostics go to stderr.  Exit status 2 signals a usage or
domain error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from ._errors import DomainError
from .calibration import threshold_table
from .coalescent import gene_tree_probabilities, probabilities_from_phi
from .densities import DensitySpec, pdf, pvalues
from .models import Model, TrinomialCounts, constrained_mle, lr_statistic
from .simulation import ExperimentConfig, run_experiment, reference_pvalues, sup_uniform_deviation

PAPER_NS = "30,100,1000,10000,100000,1000000"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    """Round-trip safe rendering with 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def fmt_paper(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".3g")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    out = []
    for v in _floats(text):
        if not v.is_integer():
            raise DomainError(f"expected integers, got {text!r}")
        out.append(int(v))
    return out


def _emit(args, columns: list[str], rows: list[list], extra: dict | None = None, render=fmt):
    if args.format == "json":
        doc = dict(extra or {})
        doc["rows"] = [dict(zip(columns, r)) for r in rows]
        json.dump(doc, sys.stdout, indent=1, default=_json_default)
        sys.stdout.write("\n")
        return
    writer = csv.writer(sys.stdout, lineterminator="\r\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([render(v) for v in r])


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def cmd_probs(args):
    if (args.t is None) == (args.phi0 is None):
        raise DomainError("give exactly one of --t or --phi0")
    if args.t is not None:
        probs = gene_tree_probabilities(args.t, args.tree)
    else:
        if not (0.0 < args.phi0 <= 1.0):
            raise DomainError(f"--phi0 must lie in (0, 1], got {args.phi0!r}")
        probs = probabilities_from_phi(args.phi0, args.tree)
    _emit(args, ["p1", "p2", "p3"], [list(probs.as_tuple())])


def cmd_lrt(args):
    counts = TrinomialCounts.coerce(_ints(args.counts))
    model = Model.parse(args.model)
    lam = lr_statistic(counts, model)
    mle = constrained_mle(counts, model)
    phi_for_mu = mle.phi_hat if mle.phi_hat > 0 else 1.0
    p_approx = reference_pvalues([lam], [phi_for_mu], counts.n, model, "approx")[0]
    p_chisq = reference_pvalues([lam], [phi_for_mu], counts.n, model, "chisq1")[0]
    row = [lam, mle.phi_hat, mle.tree_index, p_approx, p_chisq]
    _emit(args, ["lambda", "phi_hat", "tree", "p_approx", "p_chisq1"], [row])


def cmd_thresholds(args):
    epsilons = _floats(args.epsilons)
    ns = _ints(args.ns)
    table = threshold_table(args.model, epsilons, ns)
    rows = [
        [r.epsilon, r.mu_tilde, e.n, e.phi_tilde, e.t_tilde]
        for r in table
        for e in r.entries
    ]
    render = fmt_paper if args.paper_rounding else fmt
    if args.format == "json" and args.paper_rounding:
        rows = [[float(fmt_paper(v)) if isinstance(v, float) else v for v in r] for r in rows]
    _emit(args, ["epsilon", "mu_tilde", "n", "phi_tilde", "t_tilde"], rows, render=render)


def cmd_simulate(args):
    config = ExperimentConfig(
        model=Model.parse(args.model),
        phi0=args.phi0,
        n=args.n,
        replicates=args.replicates,
        seed=args.seed,
        reference=args.reference,
        mu_source={"true": "true_param", "plugin": "plugin_mle"}[args.mu_source],
    )
    ecdf = run_experiment(config)
    dev = sup_uniform_deviation(ecdf)
    rows = [list(r) for r in ecdf.rows()]
    extra = {
        "model": str(config.model),
        "phi0": config.phi0,
        "n": config.n,
        "replicates": config.replicates,
        "seed": config.seed,
        "reference": config.reference,
        "mu_source": config.mu_source,
        "sup_uniform_deviation": dev,
    }
    _emit(args, ["rank", "pvalue", "cumfrac"], rows, extra=extra)
    print(f"# sup_uniform_deviation={fmt(dev)}", file=sys.stderr)


def cmd_density(args):
    spec = DensitySpec.parse(args.spec)
    grid = _floats(args.grid)
    if len(grid) != 3 or not float(grid[2]).is_integer():
        raise DomainError("--grid takes lo,hi,steps")
    lo, hi, steps = grid[0], grid[1], int(grid[2])
    if not (lo > 0) or hi < lo or steps < 1 or (steps == 1 and hi != lo):
        raise DomainError("--grid needs 0 < lo <= hi and steps >= 2 (steps = 1 only when lo = hi)")
    lams = np.geomspace(lo, hi, steps) if args.log else np.linspace(lo, hi, steps)
    dens = np.atleast_1d(pdf(lams, spec))
    cdfs = 1.0 - pvalues(lams, spec)
    _emit(args, ["lambda", "pdf", "cdf"], [list(r) for r in zip(lams, dens, cdfs)], extra={"spec": str(spec)})


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="singular-lrt",
        description="Likelihood ratio tests for three-taxon species tree models near singularities.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("probs", parents=[common], help="gene tree probabilities",
                       epilog="example: singular-lrt probs --t 0.291 --tree 1")
    p.add_argument("--t", type=float, help="internal branch length (coalescent units)")
    p.add_argument("--phi0", type=float, help="exp(-t), in (0, 1]")
    p.add_argument("--tree", type=int, choices=(1, 2, 3), default=1)
    p.set_defaults(func=cmd_probs)

    p = sub.add_parser("lrt", parents=[common], help="likelihood ratio statistic and p-values",
                       epilog="example: singular-lrt lrt --counts 360,340,300 --model t1:1")
    p.add_argument("--counts", required=True, help="n1,n2,n3")
    p.add_argument("--model", required=True, help="t1:<1|2|3> or t3")
    p.set_defaults(func=cmd_lrt)

    p = sub.add_parser("thresholds", parents=[common], help="chi-squared(1) adequacy thresholds",
                       epilog="example: singular-lrt thresholds --model t1 --epsilons 5e-3 --ns 30")
    p.add_argument("--model", required=True, choices=("t1", "t3"))
    p.add_argument("--epsilons", required=True, help="comma-separated total variation bounds")
    p.add_argument("--ns", default=PAPER_NS, help=f"comma-separated sample sizes (default {PAPER_NS})")
    p.add_argument("--paper-rounding", action="store_true", help="round to 3 significant figures")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("simulate", parents=[common], help="empirical CDF of simulated p-values",
                       epilog="example: singular-lrt simulate --model t3 --phi0 1 --n 1000 "
                              "--replicates 100000 --reference approx --seed 7")
    p.add_argument("--model", required=True, help="t1:<1|2|3> or t3")
    p.add_argument("--phi0", type=float, required=True)
    p.add_argument("--n", type=int, required=True, help="gene trees per replicate")
    p.add_argument("--replicates", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reference", choices=("approx", "chisq1"), default="approx")
    p.add_argument("--mu-source", choices=("true", "plugin"), default="plugin")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("density", parents=[common], help="tabulate a reference density",
                       epilog="example: singular-lrt density --spec t3:1,0.5236 --grid 0.01,20,200")
    p.add_argument("--spec", required=True, help="t1:<mu0> | t3:<mu0>,<alpha0> | chisq:<k> | mix")
    p.add_argument("--grid", required=True, help="lo,hi,steps")
    p.add_argument("--log", action="store_true", help="geometric instead of linear spacing")
    p.set_defaults(func=cmd_density)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except DomainError as exc:
        print(f"singular-lrt {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
