"""Command-line interface.

Exit codes: 0 success, 1 usage or input error (including a dataset with no
events), 2 numerical failure, 3 fit did not converge.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from fracsurv import __version__
from fracsurv.errors import DomainError, FracSurvError, InvalidParamsError, NoEventsError
from fracsurv.estimation import FitConfig, fit
from fracsurv.files import (
    DatasetError,
    FitReport,
    read_dataset,
    write_curves,
    write_dataset,
    write_steps,
)
from fracsurv.model import ModelParams, classify_hazard_shape, curve_table, is_valid_density
from fracsurv.nonparam import na_survival, nelson_aalen
from fracsurv.simulate import Administrative, CohortSpec, UniformCensoring, make_cohort

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_NOT_CONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_params(p, required=True):
    p.add_argument("--alpha", type=float, required=required)
    p.add_argument("--lambda", dest="lam", type=float, required=required)
    p.add_argument("--mu", type=float, required=required)
    p.add_argument("--tmax", type=float, required=required)


def _params(args) -> ModelParams:
    return ModelParams(args.alpha, args.lam, args.mu, args.tmax)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracsurv", description="Fractional survival model toolkit")
    parser.add_argument("--version", action="version", version=f"fracsurv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="maximum-likelihood fit of a time,event CSV")
    p.add_argument("dataset")
    p.add_argument("--out", help="write the JSON fit report here")
    p.add_argument("--restarts", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=4000)

    p = sub.add_parser("curves", help="tabulate cdf, survival, pdf, hazard, cumulative hazard")
    _add_params(p, required=False)
    p.add_argument("--report", help="take parameters from a fit report")
    p.add_argument("--grid", type=int, default=512, help="number of interior grid points")
    p.add_argument("--times", help="explicit comma-separated evaluation times")
    p.add_argument("--truncate", type=float, help="largest time to tabulate")
    p.add_argument("--out", required=True)

    p = sub.add_parser("na", help="Nelson-Aalen cumulative hazard and survival")
    p.add_argument("dataset")
    p.add_argument("--truncate", type=float)
    p.add_argument("--out", required=True)

    p = sub.add_parser("classify", help="print the hazard shape label")
    _add_params(p)
    p.add_argument("--grid", type=int, default=400)

    p = sub.add_parser("simulate", help="write a simulated time,event CSV")
    _add_params(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--censor-at", type=float, help="administrative censoring time")
    group.add_argument("--censor-uniform", help="independent uniform censoring 'lo,hi'")
    p.add_argument("--out", required=True)
    return parser


def cmd_fit(args) -> int:
    data = read_dataset(args.dataset)
    cfg = FitConfig(n_restarts=args.restarts, seed=args.seed, max_iter=args.max_iter)
    result = fit(data, cfg)
    report = FitReport.from_fit(result, data, cfg, args.dataset)
    if args.out:
        report.write(args.out)
    print(report.table())
    print(f"log-likelihood {result.log_likelihood:.4f}  converged {result.converged}")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_curves(args) -> int:
    if args.report:
        params = FitReport.read(args.report).model_params()
    elif None in (args.alpha, args.lam, args.mu, args.tmax):
        raise UsageError("give --alpha, --lambda, --mu and --tmax, or --report")
    else:
        params = _params(args)
    end = params.t_max
    if args.truncate is not None:
        if args.truncate <= 0:
            raise UsageError("--truncate must be positive; the grid would be empty")
        if args.truncate > params.t_max:
            print(f"warning: --truncate {args.truncate} exceeds T={params.t_max}; clipped",
                  file=sys.stderr)
        end = min(args.truncate, params.t_max)
    if args.times:
        times = np.array(_floats(args.times))
        times = times[times <= end]
    else:
        if args.grid < 1:
            raise UsageError("--grid must be at least 1")
        times = np.linspace(0.0, end, args.grid + 2)[1:-1]
    if times.size == 0:
        raise UsageError("empty evaluation grid")
    write_curves(args.out, curve_table(params, times))
    return EXIT_OK


def cmd_na(args) -> int:
    data = read_dataset(args.dataset)
    h = nelson_aalen(data)
    if args.truncate is not None:
        keep = h.times <= args.truncate
        h = type(h)(h.times[keep], h.values[keep], None if h.variances is None else h.variances[keep])
    write_steps(args.out, h, na_survival(h))
    return EXIT_OK


def cmd_classify(args) -> int:
    params = _params(args)
    validity = is_valid_density(params)
    if not validity:
        print(f"error: not a valid density: {validity.reason} at t={validity.first_violation}",
              file=sys.stderr)
        return EXIT_NUMERIC
    print(classify_hazard_shape(params, grid_size=args.grid))
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.censor_at is not None:
        censoring = Administrative(args.censor_at)
    elif args.censor_uniform:
        bounds = _floats(args.censor_uniform)
        if len(bounds) != 2:
            raise UsageError("--censor-uniform takes 'lo,hi'")
        censoring = UniformCensoring(*bounds)
    else:
        censoring = None
    spec = CohortSpec(_params(args), args.n, censoring, args.seed)
    write_dataset(args.out, make_cohort(spec))
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "curves": cmd_curves,
    "na": cmd_na,
    "classify": cmd_classify,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, NoEventsError, InvalidParamsError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FracSurvError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
