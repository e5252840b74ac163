"""Command-line entry point.

Exit codes: 0 success, 2 usage or configuration error, 3 I/O error,
4 property-suite failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from contextlib import contextmanager
from pathlib import Path
from unittest import mock

from . import model
from .errors import IncentiveError, InvalidConfigError, ParseError, SchemaError
from .greedy import (
    Criterion,
    optimality_gap_bound,
    solve,
    solve_until_inverse_efficiency,
    write_curve_csv,
    write_log_csv,
)
from .io import load_instance, save_instance, save_policy
from .model import Alternative, Individual, Instance
from .policies import compare, rows_to_dicts
from .scenario import ScenarioConfig, generate, load_config
from .stochastic import StochasticInstance, draw_latent, simulate_sequential

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_PROPERTY = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _threads() -> int:
    raw = os.environ.get("INCENTIVE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _read_instance(path) -> Instance:
    try:
        return load_instance(path)
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None
    except (ParseError, SchemaError) as exc:
        raise _Exit(EXIT_IO, f"{path}: {exc}") from None


class _Exit(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _write_text(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}") from None


def _check_budget(value):
    if value is not None and not value >= 0:
        raise _Exit(EXIT_USAGE, f"budget must be non-negative, got {value}")


def cmd_generate(args) -> int:
    try:
        config = load_config(args.config) if args.config else ScenarioConfig()
        if args.seed is not None:
            config.seed = args.seed
        if args.n is not None:
            config.n_individuals = args.n
        perfect, stoch = generate(config)
    except OSError as exc:
        raise _Exit(EXIT_USAGE, f"cannot read config: {exc}") from None
    except InvalidConfigError as exc:
        raise _Exit(EXIT_USAGE, f"invalid config: {exc}") from None
    try:
        save_instance(perfect, args.out)
        if args.planner_out:
            save_instance(stoch.base, args.planner_out)
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot write instance: {exc}") from None
    print(f"individuals: {len(perfect.individuals)}")
    return EXIT_OK


def cmd_solve(args, curve_only=False) -> int:
    if (args.budget is None) == (args.target_inverse_efficiency is None):
        raise _Exit(EXIT_USAGE, "give exactly one of --budget or --target-inverse-efficiency")
    _check_budget(args.budget)
    if args.target_inverse_efficiency is not None and not args.target_inverse_efficiency > 0:
        raise _Exit(EXIT_USAGE, "--target-inverse-efficiency must be positive")
    instance = _read_instance(args.instance)
    if args.budget is not None:
        result = solve(instance, args.budget)
    else:
        result = solve_until_inverse_efficiency(instance, args.target_inverse_efficiency,
                                                Criterion(args.criterion))
    try:
        if args.curve_out:
            write_curve_csv(result, args.curve_out)
        if not curve_only:
            if args.policy_out:
                save_policy(result.incentive_policy, args.policy_out)
            if args.log_out:
                write_log_csv(result, args.log_out)
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot write output: {exc}") from None
    split = result.split_incr_efficiency
    print(f"budget: {result.budget!r}")
    print(f"budget_used: {result.budget_used!r}")
    print(f"welfare_gain: {result.welfare_gain!r}")
    print(f"iterations: {len(result.iteration_log)}")
    print(f"split_efficiency: {'none' if split is None else repr(split)}")
    print(f"gap_bound: {optimality_gap_bound(result)!r}")
    return EXIT_OK


def cmd_compare(args) -> int:
    _check_budget(args.budget)
    instance = _read_instance(args.instance)
    result = solve(instance, args.budget)
    rows = rows_to_dicts(compare(instance, result, workers=_threads()))
    if args.out and str(args.out).endswith(".json"):
        _write_text(args.out, json.dumps(rows, indent=2) + "\n")
    else:
        fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
        try:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: (repr(v) if isinstance(v, float) else v)
                                 for k, v in row.items()})
        finally:
            if fh is not sys.stdout:
                fh.close()
    return EXIT_OK


def _realized(stoch: StochasticInstance) -> Instance:
    inds = []
    for ind in stoch.base.individuals:
        eps = stoch.latent[ind.individual_id]
        inds.append(Individual(ind.individual_id, tuple(
            Alternative(a.alt_id, a.utility + e, a.social) for a, e in zip(ind.alternatives, eps))))
    return Instance(tuple(inds), stoch.base.money_unit, stoch.base.welfare_unit)


def cmd_simulate(args) -> int:
    _check_budget(args.budget)
    if (args.instance is None) == (args.config is None):
        raise _Exit(EXIT_USAGE, "give exactly one of an instance path or --config")
    if args.instance is not None:
        if args.mu is None or not args.mu > 0:
            raise _Exit(EXIT_USAGE, "--mu must be given and positive with an instance file")
        base = _read_instance(args.instance)
        stoch = StochasticInstance(base, args.mu, draw_latent(base, args.mu, args.seed))
    else:
        try:
            config = load_config(args.config)
            config.seed = args.seed
            if args.mu is not None:
                config.mu = args.mu
            _, stoch = generate(config)
        except OSError as exc:
            raise _Exit(EXIT_USAGE, f"cannot read config: {exc}") from None
        except InvalidConfigError as exc:
            raise _Exit(EXIT_USAGE, f"invalid config: {exc}") from None
    report = simulate_sequential(stoch, args.budget)
    perfect = solve(_realized(stoch), args.budget)
    n = max(len(stoch.base.individuals), 1)
    summary = {
        "perfect": {
            "budget_spent": perfect.budget_used,
            "welfare_gain": perfect.welfare_gain,
            "incentivized_share": len(perfect.positions) / n,
        },
        "imperfect": {
            "budget_spent": report.budget_spent,
            "welfare_gain": report.welfare_gain,
            "incentives_proposed": report.n_proposed,
            "incentives_accepted": report.n_accepted,
            "acceptance_rate": report.acceptance_rate,
            "incentivized_share": len(report.granted) / n,
        },
    }
    for side in ("perfect", "imperfect"):
        for k, v in summary[side].items():
            print(f"{side}.{k}: {v!r}")
    if args.out:
        payload = {"summary": summary, "report": report.to_dict()}
        _write_text(args.out, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def _reversed_tie_break(alt, transfer):
    return (alt.utility + transfer, -alt.social, alt.alt_id)


@contextmanager
def _fault(name):
    if name == "tie-break":
        with mock.patch.object(model, "_choice_key", _reversed_tie_break):
            yield
    else:
        yield


def cmd_verify(args) -> int:
    from .verification import run_suite

    if args.n_instances < 0 or args.max_individuals < 1 or args.max_alts < 1:
        raise _Exit(EXIT_USAGE, "counts must be positive")
    with _fault(args.inject_fault):
        report = run_suite(args.n_instances, args.max_individuals, args.max_alts, args.seed)
    print(f"instances: {report.instances}")
    for name in report.checks:
        status = "ok" if not report.violations[name] else "FAIL"
        print(f"{name}: {report.checks[name]} checks, "
              f"{report.violations[name]} violations [{status}]")
    return EXIT_OK if report.ok else EXIT_PROPERTY


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="incentive-mckp",
                description="Budget-constrained personalized incentives.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="draw a synthetic mode-choice instance")
    g.add_argument("--config", help="scenario config JSON (defaults built in)")
    g.add_argument("--out", required=True)
    g.add_argument("--planner-out", help="also write the deterministic-utility instance")
    g.add_argument("--seed", type=int)
    g.add_argument("--n", type=int, help="override the number of individuals")
    g.set_defaults(func=cmd_generate)

    for name in ("solve", "curve"):
        s = sub.add_parser(name, help="run the greedy allocation" if name == "solve"
                           else "write only the welfare curve")
        s.add_argument("instance")
        s.add_argument("--budget", type=float)
        s.add_argument("--target-inverse-efficiency", type=float)
        s.add_argument("--criterion", choices=[c.value for c in Criterion],
                       default=Criterion.INCREMENTAL.value)
        s.add_argument("--curve-out")
        if name == "solve":
            s.add_argument("--policy-out")
            s.add_argument("--log-out")
            s.set_defaults(func=cmd_solve)
        else:
            s.set_defaults(func=lambda a: cmd_solve(a, curve_only=True))

    c = sub.add_parser("compare", help="evaluate the four policy families")
    c.add_argument("instance")
    c.add_argument("--budget", type=float, required=True)
    c.add_argument("--out", help=".json for JSON, anything else for CSV (default stdout)")
    c.set_defaults(func=cmd_compare)

    m = sub.add_parser("simulate-imperfect", help="sequential offers without the noise terms")
    m.add_argument("instance", nargs="?", help="instance whose utilities are deterministic parts")
    m.add_argument("--config", help="scenario config to generate from instead")
    m.add_argument("--budget", type=float, required=True)
    m.add_argument("--mu", type=float)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out")
    m.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run the randomized property suite")
    v.add_argument("--n-instances", type=int, default=200)
    v.add_argument("--max-individuals", type=int, default=6)
    v.add_argument("--max-alts", type=int, default=5)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--inject-fault", choices=["none", "tie-break"], default="none",
                   help="negative control: run with a deliberately broken choice rule")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Exit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except IncentiveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
