"""Command-line entry point: ``greencell run|solve|oracle|gen|dump``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

from .errors import GreencellError
from .formulation import build_min_power, build_p3, surrogate_nonrenew_total
from .harness import PROFILES, emit_csv, load_config, run_experiment, summary_table, trial_scenario, ExperimentConfig
from .milp import SolverConfig
from .power import PowerParams, RenewableRealization, WindModel, load_renewables, p_nonrenew_total, sample_renewables, save_renewables
from .scenario import load_scenario, save_scenario
from .schemes import SCHEMES, oracle_exact, run_scheme


def _solver_from_args(args) -> SolverConfig:
    kw = {"backend": args.backend}
    if args.time_limit is not None:
        kw["time_limit_s"] = args.time_limit
    if args.node_limit is not None:
        kw["node_limit"] = args.node_limit
    return SolverConfig(**kw)


def _renewables(args, scenario) -> RenewableRealization:
    if args.renewables:
        renew = load_renewables(args.renewables)
        if len(renew) != scenario.num_stations:
            raise GreencellError("renewables length does not match the scenario's station count")
        return renew
    return RenewableRealization.zeros(scenario.num_stations)


def cmd_run(args) -> int:
    config = load_config(args.config)
    if args.out:
        config = replace(config, output=args.out)
    if args.workers:
        config = replace(config, workers=args.workers)
    report = run_experiment(config)
    if config.output:
        emit_csv(report, config.output)
    print(summary_table(report))
    return 0


def cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    renew = _renewables(args, scenario)
    params = PowerParams()
    out = run_scheme(args.scheme, scenario, params, renew, _solver_from_args(args))
    result = {
        "scheme": args.scheme,
        "decision": out.decision.to_dict(),
        "nonrenew_w": p_nonrenew_total(scenario, params, out.decision, renew),
        "surrogate_w": surrogate_nonrenew_total(scenario, params, out.decision, renew),
        "nodes": out.nodes,
    }
    _emit_json(result, args.out)
    return 0


def cmd_oracle(args) -> int:
    scenario = load_scenario(args.scenario)
    renew = _renewables(args, scenario)
    decision, value = oracle_exact(scenario, PowerParams(), renew, args.objective, args.budget)
    _emit_json({"objective": args.objective, "value_w": value, "decision": decision.to_dict()}, args.out)
    return 0


def cmd_gen(args) -> int:
    config = ExperimentConfig(trials=1, scenario=args.profile, base_seed=args.seed)
    scenario = trial_scenario(config, args.seed)
    if args.turbine_radius is not None:
        scenario = scenario.with_turbine_radius(args.turbine_radius)
    save_scenario(scenario, args.out)
    if args.renewables_out:
        save_renewables(sample_renewables(WindModel(), scenario, args.seed), args.renewables_out)
    return 0


def cmd_dump(args) -> int:
    scenario = load_scenario(args.scenario)
    params = PowerParams()
    if args.model == "p3":
        model = build_p3(scenario, params, _renewables(args, scenario))
    else:
        model = build_min_power(scenario, params)
    text = model.to_lp_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _emit_json(obj, path) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="greencell", description="Carbon-aware small-cell switching planner")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte-Carlo comparison of the schemes")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="CSV path (overrides the config's output)")
    run.add_argument("--workers", type=int)
    run.set_defaults(func=cmd_run)

    def solver_opts(sp):
        sp.add_argument("--backend", choices=["bnb", "highs"], default="bnb")
        sp.add_argument("--time-limit", type=float)
        sp.add_argument("--node-limit", type=int)

    solve = sub.add_parser("solve", help="run one scheme on a scenario")
    solve.add_argument("--scenario", required=True)
    solve.add_argument("--renewables", help="JSON {\"p_renew_w\": [...]}; zeros if omitted")
    solve.add_argument("--scheme", choices=SCHEMES, required=True)
    solve.add_argument("--out")
    solver_opts(solve)
    solve.set_defaults(func=cmd_solve)

    oracle = sub.add_parser("oracle", help="exhaustive optimum on a small scenario")
    oracle.add_argument("--scenario", required=True)
    oracle.add_argument("--objective", choices=["p1", "p2"], default="p1")
    oracle.add_argument("--renewables")
    oracle.add_argument("--budget", type=int, default=10**7)
    oracle.add_argument("--out")
    oracle.set_defaults(func=cmd_oracle)

    gen = sub.add_parser("gen", help="write a generated scenario as JSON")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--profile", choices=sorted(PROFILES), default="reference")
    gen.add_argument("--turbine-radius", type=float)
    gen.add_argument("--renewables-out", help="also sample wind power for this seed")
    gen.set_defaults(func=cmd_gen)

    dump = sub.add_parser("dump", help="print a model in LP format")
    dump.add_argument("--scenario", required=True)
    dump.add_argument("--model", choices=["p3", "min-power"], default="p3")
    dump.add_argument("--renewables")
    dump.add_argument("--out")
    dump.set_defaults(func=cmd_dump)
    return p


def main(argv=None) -> int:
    level = os.environ.get("GREENCELL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GreencellError, OSError, ValueError) as exc:
        print(f"greencell: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
