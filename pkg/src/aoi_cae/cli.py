"""Command-line entry point.

Exit codes: 0 success, 1 infeasible instance on ``solve``/``simulate``,
2 usage or input error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager, nullcontext

from .analysis import average_aoi, cae_coefficients, exact_joint_stationary, expected_cae, lower_bound_value
from .io import InstanceLoadError, load_instance, table1
from .model import SrpPolicy, expected_cost, stationary_distribution, success_probabilities, validate_instance
from .optimizer import solve_srp
from .simulator import SimConfig, run, run_trace, write_trace_csv
from .sweeps import DEFAULT_TRADEOFF, GridSpec, sweep_bounds, sweep_costs, tradeoff_scan
from .verify import verify_instance

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3


def _grid(axis, default):
    def add(parser):
        parser.add_argument(
            f"--{axis.replace('_', '')}",
            dest=axis,
            nargs=3,
            type=float,
            metavar=("START", "STOP", "COUNT"),
            default=default,
            help=f"inclusive linear grid for {axis} (default: {default[0]} {default[1]} {default[2]})",
        )

    return add


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoi-cae", description="Optimal stationary randomized sampling under cost and CAE constraints."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", help="instance JSON file (default: bundled table1.json)")
    common.add_argument("-o", "--output", help="write result here instead of standard output")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub.add_parser("solve", parents=[common], help="solve for the optimal SRP and print JSON")

    sim_opts = argparse.ArgumentParser(add_help=False)
    sim_opts.add_argument("--slots", type=int, default=1_000_000)
    sim_opts.add_argument("--seed", type=int, default=42)
    sim_opts.add_argument("--warmup", type=int, default=None, help="slots excluded from averages (default: 1%%)")

    p = sub.add_parser("simulate", parents=[common, sim_opts], help="Monte Carlo run; prints JSON")
    p.add_argument("--policy", nargs=3, type=float, metavar=("P_NS", "P_SR", "P_SP"), help="default: optimal SRP")
    p.add_argument("--equal-start", action="store_true", help="start with the estimate equal to the state")
    p.add_argument("--trace", metavar="CSV", help="also write the per-slot trace (at most 1e6 slots)")

    jobs = argparse.ArgumentParser(add_help=False)
    jobs.add_argument("--jobs", type=int, default=1, help="worker processes for cell evaluation")

    p = sub.add_parser("sweep-bounds", parents=[common, jobs], help="CSV over the (c0, d0) plane")
    _grid("c0", [0.0, 2.0, 81])(p)
    _grid("d0", [-1.5, 1.5, 61])(p)

    p = sub.add_parser("sweep-costs", parents=[common, jobs], help="CSV over the (c_sr, c_sp) plane")
    _grid("c_sr", [0.5, 0.9, 41])(p)
    _grid("c_sp", [0.5, 0.9, 41])(p)

    p = sub.add_parser("tradeoff", parents=[common, jobs], help="CSV of optimal (AoI, CAE) per source/channel triple")
    p.add_argument(
        "--triple",
        nargs=3,
        type=float,
        action="append",
        metavar=("P01", "P10", "P_CHNL"),
        help="repeatable; default is a built-in set of 16 triples",
    )

    sub.add_parser("verify", parents=[common, sim_opts], help="run the oracle cross-checks; exit 3 on failure")
    return parser


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _policy_dict(policy):
    if policy is None:
        return None
    return {"p_ns": policy.p_ns, "p_sr": policy.p_sr, "p_sp": policy.p_sp}


def _dump(obj, fh):
    fh.write(json.dumps(obj, indent=2) + "\n")


def cmd_solve(args, instance) -> int:
    sol = solve_srp(instance)
    out = {"status": sol.status.value, "policy": _policy_dict(sol.policy), "psi": sol.psi_star}
    if sol.feasible:
        pi1 = stationary_distribution(instance.source).pi1
        lb = lower_bound_value(sol.psi_star, instance.weights, pi1)
        out.update(
            aoi=sol.aoi, cae=sol.cae, cost=sol.cost, ratio=sol.aoi / lb, L_B=lb, binding=sorted(sol.binding)
        )
    out["warnings"] = validate_instance(instance).warnings
    with _sink(args.output) as fh:
        _dump(out, fh)
    return EXIT_OK if sol.feasible else EXIT_INFEASIBLE


def cmd_simulate(args, instance) -> int:
    if args.policy:
        policy = SrpPolicy(*args.policy)
    else:
        sol = solve_srp(instance)
        if not sol.feasible:
            print(f"instance is {sol.status.value}; pass --policy to simulate anyway", file=sys.stderr)
            return EXIT_INFEASIBLE
        policy = sol.policy
    config = SimConfig(slots=args.slots, seed=args.seed, warmup_slots=args.warmup, equal_start=args.equal_start)
    res = run(instance, policy, config)

    mu, nu = success_probabilities(instance.channel)
    dist = stationary_distribution(instance.source)
    psi = mu * policy.p_sr + nu * policy.p_sp
    closed = {"psi": psi, "cost": expected_cost(policy, instance.costs)}
    closed["cae"] = expected_cae(cae_coefficients(instance.penalty, dist), psi)
    if psi > 0:
        closed["aoi"] = average_aoi(psi, instance.weights, dist.pi1)
        closed["cae_exact_chain"] = exact_joint_stationary(instance.source, psi).expectation(instance.penalty)
    sim = {"psi": res.empirical_psi, "cost": res.avg_cost, "cae": res.avg_cae, "aoi": res.avg_aoi}
    delta = {k: sim[k] - closed[k] for k in ("psi", "cost", "cae", "aoi") if k in closed}
    if "cae_exact_chain" in closed:
        delta["cae_vs_exact_chain"] = res.avg_cae - closed["cae_exact_chain"]
    out = {
        "policy": _policy_dict(policy),
        "config": {"slots": config.slots, "seed": config.seed, "warmup": config.warmup},
        "result": res.to_dict(),
        "closed_form": closed,
        "delta": delta,
    }
    with _sink(args.output) as fh:
        _dump(out, fh)
    if args.trace:
        records = run_trace(instance, policy, config)
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            write_trace_csv(records, fh)
    return EXIT_OK


def _executor(jobs):
    return ProcessPoolExecutor(max_workers=jobs) if jobs and jobs > 1 else nullcontext(None)


def cmd_sweep(args, instance) -> int:
    with _executor(args.jobs) as ex:
        if args.command == "sweep-bounds":
            table = sweep_bounds(
                instance, GridSpec("c0", *args.c0[:2], int(args.c0[2])), GridSpec("d0", *args.d0[:2], int(args.d0[2])), ex
            )
        elif args.command == "sweep-costs":
            table = sweep_costs(
                instance,
                GridSpec("c_sr", *args.c_sr[:2], int(args.c_sr[2])),
                GridSpec("c_sp", *args.c_sp[:2], int(args.c_sp[2])),
                ex,
            )
        else:
            table = tradeoff_scan(args.triple or DEFAULT_TRADEOFF, instance, ex)
    with _sink(args.output) as fh:
        table.write_csv(fh)
    return EXIT_OK


def cmd_verify(args, instance) -> int:
    checks = verify_instance(instance, slots=args.slots, seed=args.seed, warmup=args.warmup)
    with _sink(args.output) as fh:
        for c in checks:
            fh.write(c.line() + "\n")
    failed = [c for c in checks if not c.passed]
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "sweep-bounds": cmd_sweep,
    "sweep-costs": cmd_sweep,
    "tradeoff": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        instance = load_instance(args.instance) if args.instance else table1()
    except FileNotFoundError:
        print(f"error: instance file not found: {args.instance}", file=sys.stderr)
        return EXIT_USAGE
    except InstanceLoadError as exc:
        for problem in exc.problems:
            print(f"error: {exc.path}: {problem}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, instance)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
