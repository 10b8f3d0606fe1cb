"""Command-line front end.

Exit codes: 0 feasible success, 1 input error, 2 infeasible best or
infeasible solution, 3 refused by the oracle size limit.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .ga import GaConfig, evolve
from .instancegen import GenParams, generate_instance, read_instance, read_solution, write_instance, write_solution
from .model import CONSTRAINTS, CROSS_VEHICLE, SAME_VEHICLE, Instance
from .oracle import DEFAULT_LIMIT, OracleLimitError, exact_solve

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_REFUSED = 0, 1, 2, 3
PAIRING_FLAGS = {"same": SAME_VEHICLE, "cross": CROSS_VEHICLE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunRecord:
    instance: str
    n_prime: int
    vehicles: int
    config: dict
    best_fitness: float
    best_cost: float
    best_distance: float
    vehicles_used: int
    feasible: bool
    history: list[float] = field(default_factory=list)
    duration: float | None = None

    def to_json(self) -> str:
        data = asdict(self)
        if self.duration is None:
            del data["duration"]
        return json.dumps(data, indent=2) + "\n"

    def csv_row(self, timing: bool) -> dict:
        row = {"instance": self.instance, "n_prime": self.n_prime, "k": self.vehicles}
        row.update(self.config)
        row.update(best_fitness=repr(self.best_fitness), best_cost=repr(self.best_cost),
                   best_distance=repr(self.best_distance), vehicles_used=self.vehicles_used,
                   feasible=int(self.feasible))
        if timing:
            row["duration"] = f"{self.duration:.3f}"
        return row


def run_ga(instance: Instance, config: GaConfig, timing: bool = False) -> tuple[RunRecord, object]:
    t0 = time.perf_counter()
    result = evolve(instance, config)
    elapsed = time.perf_counter() - t0
    sol = result.best_solution
    cfg = asdict(config)
    record = RunRecord(
        instance=instance.name,
        n_prime=instance.n_prime,
        vehicles=len(instance.fleet),
        config=cfg,
        best_fitness=result.best_fitness,
        best_cost=sol.total_cost,
        best_distance=sol.total_distance,
        vehicles_used=sol.vehicles_used,
        feasible=sol.feasible,
        history=list(result.history),
        duration=elapsed if timing else None,
    )
    return record, result


# ---------------------------------------------------------------------------
# subcommands


def _gen_params(args, seed: int | None = None, name: str | None = None) -> GenParams:
    return GenParams(
        pair_count=args.pairs,
        vehicle_count=args.vehicles,
        area=args.area,
        q_min=args.q_min,
        q_max=args.q_max,
        capacity=args.capacity,
        cost_rate_min=args.cost_min,
        cost_rate_max=args.cost_max,
        window_width_min=args.width_min,
        window_width_max=args.width_max,
        horizon=args.horizon,
        service_min=args.service_min,
        service_max=args.service_max,
        speed=args.speed,
        seed=args.seed if seed is None else seed,
        name=name,
    )


def cmd_generate(args) -> int:
    try:
        params = _gen_params(args, name=args.name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    inst = generate_instance(params)
    write_instance(inst, args.output)
    print(f"{args.output}: {inst.name} N'={inst.n_prime} pairs={len(inst.pairs)} K={len(inst.fleet)}")
    return EXIT_OK


def _config(args, seed: int | None = None, pop_size: int | None = None) -> GaConfig:
    try:
        return GaConfig(
            population_size=args.pop_size if pop_size is None else pop_size,
            generations=args.generations,
            crossover_rate=args.crossover_rate,
            mutation_rate=args.mutation_rate,
            copy_rate=args.copy_rate,
            tardiness_penalty=args.tardiness_penalty,
            infeasibility_penalty=args.infeasibility_penalty,
            rng_seed=args.seed if seed is None else seed,
            pairing=PAIRING_FLAGS[args.pairing],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    config = _config(args)
    record, result = run_ga(inst, config, timing=args.timing)
    write_solution(result.best_solution, inst, args.output)
    record_path = args.record or f"{args.output}.run.json"
    Path(record_path).write_text(record.to_json(), encoding="utf-8")
    sol = result.best_solution
    print(f"best fitness {result.best_fitness:.6f} cost {sol.total_cost:.6f} "
          f"distance {sol.total_distance:.6f} vehicles {sol.vehicles_used}/{len(inst.fleet)} "
          f"{'feasible' if sol.feasible else 'INFEASIBLE'}")
    return EXIT_OK if sol.feasible else EXIT_INFEASIBLE


def cmd_validate(args) -> int:
    inst = read_instance(args.instance)
    pairing = PAIRING_FLAGS[args.pairing] if args.pairing else None
    sol = read_solution(args.solution, inst, pairing)
    counts = sol.report.counts
    for name in CONSTRAINTS:
        print(f"{name} {counts[name]}")
    for v in sol.report.violations:
        print(f"  {v.constraint} V{v.vehicle} vertex {v.vertex}: {v.detail}")
    print(f"cost {sol.total_cost:.6f} distance {sol.total_distance:.6f}")
    print("feasible" if sol.feasible else "infeasible")
    return EXIT_OK if sol.feasible else EXIT_INFEASIBLE


def cmd_exact(args) -> int:
    inst = read_instance(args.instance)
    try:
        res = exact_solve(inst, limit=args.limit, pairing=PAIRING_FLAGS[args.pairing])
    except OracleLimitError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    print(f"explored {res.explored}")
    print(f"feasible_candidates {res.feasible_count}")
    if not res.feasible:
        print("infeasible: no candidate satisfies every constraint")
        return EXIT_INFEASIBLE
    print(f"optimal_cost {res.optimal_cost:.9f}")
    for k, route in enumerate(res.optimal_solution.routes, start=1):
        print(f"V{k}: " + " ".join(map(str, route)))
    if args.output:
        write_solution(res.optimal_solution, inst, args.output)
    return EXIT_OK


def _bench_cell(job):
    inst, config, timing = job
    record, _ = run_ga(inst, config, timing)
    return record


def cmd_bench(args) -> int:
    if args.instances:
        instances = [read_instance(p) for p in args.instances]
    else:
        if args.pairs is None:
            raise UsageError("bench needs --instances or --pairs/--vehicles")
        try:
            instances = [generate_instance(_gen_params(args, seed=args.seed + i))
                         for i in range(args.instance_count)]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    jobs = [
        (inst, _config(args, seed=args.seed + s, pop_size=n), args.timing)
        for inst in instances
        for n in args.pop_sizes
        for s in range(args.seeds)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(_bench_cell, jobs))
    else:
        records = [_bench_cell(j) for j in jobs]

    rows = [r.csv_row(args.timing) for r in records]
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    history_path = args.history or str(Path(args.output).with_suffix(".history.csv"))
    with open(history_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["instance", "pop_size", "seed", "generation", "best_fitness"])
        for r in records:
            for g, f in enumerate(r.history):
                writer.writerow([r.instance, r.config["population_size"], r.config["rng_seed"], g, repr(f)])
    print(f"{len(rows)} runs -> {args.output}, histories -> {history_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_gen_flags(p: argparse.ArgumentParser, required: bool) -> None:
    d = GenParams()
    p.add_argument("--pairs", type=int, required=required, default=None,
                   help="number of pickup/delivery pairs (N' = 2 * pairs)")
    p.add_argument("--vehicles", type=int, default=d.vehicle_count, help="fleet size K, at most N'/2 (default %(default)s)")
    p.add_argument("--area", type=float, default=d.area, help="side of the square holding the vertices (default %(default)s)")
    p.add_argument("--q-min", type=int, default=d.q_min, help="smallest request quantity (default %(default)s)")
    p.add_argument("--q-max", type=int, default=d.q_max, help="largest request quantity (default %(default)s)")
    p.add_argument("--capacity", type=float, default=d.capacity, help="capacity of every vehicle (default %(default)s)")
    p.add_argument("--cost-min", type=float, default=d.cost_rate_min, help="lower cost rate per distance (default %(default)s)")
    p.add_argument("--cost-max", type=float, default=d.cost_rate_max, help="upper cost rate per distance (default %(default)s)")
    p.add_argument("--width-min", type=float, default=d.window_width_min, help="narrowest time window (default %(default)s)")
    p.add_argument("--width-max", type=float, default=d.window_width_max, help="widest time window (default %(default)s)")
    p.add_argument("--horizon", type=float, default=d.horizon, help="planning horizon (default %(default)s)")
    p.add_argument("--service-min", type=float, default=d.service_min, help="shortest service time (default %(default)s)")
    p.add_argument("--service-max", type=float, default=d.service_max, help="longest service time (default %(default)s)")
    p.add_argument("--speed", type=float, default=d.speed, help="vehicle speed, distance per time unit (default %(default)s)")


def _add_ga_flags(p: argparse.ArgumentParser) -> None:
    d = GaConfig()
    p.add_argument("--pop-size", type=int, default=d.population_size, help="population size n (default %(default)s)")
    p.add_argument("--generations", type=int, default=d.generations, help="number of generations (default %(default)s)")
    p.add_argument("--crossover-rate", type=float, default=d.crossover_rate, help="share of offspring from crossover (default %(default)s)")
    p.add_argument("--mutation-rate", type=float, default=d.mutation_rate, help="share of offspring from mutation (default %(default)s)")
    p.add_argument("--copy-rate", type=float, default=d.copy_rate, help="share of offspring copied (default %(default)s)")
    p.add_argument("--tardiness-penalty", type=float, default=d.tardiness_penalty,
                   help="fitness penalty per time unit of lateness (default %(default)s)")
    p.add_argument("--infeasibility-penalty", type=float, default=d.infeasibility_penalty,
                   help="fitness penalty per capacity or precedence violation (default %(default)s)")
    p.add_argument("--timing", action="store_true", help="record wall-clock duration (makes outputs non-reproducible)")


def _add_common(p: argparse.ArgumentParser, pairing_default: str | None = "same") -> None:
    p.add_argument("--seed", type=int, default=0, help="random seed (default %(default)s)")
    p.add_argument("--pairing", choices=sorted(PAIRING_FLAGS), default=pairing_default,
                   help="same: pickup and delivery share a vehicle; cross: departure order only (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mpdptw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a random instance")
    _add_gen_flags(p, required=True)
    _add_common(p)
    p.add_argument("--name", default=None, help="instance name (default derived from the flags)")
    p.add_argument("-o", "--output", required=True, help="instance file to write")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run the genetic algorithm on an instance")
    p.add_argument("instance")
    _add_ga_flags(p)
    _add_common(p)
    p.add_argument("-o", "--output", required=True, help="solution file to write")
    p.add_argument("--record", default=None, help="run record JSON (default <output>.run.json)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check a solution file against an instance")
    p.add_argument("instance")
    p.add_argument("solution")
    _add_common(p, pairing_default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("exact", help="solve a small instance by exhaustive enumeration")
    p.add_argument("instance")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT, help="largest N' to enumerate (default %(default)s)")
    _add_common(p)
    p.add_argument("-o", "--output", default=None, help="optional solution file to write")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("bench", help="run a grid of GA configurations and write CSV")
    p.add_argument("--instances", nargs="*", default=None, help="instance files (otherwise generated)")
    _add_gen_flags(p, required=False)
    p.add_argument("--instance-count", type=int, default=1, help="instances to generate (default %(default)s)")
    _add_ga_flags(p)
    _add_common(p)
    p.add_argument("--pop-sizes", type=int, nargs="+", default=[20, 100], help="population sizes to try (default %(default)s)")
    p.add_argument("--seeds", type=int, default=10, help="runs per cell, seeds seed..seed+N-1 (default %(default)s)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default %(default)s)")
    p.add_argument("-o", "--output", required=True, help="results CSV")
    p.add_argument("--history", default=None, help="per-generation CSV (default <output stem>.history.csv)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
