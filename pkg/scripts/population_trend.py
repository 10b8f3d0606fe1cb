"""Mean best distance, cost and vehicle count per (instance size, population size).

    python3 scripts/population_trend.py --pairs 5 10 --pop-sizes 20 100 --seeds 5

Prints a markdown table; ``--csv`` also writes the raw per-run rows.
"""

import argparse
import csv
import statistics
import time
from concurrent.futures import ProcessPoolExecutor

from mpdptw.ga import GaConfig, evolve
from mpdptw.instancegen import GenParams, generate_instance


def run(job):
    pairs, vehicles, inst_seed, pop, seed, generations = job
    inst = generate_instance(GenParams(pair_count=pairs, vehicle_count=vehicles, seed=inst_seed))
    t0 = time.perf_counter()
    res = evolve(inst, GaConfig(population_size=pop, generations=generations, rng_seed=seed))
    sol = res.best_solution
    return dict(n_prime=2 * pairs, k=vehicles, instance_seed=inst_seed, pop_size=pop, seed=seed,
                distance=sol.total_distance, cost=sol.total_cost, fitness=res.best_fitness,
                vehicles_used=sol.vehicles_used, feasible=int(sol.feasible),
                seconds=round(time.perf_counter() - t0, 3))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, nargs="+", default=[5, 10])
    ap.add_argument("--vehicles", type=int, default=2)
    ap.add_argument("--instances", type=int, default=3, help="instances per size")
    ap.add_argument("--pop-sizes", type=int, nargs="+", default=[20, 100])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--generations", type=int, default=30)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--csv", default=None)
    args = ap.parse_args()

    jobs = [(p, min(args.vehicles, p), 100 + i, n, s, args.generations)
            for p in args.pairs for i in range(args.instances) for n in args.pop_sizes for s in range(args.seeds)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)

    print("| N' | n | mean distance | mean cost | median cost | mean vehicles | feasible |")
    print("|---:|---:|---:|---:|---:|---:|---:|")
    for p in args.pairs:
        for n in args.pop_sizes:
            cell = [r for r in rows if r["n_prime"] == 2 * p and r["pop_size"] == n]
            print(f"| {2 * p} | {n} | {statistics.mean(r['distance'] for r in cell):.2f} "
                  f"| {statistics.mean(r['cost'] for r in cell):.2f} "
                  f"| {statistics.median(r['cost'] for r in cell):.2f} "
                  f"| {statistics.mean(r['vehicles_used'] for r in cell):.2f} "
                  f"| {sum(r['feasible'] for r in cell)}/{len(cell)} |")


if __name__ == "__main__":
    main()
