"""Best-so-far fitness per generation for several population sizes on one instance.

    python3 scripts/convergence.py --pairs 10 --pop-sizes 20 100 --out convergence.png

Writes ``<out stem>.csv``; the plot needs matplotlib (``pip install .[plots]``).
"""

import argparse
import csv
from pathlib import Path

from mpdptw.ga import GaConfig, evolve
from mpdptw.instancegen import GenParams, generate_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=10)
    ap.add_argument("--vehicles", type=int, default=2)
    ap.add_argument("--instance-seed", type=int, default=100)
    ap.add_argument("--pop-sizes", type=int, nargs="+", default=[20, 100])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--generations", type=int, default=50)
    ap.add_argument("--out", default="convergence.png")
    args = ap.parse_args()

    inst = generate_instance(GenParams(pair_count=args.pairs, vehicle_count=args.vehicles, seed=args.instance_seed))
    curves = {}
    for n in args.pop_sizes:
        for s in range(args.seeds):
            curves[n, s] = evolve(inst, GaConfig(population_size=n, generations=args.generations, rng_seed=s)).history

    out = Path(args.out)
    with open(out.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pop_size", "seed", "generation", "best_fitness"])
        for (n, s), hist in curves.items():
            w.writerows((n, s, g, repr(f)) for g, f in enumerate(hist))
    print(f"histories -> {out.with_suffix('.csv')}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping the plot")
        return
    fig, ax = plt.subplots(figsize=(7, 4))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, n in enumerate(args.pop_sizes):
        for s in range(args.seeds):
            ax.plot(curves[n, s], color=colors[i % len(colors)], alpha=0.7, label=f"n={n}" if s == 0 else None)
    ax.set_xlabel("generation")
    ax.set_ylabel("best fitness so far")
    ax.set_yscale("log")
    ax.set_title(f"{inst.name}: N'={inst.n_prime}, K={len(inst.fleet)}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print(f"plot -> {out}")


if __name__ == "__main__":
    main()
