"""Final F_hat against the regularization weight for both problems.

    python3 scripts/alpha_sweep.py --n 35 --out out/alpha_sweep.csv
"""
import argparse
import csv
import time
from pathlib import Path

from hkreg.bench import alpha_sweep
from hkreg.optimizer import OptimizerConfig
from hkreg.problems import get_problem

DEFAULT_ALPHAS = [0.0, 1e-5, 1e-2, 1.0, 1e2, 1e4, 1e5, 1e6, 1e8, 1e10, 1e12]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=35, help="cells per side")
    ap.add_argument("--pattern", default="alternating")
    ap.add_argument("--problems", default="A,B")
    ap.add_argument("--alphas", default=",".join(f"{a:g}" for a in DEFAULT_ALPHAS))
    ap.add_argument("--out", default="out/alpha_sweep.csv")
    args = ap.parse_args()
    alphas = [float(a) for a in args.alphas.split(",")]

    rows = []
    for pid in args.problems.split(","):
        problem = get_problem(pid)
        t0 = time.perf_counter()
        reports = alpha_sweep(problem, args.n, args.n, args.pattern, alphas, OptimizerConfig(c=problem.c))
        for r in reports:
            refined = r.refined_F_hat[1] if r.levels else float("nan")
            rows.append([problem.id, r.n_elements, r.alpha, r.F_hat, refined, r.error or ""])
            print(f"{problem.id} alpha={r.alpha:<8g} F_hat={r.F_hat:8.4f} refined={refined:8.4f} {r.error or ''}")
        print(f"problem {problem.id}: {time.perf_counter() - t0:.1f} s")

    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["problem", "n_elements", "alpha", "F_hat", "F_hat_refined", "error"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
