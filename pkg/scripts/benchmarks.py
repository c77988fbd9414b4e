"""Headline F_hat values next to the published reference numbers.

    python3 scripts/benchmarks.py --n 49
"""
import argparse
import json

from hkreg.bench import REFERENCE_VALUES, run_benchmark
from hkreg.optimizer import OptimizerConfig
from hkreg.problems import get_problem

RUNS = {"A": 1e8, "B": 1e5}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=49)
    ap.add_argument("--pattern", default="alternating")
    ap.add_argument("--json", default=None, help="also write the reports here")
    args = ap.parse_args()

    reports = []
    for pid, alpha in RUNS.items():
        problem = get_problem(pid)
        report, _, _ = run_benchmark(problem, args.n, args.n, args.pattern, OptimizerConfig(c=problem.c, alpha=alpha))
        reports.append(report.to_dict())
        print(f"Problem {pid}: {report.n_elements} elements, alpha={alpha:g}, F_hat = {report.F_hat:.4f} "
              f"(one refinement: {report.refined_F_hat[1]:.4f})")
        for name, value in REFERENCE_VALUES[pid].items():
            print(f"    reference  {value:7.3f}  {name}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(reports, fh, indent=2)


if __name__ == "__main__":
    main()
