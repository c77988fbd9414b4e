"""F_hat of optimized designs evaluated on successively refined meshes.

Compares the unregularized greedy design with the regularized one.

    python3 scripts/refinement_study.py --n 49 --levels 2
"""
import argparse

from hkreg.bench import run_benchmark
from hkreg.optimizer import OptimizerConfig
from hkreg.problems import get_problem


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=49)
    ap.add_argument("--pattern", default="alternating")
    ap.add_argument("--levels", type=int, default=2)
    ap.add_argument("--alpha", type=float, default=1e5)
    ap.add_argument("--epsilon", type=float, default=1e-3)
    ap.add_argument("--p-s", type=int, default=None)
    args = ap.parse_args()

    print(f"{'problem':7} {'alpha':>8}  " + "  ".join(f"level {k:<2}" for k in range(args.levels + 1)) + "  change 0->1")
    for pid in ("A", "B"):
        problem = get_problem(pid)
        for alpha in (0.0, args.alpha):
            cfg = OptimizerConfig(c=problem.c, alpha=alpha, epsilon=args.epsilon, p_s=args.p_s)
            report, _, _ = run_benchmark(problem, args.n, args.n, args.pattern, cfg, levels=args.levels)
            seq = report.refined_F_hat
            print(f"{pid:7} {alpha:8g}  " + "  ".join(f"{v:8.4f}" for v in seq) + f"  {report.refinement_change(1):+.1%}")


if __name__ == "__main__":
    main()
