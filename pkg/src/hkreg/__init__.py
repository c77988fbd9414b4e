"""Greedy hard-kill topology optimization for heat conduction, regularized by a two-level error estimate."""
from .bench import alpha_sweep, f_hat, multilevel_evaluate, run_benchmark
from .estimator import evaluate
from .fem import MaterialDistribution, discrete_state
from .mesh import Mesh, build_structured_mesh, refine_uniform, tag_boundary
from .optimizer import OptimizerConfig, greedy_optimize
from .problems import PROBLEM_A, PROBLEM_B, get_problem

__version__ = "0.1.0"
