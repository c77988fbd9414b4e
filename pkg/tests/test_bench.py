import json

import numpy as np
import pytest

from hkreg.bench import (
    MAX_LEVELS,
    REFERENCE_VALUES,
    alpha_sweep,
    f_hat,
    multilevel_evaluate,
    run_benchmark,
)
from hkreg.fem import MaterialDistribution
from hkreg.optimizer import OptimizerConfig
from hkreg.problems import PROBLEM_A, PROBLEM_B, get_problem

from conftest import SOLID_COMPLIANCE, random_layout, tagged


@pytest.fixture(scope="module")
def regularized_runs():
    """Greedy designs at alpha = 1e5 and alpha = 0, evaluated on two refinements."""
    out = {}
    for problem, n in ((PROBLEM_A, 35), (PROBLEM_B, 49)):
        for alpha in (0.0, 1e5):
            report, _, _ = run_benchmark(problem, n, n, "alternating", OptimizerConfig(c=problem.c, alpha=alpha), levels=2)
            out[problem.id, alpha] = report
    return out


def test_problem_table():
    assert get_problem("a").c == 0.4
    assert get_problem("B").c == 0.5
    assert PROBLEM_A.f == PROBLEM_B.f == 1.0
    with pytest.raises(ValueError):
        get_problem("C")


def test_f_hat_of_solid_is_one(problem):
    m = tagged(6, problem=problem)
    assert f_hat(m, np.ones(m.n_elements), problem) == 1.0


def test_f_hat_grows_with_any_removal(rng, problem):
    m = tagged(6, problem=problem)
    for _ in range(5):
        assert f_hat(m, random_layout(rng, m.n_elements), problem) > 1.0


def test_solid_levels_increase_toward_series():
    m = tagged(8, pattern="right")
    levels = multilevel_evaluate(np.ones(m.n_elements), m, PROBLEM_B, levels=3, tol=1e-12)
    F = [lv.F_h for lv in levels]
    assert [lv.n_elements for lv in levels] == [128, 512, 2048, 8192]
    assert all(a < b for a, b in zip(F, F[1:]))
    assert F[-1] < SOLID_COMPLIANCE
    assert all(lv.F_hat == 1.0 for lv in levels)


def test_checkerboard_jumps_under_refinement():
    m = tagged(16, pattern="right")
    i = np.floor(m.barycenters * 16).astype(int)
    eta = MaterialDistribution(np.where(i.sum(axis=1) % 2 == 0, 1.0, 1e-3), 1e-3)
    lv = multilevel_evaluate(eta, m, PROBLEM_B, levels=1)
    block = MaterialDistribution(np.where(m.barycenters[:, 1] < 0.5, 1.0, 1e-3), 1e-3)
    lb = multilevel_evaluate(block, m, PROBLEM_B, levels=1)
    jump = lv[1].F_hat / lv[0].F_hat
    assert jump > 1.5
    assert jump - 1 > 10 * abs(lb[1].F_hat / lb[0].F_hat - 1)


def test_level_guard():
    m = tagged(2)
    with pytest.raises(ValueError):
        multilevel_evaluate(np.ones(m.n_elements), m, PROBLEM_B, levels=MAX_LEVELS + 1)


@pytest.mark.parametrize("pid", ["A", "B"])
def test_regularized_design_settles_after_one_refinement(regularized_runs, pid):
    seq = regularized_runs[pid, 1e5].refined_F_hat
    assert abs(seq[2] - seq[1]) / seq[1] < 0.1


@pytest.mark.parametrize("pid", ["A", "B"])
def test_baseline_is_worse_on_refined_mesh(regularized_runs, pid):
    base = regularized_runs[pid, 0.0]
    reg = regularized_runs[pid, 1e5]
    assert base.refined_F_hat[1] > reg.refined_F_hat[1]
    assert base.F_hat > reg.F_hat


def test_reports_are_physical(regularized_runs):
    for report in regularized_runs.values():
        assert report.F_hat >= 1.0
        assert all(f >= 1.0 for f in report.refined_F_hat)
        assert report.volume_fraction >= get_problem(report.problem).c - 1e-12


def test_report_carries_external_references(regularized_runs):
    d = regularized_runs["B", 1e5].to_dict()
    assert d["references"] == REFERENCE_VALUES["B"]
    assert 8.256 in d["references"].values()
    json.dumps(d)


def test_benchmark_is_reproducible():
    cfg = OptimizerConfig(c=0.5, alpha=1e3)
    a, _, _ = run_benchmark(PROBLEM_B, 10, 10, "left", cfg)
    b, _, _ = run_benchmark(PROBLEM_B, 10, 10, "left", cfg)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)


def test_alpha_sweep_records_failures():
    # an iteration cap of 1 makes every solve fail
    reports = alpha_sweep(PROBLEM_A, 6, 6, "right", [0.0, 1e3], OptimizerConfig(c=0.4, max_iter=1))
    assert [r.alpha for r in reports] == [0.0, 1e3]
    assert all(r.error for r in reports)


def test_alpha_sweep_runs_every_alpha():
    reports = alpha_sweep(PROBLEM_A, 8, 8, "alternating", [0.0, 1e4, 1e8], OptimizerConfig(c=0.4))
    assert all(r.error is None for r in reports)
    assert all(len(r.refined_F_hat) == 2 for r in reports)
    assert len({r.F_hat for r in reports}) > 1


def test_empty_alpha_list():
    with pytest.raises(ValueError):
        alpha_sweep(PROBLEM_A, 4, 4, "right", [], OptimizerConfig(c=0.4))
