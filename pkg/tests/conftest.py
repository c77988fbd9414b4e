import numpy as np
import pytest

from hkreg.mesh import build_structured_mesh, refine_uniform, tag_boundary
from hkreg.problems import PROBLEM_A, PROBLEM_B

# -lap u = 1 on the unit square, u = 0 on the boundary: integral of u.
# Frozen from solid_compliance_series(10_000) below.
SOLID_COMPLIANCE = 0.03514425373878089


def solid_compliance_series(terms=10_000):
    """Double sine series for the compliance of the solid unit square."""
    k = 2.0 * np.arange(terms) + 1.0
    k2 = k * k
    total = 0.0
    for m2 in k2:
        total += np.sum(1.0 / (m2 * k2 * (m2 + k2)))
    return 64.0 / np.pi**6 * total


def tagged(nx, ny=None, pattern="alternating", problem=PROBLEM_B):
    return tag_boundary(build_structured_mesh(nx, nx if ny is None else ny, pattern), problem)


def refined(nx, ny=None, pattern="alternating", problem=PROBLEM_B):
    return refine_uniform(tagged(nx, ny, pattern, problem))


def random_layout(rng, n, epsilon=1e-3, solid_fraction=0.6):
    return np.where(rng.random(n) < solid_fraction, 1.0, epsilon)


def central_difference(fun, w, delta=1e-6):
    """Central differences of a scalar function of the element coefficients."""
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    for i in range(w.size):
        wp, wm = w.copy(), w.copy()
        wp[i] += delta
        wm[i] -= delta
        out[i] = (fun(wp) - fun(wm)) / (2.0 * delta)
    return out


def max_rel_error(approx, exact):
    """Infinity-norm relative error."""
    return float(np.max(np.abs(approx - exact)) / np.max(np.abs(exact)))


@pytest.fixture(params=[PROBLEM_A, PROBLEM_B], ids=["A", "B"])
def problem(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
