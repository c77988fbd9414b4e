"""
Two-level error estimate.

The coarse solution u_h is compared with the Galerkin solution u_h' on the
once-refined mesh. ``e_fine = P u_h - u_h'`` lives on the fine mesh, and
``e_coarse`` is its nodal restriction to the coarse vertices. The regularizer
is the Euclidean square norm of the selected field's coefficient vector.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fem import Coefficients, FEMState, coefficients, discrete_state
from .mesh import RefinedMesh
from .sparse import DEFAULT_TOL

ERROR_FIELDS = ("fine", "coarse")


@dataclass(frozen=True, eq=False)
class ErrorEstimate:
    e_fine: np.ndarray
    e_coarse: np.ndarray
    theta: float
    field: str = "fine"


def prolongate(u_coarse, rm: RefinedMesh) -> np.ndarray:
    return rm.prolongate(u_coarse)


def fine_coefficients(rm: RefinedMesh, eta: Coefficients) -> np.ndarray:
    """Coarse element coefficients copied to their four children."""
    return coefficients(eta)[rm.parent_of]


def solve_fine(
    rm: RefinedMesh, eta: Coefficients, problem, tol: float = DEFAULT_TOL, max_iter=None, x0=None
) -> FEMState:
    """Galerkin solution on the refined mesh with inherited coefficients."""
    return discrete_state(rm.fine, fine_coefficients(rm, eta), problem.f, tol=tol, max_iter=max_iter, x0=x0)


def error_fields(u_coarse, u_fine, rm: RefinedMesh, field: str = "fine") -> ErrorEstimate:
    if field not in ERROR_FIELDS:
        raise ValueError(f"error field must be one of {ERROR_FIELDS}, got {field!r}")
    e_fine = rm.prolongate(u_coarse) - np.asarray(u_fine, dtype=float)
    e_coarse = rm.restrict(e_fine)
    e = e_fine if field == "fine" else e_coarse
    return ErrorEstimate(e_fine, e_coarse, float(e @ e), field)


@dataclass(frozen=True, eq=False)
class Evaluation:
    """Everything one optimizer step needs: both solves and the error estimate."""

    coarse: FEMState
    fine: FEMState
    error: ErrorEstimate

    @property
    def F(self) -> float:
        return self.coarse.F

    @property
    def theta(self) -> float:
        return self.error.theta

    def regularized(self, alpha: float) -> float:
        return self.F + alpha * self.theta


def evaluate(
    rm: RefinedMesh,
    eta: Coefficients,
    problem,
    tol: float = DEFAULT_TOL,
    max_iter=None,
    field: str = "fine",
    previous: Optional[Evaluation] = None,
) -> Evaluation:
    """Solve on both levels; ``previous`` supplies CG starting guesses."""
    x0c = previous.coarse.u if previous is not None else None
    x0f = previous.fine.u if previous is not None else None
    coarse = discrete_state(rm.coarse, eta, problem.f, tol=tol, max_iter=max_iter, x0=x0c)
    fine = solve_fine(rm, eta, problem, tol=tol, max_iter=max_iter, x0=x0f)
    return Evaluation(coarse, fine, error_fields(coarse.u, fine.u, rm, field))


def regularized_functional(rm: RefinedMesh, eta, problem, alpha: float, **kw) -> float:
    return evaluate(rm, eta, problem, **kw).regularized(alpha)
