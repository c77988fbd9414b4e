"""
Greedy hard-kill material removal.

Start from a fully solid design and repeatedly switch the batch of solid
elements with the smallest predicted functional increase to the filler
material, until the solid area fraction reaches the target.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .estimator import Evaluation, evaluate
from .fem import DEFAULT_EPSILON, MaterialDistribution
from .mesh import Mesh, RefinedMesh
from .sensitivity import SensitivityVector, full_theorem_sensitivities, unregularized_sensitivity
from .sparse import DEFAULT_TOL, SolverError

log = logging.getLogger(__name__)


class OptimizationError(RuntimeError):
    def __init__(self, step: int, cause: Exception):
        super().__init__(f"solver failure at step {step}: {cause}")
        self.step = step


@dataclass(frozen=True)
class OptimizerConfig:
    c: float
    p_s: Optional[int] = None
    alpha: float = 0.0
    epsilon: float = DEFAULT_EPSILON
    cg_tol: float = DEFAULT_TOL
    max_iter: Optional[int] = None
    variant: str = "compromise"

    def __post_init__(self):
        if not 0.0 < self.c <= 1.0:
            raise ValueError(f"target fraction c must lie in (0, 1], got {self.c}")
        if self.p_s is not None and self.p_s < 1:
            raise ValueError(f"p_s must be at least 1, got {self.p_s}")
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")

    def batch_size(self, n_elements: int) -> int:
        if self.p_s is not None:
            return self.p_s
        return max(1, round(0.01 * n_elements))


@dataclass(frozen=True)
class StepRecord:
    step: int
    volume_fraction: float
    F_h: float
    Theta_h: float
    F_hat: float
    removed: tuple = ()


@dataclass
class OptimizationHistory:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, k):
        return self.records[k]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def removal_order(self) -> list:
        return [i for r in self.records for i in r.removed]


def volume_fraction(mesh: Mesh, eta: MaterialDistribution) -> float:
    solid = eta.solid if isinstance(eta, MaterialDistribution) else np.asarray(eta) == 1.0
    return float(mesh.elem_area[solid].sum() / mesh.elem_area.sum())


def predicted_increase(s, epsilon: float) -> np.ndarray:
    """First-order change of the functional when eta_i drops from 1 to epsilon."""
    s = s.s if isinstance(s, SensitivityVector) else np.asarray(s)
    return (epsilon - 1.0) * s


def select_removals(s, eta: MaterialDistribution, p_s: int, epsilon: Optional[float] = None) -> list:
    """Up to ``p_s`` solid elements with the smallest predicted increase.

    Ties go to the lower element id.
    """
    eps = eta.epsilon if epsilon is None else epsilon
    candidates = np.flatnonzero(eta.solid)
    if candidates.size == 0:
        raise ValueError("no solid elements left to remove")
    delta = predicted_increase(s, eps)[candidates]
    order = np.argsort(delta, kind="stable")
    return candidates[order[:p_s]].tolist()


def _truncate_batch(ids, mesh: Mesh, vf: float, c: float) -> list:
    total = mesh.elem_area.sum()
    keep = []
    for i in ids:
        after = vf - mesh.elem_area[i] / total
        if after < c - 1e-12:
            break
        keep.append(i)
        vf = after
    return keep


def greedy_optimize(
    mesh: Mesh,
    rm: RefinedMesh,
    problem,
    cfg: OptimizerConfig,
    callback: Optional[Callable[[StepRecord, MaterialDistribution], None]] = None,
):
    """Run the hard-kill loop; returns the final design and per-step history.

    ``mesh`` must be the tagged coarse mesh and ``rm`` its refinement. One
    record is logged per evaluated design, starting with the solid one.
    """
    if rm.coarse is not mesh:
        raise ValueError("rm must be the refinement of mesh")
    eta = MaterialDistribution.full(mesh.n_elements, cfg.epsilon)
    p_s = cfg.batch_size(mesh.n_elements)
    history = OptimizationHistory()
    ev: Optional[Evaluation] = None
    adjoints = None
    F0 = None
    step = 0
    while True:
        try:
            ev = evaluate(rm, eta, problem, tol=cfg.cg_tol, max_iter=cfg.max_iter, previous=ev,
                          field="coarse" if cfg.variant == "eh" else "fine")
        except SolverError as exc:
            raise OptimizationError(step, exc) from exc
        if F0 is None:
            F0 = ev.F
        vf = volume_fraction(mesh, eta)

        removed: list = []
        if vf > cfg.c + 1e-12:
            try:
                if cfg.alpha > 0:
                    sens = full_theorem_sensitivities(ev, rm, cfg.alpha, cfg.variant, tol=cfg.cg_tol, x0=adjoints)
                    adjoints = sens.adjoints
                else:
                    sens = unregularized_sensitivity(mesh, ev.coarse.u)
            except SolverError as exc:
                raise OptimizationError(step, exc) from exc
            ranked = select_removals(sens, eta, p_s)
            removed = _truncate_batch(ranked, mesh, vf, cfg.c)

        rec = StepRecord(step, vf, ev.F, ev.theta, ev.F / F0, tuple(removed))
        history.records.append(rec)
        log.debug("step %d vf=%.4f F=%.6g theta=%.3g F_hat=%.4f", step, vf, ev.F, ev.theta, rec.F_hat)
        if callback is not None:
            callback(rec, eta)
        if not removed:
            break
        eta = eta.remove(removed)
        step += 1
    return eta, history
