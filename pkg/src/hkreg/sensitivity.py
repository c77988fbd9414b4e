"""
Element sensitivities of the compliance and of the error-regularized compliance.

For a coefficient ``eta_i`` on coarse element ``i`` the stiffness derivatives
are element integrals, ``(dK/deta_i u, v) = area_i grad u . grad v`` and, on
the fine mesh, the same sum over the four children. With ``u = K^-1 f`` and
``u' = M^-1 f'`` the derivative of a square-norm regularizer ``e.e`` needs
one adjoint solve per level:

    d(e.e)/deta_i = 2 (dM/deta_i u', y) - 2 (dK/deta_i u, z)

with ``(z, y)`` depending on which error field is penalized:

* ``eh_dash`` (``e = P u - u'``):     z = K^-1 P^T e,   y = M^-1 e
* ``eh``      (``e = u - R u'``):     z = K^-1 e,       y = M^-1 R^T e
* ``compromise`` (production):        z = K^-1 e_h,     y = M^-1 e_h'

``R`` is nodal restriction to the coarse vertices and ``P`` prolongation.
The compromise mixes the two fields so that no transfer operator is applied
to an adjoint right-hand side.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .estimator import Evaluation
from .fem import element_gradients
from .mesh import Mesh, RefinedMesh
from .sparse import DEFAULT_TOL

VARIANTS = ("compromise", "eh", "eh_dash")


@dataclass(frozen=True, eq=False)
class SensitivityVector:
    s: np.ndarray
    alpha: float = 0.0
    variant: str = "unregularized"
    adjoints: Optional[tuple] = None

    def __len__(self):
        return self.s.shape[0]


def elem_bilinear(mesh: Mesh, u, v) -> np.ndarray:
    """Per-element ``area * grad u . grad v`` (exact for P1 fields)."""
    gu = element_gradients(mesh, u)
    gv = gu if v is u else element_gradients(mesh, v)
    return mesh.elem_area * np.einsum("td,td->t", gu, gv)


def unregularized_sensitivity(mesh: Mesh, u) -> SensitivityVector:
    return SensitivityVector(-elem_bilinear(mesh, u, u))


def _adjoint_rhs(ev: Evaluation, rm: RefinedMesh, variant: str):
    e_fine, e_coarse = ev.error.e_fine, ev.error.e_coarse
    if variant == "compromise":
        return e_coarse, e_fine
    if variant == "eh_dash":
        return rm.prolongate_transpose(e_fine), e_fine
    if variant == "eh":
        return e_coarse, rm.restrict_transpose(e_coarse)
    raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")


def regularizer_gradient(
    ev: Evaluation, rm: RefinedMesh, variant: str = "compromise", tol: float = DEFAULT_TOL, x0=None
):
    """Per-element derivative of the square-norm error term.

    Returns ``(grad, (z, y))``; the adjoints can seed the next call's CG.
    """
    rhs_c, rhs_f = _adjoint_rhs(ev, rm, variant)
    z0, y0 = x0 if x0 is not None else (None, None)
    z = ev.coarse.solve(rhs_c, tol=tol, x0=z0)
    y = ev.fine.solve(rhs_f, tol=tol, x0=y0)
    fine_part = rm.children_sum(elem_bilinear(rm.fine, ev.fine.u, y))
    coarse_part = elem_bilinear(rm.coarse, ev.coarse.u, z)
    return 2.0 * (fine_part - coarse_part), (z, y)


def regularized_sensitivity(
    ev: Evaluation, rm: RefinedMesh, alpha: float, tol: float = DEFAULT_TOL, x0=None
) -> SensitivityVector:
    """Production sensitivity of ``F_h + alpha * Theta_h`` (compromise adjoints)."""
    return full_theorem_sensitivities(ev, rm, alpha, "compromise", tol=tol, x0=x0)


def full_theorem_sensitivities(
    ev: Evaluation, rm: RefinedMesh, alpha: float, variant: str = "eh_dash", tol: float = DEFAULT_TOL, x0=None
) -> SensitivityVector:
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    base = -elem_bilinear(rm.coarse, ev.coarse.u, ev.coarse.u)
    if alpha == 0:
        return SensitivityVector(base, 0.0, variant)
    grad, adjoints = regularizer_gradient(ev, rm, variant, tol=tol, x0=x0)
    return SensitivityVector(base + alpha * grad, float(alpha), variant, adjoints)
