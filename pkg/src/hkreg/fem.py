"""
P1 finite elements for -div(w grad u) = f with piecewise-constant w.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh
from .sparse import DEFAULT_TOL, CGInfo, SparseSym, solve_cg

DEFAULT_EPSILON = 1e-3


@dataclass(frozen=True, eq=False)
class MaterialDistribution:
    """Per-element conductivity, each entry either ``epsilon`` or 1."""

    eta: np.ndarray
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        eta = np.array(self.eta, dtype=float)
        if not np.all((eta == 1.0) | (eta == self.epsilon)):
            raise ValueError("material coefficients must be exactly epsilon or 1")
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)

    @classmethod
    def full(cls, n: int, epsilon: float = DEFAULT_EPSILON) -> "MaterialDistribution":
        return cls(np.ones(n), epsilon)

    @classmethod
    def from_solid(cls, solid, epsilon: float = DEFAULT_EPSILON) -> "MaterialDistribution":
        solid = np.asarray(solid, dtype=bool)
        return cls(np.where(solid, 1.0, epsilon), epsilon)

    @property
    def solid(self) -> np.ndarray:
        return self.eta == 1.0

    def remove(self, ids) -> "MaterialDistribution":
        eta = self.eta.copy()
        eta[np.asarray(ids, dtype=np.int64)] = self.epsilon
        return MaterialDistribution(eta, self.epsilon)

    def __len__(self):
        return self.eta.shape[0]


Coefficients = Union[MaterialDistribution, np.ndarray]


def coefficients(w: Coefficients) -> np.ndarray:
    if isinstance(w, MaterialDistribution):
        return w.eta
    return np.asarray(w, dtype=float)


def local_stiffness(mesh: Mesh) -> np.ndarray:
    """(nt, 3, 3) element stiffness matrices for unit coefficient."""
    G = mesh.shape_gradients
    return mesh.elem_area[:, None, None] * np.einsum("tad,tbd->tab", G, G)


class _Template:
    """Sparsity pattern of the P1 stiffness matrix and its Dirichlet-eliminated form."""

    def __init__(self, mesh: Mesh):
        nv = mesh.n_vertices
        tri = mesh.triangles
        rows = np.repeat(tri, 3, axis=1).ravel()
        cols = np.tile(tri, (1, 3)).ravel()
        keys = rows * nv + cols
        uniq, inv = np.unique(keys, return_inverse=True)
        self.n = nv
        self.local = local_stiffness(mesh).reshape(mesh.n_elements, 9)
        self.scatter = sp.csr_matrix(
            (np.ones(keys.size), (inv.ravel(), np.arange(keys.size))), shape=(uniq.size, keys.size)
        )
        self.row = uniq // nv
        self.col = uniq % nv
        self.indptr = np.concatenate([[0], np.cumsum(np.bincount(self.row, minlength=nv))])
        self._constrained = None

    def data(self, w: np.ndarray) -> np.ndarray:
        return self.scatter @ (w[:, None] * self.local).ravel()

    def matrix(self, w: np.ndarray) -> SparseSym:
        return SparseSym(sp.csr_matrix((self.data(w), self.col, self.indptr), shape=(self.n, self.n)))

    def constrained_pattern(self, mask: np.ndarray):
        if self._constrained is None or not np.array_equal(self._constrained[0], mask):
            free = ~mask
            keep = (free[self.row] & free[self.col]) | ((self.row == self.col) & mask[self.row])
            kept_rows = self.row[keep]
            indptr = np.concatenate([[0], np.cumsum(np.bincount(kept_rows, minlength=self.n))])
            is_bc_diag = mask[kept_rows]
            self._constrained = (mask.copy(), keep, self.col[keep], indptr, is_bc_diag)
        return self._constrained[1:]

    def constrained_matrix(self, w: np.ndarray, mask: np.ndarray) -> SparseSym:
        keep, cols, indptr, is_bc_diag = self.constrained_pattern(mask)
        data = self.data(w)[keep]
        data[is_bc_diag] = 1.0
        return SparseSym(sp.csr_matrix((data, cols, indptr), shape=(self.n, self.n)))


_templates: "weakref.WeakKeyDictionary[Mesh, _Template]" = weakref.WeakKeyDictionary()


def _template(mesh: Mesh) -> _Template:
    t = _templates.get(mesh)
    if t is None:
        t = _templates[mesh] = _Template(mesh)
    return t


def _check_coefficients(mesh: Mesh, w: np.ndarray) -> np.ndarray:
    if w.shape != (mesh.n_elements,):
        raise ValueError(f"expected {mesh.n_elements} element coefficients, got shape {w.shape}")
    if not np.all(w > 0.0):
        raise ValueError("conductivity coefficients must be strictly positive")
    return w


def assemble_stiffness(mesh: Mesh, w: Coefficients) -> SparseSym:
    """Global P1 stiffness matrix with element coefficients ``w``."""
    w = _check_coefficients(mesh, coefficients(w))
    return _template(mesh).matrix(w)


def assemble_load(mesh: Mesh, source_density: float = 1.0) -> np.ndarray:
    """Consistent load vector for a constant source: area/3 per element vertex."""
    contrib = np.repeat(source_density * mesh.elem_area / 3.0, 3)
    return np.bincount(mesh.triangles.ravel(), weights=contrib, minlength=mesh.n_vertices)


def apply_dirichlet(K: SparseSym, b, mask):
    """Eliminate constrained rows/columns; unit diagonal and zero rhs there.

    Only homogeneous conditions are supported, so no rhs lifting is needed.
    """
    mask = np.asarray(mask, dtype=bool)
    b = np.array(b, dtype=float)
    free = sp.diags((~mask).astype(float))
    Kc = free @ K.csr @ free + sp.diags(mask.astype(float))
    Kc = sp.csr_matrix(Kc)
    Kc.eliminate_zeros()
    b[mask] = 0.0
    return SparseSym(Kc), b


def constrained_stiffness(mesh: Mesh, w: Coefficients) -> SparseSym:
    """Stiffness matrix with the mesh's Dirichlet vertices eliminated."""
    w = _check_coefficients(mesh, coefficients(w))
    return _template(mesh).constrained_matrix(w, mesh.dirichlet_mask)


@dataclass(frozen=True, eq=False)
class FEMState:
    """A solved discrete system: constrained matrix, load and nodal solution."""

    mesh: Mesh
    w: np.ndarray
    K: SparseSym
    load: np.ndarray
    u: np.ndarray
    info: Optional[CGInfo] = None

    @property
    def F(self) -> float:
        return functional_value(self.u, self.load)

    def solve(self, rhs, tol: float = DEFAULT_TOL, max_iter=None, x0=None) -> np.ndarray:
        """Solve with the same constrained matrix (adjoint problems)."""
        rhs = np.array(rhs, dtype=float)
        rhs[self.mesh.dirichlet_mask] = 0.0
        return solve_cg(self.K, rhs, tol=tol, max_iter=max_iter, x0=x0)


def discrete_state(
    mesh: Mesh,
    w: Coefficients,
    f: float = 1.0,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
    x0=None,
) -> FEMState:
    w = _check_coefficients(mesh, coefficients(w)).copy()
    K = constrained_stiffness(mesh, w)
    load = assemble_load(mesh, f)
    rhs = load.copy()
    rhs[mesh.dirichlet_mask] = 0.0
    u, info = solve_cg(K, rhs, tol=tol, max_iter=max_iter, x0=x0, return_info=True)
    u[mesh.dirichlet_mask] = 0.0
    return FEMState(mesh, w, K, load, u, info)


def solve_state(mesh: Mesh, eta: Coefficients, problem, tol: float = DEFAULT_TOL, max_iter=None) -> np.ndarray:
    """Nodal P1 temperature for material ``eta`` on a tagged mesh."""
    return discrete_state(mesh, eta, problem.f, tol=tol, max_iter=max_iter).u


def functional_value(u, load) -> float:
    """Compliance (u_h, f_h)."""
    u = np.asarray(u, dtype=float)
    load = np.asarray(load, dtype=float)
    if u.shape != load.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {load.shape}")
    return float(u @ load)


def element_gradients(mesh: Mesh, u) -> np.ndarray:
    """(nt, 2) constant gradient of the P1 field ``u`` on each triangle."""
    u = np.asarray(u, dtype=float)
    return np.einsum("tad,ta->td", mesh.shape_gradients, u[mesh.triangles])
