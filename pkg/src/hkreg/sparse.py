"""
Symmetric sparse matrices and a Jacobi-preconditioned conjugate gradient solver.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

DEFAULT_TOL = 1e-10


class SolverError(RuntimeError):
    """CG failed to reach the requested tolerance (or hit a NaN)."""

    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(f"{message} after {iterations} iterations (relative residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class SparseSym:
    """Symmetric matrix in CSR form.

    Thin wrapper over :class:`scipy.sparse.csr_matrix`; the arrays are frozen
    after construction.
    """

    def __init__(self, matrix):
        m = sp.csr_matrix(matrix, dtype=float)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got {m.shape}")
        m.sum_duplicates()
        m.sort_indices()
        for arr in (m.data, m.indices, m.indptr):
            arr.setflags(write=False)
        self._m = m

    @classmethod
    def from_dense(cls, a) -> "SparseSym":
        return cls(sp.csr_matrix(np.asarray(a, dtype=float)))

    @property
    def n(self) -> int:
        return self._m.shape[0]

    @property
    def indptr(self) -> np.ndarray:
        return self._m.indptr

    @property
    def indices(self) -> np.ndarray:
        return self._m.indices

    @property
    def data(self) -> np.ndarray:
        return self._m.data

    @property
    def csr(self) -> sp.csr_matrix:
        return self._m

    def diagonal(self) -> np.ndarray:
        return self._m.diagonal()

    def toarray(self) -> np.ndarray:
        return self._m.toarray()

    def asymmetry(self) -> float:
        """max |A - A^T|, zero for an exactly symmetric matrix."""
        d = self._m - self._m.T
        return float(abs(d).max()) if d.nnz else 0.0

    def __mul__(self, scalar: float) -> "SparseSym":
        return SparseSym(self._m * float(scalar))

    __rmul__ = __mul__


def matvec(A: SparseSym, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (A.n,):
        raise ValueError(f"dimension mismatch: matrix is {A.n}x{A.n}, vector has shape {x.shape}")
    return A.csr @ x


@dataclass
class CGInfo:
    iterations: int
    residual: float


def solve_cg(
    A: SparseSym,
    b,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
    x0=None,
    callback: Optional[Callable[[np.ndarray], None]] = None,
    return_info: bool = False,
):
    """Solve ``A x = b`` for SPD ``A`` by Jacobi-preconditioned CG.

    Stops when ``||A x - b||_2 <= tol * ||b||_2``. ``max_iter`` defaults to
    ``10 * n``. Raises :class:`SolverError` on non-convergence or NaN.
    ``callback`` is called with every iterate, starting from ``x0``.
    """
    b = np.asarray(b, dtype=float)
    n = A.n
    if b.shape != (n,):
        raise ValueError(f"dimension mismatch: matrix is {n}x{n}, rhs has shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise SolverError("non-finite right-hand side", 0, float("nan"))
    if max_iter is None:
        max_iter = 10 * n
    M = A.csr
    diag = M.diagonal()
    if np.any(diag <= 0.0):
        raise SolverError("non-positive diagonal entry, matrix is not SPD", 0, float("nan"))
    inv_diag = 1.0 / diag

    bnorm = np.linalg.norm(b)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if callback is not None:
        callback(x)
    if bnorm == 0.0:
        x[:] = 0.0
        return (x, CGInfo(0, 0.0)) if return_info else x

    r = b - M @ x
    target = tol * bnorm
    rnorm = np.linalg.norm(r)
    it = 0
    if rnorm > target:
        z = inv_diag * r
        p = z.copy()
        rz = r @ z
        while True:
            if it >= max_iter:
                raise SolverError("CG did not converge", it, rnorm / bnorm)
            Ap = M @ p
            pAp = p @ Ap
            if not np.isfinite(pAp) or pAp <= 0.0:
                raise SolverError("breakdown (matrix not SPD or NaN)", it, rnorm / bnorm)
            step = rz / pAp
            x += step * p
            r -= step * Ap
            it += 1
            if callback is not None:
                callback(x)
            rnorm = np.linalg.norm(r)
            if not np.isfinite(rnorm):
                raise SolverError("NaN in CG iteration", it, float("nan"))
            if rnorm <= target:
                # guard against drift of the recursively updated residual
                rnorm = np.linalg.norm(b - M @ x)
                if rnorm <= target:
                    break
                # the recursive residual drifted: restart from the true one
                r = b - M @ x
                z = inv_diag * r
                p = z.copy()
                rz = r @ z
                continue
            z = inv_diag * r
            rz_new = r @ z
            p *= rz_new / rz
            p += z
            rz = rz_new
    return (x, CGInfo(it, rnorm / bnorm)) if return_info else x
