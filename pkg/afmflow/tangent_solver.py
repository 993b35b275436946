"""
Tangent Frames and Reduced Krylov Solves
Null-space reduction of the nodal orthogonality constraint m(z).v(z) = 0
to two unknowns per vertex, and the iterative solution of the reduced systems
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import MeshMismatchError, NumericalError
from .models.scheme import SolverConfig

logger = logging.getLogger(__name__)

MAX_REFINEMENTS = 3


@dataclass(frozen=True)
class TangentFrame:
    """Orthonormal basis t1, t2 of the plane orthogonal to m(z) at every vertex"""
    t1: np.ndarray
    t2: np.ndarray

    @property
    def n(self) -> int:
        return len(self.t1)

    @property
    def matrix(self) -> sp.csr_matrix:
        """Sparse P of shape (3N, 2N) with P[3z+k, 2z+j] = t_j(z)[k]"""
        n = self.n
        rows = (3 * np.arange(n)[:, None, None] + np.arange(3)[None, :, None])
        cols = (2 * np.arange(n)[:, None, None] + np.arange(2)[None, None, :])
        data = np.stack([self.t1, self.t2], axis=2)          # (N, 3, 2)
        rows = np.broadcast_to(rows, data.shape).ravel()
        cols = np.broadcast_to(cols, data.shape).ravel()
        return sp.csr_matrix((data.ravel(), (rows, cols)), shape=(3 * n, 2 * n))

    def lift(self, x: np.ndarray) -> np.ndarray:
        """Nodal (N, 3) field from reduced coefficients (2N,)"""
        c = np.asarray(x).reshape(-1, 2)
        return c[:, :1] * self.t1 + c[:, 1:] * self.t2

    def restrict(self, b: np.ndarray) -> np.ndarray:
        """P^T b for an (N, 3) dual vector"""
        b = np.asarray(b).reshape(-1, 3)
        return np.column_stack([np.einsum("ij,ij->i", b, self.t1),
                                np.einsum("ij,ij->i", b, self.t2)]).ravel()


def build_frames(m: np.ndarray) -> TangentFrame:
    """
    t1 = normalize(e_k x m) with k the axis of the smallest |m_k| (ties to the
    lower index), t2 = normalize(m x t1)
    """
    m = np.asarray(m, dtype=float)
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0.0):
        raise NumericalError(f"cannot build tangent frame at zero nodal vector "
                             f"(vertex {int(np.argmin(norms))})")
    k = np.argmin(np.abs(m), axis=1)
    axes = np.eye(3)[k]
    t1 = np.cross(axes, m)
    t1 /= np.linalg.norm(t1, axis=1)[:, None]
    t2 = np.cross(m, t1)
    t2 /= np.linalg.norm(t2, axis=1)[:, None]
    return TangentFrame(t1, t2)


def frames_matrix(frames: Sequence[TangentFrame]) -> sp.csr_matrix:
    return sp.block_diag([f.matrix for f in frames], format="csr")


@dataclass
class ReducedSystem:
    operator: sp.csr_matrix
    rhs: np.ndarray
    symmetric: bool = False

    @property
    def dim(self) -> int:
        return len(self.rhs)


def reduce(A: sp.spmatrix, b: np.ndarray, frames: Union[TangentFrame, Sequence[TangentFrame]],
           symmetric: Optional[bool] = None) -> ReducedSystem:
    """
    Reduced operator P^T A P and right-hand side P^T b. With two frames the
    unknowns are ordered sublattice by sublattice.
    """
    if isinstance(frames, TangentFrame):
        frames = [frames]
    P = frames_matrix(frames)
    b = np.asarray(b, dtype=float).ravel()
    if A.shape != (P.shape[0], P.shape[0]) or b.shape != (P.shape[0],):
        raise MeshMismatchError(f"operator {A.shape} and rhs {b.shape} do not match "
                                f"frames of full dimension {P.shape[0]}")
    B = (P.T @ A @ P).tocsr()
    if symmetric is None:
        symmetric = abs(A - A.T).max() == 0 if A.nnz else True
    if symmetric:
        B = ((B + B.T) * 0.5).tocsr()
    return ReducedSystem(B, P.T @ b, bool(symmetric))


def block_jacobi(B: sp.csr_matrix) -> spla.LinearOperator:
    """Inverse of the 2x2 diagonal blocks of a reduced operator"""
    a = B.diagonal()[0::2]
    d = B.diagonal()[1::2]
    upper = B.diagonal(1)[0::2]
    lower = B.diagonal(-1)[0::2]
    det = a * d - upper * lower
    if np.any(det == 0):
        raise NumericalError("singular 2x2 diagonal block in block-Jacobi preconditioner")

    def apply(r):
        r = np.asarray(r).reshape(-1, 2)
        x0 = (d * r[:, 0] - upper * r[:, 1]) / det
        x1 = (-lower * r[:, 0] + a * r[:, 1]) / det
        return np.column_stack([x0, x1]).ravel()

    return spla.LinearOperator(B.shape, matvec=apply, dtype=float)


def make_preconditioner(B: sp.csr_matrix, kind: str) -> Optional[spla.LinearOperator]:
    if kind == "none":
        return None
    if kind == "block_jacobi":
        return block_jacobi(B)
    ilu = spla.spilu(B.tocsc(), drop_tol=1e-6, fill_factor=10)
    return spla.LinearOperator(B.shape, matvec=ilu.solve, dtype=float)


@dataclass
class SolveResult:
    x: np.ndarray
    iterations: int
    residual: float
    converged: bool


def solve(system: ReducedSystem, config: SolverConfig = None, tol: float = None,
          max_iter: int = None) -> SolveResult:
    """
    Restarted GMRES (or CG on the symmetric path) with the configured
    preconditioner. The reported residual is the true relative residual.
    """
    config = config or SolverConfig()
    tol = config.tol if tol is None else tol
    max_iter = max_iter or config.iteration_limit(system.dim)
    B, b = system.operator, system.rhs
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return SolveResult(np.zeros_like(b), 0, 0.0, True)

    method = config.method
    if method == "cg" and not system.symmetric:
        logger.debug("Nonsymmetric system, falling back from cg to gmres")
        method = "gmres"
    M = make_preconditioner(B, config.preconditioner)

    count = [0]

    def callback(_):
        count[0] += 1

    x = np.zeros_like(b)
    residual = 1.0
    for _ in range(MAX_REFINEMENTS):
        left = max_iter - count[0]
        if left <= 0:
            break
        if method == "cg":
            x, info = spla.cg(B, b, x0=x, rtol=tol, atol=0.0, maxiter=left, M=M,
                              callback=callback)
        else:
            restart = min(config.restart, system.dim)
            x, info = spla.gmres(B, b, x0=x, rtol=tol, atol=0.0, restart=restart,
                                 maxiter=math.ceil(left / restart), M=M,
                                 callback=callback, callback_type="pr_norm")
        if info < 0:
            raise NumericalError(f"{method} breakdown (info={info})")
        residual = float(np.linalg.norm(b - B @ x)) / b_norm
        if residual <= tol:
            break

    converged = residual <= tol
    if not converged:
        message = (f"{method} did not reach relative residual {tol:g} within {max_iter} "
                   f"iterations (residual {residual:.3e})")
        if config.strict:
            raise NumericalError(message)
        logger.warning(message)
    return SolveResult(x, count[0], residual, converged)


def solve_many(systems: List[ReducedSystem], config: SolverConfig = None) -> List[SolveResult]:
    """Solve independent systems, concurrently when config.parallel is set"""
    config = config or SolverConfig()
    if config.parallel and len(systems) > 1:
        with ThreadPoolExecutor(max_workers=len(systems)) as pool:
            return list(pool.map(lambda s: solve(s, config), systems))
    return [solve(s, config) for s in systems]
