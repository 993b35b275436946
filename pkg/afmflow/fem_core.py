"""
P1 Finite Element Operators
Exact element integrals for stiffness, mass and lumped mass on tetrahedra,
nodal interpolation and the inner products used by the schemes
"""

import logging
from functools import cached_property
from typing import Callable, Dict, Union

import numpy as np
import scipy.sparse as sp

from .errors import MeshError, MeshMismatchError, NumericalError
from .mesh import Mesh
from .models.scheme import Metric

logger = logging.getLogger(__name__)

# Levi-Civita symbol eps[i, k, l]
LEVI_CIVITA = np.zeros((3, 3, 3))
LEVI_CIVITA[0, 1, 2] = LEVI_CIVITA[1, 2, 0] = LEVI_CIVITA[2, 0, 1] = 1.0
LEVI_CIVITA[0, 2, 1] = LEVI_CIVITA[2, 1, 0] = LEVI_CIVITA[1, 0, 2] = -1.0


def barycentric_gradients(mesh: Mesh) -> np.ndarray:
    """Constant gradients of the four hat functions on every element, shape (E, 4, 3)"""
    x = mesh.vertices[mesh.elements]
    edges = x[:, 1:, :] - x[:, :1, :]            # rows x_k - x_0
    det = np.linalg.det(edges)
    if np.any(np.abs(det) < 1e-300):
        raise MeshError("degenerate element in gradient computation")
    grads = np.empty((mesh.n_elements, 4, 3))
    grads[:, 1:, :] = np.linalg.inv(edges).transpose(0, 2, 1)
    grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
    return grads


def _assemble(mesh: Mesh, local: np.ndarray) -> sp.csr_matrix:
    """Sum (E, 4, 4) element matrices into a symmetric N x N matrix"""
    rows = np.broadcast_to(mesh.elements[:, :, None], local.shape).ravel()
    cols = np.broadcast_to(mesh.elements[:, None, :], local.shape).ravel()
    n = mesh.n_vertices
    A = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    A = ((A + A.T) * 0.5).tocsr()
    A.sort_indices()
    return A


def assemble_stiffness(mesh: Mesh, grads: np.ndarray = None) -> sp.csr_matrix:
    """K[i, j] = integral of grad(phi_i) . grad(phi_j)"""
    if grads is None:
        grads = barycentric_gradients(mesh)
    local = np.einsum("e,eai,ebi->eab", mesh.volumes, grads, grads)
    return _assemble(mesh, local)


def assemble_mass(mesh: Mesh) -> sp.csr_matrix:
    """M[i, j] = integral of phi_i phi_j: |K|/10 on the diagonal, |K|/20 off it"""
    pattern = (np.ones((4, 4)) + np.eye(4)) / 20.0
    local = mesh.volumes[:, None, None] * pattern[None, :, :]
    return _assemble(mesh, local)


def assemble_lumped_mass(mesh: Mesh) -> np.ndarray:
    """Vertex weights w(z) = sum over elements containing z of |K|/4"""
    weights = np.bincount(mesh.elements.ravel(), weights=np.repeat(mesh.volumes / 4.0, 4),
                          minlength=mesh.n_vertices)
    if np.any(weights <= 0):
        raise MeshError(f"{int(np.sum(weights <= 0))} vertex(es) belong to no element")
    return weights


def assemble_dmi(mesh: Mesh, grads: np.ndarray, D: np.ndarray) -> sp.csr_matrix:
    """
    Matrix Q on the 3N nodal unknowns with m^T Q m = integral of D : (grad m x m),
    where column j of (grad m x m) is d_j m x m.
    """
    D = np.asarray(D, dtype=float)
    t = np.einsum("ij,eaj->eai", D, grads)
    coef = 0.25 * mesh.volumes[:, None, None, None] * np.einsum("eai,ikl->eakl", t, LEVI_CIVITA)
    E = mesh.n_elements
    data = np.broadcast_to(coef[:, :, None, :, :], (E, 4, 4, 3, 3))
    comp = np.arange(3)
    rows = 3 * mesh.elements[:, :, None, None, None] + comp[None, None, None, :, None]
    cols = 3 * mesh.elements[:, None, :, None, None] + comp[None, None, None, None, :]
    rows = np.broadcast_to(rows, data.shape).ravel()
    cols = np.broadcast_to(cols, data.shape).ravel()
    n = 3 * mesh.n_vertices
    Q = sp.coo_matrix((data.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    Q.sum_duplicates()
    return Q


def nodal_interpolation(f: Callable, mesh: Mesh, vectorized: bool = True) -> np.ndarray:
    """
    Evaluate a 3-vector function at every vertex.
    With vectorized=True f maps the (N, 3) vertex array to an (N, 3) array,
    otherwise it is called once per vertex.
    """
    if vectorized:
        values = np.broadcast_to(np.asarray(f(mesh.vertices), dtype=float),
                                 (mesh.n_vertices, 3)).copy()
    else:
        values = np.array([np.broadcast_to(f(z), (3,)) for z in mesh.vertices], dtype=float)
    if not np.all(np.isfinite(values)):
        bad = int(np.argmax(~np.all(np.isfinite(values), axis=1)))
        raise NumericalError(f"non-finite value of interpolated function at vertex {bad}")
    return values


class FESpace:
    """
    First-order space on a mesh. Scalar operators are assembled once and
    applied per vector component; all of them are read-only after creation.
    """

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        self._dmi_cache: Dict[bytes, sp.csr_matrix] = {}

    @property
    def n(self) -> int:
        return self.mesh.n_vertices

    @property
    def volume(self) -> float:
        return self.mesh.total_volume

    @cached_property
    def grads(self) -> np.ndarray:
        return barycentric_gradients(self.mesh)

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        return assemble_stiffness(self.mesh, self.grads)

    @cached_property
    def mass(self) -> sp.csr_matrix:
        return assemble_mass(self.mesh)

    @cached_property
    def lumped(self) -> np.ndarray:
        return assemble_lumped_mass(self.mesh)

    @cached_property
    def lumped_matrix(self) -> sp.csr_matrix:
        return sp.diags(self.lumped).tocsr()

    def dmi_operator(self, D: np.ndarray) -> sp.csr_matrix:
        key = np.ascontiguousarray(D, dtype=float).tobytes()
        if key not in self._dmi_cache:
            self._dmi_cache[key] = assemble_dmi(self.mesh, self.grads, D)
        return self._dmi_cache[key]

    def metric_operator(self, metric: Union[Metric, str]) -> sp.csr_matrix:
        """Scalar matrix H of the metric: M, diag(w) or M + K"""
        metric = Metric(metric)
        if metric is Metric.L2:
            return self.mass
        if metric is Metric.LUMPED_L2:
            return self.lumped_matrix
        return (self.mass + self.stiffness).tocsr()

    def check(self, *fields: np.ndarray):
        for u in fields:
            if np.shape(u) != (self.n, 3):
                raise MeshMismatchError(
                    f"field of shape {np.shape(u)} does not live on a mesh with {self.n} vertices")

    def inner(self, metric: Union[Metric, str], u: np.ndarray, v: np.ndarray) -> float:
        self.check(u, v)
        metric = Metric(metric)
        if metric is Metric.LUMPED_L2:
            return float(np.sum(self.lumped[:, None] * u * v))
        value = float(np.sum(u * (self.mass @ v)))
        if metric is Metric.H1:
            value += self.grad_inner(u, v)
        return value

    def norm_sq(self, metric: Union[Metric, str], u: np.ndarray) -> float:
        return self.inner(metric, u, u)

    def grad_inner(self, u: np.ndarray, v: np.ndarray) -> float:
        """<grad u, grad v> summed over components"""
        return float(np.sum(u * (self.stiffness @ v)))

    def average(self, u: np.ndarray) -> np.ndarray:
        """Mean value of a P1 field over the domain"""
        return (self.lumped[:, None] * u).sum(axis=0) / self.volume

    def interpolate(self, f: Callable, vectorized: bool = True) -> np.ndarray:
        return nodal_interpolation(f, self.mesh, vectorized)


def inner(space: FESpace, metric: Union[Metric, str], u: np.ndarray, v: np.ndarray) -> float:
    return space.inner(metric, u, v)
