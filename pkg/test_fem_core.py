"""
Tests for the P1 operators and discrete inner products
"""

import numpy as np
import pytest

from afmflow.errors import MeshMismatchError, NumericalError
from afmflow.fem_core import FESpace, barycentric_gradients
from afmflow.mesh import generate_box_mesh
from afmflow.models.scheme import Metric


def test_barycentric_gradients_sum_to_zero(space):
    grads = barycentric_gradients(space.mesh)
    np.testing.assert_allclose(grads.sum(axis=1), 0.0, atol=1e-12)


def test_stiffness_kills_constants(space):
    ones = np.ones(space.n)
    np.testing.assert_allclose(space.stiffness @ ones, 0.0, atol=1e-12)
    assert abs(space.stiffness - space.stiffness.T).max() < 1e-14


def test_stiffness_of_linear_function(space):
    x = space.mesh.vertices[:, 0]
    assert x @ (space.stiffness @ x) == pytest.approx(1.0)


def test_mass_and_lumped_mass_integrate_constants(space):
    ones = np.ones(space.n)
    assert ones @ (space.mass @ ones) == pytest.approx(1.0)
    assert space.lumped.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(space.mass @ ones, space.lumped, atol=1e-14)


def test_mass_matrix_integrates_x_squared():
    space = FESpace(generate_box_mesh(1, 1, 1))
    x = space.mesh.vertices[:, 0]
    # x lies in the P1 space, so the mass matrix integrates x^2 exactly
    assert x @ (space.mass @ x) == pytest.approx(1.0 / 3.0)


def test_metric_operators(space):
    assert space.metric_operator(Metric.L2) is space.mass
    np.testing.assert_allclose(space.metric_operator("LumpedL2").diagonal(), space.lumped)
    h1 = space.metric_operator(Metric.H1)
    assert abs(h1 - (space.mass + space.stiffness)).max() < 1e-14


def test_inner_products(space):
    u = space.interpolate(lambda p: np.column_stack([p[:, 0], p[:, 1], 0 * p[:, 2]]))
    l2 = space.norm_sq(Metric.L2, u)
    assert l2 == pytest.approx(2.0 / 3.0)
    assert space.grad_inner(u, u) == pytest.approx(2.0)
    assert space.norm_sq(Metric.H1, u) == pytest.approx(l2 + 2.0)
    assert space.norm_sq(Metric.LUMPED_L2, u) >= l2


def test_average_of_constant_field(space):
    u = np.tile([0.2, -1.0, 3.0], (space.n, 1))
    np.testing.assert_allclose(space.average(u), [0.2, -1.0, 3.0])


def test_check_rejects_foreign_field(space):
    with pytest.raises(MeshMismatchError):
        space.check(np.zeros((space.n + 1, 3)))
    with pytest.raises(MeshMismatchError):
        space.inner(Metric.L2, np.zeros((space.n, 3)), np.zeros((space.n, 2)))


def test_interpolate_per_vertex(space):
    u = space.interpolate(lambda z: [z[0], 1.0, 0.0], vectorized=False)
    np.testing.assert_allclose(u[:, 0], space.mesh.vertices[:, 0])
    np.testing.assert_allclose(u[:, 1], 1.0)


def test_interpolate_rejects_non_finite(space):
    with pytest.raises(NumericalError):
        space.interpolate(lambda p: np.full(p.shape, np.nan))


def test_dmi_operator_matches_direct_integral(space):
    D = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    Q = space.dmi_operator(D)
    assert space.dmi_operator(D.copy()) is Q
    # m = (cos x, sin x, 0) interpolated; exact P1 value from the element formula
    x = space.mesh.vertices[:, 0]
    m = np.column_stack([np.cos(x), np.sin(x), np.zeros_like(x)])
    grads = space.grads
    direct = 0.0
    for e, tet in enumerate(space.mesh.elements):
        gm = np.einsum("aj,ak->kj", grads[e], m[tet])       # d_j m_k
        mean = m[tet].mean(axis=0)
        cross = np.cross(gm.T, mean).T                       # column j is d_j m x mean
        direct += space.mesh.volumes[e] * np.sum(D * cross)
    flat = m.ravel()
    assert flat @ (Q @ flat) == pytest.approx(direct, rel=1e-12, abs=1e-14)


def test_dmi_vanishes_for_constant_field(space):
    D = np.eye(3)
    m = np.tile([0.3, 0.4, np.sqrt(0.75)], (space.n, 1)).ravel()
    assert abs(m @ (space.dmi_operator(D) @ m)) < 1e-12
