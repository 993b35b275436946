"""
Energy Evaluation
Exchange, anisotropy, DMI and Zeeman contributions, the effective-field
right-hand sides and the stationarity residual
"""

import logging
from typing import Tuple

import numpy as np

from .fields import SublatticePair
from .models.diagnostics import EnergyBreakdown
from .models.material import MaterialParams
from .tangent_solver import build_frames

logger = logging.getLogger(__name__)


def _dmi_energy(pair: SublatticePair, D: np.ndarray, m: np.ndarray) -> float:
    if not np.any(D):
        return 0.0
    Q = pair.space.dmi_operator(D)
    flat = m.ravel()
    return float(flat @ (Q @ flat))


def energy(pair: SublatticePair, params: MaterialParams) -> EnergyBreakdown:
    """All energy contributions, each integrated exactly for P1 fields"""
    space = pair.space
    K, M, w = space.stiffness, space.mass, space.lumped
    m1, m2 = pair.m1, pair.m2

    intra = 0.5 * (params.a11 * np.sum(m1 * (K @ m1)) + params.a22 * np.sum(m2 * (K @ m2)))
    inter_inhom = params.a12 * np.sum(m1 * (K @ m2))
    inter_hom = -params.a0 * np.sum(m1 * (M @ m2))

    anisotropy = 0.0
    dmi = 0.0
    for ell, m in ((1, m1), (2, m2)):
        q, axis = params.anisotropy(ell)
        if q:
            s = m @ axis
            anisotropy += 0.5 * q ** 2 * (space.volume - s @ (M @ s))
        dmi += _dmi_energy(pair, params.dmi(ell), m)

    zeeman = 0.0
    if np.any(params.h_ext):
        total = pair.total(params.eta_s1, params.eta_s2)
        zeeman = -float(w @ (total @ params.h_ext))

    return EnergyBreakdown(
        intra_exchange=float(intra),
        inter_inhomogeneous=float(inter_inhom),
        inter_homogeneous=float(inter_hom),
        anisotropy=float(anisotropy),
        dmi=float(dmi),
        zeeman=zeeman,
    )


def exchange_rhs(ell: int, pair: SublatticePair, params: MaterialParams) -> np.ndarray:
    """Dual vector of phi -> -a_ll <grad m_l, grad phi> - a12 <grad m', grad phi> + a0 <m', phi>"""
    space = pair.space
    m, other = pair.m(ell), pair.other(ell)
    return (-params.exchange(ell) * (space.stiffness @ m)
            - params.a12 * (space.stiffness @ other)
            + params.a0 * (space.mass @ other))


def lower_order_rhs(ell: int, pair: SublatticePair, params: MaterialParams) -> np.ndarray:
    """Negative first variation of anisotropy, DMI and Zeeman energy in m_l"""
    space = pair.space
    m = pair.m(ell)
    rhs = np.zeros_like(m)
    q, axis = params.anisotropy(ell)
    if q:
        rhs += q ** 2 * np.outer(space.mass @ (m @ axis), axis)
    D = params.dmi(ell)
    if np.any(D):
        Q = space.dmi_operator(D)
        flat = m.ravel()
        rhs -= (Q @ flat + Q.T @ flat).reshape(-1, 3)
    if np.any(params.h_ext):
        rhs += params.eta_s(ell) * np.outer(space.lumped, params.h_ext)
    return rhs


def effective_field_rhs(ell: int, pair: SublatticePair, params: MaterialParams) -> np.ndarray:
    """
    Full-space dual vector (N, 3) of the negative Gateaux derivative of the
    energy with respect to m_l; row z is the functional applied to phi_z e_k
    """
    return exchange_rhs(ell, pair, params) + lower_order_rhs(ell, pair, params)


def stationarity_residual(pair: SublatticePair, params: MaterialParams) -> Tuple[float, float]:
    """Euclidean norm of the effective-field rhs tested against all tangent directions"""
    out = []
    for ell in (1, 2):
        frames = build_frames(pair.m(ell))
        out.append(float(np.linalg.norm(frames.restrict(effective_field_rhs(ell, pair, params)))))
    return out[0], out[1]
