"""
Sublattice Magnetization Fields
Field pairs, unit-length constraint errors, nodal projection and initial states
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from .errors import ConfigError, MeshMismatchError
from .fem_core import FESpace
from .models.diagnostics import ConstraintReport

logger = logging.getLogger(__name__)

DEGENERATE_NORM = 1e-12
FALLBACK_DIRECTION = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True, eq=False)
class SublatticePair:
    """The two sublattice magnetizations as (N, 3) nodal arrays on one space"""
    space: FESpace
    m1: np.ndarray
    m2: np.ndarray

    def __post_init__(self):
        m1 = np.array(self.m1, dtype=float)
        m2 = np.array(self.m2, dtype=float)
        self.space.check(m1, m2)
        if not (np.all(np.isfinite(m1)) and np.all(np.isfinite(m2))):
            raise ValueError("sublattice fields must be finite")
        m1.setflags(write=False)
        m2.setflags(write=False)
        object.__setattr__(self, "m1", m1)
        object.__setattr__(self, "m2", m2)

    def m(self, ell: int) -> np.ndarray:
        return self.m1 if ell == 1 else self.m2

    def other(self, ell: int) -> np.ndarray:
        return self.m2 if ell == 1 else self.m1

    def updated(self, v1: np.ndarray, v2: np.ndarray, tau: float) -> "SublatticePair":
        """Projection-free update m + tau v"""
        return SublatticePair(self.space, self.m1 + tau * v1, self.m2 + tau * v2)

    def swapped(self) -> "SublatticePair":
        return SublatticePair(self.space, self.m2, self.m1)

    def total(self, eta_s1: float, eta_s2: float) -> np.ndarray:
        return eta_s1 * self.m1 + eta_s2 * self.m2

    def same_space(self, other: "SublatticePair"):
        if not (self.space is other.space or self.space.mesh.same_as(other.space.mesh)):
            raise MeshMismatchError("sublattice pairs live on different meshes")


def _one_positive(g: np.ndarray, vol: np.ndarray) -> np.ndarray:
    """Integral of g_+ on elements where exactly one nodal value is positive"""
    i = np.argmax(g, axis=1)
    gi = g[np.arange(len(g)), i]
    diff = gi[:, None] - g
    diff[np.arange(len(g)), i] = 1.0
    return vol * gi ** 4 / (4.0 * np.prod(diff, axis=1))


def _two_positive(g: np.ndarray, vol: np.ndarray) -> np.ndarray:
    """Integral of g_+ on elements with exactly two positive nodal values"""
    s = -np.sort(-g, axis=1)
    a, b, c, d = s[:, 0], s[:, 1], s[:, 2], s[:, 3]

    def G(x):
        return x ** 4 / ((x - c) * (x - d))

    def dG(x):
        p = (x - c) * (x - d)
        return (4.0 * x ** 3 * p - x ** 4 * ((x - c) + (x - d))) / p ** 2

    close = (a - b) <= 1e-8 * a
    out = np.empty_like(a)
    far = ~close
    out[far] = (G(a[far]) - G(b[far])) / (a[far] - b[far])
    out[close] = dG(0.5 * (a[close] + b[close]))
    return vol * out / 4.0


def positive_part_integrals(g: np.ndarray, vol: np.ndarray) -> np.ndarray:
    """
    Exact integral of max(g, 0) over each element for an affine g given by its
    four nodal values (E, 4). Uses the divided-difference formula of s_+^4.
    """
    npos = (g > 0).sum(axis=1)
    mean = vol * g.mean(axis=1)
    out = np.zeros(len(g))
    out[npos == 4] = mean[npos == 4]

    one = npos == 1
    if np.any(one):
        out[one] = _one_positive(g[one], vol[one])
    two = npos == 2
    if np.any(two):
        out[two] = _two_positive(g[two], vol[two])
    three = npos == 3
    if np.any(three):
        neg = -g[three]
        extra = np.zeros(int(three.sum()))
        has_neg = (neg > 0).sum(axis=1) == 1
        if np.any(has_neg):
            extra[has_neg] = _one_positive(neg[has_neg], vol[three][has_neg])
        out[three] = mean[three] + extra
    return out


def l1_norm_p1(space: FESpace, g: np.ndarray) -> float:
    """L1 norm of the P1 function with nodal values g"""
    if np.all(g >= 0):
        return float(np.dot(space.lumped, g))
    if np.all(g <= 0):
        return float(-np.dot(space.lumped, g))
    mesh = space.mesh
    ge = g[mesh.elements]
    plus = positive_part_integrals(ge, mesh.volumes)
    return float(np.sum(2.0 * plus - mesh.volumes * ge.mean(axis=1)))


def constraint_report(pair: SublatticePair) -> ConstraintReport:
    """err_L1 = ||I_h[|m|^2] - 1||_L1 and err_Linf = max |m(z)| - 1 per sublattice"""
    l1, linf = [], []
    for m in (pair.m1, pair.m2):
        sq = np.einsum("ij,ij->i", m, m)
        l1.append(l1_norm_p1(pair.space, sq - 1.0))
        linf.append(float(np.sqrt(sq.max()) - 1.0))
    return ConstraintReport(err_L1=tuple(l1), err_Linf=tuple(linf))


def in_admissible_set(pair: SublatticePair, delta: float) -> bool:
    """
    Membership in the relaxed set: nodal lengths at least 1 (up to rounding)
    and err_L1 of both sublattices at most delta
    """
    for m in (pair.m1, pair.m2):
        if np.any(np.einsum("ij,ij->i", m, m) < 1.0 - 1e-12):
            return False
    return constraint_report(pair).max_L1 <= delta


def nodal_projection(field: np.ndarray) -> Tuple[np.ndarray, int]:
    """
    Divide every nodal vector by its length. Vectors shorter than 1e-12 are
    replaced by (0, 0, 1); returns the projected field and their count.
    """
    field = np.asarray(field, dtype=float)
    norms = np.linalg.norm(field, axis=1)
    degenerate = norms < DEGENERATE_NORM
    out = np.empty_like(field)
    out[~degenerate] = field[~degenerate] / norms[~degenerate, None]
    out[degenerate] = FALLBACK_DIRECTION
    count = int(degenerate.sum())
    if count:
        logger.warning("Nodal projection replaced %d degenerate vector(s) by (0, 0, 1)", count)
    return out, count


def project_pair(pair: SublatticePair) -> SublatticePair:
    m1, _ = nodal_projection(pair.m1)
    m2, _ = nodal_projection(pair.m2)
    return SublatticePair(pair.space, m1, m2)


def constant_pair(space: FESpace, v1: Sequence[float], v2: Sequence[float]) -> SublatticePair:
    fields = []
    for name, v in (("v1", v1), ("v2", v2)):
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if v.shape != (3,) or norm == 0.0:
            raise ConfigError(f"constant initial vector {name} must be a nonzero 3-vector")
        fields.append(np.tile(v / norm, (space.n, 1)))
    return SublatticePair(space, fields[0], fields[1])


def random_pair(space: FESpace, seed: int, amplitude: float = 1.0,
                base: Optional[SublatticePair] = None) -> SublatticePair:
    """
    Per-node uniform vectors in [-amplitude, amplitude]^3, added to an
    optional base pair, then projected to unit length
    """
    rng = np.random.default_rng(seed)
    m1 = rng.uniform(-amplitude, amplitude, size=(space.n, 3))
    m2 = rng.uniform(-amplitude, amplitude, size=(space.n, 3))
    if base is not None:
        m1 = m1 + base.m1
        m2 = m2 + base.m2
    logger.info("Random initial state with seed %d, amplitude %g", seed, amplitude)
    return project_pair(SublatticePair(space, m1, m2))


def skyrmion_profile(points: np.ndarray, r0: float, steepness: float) -> np.ndarray:
    """Logistic profile in (-1/2, 1/2): positive inside radius r0, negative outside"""
    rho = np.hypot(points[:, 0], points[:, 1])
    return expit(-steepness * (rho - r0)) - 0.5


def skyrmion_pair(space: FESpace, sign: int = 1, r0: float = 10.0, steepness: float = 20.0,
                  seed: int = 0, amplitude: float = 0.3) -> SublatticePair:
    """
    Skyrmion-like antiferromagnetic state m1 = -m2 = (0, 0, sign*f), projected,
    perturbed componentwise by uniform noise and projected again
    """
    if sign not in (1, -1):
        raise ConfigError("skyrmion sign must be +1 or -1")
    f = sign * skyrmion_profile(space.mesh.vertices, r0, steepness)
    m1 = np.zeros((space.n, 3))
    m1[:, 2] = f
    m1, _ = nodal_projection(m1)
    m2, _ = nodal_projection(-m1)
    rng = np.random.default_rng(seed)
    m1 = m1 + rng.uniform(-amplitude, amplitude, size=m1.shape)
    m2 = m2 + rng.uniform(-amplitude, amplitude, size=m2.shape)
    return project_pair(SublatticePair(space, m1, m2))


def make_initial(kind: str, space: FESpace, **options) -> SublatticePair:
    """
    Build an initial pair by name: 'constant' (v1, v2), 'random' (seed,
    amplitude) or 'skyrmion' (sign, r0, steepness, seed, amplitude)
    """
    if kind == "constant":
        return constant_pair(space, options.get("v1", (1.0, 0.0, 0.0)),
                             options.get("v2", (0.0, 1.0, 0.0)))
    if kind == "random":
        return random_pair(space, int(options.get("seed", 0)), float(options.get("amplitude", 1.0)))
    if kind == "skyrmion":
        return skyrmion_pair(space, **options)
    raise ConfigError(f"unknown initial state '{kind}'")
