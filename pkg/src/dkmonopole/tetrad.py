"""Tetrads on flat spacetime in spherical coordinates, the DK spin connection,
Ricci rotation coefficients and local Lorentz gauge covariance.

Coordinates are ordered (t, r, theta, phi).  A tetrad is stored as a 4x4
array ``e[a, alpha] = e^alpha_(a)`` with the tetrad label along rows.  All
coordinate derivatives are taken numerically from the metric and tetrad
callables, so the same code serves any frame handed to it.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _numdiff
from .algebra import BIVECTOR_PAIRS, DKBasis, DKMatrix, betas, spin_generators
from .constants import ETA, LORENTZ_TOL, POLE_GUARD


class PoleGuardError(ValueError):
    """Raised when theta is too close to a pole or r is not positive."""


class NotLorentzError(ValueError):
    pass


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.t, self.r, self.theta, self.phi)):
            raise ValueError("non-finite coordinate")

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.r, self.theta, self.phi], dtype=float)

    def check(self, pole_guard: float = POLE_GUARD) -> "SpacetimePoint":
        if self.r <= 0:
            raise PoleGuardError(f"r must be positive, got {self.r}")
        if not (pole_guard < self.theta < math.pi - pole_guard):
            raise PoleGuardError(f"theta={self.theta} within {pole_guard} of a pole")
        return self


def _coords(p) -> np.ndarray:
    if isinstance(p, SpacetimePoint):
        p.check()
        return p.as_array()
    return np.asarray(p, dtype=float)


def flat_spherical_metric(x) -> np.ndarray:
    _, r, th, _ = x
    return np.diag([1.0, -1.0, -r * r, -(r * math.sin(th)) ** 2])


def flat_spherical_metric_gradient(x) -> np.ndarray:
    """dg[k, m, n] = d_k g_mn."""
    _, r, th, _ = x
    st, ct = math.sin(th), math.cos(th)
    dg = np.zeros((4, 4, 4))
    dg[1, 2, 2] = -2 * r
    dg[1, 3, 3] = -2 * r * st * st
    dg[2, 3, 3] = -2 * r * r * st * ct
    return dg


@dataclass(frozen=True)
class TetradFrame:
    components: Callable[[np.ndarray], np.ndarray]
    metric: Callable[[np.ndarray], np.ndarray] = flat_spherical_metric
    name: str = ""
    # optional analytic derivatives, d[k, ...] = d_k; finite differences otherwise
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    metric_gradient: Callable[[np.ndarray], np.ndarray] | None = None

    def component_gradient(self, x) -> np.ndarray:
        if self.jacobian is not None:
            return self.jacobian(x)
        return _numdiff.gradient(self.components, x)

    def metric_derivatives(self, x) -> np.ndarray:
        if self.metric_gradient is not None:
            return self.metric_gradient(x)
        return _numdiff.gradient(self.metric, x)

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.components(_coords(p)), dtype=float)

    def lowered(self, x) -> np.ndarray:
        """e_(a) alpha = g_{alpha beta} e^beta_(a)."""
        return self.components(x) @ self.metric(x)


def _spherical_components(x) -> np.ndarray:
    _, r, th, _ = x
    e = np.zeros((4, 4))
    e[0, 0] = 1.0
    e[1, 2] = 1.0 / r
    e[2, 3] = 1.0 / (r * math.sin(th))
    e[3, 1] = 1.0
    return e


def _spherical_jacobian(x) -> np.ndarray:
    _, r, th, _ = x
    st = math.sin(th)
    d = np.zeros((4, 4, 4))
    d[1, 1, 2] = -1.0 / r**2
    d[1, 2, 3] = -1.0 / (r * r * st)
    d[2, 2, 3] = -math.cos(th) / (r * st * st)
    return d


def spherical_tetrad() -> TetradFrame:
    return TetradFrame(_spherical_components, flat_spherical_metric, "spherical",
                       _spherical_jacobian, flat_spherical_metric_gradient)


def spherical_axes(theta: float, phi: float) -> np.ndarray:
    """3x3 rotation with columns (theta-hat, phi-hat, r-hat) in Cartesian axes.

    Equals R_z(phi) R_y(theta).
    """
    ct, st, cp, sp = math.cos(theta), math.sin(theta), math.cos(phi), math.sin(phi)
    rz = np.array([[cp, -sp, 0.0], [sp, cp, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[ct, 0.0, st], [0.0, 1.0, 0.0], [-st, 0.0, ct]])
    return rz @ ry


def spherical_from_cartesian(x) -> np.ndarray:
    """Local Lorentz matrix L with e_spherical = L @ e_cartesian."""
    out = np.eye(4)
    out[1:, 1:] = spherical_axes(x[2], x[3]).T
    return out


def _cartesian_components(x) -> np.ndarray:
    # e^alpha_(a) = d x^alpha / d X^a for Cartesian axes X^a
    sph = _spherical_components(x)
    return spherical_from_cartesian(x).T @ sph


def cartesian_tetrad() -> TetradFrame:
    return TetradFrame(_cartesian_components, flat_spherical_metric, "cartesian")


def transformed_frame(frame: TetradFrame, lorentz: Callable[[np.ndarray], np.ndarray]) -> TetradFrame:
    """Frame with e'(x) = L(x) @ e(x)."""
    return TetradFrame(lambda x: lorentz(x) @ frame.components(x), frame.metric, f"L*{frame.name}",
                       metric_gradient=frame.metric_gradient)


def christoffel(metric: Callable, x, gradient: Callable | None = None) -> np.ndarray:
    """Gamma^l_{mn} from the standard formula; the metric is differentiated numerically
    unless ``gradient`` is given."""
    x = np.asarray(x, dtype=float)
    ginv = np.linalg.inv(metric(x))
    dg = _numdiff.gradient(metric, x) if gradient is None else gradient(x)  # dg[k, m, n] = d_k g_mn
    term = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg  # [s, m, n]
    return 0.5 * np.einsum("ls,smn->lmn", ginv, term)


def _nabla_lowered(frame: TetradFrame, x) -> np.ndarray:
    """N[alpha, b, beta] = nabla_alpha e_(b) beta."""
    gam = christoffel(frame.metric, x, frame.metric_gradient)
    if frame.jacobian is not None and frame.metric_gradient is not None:
        d = frame.jacobian(x) @ frame.metric(x) + frame.components(x) @ frame.metric_gradient(x)
    else:
        d = _numdiff.gradient(frame.lowered, x)
    return d - np.einsum("gab,cg->acb", gam, frame.lowered(x))


def orthonormality_residual(frame: TetradFrame, p) -> float:
    x = _coords(p)
    e = frame.components(x)
    return float(np.max(np.abs(e @ frame.metric(x) @ e.T - ETA)))


def ricci_coefficients(frame: TetradFrame, p) -> np.ndarray:
    """gamma_abc = -(nabla_beta e_(a) alpha) e^alpha_(b) e^beta_(c)."""
    x = _coords(p)
    e = frame.components(x)
    n = _nabla_lowered(frame, x)
    return -np.einsum("Bas,bs,cB->abc", n, e, e)


def connection_coefficients(frame: TetradFrame, p) -> np.ndarray:
    """w[alpha, a, b] = e^beta_(a) nabla_alpha e_(b) beta."""
    x = _coords(p)
    return np.einsum("as,kbs->kab", frame.components(x), _nabla_lowered(frame, x))


@functools.lru_cache(maxsize=None)
def _generator_array(basis: DKBasis) -> np.ndarray:
    js = spin_generators(basis)
    return np.array([[js[a, b].entries for b in range(4)] for a in range(4)])


@functools.lru_cache(maxsize=None)
def _beta_array(basis: DKBasis) -> np.ndarray:
    return np.array([b.entries for b in betas(basis)])


def spin_connection(frame: TetradFrame, p, basis: DKBasis | str = DKBasis.CARTESIAN) -> tuple[DKMatrix, ...]:
    """B_alpha = 1/2 j^{ab} e^beta_(a) nabla_alpha e_(b) beta, for alpha = t, r, theta, phi."""
    basis = DKBasis(basis)
    w = connection_coefficients(frame, p)
    j = _generator_array(basis)
    arr = 0.5 * np.einsum("kab,abij->kij", w, j)
    names = ("t", "r", "theta", "phi")
    return tuple(DKMatrix(arr[k], basis, f"B_{names[k]}") for k in range(4))


def decompose_in_generators(m: DKMatrix) -> tuple[np.ndarray, float]:
    """Least-squares coefficients of m over the six j^{ab} (pairs in BIVECTOR_PAIRS order)."""
    j = _generator_array(m.basis)
    basis_cols = np.array([j[a, b].ravel() for a, b in BIVECTOR_PAIRS]).T
    coef, *_ = np.linalg.lstsq(basis_cols, m.entries.ravel(), rcond=None)
    resid = float(np.max(np.abs(basis_cols @ coef - m.entries.ravel())))
    return coef, resid


def tetrad_divergence(frame: TetradFrame, p) -> np.ndarray:
    """e^{(a) alpha}_{;alpha} for a = 0..3."""
    x = _coords(p)

    up = ETA @ frame.components(x)  # e^{(a) alpha}
    d = ETA @ frame.component_gradient(x)  # d[k, a, alpha]
    gam = christoffel(frame.metric, x, frame.metric_gradient)
    return np.einsum("kak->a", d) + np.einsum("kkb,ab->a", gam, up)


# --- local Lorentz transformations -------------------------------------------

def pseudo_orthogonality_residual(lmat: np.ndarray) -> float:
    lmat = np.asarray(lmat, dtype=float)
    return float(np.max(np.abs(lmat.T @ ETA @ lmat - ETA)))


def lorentz_rep(lmat, check: bool = True) -> DKMatrix:
    """10x10 representation L ⊕ (L ⊗ L) on (phi_a; phi_[ab]) in the Cartesian basis.

    With S = lorentz_rep(L):  S beta^a S^-1 = beta^b L[b, a].
    """
    lmat = np.asarray(lmat, dtype=float)
    if lmat.shape != (4, 4):
        raise NotLorentzError(f"expected 4x4, got {lmat.shape}")
    if check and pseudo_orthogonality_residual(lmat) > LORENTZ_TOL:
        raise NotLorentzError("matrix is not pseudo-orthogonal")
    out = np.zeros((10, 10), dtype=complex)
    out[:4, :4] = lmat
    for p, (a, b) in enumerate(BIVECTOR_PAIRS):
        for q, (m, n) in enumerate(BIVECTOR_PAIRS):
            out[4 + p, 4 + q] = lmat[a, m] * lmat[b, n] - lmat[a, n] * lmat[b, m]
    return DKMatrix(out, DKBasis.CARTESIAN, "S(L)")


def rotation(axis: int, angle: float) -> np.ndarray:
    """Spatial rotation about Cartesian axis 1, 2 or 3, embedded in 4x4."""
    i, k = [(2, 3), (3, 1), (1, 2)][axis - 1]
    out = np.eye(4)
    c, s = math.cos(angle), math.sin(angle)
    out[i, i], out[i, k], out[k, i], out[k, k] = c, -s, s, c
    return out


def boost(axis: int, rapidity: float) -> np.ndarray:
    out = np.eye(4)
    c, s = math.cosh(rapidity), math.sinh(rapidity)
    out[0, 0], out[0, axis], out[axis, 0], out[axis, axis] = c, s, s, c
    return out


def random_lorentz(rng: np.random.Generator, max_rapidity: float = 1.0) -> np.ndarray:
    """Product of a random rotation and a random boost."""
    out = np.eye(4)
    for axis in (1, 2, 3):
        out = out @ rotation(axis, rng.uniform(0, 2 * math.pi))
    for axis in (1, 2, 3):
        out = out @ boost(axis, rng.uniform(-max_rapidity, max_rapidity))
    return out


@dataclass(frozen=True)
class LocalLorentz:
    matrix: Callable[[np.ndarray], np.ndarray]
    description: str = ""

    @classmethod
    def constant(cls, lmat, description: str = "constant") -> "LocalLorentz":
        lmat = np.array(lmat, dtype=float)
        return cls(lambda x: lmat, description)


def gauge_covariance_residuals(local: LocalLorentz, points, frame: TetradFrame | None = None) -> dict[str, float]:
    """Residuals of the DK local Lorentz covariance relations at the sample points.

    * ``conjugation``: S beta^a S^-1 - beta^b L[b, a]
    * ``kappa_block`` / ``lambda_block``: the same relation restricted to the
      off-diagonal blocks
    * ``connection``: S d_alpha S^-1 - (B'_alpha - S B_alpha S^-1), with the
      derivative of S^-1 by central differences
    """
    frame = spherical_tetrad() if frame is None else frame
    primed = transformed_frame(frame, local.matrix)
    bs = _beta_array(DKBasis.CARTESIAN)
    worst = {"conjugation": 0.0, "kappa_block": 0.0, "lambda_block": 0.0, "connection": 0.0}
    for p in points:
        x = _coords(p)
        lmat = local.matrix(x)
        s = lorentz_rep(lmat).entries
        s_inv = np.linalg.inv(s)
        for a in range(4):
            lhs = s @ bs[a] @ s_inv
            rhs = np.einsum("b,bij->ij", lmat[:, a], bs)
            diff = np.abs(lhs - rhs)
            worst["conjugation"] = max(worst["conjugation"], float(diff.max()))
            worst["kappa_block"] = max(worst["kappa_block"], float(diff[:4, 4:].max()))
            worst["lambda_block"] = max(worst["lambda_block"], float(diff[4:, :4].max()))
        ds_inv = _numdiff.gradient(lambda y: np.linalg.inv(lorentz_rep(local.matrix(y), check=False).entries), x)
        b_old = spin_connection(frame, x)
        b_new = spin_connection(primed, x)
        for k in range(4):
            lhs = s @ ds_inv[k]
            rhs = b_new[k].entries - s @ b_old[k].entries @ s_inv
            worst["connection"] = max(worst["connection"], float(np.max(np.abs(lhs - rhs))))
    return worst


def verify_gauge_covariance(local: LocalLorentz, points, frame: TetradFrame | None = None) -> dict[str, float]:
    return gauge_covariance_residuals(local, points, frame)


# --- DK operator in a frame --------------------------------------------------

def _in_basis(arr: np.ndarray, basis: DKBasis) -> np.ndarray:
    if basis is DKBasis.CARTESIAN:
        return arr
    from .algebra import basis_change_matrix

    u = basis_change_matrix().entries
    return np.linalg.inv(u) @ arr @ u


def dk_operator(frame: TetradFrame, p, value, grad, mass: float,
                potential=None, basis: DKBasis | str = DKBasis.CYCLIC) -> np.ndarray:
    """[i beta^a e^alpha_(a) (d_alpha + B_alpha + i A_alpha) - m] Phi at one point.

    ``grad[alpha]`` holds d_alpha Phi in coordinate order; ``potential`` is the
    covariant 4-potential A_alpha (defaults to zero).
    """
    basis = DKBasis(basis)
    x = _coords(p)
    value = np.asarray(value, dtype=complex)
    e = frame.components(x)
    bs = _beta_array(basis)
    conn = spin_connection(frame, x, DKBasis.CARTESIAN)
    a_cov = np.zeros(4) if potential is None else np.asarray(potential(x), dtype=float)
    out = -mass * value
    for alpha in range(4):
        cov = grad[alpha] + _in_basis(conn[alpha].entries, basis) @ value + 1j * a_cov[alpha] * value
        beta_alpha = np.einsum("a,aij->ij", e[:, alpha], bs)
        out = out + 1j * beta_alpha @ cov
    return out


def monopole_potential(kappa: float) -> Callable[[np.ndarray], np.ndarray]:
    """Covariant potential with A_phi = kappa cos(theta), charge absorbed."""
    def pot(x):
        return np.array([0.0, 0.0, 0.0, kappa * math.cos(x[2])])
    return pot


def spherical_dk_operator(p, value, grad, mass: float, kappa: float = 0.0,
                          basis: DKBasis | str = DKBasis.CYCLIC) -> np.ndarray:
    """The separated-form operator

        i beta^0 d_t + i (beta^3 d_r + (beta^1 j^31 + beta^2 j^32) / r)
        + Sigma^kappa / r - m,
        Sigma^kappa = i beta^1 d_theta + beta^2 (i d_phi + (i j^12 - kappa) cos theta) / sin theta
    """
    basis = DKBasis(basis)
    x = _coords(p)
    _, r, th, _ = x
    bs = _beta_array(basis)
    j = _generator_array(basis)
    value = np.asarray(value, dtype=complex)
    sigma = 1j * bs[1] @ grad[2] + bs[2] @ (
        1j * grad[3] + (1j * j[1, 2] @ value - kappa * value) * math.cos(th)) / math.sin(th)
    radial = 1j * (bs[3] @ grad[1] + (bs[1] @ j[3, 1] + bs[2] @ j[3, 2]) @ value / r)
    return 1j * bs[0] @ grad[0] + radial + sigma / r - mass * value
