"""Proca form of the separated field and the generalized Lorentz condition."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numdiff import partial
from .algebra import basis_change_matrix
from .angular import QuantumNumbers, build_ansatz, recursion_coeffs
from .constants import BIVECTOR_PAIRS, ETA
from .radial import RadialProfile
from .tetrad import (SpacetimePoint, TetradFrame, _coords, ricci_coefficients, spherical_tetrad,
                     tetrad_divergence)


@dataclass(frozen=True)
class ProcaComponents:
    vector: np.ndarray  # Psi_a, a = 0..3
    bivector: np.ndarray  # Psi_[01], [02], [03], [23], [31], [12]

    def antisymmetric(self) -> np.ndarray:
        out = np.zeros((4, 4), dtype=complex)
        for k, (a, b) in enumerate(BIVECTOR_PAIRS):
            out[a, b] = self.bivector[k]
            out[b, a] = -self.bivector[k]
        return out


def dk_to_proca(column) -> ProcaComponents:
    c = basis_change_matrix().entries @ np.asarray(column, dtype=complex)
    return ProcaComponents(c[:4], c[4:])


@dataclass(frozen=True)
class MonopoleConfig:
    """Monopole strength g; with the charge absorbed, kappa = g."""
    g: float
    kappa: float | None = None

    def __post_init__(self):
        k = self.g if self.kappa is None else self.kappa
        if k == 0:
            raise ValueError("kappa must be nonzero")
        if abs(k - self.g) > 1e-12:
            raise ValueError(f"kappa={k} does not match g={self.g} under kappa = g")
        object.__setattr__(self, "kappa", float(k))

    def potential(self, x) -> np.ndarray:
        """Covariant A_alpha in (t, r, theta, phi): A_phi = g cos(theta)."""
        return np.array([0.0, 0.0, 0.0, self.g * math.cos(x[2])])


def monopole_field(cfg: MonopoleConfig, p, frame: TetradFrame | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Tetrad components A^a and F^ab (indices raised with eta)."""
    frame = frame or spherical_tetrad()
    x = _coords(p)
    e = frame.components(x)
    a_up = ETA @ (e @ cfg.potential(x))
    dA = np.array([partial(cfg.potential, x, k) for k in range(4)])  # dA[mu, nu] = d_mu A_nu
    f_cov = dA - dA.T
    f_up = ETA @ (e @ f_cov @ e.T) @ ETA
    return a_up, f_up


# --- field assembly ----------------------------------------------------------

def _proca_at(qn: QuantumNumbers, profile: RadialProfile, x) -> tuple[np.ndarray, np.ndarray]:
    f, _ = profile.at(x[1])
    comps = dk_to_proca(build_ansatz(qn).column(f, x[0], x[2], x[3]))
    return comps.vector, comps.antisymmetric()


def _proca_jet(qn, profile, x, h: float | None):
    def vec(y):
        return _proca_at(qn, profile, y)[0]

    def biv(y):
        return _proca_at(qn, profile, y)[1]

    v, b = _proca_at(qn, profile, x)
    dv = np.array([partial(vec, x, k, h) for k in range(4)])
    db = np.array([partial(biv, x, k, h) for k in range(4)])
    return v, b, dv, db


def generalized_lorentz_pointwise(qn: QuantumNumbers, profile: RadialProfile, p,
                                  h: float | None = 1e-4) -> complex:
    """m (div e^(a) Psi_a + e^(a) d Psi_a + i A^a Psi_a) - (i/2) F^ab Psi_ab at one point."""
    x = _coords(SpacetimePoint(*_coords(p)).check())
    frame = spherical_tetrad()
    mass = profile.meta["mass"]
    v, b, dv, _ = _proca_jet(qn, profile, x, h)
    e = frame.components(x)
    a_up, f_up = monopole_field(MonopoleConfig(qn.kappa), x, frame)
    lhs = np.sum(tetrad_divergence(frame, x) * v) + np.einsum("au,ua->", ETA @ e, dv) + 1j * np.sum(a_up * v)
    return complex(mass * lhs - 0.5j * np.sum(f_up * b))


def lorentz_condition_residual(qn: QuantumNumbers, profile: RadialProfile, r: float | None = None):
    """m [-i eps f1 - (d/dr + 2/r) f3 - sqrt2 (c f2 + d f4) / r] + i kappa f9 / r^2.

    Covers the generic and both j = |kappa| cases through c and d (one of them
    vanishes when j = |kappa|).  With ``r=None`` the residual is returned on the
    whole grid.
    """
    _, _, c, d = recursion_coeffs(qn.j, qn.kappa, strict=False)
    eps, mass, k = qn.epsilon, profile.meta["mass"], qn.kappa
    if r is None:
        r = profile.grid
        f, df = profile.jets(1)
    else:
        f, df = profile.at(r)
    s2 = math.sqrt(2)
    return (mass * (-1j * eps * f[0] - (df[2] + 2 * f[2] / r) - s2 * (c * f[1] + d * f[3]) / r)
            + 1j * k * f[8] / r**2)


def free_lorentz_residual(k_vec, mass: float, x) -> complex:
    """nabla_mu Psi^mu for a free longitudinal plane wave, Cartesian coordinates.

    Psi^mu = e^mu exp(-i k.x) with k^2 = m^2 and e^mu = (|k|, omega k/|k|) / m,
    which satisfies k_mu e^mu = 0; the finite-difference divergence must vanish.
    """
    k3 = np.asarray(k_vec, dtype=float)
    kn = float(np.linalg.norm(k3))
    if kn == 0:
        raise ValueError("need a nonzero wave vector")
    omega = math.sqrt(mass**2 + kn**2)
    k_low = np.concatenate([[omega], -k3])
    pol_up = np.concatenate([[kn], omega * k3 / kn]) / mass

    def psi_up(y):
        return pol_up * np.exp(-1j * (k_low @ y))

    x = np.asarray(x, dtype=float)
    return complex(sum(partial(psi_up, x, mu)[mu] for mu in range(4)))


def proca_residual(qn: QuantumNumbers, profile: RadialProfile, points, h: float | None = 1e-4) -> dict[str, float]:
    """Both tetrad-form Proca equations with D = nabla + i A on the assembled field.

    Returns max |residual| over the points for each equation, and for the
    generalized Lorentz condition.
    """
    frame = spherical_tetrad()
    mass = profile.meta["mass"]
    cfg = MonopoleConfig(qn.kappa)
    worst = {"vector_eq": 0.0, "tensor_eq": 0.0, "lorentz": 0.0}
    for p in points:
        x = _coords(SpacetimePoint(*_coords(p)).check())
        v, b, dv, db = _proca_jet(qn, profile, x, h)
        e = frame.components(x)
        a_tet = e @ cfg.potential(x)
        g = ricci_coefficients(frame, x)  # gamma_abc
        # Dv[a, b] = e_(a)^mu D_mu Psi_b ; Db[c, a, b] = e_(c)^mu D_mu Psi_ab
        Dv = np.einsum("au,ub->ab", e, dv) + 1j * a_tet[:, None] * v[None, :]
        Db = np.einsum("cu,uab->cab", e, db) + 1j * a_tet[:, None, None] * b[None]
        g_up1 = np.einsum("cd,dab->cab", ETA, g)  # gamma^c_ab
        eq_a = Dv - Dv.T + np.einsum("cab,c->ab", g_up1 - g_up1.transpose(0, 2, 1), v) - mass * b
        # e^(b) D Psi_ab + gamma^{nb}_n Psi_ab + gamma_a^{mn} Psi_mn - m Psi_a
        t1 = np.einsum("nn,bb,nbn->b", ETA, ETA, g)
        eq_b = (np.einsum("bb,bab->a", ETA, Db) + b @ t1
                + np.einsum("mm,nn,amn,mn->a", ETA, ETA, g, b) - mass * v)
        worst["tensor_eq"] = max(worst["tensor_eq"], float(np.max(np.abs(eq_a))))
        worst["vector_eq"] = max(worst["vector_eq"], float(np.max(np.abs(eq_b))))
        worst["lorentz"] = max(worst["lorentz"], abs(generalized_lorentz_pointwise(qn, profile, x, h)))
    return worst

