"""Wigner functions, monopole angular operators and the separation ansatz.

Convention: D^j_{m'm}(alpha, beta, gamma) = exp(-i m' alpha) d^j_{m'm}(beta) exp(-i m gamma)
with d given by the explicit Wigner sum.  The ansatz uses
D_sigma = D^j_{-m, sigma}(phi, theta, 0) = exp(i m phi) d^j_{-m, sigma}(theta), and the
six ladder relations for D_{kappa-1}, D_kappa, D_{kappa+1} hold in this
convention with the coefficients a, b, c, d.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .algebra import DKBasis, build_j
from .constants import POLE_GUARD, SIGMA_OFFSETS
from .tetrad import PoleGuardError, _beta_array, _generator_array

# build-time constant fixed by the numerical check in the test suite:
# J_3 acting on the ansatz returns +m times the ansatz
J3_EIGENVALUE_SIGN = +1


def twice(x: float, what: str = "value") -> int:
    """2x as an exact integer; rejects anything that is not a half-integer."""
    t = round(2 * x)
    if abs(2 * x - t) > 1e-9:
        raise ValueError(f"{what} must be an integer or half-integer, got {x!r}")
    return t


def _is_integer(x: float) -> bool:
    return twice(x) % 2 == 0


def allowed_j(kappa: float) -> Iterator[float]:
    """Admissible total momenta for a monopole parameter kappa, ascending."""
    tk = twice(kappa, "kappa")
    if tk == 0:
        raise ValueError("kappa = 0 is outside the monopole sector")
    ak = abs(tk) / 2
    j = ak if abs(tk) == 1 else ak - 1
    while True:
        yield j
        j += 1


def j_min(kappa: float) -> float:
    return next(allowed_j(kappa))


@dataclass(frozen=True)
class QuantumNumbers:
    epsilon: float
    j: float
    m: float
    kappa: float

    def __post_init__(self):
        tj, tm, tk = twice(self.j, "j"), twice(self.m, "m"), twice(self.kappa, "kappa")
        if tk == 0:
            raise ValueError("kappa must be nonzero")
        if (tj - tk) % 2:
            raise ValueError(f"j={self.j} and kappa={self.kappa} must differ by an integer")
        if (tj - tm) % 2 or abs(tm) > tj:
            raise ValueError(f"m={self.m} not allowed for j={self.j}")
        if tj < 2 * j_min(self.kappa):
            raise ValueError(f"j={self.j} below the minimum {j_min(self.kappa)} for kappa={self.kappa}")

    @property
    def family(self) -> str:
        """Which separation pattern applies: generic, j=|kappa| or minimal."""
        ak = abs(self.kappa)
        if self.j >= ak + 1 - 1e-9:
            return "generic"
        if abs(self.j - ak) < 1e-9:
            return "j_eq_abs_kappa"
        return "minimal"


# --- Wigner small-d ------------------------------------------------------------

@functools.lru_cache(maxsize=4096)
def _wigner_terms(tj: int, tmp: int, tm: int) -> tuple[tuple[float, int, int], ...]:
    """(coefficient, cos power, sin power) of the half-angle expansion; arguments doubled."""
    jp, jm_ = (tj + tmp) // 2, (tj - tmp) // 2
    mp_, mm = (tj + tm) // 2, (tj - tm) // 2
    pref = math.sqrt(math.factorial(jp) * math.factorial(jm_) * math.factorial(mp_) * math.factorial(mm))
    shift = (tmp - tm) // 2
    terms = []
    for k in range(0, tj + 1):
        facts = (mp_ - k, k, jm_ - k, k + shift)
        if min(facts) < 0:
            continue
        coef = (-1) ** (k + shift) * pref / math.prod(math.factorial(f) for f in facts)
        terms.append((coef, tj - 2 * k - shift, 2 * k + shift))
    return tuple(terms)


def _check_triple(tj: int, tmp: int, tm: int):
    if tj < 0 or abs(tmp) > tj or abs(tm) > tj or (tj - tmp) % 2 or (tj - tm) % 2:
        raise ValueError(f"invalid Wigner triple (j, m', m) = ({tj / 2}, {tmp / 2}, {tm / 2})")


@dataclass(frozen=True)
class WignerDSpec:
    j: float
    mprime: float
    sigma: float

    def __post_init__(self):
        _check_triple(twice(self.j), twice(self.mprime), twice(self.sigma))

    @property
    def doubled(self) -> tuple[int, int, int]:
        return twice(self.j), twice(self.mprime), twice(self.sigma)


def wigner_d(spec: WignerDSpec, theta):
    """d^j_{m' sigma}(theta); theta may be an array."""
    th = np.asarray(theta, dtype=float)
    c, s = np.cos(th / 2), np.sin(th / 2)
    out = np.zeros_like(th)
    for coef, pc, ps in _wigner_terms(*spec.doubled):
        out = out + coef * c**pc * s**ps
    return out if out.ndim else float(out)


def wigner_d_derivative(spec: WignerDSpec, theta):
    """Analytic d/dtheta of wigner_d, term by term in the half-angle expansion."""
    th = np.asarray(theta, dtype=float)
    c, s = np.cos(th / 2), np.sin(th / 2)
    out = np.zeros_like(th)
    for coef, p, q in _wigner_terms(*spec.doubled):
        if p:
            out = out - 0.5 * coef * p * c ** (p - 1) * s ** (q + 1)
        if q:
            out = out + 0.5 * coef * q * c ** (p + 1) * s ** (q - 1)
    return out if out.ndim else float(out)


def monopole_harmonic(j: float, m: float, sigma: float, theta: float, phi: float) -> complex:
    """D_sigma = D^j_{-m, sigma}(phi, theta, 0); zero when |sigma| > j."""
    tj, ts = twice(j), twice(sigma)
    if abs(ts) > tj:
        return 0.0j
    return complex(np.exp(1j * m * phi) * wigner_d(WignerDSpec(j, -m, sigma), theta))


def monopole_harmonic_jet(j: float, m: float, sigma: float, theta: float, phi: float) -> tuple[complex, complex, complex]:
    """(D_sigma, d_theta D_sigma, d_phi D_sigma)."""
    tj, ts = twice(j), twice(sigma)
    if abs(ts) > tj:
        return 0j, 0j, 0j
    spec = WignerDSpec(j, -m, sigma)
    phase = np.exp(1j * m * phi)
    val = complex(phase * wigner_d(spec, theta))
    return val, complex(phase * wigner_d_derivative(spec, theta)), 1j * m * val


# --- ladder coefficients ---------------------------------------------------------

def ladder(j: float, sigma: float) -> tuple[float, float]:
    """(p, q) with d_theta D_s = p D_{s-1} - q D_{s+1} and
    (-m - s cos) / sin D_s = -p D_{s-1} - q D_{s+1}."""
    tj, ts = twice(j), twice(sigma)
    if abs(ts) > tj:
        raise ValueError(f"|sigma|={abs(sigma)} exceeds j={j}")
    return (0.5 * math.sqrt((tj + ts) * (tj - ts + 2) / 4),
            0.5 * math.sqrt((tj - ts) * (tj + ts + 2) / 4))


def recursion_coeffs(j: float, kappa: float, strict: bool = True) -> tuple[float, float, float, float]:
    """The coefficients a, b, c, d of the six recursions.

    With ``strict=False`` a coefficient with a negative radicand (its partner
    D-function does not exist for this j) is returned as 0.
    """
    radicands = (
        (j + kappa - 1) * (j - kappa + 2),
        (j - kappa - 1) * (j + kappa + 2),
        (j + kappa) * (j - kappa + 1),
        (j - kappa) * (j + kappa + 1),
    )
    out = []
    for name, rad in zip("abcd", radicands):
        if rad < -1e-12:
            if strict:
                raise ValueError(f"negative radicand for {name} at (j={j}, kappa={kappa})")
            rad = 0.0
        out.append(0.5 * math.sqrt(max(rad, 0.0)))
    return tuple(out)


def verify_recursions(j: float, kappa: float, m: float, theta: float, phi: float = 0.0) -> dict[str, float]:
    """Residuals of the six ladder relations for D_{kappa-1}, D_kappa, D_{kappa+1}."""
    if not (POLE_GUARD < theta < math.pi - POLE_GUARD):
        raise PoleGuardError(f"theta={theta} too close to a pole")
    a, b, c, d = recursion_coeffs(j, kappa, strict=False)

    def jet(s):
        return monopole_harmonic_jet(j, m, s, theta, phi)

    Dm2, Dm1, D0, Dp1, Dp2 = (jet(kappa + k)[0] for k in (-2, -1, 0, 1, 2))
    dm1, d0, dp1 = (jet(kappa + k)[1] for k in (-1, 0, 1))
    ct, st = math.cos(theta), math.sin(theta)

    def factor(s):
        return (-m - s * ct) / st

    return {
        "dtheta D(k-1)": abs(dm1 - (a * Dm2 - c * D0)),
        "cot D(k-1)": abs(factor(kappa - 1) * Dm1 - (-a * Dm2 - c * D0)),
        "dtheta D(k)": abs(d0 - (c * Dm1 - d * Dp1)),
        "cot D(k)": abs(factor(kappa) * D0 - (-c * Dm1 - d * Dp1)),
        "dtheta D(k+1)": abs(dp1 - (d * D0 - b * Dp2)),
        "cot D(k+1)": abs(factor(kappa + 1) * Dp1 - (-d * D0 - b * Dp2)),
    }


def combined_relation_residuals(j: float, kappa: float, m: float, theta: float) -> dict[str, float]:
    """The two combined relations used for the Lorentz condition.

    ``lower`` is d D_{k-1} - (m + (k-1) cos)/sin D_{k-1} = -sqrt((j-k+1)(j+k)) D_k.
    ``upper_reference`` is the tabulated companion for D_{k+1} (with a minus sign,
    which fails); ``upper`` is the sign-corrected form used in the Lorentz-condition
    bracket, d D_{k+1} + (m + (k+1) cos)/sin D_{k+1} = sqrt((j+k+1)(j-k)) D_k.
    """
    ct, st = math.cos(theta), math.sin(theta)
    Dm1, dm1, _ = monopole_harmonic_jet(j, m, kappa - 1, theta, 0.0)
    D0 = monopole_harmonic_jet(j, m, kappa, theta, 0.0)[0]
    Dp1, dp1, _ = monopole_harmonic_jet(j, m, kappa + 1, theta, 0.0)
    lower_rhs = -math.sqrt(max((j - kappa + 1) * (j + kappa), 0.0)) * D0
    upper_coef = math.sqrt(max((j + kappa + 1) * (j - kappa), 0.0))
    return {
        "lower": abs(dm1 - (m + (kappa - 1) * ct) / st * Dm1 - lower_rhs),
        "upper_reference": abs(dp1 - (m + (kappa + 1) * ct) / st * Dp1 + upper_coef * D0),
        "upper": abs(dp1 + (m + (kappa + 1) * ct) / st * Dp1 - upper_coef * D0),
    }


# --- ansatz -----------------------------------------------------------------------

FAMILY_LABELS = {
    "generic": "j >= |kappa| + 1, three sigma per block",
    "j_eq_abs_kappa_pos": "j = |kappa|, kappa > 0",
    "j_eq_abs_kappa_neg": "j = |kappa|, kappa < 0",
    "minimal_unit_pos": "j = 0, kappa = 1",
    "minimal_unit_neg": "j = 0, kappa = -1",
    "minimal_pos": "j = kappa - 1, kappa >= 3/2",
    "minimal_neg": "j = |kappa| - 1, kappa <= -3/2",
}


@dataclass(frozen=True)
class FieldAnsatz:
    qn: QuantumNumbers
    slots: tuple  # sigma per slot, None where the radial function vanishes
    family: str

    @property
    def active(self) -> tuple[int, ...]:
        """1-based indices of occupied slots."""
        return tuple(i + 1 for i, s in enumerate(self.slots) if s is not None)

    def harmonics(self, theta: float, phi: float) -> np.ndarray:
        q = self.qn
        return np.array([0j if s is None else monopole_harmonic(q.j, q.m, s, theta, phi) for s in self.slots])

    def harmonic_jets(self, theta: float, phi: float) -> np.ndarray:
        """Array (3, 10): D, d_theta D, d_phi D per slot."""
        q = self.qn
        out = np.zeros((3, 10), dtype=complex)
        for i, s in enumerate(self.slots):
            if s is not None:
                out[:, i] = monopole_harmonic_jet(q.j, q.m, s, theta, phi)
        return out

    def column(self, f, t: float, theta: float, phi: float) -> np.ndarray:
        """Phi = exp(-i eps t) [f_i D_sigma_i]."""
        return np.exp(-1j * self.qn.epsilon * t) * np.asarray(f, dtype=complex) * self.harmonics(theta, phi)

    def jet(self, f, df, t: float, theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
        """Value and coordinate gradient (t, r, theta, phi) of the assembled column."""
        f = np.asarray(f, dtype=complex)
        df = np.asarray(df, dtype=complex)
        h = self.harmonic_jets(theta, phi)
        phase = np.exp(-1j * self.qn.epsilon * t)
        val = phase * f * h[0]
        grad = np.array([-1j * self.qn.epsilon * val, phase * df * h[0], phase * f * h[1], phase * f * h[2]])
        return val, grad


def build_ansatz(qn: QuantumNumbers) -> FieldAnsatz:
    k = qn.kappa
    fam = qn.family
    if fam == "generic":
        keep, name = (-1, 0, 1), "generic"
    elif fam == "j_eq_abs_kappa":
        keep, name = ((-1, 0), "j_eq_abs_kappa_pos") if k > 0 else ((0, 1), "j_eq_abs_kappa_neg")
    else:
        unit = abs(twice(k)) == 2
        if k > 0:
            keep, name = (-1,), "minimal_unit_pos" if unit else "minimal_pos"
        else:
            keep, name = (1,), "minimal_unit_neg" if unit else "minimal_neg"
    slots = tuple(k + off if off in keep else None for off in SIGMA_OFFSETS)
    # occupied slots are exactly those whose D-function exists
    assert all((s is not None) == (abs(k + off) <= qn.j + 1e-9) for s, off in zip(slots, SIGMA_OFFSETS))
    return FieldAnsatz(qn, slots, name)


# --- Sigma^kappa ----------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def ij12_eigenvalues() -> tuple[float, ...]:
    """Diagonal of i j^12 in the cyclic basis; equals -(sigma - kappa) per slot."""
    m = 1j * build_j(1, 2, DKBasis.CYCLIC).entries
    off = m - np.diag(np.diag(m))
    if np.max(np.abs(off)) > 1e-12:
        raise RuntimeError("i j^12 is not diagonal in the cyclic basis")
    return tuple(float(v) for v in np.diag(m).real)


def sigma_apply(kappa: float, ansatz: FieldAnsatz, f, point, t: float = 0.0) -> np.ndarray:
    """Sigma^kappa_{theta,phi} applied to the assembled column at (theta, phi).

    ``point`` is (theta, phi) or any object with those attributes.  Derivatives of
    D-functions are analytic.
    """
    theta, phi = (point.theta, point.phi) if hasattr(point, "theta") else point
    if not (POLE_GUARD < theta < math.pi - POLE_GUARD):
        raise PoleGuardError(f"theta={theta} too close to a pole")
    bs = _beta_array(DKBasis.CYCLIC)
    j12 = _generator_array(DKBasis.CYCLIC)[1, 2]
    h = ansatz.harmonic_jets(theta, phi)
    f = np.asarray(f, dtype=complex) * np.exp(-1j * ansatz.qn.epsilon * t)
    val, dth, dph = f * h[0], f * h[1], f * h[2]
    ct, st = math.cos(theta), math.sin(theta)
    return 1j * bs[1] @ dth + bs[2] @ (1j * dph + (1j * j12 @ val - kappa * val) * ct) / st


def sigma_matrix(ansatz: FieldAnsatz) -> tuple[np.ndarray, float]:
    """Separated Sigma^kappa: S with (Sigma Phi)_k = e^{-i eps t} sum_i S[k, i] f_i D_{sigma_k}.

    Built from the cyclic beta-matrices and the ladder coefficients.  The second
    return value is the largest coefficient multiplying a D-function that belongs to
    no slot of the output row (it must vanish for the ansatz to separate).
    """
    q = ansatz.qn
    bs = _beta_array(DKBasis.CYCLIC)
    lam = ij12_eigenvalues()
    out = np.zeros((10, 10), dtype=complex)
    leak = 0.0
    row_sigma = [q.kappa + off for off in SIGMA_OFFSETS]
    for i, s in enumerate(ansatz.slots):
        if s is None:
            continue
        if abs(lam[i] + (s - q.kappa)) > 1e-12:
            raise RuntimeError(f"slot {i + 1}: i j^12 eigenvalue inconsistent with sigma")
        p, qq = ladder(q.j, s)
        # i beta1 (p D_{s-1} - q D_{s+1}) + beta2 (-p D_{s-1} - q D_{s+1})
        down = (1j * bs[1][:, i] - bs[2][:, i]) * p
        up = -(1j * bs[1][:, i] + bs[2][:, i]) * qq
        for k in range(10):
            for coef, target in ((down[k], s - 1), (up[k], s + 1)):
                if abs(coef) < 1e-15 or abs(target) > q.j + 1e-9:
                    continue
                if abs(target - row_sigma[k]) < 1e-9:
                    out[k, i] += coef
                else:
                    leak = max(leak, abs(coef))
    return out, leak


# reference column of Sigma Phi / (sqrt2 e^{-i eps t}) for the generic ansatz:
# row -> {slot: (constant, coefficient name)}
SIGMA_PATTERN_REFERENCE = {
    1: {5: (-1, "c"), 7: (-1, "d")},
    2: {9: (-1j, "c")},
    3: {8: (-1j, "c"), 10: (1j, "d")},
    4: {9: (-1j, "d")},
    5: {1: (1, "c")},
    6: {},
    7: {1: (1, "d")},
    8: {3: (-1j, "c")},
    9: {2: (1j, "c"), 4: (-1j, "d")},
    10: {3: (1j, "d")},
}
# rows whose tabulated sign disagrees with the assembled operator (and with the
# radial system, which carries +i sqrt2 c f9 / r in its second equation)
SIGMA_PATTERN_CORRECTIONS = {(2, 9): (-1j, 1j)}


def sigma_pattern(j: float, kappa: float, reference: bool = False) -> np.ndarray:
    """The generic Sigma column as a 10x10 coefficient matrix, with the corrections applied unless ``reference``."""
    _, _, c, d = recursion_coeffs(j, kappa, strict=False)
    vals = {"c": c, "d": d}
    out = np.zeros((10, 10), dtype=complex)
    for row, entries in SIGMA_PATTERN_REFERENCE.items():
        for slot, (const, name) in entries.items():
            if not reference and (row, slot) in SIGMA_PATTERN_CORRECTIONS:
                const = SIGMA_PATTERN_CORRECTIONS[row, slot][1]
            out[row - 1, slot - 1] = math.sqrt(2) * const * vals[name]
    return out


# --- total momentum -------------------------------------------------------------

@dataclass(frozen=True)
class MomentumOperator:
    """J = i (A d_theta + B d_phi) + C (i j^12 - kappa) acting on a column, with
    coefficient functions of (theta, phi)."""
    name: str
    d_theta: Callable[[float, float], float]
    d_phi: Callable[[float, float], complex]
    spin: Callable[[float, float], float]
    kappa: float

    def apply(self, value, d_theta, d_phi, theta: float, phi: float) -> np.ndarray:
        lam = np.array(ij12_eigenvalues())
        return (self.d_theta(theta, phi) * np.asarray(d_theta) + self.d_phi(theta, phi) * np.asarray(d_phi)
                + self.spin(theta, phi) * (lam - self.kappa) * np.asarray(value))


def total_momentum(kappa: float) -> tuple[MomentumOperator, MomentumOperator, MomentumOperator]:
    def cot(th):
        return math.cos(th) / math.sin(th)

    j1 = MomentumOperator(
        "J1",
        lambda th, ph: 1j * math.sin(ph),
        lambda th, ph: 1j * cot(th) * math.cos(ph),
        lambda th, ph: math.cos(ph) / math.sin(th),
        kappa,
    )
    j2 = MomentumOperator(
        "J2",
        lambda th, ph: -1j * math.cos(ph),
        lambda th, ph: 1j * cot(th) * math.sin(ph),
        lambda th, ph: math.sin(ph) / math.sin(th),
        kappa,
    )
    j3 = MomentumOperator("J3", lambda th, ph: 0.0, lambda th, ph: -1j, lambda th, ph: 0.0, kappa)
    return j1, j2, j3


def _apply_op(op: MomentumOperator, field: Callable, theta: float, phi: float) -> np.ndarray:
    """Apply a J component to field(theta, phi) -> column, derivatives by 5-point stencil."""
    from ._numdiff import partial

    def g(x):
        return field(x[0], x[1])

    x = np.array([theta, phi])
    return op.apply(field(theta, phi), partial(g, x, 0), partial(g, x, 1), theta, phi)


def momentum_residuals(ansatz: FieldAnsatz, f, theta: float, phi: float) -> dict[str, float]:
    """J^2 = j(j+1), J_3 = m and [J_1, J_2] = i J_3 on the assembled column, relative residuals."""
    q = ansatz.qn
    ops = total_momentum(q.kappa)
    f = np.asarray(f, dtype=complex)

    def phi0(th, ph):
        return ansatz.column(f, 0.0, th, ph)

    def applied(op):
        def fld(th, ph):
            val, dth, dph = ansatz.harmonic_jets(th, ph) * f
            return op.apply(val, dth, dph, th, ph)
        return fld

    base = phi0(theta, phi)
    scale = max(np.max(np.abs(base)), 1e-300)
    once = {op.name: applied(op) for op in ops}
    jsq = sum(_apply_op(op, once[op.name], theta, phi) for op in ops)
    j1j2 = _apply_op(ops[0], once["J2"], theta, phi)
    j2j1 = _apply_op(ops[1], once["J1"], theta, phi)
    return {
        "J^2": float(np.max(np.abs(jsq - q.j * (q.j + 1) * base)) / scale),
        "J3": float(np.max(np.abs(once["J3"](theta, phi) - J3_EIGENVALUE_SIGN * q.m * base)) / scale),
        "[J1,J2]": float(np.max(np.abs(j1j2 - j2j1 - 1j * once["J3"](theta, phi))) / scale),
    }
