"""Radial systems: derivation from the separated operator, reduction, closed forms, integration.

A radial equation is a sum of terms coeff * r**rpow * f_slot^(order).  Systems
are derived from the cyclic beta-matrices and the separated Sigma operator,
never typed in by hand; the reference systems are kept as data only so the
derived ones can be compared against them.
"""

from __future__ import annotations

import enum
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .algebra import DKBasis
from .angular import FieldAnsatz, QuantumNumbers, build_ansatz, recursion_coeffs, sigma_matrix
from .constants import SIGMA_OFFSETS
from .tetrad import SpacetimePoint, _beta_array, _generator_array, spherical_dk_operator

_ZERO = 1e-13


class SystemOrder(str, enum.Enum):
    FIRST_ORDER_10 = "FirstOrder10"
    REDUCED_4 = "Reduced4"


class IntegrationError(RuntimeError):
    def __init__(self, message: str, last_r: float):
        super().__init__(f"{message} (last good r = {last_r:.6g})")
        self.last_r = last_r


@dataclass(frozen=True)
class Term:
    slot: int  # 1-based
    order: int  # derivative order
    rpow: int  # power of r
    coeff: complex

    def evaluate(self, r, jets) -> np.ndarray:
        """``jets[order][slot - 1]`` holds f^(order) on the grid ``r``."""
        return self.coeff * np.asarray(r, dtype=float) ** self.rpow * jets[self.order][self.slot - 1]


def _merge(terms) -> tuple[Term, ...]:
    acc = defaultdict(complex)
    for t in terms:
        acc[t.slot, t.order, t.rpow] += t.coeff
    return tuple(Term(s, o, p, c) for (s, o, p), c in sorted(acc.items()) if abs(c) > _ZERO)


def _derivative(terms) -> tuple[Term, ...]:
    out = []
    for t in terms:
        if t.rpow:
            out.append(Term(t.slot, t.order, t.rpow - 1, t.coeff * t.rpow))
        out.append(Term(t.slot, t.order + 1, t.rpow, t.coeff))
    return _merge(out)


@dataclass(frozen=True)
class Equation:
    row: int
    terms: tuple[Term, ...]

    def evaluate(self, r, jets) -> np.ndarray:
        return sum((t.evaluate(r, jets) for t in self.terms), np.zeros(np.shape(r), dtype=complex))

    @property
    def slots(self) -> set[int]:
        return {t.slot for t in self.terms}

    @property
    def max_order(self) -> int:
        return max((t.order for t in self.terms), default=0)

    def coefficient(self, slot: int, order: int, rpow: int) -> complex:
        return sum((t.coeff for t in self.terms if (t.slot, t.order, t.rpow) == (slot, order, rpow)), 0j)

    def __str__(self) -> str:
        parts = []
        for t in self.terms:
            d = "'" * t.order
            rp = "" if t.rpow == 0 else f" r^{t.rpow}"
            parts.append(f"({t.coeff.real:+.6g}{t.coeff.imag:+.6g}j){rp} f{t.slot}{d}")
        return " + ".join(parts) + " = 0"


@dataclass(frozen=True)
class RadialSystem:
    qn: QuantumNumbers
    mass: float
    equations: tuple[Equation, ...]
    order: SystemOrder
    family: str
    dropped: int = 0  # trivial 0 = 0 rows removed at construction
    rules: dict = field(default_factory=dict)  # slot -> terms, for Reduced4
    parent: "RadialSystem | None" = None

    @property
    def params(self) -> dict[str, float]:
        a, b, c, d = recursion_coeffs(self.qn.j, self.qn.kappa, strict=False)
        return {"epsilon": self.qn.epsilon, "mass": self.mass, "kappa": self.qn.kappa,
                "j": self.qn.j, "c": c, "d": d}

    @property
    def slots(self) -> tuple[int, ...]:
        return tuple(sorted(set().union(*(e.slots for e in self.equations))))

    def first_order(self) -> "RadialSystem":
        return self if self.order is SystemOrder.FIRST_ORDER_10 else self.parent


# --- derivation ----------------------------------------------------------------

def _separated_blocks(ansatz: FieldAnsatz) -> dict[tuple[int, int], np.ndarray]:
    """Coefficient matrices keyed by (order, rpow) of the operator acting on the radial slots."""
    bs = _beta_array(DKBasis.CYCLIC)
    j = _generator_array(DKBasis.CYCLIC)
    q = ansatz.qn
    spin = 1j * (bs[1] @ j[3, 1] + bs[2] @ j[3, 2])
    sig, leak = sigma_matrix(ansatz)
    if leak > _ZERO:
        raise RuntimeError(f"Sigma does not separate on this ansatz (leak {leak:.3g})")
    blocks = {
        (0, 0): q.epsilon * bs[0],
        (1, 0): 1j * bs[3],
        (0, -1): spin + sig,
    }
    # r-dependent blocks must not mix different D-functions
    offs = np.array(SIGMA_OFFSETS)
    mixing = offs[:, None] != offs[None, :]
    for key in ((0, 0), (1, 0)):
        if np.max(np.abs(blocks[key][mixing]), initial=0.0) > _ZERO:
            raise RuntimeError("beta^0 or beta^3 mixes different D-functions")
    if np.max(np.abs(spin[mixing]), initial=0.0) > _ZERO:
        raise RuntimeError("spin-connection term mixes different D-functions")
    return blocks


def radial_system(qn: QuantumNumbers, mass: float) -> RadialSystem:
    """FirstOrder10 system for the ansatz selected by ``qn``."""
    ansatz = build_ansatz(qn)
    blocks = _separated_blocks(ansatz)
    active = set(ansatz.active)
    equations, dropped = [], 0
    for row in range(1, 11):
        if abs(qn.kappa + SIGMA_OFFSETS[row - 1]) > qn.j + 1e-9:
            dropped += 1  # multiplies a D-function that vanishes identically
            continue
        terms = [Term(s, o, p, complex(mat[row - 1, s - 1]))
                 for (o, p), mat in blocks.items() for s in sorted(active)]
        if row in active:
            terms.append(Term(row, 0, 0, -mass + 0j))
        terms = _merge(terms)
        if not terms:
            dropped += 1
            continue
        equations.append(Equation(row, terms))
    return RadialSystem(qn, float(mass), tuple(equations), SystemOrder.FIRST_ORDER_10, ansatz.family, dropped)


# --- reference systems, kept for comparison only --------------------------------

# (row, [(slot, order, rpow, constant, symbol)]); symbols: 1, eps, m, c2 = sqrt2 c,
# d2 = sqrt2 d, c, d, sk = sqrt|kappa|
_GENERIC_REFERENCE = (
    (1, [(6, 1, 0, -1, "1"), (6, 0, -1, -2, "1"), (5, 0, -1, -1, "c2"), (7, 0, -1, -1, "d2"), (1, 0, 0, -1, "m")]),
    (2, [(5, 0, 0, 1j, "eps"), (8, 1, 0, 1j, "1"), (8, 0, -1, 1j, "1"), (9, 0, -1, 1j, "c2"), (2, 0, 0, -1, "m")]),
    (3, [(6, 0, 0, 1j, "eps"), (8, 0, -1, -2j, "c"), (10, 0, -1, 2j, "d"), (3, 0, 0, -1, "m")]),
    (4, [(7, 0, 0, 1j, "eps"), (10, 1, 0, -1j, "1"), (10, 0, -1, -1j, "1"), (9, 0, -1, -1j, "d2"), (4, 0, 0, -1, "m")]),
    (5, [(2, 0, 0, 1j, "eps"), (1, 0, -1, 1, "c2"), (5, 0, 0, -1, "m")]),
    (6, [(3, 0, 0, -1j, "eps"), (1, 1, 0, -1, "1"), (6, 0, 0, -1, "m")]),
    (7, [(4, 0, 0, -1j, "eps"), (1, 0, -1, 1, "d2"), (7, 0, 0, -1, "m")]),
    (8, [(2, 1, 0, -1j, "1"), (2, 0, -1, -1j, "1"), (3, 0, -1, -1j, "c2"), (8, 0, 0, -1, "m")]),
    (9, [(2, 0, -1, 1j, "c2"), (4, 0, -1, -1j, "d2"), (9, 0, 0, -1, "m")]),
    (10, [(4, 1, 0, 1j, "1"), (4, 0, -1, 1j, "1"), (3, 0, -1, 1j, "d2"), (10, 0, 0, -1, "m")]),
)
_MINIMAL_POS_REFERENCE = (
    (2, [(5, 0, 0, 1j, "eps"), (8, 1, 0, 1j, "1"), (8, 0, -1, 1j, "1"), (2, 0, 0, -1, "m")]),
    (5, [(2, 0, 0, -1j, "1"), (5, 0, 0, -1, "m")]),
    (8, [(2, 1, 0, -1j, "1"), (2, 0, -1, -1j, "1"), (8, 0, 0, -1, "m")]),
)
_MINIMAL_NEG_REFERENCE = (
    (4, [(7, 0, 0, 1j, "eps"), (10, 1, 0, -1j, "1"), (10, 0, -1, -1j, "1"), (4, 0, 0, -1, "m")]),
    (7, [(4, 0, 0, -1j, "1"), (7, 0, 0, -1, "m")]),
    (10, [(4, 1, 0, 1j, "1"), (4, 0, -1, 1j, "1"), (10, 0, 0, -1, "m")]),
)
_J_EQ_KAPPA_POS_REFERENCE = (
    (1, [(6, 1, 0, -1, "1"), (6, 0, -1, -2, "1"), (5, 0, -1, -1, "sk"), (1, 0, 0, -1, "m")]),
    (2, [(5, 0, 0, 1j, "eps"), (8, 1, 0, 1j, "1"), (8, 0, -1, 1j, "1"), (9, 0, -1, 1j, "sk"), (2, 0, 0, -1, "m")]),
    (3, [(6, 0, 0, 1j, "eps"), (8, 0, -1, -1j, "sk"), (3, 0, 0, -1, "m")]),
    (5, [(2, 0, 0, 1j, "eps"), (1, 0, -1, 1, "sk"), (5, 0, 0, -1, "m")]),
    (6, [(3, 0, 0, -1j, "eps"), (1, 1, 0, -1, "1"), (6, 0, 0, -1, "m")]),
    (8, [(2, 1, 0, -1j, "1"), (2, 0, -1, -1j, "1"), (3, 0, -1, -1j, "sk"), (8, 0, 0, -1, "m")]),
    (9, [(2, 0, -1, 1j, "sk"), (9, 0, 0, -1, "m")]),
)
_J_EQ_KAPPA_NEG_REFERENCE = (
    (1, [(6, 1, 0, 1, "1"), (6, 0, -1, 2, "1"), (7, 0, -1, 1, "sk"), (1, 0, 0, 1, "m")]),
    (3, [(6, 0, 0, 1j, "eps"), (10, 0, -1, -1j, "sk"), (3, 0, 0, -1, "m")]),
    (4, [(7, 0, 0, 1j, "eps"), (9, 0, -1, -1j, "sk"), (10, 1, 0, -1j, "1"), (10, 0, -1, -1j, "1"), (4, 0, 0, -1, "m")]),
    (6, [(3, 0, 0, 1j, "eps"), (1, 1, 0, 1, "1"), (6, 0, 0, 1, "m")]),
    (7, [(4, 0, 0, -1j, "eps"), (1, 0, -1, 1, "sk"), (7, 0, 0, 1, "m")]),
    (9, [(4, 0, -1, 1j, "sk"), (9, 0, 0, 1, "m")]),
    (10, [(4, 1, 0, 1j, "1"), (4, 0, -1, 1j, "1"), (3, 0, -1, 1j, "sk"), (10, 0, 0, -1, "m")]),
)
REFERENCE_SYSTEMS = {
    "generic": _GENERIC_REFERENCE,
    "j_eq_abs_kappa_pos": _J_EQ_KAPPA_POS_REFERENCE,
    "j_eq_abs_kappa_neg": _J_EQ_KAPPA_NEG_REFERENCE,
    "minimal_unit_pos": _MINIMAL_POS_REFERENCE,
    "minimal_pos": _MINIMAL_POS_REFERENCE,
    "minimal_unit_neg": _MINIMAL_NEG_REFERENCE,
    "minimal_neg": _MINIMAL_NEG_REFERENCE,
}


def reference_system(qn: QuantumNumbers, mass: float) -> tuple[Equation, ...]:
    """The reference system for this family, with numeric coefficients."""
    fam = build_ansatz(qn).family
    _, _, c, d = recursion_coeffs(qn.j, qn.kappa, strict=False)
    sym = {"1": 1.0, "eps": qn.epsilon, "m": mass, "c2": math.sqrt(2) * c, "d2": math.sqrt(2) * d,
           "c": c, "d": d, "sk": math.sqrt(abs(qn.kappa))}
    return tuple(Equation(row, _merge(Term(s, o, p, complex(k * sym[name])) for s, o, p, k, name in terms))
                 for row, terms in REFERENCE_SYSTEMS[fam])


@dataclass(frozen=True)
class Mismatch:
    row: int
    derived: str
    reference: str
    note: str


def _proportional(a: Equation, b: Equation, tol: float = 1e-12) -> bool:
    keys = {(t.slot, t.order, t.rpow) for t in a.terms} | {(t.slot, t.order, t.rpow) for t in b.terms}
    ref = next(iter(sorted(keys)))
    ca, cb = a.coefficient(*ref), b.coefficient(*ref)
    if abs(ca) < tol or abs(cb) < tol:
        return False
    scale = ca / cb
    return all(abs(a.coefficient(*k) - scale * b.coefficient(*k)) <= tol * max(1.0, abs(a.coefficient(*k)))
               for k in keys)


def compare_to_reference(sys: RadialSystem) -> list[Mismatch]:
    """Rows where the derived system is not a nonzero multiple of the reference one."""
    ref = {e.row: e for e in reference_system(sys.qn, sys.mass)}
    derived = {e.row: e for e in sys.equations}
    out = []
    for row in sorted(ref.keys() | derived.keys()):
        a, b = derived.get(row), ref.get(row)
        if a is None or b is None:
            out.append(Mismatch(row, str(a), str(b), "row present in only one system"))
        elif not _proportional(a, b):
            out.append(Mismatch(row, str(a), str(b), "coefficients differ"))
    return out


# --- reduction -------------------------------------------------------------------

def _solve_for(eq: Equation, slot: int) -> tuple[Term, ...]:
    """Terms T with f_slot = sum T, from an equation linear in f_slot (no derivative of it)."""
    own = [t for t in eq.terms if t.slot == slot]
    if len(own) != 1 or own[0].order != 0 or own[0].rpow != 0:
        raise ValueError(f"row {eq.row} cannot be solved algebraically for f{slot}")
    k = own[0].coeff
    return _merge(Term(t.slot, t.order, t.rpow, -t.coeff / k) for t in eq.terms if t.slot != slot)


def _substitute(terms, rules) -> tuple[Term, ...]:
    out = []
    for t in terms:
        if t.slot not in rules:
            out.append(t)
            continue
        expr = rules[t.slot]
        for _ in range(t.order):
            expr = _derivative(expr)
        out.extend(Term(u.slot, u.order, u.rpow + t.rpow, u.coeff * t.coeff) for u in expr)
    return _merge(out)


def eliminate_auxiliary(sys: RadialSystem) -> RadialSystem:
    """Reduce a generic system to second order in f1..f4; ``rules`` rebuild f5..f10."""
    if sys.family != "generic" or sys.order is not SystemOrder.FIRST_ORDER_10:
        raise ValueError("reduction applies to the generic first-order system")
    if sys.mass == 0:
        raise ValueError("mass must be nonzero to eliminate f5..f10")
    rows = {e.row: e for e in sys.equations}
    rules = {}
    for k in range(5, 11):
        expr = _solve_for(rows[k], k)
        if any(t.slot > 4 for t in expr):
            raise ValueError(f"row {k} couples auxiliary slots")
        rules[k] = expr
    reduced = tuple(Equation(k, _substitute(rows[k].terms, rules)) for k in range(1, 5))
    return RadialSystem(sys.qn, sys.mass, reduced, SystemOrder.REDUCED_4, sys.family, sys.dropped,
                        rules, sys)


def reconstruct(sys: RadialSystem, r, jets14) -> tuple[np.ndarray, np.ndarray]:
    """f5..f10 and their first derivatives from jets (f, f', f'') of f1..f4."""
    if sys.order is not SystemOrder.REDUCED_4:
        raise ValueError("reconstruction rules belong to a Reduced4 system")
    vals = np.zeros((6, np.size(r)), dtype=complex)
    ders = np.zeros_like(vals)
    for i, k in enumerate(range(5, 11)):
        vals[i] = sum(t.evaluate(r, jets14) for t in sys.rules[k])
        ders[i] = sum(t.evaluate(r, jets14) for t in _derivative(sys.rules[k]))
    return vals, ders


# --- profiles --------------------------------------------------------------------

@dataclass
class RadialProfile:
    grid: np.ndarray
    values: np.ndarray  # (10, n)
    provenance: str
    derivatives: np.ndarray | None = None  # (10, n)
    second: np.ndarray | None = None  # (10, n)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.grid.ndim != 1 or len(self.grid) < 2 or np.any(np.diff(self.grid) <= 0) or self.grid[0] <= 0:
            raise ValueError("grid must be strictly increasing, positive, with at least 2 points")
        if self.values.shape != (10, len(self.grid)) or not np.all(np.isfinite(self.values)):
            raise ValueError("values must be a finite (10, len(grid)) array")

    def jets(self, order: int = 1) -> list[np.ndarray]:
        out = [self.values]
        for k, arr in ((1, self.derivatives), (2, self.second)):
            if k > order:
                break
            out.append(arr if arr is not None else _stencil(self.grid, out[-1]))
        return out

    def at(self, r: float) -> tuple[np.ndarray, np.ndarray]:
        """Values and first derivatives at r, by cubic Hermite interpolation."""
        if not (self.grid[0] <= r <= self.grid[-1]):
            raise ValueError(f"r={r} outside the profile grid [{self.grid[0]}, {self.grid[-1]}]")
        d1 = self.jets(1)[1]
        spl = CubicHermiteSpline(self.grid, self.values.T, d1.T)
        # f' from the derivative data directly when a second derivative is known
        if self.second is not None:
            dspl = CubicHermiteSpline(self.grid, d1.T, self.second.T)
            return spl(r), dspl(r)
        return spl(r), spl(r, 1)

    def to_csv(self, path) -> None:
        cols = [self.grid]
        header = ["r"]
        for i in range(10):
            cols += [self.values[i].real, self.values[i].imag]
            header += [f"re_f{i + 1}", f"im_f{i + 1}"]
        np.savetxt(path, np.column_stack(cols), delimiter=",", header=",".join(header), comments="", fmt="%.17g")


def _stencil(grid: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """First derivative along the last axis; five-point central in the interior."""
    n = len(grid)
    if n < 5:
        raise ValueError("grid too coarse: at least 5 points are needed for the derivative stencil")
    h = np.diff(grid)
    if np.max(np.abs(h - h[0])) > 1e-9 * max(1.0, abs(h[0])):
        return np.gradient(vals, grid, axis=-1, edge_order=2)
    h = h[0]
    out = np.empty_like(vals)
    out[..., 2:-2] = (vals[..., :-4] - 8 * vals[..., 1:-3] + 8 * vals[..., 3:-1] - vals[..., 4:]) / (12 * h)
    out[..., :2] = (-25 * vals[..., 0:2] + 48 * vals[..., 1:3] - 36 * vals[..., 2:4]
                    + 16 * vals[..., 3:5] - 3 * vals[..., 4:6]) / (12 * h)
    out[..., -2:] = (25 * vals[..., -2:] - 48 * vals[..., -3:-1] + 36 * vals[..., -4:-2]
                     - 16 * vals[..., -5:-3] + 3 * vals[..., -6:-4]) / (12 * h)
    return out


def residual(sys: RadialSystem, profile: RadialProfile, use_stored: bool = True) -> float:
    """Max |equation| over the grid interior (two points trimmed at each end)."""
    if len(profile.grid) < 5:
        raise ValueError("grid too coarse: at least 5 points are needed")
    order = max(e.max_order for e in sys.equations)
    if use_stored:
        jets = profile.jets(order)
    else:
        jets = [profile.values]
        for _ in range(order):
            jets.append(_stencil(profile.grid, jets[-1]))
    worst = 0.0
    for eq in sys.equations:
        vals = eq.evaluate(profile.grid, jets)[2:-2]
        worst = max(worst, float(np.max(np.abs(vals), initial=0.0)))
    return worst


# --- canonical first-order form ---------------------------------------------------

@dataclass(frozen=True)
class CanonicalForm:
    """y' = M(r) y on the differential slots, algebraic slots f_A = G(r) y."""
    system: RadialSystem
    diff_slots: tuple[int, ...]
    alg_slots: tuple[int, ...]
    K: np.ndarray  # derivative coefficients, rows x diff slots
    C0: np.ndarray  # r^0 coefficients, rows x all slots
    C1: np.ndarray  # r^-1 coefficients
    diff_rows: tuple[int, ...]
    alg_rows: tuple[int, ...]

    def _blocks(self, r, k: int):
        """k-th r-derivative of C(r) = C0 + C1 / r, stacked over an array of r."""
        r = np.asarray(r, dtype=float)[:, None, None]
        if k == 0:
            return self.C0 + self.C1 / r
        return self.C1 * ((-1) ** k * math.factorial(k) / r ** (k + 1))

    def _split(self, mat):
        d = [self.system.slots.index(s) for s in self.diff_slots]
        a = [self.system.slots.index(s) for s in self.alg_slots]
        rd, ra = list(self.diff_rows), list(self.alg_rows)
        return (mat[:, rd][:, :, d], mat[:, rd][:, :, a], mat[:, ra][:, :, d], mat[:, ra][:, :, a])

    def matrices(self, r, order: int = 0):
        """[G, G', G''] and [M, M'] (up to ``order``) stacked over the array r."""
        C = [self._split(self._blocks(r, k)) for k in range(order + 1)]
        Kinv = np.linalg.inv(self.K)
        n = len(np.atleast_1d(r))
        if self.alg_slots:
            Xinv = np.linalg.inv(C[0][3])
        else:
            Xinv = np.zeros((n, 0, 0), dtype=complex)
        G = [-Xinv @ C[0][2]]
        # X G = -Y differentiated repeatedly
        if order >= 1:
            G.append(-Xinv @ (C[1][2] + C[1][3] @ G[0]))
        if order >= 2:
            G.append(-Xinv @ (C[2][2] + C[2][3] @ G[0] + 2 * C[1][3] @ G[1]))
        M = [-Kinv @ (C[0][0] + C[0][1] @ G[0])]
        if order >= 1:
            M.append(-Kinv @ (C[1][0] + C[1][1] @ G[0] + C[0][1] @ G[1]))
        return G, M

    def rhs(self, r, y):
        return self.matrices(np.array([r]))[1][0][0] @ y

    def full_jets(self, r, y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """f, f', f'' on all ten slots, shape (10, n), from states y of shape (n_diff, n)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        y = np.asarray(y, dtype=complex).reshape(len(self.diff_slots), len(r)).T[:, :, None]
        G, M = self.matrices(r, order=2)
        yp = M[0] @ y
        ypp = (M[1] + M[0] @ M[0]) @ y
        f, fp, fpp = (np.zeros((10, len(r)), dtype=complex) for _ in range(3))
        d = [s - 1 for s in self.diff_slots]
        a = [s - 1 for s in self.alg_slots]
        f[d], fp[d], fpp[d] = y[..., 0].T, yp[..., 0].T, ypp[..., 0].T
        if a:
            f[a] = (G[0] @ y)[..., 0].T
            fp[a] = (G[1] @ y + G[0] @ yp)[..., 0].T
            fpp[a] = (G[2] @ y + 2 * G[1] @ yp + G[0] @ ypp)[..., 0].T
        return f, fp, fpp


def canonical_form(sys: RadialSystem) -> CanonicalForm:
    sys = sys.first_order()
    slots = sys.slots
    n = len(slots)
    idx = {s: i for i, s in enumerate(slots)}
    rows = len(sys.equations)
    K = np.zeros((rows, n), dtype=complex)
    C0 = np.zeros((rows, n), dtype=complex)
    C1 = np.zeros((rows, n), dtype=complex)
    for e, eq in enumerate(sys.equations):
        for t in eq.terms:
            if t.order == 1 and t.rpow == 0:
                K[e, idx[t.slot]] += t.coeff
            elif t.order == 0 and t.rpow == 0:
                C0[e, idx[t.slot]] += t.coeff
            elif t.order == 0 and t.rpow == -1:
                C1[e, idx[t.slot]] += t.coeff
            else:
                raise ValueError(f"unexpected term {t} in a first-order system")
    diff_cols = [i for i in range(n) if np.any(np.abs(K[:, i]) > _ZERO)]
    diff_rows = tuple(e for e in range(rows) if np.any(np.abs(K[e]) > _ZERO))
    alg_rows = tuple(e for e in range(rows) if e not in diff_rows)
    if len(diff_cols) != len(diff_rows) or rows != n:
        raise ValueError("system is not in solvable first-order form")
    Kd = K[np.ix_(diff_rows, diff_cols)]
    if abs(np.linalg.det(Kd)) < 1e-12:
        raise ValueError("derivative block is singular")
    return CanonicalForm(sys, tuple(slots[i] for i in diff_cols),
                         tuple(s for i, s in enumerate(slots) if i not in diff_cols),
                         Kd, C0, C1, diff_rows, alg_rows)


def integrate(sys: RadialSystem, initial, r_range: tuple[float, float], steps: int = 4096,
              rtol: float = 1e-12, atol: float = 1e-14) -> RadialProfile:
    """Integrate from r_range[0]; ``initial`` is a 10-vector whose differential slots are used.

    Values, first and second derivatives are stored on the uniform grid of
    ``steps`` intervals.
    """
    r0, r1 = map(float, r_range)
    if r0 <= 0 or r1 <= r0:
        raise ValueError("need 0 < r0 < r1")
    form = canonical_form(sys)
    init = np.asarray(initial, dtype=complex)
    if init.shape != (10,) or not np.all(np.isfinite(init)):
        raise ValueError("initial data must be 10 finite values")
    y0 = init[[s - 1 for s in form.diff_slots]]
    grid = np.linspace(r0, r1, steps + 1)
    scale = max(1.0, float(np.max(np.abs(y0))))
    sol = solve_ivp(form.rhs, (r0, r1), y0, method="DOP853", t_eval=grid, rtol=rtol, atol=atol * scale)
    if sol.status != 0 or not np.all(np.isfinite(sol.y)):
        last = float(sol.t[-1]) if len(sol.t) else r0
        raise IntegrationError(sol.message, last)
    vals, d1, d2 = form.full_jets(grid, sol.y)
    meta = {"epsilon": sys.qn.epsilon, "mass": sys.mass, "kappa": sys.qn.kappa, "j": sys.qn.j,
            "diff_slots": form.diff_slots}
    return RadialProfile(grid, vals, "integrated", d1, d2, meta)


def initial_from_reduced(sys: RadialSystem, r0: float, f14, df14, d2f14=None) -> np.ndarray:
    """Full 10-vector at r0 from f1..f4 data through the reconstruction rules."""
    red = sys if sys.order is SystemOrder.REDUCED_4 else eliminate_auxiliary(sys)
    z = np.zeros(4, dtype=complex)
    jets = [np.asarray(f14, dtype=complex)[:, None], np.asarray(df14, dtype=complex)[:, None],
            (z if d2f14 is None else np.asarray(d2f14, dtype=complex))[:, None]]
    jets = [np.vstack([j, np.zeros((6, 1), dtype=complex)]) for j in jets]
    aux, _ = reconstruct(red, np.array([r0]), jets)
    return np.concatenate([np.asarray(f14, dtype=complex), aux[:, 0]])


def roundtrip_residual(sys: RadialSystem, profile: RadialProfile) -> dict[str, float]:
    """Reduced4 residual of f1..f4 and FirstOrder10 residual after rebuilding f5..f10."""
    red = sys if sys.order is SystemOrder.REDUCED_4 else eliminate_auxiliary(sys)
    jets = profile.jets(2)
    r = profile.grid
    aux, daux = reconstruct(red, r, jets)
    rebuilt = RadialProfile(r, np.vstack([profile.values[:4], aux]), "reconstructed",
                            np.vstack([jets[1][:4], daux]), meta=dict(profile.meta))
    return {
        "reduced4": residual(red, profile),
        "first_order10": residual(red.parent, rebuilt),
        "reconstruction": float(np.max(np.abs(aux - profile.values[4:]))),
    }


# --- minimal-j closed forms ---------------------------------------------------------

def minimal_j_solution(qn: QuantumNumbers, grid, mass: float, growing: bool = False,
                       outgoing: bool = True) -> RadialProfile:
    """f = F / r with F'' + (eps^2 - m^2) F = 0, companions from the derived system.

    The primary slot obeys (d/dr + 1/r)^2 f + (eps^2 - m^2) f = 0, and
    (d/dr + 1/r)^2 = r^-1 d^2/dr^2 r, so F = r f is the function with plane-wave form.
    """
    ansatz = build_ansatz(qn)
    if not ansatz.family.startswith("minimal"):
        raise ValueError("closed forms exist only for j = |kappa| - 1")
    eps = qn.epsilon
    if eps <= 0 or mass <= 0:
        raise ValueError("epsilon and mass must be positive")
    grid = np.asarray(grid, dtype=float)
    sys = radial_system(qn, mass)
    primary = 2 if qn.kappa > 0 else 4
    gap = mass**2 - eps**2
    if abs(gap) < 1e-14:
        warnings.warn("epsilon = m: degenerate k = 0, returning the linear branch F = r (f = 1)", RuntimeWarning)
        F = [grid, np.ones_like(grid), np.zeros_like(grid), np.zeros_like(grid)]
        kind, rate = "linear", 0.0
    else:
        if gap > 0:
            lam = math.sqrt(gap) * (1 if growing else -1)
            kind = "growing" if growing else "decaying"
        else:
            lam = 1j * math.sqrt(-gap) * (1 if outgoing else -1)
            kind = "oscillatory"
        e = np.exp(lam * grid)
        F = [e, lam * e, lam**2 * e, lam**3 * e]
        rate = abs(lam)
    # f = F / r and its first three derivatives
    r = grid
    f = [F[0] / r,
         F[1] / r - F[0] / r**2,
         F[2] / r - 2 * F[1] / r**2 + 2 * F[0] / r**3,
         F[3] / r - 3 * F[2] / r**2 + 6 * F[1] / r**3 - 6 * F[0] / r**4]
    jets = [np.zeros((10, len(grid)), dtype=complex) for _ in range(4)]
    for k in range(4):
        jets[k][primary - 1] = f[k]
    for eq in sys.equations:
        if eq.row == primary:
            continue
        expr = _solve_for(eq, eq.row)
        if any(t.slot != primary for t in expr):
            raise RuntimeError(f"row {eq.row} is not a companion relation")
        for k in range(3):
            jets[k][eq.row - 1] = sum(t.evaluate(grid, jets) for t in expr)
            expr = _derivative(expr)
    meta = {"epsilon": eps, "mass": mass, "kappa": qn.kappa, "j": qn.j, "kind": kind,
            "rate": rate, "primary": primary}
    return RadialProfile(grid, jets[0], "closed-form", jets[1], jets[2], meta)


def closed_form_F_residual(profile: RadialProfile) -> float:
    """max |F'' + (eps^2 - m^2) F| with F = r f.

    F'' = r f'' + 2 f' from the stored jets when present, otherwise by nested
    five-point stencils (which trim four points at each end).
    """
    eps, mass = profile.meta["epsilon"], profile.meta["mass"]
    i, r = profile.meta["primary"] - 1, profile.grid
    F = profile.values[i] * r
    if profile.second is not None and profile.derivatives is not None:
        Fpp = r * profile.second[i] + 2 * profile.derivatives[i]
        return float(np.max(np.abs(Fpp + (eps**2 - mass**2) * F)))
    Fpp = _stencil(r, _stencil(r, F))
    return float(np.max(np.abs(Fpp + (eps**2 - mass**2) * F)[4:-4]))


# --- end-to-end ---------------------------------------------------------------------

def dk_residual(qn: QuantumNumbers, profile: RadialProfile, point, mass: float | None = None) -> np.ndarray:
    """The full separated DK operator applied to the assembled field at one point."""
    p = point if isinstance(point, SpacetimePoint) else SpacetimePoint(*point)
    p.check()
    mass = profile.meta["mass"] if mass is None else mass
    f, df = profile.at(p.r)
    value, grad = build_ansatz(qn).jet(f, df, p.t, p.theta, p.phi)
    return spherical_dk_operator(p, value, grad, mass, qn.kappa)
