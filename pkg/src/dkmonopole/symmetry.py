"""Vector parity, the composite-parity constraints, and the exact inconsistency proof.

The generic radial system is rebuilt here in exact arithmetic (sympy) from the
tabulated cyclic matrices and the corrected Sigma pattern, so that "f_k == 0"
conclusions do not depend on floating-point rank decisions.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from . import algebra
from .algebra import DKBasis, DKMatrix, basis_change_matrix
from .angular import QuantumNumbers, SIGMA_PATTERN_CORRECTIONS, SIGMA_PATTERN_REFERENCE, twice
from .radial import RadialSystem, canonical_form, initial_from_reduced, integrate, radial_system
from .tetrad import lorentz_rep, spherical_axes

_E = np.fliplr(np.eye(3))


def parity_operator(basis: DKBasis | str = DKBasis.CARTESIAN) -> DKMatrix:
    basis = DKBasis(basis)
    out = np.zeros((10, 10), dtype=complex)
    if basis is DKBasis.CARTESIAN:
        out[np.diag_indices(10)] = [1, -1, -1, -1, -1, -1, -1, 1, 1, 1]
    else:
        out[0, 0] = 1
        out[1:4, 1:4] = _E
        out[4:7, 4:7] = _E
        out[7:10, 7:10] = -_E
    return DKMatrix(out, basis, f"P_{basis.value}")


def _rotation4(theta: float, phi: float) -> np.ndarray:
    out = np.eye(4)
    out[1:, 1:] = spherical_axes(theta, phi)
    return out


def spherical_parity(theta: float, phi: float) -> np.ndarray:
    """S(R(x))^-1 P_cart S(R(Px)) in the cyclic basis, Px = (pi - theta, phi + pi)."""
    u = basis_change_matrix().entries
    s_x = lorentz_rep(_rotation4(theta, phi)).entries
    s_px = lorentz_rep(_rotation4(np.pi - theta, phi + np.pi)).entries
    cart = np.linalg.solve(s_x, parity_operator(DKBasis.CARTESIAN).entries @ s_px)
    return np.linalg.solve(u, cart @ u)


def slot_pairing() -> dict[int, int]:
    """Slot permutation induced by the cyclic parity operator (1-based)."""
    p = parity_operator(DKBasis.CYCLIC).entries
    return {i + 1: int(np.argmax(np.abs(p[:, i]))) + 1 for i in range(10)}


# --- constraints -----------------------------------------------------------------

class NParity(str, enum.Enum):
    ODD = "(-1)^(j+1)"  # eigenvalue -1 of the cyclic parity block structure
    EVEN = "(-1)^j"


@dataclass(frozen=True)
class ParityConstraint:
    n_parity: NParity
    j: float
    # slot -> {other slot: coefficient}; f_slot = sum coeff * f_other, empty means f_slot = 0
    relations: dict = field(default_factory=dict)

    @property
    def value(self) -> int:
        """The eigenvalue N itself, (-1)^(j+1) or (-1)^j; j is an integer or half-integer."""
        tj = twice(self.j)
        if tj % 2:
            raise ValueError("N is a sign only for integer j")
        e = tj // 2 + (1 if self.n_parity is NParity.ODD else 0)
        return -1 if e % 2 else 1

    def matrix(self) -> np.ndarray:
        """Rows C with C f = 0."""
        rows = []
        for slot, rhs in self.relations.items():
            row = np.zeros(10)
            row[slot - 1] = 1
            for other, k in rhs.items():
                row[other - 1] -= k
            rows.append(row)
        return np.array(rows)

    def parametrization(self) -> tuple[tuple[int, ...], np.ndarray]:
        """Free slots and P with f = P g."""
        free = tuple(s for s in range(1, 11) if s not in self.relations)
        p = np.zeros((10, len(free)))
        for k, s in enumerate(free):
            p[s - 1, k] = 1
        for slot, rhs in self.relations.items():
            for other, coef in rhs.items():
                p[slot - 1, free.index(other)] += coef
        return free, p


def n_constraints(n_parity: NParity | str, j: float) -> ParityConstraint:
    n = NParity(n_parity)
    if n is NParity.ODD:
        rel = {1: {}, 3: {}, 6: {}, 4: {2: -1}, 7: {5: -1}, 10: {8: 1}}
    else:
        rel = {9: {}, 4: {2: 1}, 7: {5: 1}, 10: {8: -1}}
    return ParityConstraint(n, j, rel)


def constraint_eigen_residual(con: ParityConstraint) -> float:
    """How far the constrained subspace is from the parity eigenspace with eigenvalue -/+1."""
    free, p = con.parametrization()
    lam = -1 if con.n_parity is NParity.ODD else 1
    op = parity_operator(DKBasis.CYCLIC).entries
    return float(np.max(np.abs(op @ p - lam * p)))


# --- exact generic system --------------------------------------------------------

_TOK = {"0": 0, "1": 1, "+1": 1, "-1": -1, "i": sp.I, "+i": sp.I, "-i": -sp.I}


@functools.lru_cache(maxsize=None)
def _exact_betas() -> tuple[sp.Matrix, ...]:
    out = []
    for a in range(4):
        scale, text = algebra._REFERENCE_CYCLIC[a]
        rows = [line.split() for line in text.strip().splitlines()]
        for (b, row, col), (_, fixed) in algebra.CYCLIC_CORRECTIONS.items():
            if b == a:
                rows[row - 1][col - 1] = fixed
        s = sp.Integer(1) if a in (0, 3) else 1 / sp.sqrt(2)
        if abs(float(s) - scale) > 1e-15:
            raise RuntimeError("reference scale changed")
        out.append(s * sp.Matrix([[_TOK[t] for t in row] for row in rows]))
    return tuple(out)


def _exact_cd(j, kappa):
    j, k = sp.nsimplify(j), sp.nsimplify(kappa)
    return (sp.sqrt((j + k) * (j - k + 1)) / 2, sp.sqrt((j - k) * (j + k + 1)) / 2)


@dataclass(frozen=True)
class ExactSystem:
    """Generic radial system A1 f' + A0(r) f = 0 with exact entries."""
    A1: sp.Matrix
    A0: sp.Matrix
    r: sp.Symbol
    params: dict


def exact_generic_system(j, kappa, epsilon, mass) -> ExactSystem:
    """Exact generic system; epsilon and mass are converted to rationals."""
    r = sp.Symbol("r", positive=True)
    eps, m = sp.nsimplify(epsilon, rational=True), sp.nsimplify(mass, rational=True)
    c, d = _exact_cd(j, kappa)
    b = _exact_betas()
    jm = {(x, y): b[x] * b[y] - b[y] * b[x] for x in range(4) for y in range(4)}
    spin = sp.I * (b[1] * jm[3, 1] + b[2] * jm[3, 2])
    sigma = sp.zeros(10, 10)
    vals = {"c": c, "d": d}
    for row, entries in SIGMA_PATTERN_REFERENCE.items():
        for slot, (const, name) in entries.items():
            const = SIGMA_PATTERN_CORRECTIONS.get((row, slot), (None, const))[1]
            sigma[row - 1, slot - 1] = sp.sqrt(2) * sp.nsimplify(const) * vals[name]
    a0 = eps * b[0] + (spin + sigma) / r - m * sp.eye(10)
    a1 = sp.I * b[3]
    return ExactSystem(a1.applyfunc(sp.nsimplify), a0.applyfunc(sp.expand), r,
                       {"epsilon": eps, "mass": m, "c": c, "d": d, "j": j, "kappa": kappa})


@dataclass(frozen=True)
class ConsistencyResult:
    dimension: int
    cascade: tuple[tuple[int, int], ...]  # (equation row, slot forced to zero), in order
    free_slots: tuple[int, ...]
    surviving: tuple[int, ...]


def _cascade(ex: ExactSystem, con: ParityConstraint | None) -> tuple[list, list]:
    if con is None:
        free, p = tuple(range(1, 11)), np.eye(10)
    else:
        free, p = con.parametrization()
    P = sp.Matrix(p.astype(int))
    A1, A0 = ex.A1 * P, ex.A0 * P
    alive = list(range(len(free)))
    trace = []
    changed = True
    while changed:
        changed = False
        for row in range(10):
            d_cols = [k for k in alive if sp.simplify(A1[row, k]) != 0]
            v_cols = [k for k in alive if sp.simplify(A0[row, k]) != 0]
            if not d_cols and len(v_cols) == 1:
                k = v_cols[0]
                alive.remove(k)
                trace.append((row + 1, free[k]))
                changed = True
    return [free[k] for k in alive], trace


def _invariant_dimension(ex: ExactSystem, cmat: np.ndarray | None, r0, order: int | None = None) -> int:
    """dim of {y0 : C f(r) = 0 near r0} from the exact Taylor coefficients of f at r0.

    With r = r0 + s the system reads r A1 f' + (r B0 + B1) f = 0; each Taylor
    coefficient f_k is a linear map of the differential data y0, built exactly.
    """
    r = ex.r
    A1 = ex.A1
    B1 = (ex.A0 * r).applyfunc(sp.expand).subs(r, 0)
    B0 = (ex.A0 - B1 / r).applyfunc(sp.cancel)
    rows_d = [i for i in range(10) if any(A1[i, k] != 0 for k in range(10))]
    rows_a = [i for i in range(10) if i not in rows_d]
    D = [k for k in range(10) if any(A1[i, k] != 0 for i in range(10))]
    A = [k for k in range(10) if k not in D]
    n = len(D)
    if cmat is None or len(cmat) == 0:
        return n
    L = (r0 * B0 + B1).applyfunc(sp.nsimplify)
    Xinv = L.extract(rows_a, A).inv() if A else sp.zeros(0, 0)
    Kinv = A1.extract(rows_d, D).inv()

    def close(fk, prev):
        # algebraic rows: L f_k + B0 f_{k-1} = 0 fixes f_k on the algebraic slots
        if A:
            rhs = L.extract(rows_a, D) * fk.extract(D, list(range(n)))
            if prev is not None:
                rhs += B0.extract(rows_a, list(range(10))) * prev
            sol = -Xinv * rhs
            for i, a in enumerate(A):
                fk[a, :] = sol[i, :]
        return fk.applyfunc(sp.expand)

    f0 = sp.zeros(10, n)
    for k, s in enumerate(D):
        f0[s, k] = 1
    coeffs = [close(f0, None)]
    C = sp.Matrix(cmat.astype(int))
    stack = [C * coeffs[0]]
    order = 2 * n if order is None else order
    for k in range(order):
        fk = coeffs[-1]
        prev = coeffs[-2] if k >= 1 else sp.zeros(10, n)
        # diff rows: r0 (k+1) A1 f_{k+1} + k A1 f_k + L f_k + B0 f_{k-1} = 0
        rhs = (k * A1 * fk + L * fk + B0 * prev).extract(rows_d, list(range(n)))
        nxt = sp.zeros(10, n)
        sol = -Kinv * rhs / (r0 * (k + 1))
        for i, d in enumerate(D):
            nxt[d, :] = sol[i, :]
        coeffs.append(close(nxt, fk))
        stack.append((C * coeffs[-1]).applyfunc(sp.expand))
        if sp.Matrix.vstack(*stack).rank(simplify=True) == n:
            return 0
    return n - sp.Matrix.vstack(*stack).rank(simplify=True)


def consistency_rank(sys: RadialSystem, con: ParityConstraint | None, r0=sp.Rational(7, 3)) -> ConsistencyResult:
    """Exact dimension of the solution space of ``sys`` under the constraints.

    The cascade records which row forces which slot to vanish; the dimension comes
    from requiring the constraints and all their r-derivatives along the flow.
    """
    if sys.family != "generic":
        raise ValueError("the parity analysis applies to the generic system")
    if con is not None and abs(con.j - sys.qn.j) > 1e-12:
        raise ValueError("constraint and system carry different j")
    q = sys.qn
    ex = exact_generic_system(q.j, q.kappa, q.epsilon, sys.mass)
    surviving, trace = _cascade(ex, con)
    free = tuple(range(1, 11)) if con is None else con.parametrization()[0]
    if not surviving:
        dim = 0
    else:
        dim = _invariant_dimension(ex, None if con is None else con.matrix(), r0)
    return ConsistencyResult(dim, tuple(trace), free, tuple(surviving))


# --- numerical cross-checks -------------------------------------------------------

def numeric_dimension(sys: RadialSystem, r_range=(1.0, 4.0), steps: int = 256, tol: float = 1e-8) -> int:
    """Rank of the solutions started from the 8 unit data (f1..f4, f1'..f4')."""
    sols = []
    for k in range(8):
        data = np.zeros(8)
        data[k] = 1.0
        init = initial_from_reduced(sys, r_range[0], data[:4], data[4:])
        prof = integrate(sys, init, r_range, steps)
        sols.append(prof.values.ravel())
    s = np.linalg.svd(np.array(sols), compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def constraint_drift(sys: RadialSystem, con: ParityConstraint, r0: float = 1.0, span: float = 1.0,
                     steps: int = 256) -> float:
    """Start with f2 = 1, f4 = -1 (others 0) and measure max |C f| up to r0 + span."""
    form = canonical_form(sys)
    init = np.zeros(10, dtype=complex)
    init[1], init[3] = 1.0, -1.0
    # algebraic slots follow from the differential ones
    f0, _, _ = form.full_jets(np.array([r0]), init[[s - 1 for s in form.diff_slots]][:, None])
    start = np.abs(con.matrix() @ f0[:, 0]).max()
    prof = integrate(sys, f0[:, 0], (r0, r0 + span), steps)
    return float(np.max(np.abs(con.matrix() @ prof.values)) - start)


def default_system(kappa: float, j: float, epsilon: float, mass: float) -> RadialSystem:
    return radial_system(QuantumNumbers(epsilon, j, _default_m(j), kappa), mass)


def _default_m(j: float) -> float:
    return 0.5 if twice(j) % 2 else 0.0


def sigma_intertwining_residual(j: float, kappa: float) -> float:
    """max |P Sigma^kappa P - Sigma^(-kappa)| on the generic slot pattern.

    Charge-monopole exchange flips kappa; together with the vector reflection the
    angular operator is carried onto itself, the indirect form of [N, H] = 0.
    """
    from .angular import sigma_pattern
    p = parity_operator(DKBasis.CYCLIC).entries
    return float(np.max(np.abs(p @ sigma_pattern(j, kappa) @ p - sigma_pattern(j, -kappa))))
