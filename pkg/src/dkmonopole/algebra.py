"""Duffin-Kemmer beta-matrices and spin generators for the 10-component spin-1 field.

Two bases are supported.  The Cartesian matrices are assembled from the
sectional blocks ``kappa^a`` (4x6) and ``lambda^a`` (6x4); the cyclic ones are
reference tables for the monopole problem, with a short corrections list
for entries that break the algebra as tabulated.  ``basis_change_matrix`` relates
the two and is the independent consistency oracle.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .constants import BIVECTOR_PAIRS, ETA, W


class DKBasis(str, enum.Enum):
    CARTESIAN = "cartesian"
    CYCLIC = "cyclic"


class BasisMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DKMatrix:
    entries: np.ndarray
    basis: DKBasis
    label: str = ""

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex)
        if arr.shape != (10, 10):
            raise ValueError(f"DK matrices are 10x10, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite entry in DK matrix")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        object.__setattr__(self, "basis", DKBasis(self.basis))

    def _check(self, other: "DKMatrix"):
        if not isinstance(other, DKMatrix):
            return NotImplemented
        if other.basis != self.basis:
            raise BasisMismatch(f"cannot combine {self.basis.value} and {other.basis.value} matrices")
        return None

    def __matmul__(self, other):
        if isinstance(other, np.ndarray):
            return self.entries @ other
        if self._check(other) is NotImplemented:
            return NotImplemented
        return DKMatrix(self.entries @ other.entries, self.basis, f"{self.label}*{other.label}")

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return DKMatrix(self.entries + other.entries, self.basis, f"{self.label}+{other.label}")

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return DKMatrix(self.entries - other.entries, self.basis, f"{self.label}-{other.label}")

    def __mul__(self, scalar):
        if isinstance(scalar, DKMatrix):
            return NotImplemented
        return DKMatrix(self.entries * scalar, self.basis, self.label)

    __rmul__ = __mul__

    def __neg__(self):
        return DKMatrix(-self.entries, self.basis, f"-{self.label}")

    def commutator(self, other: "DKMatrix") -> "DKMatrix":
        return self @ other - other @ self

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))


# --- Cartesian construction -------------------------------------------------

def _kappa_block(a: int) -> np.ndarray:
    """(kappa^a)_j^{[mn]} = -i (delta^m_j g^{na} - delta^n_j g^{ma}); rows j, columns [mn]."""
    blk = np.zeros((4, 6), dtype=complex)
    for j in range(4):
        for p, (m, n) in enumerate(BIVECTOR_PAIRS):
            blk[j, p] = -1j * ((m == j) * ETA[n, a] - (n == j) * ETA[m, a])
    return blk


def _lambda_block(a: int) -> np.ndarray:
    """(lambda^a)^j_{[mn]} = -i (delta^a_m delta^j_n - delta^a_n delta^j_m); rows [mn], columns j."""
    blk = np.zeros((6, 4), dtype=complex)
    for p, (m, n) in enumerate(BIVECTOR_PAIRS):
        for j in range(4):
            blk[p, j] = -1j * ((a == m) * (j == n) - (a == n) * (j == m))
    return blk


def cartesian_blocks(a: int) -> tuple[np.ndarray, np.ndarray]:
    return _kappa_block(a), _lambda_block(a)


# --- cyclic reference tables ----------------------------------------------------------

_REFERENCE_CYCLIC = {
    0: (1.0, """
        0  0  0  0  0  0  0  0  0  0
        0  0  0  0  +i 0  0  0  0  0
        0  0  0  0  0  +i 0  0  0  0
        0  0  0  0  0  0  +i 0  0  0
        0  -i 0  0  0  0  0  0  0  0
        0  0  -i 0  0  0  0  0  0  0
        i  0  0  -i 0  0  0  0  0  0
        0  0  0  0  0  0  0  0  0  0
        0  0  0  0  0  0  0  0  0  0
        0  0  0  0  0  0  0  0  0  0
    """),
    3: (1.0, """
        0  0  0  0  0  i  0  0  0  0
        0  0  0  0  0  0  0  +1 0  0
        0  0  0  0  0  0  0  0  0  0
        0  0  0  0  0  0  0  0  0  -1
        0  0  0  0  0  0  0  0  0  0
        0  0  0  0  0  0  0  0  0  0
        i  0  0  0  0  0  0  0  0  0
        0  -1 0  0  0  0  0  0  0  0
        0  0  0  0  0  0  0  0  0  0
        0  0  +1 0  0  i  0  0  0  0
    """),
    1: (1.0 / np.sqrt(2.0), """
        0  0  0  0  -i 0  +i 0  0  0
        0  0  0  0  0  0  0  0  +1 0
        0  0  0  0  0  0  0  +1 0  +1
        0  0  0  0  0  0  0  0  +1 0
        -i 0  0  0  0  0  0  0  0  0
        0  0  0  0  0  0  0  0  0  0
        +i 0  0  0  0  0  0  0  0  0
        0  0  -1 0  0  0  0  0  0  0
        0  -1 0  -1 0  0  0  0  0  0
        0  0  -1 0  0  0  0  0  0  0
    """),
    2: (1.0 / np.sqrt(2.0), """
        0  0  0  0  1  0  1  0  0  0
        0  0  0  0  0  0  0  0  -i 0
        0  0  0  0  0  0  0  +i 0  -i
        0  0  0  0  0  0  0  0  +i 0
        -1 0  0  0  0  0  0  0  0  0
        0  0  0  0  0  0  0  0  0  0
        -1 0  0  0  0  0  0  0  0  0
        0  0  +i 0  0  0  0  0  0  0
        0  -i 0  +i 0  0  0  0  0  0
        0  0  -i 0  0  0  0  0  0  0
    """),
}

# (matrix index a, row, column) 1-indexed -> (tabulated token, corrected token).
# Each tabulated entry breaks the trilinear identity; the corrected entry is the
# one forced by conjugating the Cartesian matrices.
CYCLIC_CORRECTIONS = {
    (0, 7, 1): ("i", "0"),
    (3, 6, 1): ("0", "i"),
    (3, 7, 1): ("i", "0"),
    (3, 10, 3): ("+1", "0"),
    (3, 10, 4): ("0", "+1"),
    (3, 10, 6): ("i", "0"),
}

_TOKENS = {"0": 0, "1": 1, "+1": 1, "-1": -1, "i": 1j, "+i": 1j, "-i": -1j}


def _parse_table(text: str) -> np.ndarray:
    rows = [line.split() for line in text.strip().splitlines()]
    return np.array([[_TOKENS[t] for t in row] for row in rows], dtype=complex)


def reference_cyclic_beta(a: int) -> np.ndarray:
    """The cyclic beta^a exactly as tabulated, typos included."""
    scale, text = _REFERENCE_CYCLIC[a]
    return scale * _parse_table(text)


def _corrected_cyclic_beta(a: int) -> np.ndarray:
    scale, text = _REFERENCE_CYCLIC[a]
    raw = _parse_table(text)
    for (b, row, col), (tabulated, fixed) in CYCLIC_CORRECTIONS.items():
        if b != a:
            continue
        assert raw[row - 1, col - 1] == _TOKENS[tabulated]
        raw[row - 1, col - 1] = _TOKENS[fixed]
    return scale * raw


# --- public operations -------------------------------------------------------

def _check_index(a: int) -> int:
    if a not in (0, 1, 2, 3):
        raise ValueError(f"Lorentz index must be 0..3, got {a!r}")
    return a


def build_beta(a: int, basis: DKBasis | str = DKBasis.CARTESIAN) -> DKMatrix:
    a = _check_index(a)
    basis = DKBasis(basis)
    if basis is DKBasis.CARTESIAN:
        kap, lam = cartesian_blocks(a)
        out = np.zeros((10, 10), dtype=complex)
        out[:4, 4:] = kap
        out[4:, :4] = lam
    else:
        out = _corrected_cyclic_beta(a)
    return DKMatrix(out, basis, f"beta{a}")


def build_j(a: int, b: int, basis: DKBasis | str = DKBasis.CARTESIAN) -> DKMatrix:
    """j^{ab} = beta^a beta^b - beta^b beta^a."""
    ba, bb = build_beta(a, basis), build_beta(b, basis)
    return DKMatrix(ba.commutator(bb).entries, basis, f"j{a}{b}")


def betas(basis: DKBasis | str = DKBasis.CARTESIAN) -> tuple[DKMatrix, ...]:
    return tuple(build_beta(a, basis) for a in range(4))


def spin_generators(basis: DKBasis | str = DKBasis.CARTESIAN) -> dict[tuple[int, int], DKMatrix]:
    return {(a, b): build_j(a, b, basis) for a in range(4) for b in range(4)}


def verify_trilinear(c: int, a: int, b: int, basis: DKBasis | str = DKBasis.CARTESIAN) -> float:
    """Max-entry residual of beta^c beta^a beta^b + beta^b beta^a beta^c = beta^c g^{ab} + beta^b g^{ac}."""
    bs = betas(basis)
    lhs = bs[c] @ bs[a] @ bs[b] + bs[b] @ bs[a] @ bs[c]
    rhs = bs[c] * ETA[a, b] + bs[b] * ETA[a, c]
    return (lhs - rhs).max_abs()


def trilinear_residuals(basis: DKBasis | str = DKBasis.CARTESIAN) -> dict[tuple[int, int, int], float]:
    return {t: verify_trilinear(*t, basis=basis) for t in itertools.product(range(4), repeat=3)}


def commutator_residuals(basis: DKBasis | str = DKBasis.CARTESIAN) -> dict[str, float]:
    """Residuals of [beta^c, j^{ab}] and [j^{mn}, j^{ab}] for every index choice."""
    bs = betas(basis)
    js = spin_generators(basis)
    out = {}
    for c, a, b in itertools.product(range(4), repeat=3):
        lhs = bs[c].commutator(js[a, b])
        rhs = bs[b] * ETA[c, a] - bs[a] * ETA[c, b]
        out[f"[beta{c},j{a}{b}]"] = (lhs - rhs).max_abs()
    for m, n, a, b in itertools.product(range(4), repeat=4):
        lhs = js[m, n].commutator(js[a, b])
        rhs = (js[m, b] * ETA[n, a] - js[m, a] * ETA[n, b]) - (js[n, b] * ETA[m, a] - js[n, a] * ETA[m, b])
        out[f"[j{m}{n},j{a}{b}]"] = (lhs - rhs).max_abs()
    return out


def verify_commutators(basis: DKBasis | str = DKBasis.CARTESIAN) -> float:
    return max(commutator_residuals(basis).values())


_BASIS_CHANGE_TEMPLATE = (
    # Cartesian row <- cyclic columns; 'W', '-W', '-iW', '1'
    {0: "1"},
    {1: "-W", 3: "+W"},
    {1: "-iW", 3: "-iW"},
    {2: "1"},
    {4: "-W", 6: "+W"},
    {4: "-iW", 6: "-iW"},
    {5: "1"},
    {7: "-W", 9: "+W"},
    {7: "-iW", 9: "-iW"},
    {8: "1"},  # tabulated in column 6, which would make the matrix singular
)


def basis_change_matrix() -> DKMatrix:
    """Map a cyclic column (f1..f10) onto Cartesian components (Phi0..Phi12).

    The result is tagged Cartesian since it produces Cartesian columns.
    """
    values = {"1": 1.0, "-W": -W, "+W": W, "-iW": -1j * W}
    out = np.zeros((10, 10), dtype=complex)
    for row, entries in enumerate(_BASIS_CHANGE_TEMPLATE):
        for col, token in entries.items():
            out[row, col] = values[token]
    return DKMatrix(out, DKBasis.CARTESIAN, "U")


def to_cartesian(m: DKMatrix) -> DKMatrix:
    if m.basis is DKBasis.CARTESIAN:
        return m
    u = basis_change_matrix().entries
    return DKMatrix(u @ m.entries @ np.linalg.inv(u), DKBasis.CARTESIAN, m.label)


def to_cyclic(m: DKMatrix) -> DKMatrix:
    if m.basis is DKBasis.CYCLIC:
        return m
    u = basis_change_matrix().entries
    return DKMatrix(np.linalg.inv(u) @ m.entries @ u, DKBasis.CYCLIC, m.label)


def basis_consistency_residuals() -> dict[int, float]:
    """|U beta^a_cyc U^-1 - beta^a_cart| for each a."""
    return {a: (to_cartesian(build_beta(a, DKBasis.CYCLIC)) - build_beta(a, DKBasis.CARTESIAN)).max_abs()
            for a in range(4)}


def ij12_spectrum(basis: DKBasis | str = DKBasis.CYCLIC) -> np.ndarray:
    m = 1j * build_j(1, 2, basis).entries
    return np.sort(np.linalg.eigvals(m).real)


@dataclass(frozen=True)
class AlgebraReport:
    trilinear: dict = field(default_factory=dict)
    commutators: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)
    conjugation: dict = field(default_factory=dict)


def algebra_report() -> AlgebraReport:
    tri, com, tr = {}, {}, {}
    for basis in DKBasis:
        tri[basis.value] = max(trilinear_residuals(basis).values())
        com[basis.value] = verify_commutators(basis)
        tr[basis.value] = max(abs(build_beta(a, basis).trace) for a in range(4))
    return AlgebraReport(tri, com, tr, basis_consistency_residuals())
