import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dkmonopole.algebra import (CYCLIC_CORRECTIONS, BasisMismatch, DKBasis, DKMatrix, basis_change_matrix,
                                basis_consistency_residuals, build_beta, build_j, commutator_residuals,
                                ij12_spectrum, reference_cyclic_beta, to_cartesian, to_cyclic,
                                trilinear_residuals)
from dkmonopole.constants import ETA


def test_cyclic_beta0_entry():
    assert build_beta(0, "cyclic").entries[1, 4] == 1j


def test_cartesian_kappa_block_entry():
    # (kappa^1)_0^{[01]} = -i(delta^0_0 g^11 - delta^1_0 g^01) = +i
    assert build_beta(1, DKBasis.CARTESIAN).entries[0, 4] == 1j


@pytest.mark.parametrize("basis", list(DKBasis))
def test_traceless(basis):
    for a in range(4):
        assert build_beta(a, basis).trace == 0


@pytest.mark.parametrize("basis", list(DKBasis))
def test_trilinear(basis):
    res = trilinear_residuals(basis)
    assert len(res) == 64
    assert max(res.values()) < 1e-12


@pytest.mark.parametrize("basis", list(DKBasis))
def test_commutators(basis):
    assert max(commutator_residuals(basis).values()) < 1e-12


def test_basis_change():
    assert max(basis_consistency_residuals().values()) < 1e-12
    u = basis_change_matrix().entries
    assert np.allclose(u @ u.conj().T, np.eye(10), atol=1e-15)


def test_round_trip_between_bases():
    j = build_j(2, 3, "cartesian")
    back = to_cartesian(to_cyclic(j))
    assert (back - j).max_abs() < 1e-14


def test_corrections_are_needed():
    """Each tabulated entry that gets corrected breaks the trilinear identity on its own."""
    bs = [build_beta(a, "cyclic").entries for a in range(4)]
    for (a, row, col), _ in CYCLIC_CORRECTIONS.items():
        trial = list(bs)
        ref = reference_cyclic_beta(a)
        trial[a] = bs[a].copy()
        trial[a][row - 1, col - 1] = ref[row - 1, col - 1]
        worst = 0.0
        for c, x, y in itertools.product(range(4), repeat=3):
            lhs = trial[c] @ trial[x] @ trial[y] + trial[y] @ trial[x] @ trial[c]
            rhs = trial[c] * ETA[x, y] + trial[y] * ETA[x, c]
            worst = max(worst, np.abs(lhs - rhs).max())
        assert worst > 0.1, (a, row, col)


def test_reference_differs_only_at_corrections():
    for a in range(4):
        diff = np.argwhere(np.abs(reference_cyclic_beta(a) - build_beta(a, "cyclic").entries) > 0)
        got = {(a, r + 1, c + 1) for r, c in diff}
        assert got == {k for k in CYCLIC_CORRECTIONS if k[0] == a}


def test_ij12_spectrum():
    assert np.allclose(ij12_spectrum(), [-1, -1, -1, 0, 0, 0, 0, 1, 1, 1], atol=1e-12)


def test_mixed_basis_rejected():
    with pytest.raises(BasisMismatch):
        build_beta(0, "cyclic") @ build_beta(0, "cartesian")


def test_bad_index_and_shape():
    with pytest.raises(ValueError):
        build_beta(4)
    with pytest.raises(ValueError):
        DKMatrix(np.eye(3), DKBasis.CARTESIAN)
    with pytest.raises(ValueError):
        DKMatrix(np.full((10, 10), np.nan), DKBasis.CARTESIAN)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.sampled_from(list(DKBasis)))
def test_cubic_relation(p, basis):
    # (p.beta)^3 = p^2 (p.beta) for any momentum
    pb = sum(pa * build_beta(a, basis).entries for a, pa in enumerate(ETA @ np.array(p)))
    p2 = float(np.array(p) @ ETA @ np.array(p))
    assert np.allclose(pb @ pb @ pb, p2 * pb, atol=1e-9 * (1 + np.abs(p).max() ** 3))
