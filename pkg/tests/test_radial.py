import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dkmonopole.angular import QuantumNumbers
from dkmonopole.radial import (IntegrationError, RadialProfile, SystemOrder, canonical_form,
                               closed_form_F_residual, compare_to_reference, dk_residual, eliminate_auxiliary,
                               initial_from_reduced, integrate, minimal_j_solution, radial_system, residual,
                               roundtrip_residual)

GENERIC = QuantumNumbers(1.5, 2, 0, 1)


@pytest.fixture(scope="module")
def generic_profile():
    sys = radial_system(GENERIC, 1.0)
    rng = np.random.default_rng(3)
    init = initial_from_reduced(sys, 1.0, rng.normal(size=4) + 1j * rng.normal(size=4), rng.normal(size=4))
    return sys, integrate(sys, init, (1.0, 10.0))


@pytest.mark.parametrize("qn,count", [(GENERIC, 10), (QuantumNumbers(1, 1, 0, 1), 7),
                                      (QuantumNumbers(1, 1, 0, -1), 7), (QuantumNumbers(1, 0, 0, 1), 3),
                                      (QuantumNumbers(1, 0.5, 0.5, -1.5), 3)])
def test_equation_counts(qn, count):
    assert len(radial_system(qn, 1.0).equations) == count


# epsilon != 1 so that a dropped epsilon factor is visible
@pytest.mark.parametrize("qn,rows", [(GENERIC, [3, 5]), (QuantumNumbers(1.3, 0, 0, 1), [5]),
                                     (QuantumNumbers(1.3, 0, 0, -1), [7]), (QuantumNumbers(1.3, 1, 0, 1), [5]),
                                     (QuantumNumbers(1.3, 1, 0, -1), [3, 7])])
def test_reference_mismatches_frozen(qn, rows):
    assert [m.row for m in compare_to_reference(radial_system(qn, 1.0))] == rows


def test_canonical_split():
    form = canonical_form(radial_system(GENERIC, 1.0))
    assert form.diff_slots == (1, 2, 4, 6, 8, 10)
    assert form.alg_slots == (3, 5, 7, 9)


def test_reduction():
    red = eliminate_auxiliary(radial_system(GENERIC, 1.0))
    assert red.order is SystemOrder.REDUCED_4
    assert red.slots == (1, 2, 3, 4)
    with pytest.raises(ValueError):
        eliminate_auxiliary(radial_system(GENERIC, 0.0))


def test_integrated_residual(generic_profile):
    sys, prof = generic_profile
    assert residual(sys, prof) < 1e-6
    assert residual(sys, prof, use_stored=False) < 1e-6


def test_residual_detects_perturbation(generic_profile):
    sys, prof = generic_profile
    bad = RadialProfile(prof.grid, prof.values.copy(), "perturbed", prof.derivatives, prof.second)
    bad.values[0] += 0.05 * np.sin(prof.grid)
    assert residual(sys, bad) > 1e-3


def test_roundtrip(generic_profile):
    sys, prof = generic_profile
    assert max(roundtrip_residual(sys, prof).values()) < 1e-8


def test_dk_residual_generic(generic_profile):
    _, prof = generic_profile
    for p in [(0.3, 2.5, 1.0, 0.4), (1.1, 7.3, 2.0, 5.0)]:
        assert np.abs(dk_residual(GENERIC, prof, p)).max() < 1e-5


def test_integration_rejects_bad_input():
    sys = radial_system(GENERIC, 1.0)
    with pytest.raises(ValueError):
        integrate(sys, np.ones(10), (0.0, 1.0))
    with pytest.raises(ValueError):
        integrate(sys, np.full(10, np.nan), (1.0, 2.0))
    assert issubclass(IntegrationError, RuntimeError)


@pytest.mark.parametrize("kappa,eps,kind,rate", [(1, 0.6, "decaying", 0.8), (-1, 1.25, "oscillatory", 0.75),
                                                 (2, 0.6, "decaying", 0.8), (-1.5, 0.8, "decaying", 0.6)])
def test_minimal_closed_form(kappa, eps, kind, rate):
    j = abs(kappa) - 1
    qn = QuantumNumbers(eps, j, j if j % 1 else 0, kappa)
    grid = np.linspace(0.1, 10, 4097)
    prof = minimal_j_solution(qn, grid, 1.0)
    assert prof.meta["kind"] == kind
    assert prof.meta["rate"] == pytest.approx(rate)
    assert closed_form_F_residual(prof) < 1e-10
    sys = radial_system(qn, 1.0)
    assert residual(sys, prof) < 1e-9
    num = integrate(sys, prof.values[:, 0], (0.1, 10.0))
    i = prof.meta["primary"] - 1
    assert np.abs(num.values[i] - prof.values[i]).max() / np.abs(prof.values[i]).max() < 1e-6
    assert np.abs(dk_residual(qn, prof, (0.2, 3.3, 1.2, 0.7))).max() < 1e-8


def test_minimal_growing_and_degenerate():
    qn = QuantumNumbers(0.6, 0, 0, 1)
    grid = np.linspace(0.5, 3, 101)
    grow = minimal_j_solution(qn, grid, 1.0, growing=True)
    assert grow.meta["kind"] == "growing"
    assert abs(grow.values[1, -1]) > abs(grow.values[1, 0])
    with pytest.warns(RuntimeWarning):
        lin = minimal_j_solution(QuantumNumbers(1.0, 0, 0, 1), grid, 1.0)
    assert lin.meta["kind"] == "linear"
    with pytest.raises(ValueError):
        minimal_j_solution(GENERIC, grid, 1.0)


def test_profile_validation_and_csv(tmp_path):
    with pytest.raises(ValueError):
        RadialProfile(np.array([1.0, 0.5]), np.zeros((10, 2)), "x")
    with pytest.raises(ValueError):
        RadialProfile(np.array([1.0, 2.0]), np.zeros((9, 2)), "x")
    prof = minimal_j_solution(QuantumNumbers(0.6, 0, 0, 1), np.linspace(1, 2, 11), 1.0)
    path = tmp_path / "p.csv"
    prof.to_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0][:3] == ["r", "re_f1", "im_f1"] and len(rows[0]) == 21
    assert len(rows) == 12
    assert float(rows[1][3]) == pytest.approx(prof.values[1, 0].real, rel=1e-15)
    with pytest.raises(ValueError):
        prof.at(5.0)


@settings(max_examples=8, deadline=None)
@given(st.floats(0.3, 2.5), st.floats(0.3, 2.5), st.sampled_from([(2, 1), (2.5, 1.5), (3, -2)]))
def test_random_generic_systems_integrate(eps, mass, jk):
    j, kappa = jk
    qn = QuantumNumbers(eps, j, j if j % 1 else 0, kappa)
    sys = radial_system(qn, mass)
    init = initial_from_reduced(sys, 1.0, np.array([1, 0.5, -0.3, 0.2]), np.array([0.1, 0.0, 0.4, -0.2]))
    prof = integrate(sys, init, (1.0, 3.0), steps=256)
    scale = np.abs(prof.values).max()
    assert residual(sys, prof) / scale < 1e-6
