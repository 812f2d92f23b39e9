import numpy as np
import pytest

from dkmonopole.angular import QuantumNumbers
from dkmonopole.proca import (MonopoleConfig, dk_to_proca, free_lorentz_residual, lorentz_condition_residual,
                              monopole_field, proca_residual)
from dkmonopole.radial import canonical_form, integrate, minimal_j_solution, radial_system


def _solution(qn, mass=1.0, seed=5):
    rng = np.random.default_rng(seed)
    sys = radial_system(qn, mass)
    form = canonical_form(sys)
    init = np.zeros(10, dtype=complex)
    idx = [s - 1 for s in form.diff_slots]
    init[idx] = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
    return integrate(sys, init, (1.0, 6.0), steps=2048)


def test_component_map():
    assert np.allclose(dk_to_proca(np.eye(10)[0]).vector, [1, 0, 0, 0])
    # f2 = f4 = 1 is a pure y-direction vector
    v = dk_to_proca(np.eye(10)[1] + np.eye(10)[3]).vector
    assert np.allclose(v, [0, 0, -1j * np.sqrt(2), 0])
    b = dk_to_proca(np.arange(10)).antisymmetric()
    assert np.allclose(b, -b.T)


def test_monopole_config():
    assert MonopoleConfig(1.5).kappa == 1.5
    with pytest.raises(ValueError):
        MonopoleConfig(1.0, kappa=2.0)
    with pytest.raises(ValueError):
        MonopoleConfig(0.0)


def test_monopole_field_radial():
    # F^(theta)(phi) = -g / r^2, all other components vanish
    _, f = monopole_field(MonopoleConfig(1.0), (0, 2.0, 1.0, 0.3))
    assert f[1, 2] == pytest.approx(-0.25, abs=1e-12)
    f[1, 2] = f[2, 1] = 0
    assert np.abs(f).max() < 1e-12


@pytest.mark.parametrize("kappa,j", [(1, 2), (0.5, 0.5), (-0.5, 0.5), (-2, 2), (1.5, 3.5)])
def test_lorentz_condition(kappa, j):
    qn = QuantumNumbers(1.3, j, 0.5 if j % 1 else 1, kappa)
    prof = _solution(qn)
    assert np.abs(lorentz_condition_residual(qn, prof)).max() < 1e-6
    prof.values[2] += 0.01
    assert np.abs(lorentz_condition_residual(qn, prof)).max() > 1e-4


def test_proca_equations_generic():
    qn = QuantumNumbers(1.3, 2, 1, 1)
    prof = _solution(qn)
    res = proca_residual(qn, prof, [(0.2, 2.0, 1.0, 0.5), (0.7, 4.5, 2.4, 3.0)])
    assert max(res.values()) < 1e-4


def test_proca_equations_minimal():
    qn = QuantumNumbers(0.6, 0, 0, 1)
    prof = minimal_j_solution(qn, np.linspace(0.5, 8, 2001), 1.0)
    assert np.abs(lorentz_condition_residual(qn, prof)).max() < 1e-8
    assert max(proca_residual(qn, prof, [(0.1, 2.0, 1.0, 0.5)]).values()) < 1e-4


def test_free_lorentz():
    assert abs(free_lorentz_residual([0.3, -0.4, 1.1], 1.0, [0.2, 0.5, -0.3, 0.9])) < 1e-8
    with pytest.raises(ValueError):
        free_lorentz_residual([0, 0, 0], 1.0, [0, 0, 0, 0])
