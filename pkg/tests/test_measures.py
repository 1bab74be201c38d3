import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridqb import numerics
from hybridqb.errors import MissingHamiltonian
from hybridqb.measures import CoherenceBasis, l1_coherence, negativity, negativity_pair, to_basis
from hybridqb.spin_model import BatteryParams, build_battery_hamiltonian
from hybridqb.thermal_state import gibbs_state_numeric

from conftest import bell_state, param_strategy, random_density


def test_l1_examples():
    assert l1_coherence(np.eye(6) / 6) == 0.0
    psi = np.ones(6) / math.sqrt(6)
    assert l1_coherence(np.outer(psi, psi)) == pytest.approx(5.0, abs=1e-14)
    assert l1_coherence(bell_state()) == pytest.approx(1.0, abs=1e-15)


def test_l1_of_thermal_state_uses_two_coherences():
    rho = gibbs_state_numeric(BatteryParams(J=1, Delta=1, D=1, g1=2, g2=2, B=1), 1.0).mat
    expected = 2 * (abs(rho[1, 3]) + abs(rho[2, 4]))
    assert l1_coherence(rho) == pytest.approx(expected, rel=1e-14)


def test_eigenbasis_coherence_of_gibbs_state_vanishes(unit_params):
    hB = build_battery_hamiltonian(unit_params)
    rho = gibbs_state_numeric(unit_params, 1.0)
    assert l1_coherence(rho, CoherenceBasis.EIGEN, hB) < 1e-13
    v = numerics.hermitian_eig(hB).eigenvectors
    assert l1_coherence(rho, "eigen", eigenvectors=v) < 1e-13
    with pytest.raises(MissingHamiltonian):
        l1_coherence(rho, CoherenceBasis.EIGEN)


def test_to_basis_is_unitary_change(rng):
    rho = random_density(rng)
    v = numerics.hermitian_eig(build_battery_hamiltonian(BatteryParams(J=0.7))).eigenvectors
    back = v @ to_basis(rho, v) @ v.conj().T
    np.testing.assert_allclose(back, rho, atol=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_l1_bounds(seed):
    rho = random_density(np.random.default_rng(seed))
    assert 0 <= l1_coherence(rho) <= 5 + 1e-12


def test_negativity_examples():
    assert negativity(bell_state()) == pytest.approx(0.5, abs=1e-14)
    assert negativity(np.eye(6) / 6) == 0.0
    prod = np.kron(np.diag([1, 0]), np.diag([0, 1, 0])).astype(complex)
    assert negativity(prod) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_negativity_forms_agree(seed):
    rho = random_density(np.random.default_rng(seed))
    a, b = negativity_pair(rho)
    assert a == pytest.approx(b, abs=1e-12)
    assert -1e-12 <= negativity(rho) <= 0.5 + 1e-12


@settings(max_examples=100, deadline=None)
@given(param_strategy, st.floats(0.3, 10))
def test_thermal_negativity_in_range(p, T):
    n = negativity(gibbs_state_numeric(p, T))
    assert 0 <= n <= 0.5 + 1e-12


def test_negativity_decreases_at_high_temperature(unit_params):
    p = BatteryParams(J=3, Delta=1, D=0, B=0)
    vals = [negativity(gibbs_state_numeric(p, T)) for T in (0.1, 1, 5, 50)]
    assert vals[0] > 0.1
    assert vals[-1] == 0.0
    assert all(a >= b for a, b in zip(vals, vals[1:]))
