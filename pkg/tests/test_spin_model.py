import math

import numpy as np
import pytest
from hypothesis import given, settings

from hybridqb import numerics
from hybridqb.spin_model import (
    BatteryParams,
    build_battery_hamiltonian,
    capacity_closed_form,
    closed_form_spectrum,
    eigenvector_report,
    spin_half_operators,
    spin_one_operators,
    total_magnetization,
)

from conftest import param_strategy, random_params
from oracles import battery_hamiltonian_loops, printed_lambdas


def comm(a, b):
    return a @ b - b @ a


def test_spin_half_algebra():
    sx, sy, sz = spin_half_operators()
    np.testing.assert_allclose(numerics.eigvalsh(sz), [-0.5, 0.5])
    np.testing.assert_allclose(sx @ sx + sy @ sy + sz @ sz, 0.75 * np.eye(2), atol=1e-15)
    for a, b, c in ((sx, sy, sz), (sy, sz, sx), (sz, sx, sy)):
        np.testing.assert_allclose(comm(a, b) - 1j * c, 0, atol=1e-15)


def test_spin_one_algebra():
    Sx, Sy, Sz = spin_one_operators()
    np.testing.assert_allclose(numerics.eigvalsh(Sz), [-1, 0, 1])
    np.testing.assert_allclose(Sx @ Sx + Sy @ Sy + Sz @ Sz, 2 * np.eye(3), atol=1e-15)
    np.testing.assert_allclose(Sz @ Sz, np.diag([1, 0, 1]))
    np.testing.assert_allclose(comm(Sx, Sy) - 1j * Sz, 0, atol=1e-15)


def test_params_validation():
    p = BatteryParams(J=1, Delta=1, D=1, g1=2, g2=3, B=0.5, mu_B=2)
    assert (p.h1, p.h2) == (2.0, 3.0)
    with pytest.raises(ValueError):
        BatteryParams(J=math.nan)
    with pytest.raises(ValueError):
        BatteryParams(mu_B=0)


def test_hamiltonian_matches_elementwise_oracle(rng):
    for _ in range(20):
        p = random_params(rng)
        np.testing.assert_allclose(
            build_battery_hamiltonian(p),
            battery_hamiltonian_loops(p.J, p.Delta, p.D, p.h1, p.h2),
            atol=1e-13,
        )


def test_hamiltonian_sparsity(rng):
    p = random_params(rng)
    h = build_battery_hamiltonian(p)
    off = h - np.diag(np.diag(h))
    nz = {(i, j) for i, j in zip(*np.nonzero(np.abs(off) > 0))}
    assert nz == {(1, 3), (3, 1), (2, 4), (4, 2)}
    assert h[1, 3] == pytest.approx(p.J * p.Delta / math.sqrt(2), abs=1e-14)
    assert numerics.is_hermitian(h, 0.0)


def test_zero_anisotropy_gives_diagonal_hamiltonian():
    h = build_battery_hamiltonian(BatteryParams(J=1.3, Delta=0, D=0.4, B=0.7))
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0


def test_corner_diagonal_entry(unit_params):
    # <00|H|00> = J/2 + D - h1/2 - h2 = 0.5 + 1 - 1 - 2
    assert build_battery_hamiltonian(unit_params)[0, 0].real == pytest.approx(-1.5, abs=1e-15)


def test_spectrum_at_reference_point():
    p = BatteryParams(J=1, Delta=1, D=0.5, g1=2, g2=2, B=1)
    s = closed_form_spectrum(p)
    np.testing.assert_allclose(sorted(s.lambdas), numerics.eigvalsh(build_battery_hamiltonian(p)), atol=1e-12)


def test_eta_and_lambda1():
    s = closed_form_spectrum(BatteryParams(J=1, Delta=1, D=0, B=0))
    assert s.eta_minus == s.eta_plus == 3.0
    s = closed_form_spectrum(BatteryParams(J=1, Delta=1, D=1, g1=2, g2=2, B=1))
    assert s.lambdas[0] == pytest.approx(-1.5)
    assert s.lambdas_printed[0] == pytest.approx(-1.5)


def test_printed_lambdas_are_verbatim(rng):
    for _ in range(10):
        p = random_params(rng)
        s = closed_form_spectrum(p)
        ref = printed_lambdas(p.J, p.D, p.h1, p.h2, s.eta_minus, s.eta_plus)
        np.testing.assert_allclose(s.lambdas_printed, ref, atol=1e-13)


def test_printed_lambdas_disagree_with_diagonalisation():
    # Heisenberg dimer J s.S: energies J/2 (x4) and -J (x2); printed lambda_3 gives -11/4
    p = BatteryParams(J=1, Delta=1, D=0, B=0)
    s = closed_form_spectrum(p)
    np.testing.assert_allclose(sorted(s.lambdas), [-1, -1, 0.5, 0.5, 0.5, 0.5], atol=1e-15)
    assert s.lambdas_printed[2] == pytest.approx(-2.75)


@settings(max_examples=300, deadline=None)
@given(param_strategy)
def test_closed_form_spectrum_matches_numeric(p):
    s = closed_form_spectrum(p)
    lam = numerics.eigvalsh(build_battery_hamiltonian(p))
    np.testing.assert_allclose(np.sort(s.lambdas), lam, atol=1e-9)
    assert s.lambdas[0] + s.lambdas[1] == pytest.approx(p.J + 2 * p.D, abs=1e-12)
    assert s.eta_minus >= 0 and s.eta_plus >= 0


@settings(max_examples=100, deadline=None)
@given(param_strategy)
def test_hamiltonian_conserves_magnetisation(p):
    h = build_battery_hamiltonian(p)
    m = total_magnetization()
    assert np.max(np.abs(h @ m - m @ h)) <= 1e-12


def test_capacity_closed_form_examples():
    assert capacity_closed_form(BatteryParams(J=1, D=1, B=1, g1=2, g2=2)) == pytest.approx(2.5)
    assert capacity_closed_form(BatteryParams(J=-1, D=0.5, B=0)) == pytest.approx(0.0)
    assert capacity_closed_form(BatteryParams(J=3, D=0.2, B=0)) == pytest.approx(-0.2 - 1.5)


@settings(max_examples=100, deadline=None)
@given(param_strategy)
def test_basis_convention_pins_capacity(p):
    h = build_battery_hamiltonian(p)
    assert abs((h[4, 4] - h[0, 0]).real - capacity_closed_form(p)) <= 1e-12


def test_printed_eigenvectors_report():
    rep = eigenvector_report(BatteryParams(J=1, Delta=1, D=0.5, g1=2, g2=2, B=1))
    assert rep["phi_1"]["residual"] == 0.0
    assert rep["phi_2"]["residual"] == 0.0
    # the published mixing coefficients do not diagonalise the coupled blocks here
    assert rep["phi_3"]["residual"] > 1e-3
    assert rep["phi_5"]["residual"] > 1e-3


def test_printed_normalisation_can_be_undefined():
    s = closed_form_spectrum(BatteryParams(J=0.1, Delta=1, D=0, g1=2, g2=2, B=0.5))
    assert math.isnan(s.delta_minus) or math.isnan(s.chi_minus)
