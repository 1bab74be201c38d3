"""Spin operators, the mixed spin-(1/2, 1) dimer Hamiltonian and its closed-form spectrum.

Basis convention used everywhere in the package:

    qubit  |0> = m_s = +1/2,  |1> = m_s = -1/2
    qutrit |0>, |1>, |2> = m_S = +1, 0, -1
    composite index = 3 * qubit + qutrit  ->  |00>, |01>, |02>, |10>, |11>, |12>

Under this convention the battery Hamiltonian only mixes the index pairs (1, 3)
and (2, 4), and <11|H|11> - <00|H|00> reproduces the capacity formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics

SQRT2 = math.sqrt(2.0)
DIM = 6

# (m_s, m_S) for each composite index
BASIS_LABELS: tuple[tuple[float, int], ...] = tuple(
    (ms, mS) for ms in (0.5, -0.5) for mS in (1, 0, -1)
)
BASIS_TAG = "qubit(+1/2,-1/2) x qutrit(+1,0,-1), index = 3*a + b"


def spin_half_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    sx = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
    sy = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)
    return sx, sy, sz


def spin_one_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    r = 1.0 / SQRT2
    sx = r * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
    sy = r * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return sx, sy, sz


@dataclass(frozen=True)
class BatteryParams:
    """Parameters of the battery Hamiltonian.

    ``J`` and ``D`` are energies, ``Delta`` and the g-factors are dimensionless,
    ``B`` is a field and ``mu_B`` converts field to energy (1 in reduced units).
    """

    J: float = 1.0
    Delta: float = 1.0
    D: float = 1.0
    g1: float = 2.0
    g2: float = 2.0
    B: float = 1.0
    mu_B: float = 1.0

    def __post_init__(self):
        for name in ("J", "Delta", "D", "g1", "g2", "B", "mu_B"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.mu_B <= 0:
            raise ValueError(f"mu_B must be positive, got {self.mu_B}")

    @property
    def h1(self) -> float:
        return self.g1 * self.mu_B * self.B

    @property
    def h2(self) -> float:
        return self.g2 * self.mu_B * self.B


def total_magnetization() -> np.ndarray:
    _, _, sz = spin_half_operators()
    _, _, Sz = spin_one_operators()
    return numerics.kron(sz, np.eye(3)) + numerics.kron(np.eye(2), Sz)


def build_battery_hamiltonian(p: BatteryParams) -> np.ndarray:
    sx, sy, sz = spin_half_operators()
    Sx, Sy, Sz = spin_one_operators()
    i2, i3 = np.eye(2), np.eye(3)
    kron = numerics.kron
    h = p.J * (p.Delta * (kron(sx, Sx) + kron(sy, Sy)) + kron(sz, Sz))
    h = h + p.D * kron(i2, Sz @ Sz)
    h = h - p.h1 * kron(sz, i3) - p.h2 * kron(i2, Sz)
    return h


@dataclass(frozen=True)
class ClosedFormSpectrum:
    """Analytic eigen-data of the battery Hamiltonian.

    ``lambdas`` holds the six eigenvalues from diagonalising the two 2x2 blocks
    exactly. ``lambdas_printed`` evaluates the published expressions verbatim;
    the two differ for lambda_3..lambda_6 (the published forms drop the 1/4 on
    eta and flip the sign of the block centre). ``delta_*`` and ``chi_*`` are
    the published normalisation constants, kept for reporting only; they are
    NaN where the published radicand is negative.
    """

    lambdas: tuple[float, ...]
    lambdas_printed: tuple[float, ...]
    eta_minus: float
    eta_plus: float
    alpha_minus: float
    alpha_plus: float
    gamma_minus: float
    gamma_plus: float
    delta_plus: float
    delta_minus: float
    chi_plus: float
    chi_minus: float
    params: BatteryParams = field(repr=False, compare=False, default=None)


def _printed_norm(eta: float, J: float, sign: int) -> float:
    denom = eta * eta + 8.0 * J * J
    if denom == 0.0:
        return math.nan
    radicand = 1.0 + sign * eta / denom
    return math.sqrt(radicand) / SQRT2 if radicand >= 0 else math.nan


def closed_form_spectrum(p: BatteryParams) -> ClosedFormSpectrum:
    J, D, Dl, h1, h2 = p.J, p.D, p.Delta, p.h1, p.h2
    alpha_m = J + 2 * D - (h1 + 2 * h2)
    alpha_p = J + 2 * D + (h1 + 2 * h2)
    gamma_m = J - 2 * D - 2 * (h1 - h2)
    gamma_p = J - 2 * D + 2 * (h1 - h2)
    off = 8.0 * (J * Dl) ** 2
    eta_m = math.sqrt(gamma_m**2 + off)
    eta_p = math.sqrt(gamma_p**2 + off)

    # block {|1/2,0>, |-1/2,1>} is centred at -(J - 2D + 2h2)/4 with half-splitting eta_-/4;
    # block {|1/2,-1>, |-1/2,0>} at -(J - 2D - 2h2)/4 with eta_+/4
    c_m = -(J - 2 * D + 2 * h2) / 4
    c_p = -(J - 2 * D - 2 * h2) / 4
    lambdas = (
        alpha_m / 2,
        alpha_p / 2,
        c_m - eta_m / 4,
        c_m + eta_m / 4,
        c_p - eta_p / 4,
        c_p + eta_p / 4,
    )
    printed = (
        alpha_m / 2,
        alpha_p / 2,
        (J - 2 * D + h2) / 4 - eta_m,
        (J - 2 * D + h2) / 4 + eta_m,
        (J - 2 * D - h2) / 4 - eta_p,
        (J - 2 * D - h2) / 4 + eta_p,
    )
    return ClosedFormSpectrum(
        lambdas=lambdas,
        lambdas_printed=printed,
        eta_minus=eta_m,
        eta_plus=eta_p,
        alpha_minus=alpha_m,
        alpha_plus=alpha_p,
        gamma_minus=gamma_m,
        gamma_plus=gamma_p,
        delta_plus=_printed_norm(eta_m, J, +1),
        delta_minus=_printed_norm(eta_m, J, -1),
        chi_plus=_printed_norm(eta_p, J, +1),
        chi_minus=_printed_norm(eta_p, J, -1),
        params=p,
    )


def printed_eigenvectors(cf: ClosedFormSpectrum) -> dict[str, np.ndarray]:
    """The published eigenvector templates built from delta/chi, unnormalised as printed."""
    e = np.eye(DIM, dtype=complex)
    dp, dm, cp, cm = cf.delta_plus, cf.delta_minus, cf.chi_plus, cf.chi_minus
    return {
        "phi_1": e[0],
        "phi_2": e[5],
        "phi_3": dm * e[1] - dp * e[3],
        "phi_4": dp * e[1] + dm * e[3],
        "phi_5": cp * e[2] - cm * e[4],
        "phi_6": cm * e[2] + cp * e[4],
    }


def eigenvector_report(p: BatteryParams) -> dict[str, dict[str, float]]:
    """Norm and eigen-residual of each published eigenvector template.

    The residual is ``||H phi - <phi|H|phi>/<phi|phi> phi|| / ||phi||``, so it is
    zero exactly when the template is an eigenvector regardless of its norm.
    """
    cf = closed_form_spectrum(p)
    h = build_battery_hamiltonian(p)
    out = {}
    for name, phi in printed_eigenvectors(cf).items():
        norm = float(np.linalg.norm(phi))
        if not math.isfinite(norm) or norm == 0.0:
            out[name] = {"norm": norm, "residual": math.nan}
            continue
        hphi = h @ phi
        rayleigh = (phi.conj() @ hphi).real / norm**2
        out[name] = {
            "norm": norm,
            "residual": float(np.linalg.norm(hphi - rayleigh * phi) / norm),
        }
    return out


def capacity_closed_form(p: BatteryParams) -> float:
    return -p.D - p.J / 2 + p.h1 + p.h2
