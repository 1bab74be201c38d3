"""Battery performance indicators: stored work, power, capacity and passive-state ergotropy.

``stored_work`` is the mean-energy gain Tr[H_B rho(t)] - Tr[H_B rho(0)]. The
textbook ergotropy relative to the passive state is a different quantity and
lives in ``passive_ergotropy``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import numerics
from .dynamics import EvolutionMode
from .errors import AnalyticUnavailable, NonUniformGrid, WrongDimension
from .spin_model import DIM


@dataclass(frozen=True)
class PerformanceSample:
    t: float
    W: float
    P: float
    K: float
    W_passive: float


class PowerMethod(str, enum.Enum):
    CENTRAL_DIFFERENCE = "central"
    ANALYTIC_PHASE = "analytic"


def _square(m, name):
    a = numerics.as_matrix(m)
    if a.shape != (DIM, DIM):
        raise WrongDimension(f"{name} must be {DIM}x{DIM}, got {a.shape}")
    return a


def mean_energy(hB, rho) -> float:
    return float(np.einsum("ij,ji->", _square(hB, "hB"), _square(rho, "rho")).real)


def stored_work(hB, rho_t, rho_0) -> float:
    h = _square(hB, "hB")
    d = _square(rho_t, "rho_t") - _square(rho_0, "rho_0")
    return float(np.einsum("ij,ji->", h, d).real)


def _charger_gaps(hc) -> np.ndarray:
    e = np.real(np.diag(numerics.as_matrix(hc)))
    return e[:, None] - e[None, :]


def stored_work_analytic(hB, rho0, hc, times) -> np.ndarray:
    """W(t) for charger-only evolution with a diagonal charger ``hc``.

    rho_ij(t) = rho_ij(0) exp(-i w_ij t) with w_ij = E_i - E_j, so
    W(t) = Re sum_ij H_ji rho_ij(0) (exp(-i w_ij t) - 1).
    """
    amp = _square(hB, "hB").T * _square(rho0, "rho0")
    w = _charger_gaps(hc)
    t = np.asarray(times, dtype=float)
    ph = np.exp(-1j * w[None] * t[:, None, None]) - 1.0
    return np.real(np.sum(amp[None] * ph, axis=(1, 2)))


def power_analytic(hB, rho0, hc, times) -> np.ndarray:
    """Exact dW/dt for charger-only evolution (derivative of :func:`stored_work_analytic`)."""
    amp = _square(hB, "hB").T * _square(rho0, "rho0")
    w = _charger_gaps(hc)
    t = np.asarray(times, dtype=float)
    ph = -1j * w[None] * np.exp(-1j * w[None] * t[:, None, None])
    return np.real(np.sum(amp[None] * ph, axis=(1, 2)))


def grid_spacing(times, rtol: float = 1e-9) -> float:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 3:
        raise NonUniformGrid("need at least three samples")
    steps = np.diff(t)
    h = (t[-1] - t[0]) / (t.size - 1)
    if h <= 0 or np.max(np.abs(steps - h)) > rtol * abs(h) + 1e-15:
        raise NonUniformGrid("time grid is not uniformly spaced")
    return float(h)


def power_central_difference(w, times) -> np.ndarray:
    """Central differences inside, second-order one-sided differences at both ends."""
    h = grid_spacing(times)
    return np.gradient(np.asarray(w, dtype=float), h, edge_order=2)


def instantaneous_power(
    w,
    times,
    method: PowerMethod = PowerMethod.CENTRAL_DIFFERENCE,
    *,
    hB=None,
    rho0=None,
    hc=None,
    mode: EvolutionMode = EvolutionMode.CHARGER_ONLY,
) -> np.ndarray:
    method = PowerMethod(method)
    if method is PowerMethod.CENTRAL_DIFFERENCE:
        return power_central_difference(w, times)
    grid_spacing(times)
    if EvolutionMode(mode) is not EvolutionMode.CHARGER_ONLY:
        raise AnalyticUnavailable("analytic power exists only for charger-only evolution")
    if hB is None or rho0 is None or hc is None:
        raise AnalyticUnavailable("analytic power needs hB, rho0 and the charger Hamiltonian")
    return power_analytic(hB, rho0, hc, times)


def capacity(hB) -> float:
    """<11|H_B|11> - <00|H_B|00>: the |m_s=-1/2, m_S=0> and |m_s=+1/2, m_S=+1> diagonal entries."""
    h = _square(hB, "hB")
    return float(h[4, 4].real - h[0, 0].real)


def passive_ergotropy(hB, rho, *, rho_eigenvalues=None, energies=None) -> float:
    """Mean energy of ``rho`` minus that of its passive state.

    Populations (descending) are paired with energies (ascending). Either
    spectrum may be supplied to avoid recomputing it.
    """
    r = rho_eigenvalues if rho_eigenvalues is not None else numerics.eigvalsh(rho)
    e = energies if energies is not None else numerics.eigvalsh(hB)
    passive = float(np.dot(np.sort(np.real(r))[::-1], np.sort(np.real(e))))
    value = mean_energy(hB, rho) - passive
    # roundoff can leave a passive state a few ulps negative
    return 0.0 if -1e-12 < value < 0.0 else value
