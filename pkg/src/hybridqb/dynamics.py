"""Charger Hamiltonian and unitary charging of the battery state."""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import numerics
from .errors import UnsupportedCombination
from .spin_model import DIM, BatteryParams, build_battery_hamiltonian, spin_half_operators, spin_one_operators
from .thermal_state import DensityMatrix, gibbs_state_closed

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ChargerParams:
    Omega: float = 1.0
    theta: float = math.pi / 4

    def __post_init__(self):
        if not (math.isfinite(self.Omega) and math.isfinite(self.theta)):
            raise ValueError("Omega and theta must be finite")
        theta = math.fmod(float(self.theta), TWO_PI)
        if theta < 0:
            theta += TWO_PI
        object.__setattr__(self, "Omega", float(self.Omega))
        object.__setattr__(self, "theta", theta)


class EvolutionMode(str, enum.Enum):
    CHARGER_ONLY = "charger-only"
    TOTAL = "total"


class Backend(str, enum.Enum):
    NUMERIC = "numeric"
    CLOSED_FORM = "closed-form"


def build_charger_hamiltonian(c: ChargerParams) -> np.ndarray:
    _, _, sz = spin_half_operators()
    _, _, Sz = spin_one_operators()
    return c.Omega * (
        math.cos(c.theta) * numerics.kron(sz, np.eye(3))
        + math.sin(c.theta) * numerics.kron(np.eye(2), Sz)
    )


def generator(hB, c: ChargerParams, mode: EvolutionMode) -> np.ndarray:
    hc = build_charger_hamiltonian(c)
    if EvolutionMode(mode) is EvolutionMode.TOTAL:
        return numerics.as_matrix(hB) + hc
    return hc


def _closed_form_phase(c: ChargerParams, t: float) -> complex:
    # published net phase of the upper-triangle coherences: exp(-i Omega t cos(theta))
    return cmath.exp(-1j * c.Omega * math.cos(c.theta) * t)


_COHERENT_PAIRS = ((1, 3), (2, 4))


def _apply_closed_form(rho0: np.ndarray, c: ChargerParams, t: float) -> np.ndarray:
    mask = np.ones((DIM, DIM), dtype=bool)
    np.fill_diagonal(mask, False)
    for i, j in _COHERENT_PAIRS:
        mask[i, j] = mask[j, i] = False
    if np.max(np.abs(rho0[mask])) > 1e-12:
        raise ValueError("closed-form evolution needs the block-sparse thermal structure")
    out = rho0.copy()
    ph = _closed_form_phase(c, t)
    for i, j in _COHERENT_PAIRS:
        out[i, j] = rho0[i, j] * ph
        out[j, i] = rho0[j, i] * ph.conjugate()
    return out


def evolve_series(
    rho0: DensityMatrix,
    hB,
    c: ChargerParams,
    times: Iterable[float],
    mode: EvolutionMode = EvolutionMode.CHARGER_ONLY,
    backend: Backend = Backend.NUMERIC,
) -> list[DensityMatrix]:
    """``U(t) rho0 U(t)^H`` on a list of times, diagonalising the generator once."""
    mode, backend = EvolutionMode(mode), Backend(backend)
    r0 = numerics.as_matrix(rho0)
    if backend is Backend.CLOSED_FORM:
        if mode is not EvolutionMode.CHARGER_ONLY:
            raise UnsupportedCombination("the closed-form backend only covers charger-only evolution")
        return [DensityMatrix(_apply_closed_form(r0, c, t)) for t in times]

    eig = numerics.hermitian_eig(generator(hB, c, mode))
    v, lam = eig.eigenvectors, eig.eigenvalues
    r0_eig = v.conj().T @ r0 @ v
    gaps = lam[:, None] - lam[None, :]
    out = []
    for t in times:
        if t == 0:
            out.append(rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix(r0))
            continue
        out.append(DensityMatrix(v @ (r0_eig * np.exp(-1j * gaps * t)) @ v.conj().T))
    return out


def evolve_array(
    rho0,
    hB,
    c: ChargerParams,
    times: Sequence[float],
    mode: EvolutionMode = EvolutionMode.CHARGER_ONLY,
) -> np.ndarray:
    """Numeric evolution as a plain ``(len(times), 6, 6)`` array.

    Same propagator as :func:`evolve_series` but vectorised over time and without
    per-sample validation; meant for very fine grids.
    """
    r0 = numerics.as_matrix(rho0)
    eig = numerics.hermitian_eig(generator(hB, c, EvolutionMode(mode)))
    v, lam = eig.eigenvectors, eig.eigenvalues
    r0_eig = v.conj().T @ r0 @ v
    gaps = lam[:, None] - lam[None, :]
    t = np.asarray(times, dtype=float)
    inner = r0_eig[None] * np.exp(-1j * gaps[None] * t[:, None, None])
    out = v @ inner @ v.conj().T
    out[t == 0] = r0
    return out


def evolve(
    rho0: DensityMatrix,
    hB,
    c: ChargerParams,
    t: float,
    mode: EvolutionMode = EvolutionMode.CHARGER_ONLY,
    backend: Backend = Backend.NUMERIC,
) -> DensityMatrix:
    return evolve_series(rho0, hB, c, [t], mode, backend)[0]


def closed_form_evolved(p: BatteryParams, T, c: ChargerParams, t: float) -> DensityMatrix:
    """Time-evolved thermal state from the analytic entries and the published phases.

    Static parts come from :func:`gibbs_state_closed`; each upper-triangle coherence
    picks up ``exp(-i Omega t cos(theta))``. That phase is what the published
    expressions reduce to; exact evolution under the charger gives
    ``exp(-i Omega (cos(theta) - sin(theta)) t)`` instead.
    """
    rho0 = gibbs_state_closed(p, T)
    return DensityMatrix(_apply_closed_form(rho0.mat, c, t))


def printed_phase_exponents(c: ChargerParams, t: float) -> dict[str, float]:
    """Phase angles of the published time-evolved coherences, term by term.

    Keys use the published 1-based labels; the value is the real angle ``phi`` in
    ``exp(i phi)``.
    """
    O, s, co = c.Omega, math.sin(c.theta), math.cos(c.theta)
    return {
        "rho42": O * t * (co - 2 * s) + 2 * O * s * t,
        "rho24": -O * t * (co - 2 * s) - 2 * O * s * t,
        "rho53": -O * t * (2 * s - co) + 2 * O * s * t,
        "rho35": O * t * (2 * s - co) - 2 * O * s * t,
    }


def phase_discrepancy(p: BatteryParams, T, c: ChargerParams, times: Sequence[float]) -> dict:
    """Max |closed-form - numeric| per coherence over a time grid."""
    hB = build_battery_hamiltonian(p)
    rho0 = gibbs_state_closed(p, T)
    numeric = evolve_series(rho0, hB, c, times)
    closed = evolve_series(rho0, hB, c, times, backend=Backend.CLOSED_FORM)
    result = {}
    for i, j in _COHERENT_PAIRS:
        diffs = [abs(a.mat[i, j] - b.mat[i, j]) for a, b in zip(numeric, closed)]
        result[f"rho{i + 1}{j + 1}"] = {
            "slot": [i, j],
            "max_abs_diff": float(max(diffs, default=0.0)),
            "printed_angular_frequency": -c.Omega * math.cos(c.theta),
            "exact_angular_frequency": -c.Omega * (math.cos(c.theta) - math.sin(c.theta)),
        }
    return result


def _commensurate_gcd(freqs: Sequence[float], max_den: int = 1000, rtol: float = 1e-9) -> float:
    base = min(freqs)
    ratios = []
    for f in freqs:
        r = Fraction(f / base).limit_denominator(max_den)
        if abs(float(r) - f / base) > rtol * (f / base):
            raise ValueError(f"frequencies {list(freqs)} are not commensurate")
        ratios.append(r)
    den = 1
    for r in ratios:
        den = den * r.denominator // math.gcd(den, r.denominator)
    num = 0
    for r in ratios:
        num = math.gcd(num, r.numerator * (den // r.denominator))
    return base * num / den


def recurrence_time(hc, rho0=None, tol: float = 1e-12) -> float:
    """Smallest period of ``exp(-i hc t) rho0 exp(i hc t)`` for diagonal ``hc``.

    Only gaps between levels joined by a nonzero coherence of ``rho0`` count
    (all pairs when ``rho0`` is None). Returns ``inf`` when nothing moves and
    raises ``ValueError`` when the active gaps are incommensurate.
    """
    e = np.real(np.diag(numerics.as_matrix(hc)))
    r = None if rho0 is None else numerics.as_matrix(rho0)
    gaps = []
    for i in range(len(e)):
        for j in range(i + 1, len(e)):
            if r is not None and abs(r[i, j]) <= tol:
                continue
            w = abs(e[i] - e[j])
            if w > tol:
                gaps.append(w)
    freqs: list[float] = []
    for w in sorted(gaps):
        if not freqs or w - freqs[-1] > 1e-12 * w:
            freqs.append(w)
    if not freqs:
        return math.inf
    return TWO_PI / _commensurate_gcd(freqs)
