"""Gibbs states of the battery Hamiltonian: a spectral route and a closed-form route.

All Boltzmann factors are evaluated relative to the ground energy (or through a
log-sum-exp in the closed form) so that beta*lambda of several hundred stays finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import numerics
from .errors import DegenerateEta, InvariantViolation, WrongDimension
from .spin_model import BASIS_TAG, DIM, BatteryParams, build_battery_hamiltonian, closed_form_spectrum

ETA_EPS = 1e-12
DENSITY_TOL = 1e-10


@dataclass(frozen=True)
class ThermalConfig:
    T: float

    def __post_init__(self):
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValueError(f"temperature must be positive and finite, got {self.T!r}")
        object.__setattr__(self, "T", float(self.T))

    @property
    def beta(self) -> float:
        return 1.0 / self.T


def _beta(T) -> float:
    return ThermalConfig(T.T if isinstance(T, ThermalConfig) else T).beta


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A 6x6 density matrix in the package basis.

    Construction checks Hermiticity and unit trace and stores the exactly
    Hermitian part; positivity needs an eigendecomposition and is checked by
    :meth:`validate`. The stored array is read-only.
    """

    mat: np.ndarray
    basis: str = BASIS_TAG

    def __post_init__(self):
        m = np.array(self.mat, dtype=complex)
        if m.shape != (DIM, DIM):
            raise WrongDimension(f"density matrix must be {DIM}x{DIM}, got {m.shape}")
        if not numerics.is_hermitian(m, DENSITY_TOL):
            raise InvariantViolation("density matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        m.flags.writeable = False
        object.__setattr__(self, "mat", m)
        tr = np.trace(m)
        if abs(tr - 1.0) > DENSITY_TOL:
            raise InvariantViolation(f"density matrix trace is {tr}, not 1")

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return numerics.eigvalsh(self.mat, DENSITY_TOL)

    def validate(self, tol: float = DENSITY_TOL) -> "DensityMatrix":
        lo = float(self.eigenvalues[0])
        if lo < -tol:
            raise InvariantViolation(f"density matrix has negative eigenvalue {lo:.3e}")
        return self

    def purity(self) -> float:
        return float(np.sum(np.abs(self.mat) ** 2))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.mat, dtype=dtype)


def _logsumexp(exponents, weights=None) -> float:
    x = np.asarray(exponents, dtype=float)
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    m = float(np.max(x))
    return m + math.log(float(np.sum(w * np.exp(x - m))))


def _closed_exponents(p: BatteryParams, beta: float):
    """Exponents of the six Boltzmann terms that make up the closed-form Z.

    Expanding each cosh into two exponentials turns the published partition
    function into a sum of six positive terms.
    """
    s = closed_form_spectrum(p)
    J, D, h2 = p.J, p.D, p.h2
    a_m = beta * (J - 2 * D + 2 * h2) / 4
    a_p = beta * (J - 2 * D - 2 * h2) / 4
    x_m = beta * s.eta_minus / 4
    x_p = beta * s.eta_plus / 4
    return s, {
        "e00": -beta * s.alpha_minus / 2,
        "e55": -beta * s.alpha_plus / 2,
        "m+": a_m + x_m,
        "m-": a_m - x_m,
        "p+": a_p + x_p,
        "p-": a_p - x_p,
    }


def log_partition_function_closed(p: BatteryParams, T) -> float:
    _, ex = _closed_exponents(p, _beta(T))
    return _logsumexp(list(ex.values()))


def partition_function_closed(p: BatteryParams, T) -> float:
    """Closed-form partition function; raises ``OverflowError`` past double range."""
    log_z = log_partition_function_closed(p, T)
    if log_z > 709.0:
        raise OverflowError(f"log Z = {log_z:.1f} exceeds double range; use log_partition_function_closed")
    return math.exp(log_z)


def partition_function_spectral(p: BatteryParams, T) -> float:
    beta = _beta(T)
    lam = numerics.eigvalsh(build_battery_hamiltonian(p))
    return math.exp(_logsumexp(-beta * lam))


def gibbs_state_numeric(p: BatteryParams, T) -> DensityMatrix:
    beta = _beta(T)
    eig = numerics.hermitian_eig(build_battery_hamiltonian(p))
    w = np.exp(-beta * (eig.eigenvalues - eig.eigenvalues[0]))
    w /= w.sum()
    v = eig.eigenvectors
    return DensityMatrix((v * w) @ v.conj().T)


def gibbs_state_closed(p: BatteryParams, T) -> DensityMatrix:
    """Gibbs state assembled entry by entry from the analytic matrix elements.

    Diagonal pairs (1,3) and (2,4) use the branch assignment obtained from the
    2x2 block exponentials: rho_11 ~ cosh - sinh*gamma_-/eta_-, rho_33 ~ cosh +
    sinh*gamma_-/eta_-, rho_22 ~ cosh + sinh*gamma_+/eta_+, rho_44 ~ cosh -
    sinh*gamma_+/eta_+ (0-based). Raises ``DegenerateEta`` when either eta
    vanishes.
    """
    beta = _beta(T)
    s, ex = _closed_exponents(p, beta)
    if s.eta_minus < ETA_EPS or s.eta_plus < ETA_EPS:
        raise DegenerateEta(f"eta_- = {s.eta_minus:.3e}, eta_+ = {s.eta_plus:.3e}")
    log_z = _logsumexp(list(ex.values()))
    e = {k: math.exp(v - log_z) for k, v in ex.items()}

    r_m = s.gamma_minus / s.eta_minus
    r_p = s.gamma_plus / s.eta_plus
    off_m = -math.sqrt(8.0) * p.J * p.Delta / s.eta_minus
    off_p = -math.sqrt(8.0) * p.J * p.Delta / s.eta_plus

    rho = np.zeros((DIM, DIM), dtype=complex)
    rho[0, 0] = e["e00"]
    rho[5, 5] = e["e55"]
    # e^a [cosh x -/+ r sinh x] = (e^{a+x}(1 -/+ r) + e^{a-x}(1 +/- r)) / 2
    rho[1, 1] = 0.5 * (e["m+"] * (1 - r_m) + e["m-"] * (1 + r_m))
    rho[3, 3] = 0.5 * (e["m+"] * (1 + r_m) + e["m-"] * (1 - r_m))
    rho[2, 2] = 0.5 * (e["p+"] * (1 + r_p) + e["p-"] * (1 - r_p))
    rho[4, 4] = 0.5 * (e["p+"] * (1 - r_p) + e["p-"] * (1 + r_p))
    rho[1, 3] = rho[3, 1] = off_m * 0.5 * (e["m+"] - e["m-"])
    rho[2, 4] = rho[4, 2] = off_p * 0.5 * (e["p+"] - e["p-"])
    return DensityMatrix(rho)


def gibbs_state(p: BatteryParams, T, backend: str = "numeric") -> DensityMatrix:
    """Dispatch on backend name; the closed form falls back to numeric on degenerate eta."""
    if backend == "numeric":
        return gibbs_state_numeric(p, T)
    if backend == "closed-form":
        try:
            return gibbs_state_closed(p, T)
        except DegenerateEta:
            return gibbs_state_numeric(p, T)
    raise ValueError(f"unknown backend {backend!r}")


# --- published thermal-state expressions, evaluated verbatim ----------------------------


def printed_thermal_elements(p: BatteryParams, T) -> dict[str, float]:
    """Unnormalised thermal-state elements exactly as published, plus ``Z``.

    Keys use the published 1-based labels. Evaluated in plain floating point, so
    very low temperatures overflow to inf.
    """
    beta = _beta(T)
    s = closed_form_spectrum(p)
    J, D, Dl, h2 = p.J, p.D, p.Delta, p.h2
    em, ep = s.eta_minus, s.eta_plus
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ch_m, sh_m = np.cosh(beta * em / 4), np.sinh(beta * em / 4)
        ch_p, sh_p = np.cosh(beta * ep / 4), np.sinh(beta * ep / 4)
        pref_m = np.exp(beta / 4 * (J - 2 * D + 2 * h2))
        pref_p = np.exp(beta / 4 * (J - 2 * D - 2 * h2))
        el = {
            "rho11": np.exp(-beta * s.alpha_minus / 2),
            "rho66": np.exp(-beta * s.alpha_plus / 2),
            "rho22": pref_m * (ch_m - sh_m * s.alpha_minus / em),
            "rho33": pref_m * (ch_m - sh_m * s.alpha_minus / em),
            "rho44": pref_m * (ch_m + sh_m * s.gamma_minus / em),
            "rho55": pref_p * (ch_p - sh_p * s.gamma_plus / ep),
            "rho24": (-math.sqrt(8.0) * J * Dl * sh_m * pref_m) / em,
            "rho35": (-math.sqrt(8.0) * J * Dl * pref_p * sh_p) / ep,
        }
        el["Z"] = 2 * (
            np.exp(-beta * (J + 2 * D) / 2) * np.cosh(beta * (p.h1 + 2 * h2) / 2)
            + np.exp(beta * (J - 2 * D) / 4)
            * (np.exp(beta * h2 / 2) * ch_m + np.exp(-beta * h2 / 2) * ch_p)
        )
    return {k: float(v) for k, v in el.items()}


# 0-based slot of each published label in the printed matrix template; the (6,6) slot of
# the template reads rho11, here taken to mean the separately listed rho66.
PRINTED_TEMPLATE_SLOTS: dict[str, tuple[tuple[int, int], ...]] = {
    "rho11": ((0, 0),),
    "rho22": ((1, 1),),
    "rho33": ((2, 2),),
    "rho44": ((3, 3),),
    "rho55": ((4, 4),),
    "rho66": ((5, 5),),
    "rho24": ((1, 3), (3, 1)),
    "rho35": ((2, 4), (4, 2)),
}


def printed_thermal_matrix(p: BatteryParams, T) -> np.ndarray:
    el = printed_thermal_elements(p, T)
    m = np.zeros((DIM, DIM), dtype=complex)
    for label, slots in PRINTED_TEMPLATE_SLOTS.items():
        for i, j in slots:
            m[i, j] = el[label]
    with np.errstate(over="ignore", invalid="ignore"):
        return m / el["Z"]


def _branch_candidates(p: BatteryParams, T) -> dict[str, float]:
    """Normalised e^a [cosh x +/- sinh x * gamma/eta] for both blocks and both signs."""
    beta = _beta(T)
    s, ex = _closed_exponents(p, beta)
    log_z = _logsumexp(list(ex.values()))
    out = {}
    for block, gamma, eta in (("m", s.gamma_minus, s.eta_minus), ("p", s.gamma_plus, s.eta_plus)):
        if eta < ETA_EPS:
            continue
        r = gamma / eta
        hi, lo = math.exp(ex[block + "+"] - log_z), math.exp(ex[block + "-"] - log_z)
        out[f"eta_{block}:cosh+sinh*gamma/eta"] = 0.5 * (hi * (1 + r) + lo * (1 - r))
        out[f"eta_{block}:cosh-sinh*gamma/eta"] = 0.5 * (hi * (1 - r) + lo * (1 + r))
    return out


def thermal_discrepancy(p: BatteryParams, T, tol: float = 1e-8) -> dict:
    """Compare the published thermal-state entries with the numeric Gibbs state.

    Returns a JSON-ready dict with, per published label, the printed and numeric
    values and their absolute difference, plus for every diagonal slot the list
    of published labels whose value matches it (the observed mapping).
    """
    numeric = gibbs_state_numeric(p, T).mat
    printed = printed_thermal_matrix(p, T)
    el = printed_thermal_elements(p, T)
    z_sum = partition_function_spectral(p, T)

    entries = {}
    for label, slots in PRINTED_TEMPLATE_SLOTS.items():
        i, j = slots[0]
        diff = abs(printed[i, j] - numeric[i, j])
        entries[label] = {
            "slot": [i, j],
            "printed": float(printed[i, j].real),
            "numeric": float(numeric[i, j].real),
            "abs_diff": float(diff),
            "agrees": bool(diff <= tol),
        }
    z_rel = abs(el["Z"] - z_sum) / z_sum if z_sum else math.nan
    diag_labels = ("rho11", "rho22", "rho33", "rho44", "rho55", "rho66")
    candidates = {lab: el[lab] / el["Z"] for lab in diag_labels}
    candidates.update(_branch_candidates(p, T))
    mapping = {
        str(k): [lab for lab, val in candidates.items() if abs(val - numeric[k, k].real) <= tol]
        for k in range(DIM)
    }
    return {
        "entries": entries,
        "Z": {"printed": el["Z"], "spectral": z_sum, "rel_diff": z_rel, "agrees": bool(z_rel <= 1e-9)},
        "diagonal_mapping": mapping,
    }
