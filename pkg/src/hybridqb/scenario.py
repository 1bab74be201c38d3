"""Scenario definitions, figure presets, the run loop and output serialisation."""

from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import json
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np

from . import __version__, numerics
from .dynamics import (
    Backend,
    ChargerParams,
    EvolutionMode,
    build_charger_hamiltonian,
    evolve_series,
    phase_discrepancy,
)
from .errors import HybridQBError, InvariantViolation, RunError, UnknownPreset, UnsupportedCombination
from .measures import CoherenceBasis, l1_coherence, negativity
from .metrics import PowerMethod, capacity, instantaneous_power, passive_ergotropy, stored_work
from .spin_model import (
    BatteryParams,
    build_battery_hamiltonian,
    closed_form_spectrum,
    eigenvector_report,
)
from .thermal_state import (
    PRINTED_TEMPLATE_SLOTS,
    ThermalConfig,
    gibbs_state,
    gibbs_state_closed,
    gibbs_state_numeric,
    thermal_discrepancy,
)

# mu_B / k_B in K/T (CODATA 2018: 0.6717138 K/T), used for the nickel-radical presets
MU_B_KELVIN_PER_TESLA = 0.67171

CSV_HEADER = ("sweep_param", "sweep_value", "t", "W", "P", "K", "C_l1", "negativity", "W_passive")

SWEEP_AXES = {
    "J": "battery",
    "Delta": "battery",
    "D": "battery",
    "g1": "battery",
    "g2": "battery",
    "B": "battery",
    "T": "thermal",
    "Omega": "charger",
    "theta": "charger",
}

AUDIT_TOL = 1e-10


@dataclass(frozen=True)
class Scenario:
    battery: BatteryParams = field(default_factory=BatteryParams)
    charger: ChargerParams = field(default_factory=ChargerParams)
    thermal: ThermalConfig = field(default_factory=lambda: ThermalConfig(1.0))
    t_max: float = 20.0
    n_steps: int = 2000
    mode: EvolutionMode = EvolutionMode.CHARGER_ONLY
    backend: Backend = Backend.NUMERIC
    coherence_basis: CoherenceBasis = CoherenceBasis.COMPUTATIONAL
    sweep: tuple[str, tuple[float, ...]] | None = None
    power_method: PowerMethod = PowerMethod.CENTRAL_DIFFERENCE
    name: str = "custom"
    units: str = "reduced"
    artifact_chosen: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mode", EvolutionMode(self.mode))
        object.__setattr__(self, "backend", Backend(self.backend))
        object.__setattr__(self, "coherence_basis", CoherenceBasis(self.coherence_basis))
        object.__setattr__(self, "power_method", PowerMethod(self.power_method))
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise ValueError(f"n_steps must be an integer >= 2, got {self.n_steps!r}")
        object.__setattr__(self, "n_steps", int(self.n_steps))
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise ValueError(f"t_max must be positive, got {self.t_max!r}")
        if self.sweep is not None:
            axis, values = self.sweep
            if axis not in SWEEP_AXES:
                raise ValueError(f"cannot sweep {axis!r}; choose one of {sorted(SWEEP_AXES)}")
            values = tuple(float(v) for v in values)
            if not values:
                raise ValueError("sweep needs at least one value")
            object.__setattr__(self, "sweep", (axis, values))
        if self.backend is Backend.CLOSED_FORM and self.mode is EvolutionMode.TOTAL:
            raise UnsupportedCombination("the closed-form backend only covers charger-only evolution")

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_steps)

    def sweep_values(self) -> tuple[float, ...]:
        return self.sweep[1] if self.sweep else (0.0,)

    def point(self, value: float | None = None) -> tuple[BatteryParams, ChargerParams, ThermalConfig]:
        """Parameters for one sweep value (the base parameters when not sweeping)."""
        battery, charger, thermal = self.battery, self.charger, self.thermal
        if self.sweep is not None and value is not None:
            axis = self.sweep[0]
            group = SWEEP_AXES[axis]
            if group == "battery":
                battery = dataclasses.replace(battery, **{axis: value})
            elif group == "charger":
                charger = dataclasses.replace(charger, **{axis: value})
            else:
                thermal = ThermalConfig(value)
        return battery, charger, thermal

    def describe(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "battery": dataclasses.asdict(self.battery),
            "charger": dataclasses.asdict(self.charger),
            "T": self.thermal.T,
            "t_max": self.t_max,
            "n_steps": self.n_steps,
            "mode": self.mode.value,
            "backend": self.backend.value,
            "coherence_basis": self.coherence_basis.value,
            "power_method": self.power_method.value,
            "sweep": None if self.sweep is None else {"param": self.sweep[0], "values": list(self.sweep[1])},
            "units": self.units,
            "artifact_chosen": list(self.artifact_chosen),
        }


class Row(NamedTuple):
    sweep_param: str
    sweep_value: float
    t: float
    W: float
    P: float
    K: float
    C_l1: float
    negativity: float
    W_passive: float


@dataclass
class ResultTable:
    metadata: dict[str, Any]
    rows: list[Row]

    def branch(self, value: float) -> list[Row]:
        return [r for r in self.rows if r.sweep_value == value]


# --- presets -----------------------------------------------------------------------------

_FIG_BASE = dict(J=1.0, Delta=1.0, D=1.0, g1=2.0, g2=2.0, B=1.0)
_DEFAULT_SWEEP = (0.5, 1.0, 1.5, 2.0)


def _fig(name: str, axis: str, values, chosen: tuple[str, ...]) -> Scenario:
    return Scenario(
        battery=BatteryParams(**_FIG_BASE),
        charger=ChargerParams(1.0, math.pi / 4),
        thermal=ThermalConfig(1.0),
        sweep=(axis, tuple(values)),
        name=name,
        artifact_chosen=("Delta",) + chosen,
    )


def _nickel(name: str, T: float, B: float, sweep, chosen: tuple[str, ...]) -> Scenario:
    return Scenario(
        battery=BatteryParams(J=505.0, Delta=1.0, D=0.0, g1=2.005, g2=2.275, B=B, mu_B=MU_B_KELVIN_PER_TESLA),
        charger=ChargerParams(1.0, math.pi / 4),
        thermal=ThermalConfig(T),
        sweep=sweep,
        name=name,
        units="kelvin",
        artifact_chosen=("Delta", "theta") + chosen,
    )


def preset(name: str) -> Scenario:
    """Scenario reproducing the parameter set of one figure.

    Values the captions do not print (Delta, the D and B legend lists, theta and
    the fixed B or T of the nickel presets) are listed in ``artifact_chosen``.
    """
    builders = {
        "fig1": lambda: _fig("fig1", "D", _DEFAULT_SWEEP, ("sweep",)),
        "fig2": lambda: _fig("fig2", "D", _DEFAULT_SWEEP, ("sweep",)),
        "fig3": lambda: _fig("fig3", "T", (1.0, 2.0, 3.0, 4.0), ()),
        "fig4": lambda: _fig("fig4", "T", (1.0, 2.0, 3.0, 4.0), ()),
        "fig7": lambda: _fig("fig7", "B", _DEFAULT_SWEEP, ("sweep",)),
        "fig8": lambda: _fig("fig8", "B", _DEFAULT_SWEEP, ("sweep",)),
        "nickel": lambda: _nickel("nickel", 300.0, 200.0, None, ("B", "T")),
        "nickel_T": lambda: _nickel("nickel_T", 300.0, 200.0, ("T", (300.0, 400.0)), ("B",)),
        "nickel_B": lambda: _nickel("nickel_B", 300.0, 200.0, ("B", (200.0, 300.0)), ("T",)),
    }
    try:
        return builders[name]()
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; known: {', '.join(builders)}") from None


PRESET_NAMES = ("fig1", "fig2", "fig3", "fig4", "fig7", "fig8", "nickel", "nickel_T", "nickel_B")


# --- running -----------------------------------------------------------------------------


def _run_branch(s: Scenario, value: float) -> list[Row]:
    sweep_param = s.sweep[0] if s.sweep else "none"
    battery, charger, thermal = s.point(value if s.sweep else None)
    times = s.times()
    t = None
    try:
        hB = build_battery_hamiltonian(battery)
        h_eig = numerics.hermitian_eig(hB)
        rho0 = gibbs_state(battery, thermal, s.backend.value)
        states = evolve_series(rho0, hB, charger, times, s.mode, s.backend)
        K = capacity(hB)
        W = np.array([stored_work(hB, r, rho0) for r in states])
        if s.power_method is PowerMethod.ANALYTIC_PHASE:
            P = instantaneous_power(W, times, s.power_method, hB=hB, rho0=rho0,
                                    hc=build_charger_hamiltonian(charger), mode=s.mode)
        else:
            P = instantaneous_power(W, times)
        rows = []
        for k, (t, rho) in enumerate(zip(times, states)):
            rho.validate()
            c = l1_coherence(rho, s.coherence_basis, eigenvectors=h_eig.eigenvectors)
            n = negativity(rho)
            wp = passive_ergotropy(hB, rho, rho_eigenvalues=rho.eigenvalues, energies=h_eig.eigenvalues)
            rows.append(Row(sweep_param, float(value), float(t), float(W[k]), float(P[k]), K, c, n, wp))
        t = None
        audit_branch(rows)
    except RunError:
        raise
    except (HybridQBError, ArithmeticError, ValueError) as exc:
        where = f"sweep value {value}" + ("" if t is None else f", t = {t}")
        err = RunError(f"{s.name}: {where}: {exc}", value, t)
        err.cause = exc
        raise err from exc
    return rows


def audit_branch(rows: Sequence[Row], tol: float = AUDIT_TOL) -> None:
    """Post-hoc checks on one sweep branch; raises ``InvariantViolation``."""
    if not rows:
        return
    if rows[0].W != 0.0:
        raise InvariantViolation(f"W(0) = {rows[0].W!r}, expected exactly 0")
    k0 = rows[0].K
    for r in rows:
        if r.K != k0:
            raise InvariantViolation(f"capacity changed within a branch at t = {r.t}")
        if not (-tol <= r.negativity <= 0.5 + tol):
            raise InvariantViolation(f"negativity {r.negativity} outside [0, 1/2] at t = {r.t}")
        if not (-tol <= r.C_l1 <= 5.0 + tol):
            raise InvariantViolation(f"l1 coherence {r.C_l1} outside [0, 5] at t = {r.t}")


def _metadata(s: Scenario) -> dict[str, Any]:
    return {
        "artifact": "hybridqb",
        "version": __version__,
        "scenario": s.describe(),
        "protocol": (
            "U(t) = exp(-i H_c t)" if s.mode is EvolutionMode.CHARGER_ONLY
            else "diagnostic: U(t) = exp(-i (H_B + H_c) t), not the charging protocol"
        ),
        "columns": list(CSV_HEADER),
    }


def run(s: Scenario, workers: int = 1) -> ResultTable:
    """Evaluate every (sweep value, t) point. Output order never depends on ``workers``."""
    values = s.sweep_values()
    if workers > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            branches = list(pool.map(lambda v: _run_branch(s, v), values))
    else:
        branches = [_run_branch(s, v) for v in values]
    return ResultTable(_metadata(s), [r for b in branches for r in b])


# --- serialisation -----------------------------------------------------------------------


def to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in table.rows:
        w.writerow([r.sweep_param] + [repr(float(x)) for x in r[1:]])
    return buf.getvalue()


def to_json(table: ResultTable) -> str:
    doc = {"metadata": table.metadata, "rows": [r._asdict() for r in table.rows]}
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def write(table: ResultTable, fmt: str, path: str | Path | None) -> None:
    """Write CSV or JSON to ``path`` (stdout when None).

    A CSV written to a file gets a ``<path>.meta.json`` sidecar holding the
    metadata, since the CSV header is fixed.
    """
    fmt = fmt.lower()
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    text = to_csv(table) if fmt == "csv" else to_json(table)
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    try:
        path.write_text(text)
        if fmt == "csv":
            Path(f"{path}.meta.json").write_text(json.dumps(table.metadata, indent=1) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(text: str) -> list[Row]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected header {header}")
    return [Row(rec[0], *(float(x) for x in rec[1:])) for rec in reader]


# --- config files ------------------------------------------------------------------------

_PI_RE = re.compile(r"^\s*(-?[\d.]*)\s*\*?\s*pi\s*(?:/\s*([\d.]+))?\s*$")


def parse_number(text: str) -> float:
    """Float, or a multiple of pi such as ``pi/4`` or ``0.5*pi``."""
    m = _PI_RE.match(text)
    if m:
        coef = m.group(1)
        num = float(coef) if coef not in ("", "-") else (-1.0 if coef == "-" else 1.0)
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    return float(text)


CONFIG_KEYS = (
    "preset", "name", "J", "Delta", "D", "g1", "g2", "B", "mu_B", "Omega", "theta", "T",
    "t_max", "n_steps", "mode", "backend", "coherence_basis", "power_method",
    "sweep_param", "sweep_values", "units",
)


def load_config(path: str | Path) -> dict[str, str]:
    """Read a flat ``key = value`` file (``#`` comments, optional ``[scenario]`` header)."""
    text = Path(path).read_text()
    if not re.search(r"^\s*\[", text, re.M):
        text = "[scenario]\n" + text
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str
    cp.read_string(text)
    section = "scenario" if cp.has_section("scenario") else cp.sections()[0]
    items = dict(cp.items(section))
    unknown = set(items) - set(CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return items


def scenario_from_mapping(values: Mapping[str, Any], base: Scenario | None = None) -> Scenario:
    """Overlay flat key/value settings on ``base`` (or on a named preset)."""
    values = {k: v for k, v in values.items() if v is not None}
    if "preset" in values:
        base = preset(str(values["preset"]))
    base = base or Scenario()

    def num(key, current):
        v = values.get(key)
        return current if v is None else (parse_number(v) if isinstance(v, str) else float(v))

    b = base.battery
    battery = BatteryParams(**{k: num(k, getattr(b, k)) for k in ("J", "Delta", "D", "g1", "g2", "B", "mu_B")})
    charger = ChargerParams(num("Omega", base.charger.Omega), num("theta", base.charger.theta))
    thermal = ThermalConfig(num("T", base.thermal.T))

    sweep = base.sweep
    if "sweep_param" in values or "sweep_values" in values:
        axis = values.get("sweep_param", sweep[0] if sweep else None)
        raw = values.get("sweep_values")
        if isinstance(raw, str):
            vals = tuple(parse_number(x) for x in raw.split(",") if x.strip())
        elif raw is not None:
            vals = tuple(float(x) for x in raw)
        else:
            vals = sweep[1] if sweep else ()
        sweep = None if axis in (None, "none") else (axis, vals)

    return Scenario(
        battery=battery,
        charger=charger,
        thermal=thermal,
        t_max=num("t_max", base.t_max),
        n_steps=int(num("n_steps", base.n_steps)),
        mode=values.get("mode", base.mode),
        backend=values.get("backend", base.backend),
        coherence_basis=values.get("coherence_basis", base.coherence_basis),
        power_method=values.get("power_method", base.power_method),
        sweep=sweep,
        name=str(values.get("name", base.name)),
        units=str(values.get("units", base.units)),
        artifact_chosen=base.artifact_chosen,
    )


# --- discrepancy reports -----------------------------------------------------------------


def random_grid(n: int, seed: int) -> list[tuple[BatteryParams, float]]:
    """Random (params, T) points: |J|, |D|, |B| <= 5, |Delta| <= 3, g in [1, 3], T in [0.5, 5]."""
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(n):
        J, D, B = rng.uniform(-5, 5, 3)
        Delta = rng.uniform(-3, 3)
        g1, g2 = rng.uniform(1, 3, 2)
        T = rng.uniform(0.5, 5)
        pts.append((BatteryParams(J, Delta, D, g1, g2, B), float(T)))
    return pts


def discrepancy_report(
    points: Sequence[tuple[BatteryParams, float]],
    charger: ChargerParams | None = None,
    times: Sequence[float] | None = None,
    tol: float = 1e-8,
) -> dict[str, Any]:
    """Compare closed forms (as printed and as re-derived) against the numeric backend.

    Per matrix element the report keeps the largest absolute difference over all
    points; ``closed_form_agrees`` refers to the re-derived closed-form Gibbs
    state, which is what the ``closed-form`` backend uses.
    """
    charger = charger or ChargerParams()
    times = list(np.linspace(0.0, 20.0, 201) if times is None else times)

    printed_max = {label: 0.0 for label in PRINTED_TEMPLATE_SLOTS}
    printed_count = {label: 0 for label in PRINTED_TEMPLATE_SLOTS}
    closed_max = np.zeros((6, 6))
    z_rel_max = 0.0
    lam_printed_max = [0.0] * 6
    lam_closed_max = 0.0
    eigvec_residual_max: dict[str, float] = {}
    phase_max: dict[str, float] = {}
    mappings: list[dict] = []
    fallbacks = 0

    for p, T in points:
        numeric = gibbs_state_numeric(p, T).mat
        try:
            closed = gibbs_state_closed(p, T).mat
            closed_max = np.maximum(closed_max, np.abs(closed - numeric))
        except HybridQBError:
            fallbacks += 1
            continue

        th = thermal_discrepancy(p, T, tol)
        for label, e in th["entries"].items():
            d = e["abs_diff"]
            printed_max[label] = max(printed_max[label], d) if math.isfinite(d) else math.inf
            printed_count[label] += int(not e["agrees"])
        z_rel_max = max(z_rel_max, th["Z"]["rel_diff"])
        mappings.append(th["diagonal_mapping"])

        cf = closed_form_spectrum(p)
        lam_num = numerics.eigvalsh(build_battery_hamiltonian(p))
        lam_closed_max = max(lam_closed_max, float(np.max(np.abs(np.sort(cf.lambdas) - lam_num))))
        for k, (a, b) in enumerate(zip(cf.lambdas_printed, cf.lambdas)):
            lam_printed_max[k] = max(lam_printed_max[k], abs(a - b))
        for name, rep in eigenvector_report(p).items():
            r = rep["residual"]
            eigvec_residual_max[name] = max(eigvec_residual_max.get(name, 0.0), r if math.isfinite(r) else math.inf)

        for label, rep in phase_discrepancy(p, T, charger, times).items():
            phase_max[label] = max(phase_max.get(label, 0.0), rep["max_abs_diff"])

    closed_ok = bool(np.max(closed_max) <= tol)

    def finite(x):
        return x if math.isfinite(x) else None

    return {
        "n_points": len(points),
        "tolerance": tol,
        "degenerate_eta_fallbacks": fallbacks,
        "closed_form_agrees": closed_ok,
        "closed_form_vs_numeric_max_abs_diff": closed_max.tolist(),
        "partition_function_max_rel_diff": z_rel_max,
        "printed_thermal_entries": {
            label: {
                "slot": list(PRINTED_TEMPLATE_SLOTS[label][0]),
                "max_abs_diff": finite(printed_max[label]),
                "points_disagreeing": printed_count[label],
            }
            for label in PRINTED_TEMPLATE_SLOTS
        },
        "observed_diagonal_mapping": _mapping_summary(mappings),
        "eigenvalues": {
            "closed_form_max_abs_diff": lam_closed_max,
            "printed_minus_closed_max_abs_diff": {f"lambda{k + 1}": v for k, v in enumerate(lam_printed_max)},
        },
        "printed_eigenvector_max_residual": {k: finite(v) for k, v in eigvec_residual_max.items()},
        "evolution_phase": {
            "charger": dataclasses.asdict(charger),
            "printed_net_phase": "exp(-i Omega t cos(theta))",
            "exact_net_phase": "exp(-i Omega t (cos(theta) - sin(theta)))",
            "max_abs_diff": phase_max,
        },
    }


def _mapping_summary(mappings: list[dict]) -> dict[str, dict[str, int]]:
    """For each diagonal slot: how many points each candidate expression matched."""
    out: dict[str, dict[str, int]] = {}
    for m in mappings:
        for slot, labels in m.items():
            counts = out.setdefault(slot, {})
            for lab in labels:
                counts[lab] = counts.get(lab, 0) + 1
    return {slot: dict(sorted(c.items())) for slot, c in sorted(out.items())}


def scenario_report(s: Scenario) -> dict[str, Any]:
    points = []
    for v in s.sweep_values():
        battery, charger, thermal = s.point(v if s.sweep else None)
        points.append((battery, thermal.T))
    return discrepancy_report(points, s.charger, s.times())


def write_report(report: Mapping[str, Any], path: str | Path | None) -> None:
    text = json.dumps(report, indent=1, allow_nan=False) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
