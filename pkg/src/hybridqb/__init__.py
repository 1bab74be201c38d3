"""Simulator for a spin-1/2 / spin-1 Heisenberg-dimer quantum battery.

The battery starts in a Gibbs state of the dimer Hamiltonian, is charged by a
local longitudinal drive and is characterised by l1 coherence, negativity,
stored work, power, capacity and passive-state ergotropy.
"""

__version__ = "0.1.0"

from .dynamics import Backend, ChargerParams, EvolutionMode, build_charger_hamiltonian, evolve, evolve_series
from .measures import CoherenceBasis, l1_coherence, negativity
from .metrics import capacity, passive_ergotropy, stored_work
from .spin_model import BatteryParams, build_battery_hamiltonian, capacity_closed_form, closed_form_spectrum
from .thermal_state import DensityMatrix, ThermalConfig, gibbs_state, gibbs_state_closed, gibbs_state_numeric

__all__ = [
    "Backend",
    "BatteryParams",
    "ChargerParams",
    "CoherenceBasis",
    "DensityMatrix",
    "EvolutionMode",
    "ThermalConfig",
    "build_battery_hamiltonian",
    "build_charger_hamiltonian",
    "capacity",
    "capacity_closed_form",
    "closed_form_spectrum",
    "evolve",
    "evolve_series",
    "gibbs_state",
    "gibbs_state_closed",
    "gibbs_state_numeric",
    "l1_coherence",
    "negativity",
    "passive_ergotropy",
    "stored_work",
]
