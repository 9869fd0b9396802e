"""
chaindrive: driven spin-chain simulations

Dense simulations of sinusoidally driven Ising and XY chains, their
rotating-frame effective Hamiltonians, state transfer, entanglement and
Ornstein-Uhlenbeck noise.
"""

__version__ = "0.1.0"

from .schemas import ChainModel, CouplingProfile, DriveSpec, NoiseSpec, PropagatorConfig, Scenario
from .core.scenario import parse_scenario, dump_scenario
from .core.runner import RunRecord, run_scenario
from .core.output import emit_csv, format_summary

__all__ = [
    "ChainModel",
    "CouplingProfile",
    "DriveSpec",
    "NoiseSpec",
    "PropagatorConfig",
    "Scenario",
    "parse_scenario",
    "dump_scenario",
    "RunRecord",
    "run_scenario",
    "emit_csv",
    "format_summary",
]
