"""Offline minimum-completion-time scheduling for energy-harvesting transmitters."""

from .baseline import ebs_solve
from .curves import EnergyTimeline, Staircase
from .oracle import OracleConfig, dp_min_time
from .power_rate import Monomial, Shannon, even_allocation, max_bits
from .scheduler import Epoch, Infeasible, Scenario, Schedule, solve
from .validation import ValidationReport, validate

__all__ = [
    "EnergyTimeline",
    "Epoch",
    "Infeasible",
    "Monomial",
    "OracleConfig",
    "Scenario",
    "Schedule",
    "Shannon",
    "Staircase",
    "ValidationReport",
    "dp_min_time",
    "ebs_solve",
    "even_allocation",
    "max_bits",
    "solve",
    "validate",
]

__version__ = "0.1.0"
