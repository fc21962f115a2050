"""Hegselmann-Krause opinion dynamics with strategic agents: simulator,
control strategies and convergence-time benchmarks."""
from .dynamics import (
    Component,
    Neighborhood,
    OpinionState,
    components,
    has_converged,
    hk_step,
    is_frozen,
    neighborhoods,
    total_width,
    weight_table,
)
from .engine import RunRecord, influence_check, run
from .errors import HKError
from .instances import InstanceSpec, generate
from .numeric import FAR, Mode

__all__ = [
    "FAR",
    "Component",
    "HKError",
    "InstanceSpec",
    "Mode",
    "Neighborhood",
    "OpinionState",
    "RunRecord",
    "components",
    "generate",
    "has_converged",
    "hk_step",
    "influence_check",
    "is_frozen",
    "neighborhoods",
    "run",
    "total_width",
    "weight_table",
]
