"""Control strategies and the name-based registry used by the CLI."""
from __future__ import annotations

from ..errors import InvalidParamError
from ..numeric import to_fraction
from .base import Controller, far_directive, pack
from .cutter import Cutter, DumbbellTwoShot
from .hybrid import Hybrid, hybrid_m
from .mass import MassPlacement
from .search import BoundedSearch, candidate_directives, candidate_positions, search
from .simple import Contraction, Passive, RandomControl

CONTROLLERS = {
    "passive": Passive,
    "contraction": Contraction,
    "cutter": Cutter,
    "dumbbell": DumbbellTwoShot,
    "mass": MassPlacement,
    "hybrid": Hybrid,
    "search": BoundedSearch,
    "random": RandomControl,
}


def make_controller(name: str, params: dict | None = None) -> Controller:
    params = dict(params or {})
    if name not in CONTROLLERS:
        raise InvalidParamError(f"unknown controller {name!r}; choose from {sorted(CONTROLLERS)}")
    params.pop("m", None)
    if "alpha" in params:
        params["alpha"] = to_fraction(params["alpha"])
    try:
        return CONTROLLERS[name](**params)
    except TypeError as exc:
        raise InvalidParamError(f"bad parameters for controller {name}: {exc}") from None


def default_m(name: str, n: int, params: dict | None = None) -> int:
    """Number of strategic agents a controller is designed for."""
    params = params or {}
    if name in ("contraction", "cutter", "dumbbell"):
        return 1
    if name == "mass":
        return 9 * n
    if name == "hybrid":
        return hybrid_m(n, to_fraction(params.get("alpha", 1)))
    if name in ("search", "random"):
        return int(params.get("m", 1))
    return 0


__all__ = [
    "CONTROLLERS",
    "BoundedSearch",
    "Contraction",
    "Controller",
    "Cutter",
    "DumbbellTwoShot",
    "Hybrid",
    "MassPlacement",
    "Passive",
    "RandomControl",
    "candidate_directives",
    "candidate_positions",
    "default_m",
    "far_directive",
    "hybrid_m",
    "make_controller",
    "pack",
    "search",
]
