"""Controller contract.

A controller is a small state machine: called once per step with the observed
:class:`~hkcontrol.dynamics.OpinionState`, it returns a directive (a tuple of
``m`` opinions or :data:`~hkcontrol.numeric.FAR`) and updates its own memory.
"""
from __future__ import annotations

import dataclasses
from collections.abc import Iterable

from ..dynamics import OpinionState
from ..errors import WrongMError
from ..numeric import FAR, coerce


def far_directive(m: int) -> tuple:
    return (FAR,) * m


def pack(state: OpinionState, placements: Iterable[tuple[object, int]]) -> tuple:
    """Turn ``(position, count)`` pairs into a length-m directive, rest FAR."""
    out = []
    for pos, count in placements:
        out.extend([coerce(pos, state.mode)] * count)
    if len(out) > state.m:
        raise WrongMError(f"placements need {len(out)} strategic agents, only {state.m} exist")
    out.extend([FAR] * (state.m - len(out)))
    return tuple(out)


class Controller:
    name = "base"
    required_m: int | None = None

    def __call__(self, state: OpinionState) -> tuple:
        if self.required_m is not None and state.m != self.required_m:
            raise WrongMError(f"{self.name} controller needs m={self.required_m}, got m={state.m}")
        return self.decide(state)

    def decide(self, state: OpinionState) -> tuple:
        raise NotImplementedError

    def memory(self) -> dict:
        """Serializable snapshot of the controller's private state."""
        mem = getattr(self, "mem", None)
        if mem is None:
            return {}
        return _jsonable(dataclasses.asdict(mem))


def _jsonable(obj):
    from fractions import Fraction

    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in items]
    if isinstance(obj, Fraction):
        return str(obj)
    if obj is FAR:
        return "FAR"
    return obj
