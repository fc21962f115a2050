"""Single-agent chain cutting, and the two-shot opening for dumbbells."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..dynamics import OpinionState, components
from ..numeric import FAR, power_floor_int
from .base import Controller, pack

MIN_CUTTER_N = 81


@dataclass
class CutterMemory:
    k: int | None = None
    lo: int | None = None
    hi: int | None = None
    side: str = "left"
    done: bool = False
    cuts: list = field(default_factory=list)


class Cutter(Controller):
    """Detach groups of k agents from alternating ends of a chain.

    On a left turn the agent sits 1 below the k-th tracked agent from the left,
    which splits the first k agents off; on a right turn it sits 1 above the
    k-th from the right. Detached agents leave the tracked range. Once at most
    k agents are tracked, or every tracked piece already has at most k agents,
    the agent parks FAR for good.

    ``k`` defaults to floor(n ** (1/4)). ``span`` restricts tracking to an
    inclusive index range. Instances with fewer than ``min_n`` agents are left
    to the passive dynamics.
    """

    name = "cutter"
    required_m = 1

    def __init__(self, k=None, span=None, first_side="left", min_n=MIN_CUTTER_N):
        self.k = k
        self.span = span
        self.min_n = min_n
        self.mem = CutterMemory(side=first_side)

    def _init(self, state: OpinionState):
        mem = self.mem
        mem.k = self.k if self.k is not None else power_floor_int(state.n, Fraction(1, 4))
        mem.lo, mem.hi = self.span if self.span is not None else (0, state.n - 1)
        if state.n < self.min_n or mem.k < 1:
            mem.done = True

    def decide(self, state):
        mem = self.mem
        if mem.k is None:
            self._init(state)
        if mem.done or self._finished(state):
            mem.done = True
            return (FAR,)
        xs = state.nonstrategic
        if mem.side == "left":
            target = mem.lo + mem.k - 1
            pos = xs[target] - 1
            mem.cuts.append((state.t, "left", mem.lo, target))
            mem.lo += mem.k
            mem.side = "right"
        else:
            target = mem.hi - mem.k + 1
            pos = xs[target] + 1
            mem.cuts.append((state.t, "right", target, mem.hi))
            mem.hi -= mem.k
            mem.side = "left"
        return pack(state, [(pos, 1)])

    def _finished(self, state) -> bool:
        mem = self.mem
        if mem.hi - mem.lo + 1 <= mem.k:
            return True
        pieces = [
            min(c.right, mem.hi) - max(c.left, mem.lo) + 1
            for c in components(state)
            if c.right >= mem.lo and c.left <= mem.hi
        ]
        return all(p <= mem.k for p in pieces)


@dataclass
class DumbbellMemory:
    k: int | None = None
    origin: object = None


class DumbbellTwoShot(Controller):
    """Place at 2, then at k-2, then cut the middle chain.

    The two shots peel both heavy ends away from the chain; from step 2 on the
    chain agents k+4 .. 2k-4 (0-based) are handed to a :class:`Cutter` that
    starts on the left, using k = floor(n ** (1/4)) of the whole instance.
    """

    name = "dumbbell"
    required_m = 1

    def __init__(self, k=None):
        self.k = k
        self.mem = DumbbellMemory()
        self.cutter: Cutter | None = None

    def decide(self, state):
        mem = self.mem
        if mem.k is None:
            mem.k = self.k if self.k is not None else (state.n - 1) // 3
            mem.origin = state.nonstrategic[mem.k]
            k = mem.k
            self.cutter = Cutter(
                k=power_floor_int(state.n, Fraction(1, 4)),
                span=(k + 4, 2 * k - 4),
                first_side="left",
                min_n=0,
            )
        if state.t == 0:
            return pack(state, [(mem.origin + 2, 1)])
        if state.t == 1:
            return pack(state, [(mem.origin + mem.k - 2, 1)])
        return self.cutter(state)

    def memory(self):
        out = super().memory()
        if self.cutter is not None:
            out["cutter"] = self.cutter.memory()
        return out
