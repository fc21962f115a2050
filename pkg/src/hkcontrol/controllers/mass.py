"""Two-step convergence with at least 9n strategic agents.

At t=0 every wide component gets a row of anchor positions roughly 2 apart;
each anchor receives three times the number of agents within distance 2 of
it, which drags its catchment to within 1/2 of the anchor. At t=1 the
non-strategic agents form cliques, which collapse on their own at t=2.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..dynamics import OpinionState, components, has_converged
from ..errors import EpsilonFailureError, InsufficientMError
from ..numeric import Mode, radius
from .base import Controller, far_directive, pack

MAX_HALVINGS = 64


@dataclass
class MassMemory:
    placed: bool = False
    centers: list = field(default_factory=list)
    anchors: list = field(default_factory=list)
    epsilons: list = field(default_factory=list)
    assignment: dict = field(default_factory=dict)
    used: int = 0


def _anchor_row(comp, xs, mode):
    """Anchor positions for one component, or ``None`` when it is narrow."""
    w = math.ceil(comp.width)
    if w <= 1:
        return None, None
    if w % 2 == 0:
        k, start = w // 2, comp.x_left + 1
    else:
        k, start = (w + 1) // 2, comp.x_left
    one = Fraction(1) if mode is Mode.RATIONAL else 1.0
    eps = one / (2 * k)
    for _ in range(MAX_HALVINGS + 1):
        row = [start + (2 + eps) * j for j in range(k)]
        if row[-1] <= comp.x_right and all(_empty_open(xs, p + 1, q - 1) for p, q in zip(row, row[1:])):
            return row, eps
        eps = eps / 2
    raise EpsilonFailureError(f"no spacing epsilon found for component {comp.left}..{comp.right}")


def _empty_open(xs, lo, hi) -> bool:
    """No opinion strictly inside (lo, hi)."""
    i = bisect.bisect_right(xs, lo)
    return i == len(xs) or xs[i] >= hi


class MassPlacement(Controller):
    name = "mass"

    def __init__(self):
        self.mem = MassMemory()

    def decide(self, state: OpinionState):
        if state.m < 9 * state.n:
            raise InsufficientMError(f"mass placement needs m >= 9n = {9 * state.n}, got {state.m}")
        if self.mem.placed or state.t != 0 or has_converged(state):
            self.mem.placed = True
            return far_directive(state.m)
        self.mem.placed = True
        return self._place(state)

    def _place(self, state):
        xs = state.nonstrategic
        r = radius(state.mode)
        mem = self.mem
        placements = []
        for comp in components(state):
            row, eps = _anchor_row(comp, xs, state.mode)
            if row is None:
                center = (comp.x_left + comp.x_right) / 2
                mem.centers.append(center)
                for i in comp.members:
                    mem.assignment[i] = center
                continue
            mem.anchors.append(row)
            mem.epsilons.append(eps)
            for p in row:
                b = sum(1 for x in xs if abs(x - p) <= r)
                a = sum(1 for x in xs if p - 2 <= x and p - x > r)
                c = sum(1 for x in xs if x - p > r and x <= p + 2)
                placements.append((p, 3 * (a + b + c)))
            for i in comp.members:
                mem.assignment[i] = next(p for p in row if abs(xs[i] - p) <= r)
        mem.used = sum(c for _, c in placements)
        if mem.used > state.m:
            raise InsufficientMError(f"placement needs {mem.used} strategic agents, only {state.m} available")
        return pack(state, placements)
