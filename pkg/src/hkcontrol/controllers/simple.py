"""Passive, single-agent contraction, and seeded random controllers."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from ..dynamics import OpinionState, components, has_converged
from ..numeric import FAR, Mode
from .base import Controller, far_directive, pack


class Passive(Controller):
    """Every strategic agent stays out of reach."""

    name = "passive"

    def decide(self, state):
        return far_directive(state.m)


class Contraction(Controller):
    """One agent that shrinks total width or raises some agent's weight each step.

    A component of width in (0, 1] collapses on its own, so the agent waits.
    Otherwise it sits one unit right of the leftmost wide component's left end,
    pulling that end inward by at least 1/(n+1).
    """

    name = "contraction"
    required_m = 1

    def decide(self, state):
        if has_converged(state):
            return (FAR,)
        comps = components(state)
        if any(0 < c.width <= 1 for c in comps):
            return (FAR,)
        wide = next(c for c in comps if c.width > 1)
        return pack(state, [(wide.x_left + 1, 1)])


@dataclass
class RandomMemory:
    steps: int = 0


class RandomControl(Controller):
    """Seeded random placements near current opinions, for property suites.

    Each strategic agent is FAR with probability ``far_prob``; otherwise it sits
    at a random agent's opinion plus an offset from the 1/64 grid on
    [-reach, reach]. After ``active_steps`` calls (if set) it parks FAR forever.
    """

    name = "random"

    def __init__(self, seed=0, far_prob=0.25, reach=1, active_steps=None, grid=64):
        self.rng = random.Random(seed)
        self.far_prob = far_prob
        self.reach = Fraction(reach)
        self.active_steps = active_steps
        self.grid = grid
        self.mem = RandomMemory()

    def decide(self, state: OpinionState):
        self.mem.steps += 1
        if self.active_steps is not None and self.mem.steps > self.active_steps:
            return far_directive(state.m)
        span = int(self.reach * self.grid)
        out = []
        for _ in range(state.m):
            if self.rng.random() < self.far_prob:
                out.append(FAR)
                continue
            anchor = state.nonstrategic[self.rng.randrange(state.n)]
            offset = Fraction(self.rng.randint(-span, span), self.grid)
            if state.mode is Mode.FLOAT64:
                offset = float(offset)
            out.append(anchor + offset)
        return tuple(out)
