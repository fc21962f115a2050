"""Split, compress, clean up: the controller for ceil(n**alpha) + 12 agents.

Phase 1 walks the agents left to right. Around each unvisited agent h it
counts the agents in [x_h, x_h + 4]. Crowded windows are marked and skipped;
sparse ones are split by pulling two neighbouring opinions apart with 3k
agents on each side. When a step's budget runs out the walk resumes at the
next step. Phase 2 contracts the components that hold marked agents or are
dense, one per step with every agent. Phase 3 contracts whatever is still
wider than 1, several components per step.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction

from ..dynamics import OpinionState, components, has_converged
from ..errors import InternalControlError, WrongMError
from ..numeric import power_ceil_int, power_floor, to_fraction
from .base import Controller, far_directive, pack


@dataclass
class HybridMemory:
    phase: int = 1
    h: int = 0
    marks: set = field(default_factory=set)
    dense: frozenset | None = None
    splits: list = field(default_factory=list)
    phase_start: dict = field(default_factory=dict)


def hybrid_m(n: int, alpha) -> int:
    return power_ceil_int(n, to_fraction(alpha)) + 12


class Hybrid(Controller):
    name = "hybrid"

    def __init__(self, alpha=Fraction(1)):
        self.alpha = to_fraction(alpha)
        self.mem = HybridMemory()
        self._n = None

    def _setup(self, state):
        n = state.n
        if state.m != hybrid_m(n, self.alpha):
            raise WrongMError(f"hybrid needs m = ceil(n^alpha) + 12 = {hybrid_m(n, self.alpha)}, got {state.m}")
        self._n = n
        self.n_alpha = power_floor(n, self.alpha)
        self.crowded = (self.n_alpha + 12) / 12
        self.min_density = self.n_alpha / 144
        self.small = self.n_alpha / 2
        self.mem.phase_start[1] = state.t

    def decide(self, state: OpinionState):
        if self._n is None:
            self._setup(state)
        mem = self.mem
        if has_converged(state):
            return far_directive(state.m)
        if mem.phase == 1:
            placements = self._split(state)
            if placements is not None:
                return pack(state, placements)
            self._enter_compression(state)
        if mem.phase == 2:
            placements = self._compress(state)
            if placements:
                return pack(state, placements)
            mem.phase = 3
            mem.phase_start[3] = state.t
        return pack(state, self._cleanup(state))

    # phase 1 --------------------------------------------------------------

    def _split(self, state):
        """Run the walk at this step. Returns this step's placements, or
        ``None`` once the walk is over and nothing was placed."""
        mem = self.mem
        xs = state.nonstrategic
        n = state.n
        comps = components(state)
        comp_of = []
        for c in comps:
            comp_of.extend([c] * c.size)
        budget = state.m
        placements = []
        h = mem.h
        goto = "locate"
        while True:
            if goto == "locate":
                if h >= n:
                    break
                comp = comp_of[h]
                goto = "short"
            if goto == "short":
                if xs[h] + 4 >= comp.x_right:
                    h = comp.right + 1
                    goto = "locate"
                    continue
            # census of [x_h, x_h + 4] inside the component
            top = bisect.bisect_right(xs, xs[h] + 4, comp.left, comp.right + 1)
            lo = bisect.bisect_left(xs, xs[h], comp.left, comp.right + 1)
            k = top - lo
            if k > self.crowded:
                mem.marks.add(h)
                if xs[h + 1] + 4 <= comp.x_right:
                    h += 1
                    goto = "census"
                else:
                    h = comp.right + 1
                    goto = "locate"
                continue
            a, b = self._split_pair(xs, h, comp)
            if budget < 6 * k:
                mem.h = h
                return placements
            placements.append((xs[a] - 1, 3 * k))
            placements.append((xs[b] + 1, 3 * k))
            mem.splits.append((state.t, a, b))
            budget -= 6 * k
            if xs[b] + 4 >= comp.x_right:
                h = comp.right + 1
                goto = "locate"
            else:
                h = bisect.bisect_right(xs, xs[b] + 4, comp.left, comp.right + 1)
                goto = "short"
        mem.h = n
        return placements or None

    @staticmethod
    def _split_pair(xs, h, comp):
        """Adjacent distinct opinions in [x_h + 1, x_h + 3] with the widest gap.

        Ties go to the leftmost pair; ``a`` is the last agent at the lower
        value and ``b = a + 1`` the first agent at the upper one.
        """
        lo = bisect.bisect_left(xs, xs[h] + 1, comp.left, comp.right + 1)
        hi = bisect.bisect_right(xs, xs[h] + 3, comp.left, comp.right + 1)
        best = None
        for i in range(lo, hi - 1):
            if xs[i] < xs[i + 1]:
                gap = xs[i + 1] - xs[i]
                if best is None or gap > best[0]:
                    best = (gap, i)
        if best is None:
            raise InternalControlError(
                f"no two distinct opinions in [{xs[h] + 1}, {xs[h] + 3}] for agent {h}; "
                "the component is not connected as assumed"
            )
        return best[1], best[1] + 1

    # phase 2 --------------------------------------------------------------

    def _enter_compression(self, state):
        mem = self.mem
        mem.phase = 2
        mem.phase_start[2] = state.t
        dense = set()
        for c in components(state):
            marked = any(i in mem.marks for i in c.members)
            if marked or c.width == 0 or c.size / c.width >= self.min_density:
                dense.update(c.members)
        mem.dense = frozenset(dense)

    def _compress(self, state):
        for c in components(state):
            if c.width > 1 and c.left in self.mem.dense:
                return [(c.x_left + 1, state.m)]
        return []

    # phase 3 --------------------------------------------------------------

    def _cleanup(self, state):
        budget = state.m
        placements = []
        for c in components(state):
            if c.width <= 1:
                continue
            need = c.size
            if need > budget:
                if placements:
                    continue
                # outside the expected shape (wider than 8 or too many agents)
                need = budget
            placements.append((c.x_left + 1, need))
            budget -= need
            if budget == 0:
                break
        return placements
