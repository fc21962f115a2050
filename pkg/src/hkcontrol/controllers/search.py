"""Exhaustive look-ahead over a small candidate grid.

Only usable on tiny systems; it is a probe of the optimal-control objective,
not a strategy that scales.
"""
from __future__ import annotations

from itertools import combinations_with_replacement

from ..dynamics import OpinionState, group_sorted, has_converged, hk_step, total_width
from ..errors import BudgetExceededError, InvalidParamError
from ..numeric import FAR
from .base import Controller, far_directive

DEFAULT_BRANCH_CAP = 200_000


def candidate_positions(state: OpinionState) -> list:
    """x - 1, x, x + 1 for every distinct non-strategic opinion x, ascending."""
    vals, _ = group_sorted(state.nonstrategic)
    return sorted({v + d for v in vals for d in (-1, 0, 1)})


def candidate_directives(state: OpinionState) -> list[tuple]:
    """All directives over the grid plus FAR, up to permuting the agents.

    Strategic agents are interchangeable, so multisets suffice.
    """
    options = [FAR] + candidate_positions(state)
    return [tuple(c) for c in combinations_with_replacement(options, state.m)]


class _Counter:
    def __init__(self, cap):
        self.cap = cap
        self.count = 0

    def tick(self):
        self.count += 1
        if self.cap is not None and self.count > self.cap:
            raise BudgetExceededError(f"bounded search exceeded {self.cap} branches")


def _score(state: OpinionState, depth: int, horizon: int, counter: _Counter):
    """(steps to converge or horizon+1, remaining total width) from ``state``."""
    if has_converged(state):
        return (depth, 0)
    if depth == horizon:
        return (horizon + 1, total_width(state))
    best = None
    for directive in candidate_directives(state):
        counter.tick()
        score = _score(hk_step(state, directive, overflow_bits=None), depth + 1, horizon, counter)
        if best is None or score < best:
            best = score
            if score[0] == depth + 1:
                break
    return best


def search(state: OpinionState, horizon: int, branch_cap: int | None = DEFAULT_BRANCH_CAP):
    """Best first directive and its score ``(steps, width)``.

    Steps count from ``state``; ``horizon + 1`` means no branch converged.
    Ties keep the first directive in candidate order, so the result is
    deterministic.
    """
    if horizon < 1:
        raise InvalidParamError("horizon must be >= 1")
    if has_converged(state):
        return far_directive(state.m), (0, 0)
    counter = _Counter(branch_cap)
    best = None
    for directive in candidate_directives(state):
        counter.tick()
        score = _score(hk_step(state, directive, overflow_bits=None), 1, horizon, counter)
        if best is None or score < best[1]:
            best = (directive, score)
            if score[0] == 1:
                break
    return best


class BoundedSearch(Controller):
    name = "search"

    def __init__(self, horizon=2, branch_cap=DEFAULT_BRANCH_CAP, max_n=8, max_m=3, max_horizon=4):
        self.horizon = int(horizon)
        self.branch_cap = branch_cap
        self.limits = (max_n, max_m, max_horizon)
        self.last_score = None

    def decide(self, state):
        max_n, max_m, max_h = self.limits
        if state.n > max_n or state.m > max_m or self.horizon > max_h:
            raise InvalidParamError(
                f"search is limited to n <= {max_n}, m <= {max_m}, horizon <= {max_h}"
            )
        directive, self.last_score = search(state, self.horizon, self.branch_cap)
        return directive
