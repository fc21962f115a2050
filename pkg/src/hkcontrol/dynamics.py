"""Hegselmann-Krause state, synchronous update, and the structural quantities
(neighborhoods, components, widths, weights, frozen/converged predicates).

Agents are indexed from 0 in ascending opinion order. All functions here are
pure; an :class:`OpinionState` is never mutated once built.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvalidParamError, WrongMError
from .numeric import (
    DEFAULT_OVERFLOW_BITS,
    FAR,
    Mode,
    Number,
    check_size,
    coerce,
    radius,
)


@dataclass(frozen=True)
class OpinionState:
    """Configuration at step ``t``.

    ``nonstrategic`` is weakly ascending. ``strategic`` holds one opinion (or
    :data:`FAR`) per strategic agent; after :func:`hk_step` it is the directive
    that produced this state.
    """

    t: int
    nonstrategic: tuple
    strategic: tuple = ()
    mode: Mode = Mode.RATIONAL

    @classmethod
    def initial(cls, opinions: Iterable, m: int = 0, mode: Mode | str = Mode.RATIONAL) -> "OpinionState":
        mode = Mode.parse(mode)
        state = cls(0, tuple(coerce(x, mode) for x in opinions), (FAR,) * m, mode)
        state.validate()
        return state

    @property
    def n(self) -> int:
        return len(self.nonstrategic)

    @property
    def m(self) -> int:
        return len(self.strategic)

    def validate(self) -> None:
        if self.n < 1:
            raise InvalidParamError("need at least one non-strategic agent")
        if self.t < 0:
            raise InvalidParamError("negative time")
        xs = self.nonstrategic
        if any(xs[i] > xs[i + 1] for i in range(len(xs) - 1)):
            raise InvalidParamError("non-strategic opinions must be sorted ascending")
        kind = Fraction if self.mode is Mode.RATIONAL else float
        if not all(type(x) is kind for x in xs):
            raise InvalidParamError(f"all opinions must be {kind.__name__} in {self.mode.value} mode")
        if not all(p is FAR or type(p) is kind for p in self.strategic):
            raise InvalidParamError("strategic opinions must match the numeric mode")

    def materialized_strategic(self) -> tuple:
        """Strategic opinions with FAR replaced by ``max(nonstrategic) + 2``."""
        far = self.nonstrategic[-1] + 2
        return tuple(far if p is FAR else p for p in self.strategic)


@dataclass(frozen=True)
class Neighborhood:
    agent: int
    nonstrategic: range
    strategic: tuple = ()

    @property
    def members(self) -> frozenset:
        return frozenset([("N", i) for i in self.nonstrategic] + [("S", s) for s in self.strategic])

    def __len__(self) -> int:
        return len(self.nonstrategic) + len(self.strategic)


@dataclass(frozen=True)
class Component:
    """Maximal run of agents ``left..right`` (inclusive) chained by gaps <= 1."""

    left: int
    right: int
    x_left: Number
    x_right: Number

    @property
    def members(self) -> range:
        return range(self.left, self.right + 1)

    @property
    def size(self) -> int:
        return self.right - self.left + 1

    @property
    def width(self) -> Number:
        return self.x_right - self.x_left


def group_sorted(values: Sequence) -> tuple[list, list]:
    """Collapse a sorted sequence into (distinct values, multiplicities)."""
    vals: list = []
    counts: list = []
    for v in values:
        if vals and vals[-1] == v:
            counts[-1] += 1
        else:
            vals.append(v)
            counts.append(1)
    return vals, counts


def normalize_directive(state: OpinionState, directive) -> tuple:
    if directive is None:
        return state.strategic
    directive = tuple(directive)
    if len(directive) != state.m:
        raise WrongMError(f"directive has {len(directive)} entries, state has m={state.m}")
    return tuple(p if p is FAR else coerce(p, state.mode) for p in directive)


def _windows(vals: list, spos: list, r) -> list[tuple[int, int, int, int]]:
    """Per distinct value: half-open index windows into ``vals`` and ``spos``."""
    D, P = len(vals), len(spos)
    out = []
    lo = hi = slo = shi = 0
    for v in vals:
        while v - vals[lo] > r:
            lo += 1
        while hi < D and vals[hi] - v <= r:
            hi += 1
        while slo < P and v - spos[slo] > r:
            slo += 1
        if shi < slo:
            shi = slo
        while shi < P and spos[shi] - v <= r:
            shi += 1
        out.append((lo, hi, slo, shi))
    return out


def _strategic_groups(directive: tuple) -> tuple[list, list, list]:
    """Sorted distinct strategic positions, their counts, and agent ids per group."""
    placed = sorted((p, s) for s, p in enumerate(directive) if p is not FAR)
    spos: list = []
    scnt: list = []
    sids: list = []
    for p, s in placed:
        if spos and spos[-1] == p:
            scnt[-1] += 1
            sids[-1].append(s)
        else:
            spos.append(p)
            scnt.append(1)
            sids.append([s])
    return spos, scnt, sids


def neighborhoods(state: OpinionState, directive=None) -> list[Neighborhood]:
    """Neighborhood of every non-strategic agent (strategic members included)."""
    directive = normalize_directive(state, directive)
    vals, counts = group_sorted(state.nonstrategic)
    spos, _, sids = _strategic_groups(directive)
    starts = [0]
    for c in counts:
        starts.append(starts[-1] + c)
    out = []
    i = 0
    for d, (lo, hi, slo, shi) in enumerate(_windows(vals, spos, radius(state.mode))):
        strat = tuple(sorted(s for g in sids[slo:shi] for s in g))
        members = range(starts[lo], starts[hi])
        for _ in range(counts[d]):
            out.append(Neighborhood(i, members, strat))
            i += 1
    return out


def step_windows(state: OpinionState, directive=None) -> list[tuple[int, int, int, int]]:
    """Per-agent neighborhood keys; equal keys <=> equal neighborhoods."""
    directive = normalize_directive(state, directive)
    vals, counts = group_sorted(state.nonstrategic)
    spos, _, _ = _strategic_groups(directive)
    out = []
    for d, w in enumerate(_windows(vals, spos, radius(state.mode))):
        out.extend([w] * counts[d])
    return out


def hk_step(state: OpinionState, directive=None, *, overflow_bits: int | None = DEFAULT_OVERFLOW_BITS) -> OpinionState:
    """One synchronous update: each non-strategic agent moves to the mean of
    every opinion (both kinds) within distance 1 of its own.

    ``directive`` gives the strategic opinions used for this step (defaults to
    ``state.strategic``). Sums run over distinct opinion values in ascending
    order, so agents with identical neighborhoods get bit-identical results.
    """
    directive = normalize_directive(state, directive)
    vals, counts = group_sorted(state.nonstrategic)
    spos, scnt, _ = _strategic_groups(directive)
    new = []
    for d, (lo, hi, slo, shi) in enumerate(_windows(vals, spos, radius(state.mode))):
        if hi - lo == 1 and slo == shi:
            value = vals[d]
        else:
            total = 0
            size = 0
            for j in range(lo, hi):
                total += vals[j] * counts[j]
                size += counts[j]
            for j in range(slo, shi):
                total += spos[j] * scnt[j]
                size += scnt[j]
            value = total / size
            check_size(value, overflow_bits)
        new.extend([value] * counts[d])
    return OpinionState(state.t + 1, tuple(new), directive, state.mode)


def components(state: OpinionState) -> list[Component]:
    xs = state.nonstrategic
    r = radius(state.mode)
    out = []
    start = 0
    for i in range(1, len(xs) + 1):
        if i == len(xs) or xs[i] - xs[i - 1] > r:
            out.append(Component(start, i - 1, xs[start], xs[i - 1]))
            start = i
    return out


def component_labels(state: OpinionState) -> list[int]:
    labels = []
    for c, comp in enumerate(components(state)):
        labels.extend([c] * comp.size)
    return labels


def total_width(state: OpinionState) -> Number:
    zero = Fraction(0) if state.mode is Mode.RATIONAL else 0.0
    return sum((c.width for c in components(state)), zero)


def weight_table(state: OpinionState) -> Counter:
    return Counter(state.nonstrategic)


def is_frozen(state: OpinionState, i: int) -> bool:
    xs = state.nonstrategic
    r = radius(state.mode)
    x = xs[i]
    close = sum(1 for y in xs if abs(y - x) <= r)
    return close == sum(1 for y in xs if y == x)


def has_converged(state: OpinionState) -> bool:
    """Every pair of non-strategic opinions is equal or more than 1 apart."""
    vals, _ = group_sorted(state.nonstrategic)
    r = radius(state.mode)
    return all(b - a > r for a, b in zip(vals, vals[1:]))
