"""Run an instance under a controller until convergence.

Besides the convergence time, a run can record the trajectory, evaluate the
structural invariants of the dynamics after every step, and log when each
initial component is first reached by a strategic agent.
"""
from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from .dynamics import (
    OpinionState,
    _strategic_groups,
    component_labels,
    components,
    has_converged,
    hk_step,
    normalize_directive,
    step_windows,
)
from .errors import InvalidParamError, MonitorViolation
from .instances import InstanceSpec
from .numeric import DEFAULT_OVERFLOW_BITS, FAR, FLOAT_SLACK, Mode, format_value, radius

DEFAULT_MAX_STEPS = 10**6
TRAJECTORY_LIMIT = 10**4
NOT_CONVERGED = "NOT_CONVERGED"
NEVER = "NEVER"

MONITORS = (
    "order",
    "bounded_move",
    "weight_monotone",
    "equality_persistence",
    "coincidence",
    "hull_containment",
    "separation_persistence",
)


@dataclass
class MonitorResult:
    passed: bool = True
    first_violation: int | None = None
    violations: int = 0
    example: str | None = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "first_violation": self.first_violation,
            "violations": self.violations,
            "example": self.example,
        }


class Monitors:
    """Per-step invariant checks.

    ``coincidence`` runs only in rational mode (it needs exact equality) and
    ``separation_persistence`` only without strategic agents.
    """

    def __init__(self, mode: Mode, m: int, on_violation: str = "record"):
        if on_violation not in ("record", "abort"):
            raise InvalidParamError("on_violation must be 'record' or 'abort'")
        self.mode = mode
        self.r = radius(mode)
        self.on_violation = on_violation
        active = set(MONITORS)
        if mode is not Mode.RATIONAL:
            active.discard("coincidence")
        if m != 0:
            active.discard("separation_persistence")
        self.results = {name: MonitorResult() for name in MONITORS if name in active}

    def _fail(self, name: str, t: int, detail: str) -> None:
        res = self.results[name]
        res.violations += 1
        if res.passed:
            res.passed = False
            res.first_violation = t
            res.example = detail
        if self.on_violation == "abort":
            raise MonitorViolation(f"{name} violated at t={t}: {detail}")

    def _slack(self, x) -> float:
        if self.mode is Mode.RATIONAL:
            return 0
        return FLOAT_SLACK * max(1.0, abs(x))

    def check(self, prev: OpinionState, directive: tuple, nxt: OpinionState, windows=None) -> None:
        t = prev.t
        xs, ys = prev.nonstrategic, nxt.nonstrategic
        n = len(xs)
        res = self.results
        if windows is None:
            windows = step_windows(prev, directive)

        for i in range(n - 1):
            if ys[i] > ys[i + 1]:
                self._fail("order", t, f"agents {i},{i + 1}: {ys[i]} > {ys[i + 1]}")
                break
        for i in range(n):
            if abs(ys[i] - xs[i]) > self.r:
                self._fail("bounded_move", t, f"agent {i} moved {xs[i]} -> {ys[i]}")
                break
        w0, w1 = Counter(xs), Counter(ys)
        for i in range(n):
            if w1[ys[i]] < w0[xs[i]]:
                self._fail("weight_monotone", t, f"agent {i}: weight {w0[xs[i]]} -> {w1[ys[i]]}")
                break
        for i in range(n - 1):
            if xs[i] == xs[i + 1] and ys[i] != ys[i + 1]:
                self._fail("equality_persistence", t, f"agents {i},{i + 1} split")
                break
        if "coincidence" in res:
            for i in range(n - 1):
                if (ys[i] == ys[i + 1]) != (windows[i] == windows[i + 1]):
                    self._fail(
                        "coincidence",
                        t,
                        f"agents {i},{i + 1}: equal next={ys[i] == ys[i + 1]}, "
                        f"equal neighborhoods={windows[i] == windows[i + 1]}",
                    )
                    break
        if "separation_persistence" in res:
            for i in range(n - 1):
                if xs[i + 1] - xs[i] > self.r and ys[i + 1] - ys[i] <= self.r:
                    self._fail("separation_persistence", t, f"gap between {i},{i + 1} closed")
                    break
        spos, _, _ = _strategic_groups(directive)
        for c in components(prev):
            slo = windows[c.left][2]
            shi = max(windows[i][3] for i in (c.left, c.right))
            inside = all(c.x_left <= p <= c.x_right for p in spos[slo:shi])
            if not inside:
                continue
            lo = c.x_left - self._slack(c.x_left)
            hi = c.x_right + self._slack(c.x_right)
            if any(not lo <= ys[i] <= hi for i in c.members):
                self._fail("hull_containment", t, f"component {c.left}..{c.right} left its hull")
                break

    def report(self) -> dict:
        return {name: res.to_dict() for name, res in self.results.items()}

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())


@dataclass
class RunRecord:
    convergence_time: int | None
    steps_executed: int
    mode: Mode
    trajectory: list | None = None
    monitor_report: dict = field(default_factory=dict)
    influence_log: list = field(default_factory=list)
    final_opinions: tuple = ()
    instance: str = ""
    controller: str = ""

    @property
    def converged(self) -> bool:
        return self.convergence_time is not None

    def to_dict(self) -> dict:
        fmt = lambda x: format_value(x, self.mode)  # noqa: E731
        out = {
            "instance": self.instance,
            "controller": self.controller,
            "mode": self.mode.value,
            "convergence_time": self.convergence_time if self.converged else NOT_CONVERGED,
            "steps_executed": self.steps_executed,
            "monitor_report": self.monitor_report,
            "influence_log": [NEVER if t is None else t for t in self.influence_log],
            "final_opinions": [fmt(x) for x in self.final_opinions],
        }
        if self.trajectory is not None:
            out["trajectory"] = [
                {
                    "t": s.t,
                    "nonstrategic": [fmt(x) for x in s.nonstrategic],
                    "strategic": ["FAR" if p is FAR else fmt(p) for p in s.strategic],
                }
                for s in self.trajectory
            ]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


def run(
    instance: InstanceSpec | OpinionState,
    controller: Callable[[OpinionState], tuple],
    max_steps: int = DEFAULT_MAX_STEPS,
    record_trajectory: bool | None = None,
    *,
    monitors: bool = True,
    on_violation: str = "record",
    track_influence: bool = True,
    until_converged: bool = True,
    overflow_bits: int | None = DEFAULT_OVERFLOW_BITS,
) -> RunRecord:
    """Simulate until convergence or ``max_steps`` steps.

    With ``until_converged=False`` exactly ``max_steps`` steps are executed and
    the first converged time seen is still reported. Trajectory snapshots pair
    x(t) with the directive issued at t; the last snapshot shows FAR since no
    directive follows it.
    """
    if max_steps < 1:
        raise InvalidParamError("max_steps must be >= 1")
    if isinstance(instance, InstanceSpec):
        state, name = instance.state(), instance.name
    else:
        state, name = instance, "state"
        state.validate()
    if record_trajectory is None:
        record_trajectory = state.n <= TRAJECTORY_LIMIT
    mon = Monitors(state.mode, state.m, on_violation) if monitors else None
    labels = component_labels(state) if track_influence else None
    influence = [None] * (labels[-1] + 1) if track_influence else []
    trajectory = [] if record_trajectory else None

    conv = state.t if has_converged(state) else None
    steps = 0
    while steps < max_steps and not (until_converged and conv is not None):
        directive = normalize_directive(state, controller(state))
        nxt = hk_step(state, directive, overflow_bits=overflow_bits)
        windows = step_windows(state, directive) if (mon or track_influence) else None
        if mon is not None:
            mon.check(state, directive, nxt, windows)
        if track_influence and any(p is not FAR for p in directive):
            for i, (_, _, slo, shi) in enumerate(windows):
                if slo < shi and influence[labels[i]] is None:
                    influence[labels[i]] = state.t
        if trajectory is not None:
            trajectory.append(OpinionState(state.t, state.nonstrategic, directive, state.mode))
        state = nxt
        steps += 1
        if conv is None and has_converged(state):
            conv = state.t
    if trajectory is not None:
        trajectory.append(OpinionState(state.t, state.nonstrategic, (FAR,) * state.m, state.mode))
    return RunRecord(
        convergence_time=conv,
        steps_executed=steps,
        mode=state.mode,
        trajectory=trajectory,
        monitor_report=mon.report() if mon else {},
        influence_log=influence,
        final_opinions=state.nonstrategic,
        instance=name,
        controller=getattr(controller, "name", type(controller).__name__),
    )


def passive_time(opinions, mode: Mode, max_steps: int = DEFAULT_MAX_STEPS) -> int | None:
    from .controllers import Passive

    state = OpinionState.initial(opinions, 0, mode)
    rec = run(state, Passive(), max_steps, False, monitors=False, track_influence=False, overflow_bits=None)
    return rec.convergence_time


@dataclass
class InfluenceWitness:
    witness: int
    untouched: list
    passive_times: dict
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def _shape_key(opinions, mode):
    base = opinions[0]
    if mode is Mode.RATIONAL:
        return tuple(x - base for x in opinions)
    return tuple(round(x - base, 9) for x in opinions)


def influence_check(record: RunRecord, instance: InstanceSpec, max_steps: int = DEFAULT_MAX_STEPS) -> InfluenceWitness:
    """Lower-bound witness from components no strategic agent ever reached.

    Such a component evolved exactly as it would alone, so the run cannot
    have converged before that component's own passive convergence time.
    Components of the same shape share one nested passive run.
    """
    comps = components(instance.state())
    if len(record.influence_log) != len(comps):
        raise InvalidParamError("record does not carry an influence log for this instance")
    cache: dict = {}
    times = {}
    violations = []
    for c, first in zip(range(len(comps)), record.influence_log):
        if first is not None:
            continue
        ops = instance.opinions[comps[c].left : comps[c].right + 1]
        key = _shape_key(ops, instance.mode)
        if key not in cache:
            cache[key] = passive_time(ops, instance.mode, max_steps)
        times[c] = cache[key]
        if record.converged and (times[c] is None or record.convergence_time < times[c]):
            violations.append(c)
    witness = max((t for t in times.values() if t is not None), default=0)
    return InfluenceWitness(witness, sorted(times), times, violations)


def write_trajectory_csv(record: RunRecord, path) -> None:
    if record.trajectory is None:
        raise InvalidParamError("run was executed without trajectory recording")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "agent_kind", "agent_index", "opinion"])
        for s in record.trajectory:
            for i, x in enumerate(s.nonstrategic):
                writer.writerow([s.t, "N", i, format_value(x, s.mode)])
            for j, p in enumerate(s.materialized_strategic()):
                writer.writerow([s.t, "S", j, format_value(p, s.mode)])


def read_trajectory_csv(path, mode: Mode | str = Mode.RATIONAL) -> dict:
    """{t: {"N": [...], "S": [...]}} with opinions parsed back into ``mode``."""
    from .numeric import coerce

    mode = Mode.parse(mode)
    out: dict = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            slot = out.setdefault(int(row["t"]), {"N": [], "S": []})
            slot[row["agent_kind"]].append(coerce(row["opinion"], mode))
    return out
