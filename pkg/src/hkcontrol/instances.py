"""Starting configurations used in the convergence-time constructions, a seeded
random generator, and the JSON instance format.

All generators build exact rationals first and convert at the end, so a
float64 instance is the correctly rounded image of its rational twin.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .dynamics import OpinionState
from .errors import InvalidParamError
from .numeric import (
    Mode,
    coerce,
    format_value,
    power_floor_int,
    to_fraction,
)

FARM_GAP = 10
GRID = 64


@dataclass(frozen=True)
class InstanceSpec:
    name: str
    n: int
    m: int
    opinions: tuple
    mode: Mode = Mode.RATIONAL
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n != len(self.opinions):
            raise InvalidParamError(f"n={self.n} but {len(self.opinions)} opinions given")
        if self.m < 0:
            raise InvalidParamError("m must be non-negative")

    def state(self) -> OpinionState:
        return OpinionState.initial(self.opinions, self.m, self.mode)

    def with_m(self, m: int) -> "InstanceSpec":
        return replace(self, m=m)

    def with_mode(self, mode: Mode | str) -> "InstanceSpec":
        mode = Mode.parse(mode)
        if mode is self.mode:
            return self
        return replace(self, mode=mode, opinions=tuple(coerce(x, mode) for x in self.opinions))

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "mode": self.mode.value,
            "n": self.n,
            "m": self.m,
            "opinions": [format_value(x, self.mode) for x in self.opinions],
            "params": {k: _param_out(v) for k, v in self.params.items()},
        }
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "InstanceSpec":
        try:
            mode = Mode.parse(data.get("mode", "rational"))
            opinions = tuple(coerce(x, mode) for x in data["opinions"])
            spec = cls(
                name=str(data.get("name", "custom")),
                n=int(data.get("n", len(opinions))),
                m=int(data.get("m", 0)),
                opinions=opinions,
                mode=mode,
                seed=data.get("seed"),
                params={k: _param_in(v) for k, v in data.get("params", {}).items()},
            )
        except KeyError as exc:
            raise InvalidParamError(f"instance file missing field {exc}") from None
        spec.state()  # validates ordering
        return spec

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _param_out(v):
    if isinstance(v, Fraction):
        # integral values stay numbers so they read back as equal
        return v.numerator if v.denominator == 1 else format_value(v, Mode.RATIONAL)
    return v


def _param_in(v):
    if isinstance(v, str) and "/" in v:
        return to_fraction(v)
    return v


def save_instance(spec: InstanceSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")


def load_instance(path) -> InstanceSpec:
    return InstanceSpec.from_dict(json.loads(Path(path).read_text()))


def _make(name, opinions, mode, m=0, seed=None, **params) -> InstanceSpec:
    mode = Mode.parse(mode)
    opinions = sorted(opinions)
    return InstanceSpec(
        name=name,
        n=len(opinions),
        m=m,
        opinions=tuple(coerce(x, mode) for x in opinions),
        mode=mode,
        seed=seed,
        params=params,
    )


def _require_int(value, name, minimum):
    if isinstance(value, bool) or int(value) != value:
        raise InvalidParamError(f"{name} must be an integer")
    value = int(value)
    if value < minimum:
        raise InvalidParamError(f"{name} must be >= {minimum}, got {value}")
    return value


def equidistant_opinions(n: int) -> list[Fraction]:
    return [Fraction(i) for i in range(n)]


def dumbbell_opinions(k: int) -> list[Fraction]:
    return (
        [Fraction(-1, k)] * k
        + [Fraction(i) for i in range(k + 1)]
        + [k + Fraction(1, k)] * k
    )


def gen_equidistant(n, *, m=0, mode=Mode.RATIONAL) -> InstanceSpec:
    """Opinions 0, 1, ..., n-1."""
    n = _require_int(n, "n", 1)
    return _make("equidistant", equidistant_opinions(n), mode, m=m, n=n)


def gen_dumbbell(k, *, m=0, mode=Mode.RATIONAL) -> InstanceSpec:
    """k agents at -1/k, one at each integer 0..k, k agents at k + 1/k."""
    k = _require_int(k, "k", 10)
    return _make("dumbbell", dumbbell_opinions(k), mode, m=m, k=k)


def gen_three_cluster(k, *, m=1, mode=Mode.RATIONAL) -> InstanceSpec:
    k = _require_int(k, "k", 15)
    opinions = [Fraction(-2, 3)] * (k * k) + [Fraction(0)] * k + [Fraction(2, 3)] * (k * k)
    return _make("three_cluster", opinions, mode, m=m, k=k)


def gen_not_too_fast(n, *, m=0, mode=Mode.RATIONAL) -> InstanceSpec:
    n = _require_int(n, "n", 5)
    head = [Fraction(0), Fraction(1, 4), Fraction(2, 3), Fraction(5, 4), Fraction(4, 3)]
    return _make("not_too_fast", head + [Fraction(6)] * (n - 5), mode, m=m, n=n)


def _farm(blocks: list[list[Fraction]], leftover: int) -> list[Fraction]:
    opinions: list[Fraction] = []
    cursor = None
    for block in blocks:
        shift = Fraction(0) if cursor is None else cursor + FARM_GAP - block[0]
        opinions.extend(x + shift for x in block)
        cursor = opinions[-1]
    if leftover:
        anchor = Fraction(0) if cursor is None else cursor + FARM_GAP
        opinions.extend([anchor] * leftover)
    return opinions


def dumbbell_copy_size(limit: int) -> int:
    """Largest dumbbell size 3k'+1 (k' >= 10) not exceeding ``limit``."""
    if limit < 31:
        raise InvalidParamError(f"dumbbell copies need at least 31 agents, group size limit is {limit}")
    return limit - (limit - 1) % 3


def gen_dumbbell_farm(n, alpha, *, m=0, size=None, mode=Mode.RATIONAL) -> InstanceSpec:
    """floor(n/k) far-apart dumbbell copies, k = floor(n**((1-alpha)/3)).

    Every copy has the same size, the largest admissible dumbbell size not
    above k. ``size`` overrides the derived group size so the construction can
    be exercised at small n. Agents left over sit in one inert block.
    """
    n = _require_int(n, "n", 1)
    alpha = to_fraction(alpha)
    if not 0 <= alpha <= 1:
        raise InvalidParamError("alpha must lie in [0, 1]")
    beta = (1 - alpha) / 3
    group = power_floor_int(n, beta) if size is None else _require_int(size, "size", 1)
    copy_size = dumbbell_copy_size(group)
    copies = n // group
    if copies < 1:
        raise InvalidParamError("n too small for a single dumbbell copy")
    ck = (copy_size - 1) // 3
    blocks = [dumbbell_opinions(ck) for _ in range(copies)]
    params = dict(n=n, alpha=alpha, copies=copies, copy_size=copy_size, copy_k=ck)
    if size is not None:
        params["size"] = group
    return _make("dumbbell_farm", _farm(blocks, n - copies * copy_size), mode, m=m, **params)


def gen_equidistant_farm(n, c2, *, m=0, mode=Mode.RATIONAL) -> InstanceSpec:
    """floor(n/k) far-apart equidistant copies of k = 2*c2 + 2 agents each."""
    n = _require_int(n, "n", 1)
    c2 = to_fraction(c2)
    k = 2 * c2 + 2
    if k.denominator != 1 or k < 1:
        raise InvalidParamError(f"2*c2 + 2 must be a positive integer, got {k}")
    k = int(k)
    copies = n // k
    if copies < 1:
        raise InvalidParamError(f"n={n} is smaller than the copy size {k}")
    blocks = [equidistant_opinions(k) for _ in range(copies)]
    return _make(
        "equidistant_farm",
        _farm(blocks, n - copies * k),
        mode,
        m=m,
        n=n,
        c2=c2,
        copies=copies,
        copy_size=k,
    )


def gen_random(n, m=0, span=8, seed=0, *, mode=Mode.RATIONAL) -> InstanceSpec:
    """n opinions drawn uniformly from the 1/64 grid on [0, span]."""
    n = _require_int(n, "n", 1)
    span = to_fraction(span)
    if span < 0:
        raise InvalidParamError("span must be non-negative")
    rng = random.Random(seed)
    top = int(span * GRID)
    opinions = [Fraction(rng.randint(0, top), GRID) for _ in range(n)]
    return _make("random", opinions, mode, m=m, seed=seed, n=n, span=span)


GENERATORS = {
    "equidistant": gen_equidistant,
    "dumbbell": gen_dumbbell,
    "three_cluster": gen_three_cluster,
    "not_too_fast": gen_not_too_fast,
    "dumbbell_farm": gen_dumbbell_farm,
    "equidistant_farm": gen_equidistant_farm,
    "random": gen_random,
}


def generate(name: str, mode=Mode.RATIONAL, **params) -> InstanceSpec:
    key = name.replace("-", "_")
    if key not in GENERATORS:
        raise InvalidParamError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    try:
        return GENERATORS[key](mode=mode, **params)
    except TypeError as exc:
        raise InvalidParamError(f"bad parameters for {name}: {exc}") from None
