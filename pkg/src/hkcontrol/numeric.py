"""Scalar handling for the two numeric backends.

Opinions are plain Python numbers: :class:`fractions.Fraction` in rational mode
and ``float`` in float64 mode. Keeping them unwrapped lets the same averaging
code serve both backends; only the influence radius differs.
"""
from __future__ import annotations

import enum
import math
from fractions import Fraction
from typing import Union

from .errors import InvalidParamError, RationalOverflowError

Number = Union[Fraction, float]

DEFAULT_OVERFLOW_BITS = 4096
FLOAT_SLACK = 2.0 ** -40


class Mode(str, enum.Enum):
    RATIONAL = "rational"
    FLOAT64 = "float64"

    @classmethod
    def parse(cls, value: "Mode | str") -> "Mode":
        if isinstance(value, Mode):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidParamError(f"unknown numeric mode {value!r}") from None


class _Far:
    """Sentinel for a strategic agent parked outside every neighborhood."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "FAR"

    def __reduce__(self):
        return (_Far, ())


FAR = _Far()


def radius(mode: Mode) -> Number:
    """Influence radius: exactly 1 for rationals, 1 + 2**-40 for floats.

    The same threshold decides both neighborhood membership and separation in
    the convergence test, so "converged" and "every agent frozen" agree.
    """
    return Fraction(1) if mode is Mode.RATIONAL else 1.0 + FLOAT_SLACK


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidParamError(f"not a number: {value!r}")
    if isinstance(value, (int, float)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InvalidParamError(f"cannot parse rational {value!r}") from None
    raise InvalidParamError(f"not a number: {value!r}")


def coerce(value, mode: Mode) -> Number:
    """Convert an int, float, Fraction or ``"p/q"`` string into ``mode``."""
    if mode is Mode.RATIONAL:
        return to_fraction(value)
    if isinstance(value, str):
        return float(to_fraction(value))
    return float(value)


def format_value(value: Number, mode: Mode):
    """JSON-friendly form: ``"p/q"`` strings for rationals, floats as-is."""
    if mode is Mode.RATIONAL:
        value = to_fraction(value)
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return float(value)


def check_size(value: Number, limit: int | None = DEFAULT_OVERFLOW_BITS) -> None:
    if limit is None or not isinstance(value, Fraction):
        return
    if value.numerator.bit_length() > limit or value.denominator.bit_length() > limit:
        raise RationalOverflowError(
            f"rational opinion exceeds {limit} bits "
            f"(numerator {value.numerator.bit_length()}, denominator {value.denominator.bit_length()})"
        )


def iroot(value: int, k: int) -> int:
    """Largest integer r with r**k <= value."""
    if value < 0 or k < 1:
        raise ValueError("iroot needs value >= 0 and k >= 1")
    if value < 2 or k == 1:
        return value
    if k == 2:
        return math.isqrt(value)
    r = 1 << -(-value.bit_length() // k)  # overestimate
    while True:
        s = ((k - 1) * r + value // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r ** k > value:
        r -= 1
    while (r + 1) ** k <= value:
        r += 1
    return r


def power_floor(n: int, alpha: Fraction, bits: int = 20) -> Fraction:
    """n**alpha rounded down to a multiple of 2**-bits, computed exactly."""
    alpha = to_fraction(alpha)
    if n < 1:
        raise InvalidParamError("n must be positive")
    if alpha < 0:
        raise InvalidParamError("alpha must be non-negative")
    p, q = alpha.numerator, alpha.denominator
    return Fraction(iroot(n ** p * 2 ** (bits * q), q), 2 ** bits)


def power_floor_int(n: int, alpha: Fraction) -> int:
    """floor(n**alpha) for alpha >= 0, exact."""
    alpha = to_fraction(alpha)
    if alpha < 0:
        raise InvalidParamError("alpha must be non-negative")
    return iroot(n ** alpha.numerator, alpha.denominator)


def power_ceil_int(n: int, alpha: Fraction) -> int:
    """ceil(n**alpha) for alpha >= 0, exact."""
    alpha = to_fraction(alpha)
    if alpha < 0:
        raise InvalidParamError("alpha must be non-negative")
    p, q = alpha.numerator, alpha.denominator
    r = iroot(n ** p, q)
    return r if r ** q == n ** p else r + 1
