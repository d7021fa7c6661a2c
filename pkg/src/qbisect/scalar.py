"""Scalar backends and the global float tolerance.

Two backends exist. The exact backend stores arbitrary-precision rationals
(``gmpy2.mpq``); the float backend stores Python floats. A value's backend is
read from its type, so mixed arithmetic is never needed.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from fractions import Fraction
from typing import Iterator, Union

from gmpy2 import mpq

Scalar = Union[mpq, float]

EXACT = "exact"
FLOAT = "float"
BACKENDS = (EXACT, FLOAT)

_state = {"tau": 1e-9}


def tolerance() -> float:
    """Current relative tolerance used by every float comparison."""
    return _state["tau"]


def set_tolerance(tau: float) -> None:
    if not tau > 0:
        raise ValueError(f"tolerance must be positive, got {tau!r}")
    _state["tau"] = float(tau)


@contextmanager
def tolerance_context(tau: float) -> Iterator[None]:
    old = _state["tau"]
    set_tolerance(tau)
    try:
        yield
    finally:
        _state["tau"] = old


def is_exact(x) -> bool:
    return not isinstance(x, float)


def backend_of(x) -> str:
    return FLOAT if isinstance(x, float) else EXACT


def exact(x) -> mpq:
    """Convert ints, Fractions, decimal/rational strings or floats to ``mpq``.

    Floats convert to their exact binary value.
    """
    if isinstance(x, str):
        return mpq(Fraction(x.strip()))
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def to_backend(x, backend: str) -> Scalar:
    if backend == EXACT:
        return exact(x)
    if backend == FLOAT:
        return float(Fraction(x)) if isinstance(x, str) else float(x)
    raise ValueError(f"unknown backend {backend!r}")


def zero(backend: str) -> Scalar:
    return mpq(0) if backend == EXACT else 0.0


def one(backend: str) -> Scalar:
    return mpq(1) if backend == EXACT else 1.0


def close(x, y, scale: float = 1.0) -> bool:
    """Exact equality for rationals, else |x-y| <= tau*max(scale,|x|,|y|)."""
    if not isinstance(x, float) and not isinstance(y, float):
        return x == y
    x, y = float(x), float(y)
    return abs(x - y) <= _state["tau"] * max(scale, abs(x), abs(y))


def is_zero(x, scale: float = 1.0) -> bool:
    if not isinstance(x, float):
        return x == 0
    return abs(x) <= _state["tau"] * scale


def sign(x, scale: float = 1.0) -> int:
    if is_zero(x, scale):
        return 0
    return 1 if x > 0 else -1


def mag(x) -> float:
    """Float size of ``x`` for tolerance scaling; 1.0 for exact values, which ignore scales."""
    return float(x) if isinstance(x, float) else 1.0


def relative_residual(lhs, rhs) -> float:
    if not isinstance(lhs, float) and not isinstance(rhs, float):
        # exact: form the ratio first, the operands may not fit a float
        lhs, rhs = mpq(lhs), mpq(rhs)
        return float(abs(lhs - rhs) / max(mpq(1), abs(lhs), abs(rhs)))
    lhs, rhs = float(lhs), float(rhs)
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def fmt(x) -> str:
    """Text form of a scalar: ``p/q`` for rationals, ``repr`` for floats."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def parse(text: str, backend: str = EXACT) -> Scalar:
    return to_backend(text, backend)


def is_square(x: mpq) -> bool:
    if x < 0:
        return False
    num, den = x.numerator, x.denominator
    return math.isqrt(num) ** 2 == num and math.isqrt(den) ** 2 == den


def exact_sqrt(x: mpq) -> mpq:
    if not is_square(x):
        raise ValueError(f"{x} is not the square of a rational")
    return mpq(math.isqrt(x.numerator), math.isqrt(x.denominator))
