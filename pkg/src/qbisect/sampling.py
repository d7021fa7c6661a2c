"""Seeded random draws of scalars, quaternions, vectors and ball points.

All randomness comes from numpy's PCG64 generator. Streams are derived with
``SeedSequence`` spawn keys, so a (seed, key path) pair always produces the
same draws regardless of how suites are scheduled.
"""

from __future__ import annotations

import numpy as np
from gmpy2 import mpq

from . import scalar as sc
from .qlinalg import HVector, norm
from .quaternion import Quaternion

DENOMINATOR_BOUND = 16


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the stream ``keys`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def random_scalar(rng: np.random.Generator, backend: str = sc.EXACT, bound: int = 16):
    """Rational ``p/q`` with ``|p| <= bound`` and ``1 <= q <= 16``.

    The float backend converts the same rational draw, so both backends see
    one distribution and a seed gives matching samples.
    """
    num = int(rng.integers(-bound, bound + 1))
    den = int(rng.integers(1, DENOMINATOR_BOUND + 1))
    return num / den if backend == sc.FLOAT else mpq(num, den)


def random_quaternion(rng, backend: str = sc.EXACT, nonzero: bool = False,
                      bound: int = 16) -> Quaternion:
    while True:
        qv = Quaternion(*(random_scalar(rng, backend, bound) for _ in range(4)))
        if not nonzero or not qv.is_zero(0.0):
            return qv


def random_imaginary(rng, backend: str = sc.EXACT, nonzero: bool = False,
                     bound: int = 16) -> Quaternion:
    while True:
        z = sc.zero(backend)
        qv = Quaternion(z, *(random_scalar(rng, backend, bound) for _ in range(3)))
        if not nonzero or not qv.is_zero(0.0):
            return qv


def random_unit(rng, backend: str = sc.EXACT) -> Quaternion:
    from .quaternion import cayley_unit
    return cayley_unit(random_imaginary(rng, backend))


def random_vector(rng, dim: int, backend: str = sc.EXACT, bound: int = 16) -> HVector:
    while True:
        v = HVector(random_quaternion(rng, backend, bound=bound) for _ in range(dim))
        if not v.is_zero(0.0):
            return v


def _ball_coefficient(rng, backend):
    den = int(rng.integers(1, DENOMINATOR_BOUND + 1))
    num = int(rng.integers(-den, den + 1))
    return num / (2 * den) if backend == sc.FLOAT else mpq(num, 2 * den)


def random_ball_lift(rng, n: int, backend: str = sc.EXACT) -> HVector:
    """Negative lift ``(w, 1)`` with ``|w|^2 < 1``; coefficients in ``[-1/2, 1/2]``."""
    one = Quaternion.scalar(1, backend)
    shrink = 1
    while True:
        for _ in range(32):
            w = [Quaternion(*(_ball_coefficient(rng, backend) for _ in range(4))) * (
                1.0 / shrink if backend == sc.FLOAT else mpq(1, shrink)) for _ in range(n)]
            v = HVector(w + [one])
            if sc.sign(norm(v), 1.0) < 0:
                return v
        shrink *= 2


def random_ball_point(rng, n: int, backend: str = sc.EXACT):
    from .model import ProjectivePoint
    return ProjectivePoint(random_ball_lift(rng, n, backend))
