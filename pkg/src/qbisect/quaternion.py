"""Quaternion arithmetic over the exact and float scalar backends.

Multiplication follows the Hamilton table ``ij = -ji = k``, ``jk = -kj = i``,
``ki = -ik = j``.
"""

from __future__ import annotations

import math
import re
from typing import Iterable, NamedTuple

from gmpy2 import mpq

from . import scalar as sc

_MPQ = type(mpq(0))
_REAL = (int, float, _MPQ)


_TERM = re.compile(r"([+-])([0-9./]*(?:[eE][+-]?[0-9]+)?)\*?([ijk]?)")


class QuaternionError(ArithmeticError):
    pass


class Quaternion:
    """``re + x i + y j + z k`` with immutable coefficients."""

    __slots__ = ("re", "x", "y", "z")

    def __init__(self, re=0, x=0, y=0, z=0):
        # every coefficient shares one backend: float if any float was given
        if any(isinstance(c, float) for c in (re, x, y, z)):
            re, x, y, z = float(re), float(x), float(y), float(z)
        else:
            re, x, y, z = sc.exact(re), sc.exact(x), sc.exact(y), sc.exact(z)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    @classmethod
    def _raw(cls, re, x, y, z) -> Quaternion:
        q = object.__new__(cls)
        object.__setattr__(q, "re", re)
        object.__setattr__(q, "x", x)
        object.__setattr__(q, "y", y)
        object.__setattr__(q, "z", z)
        return q

    def __setattr__(self, name, value):
        raise AttributeError("Quaternion is immutable")

    # -- views -----------------------------------------------------------
    @property
    def coeffs(self) -> tuple:
        return (self.re, self.x, self.y, self.z)

    @property
    def backend(self) -> str:
        return sc.backend_of(self.re)

    @property
    def imag(self) -> Quaternion:
        zero = sc.zero(self.backend)
        return Quaternion._raw(zero, self.x, self.y, self.z)

    def is_real(self, scale: float = 1.0) -> bool:
        return (sc.is_zero(self.x, scale) and sc.is_zero(self.y, scale)
                and sc.is_zero(self.z, scale))

    def is_zero(self, scale: float = 1.0) -> bool:
        return sc.is_zero(self.re, scale) and self.is_real(scale)

    def is_imaginary(self, scale: float = 1.0) -> bool:
        return sc.is_zero(self.re, scale)

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Quaternion):
            other = Quaternion.scalar(other, self.backend)
        return Quaternion._raw(self.re + other.re, self.x + other.x,
                               self.y + other.y, self.z + other.z)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Quaternion):
            other = Quaternion.scalar(other, self.backend)
        return Quaternion._raw(self.re - other.re, self.x - other.x,
                               self.y - other.y, self.z - other.z)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Quaternion._raw(-self.re, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if not isinstance(other, Quaternion):
            if isinstance(other, _REAL):
                return Quaternion._raw(self.re * other, self.x * other,
                                       self.y * other, self.z * other)
            return NotImplemented
        a0, a1, a2, a3 = self.re, self.x, self.y, self.z
        b0, b1, b2, b3 = other.re, other.x, other.y, other.z
        return Quaternion._raw(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )

    def __rmul__(self, other):
        # real scalars are central
        if isinstance(other, _REAL):
            return self.__mul__(other)
        return NotImplemented

    def __truediv__(self, other):
        """Right division ``self * other^-1``."""
        if isinstance(other, Quaternion):
            return self * other.inverse()
        if other == 0:
            raise QuaternionError("division by zero quaternion")
        if isinstance(other, float) or isinstance(self.re, float):
            inv = 1.0 / float(other)
        else:
            inv = 1 / sc.exact(other)
        return self * inv

    def __eq__(self, other):
        if isinstance(other, _REAL):
            other = Quaternion.scalar(other, self.backend)
        if not isinstance(other, Quaternion):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def close(self, other: Quaternion, scale: float = 1.0) -> bool:
        """Coefficientwise comparison; exact on rationals, tau-relative on floats."""
        return all(sc.close(a, b, scale) for a, b in zip(self.coeffs, other.coeffs))

    def conj(self) -> Quaternion:
        return Quaternion._raw(self.re, -self.x, -self.y, -self.z)

    def norm2(self):
        return self.re * self.re + self.x * self.x + self.y * self.y + self.z * self.z

    def abs(self) -> float:
        return math.sqrt(float(self.norm2()))

    def inverse(self) -> Quaternion:
        n = self.norm2()
        if n == 0:
            raise QuaternionError("division by zero quaternion")
        return Quaternion._raw(self.re / n, -self.x / n, -self.y / n, -self.z / n)

    def dot(self, other: Quaternion):
        """Euclidean inner product of the coefficient 4-vectors."""
        return (self.re * other.re + self.x * other.x + self.y * other.y
                + self.z * other.z)

    def to_float(self) -> Quaternion:
        return Quaternion._raw(float(self.re), float(self.x), float(self.y), float(self.z))

    def to_exact(self) -> Quaternion:
        return Quaternion(*(sc.exact(c) for c in self.coeffs))

    def to_backend(self, backend: str) -> Quaternion:
        return self.to_float() if backend == sc.FLOAT else self.to_exact()

    # -- text / JSON -----------------------------------------------------
    def __repr__(self):
        return f"Quaternion({', '.join(sc.fmt(c) for c in self.coeffs)})"

    def __str__(self):
        out = sc.fmt(self.re)
        for c, unit in ((self.x, "i"), (self.y, "j"), (self.z, "k")):
            t = sc.fmt(c)
            out += f" - {t[1:]} {unit}" if t.startswith("-") else f" + {t} {unit}"
        return out

    def to_json(self) -> list[str]:
        return [sc.fmt(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data, backend: str = sc.EXACT) -> Quaternion:
        if not isinstance(data, (list, tuple)) or len(data) != 4:
            raise ValueError(f"quaternion must be a 4-array, got {data!r}")
        return cls(*(sc.to_backend(str(c), backend) for c in data))

    @classmethod
    def parse(cls, text: str, backend: str = sc.EXACT) -> Quaternion:
        """Parse ``a0 + a1 i + a2 j + a3 k``; terms may be omitted or reordered."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty quaternion text")
        if s[0] not in "+-":
            s = "+" + s
        parts = dict.fromkeys(("", "i", "j", "k"), "0")
        seen = set()
        for m in _TERM.finditer(s):
            sgn, num, unit = m.groups()
            if not m.group(0):
                continue
            if unit in seen:
                raise ValueError(f"repeated term {unit or 'real'!r} in {text!r}")
            seen.add(unit)
            num = num or "1"
            parts[unit] = ("-" if sgn == "-" else "") + num
        rebuilt = "".join(m.group(0) for m in _TERM.finditer(s))
        if rebuilt != s:
            raise ValueError(f"cannot parse quaternion {text!r}")
        return cls(*(sc.to_backend(parts[u], backend) for u in ("", "i", "j", "k")))

    @classmethod
    def scalar(cls, value, backend: str | None = None) -> Quaternion:
        if backend is None:
            backend = sc.backend_of(value)
        v = sc.to_backend(value, backend)
        z = sc.zero(backend)
        return cls._raw(v, z, z, z)


def q(re=0, x=0, y=0, z=0) -> Quaternion:
    return Quaternion(re, x, y, z)


ONE = Quaternion(1)
I = Quaternion(0, 1)
J = Quaternion(0, 0, 1)
K = Quaternion(0, 0, 0, 1)


def zero_like(a: Quaternion) -> Quaternion:
    return Quaternion.scalar(0, a.backend)


def one_like(a: Quaternion) -> Quaternion:
    return Quaternion.scalar(1, a.backend)


def conj(a: Quaternion) -> Quaternion:
    return a.conj()


def inverse(a: Quaternion) -> Quaternion:
    return a.inverse()


def is_similar(a: Quaternion, b: Quaternion) -> bool:
    """Similarity test: equal real parts and equal moduli."""
    return sc.close(a.re, b.re) and sc.close(a.norm2(), b.norm2())


class NormalForm(NamedTuple):
    re: object
    im_norm2: object
    representative: Quaternion | None


def similarity_normal_form(a: Quaternion) -> NormalForm:
    """Similarity invariants ``(Re a, |Im a|^2)``.

    On the float backend the complex representative ``b0 + b1 i`` with
    ``b1 >= 0`` is also returned; exact rationals cannot hold ``sqrt``.
    """
    im2 = a.x * a.x + a.y * a.y + a.z * a.z
    rep = None
    if a.backend == sc.FLOAT:
        rep = Quaternion(a.re, math.sqrt(im2))
    return NormalForm(a.re, im2, rep)


def commutes(a: Quaternion, b: Quaternion) -> bool:
    return (a * b).close(b * a, scale=max(1.0, sc.mag(a.norm2() * b.norm2())))


def in_subfield(value: Quaternion, direction: Quaternion | None,
                scale: float = 1.0) -> bool:
    """Whether ``value`` lies in span_R(1, direction); ``None`` means the reals."""
    if direction is None:
        return value.is_real(scale)
    v, a = value, direction
    cross = (v.y * a.z - v.z * a.y, v.z * a.x - v.x * a.z, v.x * a.y - v.y * a.x)
    s = scale * max(1.0, sc.mag(a.norm2()))
    return all(sc.is_zero(c, s) for c in cross)


def orthogonal_imaginary(a: Quaternion) -> Quaternion:
    """A nonzero imaginary quaternion orthogonal to ``Im a``.

    Deterministic: ``(y, -x, 0)`` in ``(i, j, k)`` coordinates, or ``i`` when
    ``a`` is a multiple of ``k``, sign-normalised so the first nonzero
    coordinate is positive. ``a`` and the result anticommute.
    """
    z = sc.zero(a.backend)
    cand = (a.y, -a.x, z)
    if all(sc.is_zero(c) for c in cand):
        cand = (sc.one(a.backend), z, z)
    for c in cand:
        if not sc.is_zero(c):
            if c < 0:
                cand = tuple(-d for d in cand)
            break
    return Quaternion._raw(z, *cand)


def similarity_witness(a: Quaternion, b: Quaternion) -> Quaternion:
    """Return ``lam != 0`` with ``lam * b * lam^-1 == a``.

    For imaginary parts ``u = Im a`` and ``v = Im b`` of equal length,
    ``lam = u + v`` works since ``(u+v) v = u v + v^2 = u^2 + u v = u (u+v)``;
    when ``u = -v`` any imaginary orthogonal to ``u`` does.
    """
    if not is_similar(a, b):
        raise QuaternionError(f"{a} and {b} are not similar")
    u, v = a.imag, b.imag
    if u.close(v):
        return one_like(a)
    lam = u + v
    if lam.is_zero():
        return orthogonal_imaginary(u)
    return lam


def cayley_unit(u: Quaternion) -> Quaternion:
    """Unit quaternion ``(1 + u)(1 - u)^-1`` for imaginary ``u``."""
    if not u.is_imaginary():
        raise QuaternionError("Cayley transform needs an imaginary quaternion")
    one = one_like(u)
    return (one + u) * (one - u).inverse()


def quaternion_with_norm2(r) -> Quaternion:
    """An exact quaternion whose squared modulus is the positive rational ``r``.

    Writes ``r = p d / d^2`` and applies Lagrange's four-square theorem to
    the integer ``p d``, so the result has denominator ``d``.
    """
    from sympy.solvers.diophantine.diophantine import sum_of_four_squares

    r = sc.exact(r)
    if r <= 0:
        raise QuaternionError("squared modulus must be positive")
    p, d = int(r.numerator), int(r.denominator)
    return Quaternion(*sum_of_four_squares(p * d)) * mpq(1, d)


def sum_q(values: Iterable[Quaternion], backend: str = sc.EXACT) -> Quaternion:
    total = None
    for v in values:
        total = v if total is None else total + v
    return total if total is not None else Quaternion.scalar(0, backend)
