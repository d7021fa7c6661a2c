"""Projective and ball models of quaternionic hyperbolic space.

Points are right lines in Q^{n,1}; the negative ones form the space. All
exact metric statements go through ``delta = cosh^2 d``, which is rational
in the coordinates; ``dist`` takes the square root and is float-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from . import scalar as sc
from .qlinalg import (FieldTag, HVector, LinAlgError, SignClass, Subspace, classify,
                      herm, norm, rank, signature)
from .quaternion import Quaternion


class GeometryError(ValueError):
    pass


def _float_proportional(v: HVector, w: HVector) -> bool:
    """``w = v r`` for some quaternion ``r``, tested against the largest coordinate of ``v``."""
    v = v * (1.0 / max(v.euclid2(), 1e-300) ** 0.5)
    w = w * (1.0 / max(w.euclid2(), 1e-300) ** 0.5)
    k = max(range(len(v)), key=lambda i: v[i].norm2())
    if v[k].is_zero(0.0):
        return w.is_zero(0.0)
    r = v[k].inverse() * w[k]
    return (w - v * r).is_zero()


class ProjectivePoint:
    """A right line ``pi(v)``.

    Float lifts are stored with last coordinate 1. Exact lifts are stored as
    a primitive integer representative, which keeps coefficients small;
    ``canonical`` gives the last-coordinate-1 lift used for equality.
    """

    __slots__ = ("lift", "sign", "_canon")

    def __init__(self, lift: HVector):
        if lift.is_zero(0.0):
            raise GeometryError("the zero vector is not a projective point")
        sign = classify(lift)
        canon = None
        if lift.backend == sc.EXACT:
            lift = lift.primitive()
        else:
            last = lift[-1]
            if not last.is_zero(0.0):
                lift = lift * last.inverse()
            canon = lift
        object.__setattr__(self, "lift", lift)
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "_canon", canon)

    @property
    def canonical(self) -> HVector:
        """Lift with last coordinate 1 (or the stored lift if that is 0)."""
        if self._canon is None:
            last = self.lift[-1]
            canon = self.lift if last.is_zero(0.0) else self.lift * last.inverse()
            object.__setattr__(self, "_canon", canon)
        return self._canon

    def __setattr__(self, name, value):
        raise AttributeError("ProjectivePoint is immutable")

    @property
    def dim(self) -> int:
        """n, for a point of the n-dimensional space."""
        return len(self.lift) - 1

    @property
    def backend(self) -> str:
        return self.lift.backend

    @property
    def is_negative(self) -> bool:
        return self.sign is SignClass.NEGATIVE

    def require_negative(self) -> ProjectivePoint:
        if not self.is_negative:
            raise GeometryError(f"point is {self.sign.value}, not in the ball")
        return self

    def __eq__(self, other):
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        if len(self.lift) != len(other.lift):
            return False
        if self.backend == sc.FLOAT or other.backend == sc.FLOAT:
            return _float_proportional(self.lift.to_float(), other.lift.to_float())
        a, b = self.canonical, other.canonical
        if not a[-1].is_zero(0.0) and not b[-1].is_zero(0.0):
            scale = max(1.0, sc.mag(a.euclid2()) ** 0.5, sc.mag(b.euclid2()) ** 0.5)
            return a.close(b, scale)
        return rank([a, b]) == 1

    def __hash__(self):
        if self.backend == sc.EXACT and not self.lift[-1].is_zero(0.0):
            return hash(self.canonical)
        return hash(len(self.lift))

    def to_float(self) -> ProjectivePoint:
        return ProjectivePoint(self.lift.to_float())

    def to_backend(self, backend: str) -> ProjectivePoint:
        return ProjectivePoint(self.lift.to_backend(backend))

    def to_ball(self) -> BallPoint:
        return to_ball(self)

    def __repr__(self):
        if self.is_negative:
            return f"ball({', '.join(str(c) for c in self.canonical.coords[:-1])})"
        return f"ProjectivePoint({self.lift!r}, {self.sign.value})"


@dataclass(frozen=True)
class BallPoint:
    """Interior ball coordinates ``w_i = z_i z_{n+1}^{-1}``."""

    w: tuple

    def __post_init__(self):
        w = tuple(c if isinstance(c, Quaternion) else Quaternion.scalar(c) for c in self.w)
        if not w:
            raise GeometryError("a ball point needs at least one coordinate")
        object.__setattr__(self, "w", w)
        r2 = sum((c.norm2() for c in w[1:]), w[0].norm2())
        if not r2 < 1:
            raise GeometryError(f"|w|^2 = {sc.fmt(r2)} is not inside the unit ball")

    @property
    def radius2(self):
        return sum((c.norm2() for c in self.w[1:]), self.w[0].norm2())

    def lift(self) -> ProjectivePoint:
        one = Quaternion.scalar(1, self.w[0].backend)
        return ProjectivePoint(HVector(self.w + (one,)))

    def to_json(self) -> list:
        return [c.to_json() for c in self.w]

    @classmethod
    def from_json(cls, data, backend: str = sc.EXACT) -> BallPoint:
        return cls(tuple(Quaternion.from_json(c, backend) for c in data))


def to_ball(p: ProjectivePoint) -> BallPoint:
    p.require_negative()
    return BallPoint(p.canonical.coords[:-1])


def lift(b: BallPoint) -> ProjectivePoint:
    return b.lift()


def ball(*coords) -> ProjectivePoint:
    """Point with ball coordinates ``coords`` (Quaternions or reals)."""
    return BallPoint(tuple(coords)).lift()


def origin(n: int, backend: str = sc.EXACT) -> ProjectivePoint:
    return ProjectivePoint(HVector.basis(n + 1, n, backend))


def point(v: HVector) -> ProjectivePoint:
    return ProjectivePoint(v)


def _vec(p) -> HVector:
    return p.lift if isinstance(p, ProjectivePoint) else p


def delta(p, q):
    """``cosh^2 d(p, q) = |<P,Q>|^2 / (<P,P><Q,Q>)``; accepts points or lifts."""
    P, Q = _vec(p), _vec(q)
    npp, nqq = norm(P), norm(Q)
    scale = max(1.0, sc.mag(P.euclid2()))
    if sc.sign(npp, scale) >= 0 or sc.sign(nqq, max(1.0, sc.mag(Q.euclid2()))) >= 0:
        raise GeometryError("delta needs two negative points")
    return herm(P, Q).norm2() / (npp * nqq)


def dist(p, q) -> float:
    d = float(delta(p, q))
    return math.acosh(math.sqrt(max(d, 1.0)))


def symmetric_point(o, p) -> ProjectivePoint:
    """Image of ``p`` under the geodesic symmetry at ``o``.

    ``v -> 2 O <O,O>^-1 <O,v> - v`` is an isometry fixing ``o`` and acting
    as ``-1`` on its tangent space; it is exact on rationals.
    """
    O, P = _vec(o), _vec(p)
    c = herm(O, P) * (1 / norm(O) if O.backend == sc.EXACT else 1.0 / norm(O))
    return ProjectivePoint(O * (c * 2) - P)


@dataclass(frozen=True)
class RealGeodesic:
    """Geodesic ``pi(V cosh t + W sinh t)`` with unnormalised ``V``, ``W``.

    ``<V,W> = 0``; ``vv = <V,V> < 0`` and ``ww = <W,W> > 0`` are stored so
    that exact frames never need square roots.
    """

    V: HVector
    W: HVector
    vv: object
    ww: object

    def point_at(self, t: float) -> ProjectivePoint:
        V = self.V.to_float() * (1.0 / math.sqrt(-float(self.vv)))
        W = self.W.to_float() * (1.0 / math.sqrt(float(self.ww)))
        return ProjectivePoint(V * math.cosh(t) + W * math.sinh(t))

    def direction_point(self, s) -> ProjectivePoint:
        """Exact point ``pi(V + W s)`` (negative when ``s^2 ww < -vv``)."""
        return ProjectivePoint(self.V + self.W * s)

    def parameter_of(self, q) -> float:
        """Signed parameter ``t`` with ``point_at(t) = q`` for ``q`` on the geodesic."""
        Q = _vec(q).to_float()
        V, W = self.V.to_float(), self.W.to_float()
        a = herm(V, Q) * (1.0 / math.sqrt(-float(self.vv)))
        b = herm(W, Q) * (1.0 / math.sqrt(float(self.ww)))
        # Q ~ V' cosh t + W' sinh t: <V',Q> = -cosh t mu, <W',Q> = sinh t mu
        ratio = (b * a.inverse()).re
        return math.atanh(max(-1.0, min(1.0, -ratio)))


def geodesic_through(p: ProjectivePoint, q: ProjectivePoint) -> RealGeodesic:
    """Real geodesic with ``point_at(0) = p`` and ``q`` at positive parameter."""
    p.require_negative()
    q.require_negative()
    if p == q:
        raise GeometryError("a geodesic needs two distinct points")
    P, Q = p.lift, q.lift
    lam = herm(P, Q)
    Q1 = Q * (-lam.conj())  # now <P, Q1> = -|lam|^2 < 0
    npp = norm(P)
    c = herm(P, Q1) * (1 / npp if P.backend == sc.EXACT else 1.0 / npp)
    W = Q1 - P * c
    return RealGeodesic(P, W, npp, norm(W))


def midpoint(p1: ProjectivePoint, p2: ProjectivePoint) -> ProjectivePoint:
    """Midpoint of the segment ``[p1, p2]``.

    Lifts are scaled so ``<P1,P1> = <P2,P2>`` and ``<P1,P2>`` is real
    negative; the midpoint is ``pi(P1 + P2)``. On rationals the needed real
    factor ``sqrt(<P1,P1>/<P2,P2>)`` must itself be rational.
    """
    p1.require_negative()
    p2.require_negative()
    if p1 == p2:
        raise GeometryError("midpoint of coincident points")
    P1, P2 = p1.lift, p2.lift
    t = herm(P1, P2)
    P2 = P2 * (-t.conj())
    n1, n2 = norm(P1), norm(P2)
    ratio = n1 / n2
    if P1.backend == sc.EXACT:
        if not sc.is_square(ratio):
            raise GeometryError(
                "midpoint is not rational: norm ratio "
                f"{sc.fmt(ratio)} is not a rational square")
        r = sc.exact_sqrt(ratio)
    else:
        r = math.sqrt(ratio)
    return ProjectivePoint(P1 + P2 * r)


# -- totally geodesic submanifolds -------------------------------------------

class TotallyGeodesicSubmanifold:
    """Projectivised negative part of a nondegenerate indefinite tagged subspace."""

    __slots__ = ("subspace",)

    def __init__(self, subspace: Subspace, check: bool = True):
        if check:
            sig = subspace.signature()
            if sig.zero or sig.negative != 1:
                raise GeometryError(
                    f"subspace of signature {tuple(sig)} is not a hyperbolic subspace")
        object.__setattr__(self, "subspace", subspace)

    def __setattr__(self, name, value):
        raise AttributeError("TotallyGeodesicSubmanifold is immutable")

    @property
    def tag(self) -> FieldTag:
        return self.subspace.tag

    @property
    def basis(self) -> tuple:
        return self.subspace.basis

    @property
    def dim(self) -> int:
        """Dimension over the tagged field (``k`` for an ``H^k_F``)."""
        return self.subspace.dim - 1

    @property
    def kind(self) -> str:
        return {"real": "real-plane", "complex": "complex-type",
                "quaternionic": "quaternionic"}[self.tag.kind]

    def contains(self, p) -> bool:
        return contains(self, p)

    def __repr__(self):
        return f"TotallyGeodesicSubmanifold({self.kind}, dim={self.dim}, tag={self.tag!r})"


def quaternionic_span(p1: ProjectivePoint, p2: ProjectivePoint) -> TotallyGeodesicSubmanifold:
    """The quaternionic geodesic through two distinct points."""
    if p1 == p2:
        raise GeometryError("coincident points span no geodesic")
    sub = Subspace((p1.lift, p2.lift), FieldTag.quaternionic())
    return TotallyGeodesicSubmanifold(sub)


def contains(M, p) -> bool:
    """Whether some lift of ``p`` lies in the tagged span of ``M``."""
    sub = M.subspace if isinstance(M, TotallyGeodesicSubmanifold) else M
    try:
        return sub.aligned_lift(_vec(p)) is not None
    except LinAlgError:
        return False


def submanifold(basis: Sequence[HVector], tag: FieldTag) -> TotallyGeodesicSubmanifold:
    from .qlinalg import subfield_span
    return TotallyGeodesicSubmanifold(subfield_span(basis, tag))


def canonical_complex(n: int, a: Quaternion, backend: str = sc.EXACT) -> TotallyGeodesicSubmanifold:
    """The standard ``C(a)``-submanifold spanned by the coordinate vectors."""
    basis = tuple(HVector.basis(n + 1, r, backend) for r in range(n + 1))
    return TotallyGeodesicSubmanifold(Subspace(basis, FieldTag.complex(a)))


def hyperbolic_signature_ok(sub: Subspace) -> bool:
    sig = signature(sub.gram())
    return sig.zero == 0 and sig.negative == 1
