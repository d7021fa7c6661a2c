"""Bisectors, their spines and slice decompositions.

``B(p1, p2)`` is the zero set of the real quadratic form
``f(X) = n2 |<X,P1>|^2 - n1 |<X,P2>|^2`` (``n_i = <P_i,P_i>``), so membership
is a polynomial identity in rational coordinates and never needs a square
root. The quaternionic spine is the right span of ``P1, P2`` and the real
spine is its intersection with the bisector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from . import scalar as sc
from .model import (GeometryError, ProjectivePoint, TotallyGeodesicSubmanifold, delta,
                    quaternionic_span)
from .qlinalg import (FieldTag, HVector, QMatrix, Subspace, form_matrix, gram, herm, norm,
                      orth_complement, orth_project, rank, same_span, signature)
from .quaternion import Quaternion, cayley_unit, quaternion_with_norm2


class BisectorError(GeometryError):
    pass


def _inv(x):
    return 1.0 / x if isinstance(x, float) else 1 / x


def _vec(p) -> HVector:
    return p.lift if isinstance(p, ProjectivePoint) else p


def _outer(u: HVector, v: HVector) -> QMatrix:
    """The matrix ``u v*``."""
    return QMatrix._raw(tuple(tuple(a * b.conj() for b in v.coords) for a in u.coords))


class Bisector:
    """The bisector of two distinct points with normalised lifts.

    ``P2`` is rescaled on the right so that ``<P1,P1> = <P2,P2>`` and
    ``t = <P1,P2>`` is real and negative whenever the needed real factor is
    rational (always on floats). Otherwise ``P2`` is rescaled by a
    quaternion of the right modulus; the norms still agree, which is all the
    spine parametrisation needs, but ``t`` is then not real and
    ``fully_normalized`` is False.
    """

    def __init__(self, p1: ProjectivePoint, p2: ProjectivePoint):
        p1.require_negative()
        p2.require_negative()
        if p1 == p2:
            raise BisectorError("bisector of coincident points")
        P1, P2 = p1.lift, p2.lift
        t = herm(P1, P2)
        if P1.backend == sc.FLOAT:
            P2 = P2 * (-t.conj())
            P2 = P2 * math.sqrt(norm(P1) / norm(P2))
            full = True
        else:
            ratio = norm(P1) / (norm(P2) * t.norm2())
            if sc.is_square(ratio):
                P2 = P2 * (-t.conj() * sc.exact_sqrt(ratio))
                full = True
            else:
                # t stays non-real; only the norms are matched
                P2 = P2 * quaternion_with_norm2(norm(P1) / norm(P2))
                full = False
        self.p1, self.p2 = p1, p2
        self.P1, self.P2 = P1, P2
        self.n = norm(P1)
        self.t = herm(P1, P2)
        self.fully_normalized = full
        self.spine = quaternionic_span(p1, p2)
        self._form = None
        self._complement = None

    @property
    def dim(self) -> int:
        return len(self.P1) - 1

    @property
    def backend(self) -> str:
        return self.P1.backend

    # -- membership ------------------------------------------------------
    def lhs_rhs(self, p) -> tuple:
        P = _vec(p)
        return herm(P, self.P1).norm2(), herm(P, self.P2).norm2()

    def contains(self, p) -> bool:
        P = _vec(p)
        a, b = self.lhs_rhs(P)
        if isinstance(a, float):
            return sc.relative_residual(a, b) <= sc.tolerance()
        return a == b

    def residual(self, p) -> float:
        a, b = self.lhs_rhs(p)
        return sc.relative_residual(a, b)

    def form(self) -> QMatrix:
        """Hermitian ``H`` with ``f(X) = X* H X = |<X,P1>|^2 - |<X,P2>|^2``."""
        if self._form is None:
            J = form_matrix(self.dim + 1, self.backend)
            JP1, JP2 = J @ self.P1, J @ self.P2
            self._form = _outer(JP1, JP1) - _outer(JP2, JP2)
        return self._form

    def quadric(self, X: HVector):
        return _hdot(X, self.form() @ X).re

    def polar(self, X: HVector, Y: HVector):
        """``f(X + Y) - f(X) - f(Y) = 2 Re(X* H Y)``."""
        return 2 * _hdot(X, self.form() @ Y).re

    # -- spines ----------------------------------------------------------
    def real_spine_contains(self, p) -> bool:
        return self.contains(p) and self.spine.contains(p)

    def spine_point(self, mu: Quaternion, nu: Quaternion) -> ProjectivePoint:
        """``pi(P1 mu + P2 nu)`` for ``|mu| = |nu|``; lies on the real spine."""
        if not sc.close(mu.norm2(), nu.norm2()):
            raise BisectorError("spine parametrisation needs |mu| = |nu|")
        X = self.P1 * mu + self.P2 * nu
        p = ProjectivePoint(X) if not X.is_zero(0.0) else None
        if p is None or not p.is_negative:
            raise BisectorError("parameters give a point outside the ball")
        return p

    def center(self) -> ProjectivePoint:
        """Default point of the real spine: the midpoint when lifts are fully normalised.

        Otherwise ``t`` is not real and ``P1 + P2`` may be non-negative; then
        ``nu = -conj t`` and ``mu`` with ``|mu| = |t|``, ``Re mu >= 0`` give
        ``<X,X> = 2|t|^2 (n - Re mu) < 0``.
        """
        one = Quaternion.scalar(1, self.backend)
        if self.fully_normalized:
            return self.spine_point(one, one)
        return self.spine_point(quaternion_with_norm2(self.t.norm2()), -self.t.conj())

    def midpoint(self) -> ProjectivePoint:
        if not self.fully_normalized:
            raise BisectorError("midpoint is not rational for this pair")
        return self.center()

    def project_to_spine(self, p) -> ProjectivePoint:
        return ProjectivePoint(orth_project(self.spine.subspace, _vec(p)))

    def spine_complement(self) -> Subspace | None:
        """Orthogonal complement of the spine; None for n = 1, where the spine is everything."""
        if self.dim == 1:
            return None
        if self._complement is None:
            self._complement = orth_complement(self.spine.subspace)
        return self._complement

    def normal_at(self, o) -> HVector:
        """Vector ``W`` in the spine, orthogonal to ``o``, normal to the real spine at ``o``.

        With ``U`` the projection of ``P1`` off ``O``, tangent vectors of the
        spine at ``o`` are ``U mu``; the form's derivative is
        ``2 Re(conj(mu) g)`` for the quaternion ``g`` below, so ``W = U g``.
        """
        O = _vec(o)
        if not self.real_spine_contains(O):
            raise BisectorError("point is not on the real spine")
        noo = norm(O)
        U = self.P1 - O * (herm(O, self.P1) * _inv(noo))
        g = (herm(U, self.P1) * herm(self.P1, O) - herm(U, self.P2) * herm(self.P2, O))
        if g.is_zero(max(1.0, sc.mag(O.euclid2()))):
            raise BisectorError("degenerate normal direction")
        return (U * g).primitive()

    def symmetric_pair(self, o, step=None) -> tuple[ProjectivePoint, ProjectivePoint]:
        """Points ``pi(O +- W s)`` symmetric about ``o`` on the spine geodesic normal to the real spine."""
        O = _vec(o)
        W = self.normal_at(O)
        noo, nww = norm(O), norm(W)
        if step is None:
            step = _dyadic_step(noo, nww, self.backend)
        return ProjectivePoint(O + W * step), ProjectivePoint(O - W * step)

    def spine_frame(self, o=None) -> tuple[HVector, HVector]:
        """``(O, D)`` with real spine ``{pi(O + D beta) : Re beta = 0}``."""
        o = self.center() if o is None else o
        O = _vec(o)
        return O, self.normal_at(O)

    # -- slices ----------------------------------------------------------
    def slice_at(self, s) -> Slice:
        if not self.real_spine_contains(s):
            raise BisectorError("slice base point is not on the real spine")
        s = s if isinstance(s, ProjectivePoint) else ProjectivePoint(s)
        comp = self.spine_complement()
        basis = (s.lift,) + (tuple(comp.basis) if comp is not None else ())
        return Slice(s, Subspace(basis, FieldTag.quaternionic()))

    def slice_of(self, p) -> Slice:
        if not self.contains(p):
            raise BisectorError("point is not on the bisector")
        return self.slice_at(self.project_to_spine(p))

    def same_as(self, other: Bisector) -> bool:
        return same_bisector(self, other)

    def __repr__(self):
        return f"Bisector({self.p1!r}, {self.p2!r})"


def _hdot(X: HVector, Y: HVector) -> Quaternion:
    """Plain ``X* Y`` (no form)."""
    total = X[0].conj() * Y[0]
    for a, b in zip(X.coords[1:], Y.coords[1:]):
        total = total + a.conj() * b
    return total


def _dyadic_step(noo, nww, backend):
    # largest s = 2^-k with s^2 <W,W> <= -<O,O>/4, keeping O +- W s negative
    if backend == sc.FLOAT:
        return 0.5 * math.sqrt(-noo / nww)
    s = sc.exact(1)
    while s * s * nww > -noo / 4:
        s = s / 2
    return s


def shrink_step(target, ncc, backend):
    """Largest ``2^-k`` (any positive real on floats) with ``s^2 ncc <= target``."""
    if backend == sc.FLOAT:
        return math.sqrt(target / ncc)
    ratio = sc.exact(ncc) / sc.exact(target)
    # jump close to the answer from the bit lengths, then halve the rest
    k = max(0, (int(ratio.numerator).bit_length() - int(ratio.denominator).bit_length()) // 2 - 1)
    step = sc.exact(1) / (1 << k)
    while step * step * ncc > target:
        step = step / 2
    return step


def bisector(p1: ProjectivePoint, p2: ProjectivePoint) -> Bisector:
    return Bisector(p1, p2)


def same_bisector(A: Bisector, B: Bisector) -> bool:
    """Equal point sets: the two quadratic forms are nonzero real multiples."""
    if A.dim != B.dim:
        return False
    HA, HB = A.form(), B.form()
    from .isometry import real_multiple
    c = real_multiple(HA, HB)
    return c is not None and not sc.is_zero(c)


def project_to_spine(B: Bisector, p) -> ProjectivePoint:
    return B.project_to_spine(p)


def hermitian_triple(p, q, r) -> Quaternion:
    """``<P,Q><Q,R><R,P>`` on canonical lifts (last coordinate 1)."""
    P, Q, R = (x.canonical if isinstance(x, ProjectivePoint) else x for x in (p, q, r))
    return herm(P, Q) * herm(Q, R) * herm(R, P)


def real_representatives(p, q, r) -> tuple[HVector, HVector, HVector]:
    """Lifts ``P, Q lam, R mu`` with ``<P,Q>`` and ``<Q,R>`` real.

    ``<R,P>`` is then real exactly when the triple product is.
    """
    P, Q, R = _vec(p), _vec(q), _vec(r)
    a = herm(P, Q)
    if not a.is_zero(0.0):
        Q = Q * a.conj()
    b = herm(Q, R)
    if not b.is_zero(0.0):
        R = R * b.conj()
    return P, Q, R


def is_totally_real_triple(p, q, r) -> bool:
    """The three points lie in a totally real plane: real-Gram lifts exist."""
    lifts = real_representatives(p, q, r)
    G = gram(list(lifts))
    if not all(x.is_real(max(1.0, G.max_abs2() ** 0.5)) for row in G.rows for x in row):
        return False
    return rank(list(lifts)) >= 1


@dataclass(frozen=True)
class Slice:
    """``Pi^-1(s)``: the projectivised span of ``S`` and the spine complement."""

    base: ProjectivePoint
    subspace: Subspace

    @property
    def dim(self) -> int:
        return self.subspace.dim - 1

    def contains(self, p) -> bool:
        return self.subspace.contains_vector(_vec(p))

    def signature(self):
        return signature(self.subspace.gram())


def slices_disjoint(a: Slice, b: Slice) -> bool:
    """Distinct slices meet only in a positive definite subspace, hence not in the ball."""
    A, Bv = list(a.subspace.basis), list(b.subspace.basis)
    total = rank(A + Bv)
    common = len(A) + len(Bv) - total
    if common == len(A):
        return False
    # the shared part is spanned by the common complement vectors
    comp = list(a.subspace.basis[1:])
    if common != len(comp) or not same_span(comp, [v for v in b.subspace.basis[1:]]):
        return False
    sig = signature(gram(comp)) if comp else None
    return sig is None or (sig.negative == 0 and sig.zero == 0)


def bisector_from_real_spine(frame: Sequence[HVector], step=None) -> Bisector:
    """Rebuild a bisector from a real-spine frame ``(O, D)``.

    ``O`` is a negative lift of a spine point and ``D`` a positive vector
    orthogonal to it; the real spine is ``{pi(O + D beta) : Re beta = 0}``.
    The points ``pi(O +- D s)`` are symmetric about ``o`` on the normal
    geodesic, and their bisector has exactly this real spine.
    """
    if len(frame) != 2:
        raise BisectorError("real-spine frame must be (O, D)")
    O, D = frame
    if rank([O, D]) < 2:
        raise BisectorError("degenerate real-spine frame")
    scale = max(1.0, sc.mag(O.euclid2()), sc.mag(D.euclid2()))
    if not herm(O, D).is_zero(scale):
        raise BisectorError("frame vectors are not orthogonal")
    noo, ndd = norm(O), norm(D)
    if not sc.sign(noo, scale) < 0 or not sc.sign(ndd, scale) > 0:
        raise BisectorError("frame needs a negative centre and a positive normal")
    if step is None:
        step = _dyadic_step(noo, ndd, O.backend)
    return Bisector(ProjectivePoint(O + D * step), ProjectivePoint(O - D * step))


def spine_frame_contains(frame: Sequence[HVector], p) -> bool:
    """Membership in ``{pi(O + D beta) : Re beta = 0}`` for a frame ``(O, D)``."""
    O, D = frame
    P = _vec(p)
    mu = Subspace((O, D), FieldTag.quaternionic()).coordinates(P)
    if mu is None or mu[0].is_zero(0.0):
        return False
    beta = mu[1] * mu[0].inverse()
    return beta.is_imaginary(max(1.0, sc.mag(beta.norm2()) ** 0.5))


def pythagoras(p, r, B: Bisector | None = None, spine: TotallyGeodesicSubmanifold | None = None):
    """``(delta(p, r), delta(p, Pi p) * delta(Pi p, r))`` for ``r`` on the spine."""
    sub = (spine or B.spine).subspace
    a = ProjectivePoint(orth_project(sub, _vec(p)))
    return delta(p, r), delta(p, a) * delta(a, r)


@dataclass
class SampleStats:
    """Rejection bookkeeping for samplers."""

    drawn: int = 0
    rejected: int = 0
    notes: list = field(default_factory=list)


def unit_pair(rng, backend: str = sc.EXACT) -> tuple[Quaternion, Quaternion]:
    """Random ``(mu, nu)`` with ``|mu| = |nu|``."""
    from .sampling import random_imaginary, random_quaternion
    mu = random_quaternion(rng, backend, nonzero=True)
    u = cayley_unit(random_imaginary(rng, backend))
    return mu, mu * u


def sample_spine_point(B: Bisector, rng, stats: SampleStats | None = None,
                       max_tries: int = 1000) -> ProjectivePoint:
    for _ in range(max_tries):
        mu, nu = unit_pair(rng, B.backend)
        if stats is not None:
            stats.drawn += 1
        try:
            return B.spine_point(mu, nu)
        except (BisectorError, GeometryError):
            if stats is not None:
                stats.rejected += 1
    raise BisectorError("spine sampler exceeded its rejection bound")


def sample_slice_point(sl: Slice, rng, stats: SampleStats | None = None,
                       max_tries: int = 1000) -> ProjectivePoint:
    """``S + sum C_r beta_r`` with random weights, rejecting non-negative draws.

    Each complement vector is first shrunk by a power of two so that
    ``|beta|^2 <C,C>`` is comparable to ``-<S,S>`` divided by the number of
    complement directions.
    """
    from .sampling import random_quaternion
    S = sl.base.lift
    backend = S.backend
    nss = norm(S)
    comp = sl.subspace.basis[1:]
    if not comp:
        # n = 1: the slice is the single spine point
        return sl.base
    scaled = []
    target = -nss * _inv(2 * len(comp) if backend == sc.EXACT else 2.0 * len(comp))
    for c in comp:
        scaled.append(c * shrink_step(target, norm(c), backend))
    for _ in range(max_tries):
        X = S
        for c in scaled:
            X = X + c * random_quaternion(rng, backend, bound=1)
        if stats is not None:
            stats.drawn += 1
        if sc.sign(norm(X), max(1.0, sc.mag(X.euclid2()))) < 0:
            return ProjectivePoint(X)
        if stats is not None:
            stats.rejected += 1
    raise BisectorError("slice sampler exceeded its rejection bound")


def sample_bisector_point(B: Bisector, rng, stats: SampleStats | None = None,
                          max_tries: int = 1000) -> ProjectivePoint:
    """A point of ``B`` from the second root of ``f`` on a random line through a known point.

    For ``X`` in ``B``, ``f(X + sY) = s (L + s f(Y))`` with ``L`` the polar
    value, so ``s = -L / f(Y)`` is rational. ``X`` is drawn from a random
    slice, ``Y`` uniformly from small rationals.
    """
    from .sampling import random_vector
    backend = B.backend
    for _ in range(max_tries):
        s = sample_spine_point(B, rng, stats)
        X = sample_slice_point(B.slice_at(s), rng, stats).lift
        Y = random_vector(rng, B.dim + 1, backend)
        fy = B.quadric(Y)
        L = B.polar(X, Y)
        scale = max(1.0, sc.mag(X.euclid2()) * sc.mag(Y.euclid2()))
        if stats is not None:
            stats.drawn += 1
        if sc.is_zero(fy, scale) or sc.is_zero(L, scale):
            if stats is not None:
                stats.rejected += 1
            continue
        Z = X + Y * (-L * _inv(fy))
        if not Z.is_zero(0.0) and sc.sign(norm(Z), max(1.0, sc.mag(Z.euclid2()))) < 0:
            return ProjectivePoint(Z)
        if stats is not None:
            stats.rejected += 1
    raise BisectorError("bisector sampler exceeded its rejection bound")
