"""Complex blades and fan decompositions of bisectors.

Pipeline for a centre ``o`` on the real spine:

1. ``p1, p2`` symmetric about ``o`` on the spine geodesic normal to the real
   spine (so the bisector of the pair is the original one);
2. a complex-type submanifold ``M`` of type ``C(a)`` through ``p1, p2`` and a
   selector point;
3. an adapted frame ``O, W, F_2 .. F_n`` of ``M`` with real diagonal Gram,
   and a meridian ``S`` = real span of ``O, W a, F_i u_i`` (``u_i`` unit in
   ``C(a)``);
4. the blade ``N`` = ``C(b)``-span of the meridian frame, ``b`` orthogonal to
   ``a``.

Every frame vector is rational, so each step is exact on the rational
backend.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from . import scalar as sc
from .bisector import Bisector, BisectorError, _dyadic_step, _inv, shrink_step
from .isometry import Isometry, Reflection, maps_onto, reflection_in_complex_type
from .model import GeometryError, ProjectivePoint, TotallyGeodesicSubmanifold
from .qlinalg import (FieldTag, HVector, QMatrix, Subspace, herm, norm, orth_complement,
                      rank, real_rank, subfield_span)
from .quaternion import I, Quaternion, cayley_unit, orthogonal_imaginary


class FanError(GeometryError):
    pass


def _vec(p) -> HVector:
    return p.lift if isinstance(p, ProjectivePoint) else p


# -- complex span of three points ----------------------------------------------

@dataclass(frozen=True)
class ComplexSpan:
    direction: Quaternion
    subspace: Subspace
    lifts: tuple

    @property
    def complex_dim(self) -> int:
        """Complex projective dimension achieved."""
        return self.subspace.dim - 1


def complex_span_3pts(p, q, r) -> ComplexSpan:
    """Complex-type span ``W`` of three points.

    ``Q`` is rescaled to make ``<P,Q>`` real, then ``R`` to make ``<Q,R>``
    real; the imaginary part of ``<R,P>`` fixes the direction ``a`` (``i``
    when every Gram entry is already real). The basis is a greedy
    right-independent subset of the rescaled lifts; a nondegenerate real
    Gram block of the chosen vectors puts any dependent lift in their
    ``C(a)``-span.
    """
    P, Q, R = _vec(p), _vec(q), _vec(r)
    t = herm(P, Q)
    if not t.is_zero(0.0):
        Q = (Q * t.conj()).primitive()
    s = herm(Q, R)
    if not s.is_zero(0.0):
        R = (R * s.conj()).primitive()
    a = herm(R, P).imag
    if a.is_zero():
        a = I.to_backend(P.backend)
    basis: list[HVector] = []
    for v in (P, Q, R):
        if rank(basis + [v]) > len(basis):
            basis.append(v)
    sub = subfield_span(basis, FieldTag.complex(a))
    for v in (P, Q, R):
        if not sub.contains_vector(v):
            raise FanError("complex span does not contain all three points")
    return ComplexSpan(a, sub, (P, Q, R))


def extend_to_maximal(K: Subspace) -> TotallyGeodesicSubmanifold:
    """``C(a)``-submanifold of full dimension containing ``K``.

    The complement of ``K`` gets an orthogonal basis with real diagonal
    Gram, so the enlarged Gram matrix stays in ``C(a)``.
    """
    dim = K.ambient_dim
    basis = list(K.basis)
    if len(basis) < dim:
        basis += list(orth_complement(Subspace(tuple(basis), FieldTag.quaternionic())).basis)
    return TotallyGeodesicSubmanifold(subfield_span(basis, K.tag))


# -- adapted frames and meridians ---------------------------------------------

def _coordinate_ratio(v: HVector, w: HVector) -> Quaternion:
    """``kappa`` with ``w = v kappa`` for right-proportional vectors."""
    r = next(i for i, c in enumerate(v) if not c.is_zero(0.0))
    return v[r].inverse() * w[r]


def _gram_schmidt(start: Sequence[HVector], candidates: Sequence[HVector]) -> list[HVector]:
    """Vectors orthogonal to ``start`` and to each other; coefficients stay in the span's field."""
    out = list(start)
    new = []
    for v in candidates:
        w = v
        for u in out:
            c = herm(u, w)
            if not c.is_zero(0.0 if w.backend == sc.EXACT else 1e-300):
                w = w - u * (c * _inv(norm(u)))
        if not w.is_zero(max(1.0, sc.mag(v.euclid2())) if w.backend == sc.FLOAT else 0.0):
            w = w.primitive()
            out.append(w)
            new.append(w)
    return new


@dataclass(frozen=True)
class AdaptedFrame:
    """Frame ``O, W, F_2 .. F_n`` of a ``C(a)``-submanifold through ``o``.

    ``W`` is tangent to the geodesic through the symmetric pair; the Gram
    matrix is real and diagonal.
    """

    M: TotallyGeodesicSubmanifold
    a: Quaternion
    O: HVector
    W: HVector
    F: tuple
    pair: tuple


def adapted_frame(M: TotallyGeodesicSubmanifold, O: HVector, W: HVector, step) -> AdaptedFrame:
    a = M.tag.direction
    OM = M.subspace.aligned_lift(O)
    if OM is None:
        raise FanError("centre is not in the complex submanifold")
    kappa = _coordinate_ratio(O, OM)
    WM = (W * kappa).primitive()
    mu = M.subspace.coordinates(WM)
    if mu is None or not all(M.tag.contains(c) for c in mu):
        raise FanError("normal geodesic is not in the complex submanifold")
    F = _gram_schmidt([OM, WM], M.basis)
    if len(F) != M.subspace.dim - 2:
        raise FanError("adapted frame has the wrong size")
    pair = (ProjectivePoint(O + W * step), ProjectivePoint(O - W * step))
    return AdaptedFrame(M, a, OM, WM, tuple(F), pair)


def meridian_units(a: Quaternion, params: Sequence) -> list[Quaternion]:
    """Unit quaternions ``(1 + a t)(1 - a t)^-1`` in ``C(a)``."""
    return [cayley_unit(a * sc.to_backend(t, a.backend)) for t in params]


def _real_span(frame: Sequence[HVector]) -> Subspace:
    return subfield_span(list(frame), FieldTag.real())


def default_meridian(fr: AdaptedFrame, params: Sequence | None = None) -> Subspace:
    params = list(params or [])
    params += [0] * (len(fr.F) - len(params))
    units = meridian_units(fr.a, params[:len(fr.F)])
    frame = [fr.O, fr.W * fr.a] + [f * u for f, u in zip(fr.F, units)]
    return _real_span(frame)


def meridian_through(fr: AdaptedFrame, p) -> Subspace:
    """Real form of ``M`` containing its real spine and ``p``.

    ``p`` is written as ``O alpha + W beta + F`` with ``alpha, beta`` in
    ``C(a)``; it lies on the bisector inside ``M`` exactly when
    ``Re(conj(alpha) beta) = 0``. Rescaling by ``conj(alpha)`` leaves a real
    multiple of ``W a`` and a vector ``F'`` orthogonal to ``O, W``; the
    meridian frame is ``O, W a, F'`` completed orthogonally.
    """
    P = fr.M.subspace.aligned_lift(_vec(p))
    if P is None:
        raise FanError("point is not in the complex submanifold")
    noo, nww = norm(fr.O), norm(fr.W)
    alpha = herm(fr.O, P) * _inv(noo)
    beta = herm(fr.W, P) * _inv(nww)
    scale = max(1.0, sc.mag(P.euclid2()))
    if not sc.is_zero((alpha.conj() * beta).re,
                      max(scale, sc.mag(alpha.norm2() * beta.norm2()) ** 0.5)):
        raise FanError("alignment impossible: point is not on the bisector inside M")
    Fp = (P - fr.O * alpha - fr.W * beta) * alpha.conj()
    if Fp.is_zero(scale if Fp.backend == sc.FLOAT else 0.0):
        return default_meridian(fr)
    Fp = Fp.primitive()
    rest = _gram_schmidt([Fp], fr.F)
    frame = [fr.O, fr.W * fr.a, Fp] + rest
    if len(frame) != len(fr.F) + 2:
        raise FanError("meridian frame has the wrong size")
    return _real_span(frame)


# -- blades ---------------------------------------------------------------------

@dataclass(frozen=True)
class Blade:
    """``C(b)``-span ``N`` of a meridian frame ``S`` inside the complex submanifold ``M``."""

    N: TotallyGeodesicSubmanifold
    M: TotallyGeodesicSubmanifold
    S: Subspace
    center: ProjectivePoint
    a: Quaternion
    b: Quaternion
    pair: tuple

    @property
    def frame(self) -> QMatrix:
        return QMatrix.from_columns(list(self.S.basis))

    def reflection_N(self) -> Reflection:
        return reflection_in_complex_type(self.N, self.frame)

    def reflection_M(self) -> Reflection:
        Mframe = TotallyGeodesicSubmanifold(Subspace(self.S.basis, FieldTag.complex(self.a)))
        return reflection_in_complex_type(Mframe, self.frame)

    def contains(self, p) -> bool:
        return self.N.contains(p)

    def sample(self, rng, max_tries: int = 1000) -> ProjectivePoint:
        return sample_blade_point(self, rng, max_tries)


def blade_from(fr_or_M, S: Subspace, center=None, pair=None, b: Quaternion | None = None) -> Blade:
    """Blade orthogonal to ``M`` along the meridian ``S``."""
    M = fr_or_M.M if isinstance(fr_or_M, AdaptedFrame) else fr_or_M
    if S.tag.kind != "real":
        raise FanError("meridian frame must carry a real tag")
    G = S.gram()
    if not all(x.is_real() for row in G.rows for x in row):
        raise FanError("meridian frame Gram is not real")
    a = M.tag.direction
    b = orthogonal_imaginary(a) if b is None else b
    if not sc.is_zero(b.dot(a)) or not b.is_imaginary():
        raise FanError("b must be imaginary and orthogonal to a")
    N = TotallyGeodesicSubmanifold(subfield_span(list(S.basis), FieldTag.complex(b)))
    if center is None:
        center = ProjectivePoint(S.basis[0])
    if pair is None and isinstance(fr_or_M, AdaptedFrame):
        pair = fr_or_M.pair
    return Blade(N, M, S, center, a, b, pair)


def center_frame(B: Bisector, o) -> tuple[HVector, HVector, object]:
    """``(O, W, s)`` with ``pi(O +- W s)`` symmetric about ``o`` on the normal geodesic.

    At the midpoint of a fully normalised bisector this is ``O = P1 + P2``,
    ``W = (P1 - P2)/2``, ``s = 1``, recovering the defining pair.
    """
    o = o if isinstance(o, ProjectivePoint) else ProjectivePoint(o)
    if not B.real_spine_contains(o):
        raise FanError("centre is not on the real spine")
    if B.fully_normalized:
        O = B.P1 + B.P2
        if ProjectivePoint(O) == o:
            half = 0.5 if B.backend == sc.FLOAT else sc.exact("1/2")
            return O, (B.P1 - B.P2) * half, sc.one(B.backend)
    O = o.lift
    W = B.normal_at(O)
    return O, W, _dyadic_step(norm(O), norm(W), B.backend)


def _selector_point(B: Bisector, O: HVector, W: HVector, w, v) -> HVector:
    backend = B.backend
    w = Quaternion.scalar(0, backend) if w is None else w
    X = O + W * w * _dyadic_step(norm(O), norm(W) * max(1, w.norm2()) * 4, backend)
    if B.dim >= 2:
        v = Quaternion.scalar(1, backend) if v is None else v
        C = B.spine_complement().basis[0] * v
        X = X + C * _dyadic_step(norm(X), norm(C) * 4, backend)
    return X


def fan_blade(B: Bisector, o, m_selector: tuple | None = None,
              meridian_selector: Sequence | None = None,
              b: Quaternion | None = None) -> Blade:
    """Blade through ``o`` chosen by an ``M``-selector ``(w, v)`` and meridian parameters.

    The selector point is ``O + W w s + C_1 v s'`` (``C_1`` a spine-complement
    vector, small dyadic ``s, s'``); an imaginary ``w`` makes ``a`` parallel
    to ``w``. Meridian parameters ``t_i`` give the units
    ``(1 + a t_i)(1 - a t_i)^-1`` applied to the frame vectors ``F_i``.
    """
    O, W, step = center_frame(B, o)
    w, v = m_selector if m_selector is not None else (None, None)
    r = _selector_point(B, O, W, w, v)
    P1, P2 = O + W * step, O - W * step
    K = complex_span_3pts(P1, P2, r)
    M = extend_to_maximal(K.subspace)
    fr = adapted_frame(M, O, W, step)
    S = default_meridian(fr, meridian_selector)
    center = o if isinstance(o, ProjectivePoint) else ProjectivePoint(o)
    return blade_from(fr, S, center=center, pair=fr.pair, b=b)


def blade_containing(B: Bisector, o, p) -> Blade:
    """A blade through ``o`` and ``p`` inside ``B``."""
    if not B.contains(p):
        raise FanError("point is not on the bisector")
    o = o if isinstance(o, ProjectivePoint) else ProjectivePoint(o)
    O, W, step = center_frame(B, o)
    P = _vec(p)
    if B.spine.contains(P):
        # p = pi(O + W beta) with Re beta = 0; a parallel to beta puts p on sigma_M
        mu = Subspace((O, W), FieldTag.quaternionic()).coordinates(P)
        beta = (mu[1] * mu[0].inverse()).imag
        if beta.is_zero():
            return fan_blade(B, o)
        blade = fan_blade(B, o, m_selector=(beta, None))
    else:
        K = complex_span_3pts(P, O + W * step, O - W * step)
        M = extend_to_maximal(K.subspace)
        fr = adapted_frame(M, O, W, step)
        S = meridian_through(fr, P)
        blade = blade_from(fr, S, center=o, pair=fr.pair)
    if not blade.contains(P) or not blade.contains(o):
        raise FanError("constructed blade misses the point")
    return blade


# -- exact certificates and tangent-space tests --------------------------------------

def blade_in_bisector(blade: Blade, B: Bisector) -> bool:
    """Exact proof that ``N`` lies in ``B``: the quadric vanishes on a real spanning set.

    ``f`` restricted to the real span of the generators is a quadratic form,
    so it vanishes identically iff ``f(g_i)`` and the polar values
    ``2 Re(g_i* H g_j)`` all vanish.
    """
    gens = blade.N.subspace.real_spanning_set()
    H = B.form()
    Hg = [H @ g for g in gens]
    for i, g in enumerate(gens):
        for j in range(i, len(gens)):
            val = _re_hdot(g, Hg[j])
            if not sc.is_zero(val, max(1.0, sc.mag(g.euclid2()) * sc.mag(gens[j].euclid2()))):
                return False
    return True


def _re_hdot(X: HVector, Y: HVector):
    """``Re(X* Y)``; ``Re(conj(x) y)`` is the coefficient dot product."""
    return sum((a.dot(b) for a, b in zip(X.coords[1:], Y.coords[1:])), X[0].dot(Y[0]))


def tangent_generators(sub: Subspace, O: HVector) -> list[list]:
    """Real coordinates of ``T_o`` of the projectivised tagged span, as vectors orthogonal to ``O``.

    A curve ``pi(O kappa + X s)`` has tangent ``proj(X) kappa^-1``, where
    ``O kappa`` is the lift of ``o`` inside the span.
    """
    OM = sub.aligned_lift(O)
    if OM is None:
        raise FanError("base point is not in the submanifold")
    kinv = _coordinate_ratio(O, OM).inverse()
    noo = norm(O)
    rows = []
    for g in sub.real_spanning_set():
        X = g - O * (herm(O, g) * _inv(noo))
        rows.append((X * kinv).real_coords())
    return rows


def tangent_dim(sub: Subspace, O: HVector) -> int:
    return real_rank(tangent_generators(sub, O))


def intersection_dim(A: Subspace, B: Subspace, O: HVector) -> int:
    """Real dimension of ``T_o A`` intersected with ``T_o B``.

    Both submanifolds are totally geodesic through ``o``, so their
    intersection is the image of this subspace under the exponential map.
    """
    ta, tb = tangent_generators(A, O), tangent_generators(B, O)
    return real_rank(ta) + real_rank(tb) - real_rank(ta + tb)


def intersection_is(A: Subspace, B: Subspace, S: Subspace, O: HVector) -> bool:
    """``A`` meets ``B`` exactly in ``S`` (as submanifolds through ``o``)."""
    ta, tb, ts = (tangent_generators(X, O) for X in (A, B, S))
    rs = real_rank(ts)
    return (intersection_dim(A, B, O) == rs and real_rank(ta + ts) == real_rank(ta)
            and real_rank(tb + ts) == real_rank(tb))


def orthogonal_along(blade: Blade) -> bool:
    """``M`` and ``N`` are orthogonal along ``S``: ``Re <f a, g b> = 0`` for meridian vectors."""
    fs = blade.S.basis[1:]
    for f in fs:
        for g in fs:
            if not sc.is_zero(herm(f * blade.a, g * blade.b).re):
                return False
    return True


@dataclass(frozen=True)
class PairReport:
    symplectic: bool
    involutions: bool
    commute: bool
    mutual_invariance: bool
    intersection: bool
    orthogonal: bool

    @property
    def ok(self) -> bool:
        return all((self.symplectic, self.involutions, self.commute, self.mutual_invariance,
                    self.intersection, self.orthogonal))


def check_orthogonal_pair(blade: Blade) -> PairReport:
    """The equivalent conditions for the pair ``(M, N)`` of a blade."""
    IM, IN = blade.reflection_M(), blade.reflection_N()
    gM, gN = IM.isometry, IN.isometry
    symplectic = gM.verify_projective() and gN.verify_projective()
    involutions = gM.is_involution() and gN.is_involution()
    commute = gM.commutes_mod_center(gN)
    invariance = maps_onto(gM, blade.N, blade.N) and maps_onto(gN, blade.M, blade.M)
    inter = intersection_is(blade.M.subspace, blade.N.subspace, blade.S, blade.S.basis[0])
    return PairReport(symplectic, involutions, commute, invariance, inter,
                      orthogonal_along(blade))


def _sampling_frame(blade: Blade) -> tuple:
    """Centre lift and frame vectors shrunk so random combinations stay negative."""
    cached = blade.__dict__.get("_sampling_frame")
    if cached is not None:
        return cached
    frame = blade.S.basis
    O = frame[0]
    backend = O.backend
    m = max(len(frame) - 1, 1)
    target = -norm(O) * _inv(sc.to_backend(2 * m, backend) * (1 + blade.b.norm2()))
    scaled = [f * shrink_step(target, norm(f), backend) for f in frame[1:]]
    object.__setattr__(blade, "_sampling_frame", (O, scaled))
    return O, scaled


def sample_blade_point(blade: Blade, rng, max_tries: int = 1000) -> ProjectivePoint:
    """Negative point ``O + sum f_r beta_r`` with ``beta_r`` in ``C(b)``."""
    from .sampling import random_scalar
    O, scaled = _sampling_frame(blade)
    backend = O.backend
    b = blade.b
    for _ in range(max_tries):
        X = O * (Quaternion.scalar(1, backend) + b * random_scalar(rng, backend, bound=2))
        for f in scaled:
            beta = Quaternion.scalar(random_scalar(rng, backend, bound=1), backend) \
                + b * random_scalar(rng, backend, bound=1)
            X = X + f * beta
        if sc.sign(norm(X), max(1.0, sc.mag(X.euclid2()))) < 0:
            return ProjectivePoint(X)
    raise FanError("blade sampler exceeded its rejection bound")


# -- decompositions ----------------------------------------------------------------

@dataclass
class FanDecomposition:
    """Blades of ``B`` through the centre ``o``."""

    parent: Bisector
    center: ProjectivePoint

    def __post_init__(self):
        if not self.parent.real_spine_contains(self.center):
            raise FanError("fan centre must lie on the real spine")

    def blade(self, m_selector=None, meridian_selector=None) -> Blade:
        return fan_blade(self.parent, self.center, m_selector, meridian_selector)

    def blades(self, selectors: Sequence) -> Iterator[Blade]:
        for sel in selectors:
            yield self.blade(*sel)

    def blade_containing(self, p) -> Blade:
        return blade_containing(self.parent, self.center, p)


def distinct_decompositions(A: FanDecomposition, Bd: FanDecomposition, witness: Blade) -> bool:
    """``witness`` (a blade of ``A``) is not a blade of ``Bd``.

    Every blade of ``Bd`` passes through its centre, so a blade of ``A``
    missing that centre proves the decompositions differ.
    """
    return witness.contains(A.center) and not witness.contains(Bd.center)


def starlike_points(B: Bisector, o, p, m: int) -> list[ProjectivePoint]:
    """Exact points ``pi(O x + P' (1 - x))``, ``x`` in ``[0, 1]``, on the segment ``[o, p]``.

    ``P'`` is rescaled so ``<O, P'>`` is real; real combinations of the two
    lifts then sweep the geodesic segment.
    """
    O, P = _vec(o), _vec(p)
    P = P * herm(O, P).conj() * (-1)
    out = []
    for k in range(m):
        x = sc.to_backend(f"{k}/{max(m - 1, 1)}", O.backend)
        out.append(ProjectivePoint(O * (1 - x) + P * x))
    return out


@dataclass(frozen=True)
class StarlikeReport:
    exact: bool
    residuals: tuple
    blade_ok: bool

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def starlike_check(B: Bisector, o, p, m: int = 20) -> StarlikeReport:
    """Segment ``[o, p]`` inside ``B``: blade certificate plus pointwise residuals.

    On rationals the blade route is exact: the blade through ``o, p`` is
    totally geodesic, contains the segment, and lies in ``B`` by
    ``blade_in_bisector``. Residuals are measured on ``m`` float points of
    the arc-length parametrisation.
    """
    from .model import geodesic_through
    o = o if isinstance(o, ProjectivePoint) else ProjectivePoint(o)
    p = p if isinstance(p, ProjectivePoint) else ProjectivePoint(p)
    if not B.real_spine_contains(o):
        raise FanError("centre is not on the real spine")
    if o == p:
        return StarlikeReport(True, (0.0,) * m, True)
    blade_ok = False
    if B.contains(p):
        blade = blade_containing(B, o, p)
        blade_ok = blade_in_bisector(blade, B) and blade.contains(o) and blade.contains(p)
    exact_pts = starlike_points(B, o, p, m)
    exact = blade_ok and all(B.contains(x) for x in exact_pts)
    of, pf = o.to_float(), p.to_float()
    Bf = B if B.backend == sc.FLOAT else Bisector(B.p1.to_float(), B.p2.to_float())
    g = geodesic_through(of, pf)
    t1 = g.parameter_of(pf)
    res = []
    for k in range(m):
        res.append(Bf.residual(g.point_at(t1 * k / max(m - 1, 1))))
    return StarlikeReport(exact, tuple(res), blade_ok)


__all__ = [
    "AdaptedFrame", "Blade", "BisectorError", "ComplexSpan", "FanDecomposition", "FanError",
    "Isometry", "PairReport", "StarlikeReport", "adapted_frame", "blade_containing",
    "blade_from", "blade_in_bisector", "center_frame", "check_orthogonal_pair",
    "complex_span_3pts", "default_meridian", "distinct_decompositions", "extend_to_maximal",
    "fan_blade", "intersection_dim", "intersection_is", "meridian_through", "meridian_units",
    "orthogonal_along", "sample_blade_point", "starlike_check", "starlike_points",
    "tangent_dim", "tangent_generators",
]
