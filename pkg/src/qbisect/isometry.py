"""Isometries of quaternionic hyperbolic space as matrices in Sp(n,1).

A matrix ``g`` acts by ``v -> g v``; it preserves the form when
``g* J g = J``. Projectively ``g`` and ``-g`` agree, and positive real
multiples act identically too, so involution and commutation tests are
taken modulo real scalars.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import scalar as sc
from .model import GeometryError, ProjectivePoint, TotallyGeodesicSubmanifold
from .qlinalg import (FieldTag, HVector, LinAlgError, QMatrix, Subspace, form_matrix, gram,
                      norm, orth_complement, orth_project, orthogonalize, rank)
from .quaternion import Quaternion, quaternion_with_norm2


class IsometryError(ValueError):
    pass


def _scale(m: QMatrix) -> float:
    return max(1.0, m.max_abs2())


def real_multiple(m: QMatrix, ref: QMatrix, scale: float | None = None):
    """The real ``c`` with ``m = c ref``, or None; ``scale`` defaults to the size of ``m``."""
    r, s = next(((r, s) for r in range(ref.shape[0]) for s in range(ref.shape[1])
                 if not ref[r, s].is_zero(0.0)), (None, None))
    if r is None:
        return None
    scale = _scale(m) if scale is None else scale
    c = (m[r, s] * ref[r, s].inverse())
    if not c.is_real(scale):
        return None
    c = c.re
    return c if m.close(ref * c, scale) else None


class Isometry:
    """A quaternionic matrix; ``verify`` checks ``g* J g = J``."""

    __slots__ = ("matrix", "_factor")

    def __init__(self, matrix: QMatrix):
        m, n = matrix.shape
        if m != n:
            raise IsometryError("isometry matrix must be square")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "_factor", False)

    def __setattr__(self, name, value):
        raise AttributeError("Isometry is immutable")

    @classmethod
    def identity(cls, dim: int, backend: str = sc.EXACT) -> Isometry:
        return cls(QMatrix.identity(dim, backend))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def form_image(self) -> QMatrix:
        J = form_matrix(self.dim, self.matrix.backend)
        return self.matrix.H @ J @ self.matrix

    def verify(self) -> bool:
        J = form_matrix(self.dim, self.matrix.backend)
        return self.form_image().close(J, _scale(self.matrix))

    def similitude_factor(self):
        """Positive real ``c`` with ``g* J g = c J``, or None (cached)."""
        if self._factor is not False:
            return self._factor
        # rounding in g* J g grows with the squared entry size of g
        c = real_multiple(self.form_image(), form_matrix(self.dim, self.matrix.backend),
                          _scale(self.matrix))
        if c is None or not c > 0:
            c = None
        object.__setattr__(self, "_factor", c)
        return c

    def verify_projective(self) -> bool:
        """``g`` is a positive real multiple of a form-preserving matrix."""
        return self.similitude_factor() is not None

    def apply(self, p):
        if not self.verify_projective():
            raise IsometryError("matrix does not preserve the Hermitian form")
        return self.act(p)

    def act(self, p):
        """Unchecked action on a point or lift."""
        if isinstance(p, ProjectivePoint):
            return ProjectivePoint(self.matrix @ p.lift)
        return self.matrix @ p

    def __matmul__(self, other: Isometry) -> Isometry:
        return Isometry(self.matrix @ other.matrix)

    def inverse(self) -> Isometry:
        """Exact inverse ``J g* J`` for verified isometries, else elimination."""
        J = form_matrix(self.dim, self.matrix.backend)
        c = self.similitude_factor()
        if c is None:
            return Isometry(self.matrix.inverse())
        inv = J @ self.matrix.H @ J
        return Isometry(inv * (1 / c if not isinstance(c, float) else 1.0 / c))

    def is_involution(self) -> bool:
        """``g^2`` is a nonzero real scalar matrix (projective involution)."""
        sq = self.matrix @ self.matrix
        scale = max(_scale(sq), _scale(self.matrix))
        c = real_multiple(sq, QMatrix.identity(self.dim, self.matrix.backend), scale)
        return c is not None and not sc.is_zero(c, scale)

    def commutes_mod_center(self, other: Isometry) -> bool:
        ab = self.matrix @ other.matrix
        ba = other.matrix @ self.matrix
        s = _scale(ab)
        return ab.close(ba, s) or ab.close(-ba, s)

    def projectively_equal(self, other: Isometry, scale: float | None = None) -> bool:
        """Equal up to a nonzero real factor; ``scale`` sizes the float tolerance."""
        scale = _scale(self.matrix) if scale is None else scale
        c = real_multiple(self.matrix, other.matrix, scale)
        return c is not None and not sc.is_zero(c, scale)

    def __repr__(self):
        return f"Isometry({self.matrix!r})"

    def to_json(self) -> list:
        return self.matrix.to_json()


def verify(g) -> bool:
    return (g if isinstance(g, Isometry) else Isometry(g)).verify()


def apply(g: Isometry, p):
    return g.apply(p)


@dataclass(frozen=True)
class Reflection:
    isometry: Isometry
    fixed: TotallyGeodesicSubmanifold

    @property
    def matrix(self) -> QMatrix:
        return self.isometry.matrix

    def apply(self, p):
        return self.isometry.act(p)

    def fixes(self, p: ProjectivePoint) -> bool:
        return self.isometry.act(p) == p


def left_mult(a: Quaternion, dim: int) -> Isometry:
    """``v -> a v`` for a unit quaternion ``a``."""
    if not sc.close(a.norm2(), sc.one(a.backend)):
        raise IsometryError(f"left multiplication needs |a| = 1, got |a|^2 = {a.norm2()}")
    return Isometry(QMatrix.scalar_matrix(a, dim))


def fixes_point(g: Isometry, p: ProjectivePoint) -> bool:
    return g.act(p) == p


def reflection_in_quaternionic(W) -> Reflection:
    """``v_W + v_perp -> v_W - v_perp`` for a nondegenerate quaternionic subspace."""
    sub = W.subspace if isinstance(W, TotallyGeodesicSubmanifold) else W
    dim = sub.ambient_dim
    cols = []
    for c in range(dim):
        e = HVector.basis(dim, c, sub.backend)
        cols.append(orth_project(sub, e) * 2 - e)
    fixed = W if isinstance(W, TotallyGeodesicSubmanifold) \
        else TotallyGeodesicSubmanifold(Subspace(sub.basis, FieldTag.quaternionic()))
    return Reflection(Isometry(QMatrix.from_columns(cols)), fixed)


def _frame_matrix(frame) -> QMatrix:
    if isinstance(frame, Isometry):
        return frame.matrix
    if isinstance(frame, QMatrix):
        return frame
    return QMatrix.from_columns(list(frame))


def reflection_in_complex_type(N: TotallyGeodesicSubmanifold, frame) -> Reflection:
    """Reflection ``S (a E) S^-1`` in the ``C(a)``-submanifold ``N``.

    ``frame`` is a full frame ``S`` (matrix, isometry or column list) with a
    real nondegenerate Gram matrix whose ``C(a)``-span is ``N``; a symplectic
    ``h`` with ``N = h(standard C(a)-submanifold)`` is the special case with
    Gram ``J``. For non-unit ``a`` the result preserves the form up to the
    factor ``|a|^2``.
    """
    if N.tag.kind != "complex":
        raise IsometryError("reflection_in_complex_type needs a complex-type submanifold")
    S = _frame_matrix(frame)
    G = S.H @ form_matrix(S.shape[0], S.backend) @ S
    scale = _scale(G)
    if not all(x.is_real(scale) for row in G.rows for x in row):
        raise IsometryError("frame Gram matrix is not real")
    a = N.tag.direction.to_backend(S.backend)
    # S^-1 = G^-1 S* J; G is real (usually diagonal), so this avoids eliminating on S
    Sinv = G.inverse() @ S.H @ form_matrix(S.shape[0], S.backend)
    g = S @ QMatrix.scalar_matrix(a, S.shape[0]) @ Sinv
    iso = Isometry(g)
    for b in N.basis:
        if not fixes_point(iso, ProjectivePoint(b)):
            raise IsometryError("frame does not match the submanifold: basis point moved")
    return Reflection(iso, N)


def _matched_complement(B: Sequence[HVector]) -> list[HVector]:
    dim = len(B[0])
    if len(B) == dim:
        return []
    return orthogonalize(orth_complement(Subspace(tuple(B), FieldTag.quaternionic())).basis)


def frame_transport(B1: Sequence[HVector], B2: Sequence[HVector]) -> Isometry:
    """Isometry ``g`` with ``g B1[r] = B2[r]`` for frames with equal Gram matrices.

    Both frames are completed by orthogonal complements; complement vectors
    are paired by sign and the second ones rescaled by quaternions of the
    right modulus (four squares), so the construction stays exact.
    """
    B1, B2 = list(B1), list(B2)
    if len(B1) != len(B2) or not B1:
        raise IsometryError("frames must be nonempty and of equal length")
    G1, G2 = gram(B1), gram(B2)
    if not G1.close(G2, _scale(G1)):
        raise IsometryError("Gram mismatch between frames")
    if rank(B1) < len(B1):
        raise IsometryError("frame is not right-linearly independent")
    try:
        C1, C2 = _matched_complement(B1), _matched_complement(B2)
    except LinAlgError as exc:
        raise IsometryError(f"frame spans a degenerate subspace: {exc}") from exc
    n1 = [norm(c) for c in C1]
    n2 = [norm(c) for c in C2]
    pos2 = [i for i, v in enumerate(n2) if v > 0]
    neg2 = [i for i, v in enumerate(n2) if v < 0]
    matched = []
    for v in n1:
        pool = pos2 if v > 0 else neg2
        if not pool:
            raise IsometryError("complements have different signatures")
        i = pool.pop(0)
        c = C2[i]
        ratio = v / n2[i]
        if isinstance(ratio, float):
            lam = Quaternion(ratio ** 0.5)
        elif sc.is_square(ratio):
            lam = Quaternion(sc.exact_sqrt(ratio))
        else:
            lam = quaternion_with_norm2(ratio)
        matched.append(c * lam)
    F1 = QMatrix.from_columns(B1 + list(C1))
    F2 = QMatrix.from_columns(B2 + matched)
    # F1^-1 = G^-1 F1* J with G block diagonal; better conditioned than elimination on F1
    J = form_matrix(len(B1[0]), F1.backend)
    G = gram(B1 + list(C1))
    return Isometry(F2 @ (G.inverse() @ F1.H @ J))


# -- stabilizer block forms ----------------------------------------------------

def standard_coordinates(M: TotallyGeodesicSubmanifold) -> list[int]:
    """Coordinate indices spanned by ``M`` when its basis is coordinate vectors."""
    idx = []
    for b in M.basis:
        nz = [r for r, c in enumerate(b) if not c.is_zero(0.0)]
        if len(nz) != 1 or not b[nz[0]].is_real() or not b[nz[0]].re > 0:
            raise IsometryError("submanifold is not in standard position")
        idx.append(nz[0])
    dim = len(M.basis[0])
    if dim - 1 not in idx:
        raise IsometryError("standard position needs the negative coordinate in the block")
    return sorted(idx)


def _block(g: QMatrix, rows: list[int], cols: list[int]) -> list[list[Quaternion]]:
    return [[g[r, c] for c in cols] for r in rows]


def _normalizes(lam: Quaternion, tag: FieldTag) -> bool:
    inv = lam.inverse()
    return all(tag.contains(lam * f * inv) for f in tag.generators(lam.backend))


def stabilizer_block_check(g: Isometry, M: TotallyGeodesicSubmanifold,
                           real_spine: bool = False) -> bool:
    """Block form of an element of the stabiliser of ``M`` in standard position.

    ``g = [[A lam, 0], [0, B]]`` with ``A`` in ``U(m,1;F)``, ``lam``
    normalising ``F`` and ``B`` unitary. With ``real_spine`` the 2x2 block
    of a quaternionic line additionally has the shape
    ``[[a, b], [-eps b, eps a]]`` with ``eps = +-1``.
    """
    idx = standard_coordinates(M)
    dim = g.dim
    rest = [r for r in range(dim) if r not in idx]
    m = g.matrix
    scale = _scale(m)
    if not g.verify():
        return False
    for r in idx:
        for c in rest:
            if not m[r, c].is_zero(scale) or not m[c, r].is_zero(scale):
                return False
    X = _block(m, idx, idx)
    x0 = next((x for row in X for x in row if not x.is_zero(scale)), None)
    if x0 is None:
        return False
    tag = M.tag
    if tag.kind != "quaternionic":
        inv = x0.inverse()
        if not all(tag.contains(x * inv, scale) for row in X for x in row):
            return False
        if not _normalizes(x0, tag):
            return False
    if rest:
        Bm = QMatrix(_block(m, rest, rest))
        if not (Bm.H @ Bm).close(QMatrix.identity(len(rest), m.backend), scale):
            return False
    if real_spine:
        if len(idx) != 2:
            raise IsometryError("real-spine form applies to a quaternionic line")
        (a, b), (c, d) = X
        shapes = [(c.close(-b, scale) and d.close(a, scale)),
                  (c.close(b, scale) and d.close(-a, scale))]
        if not any(shapes):
            return False
    return True


def maps_onto(g: Isometry, M: TotallyGeodesicSubmanifold, N: TotallyGeodesicSubmanifold) -> bool:
    """Whether ``g`` carries the projectivised ``M`` onto ``N``.

    ``g(V_M) = V_N lam`` is tested by fixing ``lam`` from the first basis
    vector and checking every real generator of ``g(V_M) lam^-1`` lies in
    ``V_N``; equal real dimensions make containment equality.
    """
    if M.subspace.dim != N.subspace.dim or M.tag.real_dim != N.tag.real_dim:
        return False
    first = g.act(M.basis[0])
    mu = N.subspace.coordinates(first)
    if mu is None:
        return False
    if N.subspace.aligned_lift(first) is None:
        return False
    # first = (aligned vector) * s for any nonzero coordinate s; the largest is safest in floats
    s = max(mu, key=lambda c: c.norm2())
    lam_inv = s.inverse()
    for v in M.subspace.real_spanning_set():
        w = g.act(v) * lam_inv
        coords = N.subspace.coordinates(w)
        if coords is None or not all(N.tag.contains(c) for c in coords):
            return False
    return True


__all__ = [
    "Isometry", "IsometryError", "Reflection", "GeometryError", "apply", "fixes_point",
    "frame_transport", "left_mult", "maps_onto", "real_multiple",
    "reflection_in_complex_type", "reflection_in_quaternionic", "stabilizer_block_check",
    "standard_coordinates", "verify",
]
