"""Right-module linear algebra over the quaternions.

Vectors are columns; scalars act on the right (``v * lam``) and matrices act
on the left. Every elimination here left-multiplies rows, which keeps the
solution set of ``A x = c`` intact over a noncommutative field.

The Hermitian form has signature ``(n, 1)``::

    <v, w> = conj(v_1) w_1 + ... + conj(v_n) w_n - conj(v_{n+1}) w_{n+1}
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpq

from . import scalar as sc
from .quaternion import Quaternion, in_subfield


class LinAlgError(ValueError):
    pass


class DimensionError(LinAlgError):
    pass


class RankDeficiencyError(LinAlgError):
    def __init__(self, message: str, rank: int):
        super().__init__(f"{message} (echelon rank {rank})")
        self.rank = rank


class DegenerateSubspaceError(LinAlgError):
    pass


class NotAlignedError(LinAlgError):
    """Gram entries of the given representatives leave the tagged subfield."""


class HVector:
    """Coordinate vector in Q^{n,1}; immutable, right-scaled by ``v * lam``."""

    __slots__ = ("coords",)

    def __init__(self, coords: Iterable):
        cs = tuple(c if isinstance(c, Quaternion) else Quaternion.scalar(c) for c in coords)
        if not cs:
            raise DimensionError("empty vector")
        object.__setattr__(self, "coords", cs)

    def __setattr__(self, name, value):
        raise AttributeError("HVector is immutable")

    @classmethod
    def _raw(cls, coords: tuple) -> HVector:
        v = object.__new__(cls)
        object.__setattr__(v, "coords", coords)
        return v

    @classmethod
    def basis(cls, dim: int, index: int, backend: str = sc.EXACT) -> HVector:
        z, o = Quaternion.scalar(0, backend), Quaternion.scalar(1, backend)
        return cls._raw(tuple(o if r == index else z for r in range(dim)))

    @classmethod
    def zeros(cls, dim: int, backend: str = sc.EXACT) -> HVector:
        return cls._raw((Quaternion.scalar(0, backend),) * dim)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def backend(self) -> str:
        return self.coords[0].backend

    def __add__(self, other: HVector) -> HVector:
        _check_dim(self, other)
        return HVector._raw(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: HVector) -> HVector:
        _check_dim(self, other)
        return HVector._raw(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> HVector:
        return HVector._raw(tuple(-a for a in self.coords))

    def __mul__(self, lam) -> HVector:
        """Right scalar multiplication."""
        return HVector._raw(tuple(a * lam for a in self.coords))

    def lmul(self, lam: Quaternion) -> HVector:
        """Left multiplication ``lam v`` (not a module operation)."""
        return HVector._raw(tuple(lam * a for a in self.coords))

    def __eq__(self, other):
        if not isinstance(other, HVector):
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def primitive(self) -> HVector:
        """Positive rational multiple with coprime integer coefficients (unit length for floats).

        Positive real rescaling changes neither the point nor any alignment
        of a frame, and it keeps exact coefficient sizes in check.
        """
        if self.backend == sc.FLOAT:
            # unit Euclidean length keeps Gram entries comparable with the tolerance
            size = self.euclid2() ** 0.5
            return self * (1.0 / size) if size > 0 else self
        coeffs = [c for q in self.coords for c in q.coeffs if c != 0]
        if not coeffs:
            return self
        den = 1
        for c in coeffs:
            den = gmpy2.lcm(den, c.denominator)
        g = 0
        for c in coeffs:
            g = gmpy2.gcd(g, c.numerator * (den // c.denominator))
        return self * mpq(den, g)

    def close(self, other: HVector, scale: float = 1.0) -> bool:
        return len(self) == len(other) and all(
            a.close(b, scale) for a, b in zip(self.coords, other.coords))

    def is_zero(self, scale: float = 1.0) -> bool:
        return all(c.is_zero(scale) for c in self.coords)

    def euclid2(self):
        """Sum of squared coordinate moduli (positive definite)."""
        total = self.coords[0].norm2()
        for c in self.coords[1:]:
            total = total + c.norm2()
        return total

    def to_float(self) -> HVector:
        return HVector._raw(tuple(c.to_float() for c in self.coords))

    def to_backend(self, backend: str) -> HVector:
        return HVector._raw(tuple(c.to_backend(backend) for c in self.coords))

    def real_coords(self) -> list:
        """The 4(n+1) real coordinates."""
        out = []
        for c in self.coords:
            out.extend(c.coeffs)
        return out

    def __repr__(self):
        return f"HVector({', '.join(str(c) for c in self.coords)})"

    def to_json(self) -> list:
        return [c.to_json() for c in self.coords]

    @classmethod
    def from_json(cls, data, backend: str = sc.EXACT) -> HVector:
        return cls(Quaternion.from_json(c, backend) for c in data)


def _check_dim(v: HVector, w: HVector) -> None:
    if len(v) != len(w):
        raise DimensionError(f"dimension mismatch: {len(v)} vs {len(w)}")


def vec(*coords) -> HVector:
    return HVector(coords)


class SignClass(enum.Enum):
    NEGATIVE = "negative"
    NULL = "null"
    POSITIVE = "positive"


def herm(v: HVector, w: HVector) -> Quaternion:
    _check_dim(v, w)
    cv, cw = v.coords, w.coords
    total = cv[0].conj() * cw[0]
    for a, b in zip(cv[1:-1], cw[1:-1]):
        total = total + a.conj() * b
    if len(cv) > 1:
        total = total - cv[-1].conj() * cw[-1]
    return total


def norm(v: HVector):
    """The real scalar <v, v>."""
    cs = v.coords
    total = cs[0].norm2()
    for a in cs[1:-1]:
        total = total + a.norm2()
    if len(cs) > 1:
        total = total - cs[-1].norm2()
    return total


def classify(v: HVector) -> SignClass:
    if v.is_zero(0.0):
        raise LinAlgError("cannot classify the zero vector")
    s = sc.sign(norm(v), sc.mag(v.euclid2()))
    if s < 0:
        return SignClass.NEGATIVE
    if s > 0:
        return SignClass.POSITIVE
    return SignClass.NULL


# -- matrices ---------------------------------------------------------------

class QMatrix:
    """Immutable quaternion matrix stored as a tuple of rows."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        rs = tuple(tuple(c if isinstance(c, Quaternion) else Quaternion.scalar(c) for c in r)
                   for r in rows)
        if not rs or any(len(r) != len(rs[0]) for r in rs):
            raise DimensionError("ragged or empty matrix")
        object.__setattr__(self, "rows", rs)

    def __setattr__(self, name, value):
        raise AttributeError("QMatrix is immutable")

    @classmethod
    def _raw(cls, rows: tuple) -> QMatrix:
        m = object.__new__(cls)
        object.__setattr__(m, "rows", rows)
        return m

    @classmethod
    def identity(cls, dim: int, backend: str = sc.EXACT) -> QMatrix:
        return cls._raw(tuple(HVector.basis(dim, r, backend).coords for r in range(dim)))

    @classmethod
    def diag(cls, entries: Sequence) -> QMatrix:
        es = [e if isinstance(e, Quaternion) else Quaternion.scalar(e) for e in entries]
        z = Quaternion.scalar(0, es[0].backend)
        return cls._raw(tuple(tuple(es[r] if r == c else z for c in range(len(es)))
                              for r in range(len(es))))

    @classmethod
    def from_columns(cls, cols: Sequence[HVector]) -> QMatrix:
        if not cols:
            raise DimensionError("no columns")
        return cls._raw(tuple(tuple(col[r] for col in cols) for r in range(len(cols[0]))))

    @classmethod
    def scalar_matrix(cls, lam: Quaternion, dim: int) -> QMatrix:
        """``lam E``: acts as ``v -> lam v``."""
        return cls.diag([lam] * dim)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    @property
    def backend(self) -> str:
        return self.rows[0][0].backend

    def __getitem__(self, idx):
        r, c = idx
        return self.rows[r][c]

    def column(self, c: int) -> HVector:
        return HVector._raw(tuple(row[c] for row in self.rows))

    def columns(self) -> list[HVector]:
        return [self.column(c) for c in range(self.shape[1])]

    def conj_transpose(self) -> QMatrix:
        m, n = self.shape
        return QMatrix._raw(tuple(tuple(self.rows[r][c].conj() for r in range(m))
                                  for c in range(n)))

    H = property(conj_transpose)

    def __matmul__(self, other):
        if isinstance(other, HVector):
            if len(other) != self.shape[1]:
                raise DimensionError("matrix/vector dimension mismatch")
            return HVector._raw(tuple(_dot(row, other.coords) for row in self.rows))
        if isinstance(other, QMatrix):
            if self.shape[1] != other.shape[0]:
                raise DimensionError("matrix dimension mismatch")
            cols = [tuple(r[c] for r in other.rows) for c in range(other.shape[1])]
            return QMatrix._raw(tuple(tuple(_dot(row, col) for col in cols)
                                      for row in self.rows))
        return NotImplemented

    def __mul__(self, lam: Quaternion) -> QMatrix:
        return QMatrix._raw(tuple(tuple(a * lam for a in row) for row in self.rows))

    def lmul(self, lam: Quaternion) -> QMatrix:
        return QMatrix._raw(tuple(tuple(lam * a for a in row) for row in self.rows))

    def __add__(self, other: QMatrix) -> QMatrix:
        return QMatrix._raw(tuple(tuple(a + b for a, b in zip(r, s))
                                  for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: QMatrix) -> QMatrix:
        return QMatrix._raw(tuple(tuple(a - b for a, b in zip(r, s))
                                  for r, s in zip(self.rows, other.rows)))

    def __neg__(self) -> QMatrix:
        return QMatrix._raw(tuple(tuple(-a for a in r) for r in self.rows))

    def __eq__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def close(self, other: QMatrix, scale: float = 1.0) -> bool:
        return self.shape == other.shape and all(
            a.close(b, scale) for r, s in zip(self.rows, other.rows) for a, b in zip(r, s))

    def max_abs2(self) -> float:
        return max(sc.mag(a.norm2()) for r in self.rows for a in r)

    def to_float(self) -> QMatrix:
        return QMatrix._raw(tuple(tuple(a.to_float() for a in r) for r in self.rows))

    def is_hermitian(self) -> bool:
        return self.close(self.conj_transpose(), scale=max(1.0, self.max_abs2()) ** 0.5)

    def inverse(self) -> QMatrix:
        m, n = self.shape
        if m != n:
            raise DimensionError("inverse of a non-square matrix")
        cols = [solve_right(self, HVector.basis(n, c, self.backend)) for c in range(n)]
        return QMatrix.from_columns(cols)

    def __repr__(self):
        return "QMatrix(" + "; ".join(", ".join(str(a) for a in r) for r in self.rows) + ")"

    def to_json(self) -> list:
        return [[a.to_json() for a in r] for r in self.rows]

    @classmethod
    def from_json(cls, data, backend: str = sc.EXACT) -> QMatrix:
        return cls([Quaternion.from_json(a, backend) for a in r] for r in data)


def _dot(row, col) -> Quaternion:
    total = row[0] * col[0]
    for a, b in zip(row[1:], col[1:]):
        total = total + a * b
    return total


def form_matrix(dim: int, backend: str = sc.EXACT) -> QMatrix:
    """J_{n+1} = diag(1, ..., 1, -1)."""
    return QMatrix.diag([1] * (dim - 1) + [-1]).to_float() if backend == sc.FLOAT \
        else QMatrix.diag([1] * (dim - 1) + [-1])


# -- elimination ------------------------------------------------------------

def _pivot_threshold(rows, ncols: int) -> float:
    """Float pivot cut-off from the pivoting columns only (an augmented side may be larger)."""
    if not rows or isinstance(rows[0][0].re, float) is False:
        return 0.0
    biggest = max((sc.mag(a.norm2()) for r in rows for a in r[:ncols]), default=0.0)
    return sc.tolerance() * biggest ** 0.5


def _nonzero(a: Quaternion, thresh: float) -> bool:
    if isinstance(a.re, float):
        return a.abs() > thresh
    return not a.is_zero(0.0)


def row_echelon(rows: list[list[Quaternion]], ncols: int | None = None,
                reduced: bool = False) -> tuple[list[list[Quaternion]], list[int]]:
    """Row echelon form by left row operations; returns (rows, pivot columns).

    Only the first ``ncols`` columns are used for pivoting (the rest ride
    along, e.g. an augmented right-hand side). Exact rationals pivot on the
    first nonzero entry; floats on the largest ``|entry|^2`` above
    ``tau * max |entry|``.
    """
    a = [list(r) for r in rows]
    if not a:
        return a, []
    m = len(a)
    ncols = len(a[0]) if ncols is None else ncols
    thresh = _pivot_threshold(a, ncols)
    floaty = isinstance(a[0][0].re, float)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r >= m:
            break
        if floaty:
            best = max(range(r, m), key=lambda i: float(a[i][c].norm2()))
            p = best if _nonzero(a[best][c], thresh) else None
        else:
            p = next((i for i in range(r, m) if not a[i][c].is_zero(0.0)), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = a[r][c].inverse()
        a[r] = [inv * x for x in a[r]]
        targets = range(m) if reduced else range(r + 1, m)
        for i in targets:
            if i == r:
                continue
            f = a[i][c]
            if f.is_zero(0.0):
                continue
            a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(vectors: Sequence[HVector]) -> int:
    """Right-linear rank of a family of vectors."""
    if not vectors:
        return 0
    rows = [list(r) for r in QMatrix.from_columns(list(vectors)).rows]
    return len(row_echelon(rows)[1])


def solve_right(A: QMatrix, c: HVector) -> HVector:
    """Solve ``A lam = c`` for square invertible ``A``."""
    m, n = A.shape
    if m != n or len(c) != m:
        raise DimensionError("solve_right needs a square system")
    rows = [list(row) + [c[i]] for i, row in enumerate(A.rows)]
    ech, piv = row_echelon(rows, ncols=n)
    if len(piv) < n:
        raise RankDeficiencyError("singular matrix", len(piv))
    # rows now upper triangular with unit diagonal
    x: list[Quaternion] = [None] * n  # type: ignore[list-item]
    for i in reversed(range(n)):
        acc = ech[i][n]
        for j in range(i + 1, n):
            acc = acc - ech[i][j] * x[j]
        x[i] = acc
    return HVector._raw(tuple(x))


def solve_columns(basis: Sequence[HVector], v: HVector) -> HVector | None:
    """Coefficients ``mu`` with ``sum basis_r mu_r = v``, or None if v is outside the span.

    ``basis`` must be right-linearly independent.
    """
    k = len(basis)
    M = QMatrix.from_columns(list(basis))
    rows = [list(row) + [v[i]] for i, row in enumerate(M.rows)]
    ech, piv = row_echelon(rows, ncols=k, reduced=True)
    if len(piv) < k:
        raise RankDeficiencyError("dependent basis", len(piv))
    scale = max(1.0, sc.mag(v.euclid2()) ** 0.5, M.max_abs2() ** 0.5)
    for row in ech[k:]:
        if not row[k].is_zero(scale):
            return None
    return HVector._raw(tuple(ech[i][k] for i in range(k)))


def right_nullspace(rows: Sequence[Sequence[Quaternion]], ncols: int,
                    backend: str = sc.EXACT) -> list[HVector]:
    """Basis of ``{u : A u = 0}`` for the matrix with the given rows."""
    if not rows:
        return [HVector.basis(ncols, c, backend) for c in range(ncols)]
    ech, piv = row_echelon([list(r) for r in rows], reduced=True)
    free = [c for c in range(ncols) if c not in piv]
    out = []
    one = Quaternion.scalar(1, backend)
    zero = Quaternion.scalar(0, backend)
    for f in free:
        u = [zero] * ncols
        u[f] = one
        for r, p in enumerate(piv):
            u[p] = -ech[r][f]
        out.append(HVector._raw(tuple(u)))
    return out


# -- Gram systems -----------------------------------------------------------

def gram(basis: Sequence[HVector]) -> QMatrix:
    return QMatrix._raw(tuple(tuple(herm(b, c) for c in basis) for b in basis))


@dataclass(frozen=True)
class Signature:
    positive: int
    negative: int
    zero: int

    @property
    def nondegenerate(self) -> bool:
        return self.zero == 0

    def __iter__(self):
        return iter((self.positive, self.negative, self.zero))


def congruence_diagonalize(G: QMatrix) -> tuple[list, QMatrix]:
    """Find ``T`` with ``T* G T`` diagonal using pivots on the diagonal.

    Returns (diagonal entries as real scalars, T). Hermitian-ness keeps every
    pivot real; when all remaining diagonal entries vanish a column
    combination ``c_p += c_q conj(G_pq)`` creates the pivot ``2|G_pq|^2``.
    """
    m = G.shape[0]
    backend = G.backend
    g = [list(r) for r in G.rows]
    t = [list(r) for r in QMatrix.identity(m, backend).rows]
    scale = max(1.0, G.max_abs2() ** 0.5)

    def nz(a: Quaternion) -> bool:
        return not a.is_zero(scale)

    def col_add(dst: int, src: int, mu: Quaternion) -> None:
        # G <- E* G E with E = I + e_src mu e_dst^T
        for row in g:
            row[dst] = row[dst] + row[src] * mu
        cm = mu.conj()
        g[dst] = [x + cm * y for x, y in zip(g[dst], g[src])]
        for row in t:
            row[dst] = row[dst] + row[src] * mu

    def swap(a: int, b: int) -> None:
        g[a], g[b] = g[b], g[a]
        for row in g:
            row[a], row[b] = row[b], row[a]
        for row in t:
            row[a], row[b] = row[b], row[a]

    diag = []
    for k in range(m):
        p = next((i for i in range(k, m) if nz(g[i][i])), None)
        if p is None:
            pair = next(((i, j) for i in range(k, m) for j in range(k, m)
                         if i != j and nz(g[i][j])), None)
            if pair is None:
                diag.extend(g[i][i].re for i in range(k, m))
                break
            i, j = pair
            col_add(i, j, g[i][j].conj())
            p = i
        swap(k, p)
        d = g[k][k].re
        for r in range(k + 1, m):
            if nz(g[k][r]):
                col_add(r, k, -(g[k][r] * (1 / d if not isinstance(d, float) else 1.0 / d)))
        diag.append(d)
    return diag, QMatrix._raw(tuple(tuple(r) for r in t))


def signature(G: QMatrix) -> Signature:
    diag, _ = congruence_diagonalize(G)
    scale = max(1.0, G.max_abs2() ** 0.5)
    pos = sum(1 for d in diag if sc.sign(d, scale) > 0)
    neg = sum(1 for d in diag if sc.sign(d, scale) < 0)
    return Signature(pos, neg, len(diag) - pos - neg)


def orthogonalize(vectors: Sequence[HVector]) -> list[HVector]:
    """Basis of the same right span with diagonal (real) Gram matrix."""
    vs = list(vectors)
    if not vs:
        return []
    G = gram(vs)
    diag, T = congruence_diagonalize(G)
    cols = QMatrix.from_columns(vs) @ T
    scale = max(1.0, G.max_abs2() ** 0.5)
    return [cols.column(c).primitive() for c in range(len(vs))
            if not sc.is_zero(diag[c], scale)]


# -- subspaces --------------------------------------------------------------

class FieldTag:
    """Subfield marker: real, complex type C(a), or quaternionic."""

    __slots__ = ("kind", "direction")

    def __init__(self, kind: str, direction: Quaternion | None = None):
        if kind not in ("real", "complex", "quaternionic"):
            raise ValueError(f"unknown field kind {kind!r}")
        if kind == "complex":
            if direction is None or not direction.is_imaginary() or direction.is_zero():
                raise ValueError("complex-type tag needs a nonzero imaginary direction")
        else:
            direction = None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "direction", direction)

    def __setattr__(self, name, value):
        raise AttributeError("FieldTag is immutable")

    @classmethod
    def real(cls) -> FieldTag:
        return cls("real")

    @classmethod
    def complex(cls, a: Quaternion) -> FieldTag:
        return cls("complex", a.imag)

    @classmethod
    def quaternionic(cls) -> FieldTag:
        return cls("quaternionic")

    def contains(self, value: Quaternion, scale: float = 1.0) -> bool:
        if self.kind == "quaternionic":
            return True
        return in_subfield(value, self.direction, scale)

    def generators(self, backend: str = sc.EXACT) -> list[Quaternion]:
        """Real basis of the subfield."""
        one = Quaternion.scalar(1, backend)
        if self.kind == "real":
            return [one]
        if self.kind == "complex":
            return [one, self.direction.to_backend(backend)]
        z = sc.zero(backend)
        o = sc.one(backend)
        return [one, Quaternion(z, o, z, z), Quaternion(z, z, o, z), Quaternion(z, z, z, o)]

    @property
    def real_dim(self) -> int:
        return {"real": 1, "complex": 2, "quaternionic": 4}[self.kind]

    def __eq__(self, other):
        if not isinstance(other, FieldTag) or self.kind != other.kind:
            return False
        if self.kind != "complex":
            return True
        # same line through the origin (either orientation spans the same field)
        return in_subfield(self.direction, other.direction)

    def __hash__(self):
        return hash(self.kind)

    def __repr__(self):
        if self.kind == "complex":
            return f"FieldTag.complex({self.direction})"
        return f"FieldTag.{self.kind}()"


@dataclass(frozen=True)
class Subspace:
    """Right span of ``basis`` over the tagged subfield."""

    basis: tuple[HVector, ...]
    tag: FieldTag

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(self.basis))
        if not self.basis:
            raise LinAlgError("subspace needs at least one basis vector")

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def ambient_dim(self) -> int:
        return len(self.basis[0])

    @property
    def backend(self) -> str:
        return self.basis[0].backend

    def gram(self) -> QMatrix:
        return gram(self.basis)

    def signature(self) -> Signature:
        return signature(self.gram())

    def coordinates(self, v: HVector) -> HVector | None:
        """Quaternionic coordinates of ``v`` in the basis, or None."""
        return solve_columns(self.basis, v)

    def aligned_lift(self, v: HVector) -> HVector | None:
        """A representative ``v lam`` lying in the tagged-subfield span, or None.

        With coordinates ``mu`` of ``v`` (right-independent basis), some
        ``v lam`` is in the F-span iff ``mu_r mu_s^-1`` is in F for the first
        nonzero ``mu_s``; then ``lam = mu_s^-1``.
        """
        mu = self.coordinates(v)
        if mu is None:
            return None
        if self.tag.kind == "quaternionic":
            return v
        scale = max(1.0, sc.mag(mu.euclid2()) ** 0.5)
        s = next(c for c in mu if not c.is_zero(scale * 1e-3 if isinstance(c.re, float) else 0.0))
        inv = s.inverse()
        for c in mu:
            if not self.tag.contains(c * inv):
                return None
        return (v * inv).primitive()

    def contains_vector(self, v: HVector) -> bool:
        return self.aligned_lift(v) is not None

    def real_spanning_set(self) -> list[HVector]:
        """Real-linear generators of the F-span (basis times field generators)."""
        gens = self.tag.generators(self.backend)
        return [b * g for b in self.basis for g in gens]

    def quaternionic_span(self) -> Subspace:
        return Subspace(self.basis, FieldTag.quaternionic())


def subfield_span(vectors: Sequence[HVector], tag: FieldTag) -> Subspace:
    """Tagged right span; Gram entries of the representatives must lie in the subfield."""
    vs = list(vectors)
    if not vs:
        raise LinAlgError("empty family")
    dim = len(vs[0])
    for v in vs:
        if len(v) != dim:
            raise DimensionError("mixed dimensions")
    if tag.kind != "quaternionic":
        G = gram(vs)
        scale = max(1.0, G.max_abs2() ** 0.5)
        for r, row in enumerate(G.rows):
            for c, entry in enumerate(row):
                if not tag.contains(entry, scale):
                    raise NotAlignedError(
                        f"representatives not aligned: <b{r}, b{c}> = {entry} "
                        f"is outside {tag!r}")
    rk = rank(vs)
    if rk < len(vs):
        raise RankDeficiencyError("basis is not right-linearly independent", rk)
    return Subspace(tuple(vs), tag)


def orth_project(W: Subspace, v: HVector) -> HVector:
    """Orthogonal projection onto the right span of ``W.basis``.

    ``v_W = sum b_r lam_r`` with ``G lam = (<b_r, v>)_r``.
    """
    G = W.gram()
    rhs = HVector._raw(tuple(herm(b, v) for b in W.basis))
    try:
        lam = solve_right(G, rhs)
    except RankDeficiencyError as exc:
        raise DegenerateSubspaceError("projection onto a degenerate subspace") from exc
    out = W.basis[0] * lam[0]
    for b, c in zip(W.basis[1:], lam.coords[1:]):
        out = out + b * c
    return out


def orth_complement(W: Subspace) -> Subspace:
    """Quaternionic orthogonal complement, with an orthogonalised basis."""
    if not W.signature().nondegenerate:
        raise DegenerateSubspaceError("orthogonal complement of a degenerate subspace")
    dim = W.ambient_dim
    J = form_matrix(dim, W.backend)
    rows = [list((J @ b).coords) for b in W.basis]
    rows = [[x.conj() for x in r] for r in rows]  # row b* J (J is real diagonal)
    null = right_nullspace(rows, dim, W.backend)
    if not null:
        raise LinAlgError("subspace is the whole space; complement is zero")
    return Subspace(tuple(orthogonalize(null)), FieldTag.quaternionic())


def same_span(A: Sequence[HVector], B: Sequence[HVector]) -> bool:
    """Equality of right spans via ranks."""
    ra, rb = rank(A), rank(B)
    return ra == rb == rank(list(A) + list(B))


def real_rank(rows: Sequence[Sequence]) -> int:
    """Rank of a real (rational or float) matrix."""
    a = [list(r) for r in rows if r]
    if not a:
        return 0
    m, n = len(a), len(a[0])
    floaty = any(isinstance(x, float) for r in a for x in r)
    thresh = sc.tolerance() * max((abs(float(x)) for r in a for x in r), default=0.0) \
        if floaty else 0
    rk = 0
    for c in range(n):
        if rk >= m:
            break
        if floaty:
            p = max(range(rk, m), key=lambda i: abs(a[i][c]))
            if abs(a[p][c]) <= thresh:
                continue
        else:
            p = next((i for i in range(rk, m) if a[i][c] != 0), None)
            if p is None:
                continue
        a[rk], a[p] = a[p], a[rk]
        piv = a[rk][c]
        for i in range(rk + 1, m):
            f = a[i][c]
            if f != 0:
                f = f / piv
                a[i] = [x - f * y for x, y in zip(a[i], a[rk])]
        rk += 1
    return rk
