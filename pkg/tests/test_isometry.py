import math

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from qbisect.isometry import (Isometry, IsometryError, frame_transport, left_mult,
                              reflection_in_complex_type, reflection_in_quaternionic,
                              stabilizer_block_check)
from qbisect.model import (ProjectivePoint, TotallyGeodesicSubmanifold, ball, canonical_complex,
                           delta, origin, quaternionic_span)
from qbisect.qlinalg import FieldTag, HVector, QMatrix, Subspace, norm, orth_project, vec
from qbisect.quaternion import I, J, K, ONE, Quaternion, cayley_unit, quaternion_with_norm2
from qbisect.sampling import make_rng, random_ball_point, random_imaginary

h = mpq(1, 2)
Z = Quaternion(0)
seeds = st.integers(min_value=0, max_value=2**32)


def e(i, dim=3):
    return HVector.basis(dim, i)


def spine():
    return TotallyGeodesicSubmanifold(Subspace((e(0), e(2)), FieldTag.quaternionic()))


def test_verify_examples():
    assert Isometry.identity(3).verify()
    lam = Quaternion(mpq(3, 5), mpq(4, 5))
    assert Isometry(QMatrix.scalar_matrix(lam, 3)).verify()
    g = Isometry(QMatrix.diag([Quaternion(2), ONE, ONE]))
    assert not g.verify()
    with pytest.raises(IsometryError):
        g.apply(origin(2))


def test_left_mult_examples():
    Li = left_mult(I, 3)
    assert Li.verify()
    assert Li.apply(ball(Quaternion(h, mpq(1, 3)), 0)) == ball(Quaternion(h, mpq(1, 3)), 0)
    assert Li.apply(ball(J * h, 0)) != ball(J * h, 0)
    assert left_mult(K, 3).apply(ball(h, 0)) == ball(h, 0)
    Lk = left_mult(K, 3)
    assert (Li @ Lk).matrix == -(Lk @ Li).matrix
    assert (Li @ Li).matrix == -QMatrix.identity(3)
    with pytest.raises(IsometryError):
        left_mult(Quaternion(1, 1), 3)


def test_reflection_in_quaternionic_examples():
    R = reflection_in_quaternionic(spine())
    assert R.matrix == QMatrix.diag([ONE, -ONE, ONE])
    assert (R.isometry @ R.isometry).matrix == QMatrix.identity(3)
    assert R.apply(ball(0, K * h)) == ball(0, -K * h)
    assert R.fixes(ball(J * mpq(1, 3), 0))
    assert R.isometry.verify()


def test_reflection_in_complex_type_examples():
    N = canonical_complex(2, K)
    R = reflection_in_complex_type(N, QMatrix.identity(3))
    assert R.matrix == QMatrix.scalar_matrix(K, 3)
    hmat = QMatrix.diag([I, ONE, ONE])
    N2 = TotallyGeodesicSubmanifold(Subspace((e(0) * I, e(1), e(2)), FieldTag.complex(K)))
    R2 = reflection_in_complex_type(N2, hmat)
    assert R2.matrix == QMatrix.diag([-K, K, K])
    assert R2.apply(ball(h, 0)) == ball(-h, 0)
    assert R2.isometry.is_involution()
    # the reflection in C(i) commutes with the one in C(k) modulo the centre
    Ri = reflection_in_complex_type(canonical_complex(2, I), QMatrix.identity(3))
    assert Ri.isometry.commutes_mod_center(R.isometry)


def test_frame_transport_examples():
    frame = [e(0), e(2)]
    assert frame_transport(frame, frame).matrix == QMatrix.identity(3)
    rng = make_rng(5)
    p, q = random_ball_point(rng, 2), random_ball_point(rng, 2)
    W = quaternionic_span(p, q).subspace
    with pytest.raises(IsometryError):
        frame_transport([e(0)], [e(2)])
    # frame (P, U) of the span with U orthogonal to P; matched by rescaled e3, e1
    P = p.lift
    U = q.lift - orth_project(Subspace((P,), FieldTag.quaternionic()), q.lift)
    s = quaternion_with_norm2(-norm(P))
    t = quaternion_with_norm2(norm(U))
    g = frame_transport([e(2) * s, e(0) * t], [P, U])
    assert g.verify()
    assert g.apply(origin(2)) == p
    assert maps_spine_into(g, W)


def maps_spine_into(g, W):
    for z in (Quaternion(mpq(1, 3)), J * mpq(1, 4), Quaternion(0, mpq(1, 5), mpq(1, 7))):
        x = g.apply(ball(z, 0))
        if W.aligned_lift(x.lift) is None:
            return False
    return True


def test_stabilizer_block_examples():
    c, s = math.cosh(1.0), math.sinh(1.0)
    M = TotallyGeodesicSubmanifold(Subspace((e(0, 3).to_float(), e(2, 3).to_float()),
                                            FieldTag.quaternionic()))
    g = Isometry(QMatrix([[Quaternion(c), Z, Quaternion(s)],
                          [Z, ONE, Z],
                          [Quaternion(s), Z, Quaternion(c)]]).to_float())
    assert stabilizer_block_check(g, M)
    bad = Isometry(QMatrix([[Quaternion(c), Quaternion(0.1), Quaternion(s)],
                            [Z, ONE, Z],
                            [Quaternion(s), Z, Quaternion(c)]]).to_float())
    assert not stabilizer_block_check(bad, M)
    # a = 5/3, b = 4i/3: |a|^2 - |b|^2 = 1 makes the eps = +1 shape symplectic
    a, b = Quaternion(mpq(5, 3)), I * mpq(4, 3)
    A = QMatrix([[a, Z, b], [Z, ONE, Z], [-b, Z, a]])
    g = Isometry(A)
    assert g.verify()
    assert stabilizer_block_check(g, spine(), real_spine=True)
    # the same shape with a = 3/5, b = 4i/5 does not preserve the form
    a, b = Quaternion(mpq(3, 5)), I * mpq(4, 5)
    assert not Isometry(QMatrix([[a, Z, b], [Z, ONE, Z], [-b, Z, a]])).verify()


def _random_isometry(rng):
    u = cayley_unit(random_imaginary(rng, nonzero=True, bound=4))
    p, q = random_ball_point(rng, 2), random_ball_point(rng, 2)
    lam = quaternion_with_norm2(norm(p.lift) / norm(q.lift))
    return frame_transport([p.lift], [q.lift * lam]) @ left_mult(u, 3)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_isometries_preserve_delta(seed):
    rng = make_rng(seed)
    g = _random_isometry(rng)
    assert g.verify()
    p, q = random_ball_point(rng, 2), random_ball_point(rng, 2)
    assert delta(g.apply(p), g.apply(q)) == delta(p, q)
    g2 = _random_isometry(rng)
    assert (g @ g2).verify() and g.inverse().verify()


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_left_mult_fixed_set_is_complex_submanifold(seed):
    rng = make_rng(seed)
    a = random_imaginary(rng, nonzero=True, bound=4)
    u = cayley_unit(a)
    L = left_mult(u, 3)
    C = canonical_complex(2, a)
    p = random_ball_point(rng, 2)
    assert (L.apply(p) == p) == C.contains(p)
    # points of C(a) are fixed, with any right rescaling of the lift
    x = vec(Quaternion(mpq(1, 3)) + a * mpq(1, 17), a * mpq(1, 19), ONE)
    x = ProjectivePoint(x * Quaternion(1, 2, 3, 4))
    assert C.contains(x) and L.apply(x) == x
