import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from qbisect import scalar as sc
from qbisect.bisector import (Bisector, BisectorError, bisector_from_real_spine, hermitian_triple,
                              is_totally_real_triple, pythagoras, same_bisector,
                              sample_bisector_point, sample_slice_point, sample_spine_point,
                              slices_disjoint, spine_frame_contains)
from qbisect.harness import running_example
from qbisect.model import ProjectivePoint, ball, delta, origin
from qbisect.qlinalg import FieldTag, HVector, Subspace, herm, norm, same_span, vec
from qbisect.quaternion import I, J, K, ONE, Quaternion
from qbisect.sampling import make_rng, random_ball_point, random_unit

h = mpq(1, 2)
Z = Quaternion(0)
seeds = st.integers(min_value=0, max_value=2**32)


def test_normalization_example():
    B = running_example()
    P1, P2 = B.p1.canonical, B.p2.canonical
    assert herm(P1, P2) == Quaternion(mpq(-5, 4)) and norm(P1) == norm(P2) == mpq(-3, 4)
    # stored lifts are primitive integer vectors: the same values up to the factor 4
    assert B.fully_normalized
    assert B.t == Quaternion(-5) and norm(B.P1) == norm(B.P2) == -3
    with pytest.raises(BisectorError):
        Bisector(ball(h, 0), ball(h, 0))


def test_normalization_is_lift_independent():
    rng = make_rng(3)
    p1, p2 = random_ball_point(rng, 2), random_ball_point(rng, 2)
    B = Bisector(p1, p2)
    B2 = Bisector(ProjectivePoint(p1.lift * random_unit(rng)),
                  ProjectivePoint(p2.lift * Quaternion(3, 1, 0, -2)))
    assert same_bisector(B, B2)
    assert norm(B2.P1) == norm(B2.P2) < 0


def test_contains_examples():
    B = running_example()
    p = ball(0, K * h)
    assert herm(p.canonical, B.p1.canonical) == herm(p.canonical, B.p2.canonical) == -ONE
    assert B.contains(p)
    assert not B.contains(B.p1)
    assert B.contains(B.center()) and B.center() == origin(2)


def test_spine_examples():
    B = running_example()
    assert B.spine_point(ONE, ONE) == origin(2)
    x = B.spine_point(ONE, K)
    assert x.canonical == vec(-K * h, Z, ONE)
    assert B.real_spine_contains(x)
    assert B.real_spine_contains(ball(I * mpq(1, 3), 0))
    assert not B.real_spine_contains(ball(Quaternion(mpq(1, 3)), 0))
    assert not B.real_spine_contains(ball(0, I * mpq(1, 3)))
    with pytest.raises(BisectorError):
        B.spine_point(ONE, Quaternion(2))


def test_projection_examples():
    B = running_example()
    z, w = Quaternion(mpq(1, 3), 0, mpq(1, 4)), Quaternion(0, mpq(1, 5))
    assert B.project_to_spine(ball(z, w)) == ball(z, 0)
    assert B.project_to_spine(ball(z, 0)) == ball(z, 0)
    assert B.project_to_spine(ball(J * h, K * h)) == ball(J * h, 0)


def test_hermitian_triple_examples():
    p, r = ball(J * h, K * h), ball(h, 0)
    q = running_example().project_to_spine(p)
    assert q == ball(J * h, 0)
    value = hermitian_triple(p, q, r)
    assert value == Quaternion(mpq(-51, 64))
    # closed form (|z|^2 - 1)|conj(z) w - 1|^2 with z = j/2, w = 1/2
    z, w = J * h, Quaternion(h)
    assert value.re == (z.norm2() - 1) * (z.conj() * w - 1).norm2()
    assert hermitian_triple(p, p, r).is_real()
    # a generic triple is not real
    triple = hermitian_triple(ball(J * h, K * h), ball(I * mpq(1, 3), J * mpq(1, 4)), r)
    assert not triple.is_real()
    assert is_totally_real_triple(p, q, r)


def test_slice_examples():
    B = running_example()
    sl = B.slice_at(origin(2))
    assert sl.dim == 2 - 1
    assert same_span(sl.subspace.basis, [HVector.basis(3, 1), HVector.basis(3, 2)])
    assert tuple(sl.signature()) == (1, 1, 0)
    p = ball(0, K * h)
    assert B.slice_of(p).base == origin(2)
    other = B.slice_at(ball(I * mpq(1, 3), 0))
    assert slices_disjoint(sl, other)
    assert not slices_disjoint(sl, sl)
    with pytest.raises(BisectorError):
        B.slice_at(ball(h, 0))


def test_bisector_from_real_spine_examples():
    B = running_example()
    frame = (HVector.basis(3, 2), HVector.basis(3, 0))
    R = bisector_from_real_spine(frame)
    assert same_bisector(R, B)
    assert spine_frame_contains(frame, ball(I * mpq(1, 3), 0))
    with pytest.raises(BisectorError):
        bisector_from_real_spine((HVector.basis(3, 2), HVector.basis(3, 2) * J))


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=3))
def test_mostow_decomposition(seed, n):
    rng = make_rng(seed)
    B = Bisector(random_ball_point(rng, n), random_ball_point(rng, n))
    s = sample_spine_point(B, rng)
    assert B.real_spine_contains(s)
    sl = B.slice_at(s)
    for _ in range(3):
        x = sample_slice_point(sl, rng)
        assert B.contains(x)
        assert B.project_to_spine(x) == s
    p = sample_bisector_point(B, rng)
    assert B.contains(p)
    assert B.real_spine_contains(B.project_to_spine(p))


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=3))
def test_triple_reality_and_pythagoras(seed, n):
    rng = make_rng(seed)
    B = Bisector(random_ball_point(rng, n), random_ball_point(rng, n))
    p = random_ball_point(rng, n)
    r = sample_spine_point(B, rng) if n > 0 else None
    q = B.project_to_spine(p)
    assert hermitian_triple(p, q, r).is_real()
    assert is_totally_real_triple(p, q, r)
    lhs, rhs = pythagoras(p, r, B)
    assert lhs == rhs


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_spine_uniqueness(seed):
    rng = make_rng(seed)
    B = Bisector(random_ball_point(rng, 2), random_ball_point(rng, 2))
    o = sample_spine_point(B, rng)
    B2 = bisector_from_real_spine(B.spine_frame(o))
    assert same_span(B.spine.basis, B2.spine.basis)
    assert same_bisector(B, B2)
    x = sample_spine_point(B, rng)
    assert B2.real_spine_contains(x)


def test_float_backend_agrees():
    rng = make_rng(11)
    B = Bisector(random_ball_point(rng, 2, sc.FLOAT), random_ball_point(rng, 2, sc.FLOAT))
    for _ in range(20):
        p = sample_bisector_point(B, rng)
        assert B.residual(p) <= 1e-9
        r = sample_spine_point(B, rng)
        lhs, rhs = pythagoras(p, r, B)
        assert sc.relative_residual(lhs, rhs) <= 1e-9
    assert sc.relative_residual(delta(B.center(), B.p1), delta(B.center(), B.p2)) <= 1e-9


def test_non_fully_normalized_center_is_on_spine():
    # found by search: a pair whose norm ratio is not a rational square
    rng = make_rng(0)
    for _ in range(50):
        B = Bisector(random_ball_point(rng, 2), random_ball_point(rng, 2))
        if not B.fully_normalized:
            break
    assert not B.fully_normalized
    assert not B.t.is_real()
    o = B.center()
    assert o.is_negative and B.real_spine_contains(o)
    with pytest.raises(BisectorError):
        B.midpoint()
    assert Subspace((B.P1, B.P2), FieldTag.quaternionic()).contains_vector(o.lift)
