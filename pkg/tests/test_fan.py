import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from qbisect import scalar as sc
from qbisect.bisector import Bisector, sample_bisector_point, sample_spine_point
from qbisect.fan import (FanDecomposition, FanError, blade_containing, blade_in_bisector,
                         check_orthogonal_pair, complex_span_3pts, distinct_decompositions,
                         fan_blade, intersection_dim, starlike_check)
from qbisect.harness import (FanConfig, blades_distinct, distinct_decomposition_witness,
                             fan_report, running_example, selector_blades)
from qbisect.model import ball, delta, origin
from qbisect.qlinalg import QMatrix, herm
from qbisect.quaternion import I, J, K, Quaternion, in_subfield
from qbisect.sampling import make_rng, random_ball_point

h = mpq(1, 2)
seeds = st.integers(min_value=0, max_value=2**32)


def _grams_in_subfield(span):
    a = span.direction
    lifts = span.lifts
    return all(in_subfield(herm(x, y), a) for x in lifts for y in lifts)


def test_complex_span_examples():
    p, q, r = ball(J * h, K * h), ball(J * h, 0), ball(h, 0)
    span = complex_span_3pts(p, q, r)
    assert _grams_in_subfield(span)
    assert all(span.subspace.aligned_lift(x.lift) is not None for x in (p, q, r))
    assert span.complex_dim == 2
    # three points on one real geodesic: real Grams, default direction i
    line = complex_span_3pts(ball(h, 0), ball(-h, 0), origin(2))
    assert line.direction == I and line.complex_dim == 1


def test_default_blade_of_running_example():
    B, o = running_example(), origin(2)
    N = fan_blade(B, o)
    assert N.a == I and N.b == J
    # meridian frame {(0,0,1), (i,0,0), (0,1,0)} with real Gram
    assert N.S.gram() == QMatrix.diag([Quaternion(-1), Quaternion(1), Quaternion(1)])
    IN = N.reflection_N()
    assert IN.matrix == QMatrix.diag([-J, J, J])
    assert IN.apply(B.p1) == B.p2 and IN.apply(B.p2) == B.p1
    assert blade_in_bisector(N, B)
    assert check_orthogonal_pair(N).ok


def test_blade_containing_example():
    B, o = running_example(), origin(2)
    p = ball(0, K * h)
    N = blade_containing(B, o, p)
    assert N.contains(p) and N.contains(o)
    assert blade_in_bisector(N, B)
    rng = make_rng(4)
    for _ in range(20):
        assert B.contains(N.sample(rng))
    with pytest.raises(FanError):
        blade_containing(B, o, B.p1)
    with pytest.raises(FanError):
        blade_containing(B, ball(h, 0), p)


def test_blade_containing_spine_point():
    B, o = running_example(), origin(2)
    s = ball(I * mpq(1, 3), 0)
    N = blade_containing(B, o, s)
    assert N.contains(s) and N.contains(o) and blade_in_bisector(N, B)


def test_starlike_examples():
    B, o = running_example(), origin(2)
    p = ball(0, K * h)
    rep = starlike_check(B, o, p, 20)
    assert rep.exact and rep.blade_ok and rep.max_residual <= 1e-12
    assert starlike_check(B, o, o, 5).exact
    # a point just off the bisector: residual grows from zero along the segment
    q = ball(Quaternion(mpq(1, 10)), K * h)
    assert not B.contains(q)
    rep = starlike_check(B, o, q, 20)
    assert not rep.exact and not rep.blade_ok
    res = rep.residuals
    assert res[0] == 0 and all(x < y for x, y in zip(res, res[1:]))


def test_distinct_decompositions():
    B = running_example()
    found = distinct_decomposition_witness(B, origin(2), make_rng(9))
    assert found is not None
    A, A2, blade = found
    assert A.center != A2.center
    assert distinct_decompositions(A, A2, blade)
    assert blade_in_bisector(blade, B)
    with pytest.raises(FanError):
        FanDecomposition(B, ball(h, 0))


def test_selector_blades_distinct():
    B, o = running_example(), origin(2)
    N1, N2 = selector_blades(B, o, make_rng(2))
    assert blades_distinct(N1, N2)
    assert N1.contains(o) and N2.contains(o)
    assert blade_in_bisector(N1, B) and blade_in_bisector(N2, B)
    O = N1.S.basis[0]
    assert 0 <= intersection_dim(N1.N.subspace, N2.N.subspace, O) < 4


@settings(max_examples=10, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=3))
def test_fan_union_property(seed, n):
    rng = make_rng(seed)
    B = Bisector(random_ball_point(rng, n), random_ball_point(rng, n))
    o = sample_spine_point(B, rng)
    p = sample_bisector_point(B, rng)
    N = blade_containing(B, o, p)
    assert N.contains(p) and N.contains(o)
    assert blade_in_bisector(N, B)
    q1, q2 = N.pair
    IN = N.reflection_N()
    assert IN.apply(q1) == q2
    x = N.sample(rng)
    assert B.contains(x)
    assert IN.apply(x) == x
    assert delta(x, q1) == delta(IN.apply(x), IN.apply(q1)) == delta(x, q2)


@settings(max_examples=8, deadline=None)
@given(seeds)
def test_orthogonal_pair_equivalences(seed):
    rng = make_rng(seed)
    B = Bisector(random_ball_point(rng, 2), random_ball_point(rng, 2))
    o = sample_spine_point(B, rng)
    N = blade_containing(B, o, sample_bisector_point(B, rng))
    rep = check_orthogonal_pair(N)
    assert rep.ok, rep


@settings(max_examples=8, deadline=None)
@given(seeds)
def test_starlike_random_pairs(seed):
    rng = make_rng(seed)
    B = Bisector(random_ball_point(rng, 2), random_ball_point(rng, 2))
    o = sample_spine_point(B, rng)
    p = sample_bisector_point(B, rng)
    rep = starlike_check(B, o, p, 10)
    assert rep.exact and rep.max_residual <= 1e-9


def test_fan_report_exact_and_float():
    doc = fan_report(FanConfig(n=2, seed=3, selectors=3, trials=5))
    assert doc["status"] == "PASS" and len(doc["blades"]) == 3
    assert all(row["certificate"] and row["contains_center"] for row in doc["blades"])
    assert all(m["distinct"] for m in doc["intersections"])
    doc = fan_report(FanConfig(n=3, seed=3, backend=sc.FLOAT, selectors=2, trials=5))
    assert doc["status"] == "PASS"
    assert all(row["max_residual"] <= 1e-9 for row in doc["blades"])


def test_fan_report_explicit_center():
    B = running_example()
    cfg = FanConfig.from_json({"n": 2, "seed": 1, "selectors": 2, "trials": 3,
                               "bisector": {"p1": B.p1.to_ball().to_json(),
                                            "p2": B.p2.to_ball().to_json()},
                               "center": {"mu": ["1", "0", "0", "0"], "nu": ["0", "0", "0", "1"]}})
    doc = fan_report(cfg)
    assert doc["status"] == "PASS"
    assert doc["center"] == B.spine_point(Quaternion(1), K).to_ball().to_json()
