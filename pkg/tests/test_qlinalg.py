import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from qbisect.qlinalg import (DegenerateSubspaceError, DimensionError, FieldTag, HVector,
                             NotAlignedError, QMatrix, RankDeficiencyError, SignClass, Subspace,
                             classify, gram, herm, norm, orth_complement, orth_project, signature,
                             solve_right, subfield_span, vec)
from qbisect.quaternion import I, J, K, ONE, Quaternion
from qbisect.sampling import make_rng, random_quaternion, random_vector

h = mpq(1, 2)
Z = Quaternion(0)


def e(n, i):
    return HVector.basis(n + 1, i)


def test_herm_examples():
    assert norm(vec(Z, ONE)) == -1
    assert classify(vec(Z, ONE)) is SignClass.NEGATIVE
    assert norm(vec(J, ONE)) == 0
    v = vec(J * h, K * h, ONE)
    w = vec(Quaternion(h), Z, ONE)
    assert herm(v, w) == Quaternion(-1, 0, mpq(-1, 4))
    assert herm(w, v) == herm(v, w).conj()
    with pytest.raises(DimensionError):
        herm(v, vec(ONE, ONE))


def test_classify_examples():
    assert classify(e(2, 2)) is SignClass.NEGATIVE
    assert classify(e(2, 0)) is SignClass.POSITIVE
    assert classify(vec(J, Z, ONE)) is SignClass.NULL
    with pytest.raises(ValueError):
        classify(HVector.zeros(3))


def test_solve_right_examples():
    c = vec(Quaternion(1, 2), J, K)
    assert solve_right(QMatrix.identity(3), c) == c
    assert solve_right(QMatrix([[I]]), vec(K)) == vec(J)
    A = QMatrix([[ONE, J], [Z, ONE]])
    lam = solve_right(A, vec(J + K, K))
    assert lam == vec(J + K - I, K)
    assert A @ lam == vec(J + K, K)
    with pytest.raises(RankDeficiencyError) as err:
        solve_right(QMatrix([[ONE, J], [I, K]]), vec(ONE, ONE))
    assert err.value.rank == 1


def test_gram_examples():
    assert gram([e(2, 0), e(2, 2)]) == QMatrix.diag([ONE, -ONE])
    p1, p2 = vec(Quaternion(h), Z, ONE), vec(Quaternion(-h), Z, ONE)
    G = gram([p1, p2])
    assert G == QMatrix([[Quaternion(mpq(-3, 4)), Quaternion(mpq(-5, 4))],
                         [Quaternion(mpq(-5, 4)), Quaternion(mpq(-3, 4))]])
    assert tuple(signature(G)) == (1, 1, 0)


def test_orth_project_examples():
    W = Subspace((e(2, 0), e(2, 2)), FieldTag.quaternionic())
    z, z2 = Quaternion(mpq(1, 3), 0, mpq(1, 5)), Quaternion(0, mpq(1, 4))
    assert orth_project(W, vec(z, z2, ONE)) == vec(z, Z, ONE)
    v = vec(J * h, K * h, ONE)
    vw = orth_project(W, v)
    assert vw == vec(J * h, Z, ONE)
    assert v - vw == vec(Z, K * h, Z) and norm(v - vw) > 0
    assert orth_project(W, e(2, 0) * J) == e(2, 0) * J
    with pytest.raises(DegenerateSubspaceError):
        orth_project(Subspace((vec(ONE, Z, ONE),), FieldTag.quaternionic()), v)


def test_orth_complement_examples():
    C = orth_complement(Subspace((e(2, 0), e(2, 2)), FieldTag.quaternionic()))
    assert C.dim == 1 and C.basis[0] * C.basis[0][1].inverse() == e(2, 1)
    C = orth_complement(Subspace((e(3, 3),), FieldTag.quaternionic()))
    assert C.dim == 3 and tuple(C.signature()) == (3, 0, 0)
    with pytest.raises(DegenerateSubspaceError):
        orth_complement(Subspace((vec(ONE, Z, ONE),), FieldTag.quaternionic()))


def test_subfield_span_examples():
    S = subfield_span([e(2, i) for i in range(3)], FieldTag.complex(I))
    assert S.tag == FieldTag.complex(I * 3)
    R = subfield_span([vec(I, Z, Z), vec(Z, ONE, Z), vec(Z, Z, ONE)], FieldTag.real())
    assert R.gram() == QMatrix.diag([ONE, ONE, -ONE])
    with pytest.raises(NotAlignedError, match="not aligned"):
        subfield_span([vec(ONE, Z, Z), vec(J, Z, Z)], FieldTag.complex(I))


def test_json_round_trip():
    v = vec(Quaternion(h, 1), J, ONE)
    assert HVector.from_json(v.to_json()) == v
    A = QMatrix([[ONE, J], [Z, Quaternion(h)]])
    assert QMatrix.from_json(A.to_json()) == A


seeds = st.integers(min_value=0, max_value=2**32)


@settings(max_examples=60)
@given(seeds, st.integers(min_value=1, max_value=3))
def test_sesquilinearity(seed, n):
    rng = make_rng(seed)
    v, w = random_vector(rng, n + 1), random_vector(rng, n + 1)
    mu, lam = random_quaternion(rng), random_quaternion(rng)
    assert herm(v * mu, w * lam) == mu.conj() * herm(v, w) * lam
    assert herm(w, v) == herm(v, w).conj()
    assert herm(v, v).is_real()


@settings(max_examples=60)
@given(seeds, st.integers(min_value=1, max_value=4))
def test_solve_right_back_substitution(seed, size):
    rng = make_rng(seed)
    A = QMatrix([[random_quaternion(rng) for _ in range(size)] for _ in range(size)])
    c = random_vector(rng, size)
    try:
        lam = solve_right(A, c)
    except RankDeficiencyError:
        return
    assert A @ lam == c


@settings(max_examples=40)
@given(seeds, st.integers(min_value=1, max_value=3))
def test_projection_properties(seed, n):
    rng = make_rng(seed)
    # a (1,1) frame: one negative and one positive vector
    neg = vec(*([Z] * n), ONE) + random_vector(rng, n + 1, bound=4) * Quaternion(mpq(1, 16))
    pos = e(n, 0) + random_vector(rng, n + 1, bound=4) * Quaternion(mpq(1, 16))
    W = Subspace((neg, pos), FieldTag.quaternionic())
    if norm(neg) >= 0 or norm(pos) <= 0 or not W.signature().nondegenerate:
        return
    assert tuple(W.signature()) == (1, 1, 0)
    v = random_vector(rng, n + 1)
    vw = orth_project(W, v)
    perp = v - vw
    assert orth_project(W, vw) == vw
    assert herm(neg, perp) == 0 and herm(pos, perp) == 0
    assert norm(v) == norm(vw) + norm(perp)
    if norm(v) < 0:
        assert norm(vw) < 0
    if n >= 2:
        assert orth_complement(W).signature().negative == 0
