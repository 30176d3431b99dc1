"""Exterior algebra: wedge, pairing, pushforward and mass identities."""

import numpy as np
import pytest

from currentflow.exterior import (
    CoVector,
    ExteriorError,
    MultiVector,
    basis_subsets,
    canonicalize,
    merge_sign,
    pair,
    push_linear,
    simple_mass,
    wedge,
)


def random_simple(rng, d, k):
    return MultiVector.from_vectors(rng.standard_normal((k, d)))


def test_basis_subsets_count():
    assert len(basis_subsets(5, 2)) == 10
    assert basis_subsets(3, 1) == [(1,), (2,), (3,)]


def test_canonicalize_sign():
    idx, sign = canonicalize((2, 0, 1))
    assert idx == (0, 1, 2)
    assert sign == 1
    idx, sign = canonicalize((1, 0))
    assert sign == -1
    _, sign = canonicalize((1, 1))
    assert sign == 0


def test_merge_sign_disjoint():
    idx, sign = merge_sign((0, 2), (1,))
    assert idx == (0, 1, 2)
    assert sign == -1
    _, sign = merge_sign((0,), (0,))
    assert sign == 0


def test_wedge_anticommutes():
    rng = np.random.default_rng(0)
    for _ in range(50):
        u = MultiVector.from_vectors(rng.standard_normal((1, 4)))
        v = MultiVector.from_vectors(rng.standard_normal((1, 4)))
        uv = wedge(u, v)
        vu = wedge(v, u)
        assert np.allclose(uv.coefficients, -vu.coefficients)
        assert wedge(u, u).norm() < 1e-12


def test_wedge_associative():
    rng = np.random.default_rng(1)
    for _ in range(30):
        a, b, c = (MultiVector.from_vectors(rng.standard_normal((1, 5)))
                   for _ in range(3))
        left = wedge(wedge(a, b), c)
        right = wedge(a, wedge(b, c))
        assert np.allclose(left.coefficients, right.coefficients)


def test_wedge_matches_determinant():
    # coefficients of v1 ^ ... ^ vk are the k x k minors
    rng = np.random.default_rng(2)
    V = rng.standard_normal((3, 3))
    t = MultiVector.from_vectors(V)
    assert t.grade == 3
    assert np.isclose(t.coefficients[0], np.linalg.det(V))


def test_pair_bilinear():
    rng = np.random.default_rng(3)
    t = random_simple(rng, 4, 2)
    s = random_simple(rng, 4, 2)
    w = CoVector(4, 2, rng.standard_normal(6))
    assert np.isclose(pair(t + s, w), pair(t, w) + pair(s, w))
    assert np.isclose(pair(t * 2.5, w), 2.5 * pair(t, w))


def test_push_linear_functorial():
    rng = np.random.default_rng(4)
    for _ in range(40):
        A = rng.standard_normal((4, 4))
        B = rng.standard_normal((4, 4))
        t = random_simple(rng, 4, 2)
        lhs = push_linear(A @ B, t)
        rhs = push_linear(A, push_linear(B, t))
        assert np.allclose(lhs.coefficients, rhs.coefficients, atol=1e-10)


def test_push_linear_top_grade_det():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((3, 3))
    t = random_simple(rng, 3, 3)
    pushed = push_linear(A, t)
    assert np.allclose(pushed.coefficients, np.linalg.det(A) * t.coefficients)


def test_simple_mass_gram():
    rng = np.random.default_rng(6)
    V = rng.standard_normal((2, 5))
    t = MultiVector.from_vectors(V)
    gram = V @ V.T
    assert np.isclose(simple_mass(t), np.sqrt(np.linalg.det(gram)))
    # grade 1 mass is the euclidean norm
    v = rng.standard_normal(5)
    assert np.isclose(simple_mass(MultiVector.from_vectors([v])), np.linalg.norm(v))


def test_simple_mass_needs_witness_midgrade():
    # adding two simple 2-vectors in R^4 loses the witness factorization
    t = MultiVector.basis(4, (1, 2)) + MultiVector.basis(4, (3, 4))
    assert t.witness is None
    with pytest.raises(ExteriorError):
        simple_mass(t)


def test_grade_mismatch_rejected():
    a = MultiVector.basis(3, (1,))
    b = MultiVector.basis(3, (1, 2))
    with pytest.raises(ExteriorError):
        a + b


def test_scalar_multiply_keeps_witness():
    t = MultiVector.from_vectors([[1.0, 0.0], [0.0, 1.0]])
    s = t * 3.0
    assert s.witness is not None
    assert np.isclose(simple_mass(s), 3.0)
    assert np.isclose(abs(s.coefficients[0]), 3.0)
