from math import comb

import numpy as np
import pytest

from cellnet.polyalg import PolyField, exponents_of_degree, graded_component, monomial_basis, poly_compose
from cellnet.synchrony import random_response


def rand_field(n_in, n_out, degree, seed):
    return random_response(n_in, degree, np.random.default_rng(seed), cell_dim=n_out)


def test_basis_size_and_order():
    B = monomial_basis(3, 4)
    assert B.size == comb(3 + 4, 4)
    assert exponents_of_degree(2, 2) == [(2, 0), (1, 1), (0, 2)]
    degs = [sum(e) for e in B.exps]
    assert degs == sorted(degs)


def test_evaluation_matches_terms():
    F = PolyField(2, 1, 3, {(0, 0): [1.0], (2, 1): [3.0], (0, 3): [-2.0]})
    x, y = 0.7, -1.3
    assert F([x, y])[0] == pytest.approx(1 + 3 * x * x * y - 2 * y ** 3)


def test_batch_and_point_evaluation_agree():
    F = rand_field(3, 2, 3, 0)
    X = np.random.default_rng(1).uniform(-1, 1, (7, 3))
    assert np.allclose(F(X), np.array([F(x) for x in X]), atol=1e-14)


def test_arithmetic():
    F, G = rand_field(2, 2, 3, 1), rand_field(2, 2, 3, 2)
    x = np.array([0.3, -0.4])
    assert np.allclose((F + G)(x), F(x) + G(x))
    assert np.allclose((F - G)(x), F(x) - G(x))
    assert np.allclose((2.5 * F)(x), 2.5 * F(x))
    assert (F - F).is_zero()


def test_product_truncates():
    F = PolyField(1, 1, 2, {(1,): [1.0], (2,): [1.0]})
    P = F.product(F, degree=3)
    assert P.degree == 3
    assert P.coeff((2,))[0] == 1.0 and P.coeff((3,))[0] == 2.0
    assert (4,) not in P.terms


def test_compose_matches_pointwise():
    outer = rand_field(2, 2, 3, 3)
    inner = rand_field(2, 2, 2, 4)
    H = poly_compose(outer, inner, 6)
    x = np.array([0.2, -0.1])
    assert np.allclose(H(x), outer(inner(x)), atol=1e-12)


def test_substitute_linear():
    F = rand_field(2, 1, 3, 5)
    M = np.array([[1.0, 2.0], [-1.0, 0.5]])
    x = np.array([0.3, 0.6])
    assert np.allclose(F.substitute_linear(M)(x), F(M @ x), atol=1e-13)


def test_jacobian_against_finite_differences():
    F = rand_field(3, 2, 3, 6)
    x = np.array([0.1, -0.2, 0.3])
    J = F.jacobian(x)
    h = 1e-6
    fd = np.column_stack([(F(x + h * e) - F(x - h * e)) / (2 * h) for e in np.eye(3)])
    assert np.allclose(J, fd, atol=1e-8)


def test_graded_pieces_sum_to_field():
    F = rand_field(2, 1, 3, 7)
    total = sum((graded_component(F, k) for k in range(1, 4)), graded_component(F, 0))
    assert total.allclose(F, 0.0)


def test_dense_roundtrip():
    F = rand_field(2, 2, 3, 8)
    B = monomial_basis(2, 3)
    assert PolyField.from_dense(B, F.to_dense(B)).allclose(F, 0.0)


def test_rename_merges_exponents():
    F = PolyField(2, 1, 2, {(1, 1): [1.0]})
    G = F.rename_variables([0, 0], 1)
    assert G.coeff((2,))[0] == 1.0


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        PolyField(2, 1, 2, {(1,): [1.0]})
    with pytest.raises(ValueError):
        PolyField(1, 1, 2, {(1,): [np.nan]})
    with pytest.raises(ValueError):
        rand_field(2, 1, 2, 0) + rand_field(3, 1, 2, 0)
