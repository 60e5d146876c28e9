from functools import reduce

import numpy as np
import pytest

from conftest import random_full_tuple
from instances import CROSSING_P, CROSSING_Q, catalytic_instance, crossing_pair
from matmaj.core import direct_sum, kron, tensor_power, tuple_boxtimes, uniform
from matmaj.criteria import Verdict, build_grid, check_matrix_necessary
from matmaj.errors import ColumnsNotDistinct, SizeCapExceeded, ValidationError
from matmaj.majorization import hlp_majorizes, matrix_majorizes
from matmaj.oracle import random_rational_tuple
from matmaj.witness import (approx_catalytic_search, build_catalyst_tuple, build_catalyst_vector,
                            catalytic_transition, cross_terms, find_asymptotic_n, noise_mix)

GRID2 = build_grid(2, 8)


def _power(P, n):
    """Tensor power recomputed column by column with numpy.kron."""
    return np.column_stack([reduce(np.kron, [P[:, k]] * n) for k in range(P.shape[1])])


def test_asymptotic_identity_and_rank_one(rng):
    P = random_full_tuple(rng, 3, 2)
    w = find_asymptotic_n(P, P)
    assert w.n == 1
    np.testing.assert_array_equal(w.transition, np.eye(3))
    w1 = find_asymptotic_n(P, np.ones((1, 2)))
    assert w1.n == 1


def test_crossing_pair_found_at_two_and_minimal():
    P, Q = crossing_pair()
    w = find_asymptotic_n(P, Q, n_max=4)
    assert w.n == 2
    assert not matrix_majorizes(P, Q).feasible
    resid = np.abs(w.transition @ _power(P, 2) - _power(Q, 2)).max()
    assert resid <= 1e-8
    assert check_matrix_necessary(P, Q, GRID2).verdict != Verdict.VIOLATED


def test_asymptotic_none_is_not_refutation():
    P = np.array([[0.6, 0.4], [0.4, 0.6]])
    Q = np.array([[0.7, 0.3], [0.3, 0.7]])
    assert find_asymptotic_n(P, Q, n_max=3) is None


def test_asymptotic_cap_raises():
    P = np.array([[0.6, 0.4], [0.4, 0.6]])
    Q = np.array([[0.7, 0.3], [0.3, 0.7]])
    with pytest.raises(SizeCapExceeded):
        find_asymptotic_n(P, Q, n_max=10, cap=1000)


def test_asymptotic_vector_case():
    p, q = np.array([0.8, 0.2]), np.array([0.55, 0.25, 0.2])
    w = find_asymptotic_n(p[:, None], q[:, None], n_max=10)
    assert w is not None
    assert hlp_majorizes(tensor_power(p, w.n), tensor_power(q, w.n))
    if w.n > 1:
        assert not hlp_majorizes(tensor_power(p, w.n - 1), tensor_power(q, w.n - 1))
    assert w.residual <= 1e-8


def test_catalyst_vector_small_orders(rng):
    p, q = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(2))
    np.testing.assert_array_equal(build_catalyst_vector(p, q, 1), [1.0])
    np.testing.assert_allclose(build_catalyst_vector(p, q, 2), direct_sum(p, q) / 2)
    with pytest.raises(ValidationError):
        build_catalyst_vector(p, q, 0)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_catalyst_identity(n, rng):
    p, q = rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(3))
    r = build_catalyst_vector(p, q, n)
    s = cross_terms(p, q, n)
    if n == 1:
        assert s.size == 0
        np.testing.assert_array_equal(kron(p, r), p)
        return
    np.testing.assert_allclose(np.sort(n * kron(p, r)), np.sort(direct_sum(tensor_power(p, n), s)),
                               atol=1e-15)
    np.testing.assert_allclose(np.sort(n * kron(r, q)), np.sort(direct_sum(s, tensor_power(q, n))),
                               atol=1e-15)


def test_catalyst_turns_power_majorization_into_catalytic():
    p, q = np.array([0.8, 0.2]), np.array([0.55, 0.25, 0.2])
    w = find_asymptotic_n(p[:, None], q[:, None], n_max=10)
    r = build_catalyst_vector(p, q, w.n)
    assert hlp_majorizes(kron(p, r), kron(q, r))


def test_catalyst_tuple_basic(rng):
    P, Q = random_full_tuple(rng, 3, 2), random_full_tuple(rng, 2, 2)
    np.testing.assert_array_equal(build_catalyst_tuple(P, Q, 1).columns, np.ones((1, 2)))
    R = build_catalyst_tuple(P, Q, 3)
    np.testing.assert_allclose(R.columns.sum(axis=0), 1.0)
    assert R.columns.shape[0] == 9 + 6 + 4


def test_catalytic_transition_from_power_witness():
    P, Q = crossing_pair()
    w = find_asymptotic_n(P, Q, n_max=4)
    R = build_catalyst_tuple(P, Q, w.n).columns
    left, right = tuple_boxtimes(P, R), tuple_boxtimes(Q, R)
    assert matrix_majorizes(left, right).feasible
    T = catalytic_transition(P.shape[0], Q.shape[0], w.n, w.transition)
    np.testing.assert_allclose(T.sum(axis=0), 1.0)
    assert np.abs(T @ left - right).max() <= 1e-8


def test_noise_mix(rng):
    Q = random_full_tuple(rng, 4, 3)
    w = rng.dirichlet(np.ones(4))
    np.testing.assert_allclose(noise_mix(Q, w, 1e-12), Q, atol=1e-12)
    keep = noise_mix(Q, Q[:, 1], 0.3)
    np.testing.assert_array_equal(keep[:, 1], Q[:, 1])
    for eps in (0.01, 0.5, 2.0):
        mixed = noise_mix(Q, w, eps)
        assert np.all(np.abs(mixed - Q).sum(axis=0) <= eps + 1e-15)
        np.testing.assert_allclose(mixed.sum(axis=0), 1.0)
    with pytest.raises(ValidationError):
        noise_mix(Q, w, 0.0)
    with pytest.raises(ValidationError):
        noise_mix(Q, uniform(3), 0.1)


def test_approx_search_same_tuple(rng):
    P = random_full_tuple(rng, 3, 2)
    res = approx_catalytic_search(P, P, 0.05, grid=GRID2)
    assert res.found and res.n == 1
    assert res.residual <= 1e-8


def test_approx_search_refuses_on_violation():
    P = np.array([[0.6, 0.4], [0.4, 0.6]])
    Q = np.array([[0.7, 0.3], [0.3, 0.7]])
    res = approx_catalytic_search(P, Q, 0.05, grid=GRID2)
    assert not res.found
    assert res.necessary.verdict == Verdict.VIOLATED
    assert res.q_eps is None and res.sufficient is None


def test_approx_search_hypotheses():
    P = np.array([[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(ColumnsNotDistinct):
        approx_catalytic_search(P, P, 0.1, grid=GRID2)
    Z = np.array([[1.0, 0.5], [0.0, 0.5]])
    with pytest.raises(ValidationError):
        approx_catalytic_search(Z, Z, 0.1, grid=GRID2)


def test_instance_matches_its_seed():
    rng = np.random.default_rng(32)
    P = random_rational_tuple(rng, 3, 2, max_weight=9, zero_rows=False)
    Q = random_rational_tuple(rng, 3, 2, max_weight=9, zero_rows=False)
    assert (P == CROSSING_P).all() and (Q == CROSSING_Q).all()


def test_approx_search_pipeline():
    P, Q = catalytic_instance()
    assert not matrix_majorizes(P, Q).feasible
    res = approx_catalytic_search(P, Q, 0.05, fixed_column=1, grid=GRID2)
    assert res.found and res.n == 2
    assert res.sufficient.verdict == Verdict.STRICT
    np.testing.assert_array_equal(res.q_eps[:, 1], Q[:, 1])
    assert max(res.perturbation) <= 0.05
    R = res.catalyst.columns
    assert np.abs(res.transition @ tuple_boxtimes(P, R) - tuple_boxtimes(res.q_eps, R)).max() <= 1e-8
