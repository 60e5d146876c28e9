"""One test per acceptance criterion, each printing a single pass/fail line."""

import math
import time
from fractions import Fraction

import numpy as np

from conftest import record_acceptance
from instances import catalytic_instance
from matmaj.core import direct_sum, kron, tensor_power, tuple_boxtimes
from matmaj.criteria import Verdict, build_grid, check_jensen, check_matrix_necessary
from matmaj.majorization import exact_matrix_majorizes, hlp_majorizes, matrix_majorizes
from matmaj.monotones import (INF, matrix_derivation, matrix_divergence,
                              matrix_divergence_tropical, matrix_f, matrix_f_tropical,
                              pairwise_kl, renyi_divergence)
from matmaj.oracle import (RandomSpec, bistochastic_feasible, data_processing_fuzz, exact_product,
                           limit_check, random_rational_stochastic, random_rational_tuple,
                           random_tuple, trial_seeds)
from matmaj.witness import (approx_catalytic_search, build_catalyst_vector, cross_terms,
                            find_asymptotic_n)


def _random_bistochastic(rng, n):
    perms = [np.eye(n)[rng.permutation(n)] for _ in range(3)]
    w = rng.dirichlet(np.ones(3))
    return sum(c * M for c, M in zip(w, perms))


def test_criterion_01_birkhoff_equivalence():
    start = time.perf_counter()
    disagreements, positives = 0, 0
    for child in trial_seeds(1, 1000):
        rng = np.random.default_rng(child)
        n = int(rng.integers(1, 7))
        p = rng.dirichlet(np.ones(n)) * (rng.random(n) > 0.2)
        if p.sum() == 0:
            p[0] = 1.0
        p /= p.sum()
        kind = rng.integers(3)
        if kind == 0:
            q = _random_bistochastic(rng, n) @ p
        elif kind == 1:
            q = rng.dirichlet(np.ones(int(rng.integers(1, 7))))
        else:
            q = rng.permutation(np.concatenate([p, np.zeros(int(rng.integers(0, 3)))]))
        lhs = hlp_majorizes(p, q)
        positives += lhs
        disagreements += lhs != bistochastic_feasible(p, q)
    elapsed = time.perf_counter() - start
    ok = disagreements == 0 and elapsed < 30
    line = record_acceptance(1, "Birkhoff equivalence", ok,
                             f"{disagreements} disagreements in 1000 pairs "
                             f"({positives} majorizing), {elapsed:.1f} s")
    assert ok, line


def test_criterion_02_oracle_agreement():
    disagreements, feasible = 0, 0
    for child in trial_seeds(2, 500):
        rng = np.random.default_rng(child)
        n, m = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        d = int(rng.integers(1, 4))
        P = random_rational_tuple(rng, n, d)
        kind = rng.integers(3)
        if kind == 0:
            Q = exact_product(random_rational_stochastic(rng, m, n), P)
        elif kind == 1:
            Q = random_rational_tuple(rng, m, d)
        else:
            Q = exact_product(random_rational_stochastic(rng, m, n), P)
            if m > 1:
                # Move a little mass between two rows of one column.
                k = int(rng.integers(d))
                i, j = rng.choice(m, size=2, replace=False)
                shift = min(Q[i, k], Fraction(1, 50))
                Q[i, k] -= shift
                Q[j, k] += shift
                if ((Q == 0).any(axis=1) != (Q == 0).all(axis=1)).any():
                    Q[j, k] -= shift
                    Q[i, k] += shift
        exact = exact_matrix_majorizes(P, Q).feasible
        floating = matrix_majorizes(P.astype(float), Q.astype(float)).feasible
        feasible += exact
        disagreements += exact != floating
    ok = disagreements == 0
    line = record_acceptance(2, "float LP vs exact-rational oracle", ok,
                             f"{disagreements} disagreements in 500 instances ({feasible} feasible)")
    assert ok, line


def test_criterion_03_data_processing():
    reports = {d: data_processing_fuzz(1000, 30 + d, d=d) for d in (2, 3)}
    violations = sum(r.violations for r in reports.values())
    worst = min(r.worst_margin for r in reports.values())
    ok = violations == 0
    line = record_acceptance(3, "data processing", ok,
                             f"{violations} violations over 2x1000 trials (d=2,3), "
                             f"worst margin {worst:.2e}")
    assert ok, line


def _rel_error(whole, a, b):
    return np.abs(whole - a - b) / np.maximum(1.0, np.abs(a) + np.abs(b))


def test_criterion_04_additivity():
    worst = {"divergence": 0.0, "tropical": 0.0, "derivation": 0.0}
    for d in (2, 3):
        grid = build_grid(d)
        for child in trial_seeds(4 + d, 100):
            rng = np.random.default_rng(child)
            n1, n2 = (int(v) for v in rng.integers(1, 5, size=2))
            P = random_tuple(RandomSpec(int(rng.integers(2**63)), (n1, 1, d), 0.2))
            Q = random_tuple(RandomSpec(int(rng.integers(2**63)), (n2, 1, d), 0.2))
            PQ = tuple_boxtimes(P, Q)
            a, b = grid.alpha_points, grid.beta_points
            worst["divergence"] = max(worst["divergence"], _rel_error(
                matrix_divergence(PQ, a), matrix_divergence(P, a), matrix_divergence(Q, a)).max())
            worst["tropical"] = max(worst["tropical"], _rel_error(
                matrix_divergence_tropical(PQ, b), matrix_divergence_tropical(P, b),
                matrix_divergence_tropical(Q, b)).max())
            worst["derivation"] = max(worst["derivation"], _rel_error(
                pairwise_kl(PQ), pairwise_kl(P), pairwise_kl(Q)).max())
            gamma = rng.random(d)
            for k in range(d):
                worst["derivation"] = max(worst["derivation"], float(_rel_error(
                    matrix_derivation(PQ, k, gamma), matrix_derivation(P, k, gamma),
                    matrix_derivation(Q, k, gamma))))
    ok = max(worst.values()) <= 1e-9
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    line = record_acceptance(4, "additivity over tensor products", ok,
                             f"200 pairs, worst relative error: {detail}")
    assert ok, line


def test_criterion_05_trajectory_limits():
    worst = [0.0, 0.0, 0.0]
    failures, checks = 0, 0
    for d in (2, 3):
        grid = build_grid(d)
        for child in trial_seeds(50 + d, 50):
            rng = np.random.default_rng(child)
            P = random_tuple(RandomSpec(int(rng.integers(2**63)), (int(rng.integers(2, 6)), 1, d)))
            for beta in grid.beta_points:
                rep = limit_check(P, beta, tolerance=1e-3, monotone_tol=1e-9,
                                  lambdas=grid.lambda_points)
                worst = [max(worst[0], rep.derivation_error), max(worst[1], rep.tropical_error),
                         max(worst[2], rep.monotone_drop)]
                failures += not rep.passed
                checks += 1
    ok = failures == 0
    line = record_acceptance(5, "trajectory limits and monotonicity", ok,
                             f"{failures}/{checks} failures on 100 tuples; max errors "
                             f"derivation {worst[0]:.1e}, tropical {worst[1]:.1e}, "
                             f"monotone drop {worst[2]:.1e}")
    assert ok, line


def test_criterion_06_dichotomy_reduction():
    orders = np.concatenate([np.linspace(0.5, 0.99, 50), np.linspace(1.01, 64.0, 120)])
    worst = 0.0
    for child in trial_seeds(6, 200):
        rng = np.random.default_rng(child)
        P = random_tuple(RandomSpec(int(rng.integers(2**63)), (int(rng.integers(2, 7)), 1, 2), 0.2))
        p1, p2 = P[:, 0], P[:, 1]
        alphas = np.column_stack([orders, 1 - orders])
        ours = matrix_divergence(P, alphas)
        ref = np.array([renyi_divergence(p1, p2, a) for a in orders])
        worst = max(worst, float(np.abs(ours - ref).max()))
        worst = max(worst, abs(matrix_divergence_tropical(P, [1.0, -1.0])
                               - renyi_divergence(p1, p2, INF)))
    ok = worst <= 1e-10
    line = record_acceptance(6, "d=2 reduction to Renyi divergences", ok,
                             f"200 dichotomies, max deviation {worst:.1e}")
    assert ok, line


def test_criterion_07_closed_forms():
    worst = 0.0
    d = 3
    for t in (0.1, 0.2, 0.3, 0.4, 0.5):
        for k in range(d):
            P = np.full((2, d), 0.5)
            P[:, k] = [1 - t, t]
            for a in (0.37, 2.5, -1.5):
                alpha = np.full(d, (1 - a) / (d - 1))
                alpha[k] = a
                # f on the test matrix: 2^{α_k - 1}((1-t)^{α_k} + t^{α_k}).
                expected = 2 ** (a - 1) * ((1 - t) ** a + t ** a)
                worst = max(worst, abs(matrix_f(P, alpha) - expected))
            for bk in (0.5, 1.0, 3.0):
                beta = np.full(d, -bk / (d - 1))
                beta[k] = bk
                worst = max(worst, abs(matrix_f_tropical(P, beta) - (2 * (1 - t)) ** bk))
            base = (k + 1) % d
            gamma = np.linspace(0.5, 1.5, d)
            expected = 0.5 * gamma[k] * math.log(1 / (4 * t * (1 - t)))
            gamma_k = np.zeros(d)
            gamma_k[k] = gamma[k]
            worst = max(worst, abs(matrix_derivation(P, base, gamma_k) - expected))
        # Vector case: f_α((1-t, t)) = (1-t)^α + t^α.
        for a in (0.3, 2.0, 5.0):
            vec = matrix_f(np.array([[1 - t], [t]]), [a])
            worst = max(worst, abs(vec - ((1 - t) ** a + t ** a)))
    ok = worst <= 1e-12
    line = record_acceptance(7, "closed forms on test matrices", ok,
                             f"max deviation {worst:.1e} over t in 0.1..0.5")
    assert ok, line


def test_criterion_08_necessity():
    violated = 0
    grids = {2: build_grid(2), 3: build_grid(3)}
    for child in trial_seeds(8, 300):
        rng = np.random.default_rng(child)
        n, m = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        d = int(rng.integers(2, 4))
        P = random_rational_tuple(rng, n, d)
        Q = exact_product(random_rational_stochastic(rng, m, n), P)
        assert exact_matrix_majorizes(P, Q).feasible
        rep = check_matrix_necessary(P.astype(float), Q.astype(float), grids[d])
        violated += rep.verdict == Verdict.VIOLATED
    ok = violated == 0
    line = record_acceptance(8, "necessity on certified feasible instances", ok,
                             f"{violated} Violated verdicts in 300 instances")
    assert ok, line


def test_criterion_09_catalytic_pipeline():
    start = time.perf_counter()
    P, Q = catalytic_instance()
    one_shot = matrix_majorizes(P, Q).feasible
    worst_residual, worst_perturbation, fixed_exact, found, orders = 0.0, 0.0, True, True, []
    for fixed in (None, 0, 1):
        res = approx_catalytic_search(P, Q, 0.05, fixed_column=fixed)
        found &= res.found
        if not res.found:
            continue
        orders.append(res.n)
        R = res.catalyst.columns
        resid = np.abs(res.transition @ tuple_boxtimes(P, R)
                       - tuple_boxtimes(res.q_eps, R)).max()
        worst_residual = max(worst_residual, float(resid))
        worst_perturbation = max(worst_perturbation, float(np.abs(Q - res.q_eps).sum(axis=0).max()))
        if fixed is not None:
            fixed_exact &= bool(np.array_equal(res.q_eps[:, fixed], Q[:, fixed]))
    elapsed = time.perf_counter() - start
    ok = (found and not one_shot and worst_residual <= 1e-8 and worst_perturbation <= 0.05
          and fixed_exact and elapsed < 300)
    line = record_acceptance(9, "approximate catalytic pipeline", ok,
                             f"orders {orders}, residual {worst_residual:.1e}, "
                             f"perturbation {worst_perturbation:.4f}, fixed column exact "
                             f"{fixed_exact}, {elapsed:.1f} s")
    assert ok, line


def _rational_vector(rng, size):
    w = rng.integers(1, 7, size=size)
    return np.array([Fraction(int(v), int(w.sum())) for v in w], dtype=object)


def test_criterion_10_catalyst_identity():
    mismatches, checks = 0, 0
    for child in trial_seeds(10, 20):
        rng = np.random.default_rng(child)
        p = _rational_vector(rng, int(rng.integers(1, 4)))
        q = _rational_vector(rng, int(rng.integers(1, 4)))
        for n in range(1, 6):
            r = build_catalyst_vector(p, q, n)
            s = cross_terms(p, q, n)
            lhs_p = sorted(n * kron(p, r))
            lhs_q = sorted(n * kron(q, r))
            pn, qn = tensor_power(p, n), tensor_power(q, n)
            rhs_p = sorted(direct_sum(pn, s) if s.size else pn)
            rhs_q = sorted(direct_sum(s, qn) if s.size else qn)
            mismatches += (lhs_p != rhs_p) + (lhs_q != rhs_q)
            checks += 2
    ok = mismatches == 0
    line = record_acceptance(10, "catalyst multiset identity (exact rationals)", ok,
                             f"{mismatches}/{checks} mismatches for n <= 5")
    assert ok, line


def test_criterion_11_jensen_pipeline():
    grid = build_grid(1)
    orders, missing, pairs = [], 0, 0
    for child in trial_seeds(11, 5000):
        rng = np.random.default_rng(child)
        a, b = (int(v) for v in rng.integers(2, 5, size=2))
        p, q = rng.dirichlet(np.ones(a)), rng.dirichlet(np.ones(b))
        if check_jensen(p, q, grid).verdict != Verdict.STRICT:
            continue
        pairs += 1
        w = find_asymptotic_n(p[:, None], q[:, None], n_max=10)
        if w is None:
            missing += 1
        else:
            orders.append(w.n)
        if pairs == 50:
            break
    ok = pairs == 50 and missing == 0
    counts = {n: orders.count(n) for n in sorted(set(orders))}
    line = record_acceptance(11, "Jensen pipeline", ok,
                             f"{pairs} strict pairs, {missing} without n <= 10, orders {counts}")
    assert ok, line
