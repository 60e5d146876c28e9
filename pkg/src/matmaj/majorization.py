"""One-shot order decisions between vectors and between tuples.

``hlp_majorizes`` and its relatives compare sorted partial sums. Matrix
majorization ``P ⪰ Q`` asks for a column-stochastic ``T`` with ``T P = Q``;
``matrix_majorizes`` solves that feasibility problem in floating point with
HiGHS, and ``exact_matrix_majorizes`` solves it over the rationals with an
independent simplex implementation.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from . import exact
from .core import (TOL_NORM, as_tuple, as_vector, norm0, norm1, pad_pair,
                   sort_desc, tuple_support)
from .errors import DimensionMismatch, NumericalFailure, SizeCapExceeded, ValidationError

TOL_CMP = 1e-9
TOL_LP = 1e-8
LP_VARIABLE_CAP = 250_000
EXACT_VARIABLE_CAP = 400


@dataclass
class FeasibilityResult:
    """Outcome of a matrix-majorization feasibility problem.

    ``witness`` is an ``(m, n)`` column-stochastic matrix with
    ``witness @ P ≈ Q`` when ``feasible`` is true, and None otherwise.
    ``residual`` is the max-norm of ``witness @ P - Q`` (infinite when
    infeasible).
    """

    feasible: bool
    witness: Optional[np.ndarray]
    residual: float
    reason: str = ""

    def __bool__(self):
        return self.feasible


def _sorted_partial_sums(x, y):
    a, b = pad_pair(as_vector(x), as_vector(y))
    if a.dtype == object and b.dtype == object:
        return np.cumsum(sort_desc(a)), np.cumsum(sort_desc(b)), True
    a = np.cumsum(sort_desc(a).astype(float))
    b = np.cumsum(sort_desc(b).astype(float))
    return a, b, False


def hlp_majorizes(p, q, tol=TOL_CMP, tol_norm=TOL_NORM):
    """True iff ``p`` majorizes ``q``.

    Vectors are zero-padded to a common length. The decreasing partial sums
    of ``p`` must dominate those of ``q`` up to ``tol``, and the totals must
    agree up to ``tol_norm``. Two Fraction vectors are compared exactly.
    """
    a, b, is_exact = _sorted_partial_sums(p, q)
    if is_exact:
        return a[-1] == b[-1] and all(u >= v for u, v in zip(a, b))
    if abs(a[-1] - b[-1]) > tol_norm:
        return False
    return bool(np.all(a >= b - tol))


def submajorizes(p, q, tol=TOL_CMP):
    """True iff every decreasing partial sum of ``q`` dominates that of ``p``.

    This is the preorder in which a bistochastic ``T`` with ``T q >= p``
    exists; total masses need not agree. For example ``(0.4, 0.4)`` is
    submajorized by ``(1, 0)`` while ``(2, 0)`` is not.
    """
    a, b, is_exact = _sorted_partial_sums(p, q)
    if is_exact:
        return all(v >= u for u, v in zip(a, b))
    return bool(np.all(b >= a - tol))


def modified_majorizes(p, q, tol=TOL_CMP, tol_norm=TOL_NORM):
    """Majorization restricted to vectors with equal support sizes."""
    if norm0(p) != norm0(q):
        return False
    if abs(float(norm1(p)) - float(norm1(q))) > tol_norm:
        return False
    if as_vector(p).dtype == object and as_vector(q).dtype == object and norm1(p) != norm1(q):
        return False
    return hlp_majorizes(p, q, tol=tol, tol_norm=tol_norm)


def bistochastic_witness(p, q, tol=TOL_CMP, tol_lp=TOL_LP):
    """Doubly stochastic ``T`` with ``T p = q`` for ``p`` majorizing ``q``.

    Built as a product of at most ``n - 1`` T-transforms (convex combinations
    of the identity and a transposition), each of which matches one more
    sorted entry of the target. Vectors are zero-padded to a common length
    ``n`` and the result is ``n × n``.
    """
    p, q = pad_pair(as_vector(p).astype(float), as_vector(q).astype(float))
    if not hlp_majorizes(p, q, tol=tol):
        raise ValidationError("p does not majorize q")
    n = p.size
    order_p = np.argsort(-p, kind="stable")
    order_q = np.argsort(-q, kind="stable")
    z = p[order_p].copy()
    y = q[order_q]
    M = np.eye(n)
    step_tol = 1e-15 * max(1.0, float(np.abs(p).max()))
    for _ in range(n):
        above = np.flatnonzero(z > y + step_tol)
        if above.size == 0:
            break
        below = np.flatnonzero(z < y - step_tol)
        j = None
        for cand in above[::-1]:
            later = below[below > cand]
            if later.size:
                j, k = int(cand), int(later[0])
                break
        if j is None:
            break
        delta = min(z[j] - y[j], y[k] - z[k])
        s = delta / (z[j] - z[k])
        row_j, row_k = M[j].copy(), M[k].copy()
        M[j] = (1 - s) * row_j + s * row_k
        M[k] = s * row_j + (1 - s) * row_k
        if z[j] - y[j] <= y[k] - z[k]:
            z[k] += z[j] - y[j]
            z[j] = y[j]
        else:
            z[j] -= y[k] - z[k]
            z[k] = y[k]
    T = np.empty((n, n))
    T[np.ix_(order_q, order_p)] = M
    residual = float(np.abs(T @ p - q).max())
    if residual > tol_lp:
        raise NumericalFailure(f"T-transform construction left residual {residual:.3g}")
    return T


def _check_pair(P, Q):
    P = as_tuple(P)
    Q = as_tuple(Q)
    if P.shape[1] != Q.shape[1]:
        raise DimensionMismatch(f"tuples have d={P.shape[1]} and d={Q.shape[1]}")
    return P, Q


def matrix_majorizes(P, Q, tol_lp=TOL_LP, tol_norm=TOL_NORM, cap=LP_VARIABLE_CAP):
    """Decide whether a column-stochastic ``T`` with ``T P = Q`` exists.

    ``P`` is ``(n, d)`` and ``Q`` is ``(m, d)``; the witness is ``(m, n)``.
    Rows outside the supports are eliminated before solving: a zero row of
    ``Q`` forces the matching row of ``T`` to vanish on the support of ``P``,
    and columns of ``T`` at zero rows of ``P`` are unconstrained. Solver
    trouble raises NumericalFailure instead of being reported as infeasible.
    """
    P, Q = _check_pair(P, Q)
    P = P.astype(float)
    Q = Q.astype(float)
    n, d = P.shape
    m = Q.shape[0]
    if np.any(np.abs(P.sum(axis=0) - Q.sum(axis=0)) > tol_norm):
        return FeasibilityResult(False, None, float("inf"), "column norms differ")
    if P.shape == Q.shape and np.array_equal(P, Q):
        return FeasibilityResult(True, np.eye(n), 0.0, "identical tuples")
    sp_rows = tuple_support(P)
    sq_rows = tuple_support(Q)
    n1, m1 = sp_rows.size, sq_rows.size
    if n1 * m1 > cap:
        raise SizeCapExceeded(f"LP with {n1 * m1} variables exceeds cap {cap}")
    P1 = P[sp_rows]
    Q1 = Q[sq_rows]
    # Variables T1[i, j] flattened i-major.
    a_map = sp.kron(sp.eye(m1), sp.csr_matrix(P1.T))
    a_col = sp.kron(sp.csr_matrix(np.ones((1, m1))), sp.eye(n1))
    A = sp.vstack([a_map, a_col]).tocsr()
    b = np.concatenate([Q1.ravel(), np.ones(n1)])
    res = linprog(np.zeros(n1 * m1), A_eq=A, b_eq=b, bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status == 2:
        return FeasibilityResult(False, None, float("inf"), "linear program infeasible")
    if res.status != 0:
        raise NumericalFailure(f"LP solver failed: {res.message}")
    T1 = np.clip(res.x.reshape(m1, n1), 0.0, None)
    T1 /= T1.sum(axis=0, keepdims=True)
    T = np.zeros((m, n))
    T[np.ix_(sq_rows, sp_rows)] = T1
    off = np.setdiff1d(np.arange(n), sp_rows)
    if off.size:
        T[sq_rows[0], off] = 1.0
    residual = float(np.abs(T @ P - Q).max())
    if residual > tol_lp:
        raise NumericalFailure(f"LP solution has residual {residual:.3g} > {tol_lp:g}")
    return FeasibilityResult(True, T, residual)


def _to_fraction_matrix(A):
    A = np.asarray(A)
    if A.ndim == 1:
        A = A[:, None]
    return [[v if isinstance(v, Fraction) else Fraction(v) for v in row] for row in A.tolist()]


def exact_matrix_majorizes(P, Q, cap=EXACT_VARIABLE_CAP):
    """Exact-rational version of :func:`matrix_majorizes`.

    Float inputs are converted through their exact binary values. The full
    ``m × n`` feasibility problem is solved with an exact simplex method; no
    tolerances are involved and a feasible witness has zero residual. The
    witness is returned as an object array of Fractions.
    """
    P = _to_fraction_matrix(P)
    Q = _to_fraction_matrix(Q)
    n, d = len(P), len(P[0])
    m = len(Q)
    if len(Q[0]) != d:
        raise DimensionMismatch(f"tuples have d={d} and d={len(Q[0])}")
    if m * n > cap:
        raise SizeCapExceeded(f"exact LP with {m * n} variables exceeds cap {cap}")
    for k in range(d):
        if sum(P[j][k] for j in range(n)) != sum(Q[i][k] for i in range(m)):
            return FeasibilityResult(False, None, float("inf"), "column norms differ")
    if m == n and P == Q:
        T = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(m)], dtype=object)
        return FeasibilityResult(True, T, 0.0, "identical tuples")
    A, b = [], []
    for i in range(m):
        for k in range(d):
            row = [Fraction(0)] * (m * n)
            for j in range(n):
                row[i * n + j] = P[j][k]
            A.append(row)
            b.append(Q[i][k])
    for j in range(n):
        row = [Fraction(0)] * (m * n)
        for i in range(m):
            row[i * n + j] = Fraction(1)
        A.append(row)
        b.append(Fraction(1))
    x =exact.feasible_point(A, b)
    if x is None:
        return FeasibilityResult(False, None, float("inf"), "exact LP infeasible")
    T = np.array([[x[i * n + j] for j in range(n)] for i in range(m)], dtype=object)
    for i in range(m):
        for k in range(d):
            if sum(T[i, j] * P[j][k] for j in range(n)) != Q[i][k]:
                raise ArithmeticError("exact witness failed verification")
    return FeasibilityResult(True, T, 0.0)
