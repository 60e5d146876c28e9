"""Witness construction: tensor-power orders, catalysts and noise mixing.

``find_asymptotic_n`` searches the least ``n`` for which ``P^{⊠n}`` majorizes
``Q^{⊠n}``. From such an ``n`` a catalyst is built in closed form, and the
catalytic transition is assembled explicitly: ``P ⊠ R`` splits into the word
``P^{⊠n}`` plus cross terms, ``Q ⊠ R`` into the same cross terms plus
``Q^{⊠n}``, so the transition applies ``T_n`` to the first block and a
permutation to the rest.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (SIZE_CAP, TOL_ZERO, as_tuple, as_vector, tensor_power, tuple_boxtimes,
                   tuple_support, tuple_tensor_power)
from .criteria import Verdict, check_matrix_necessary, check_matrix_sufficient
from .errors import ColumnsNotDistinct, SizeCapExceeded, ValidationError
from .majorization import (LP_VARIABLE_CAP, TOL_CMP, TOL_LP, bistochastic_witness,
                           hlp_majorizes, matrix_majorizes)

BISTOCHASTIC_WITNESS_CAP = LP_VARIABLE_CAP


@dataclass
class AsymptoticWitness:
    """``transition @ P^{⊠n} ≈ Q^{⊠n}`` with max-norm error ``residual``.

    For ``d = 1`` problems the transition is bistochastic; it is omitted
    (None) when its ``N × N`` size would exceed the witness cap, in which
    case ``residual`` is NaN and only the majorization verdict is certified.
    """

    n: int
    transition: Optional[np.ndarray]
    residual: float
    notes: list = field(default_factory=list)


@dataclass
class CatalystTuple:
    """Catalyst columns (an ``(N, d)`` array) and the order ``n`` used."""

    columns: np.ndarray
    n: int


@dataclass
class CatalyticResult:
    """Outcome of :func:`approx_catalytic_search`.

    When ``found`` is true, ``transition @ (P ⊠ R) ≈ Q_eps ⊠ R`` with
    max-norm error ``residual``. Otherwise ``reason`` says why the search
    stopped (refusal by the necessary condition, or no ``n`` below the cap).
    """

    found: bool
    reason: str
    epsilon: float
    q_eps: Optional[np.ndarray] = None
    catalyst: Optional[CatalystTuple] = None
    transition: Optional[np.ndarray] = None
    n: Optional[int] = None
    residual: float = float("nan")
    perturbation: Optional[list] = None
    necessary: Optional[object] = None
    sufficient: Optional[object] = None


def _vector_majorizes_at(p, q, n, tol, cap, witness_cap):
    pn, qn = tensor_power(p, n, cap), tensor_power(q, n, cap)
    if not hlp_majorizes(pn, qn, tol=tol):
        return None
    size = max(pn.size, qn.size)
    if size * size > witness_cap:
        return AsymptoticWitness(n, None, float("nan"),
                                 [f"bistochastic witness of size {size} not materialized"])
    T = bistochastic_witness(pn, qn, tol=tol)
    p_pad = np.concatenate([pn, np.zeros(size - pn.size)])
    q_pad = np.concatenate([qn, np.zeros(size - qn.size)])
    return AsymptoticWitness(n, T, float(np.abs(T @ p_pad - q_pad).max()))


def find_asymptotic_n(P, Q, n_max=8, cap=LP_VARIABLE_CAP, tol_cmp=TOL_CMP, tol_lp=TOL_LP,
                      size_cap=SIZE_CAP, witness_cap=BISTOCHASTIC_WITNESS_CAP):
    """Least ``n <= n_max`` with ``P^{⊠n} ⪰ Q^{⊠n}``, or None.

    For ``d >= 2`` each ``n`` is a matrix-majorization LP and the witness is
    column-stochastic. A single column (``d = 1``) is read as ordinary
    majorization of probability vectors: the test is the partial-sum
    criterion at the tensor power, with a bistochastic witness (zero-padded
    to a common length). Returning None only means nothing was found up to
    ``n_max``; SizeCapExceeded is raised if an ``n`` below ``n_max`` cannot
    be tested.
    """
    P = as_tuple(P, normalized=True).astype(float)
    Q = as_tuple(Q, normalized=True).astype(float)
    if P.shape[1] != Q.shape[1]:
        raise ValidationError("P and Q must have the same number of columns")
    for n in range(1, int(n_max) + 1):
        if P.shape[1] == 1:
            found = _vector_majorizes_at(P[:, 0], Q[:, 0], n, tol_cmp, size_cap, witness_cap)
            if found is not None:
                return found
            continue
        rows_p = tuple_support(P).size ** n
        rows_q = tuple_support(Q).size ** n
        if rows_p * rows_q > cap:
            raise SizeCapExceeded(f"n={n}: LP with {rows_p * rows_q} variables exceeds cap {cap}")
        Pn = tuple_tensor_power(P, n, size_cap)
        Qn = tuple_tensor_power(Q, n, size_cap)
        res = matrix_majorizes(Pn, Qn, tol_lp=tol_lp, cap=cap)
        if res.feasible:
            return AsymptoticWitness(n, res.witness, res.residual)
    return None


def _word(p, a, q, b):
    """``p^{⊗a} ⊗ q^{⊗b}`` with ``x^{⊗0} = (1)``."""
    one = np.array([Fraction(1)], dtype=object) if p.dtype == object else np.ones(1)
    out = one if a == 0 else tensor_power(p, a)
    for _ in range(b):
        out = np.multiply.outer(out, q).ravel()
    return out


def _word_lengths(np_, nq, n):
    return [np_ ** (n - 1 - s) * nq ** s for s in range(n)]


def build_catalyst_vector(p, q, n, cap=SIZE_CAP):
    """``(1/n) ⊕_{j=1}^{n} p^{⊗(n-j)} ⊗ q^{⊗(j-1)}``.

    If ``p^{⊗n}`` majorizes ``q^{⊗n}`` then ``p ⊗ r`` majorizes ``q ⊗ r``.
    Works with Fraction vectors for exact checks.
    """
    p, q = as_vector(p), as_vector(q)
    n = int(n)
    if n < 1:
        raise ValidationError("catalyst order must be at least 1")
    if sum(_word_lengths(p.size, q.size, n)) > cap:
        raise SizeCapExceeded("catalyst would exceed the size cap")
    words = [_word(p, n - j, q, j - 1) for j in range(1, n + 1)]
    return np.concatenate(words) / n


def cross_terms(p, q, n):
    """``s = ⊕_{j=1}^{n-1} p^{⊗(n-j)} ⊗ q^{⊗j}`` (unnormalized).

    With ``r`` from :func:`build_catalyst_vector`, ``n·(p ⊗ r)`` equals
    ``p^{⊗n} ⊕ s`` and ``n·(r ⊗ q)`` equals ``s ⊕ q^{⊗n}`` as multisets.
    """
    p, q = as_vector(p), as_vector(q)
    words = [_word(p, n - j, q, j) for j in range(1, n)]
    if not words:
        return np.array([], dtype=p.dtype)
    return np.concatenate(words)


def build_catalyst_tuple(P, Q, n, cap=SIZE_CAP):
    """Columns ``r^(k) = (1/n) ⊕_{s=0}^{n-1} (p^(k))^{⊗(n-1-s)} ⊗ (q^(k))^{⊗s}``.

    All columns use the same word layout, so rows stay aligned.
    """
    P, Q = as_tuple(P), as_tuple(Q)
    if P.shape[1] != Q.shape[1]:
        raise ValidationError("P and Q must have the same number of columns")
    cols = [build_catalyst_vector(P[:, k], Q[:, k], n, cap) for k in range(P.shape[1])]
    return CatalystTuple(np.column_stack(cols), int(n))


def catalytic_transition(rows_p, rows_q, n, T_n, cap=LP_VARIABLE_CAP):
    """Stochastic map sending ``P ⊠ R`` to ``Q ⊠ R`` given ``T_n``.

    ``P`` has ``rows_p`` rows, ``Q`` has ``rows_q`` rows, ``R`` is the order-``n``
    catalyst and ``T_n`` maps ``P^{⊠n}`` to ``Q^{⊠n}``. Block ``s`` of ``R``
    holds the word ``P^{⊠(n-1-s)} ⊠ Q^{⊠s}``; in ``P ⊠ R`` block ``0`` is
    ``P^{⊠n}`` and is sent through ``T_n`` to block ``n-1`` of ``Q ⊠ R``,
    while block ``s >= 1`` is the word with ``n - s`` factors of ``P`` and
    ``s`` of ``Q``, moved to block ``s-1`` of ``Q ⊠ R`` by moving its first
    ``Q`` factor to the front.
    """
    mp, mq, n = int(rows_p), int(rows_q), int(n)
    lengths = _word_lengths(mp, mq, n)
    size_r = sum(lengths)
    offsets = np.concatenate([[0], np.cumsum(lengths)[:-1]]).astype(int)
    n_src, n_tgt = mp * size_r, mq * size_r
    if n_src * n_tgt > cap * 16:
        raise SizeCapExceeded("catalytic transition would exceed the size cap")
    T = np.zeros((n_tgt, n_src))
    T_n = np.asarray(T_n, dtype=float)
    # Block 0 of P ⊠ R is P^{⊠n}; block n-1 of Q ⊠ R is Q^{⊠n}.
    len_pn = mp ** (n - 1)
    len_qn = mq ** (n - 1)
    src = (np.arange(mp)[:, None] * size_r + offsets[0] + np.arange(len_pn)[None, :]).ravel()
    tgt = (np.arange(mq)[:, None] * size_r + offsets[n - 1] + np.arange(len_qn)[None, :]).ravel()
    T[np.ix_(tgt, src)] = T_n
    for s in range(1, n):
        shape = (mp,) * (n - s) + (mq,) * s
        idx = np.unravel_index(np.arange(int(np.prod(shape))), shape)
        a0, rest = idx[0], idx[1:]
        src = a0 * size_r + offsets[s] + np.ravel_multi_index(rest, shape[1:])
        b1 = idx[n - s]
        moved = idx[:n - s] + idx[n - s + 1:]
        moved_shape = shape[:n - s] + shape[n - s + 1:]
        tgt = b1 * size_r + offsets[s - 1] + np.ravel_multi_index(moved, moved_shape)
        T[tgt, src] = 1.0
    return T


def noise_mix(Q, w, epsilon):
    """``Q_ε = (1 - ε/2) Q + (ε/2) W`` with every column of ``W`` equal to ``w``.

    Computed as ``q + (ε/2)(w - q)`` per column, so a column equal to ``w``
    is reproduced bit for bit. Each column moves by at most ``ε`` in 1-norm.
    """
    Q = as_tuple(Q).astype(float)
    w = as_vector(w).astype(float)
    if w.size != Q.shape[0]:
        raise ValidationError(f"noise vector has {w.size} entries, Q has {Q.shape[0]} rows")
    if not 0 < epsilon <= 2:
        raise ValidationError("epsilon must lie in (0, 2]")
    return Q + (epsilon / 2.0) * (w[:, None] - Q)


def _check_hypotheses(P, Q):
    P = as_tuple(P, normalized=True).astype(float)
    Q = as_tuple(Q, normalized=True).astype(float)
    if np.any(P <= TOL_ZERO) or np.any(Q <= TOL_ZERO):
        raise ValidationError("approximate catalytic search needs full-support P and Q")
    d = P.shape[1]
    for k in range(d):
        for l in range(k + 1, d):
            if np.array_equal(P[:, k], P[:, l]):
                raise ColumnsNotDistinct(f"columns {k} and {l} of P coincide")
    return P, Q


def approx_catalytic_search(P, Q, epsilon, n_max=8, fixed_column=None, grid=None,
                            cap=LP_VARIABLE_CAP, tol_lp=TOL_LP):
    """Approximate catalytic majorization of ``Q`` by ``P``.

    Assumes full-support tuples and pairwise distinct columns of ``P``.
    Refuses (``found=False``) if the necessary divergence condition is
    violated on the grid. Otherwise mixes ``Q`` with noise ``w`` (uniform, or
    ``q^(fixed_column)`` to keep that column exact), checks the strict
    sufficient conditions, searches ``n`` with ``P^{⊠n} ⪰ Q_ε^{⊠n}``, and
    returns the catalyst and an explicit transition for
    ``P ⊠ R -> Q_ε ⊠ R``.
    """
    P, Q = _check_hypotheses(P, Q)
    if P.shape[1] != Q.shape[1]:
        raise ValidationError("P and Q must have the same number of columns")
    necessary = check_matrix_necessary(P, Q, grid)
    result = CatalyticResult(False, "", float(epsilon), necessary=necessary)
    if necessary.verdict == Verdict.VIOLATED:
        result.reason = "necessary divergence condition violated"
        return result
    if fixed_column is None:
        w = np.full(Q.shape[0], 1.0 / Q.shape[0])
    else:
        w = Q[:, int(fixed_column)].copy()
    q_eps = noise_mix(Q, w, epsilon)
    result.q_eps = q_eps
    result.perturbation = np.abs(Q - q_eps).sum(axis=0).tolist()
    result.sufficient = check_matrix_sufficient(P, q_eps, grid)
    found = find_asymptotic_n(P, q_eps, n_max=n_max, cap=cap, tol_lp=tol_lp)
    if found is None:
        result.reason = f"no n <= {n_max} found"
        return result
    R = build_catalyst_tuple(P, q_eps, found.n)
    T = catalytic_transition(P.shape[0], Q.shape[0], found.n, found.transition)
    residual = float(np.abs(T @ tuple_boxtimes(P, R.columns) - tuple_boxtimes(q_eps, R.columns)).max())
    if residual > tol_lp:
        result.reason = f"catalytic transition residual {residual:.3g} exceeds tolerance"
        return result
    result.found = True
    result.reason = "found"
    result.catalyst = R
    result.transition = T
    result.n = found.n
    result.residual = residual
    return result

