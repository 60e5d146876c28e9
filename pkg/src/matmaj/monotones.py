"""Monotone quantities for vectors and tuples.

Vector functions: the power sums ``f_alpha``, their extremes, Shannon
entropy, the log-sum ``h0_prime``, Rényi entropies and Rényi divergences.

Tuple functions act on an ``(n, d)`` array ``P`` with common support:
``f_α(P) = Σ_i Π_k (p_i^(k))^{α_k}`` over rows in the support, its tropical
counterpart ``max_i Π_k (p_i^(k))^{β_k}``, the KL-weighted derivations, the
divergences built from them, the λ-trajectory that interpolates between the
three, and the multiple Chernoff divergence.

Parameter sets for tuples (``d`` entries each):

* ``A_plus``: the probability simplex ``α_k >= 0, Σ α_k = 1``;
* ``A_minus``: ``Σ α_k = 1`` with one ``α_k >= 1`` and all others ``<= 0``;
* ``B_minus``: ``Σ β_k = 0`` with one ``β_k >= 0`` and all others ``<= 0``.

Basis vectors ``e_k`` lie in both alpha sets but give the degenerate
``f_{e_k}(P) = ‖p^(k)‖₁``; the divergences exclude them.

All products are evaluated in the log domain with log-sum-exp for the outer
sum. Logarithms are natural.
"""

import math

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from .core import TOL_ENTRY, as_tuple, as_vector, pad_pair, support, tuple_support
from .errors import ColumnsNotDistinct, ValidationError

TOL_PARAM = 1e-9
INF = math.inf


def _vec(p):
    return as_vector(p).astype(float)


def f_alpha(p, alpha):
    """Power sum ``Σ_{i ∈ supp p} p_i^α``.

    ``alpha = 0`` gives the support size and ``alpha = ±inf`` is delegated to
    :func:`f_extreme`.
    """
    p = _vec(p)
    if alpha == INF:
        return f_extreme(p, "+")
    if alpha == -INF:
        return f_extreme(p, "-")
    s = p[support(p)]
    if alpha == 0:
        return float(s.size)
    return float(np.sum(s ** alpha))


def log_f_alpha(p, alpha):
    """``log f_α(p)`` evaluated by log-sum-exp, safe for large ``|α|``."""
    p = _vec(p)
    s = p[support(p)]
    if alpha == INF:
        return float(math.log(s.max()))
    if alpha == -INF:
        return float(-math.log(s.min()))
    if alpha == 0:
        return float(math.log(s.size))
    return float(logsumexp(alpha * np.log(s)))


def f_extreme(p, sign):
    """``max p`` for ``sign='+'``; ``1 / min_{supp p} p`` for ``sign='-'``."""
    p = _vec(p)
    s = p[support(p)]
    if s.size == 0:
        raise ValidationError("f_extreme needs a nonzero vector")
    if sign in ("+", 1):
        return float(s.max())
    if sign in ("-", -1):
        return float(1.0 / s.min())
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def shannon_entropy(p):
    """``-Σ p_i log p_i`` with ``0 log 0 = 0``."""
    p = _vec(p)
    s = p[support(p)]
    return float(-np.sum(s * np.log(s)))


def h0_prime(p):
    """``Σ_{i ∈ supp p} log p_i``."""
    p = _vec(p)
    return float(np.sum(np.log(p[support(p)])))


def renyi_entropy(p, alpha):
    """Rényi entropy ``H_α(p)`` for ``α ∈ [0, ∞]``."""
    p = _vec(p)
    if alpha < 0:
        raise ValueError("Rényi entropy order must be nonnegative")
    s = p[support(p)]
    if alpha == 0:
        return float(math.log(s.size))
    if alpha == 1:
        return shannon_entropy(s)
    if alpha == INF:
        return float(-math.log(s.max()))
    return float(logsumexp(alpha * np.log(s)) / (1.0 - alpha))


def renyi_divergence(p, q, alpha):
    """Rényi divergence ``D_α(p‖q)`` for ``α ∈ [0, ∞]``; may be ``inf``.

    Follows the usual support conventions: for ``α < 1`` the value is finite
    iff the supports intersect, for ``α >= 1`` iff ``supp p ⊆ supp q``.
    """
    p, q = pad_pair(_vec(p), _vec(q))
    if alpha < 0:
        raise ValueError("Rényi divergence order must be nonnegative")
    sp, sq = set(support(p).tolist()), set(support(q).tolist())
    if alpha < 1:
        idx = np.array(sorted(sp & sq), dtype=int)
        if idx.size == 0:
            return INF
        if alpha == 0:
            return float(-math.log(q[np.array(sorted(sp), dtype=int)].sum()))
    else:
        if not sp <= sq:
            return INF
        idx = np.array(sorted(sp), dtype=int)
    a, b = np.log(p[idx]), np.log(q[idx])
    if alpha == 1:
        return float(np.sum(p[idx] * (a - b)))
    if alpha == INF:
        return float(np.max(a - b))
    return float(logsumexp(alpha * a + (1.0 - alpha) * b) / (alpha - 1.0))


# Parameter sets -------------------------------------------------------------

def classify_alpha(alpha, tol=TOL_PARAM):
    """Region of an alpha tuple: ``(region, k)``.

    ``region`` is one of ``"A_plus"``, ``"A_minus"``, ``"basis"`` or
    ``"outside"``; ``k`` is the distinguished index for ``A_minus`` and
    ``basis`` (None otherwise).
    """
    a = np.asarray(alpha, dtype=float)
    if a.ndim != 1 or abs(a.sum() - 1.0) > tol:
        return "outside", None
    k = int(np.argmax(a))
    others = np.delete(a, k)
    if abs(a[k] - 1.0) <= tol and np.all(np.abs(others) <= tol):
        return "basis", k
    if np.all(a >= -tol):
        return "A_plus", None
    if a[k] >= 1.0 - tol and np.all(others <= tol):
        return "A_minus", k
    return "outside", None


def beta_index(beta, tol=TOL_PARAM):
    """Distinguished index ``k`` of a nonzero beta tuple in ``B_minus``."""
    b = np.asarray(beta, dtype=float)
    if b.ndim != 1 or abs(b.sum()) > tol:
        raise ValidationError("beta entries must sum to zero")
    if np.all(np.abs(b) <= tol):
        raise ValidationError("beta must be nonzero")
    k = int(np.argmax(b))
    if np.any(np.delete(b, k) > tol):
        raise ValidationError("beta must have a single nonnegative entry")
    return k


def trajectory_alpha(beta, lam):
    """``α^λ = e_k + (λ - 1) β`` for ``β ∈ B_minus`` with ``β_k = 1``."""
    b = np.asarray(beta, dtype=float)
    k = beta_index(b)
    if abs(b[k] - 1.0) > TOL_PARAM:
        raise ValidationError("trajectory direction must have beta_k = 1")
    a = (lam - 1.0) * b
    a[k] += 1.0
    return a


# Tuple monotones ------------------------------------------------------------

def _log_rows(P):
    P = as_tuple(P).astype(float)
    return np.log(P[tuple_support(P)])


def log_matrix_f(P, alphas):
    """``log f_α(P)`` for one alpha (shape ``(d,)``) or many (``(m, d)``)."""
    L = _log_rows(P)
    A = np.asarray(alphas, dtype=float)
    if A.shape[-1] != L.shape[1]:
        raise ValidationError(f"alpha has {A.shape[-1]} entries, tuple has d={L.shape[1]}")
    return logsumexp(A @ L.T, axis=-1)


def matrix_f(P, alpha):
    """``Σ_i Π_k (p_i^(k))^{α_k}`` over the common support of ``P``."""
    return float(np.exp(log_matrix_f(P, alpha)))


def matrix_f_tropical(P, beta):
    """``max_i Π_k (p_i^(k))^{β_k}`` over the common support of ``P``."""
    L = _log_rows(P)
    return float(np.exp(np.max(L @ np.asarray(beta, dtype=float))))


def pairwise_kl(P):
    """``(d, d)`` array of ``D_1(p^(k)‖p^(ℓ))`` for the columns of ``P``."""
    P = as_tuple(P).astype(float)
    rows = tuple_support(P)
    W = P[rows]
    L = np.log(W)
    # entry (k, l) = Σ_i p_i^(k) (log p_i^(k) - log p_i^(l))
    return np.sum(W * L, axis=0)[:, None] - W.T @ L


def matrix_derivation(P, k, gamma):
    """``Σ_{ℓ≠k} γ_ℓ D_1(p^(k)‖p^(ℓ))``; the entry ``γ_k`` is ignored."""
    g = np.array(gamma, dtype=float)
    kl = pairwise_kl(P)
    if g.size != kl.shape[0]:
        raise ValidationError(f"gamma has {g.size} entries, tuple has d={kl.shape[0]}")
    g[k] = 0.0
    if np.any(g < 0):
        raise ValidationError("derivation weights must be nonnegative")
    return float(kl[k] @ g)


def _check_divergence_alpha(A):
    for a in np.atleast_2d(A):
        region, _ = classify_alpha(a)
        if region == "basis":
            raise ValidationError(f"alpha {a.tolist()} is a basis vector")
        if region == "outside":
            raise ValidationError(f"alpha {a.tolist()} is outside A_plus and A_minus")


def matrix_divergence(P, alpha):
    """``(α_max - 1)^{-1} log f_α(P)``.

    ``alpha`` may be a single tuple or an ``(m, d)`` array of tuples, each in
    ``A_plus`` or ``A_minus`` and not a basis vector.
    """
    A = np.asarray(alpha, dtype=float)
    _check_divergence_alpha(A)
    out = log_matrix_f(P, A) / (A.max(axis=-1) - 1.0)
    return float(out) if np.ndim(out) == 0 else out


def matrix_divergence_tropical(P, beta):
    """``(1 / β_max) log f^T_β(P)`` for nonzero ``β ∈ B_minus``.

    ``beta`` may be a single tuple or an ``(m, d)`` array.
    """
    B = np.asarray(beta, dtype=float)
    for b in np.atleast_2d(B):
        beta_index(b)
    L = _log_rows(P)
    out = np.max(np.atleast_2d(B) @ L.T, axis=-1) / np.atleast_2d(B).max(axis=-1)
    return float(out[0]) if B.ndim == 1 else out


def trajectory_divergence(P, beta, lam):
    """Divergence along ``α^λ = e_k + (λ - 1) β`` for ``λ ∈ [0, ∞]``.

    ``β`` must lie in ``B_minus`` with ``β_k = 1``. At ``λ = 1`` the value is
    the derivation ``Δ^(k)_{-β}(P)`` and at ``λ = ∞`` the tropical divergence
    ``D^T_β(P)``. Elsewhere it is :func:`matrix_divergence` at ``α^λ``, which
    is undefined when ``α^λ`` is a basis vector (possible only at ``λ = 0``).
    """
    b = np.asarray(beta, dtype=float)
    k = beta_index(b)
    if abs(b[k] - 1.0) > TOL_PARAM:
        raise ValidationError("trajectory direction must have beta_k = 1")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if lam == 1:
        return matrix_derivation(P, k, -b)
    if lam == INF:
        return matrix_divergence_tropical(P, b)
    return matrix_divergence(P, trajectory_alpha(b, lam))


def monotone_threshold(beta):
    """``β_min / (β_min - 1)``: the trajectory is non-decreasing beyond it."""
    bmin = float(np.min(beta))
    return bmin / (bmin - 1.0)


def chernoff_divergence(P, grid_points=65, xtol=1e-8, tol_distinct=TOL_ENTRY):
    """Multiple Chernoff divergence ``min_{k≠ℓ} max_{α∈[0,1]} -log Σ_i p_i^α q_i^{1-α}``.

    Here ``p = p^(k)``, ``q = p^(ℓ)``; the inner objective equals
    ``(1 - α) D_α(p‖q)``. It is concave in ``α``, so the maximum is bracketed
    on a uniform grid and refined with a bounded scalar search.
    """
    P = as_tuple(P).astype(float)
    d = P.shape[1]
    if d < 2:
        raise ValidationError("Chernoff divergence needs at least two columns")
    L = _log_rows(P)
    grid = np.linspace(0.0, 1.0, grid_points)
    best = INF
    for k in range(d):
        for l in range(k + 1, d):
            if np.max(np.abs(P[:, k] - P[:, l])) <= tol_distinct:
                raise ColumnsNotDistinct(f"columns {k} and {l} coincide")
            a, b = L[:, k], L[:, l]

            def objective(t, a=a, b=b):
                return -logsumexp(t * a + (1.0 - t) * b)

            vals = np.array([objective(t) for t in grid])
            i = int(np.argmax(vals))
            lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_points - 1)]
            res = minimize_scalar(lambda t: -objective(t), bounds=(lo, hi),
                                  method="bounded", options={"xatol": xtol})
            value = max(vals[i], -res.fun)
            best = min(best, float(value))
    return best
