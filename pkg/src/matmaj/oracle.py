"""Independent verification machinery: random instances, LP oracles, fuzzers.

Seeding: a trial batch with master seed ``s`` gives trial ``i`` the seed
``numpy.random.SeedSequence(s).spawn(trials)[i]``, so serial and parallel runs
of the same batch see identical instances.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .core import as_vector, pad_pair
from .criteria import build_grid
from .errors import NumericalFailure
from .majorization import TOL_CMP
from .monotones import (INF, matrix_derivation, matrix_divergence, matrix_divergence_tropical,
                        monotone_threshold, pairwise_kl, trajectory_divergence)


@dataclass(frozen=True)
class RandomSpec:
    """Seed, dimensions ``(n, m, d)`` and the fraction of structural zeros."""

    seed: int
    dims: tuple = (3, 3, 2)
    sparsity: float = 0.0


def _rng(seed):
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def trial_seeds(seed, trials):
    """Per-trial seed sequences derived from a master seed."""
    return np.random.SeedSequence(int(seed)).spawn(int(trials))


def _simplex_columns(rng, rows, cols, mask):
    X = rng.exponential(size=(rows, cols)) * mask
    return X / X.sum(axis=0, keepdims=True)


def random_stochastic(spec):
    """Column-stochastic ``m × n`` matrix; columns uniform on their faces.

    Each entry is zeroed independently with probability ``spec.sparsity``;
    a column left empty keeps one random entry.
    """
    n, m, _ = spec.dims
    rng = _rng(spec.seed)
    mask = rng.random((m, n)) >= spec.sparsity
    for j in np.flatnonzero(~mask.any(axis=0)):
        mask[rng.integers(m), j] = True
    return _simplex_columns(rng, m, n, mask)


def random_tuple(spec):
    """``(n, d)`` tuple of probability columns with a common support.

    Each row is dropped from the support with probability ``spec.sparsity``
    (at least one row is kept); columns are uniform on the remaining face.
    """
    n, _, d = spec.dims
    rng = _rng(spec.seed)
    keep = rng.random(n) >= spec.sparsity
    if not keep.any():
        keep[rng.integers(n)] = True
    mask = np.repeat(keep[:, None], d, axis=1)
    return _simplex_columns(rng, n, d, mask)


def random_rational_tuple(rng, n, d, max_weight=5, zero_rows=True):
    """``(n, d)`` object array of Fraction columns with common support."""
    while True:
        W = rng.integers(1, max_weight + 1, size=(n, d))
        if zero_rows and n > 1:
            W[rng.random(n) < 0.2] = 0
        if W.any():
            break
    P = np.empty((n, d), dtype=object)
    for k in range(d):
        total = int(W[:, k].sum())
        for i in range(n):
            P[i, k] = Fraction(int(W[i, k]), total)
    return P


def random_rational_stochastic(rng, m, n, max_weight=4):
    """Column-stochastic ``m × n`` object array of Fractions (zeros allowed)."""
    W = rng.integers(0, max_weight + 1, size=(m, n))
    for j in range(n):
        if W[:, j].sum() == 0:
            W[rng.integers(m), j] = 1
    T = np.empty((m, n), dtype=object)
    for j in range(n):
        total = int(W[:, j].sum())
        for i in range(m):
            T[i, j] = Fraction(int(W[i, j]), total)
    return T


def exact_product(T, P):
    """Exact matrix product of two object arrays of Fractions."""
    m, n = T.shape
    d = P.shape[1]
    out = np.empty((m, d), dtype=object)
    for i in range(m):
        for k in range(d):
            out[i, k] = sum((T[i, j] * P[j, k] for j in range(n)), Fraction(0))
    return out


def bistochastic_feasible(x, y, inequality=False):
    """Is there a doubly stochastic ``T`` with ``T x = y`` (or ``T x >= y``)?

    Solved as a linear program over the ``N × N`` entries of ``T`` after
    zero-padding to a common length ``N``; independent of the partial-sum
    criterion.
    """
    x, y = pad_pair(as_vector(x).astype(float), as_vector(y).astype(float))
    n = x.size
    rows_sum = np.kron(np.eye(n), np.ones((1, n)))
    cols_sum = np.kron(np.ones((1, n)), np.eye(n))
    apply = np.kron(np.eye(n), x[None, :])
    A_eq = np.vstack([rows_sum, cols_sum])
    b_eq = np.ones(2 * n)
    kwargs = {}
    if inequality:
        kwargs = {"A_ub": -apply, "b_ub": -y}
    else:
        A_eq = np.vstack([A_eq, apply])
        b_eq = np.concatenate([b_eq, y])
    res = linprog(np.zeros(n * n), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs",
                  **kwargs)
    if res.status == 2:
        return False
    if res.status != 0:
        raise NumericalFailure(f"bistochastic LP failed: {res.message}")
    return True


@dataclass
class FuzzReport:
    """Worst margins of ``monotone(P) - monotone(T P)`` over all trials."""

    trials: int
    violations: int
    worst_margin: float
    worst_trial: Optional[int]
    worst_family: Optional[str]
    family_worst: dict = field(default_factory=dict)


def _monotone_values(P, grid):
    kl = pairwise_kl(P)
    return {
        "divergence": matrix_divergence(P, grid.alpha_points),
        "tropical": matrix_divergence_tropical(P, grid.beta_points),
        "derivation": np.array([kl[k, l] for k, l in grid.kl_pairs]),
    }


def data_processing_fuzz(trials, seed, d=2, max_n=5, max_m=5, grid=None, tol=TOL_CMP,
                         transform="random"):
    """Check that every grid monotone decreases from ``P`` to ``T P``.

    ``transform`` is ``"random"`` (random stochastic ``T``, sparse half the
    time), ``"identity"`` or ``"collapse"`` (all rows merged into one).
    Returns a :class:`FuzzReport`; a violation is a margin below ``-tol``.
    """
    grid = build_grid(d) if grid is None else grid
    report = FuzzReport(int(trials), 0, INF, None, None,
                        {"divergence": INF, "tropical": INF, "derivation": INF})
    for i, child in enumerate(trial_seeds(seed, trials)):
        rng = np.random.default_rng(child)
        n = int(rng.integers(2, max_n + 1))
        m = int(rng.integers(1, max_m + 1))
        P = random_tuple(RandomSpec(int(rng.integers(2**63)), (n, m, d)))
        if transform == "identity":
            T = np.eye(n)
        elif transform == "collapse":
            T = np.ones((1, n))
        else:
            sparsity = 0.0 if rng.random() < 0.5 else 0.4
            T = random_stochastic(RandomSpec(int(rng.integers(2**63)), (n, m, d), sparsity))
        before, after = _monotone_values(P, grid), _monotone_values(T @ P, grid)
        for fam in before:
            margins = before[fam] - after[fam]
            if margins.size == 0:
                continue
            worst = float(margins.min())
            report.violations += int(np.sum(margins < -tol))
            report.family_worst[fam] = min(report.family_worst[fam], worst)
            if worst < report.worst_margin:
                report.worst_margin, report.worst_trial, report.worst_family = worst, i, fam
    return report


@dataclass
class LimitReport:
    """Errors of the trajectory against its derivation and tropical limits."""

    derivation_error: float
    tropical_error: float
    monotone_drop: float
    threshold: float
    passed: bool


def limit_check(P, beta, tolerance=1e-3, monotone_tol=1e-9, near_one=1e-5, far=1e4,
                lambdas=None):
    """Confirm both trajectory limits and monotonicity past the threshold.

    ``beta`` must have ``β_k = 1``. The derivation error is the larger of the
    gaps at ``λ = 1 ± near_one``; the tropical error is the gap at
    ``λ = far``. ``monotone_drop`` is the largest decrease between
    consecutive grid values of ``λ`` at or above ``β_min / (β_min - 1)``,
    including the endpoints ``λ = 1`` and ``λ = ∞``.
    """
    beta = np.asarray(beta, dtype=float)
    k = int(np.argmax(beta))
    deriv = matrix_derivation(P, k, -beta)
    trop = matrix_divergence_tropical(P, beta)
    derivation_error = max(abs(trajectory_divergence(P, beta, 1 + s * near_one) - deriv)
                           for s in (-1, 1))
    tropical_error = abs(trajectory_divergence(P, beta, far) - trop)
    threshold = monotone_threshold(beta)
    if lambdas is None:
        lambdas = build_grid(beta.size).lambda_points
    lam = sorted(v for v in set(lambdas) | {1.0, INF} if v >= threshold and v > 0)
    values = np.array([trajectory_divergence(P, beta, v) for v in lam])
    drop = float(max(0.0, np.max(values[:-1] - values[1:]))) if values.size > 1 else 0.0
    passed = (derivation_error <= tolerance and tropical_error <= tolerance
              and drop <= monotone_tol)
    return LimitReport(float(derivation_error), float(tropical_error), drop, threshold, passed)
