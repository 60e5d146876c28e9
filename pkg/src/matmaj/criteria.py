"""Sufficient and necessary conditions for asymptotic and catalytic majorization.

Every check evaluates a family of monotone inequalities on a finite
parameter grid and returns a :class:`CheckReport`. A grid can only refute:
a strict verdict means every *sampled* inequality holds with margin above
``tol_strict``, not that the continuum of parameters has been verified.

Margins are always "lhs - rhs" of an inequality that should be positive, in
log units so that all families are comparable.
"""

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import as_prob_vector, as_tuple, norm0, pad_pair, sort_desc
from .errors import DimensionMismatch, ValidationError
from .majorization import TOL_CMP
from .monotones import (INF, h0_prime, matrix_divergence,
                        matrix_divergence_tropical, pairwise_kl, renyi_divergence,
                        renyi_entropy, shannon_entropy, trajectory_alpha)

TOL_STRICT = 1e-7
DEFAULT_LAMBDA_MAX = 64.0
MAX_GRID_D = 6
DEFAULT_RESOLUTION = {1: 16, 2: 16, 3: 16, 4: 8, 5: 4, 6: 4}


class Verdict(str, enum.Enum):
    STRICT = "StrictlySatisfied"
    NON_STRICT = "NonStrictlySatisfied"
    VIOLATED = "Violated"


@dataclass
class SpectrumGrid:
    """Finite sample of the test spectrum for tuples with ``d`` columns.

    ``alpha_points`` lie in ``A_plus ∪ A_minus`` minus the basis vectors;
    ``alpha_sources`` records how each was generated. ``beta_points`` are the
    trajectory directions (``β_k = 1``, negative part on a simplex lattice).
    ``lambda_points`` lists the trajectory parameters, including the markers
    ``1`` (derivation) and ``inf`` (tropical).
    """

    d: int
    resolution: int
    lambda_max: float
    alpha_points: np.ndarray
    alpha_sources: list
    beta_points: np.ndarray
    kl_pairs: list
    lambda_points: list
    unit_alphas: np.ndarray
    large_alphas: np.ndarray

    @property
    def negative_alphas(self):
        """Orders below zero used by the vector checks."""
        return -np.concatenate([self.unit_alphas, self.large_alphas])

    def metadata(self):
        return {
            "d": self.d,
            "resolution": self.resolution,
            "lambda_max": self.lambda_max,
            "n_alpha": int(len(self.alpha_points)),
            "n_beta": int(len(self.beta_points)),
            "n_kl_pairs": len(self.kl_pairs),
        }


def _compositions(total, parts):
    """All tuples of ``parts`` nonnegative ints summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _lambda_grids(lambda_max):
    above = {1.0 + 2.0 ** -j for j in range(13)}
    t = 2.0
    while t <= lambda_max:
        above.add(t)
        t *= 2.0
    if lambda_max > 1.0:
        above.add(float(lambda_max))
    above = sorted(v for v in above if v <= max(lambda_max, 2.0))
    below = sorted(1.0 - 2.0 ** -j for j in range(1, 13))
    return np.array(below), np.array(above)


def build_grid(d, resolution=None, lambda_max=DEFAULT_LAMBDA_MAX):
    """Deterministic test-spectrum sample for ``d`` columns.

    ``A_plus`` is sampled on the lattice ``{m / resolution}`` of the simplex,
    without basis vectors. Trajectories ``α^λ = e_k + (λ - 1) β`` are added for
    every direction ``β`` (``β_k = 1``, negative part ``-w`` with ``w`` on the
    ``(d-1)``-simplex lattice) and every ``λ`` in the grid: those with ``λ > 1``
    sample ``A_minus`` and those with ``λ < 1`` add points near the vertices of
    ``A_plus``. The construction is symmetric under column permutations and a
    grid at doubled resolution contains every point of the coarser one.
    """
    if d < 1:
        raise ValidationError("d must be at least 1")
    if d > MAX_GRID_D:
        raise ValidationError(f"grids are refused above d={MAX_GRID_D}")
    if resolution is None:
        resolution = DEFAULT_RESOLUTION[d]
    if resolution < 2:
        raise ValidationError("resolution must be at least 2")
    below, above = _lambda_grids(lambda_max)
    unit = np.array(sorted({m / resolution for m in range(1, resolution)} | set(below)))

    points, sources, seen = [], [], set()

    def add(alpha, source):
        key = tuple(np.round(alpha, 12) + 0.0)
        if key not in seen:
            seen.add(key)
            points.append(alpha)
            sources.append(source)

    if d >= 2:
        for comp in _compositions(resolution, d):
            if max(comp) == resolution:
                continue
            add(np.array(comp, dtype=float) / resolution, {"kind": "lattice"})
    betas = []
    if d >= 2:
        for k in range(d):
            for comp in _compositions(resolution, d - 1):
                w = np.array(comp, dtype=float) / resolution
                beta = np.insert(-w, k, 1.0)
                betas.append(beta)
        for beta in betas:
            k = int(np.argmax(beta))
            for lam in itertools.chain(below, above):
                add(trajectory_alpha(beta, lam),
                    {"kind": "trajectory", "k": k, "beta": beta.tolist(), "lambda": float(lam)})
    kl_pairs = [(k, l) for k in range(d) for l in range(d) if k != l]
    return SpectrumGrid(
        d=d,
        resolution=int(resolution),
        lambda_max=float(lambda_max),
        alpha_points=np.array(points).reshape(-1, d),
        alpha_sources=sources,
        beta_points=np.array(betas).reshape(-1, d),
        kl_pairs=kl_pairs,
        lambda_points=list(below) + [1.0] + list(above) + [INF],
        unit_alphas=unit,
        large_alphas=above,
    )


@dataclass
class CheckReport:
    """Verdict of a criterion scan.

    ``margin`` is the minimum over all sampled points of ``lhs - rhs``;
    ``worst_point`` names the family and parameter attaining it (first in
    enumeration order on ties). ``families`` holds the same summary per
    family. Points where both sides are infinite are counted as
    ``n_incomparable`` and never as strict.
    """

    criterion: str
    verdict: Verdict
    margin: float
    worst_point: Optional[dict]
    n_points: int
    n_strict: int
    n_nonstrict: int
    n_violated: int
    n_incomparable: int = 0
    families: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    internal_errors: list = field(default_factory=list)
    grid: Optional[dict] = None
    tol_cmp: float = TOL_CMP
    tol_strict: float = TOL_STRICT

    def to_dict(self):
        return {
            "criterion": self.criterion,
            "verdict": self.verdict.value,
            "margin": self.margin,
            "worst_point": self.worst_point,
            "counts": {
                "points": self.n_points,
                "strict": self.n_strict,
                "nonstrict": self.n_nonstrict,
                "violated": self.n_violated,
                "incomparable": self.n_incomparable,
            },
            "families": self.families,
            "extra": self.extra,
            "notes": list(self.notes),
            "internal_errors": list(self.internal_errors),
            "grid": self.grid,
            "tolerances": {"tol_cmp": self.tol_cmp, "tol_strict": self.tol_strict},
        }


class _Collector:
    def __init__(self, tol_cmp, tol_strict):
        self.tol_cmp = tol_cmp
        self.tol_strict = tol_strict
        self.families = {}
        self.order = []

    def add(self, family, params, margins):
        margins = np.asarray(margins, dtype=float).ravel()
        if len(params) != margins.size:
            raise ValueError("parameter and margin counts differ")
        if family not in self.families:
            self.families[family] = ([], [])
            self.order.append(family)
        self.families[family][0].extend(params)
        self.families[family][1].extend(margins.tolist())

    def classify(self, margins):
        m = np.asarray(margins, dtype=float)
        nan = np.isnan(m)
        strict = int(np.sum(~nan & (m > self.tol_strict)))
        violated = int(np.sum(~nan & (m < -self.tol_cmp)))
        return strict, violated, int(nan.sum())

    def report(self, criterion, grid=None, notes=(), extra=None):
        all_params, all_margins, summaries = [], [], {}
        for fam in self.order:
            params, margins = self.families[fam]
            all_params.extend({"family": fam, **p} for p in params)
            all_margins.extend(margins)
            summaries[fam] = _summarize(params, margins, *self.classify(margins))
        m = np.array(all_margins, dtype=float)
        strict, violated, incomparable = self.classify(m)
        n = int(m.size)
        worst, margin = None, math.nan
        finite = np.flatnonzero(~np.isnan(m))
        if finite.size:
            i = int(finite[np.argmin(m[finite])])
            worst, margin = all_params[i], float(m[i])
        if violated:
            verdict = Verdict.VIOLATED
        elif n and strict == n:
            verdict = Verdict.STRICT
        else:
            verdict = Verdict.NON_STRICT
        notes = list(notes)
        if incomparable:
            notes.append(f"{incomparable} point(s) incomparable at infinity")
        return CheckReport(
            criterion=criterion, verdict=verdict, margin=margin, worst_point=worst,
            n_points=n, n_strict=strict, n_nonstrict=n - strict - violated,
            n_violated=violated, n_incomparable=incomparable, families=summaries,
            extra=extra or {}, notes=notes, grid=grid, tol_cmp=self.tol_cmp,
            tol_strict=self.tol_strict)


def _summarize(params, margins, strict, violated, incomparable):
    m = np.asarray(margins, dtype=float)
    finite = np.flatnonzero(~np.isnan(m))
    out = {"points": int(m.size), "strict": strict, "violated": violated,
           "incomparable": incomparable, "margin": math.nan, "worst": None}
    if finite.size:
        i = int(finite[np.argmin(m[finite])])
        out["margin"] = float(m[i])
        out["worst"] = params[i]
    return out


def _diff(lhs, rhs):
    with np.errstate(invalid="ignore"):
        return np.asarray(lhs, dtype=float) - np.asarray(rhs, dtype=float)


def _vector_pair(p, q):
    p = as_prob_vector(p).astype(float)
    q = as_prob_vector(q).astype(float)
    p, q = pad_pair(sort_desc(p), sort_desc(q))
    return p, q


def _floats(values):
    return [float(v) for v in values]


def _vector_grid(grid):
    return build_grid(1) if grid is None else grid


GRID_NOTE = "finite parameter grid: strict verdicts are not certificates for the continuum"


def check_aubrun_nechita(p, q, grid=None, tol_cmp=TOL_CMP, tol_strict=TOL_STRICT):
    """``f_α(p) >= f_α(q)`` for all ``α >= 1`` (including ``α = ∞``).

    Equivalently ``H_α(p) <= H_α(q)``; this characterizes ``q`` lying in the
    closure of the vectors catalytically majorized by ``p``. Margins are
    ``H_α(q) - H_α(p)``.
    """
    p, q = _vector_pair(p, q)
    grid = _vector_grid(grid)
    col = _Collector(tol_cmp, tol_strict)
    alphas = [1.0] + _floats(grid.large_alphas) + [INF]
    col.add("renyi_entropy", [{"alpha": a} for a in alphas],
            [renyi_entropy(q, a) - renyi_entropy(p, a) for a in alphas])
    return col.report("aubrun-nechita", grid.metadata(), [GRID_NOTE])


def _power_margin(p, q, a):
    """Sign-adjusted margin for ``f_α(p) < f_α(q)`` (α in (0,1)) or
    ``f_α(p) > f_α(q)`` (α > 1); equal to ``H_α(q) - H_α(p)``."""
    return renyi_entropy(q, a) - renyi_entropy(p, a)


def _negative_margin(p, q, a):
    """Margin for ``f_α(p) > f_α(q)`` with ``α < 0``, scaled by ``1/(1-α)``."""
    sp, sq = p[p > 0], q[q > 0]
    lp = math.log(np.sum(sp ** a))
    lq = math.log(np.sum(sq ** a))
    return (lp - lq) / (1.0 - a)


def check_klimesh(p, q, grid=None, tol_cmp=TOL_CMP, tol_strict=TOL_STRICT):
    """Sufficient conditions for catalytic majorization of ``q`` by ``p``.

    Families: ``f_α(p) < f_α(q)`` for ``α ∈ (0, 1)``; ``H_1(p) < H_1(q)``;
    ``f_α(p) > f_α(q)`` for ``α > 1``; and either ``‖p‖₀ < ‖q‖₀``, or equal
    support sizes with ``H'_0(p) < H'_0(q)`` and ``f_α(p) > f_α(q)`` for
    ``α < 0``.

    The same conditions are re-evaluated in their divergence form
    ``D_α(p‖u) > D_α(q‖u)`` and ``D_α(u‖p) > D_α(u‖q)`` for ``α > 1/2``,
    with ``u`` uniform on the larger support. A sign disagreement between
    the two evaluations is recorded in ``internal_errors``.
    """
    p, q = _vector_pair(p, q)
    grid = _vector_grid(grid)
    col = _Collector(tol_cmp, tol_strict)
    unit, large = _floats(grid.unit_alphas), _floats(grid.large_alphas)
    col.add("f_alpha(0,1)", [{"alpha": a} for a in unit], [_power_margin(p, q, a) for a in unit])
    col.add("shannon", [{"alpha": 1.0}], [shannon_entropy(q) - shannon_entropy(p)])
    col.add("f_alpha(1,inf)", [{"alpha": a} for a in large],
            [_power_margin(p, q, a) for a in large])
    np_, nq = norm0(p), norm0(q)
    notes = [GRID_NOTE]
    if np_ != nq:
        col.add("support", [{"support_p": np_, "support_q": nq}], [math.log(nq) - math.log(np_)])
    else:
        notes.append("equal support sizes: H'_0 and negative orders are required")
        col.add("h0_prime", [{"alpha": 0.0}], [(h0_prime(q) - h0_prime(p)) / np_])
        neg = _floats(grid.negative_alphas)
        col.add("f_alpha(-inf,0)", [{"alpha": a} for a in neg],
                [_negative_margin(p, q, a) for a in neg])
    report = col.report("klimesh", grid.metadata(), notes)
    report.internal_errors.extend(_klimesh_cross_check(p, q, grid, tol_cmp))
    return report


def _klimesh_cross_check(p, q, grid, tol):
    """Compare divergence-form margins with the power-sum families."""
    n = max(norm0(p), norm0(q))
    u = np.zeros(p.size)
    u[:n] = 1.0 / n
    equal = norm0(p) == norm0(q)
    errors = []
    alphas = [a for a in list(grid.unit_alphas) + [1.0] + list(grid.large_alphas) if a > 0.5]

    def opposite(a, b):
        return (a > tol and b < -tol) or (a < -tol and b > tol)

    for a in alphas:
        direct = _diff(renyi_divergence(p, u, a), renyi_divergence(q, u, a))
        expected = shannon_entropy(q) - shannon_entropy(p) if a == 1 else _power_margin(p, q, a)
        if opposite(float(direct), expected):
            errors.append(f"direct divergence form disagrees at alpha={a}")
        reverse = float(_diff(renyi_divergence(u, p, a), renyi_divergence(u, q, a)))
        if math.isnan(reverse):
            continue
        if a < 1:
            expected = _power_margin(p, q, 1.0 - a)
        elif not equal:
            expected = math.log(norm0(q)) - math.log(norm0(p))
        elif a == 1:
            expected = h0_prime(q) - h0_prime(p)
        else:
            expected = _negative_margin(p, q, 1.0 - a)
        if opposite(reverse, expected):
            errors.append(f"reverse divergence form disagrees at alpha={a}")
    return errors


def check_jensen(p, q, grid=None, tol_cmp=TOL_CMP, tol_strict=TOL_STRICT):
    """``H_α(p) < H_α(q)`` for all ``α ∈ [0, ∞]``.

    Split into ``f_α(p) < f_α(q)`` for ``α ∈ [0, 1)`` (``α = 0`` compares
    support sizes), ``H_1(p) < H_1(q)``, and ``f_α(p) > f_α(q)`` for
    ``α ∈ (1, ∞]``. When all hold strictly, ``p^{⊗n}`` majorizes ``q^{⊗n}``
    for all large enough ``n``.
    """
    p, q = _vector_pair(p, q)
    grid = _vector_grid(grid)
    col = _Collector(tol_cmp, tol_strict)
    low = [0.0] + _floats(grid.unit_alphas)
    high = _floats(grid.large_alphas) + [INF]
    col.add("f_alpha[0,1)", [{"alpha": a} for a in low], [_power_margin(p, q, a) for a in low])
    col.add("shannon", [{"alpha": 1.0}], [shannon_entropy(q) - shannon_entropy(p)])
    col.add("f_alpha(1,inf]", [{"alpha": a} for a in high],
            [_power_margin(p, q, a) for a in high])
    return col.report("jensen", grid.metadata(), [GRID_NOTE])


def _tuple_pair(P, Q):
    P = as_tuple(P, normalized=True).astype(float)
    Q = as_tuple(Q, normalized=True).astype(float)
    if P.shape[1] != Q.shape[1]:
        raise DimensionMismatch(f"tuples have d={P.shape[1]} and d={Q.shape[1]}")
    return P, Q


def _matrix_grid(d, grid):
    grid = build_grid(d) if grid is None else grid
    if grid.d != d:
        raise DimensionMismatch(f"grid built for d={grid.d}, tuples have d={d}")
    return grid


def _alpha_params(grid):
    return [{"alpha": a.tolist(), "source": s} for a, s in zip(grid.alpha_points, grid.alpha_sources)]


def divergence_table(P, Q, grid):
    """Per-point values for the three tuple families.

    Returns a dict mapping family name to ``(params, values_P, values_Q)``.
    """
    out = {}
    if len(grid.alpha_points):
        out["divergence"] = (_alpha_params(grid), matrix_divergence(P, grid.alpha_points),
                             matrix_divergence(Q, grid.alpha_points))
    if len(grid.beta_points):
        out["tropical"] = ([{"beta": b.tolist()} for b in grid.beta_points],
                           matrix_divergence_tropical(P, grid.beta_points),
                           matrix_divergence_tropical(Q, grid.beta_points))
    if grid.kl_pairs:
        kp, kq = pairwise_kl(P), pairwise_kl(Q)
        out["kl"] = ([{"k": k, "l": l} for k, l in grid.kl_pairs],
                     np.array([kp[k, l] for k, l in grid.kl_pairs]),
                     np.array([kq[k, l] for k, l in grid.kl_pairs]))
    return out


def check_matrix_sufficient(P, Q, grid=None, tol_cmp=TOL_CMP, tol_strict=TOL_STRICT,
                            mu_pairwise=False):
    """Strict sufficient conditions for ``P^{⊠n} ⪰ Q^{⊠n}`` at large ``n``.

    Families: ``D_α(P) > D_α(Q)`` on sampled ``A_plus ∪ A_minus``;
    ``D^T_β(P) > D^T_β(Q)`` on sampled ``B_minus`` (``β_max = 1``); and
    ``D_1(p^(k)‖p^(ℓ)) > D_1(q^(k)‖q^(ℓ))`` for all ``k ≠ ℓ``.

    With ``mu_pairwise=True`` the weaker tropical condition that only
    compares pairwise ``D_∞`` is reported under ``extra``; it does not enter
    the verdict.
    """
    P, Q = _tuple_pair(P, Q)
    grid = _matrix_grid(P.shape[1], grid)
    col = _Collector(tol_cmp, tol_strict)
    for fam, (params, vp, vq) in divergence_table(P, Q, grid).items():
        col.add(fam, params, _diff(vp, vq))
    extra = {}
    if mu_pairwise:
        sub = _Collector(tol_cmp, tol_strict)
        pairs = grid.kl_pairs
        sub.add("pairwise_dinf", [{"k": k, "l": l} for k, l in pairs],
                [_diff(renyi_divergence(P[:, k], P[:, l], INF),
                       renyi_divergence(Q[:, k], Q[:, l], INF)) for k, l in pairs])
        extra["pairwise_dinf"] = sub.report("pairwise-dinf").to_dict()
    return col.report("matrix-sufficient", grid.metadata(), [GRID_NOTE], extra)


def check_matrix_necessary(P, Q, grid=None, tol_cmp=TOL_CMP, tol_strict=TOL_STRICT,
                           include_limits=True):
    """``D_α(P) >= D_α(Q)`` on sampled ``A_plus ∪ A_minus``.

    Necessary for asymptotic majorization, and for full-support tuples with
    distinct columns of ``P`` equivalent to approximate catalytic
    majorization. Since the grid stops at ``λ_max``, the trajectory limits
    are included by default as well: the tropical divergences (``λ → ∞``)
    and the pairwise KL divergences (``λ → 1``) obey the same non-strict
    inequality by continuity. ``include_limits=False`` restricts the check
    to the sampled alpha points.
    """
    P, Q = _tuple_pair(P, Q)
    grid = _matrix_grid(P.shape[1], grid)
    col = _Collector(tol_cmp, tol_strict)
    for fam, (params, vp, vq) in divergence_table(P, Q, grid).items():
        if fam == "divergence" or include_limits:
            col.add(fam, params, _diff(vp, vq))
    return col.report("matrix-necessary", grid.metadata(), [GRID_NOTE])


def check_relative(p1, p2, q1, q2, grid=None, tol_cmp=TOL_CMP, tol_strict=TOL_STRICT):
    """Relative majorization of dichotomies through Rényi divergences.

    Checks ``D_α(p1‖p2) > D_α(q1‖q2)`` and ``D_α(p2‖p1) > D_α(q2‖q1)`` for
    ``α ∈ [1/2, ∞]``. The sampled orders are exactly those of the ``d = 2``
    tuple grid: ``(a, 1 - a)`` with ``a >= 1/2`` becomes order ``a`` in the
    first ordering, otherwise order ``1 - a`` in the second.
    """
    vecs = [as_prob_vector(v).astype(float) for v in (p1, p2, q1, q2)]
    if vecs[0].size != vecs[1].size or vecs[2].size != vecs[3].size:
        raise DimensionMismatch("each pair must have equal lengths")
    p1, p2, q1, q2 = vecs
    grid = _matrix_grid(2, grid)
    col = _Collector(tol_cmp, tol_strict)

    def both(order, a):
        if order == 0:
            return _diff(renyi_divergence(p1, p2, a), renyi_divergence(q1, q2, a))
        return _diff(renyi_divergence(p2, p1, a), renyi_divergence(q2, q1, a))

    params, margins = [], []
    for a, src in zip(grid.alpha_points, grid.alpha_sources):
        order, t = (0, float(a[0])) if a[0] >= 0.5 else (1, float(a[1]))
        params.append({"alpha": a.tolist(), "source": src, "order": t,
                       "direction": "p1|p2" if order == 0 else "p2|p1"})
        margins.append(both(order, t))
    col.add("divergence", params, margins)
    params, margins = [], []
    for b in grid.beta_points:
        order = 0 if b[0] > 0 else 1
        params.append({"beta": b.tolist(), "order": INF})
        margins.append(both(order, INF))
    col.add("tropical", params, margins)
    col.add("kl", [{"k": k, "l": l} for k, l in grid.kl_pairs],
            [both(k, 1.0) for k, l in grid.kl_pairs])
    return col.report("relative", grid.metadata(), [GRID_NOTE])


def scan_rows(P, Q, grid):
    """Rows ``(family, parameter, value_P, value_Q, margin)`` over the grid.

    For ``d = 1`` the values are Rényi entropies ``H_α`` of the two vectors
    and the margin is ``H_α(q) - H_α(p)``.
    """
    P = as_tuple(P, normalized=True).astype(float)
    Q = as_tuple(Q, normalized=True).astype(float)
    rows = []
    if P.shape[1] == 1:
        p, q = P[:, 0], Q[:, 0]
        alphas = [0.0] + _floats(grid.unit_alphas) + [1.0] + _floats(grid.large_alphas) + [INF]
        for a in alphas:
            hp, hq = renyi_entropy(p, a), renyi_entropy(q, a)
            rows.append({"family": "renyi_entropy", "parameter": {"alpha": a},
                         "value_P": hp, "value_Q": hq, "margin": hq - hp})
        return rows
    for fam, (params, vp, vq) in divergence_table(P, Q, _matrix_grid(P.shape[1], grid)).items():
        for prm, a, b in zip(params, vp, vq):
            rows.append({"family": fam, "parameter": prm, "value_P": float(a),
                         "value_Q": float(b), "margin": float(_diff(a, b))})
    return rows
