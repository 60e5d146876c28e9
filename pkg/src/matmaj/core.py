"""Vector and tuple algebra.

Vectors are 1-D numpy arrays of nonnegative entries. A tuple ``P`` of ``d``
vectors sharing a common support is stored as an ``(n, d)`` array whose
column ``k`` is the ``k``-th vector. Arrays of ``fractions.Fraction`` (object
dtype) are accepted everywhere so that exact arithmetic paths can reuse the
same code.

Kronecker products use i-major row order: the index of the first factor
varies slowest, matching ``numpy.kron``. The same order is used for every
column of a tuple, so rows of ``P ⊠ Q`` stay aligned.
"""

from fractions import Fraction

import numpy as np

from .errors import DimensionMismatch, SizeCapExceeded, ValidationError

TOL_ZERO = 1e-12
TOL_NORM = 1e-9
TOL_ENTRY = 1e-9
SIZE_CAP = 2**22


def _is_exact(values):
    # Exact mode needs at least one Fraction and no floats.
    return (any(isinstance(v, Fraction) for v in values)
            and all(isinstance(v, (Fraction, int)) and not isinstance(v, bool)
                    for v in values))


def as_vector(x, exact=None):
    """Validate ``x`` as a nonnegative vector and return it as an array.

    With ``exact=None`` a sequence containing Fractions (and otherwise only
    ints) becomes an object array of ``Fraction``; anything else becomes
    float64. ``exact=True`` forces Fractions, converting floats exactly.
    """
    if np.ndim(x) != 1:
        raise ValidationError(f"expected a 1-D vector, got shape {np.shape(x)}")
    if isinstance(x, np.ndarray) and x.dtype != object:
        arr = np.asarray(x, dtype=float)
        if exact:
            arr = np.array([Fraction(float(v)) for v in arr], dtype=object)
    else:
        flat = list(x)
        use_exact = _is_exact(flat) if exact is None else exact
        if use_exact:
            arr = np.array([Fraction(v) for v in flat], dtype=object)
        else:
            arr = np.array([float(v) for v in flat], dtype=float)
    if arr.size == 0:
        raise ValidationError("vectors must have at least one entry")
    if arr.dtype != object and not np.all(np.isfinite(arr)):
        raise ValidationError("vector entries must be finite")
    if any(v < 0 for v in arr):
        raise ValidationError("vector entries must be nonnegative")
    return arr


def as_prob_vector(x, tol=TOL_NORM):
    """Validate ``x`` as a probability vector (entries sum to one)."""
    arr = as_vector(x)
    total = sum(arr) if arr.dtype == object else float(arr.sum())
    if abs(float(total) - 1.0) > tol:
        raise ValidationError(f"probability vector sums to {float(total)!r}, not 1")
    return arr


def uniform(n):
    """Uniform probability vector of length ``n``."""
    if n < 1:
        raise ValidationError("uniform vector needs n >= 1")
    return np.full(n, 1.0 / n)


def support(x, tol=TOL_ZERO):
    """Indices of entries strictly greater than ``tol``."""
    x = np.asarray(x)
    if x.dtype == object:
        return np.array([i for i, v in enumerate(x) if v > 0], dtype=int)
    return np.flatnonzero(x > tol)


def norm0(x, tol=TOL_ZERO):
    """Support size ``‖x‖₀``."""
    return int(support(x, tol).size)


def norm1(x):
    """Total mass ``‖x‖₁`` of a nonnegative vector."""
    x = np.asarray(x)
    return sum(x) if x.dtype == object else float(x.sum())


def pad(x, length):
    """Append zeros to ``x`` until it has ``length`` entries."""
    x = np.asarray(x)
    if length < x.size:
        raise DimensionMismatch(f"cannot pad length {x.size} down to {length}")
    if x.dtype == object:
        return np.concatenate([x, np.array([Fraction(0)] * (length - x.size), dtype=object)])
    return np.concatenate([x, np.zeros(length - x.size)])


def pad_pair(x, y):
    """Zero-pad two vectors to a common length."""
    n = max(np.size(x), np.size(y))
    return pad(x, n), pad(y, n)


def direct_sum(x, y):
    """Concatenation ``x ⊕ y``."""
    return np.concatenate([as_vector(x), as_vector(y)])


def kron(x, y):
    """Kronecker product ``x ⊗ y`` in i-major order."""
    x, y = as_vector(x), as_vector(y)
    return np.multiply.outer(x, y).ravel()


def tensor_power(x, n, cap=SIZE_CAP):
    """``x^{⊗n}`` as an i-major iterated Kronecker product.

    Raises SizeCapExceeded when the result would have more than ``cap``
    entries.
    """
    x = as_vector(x)
    if int(n) != n or n < 1:
        raise ValidationError("tensor power order must be a positive integer")
    n = int(n)
    if x.size ** n > cap:
        raise SizeCapExceeded(f"{x.size}^{n} entries exceeds cap {cap}")
    out = x
    for _ in range(n - 1):
        out = np.multiply.outer(out, x).ravel()
    return out


def sort_desc(x):
    """Entries of ``x`` in non-increasing order."""
    x = np.asarray(x)
    if x.dtype == object:
        return np.array(sorted(x, reverse=True), dtype=object)
    return np.sort(x)[::-1]


def equiv(x, y, tol=TOL_ENTRY):
    """True iff ``x`` and ``y`` agree up to permutation and zero padding."""
    a, b = pad_pair(as_vector(x), as_vector(y))
    a, b = sort_desc(a), sort_desc(b)
    return all(abs(float(u) - float(v)) <= tol for u, v in zip(a, b))


def from_columns(columns):
    """Build an ``(n, d)`` tuple array from a list of ``d`` columns."""
    cols = [as_vector(c) for c in columns]
    if not cols:
        raise ValidationError("a tuple needs at least one column")
    n = cols[0].size
    if any(c.size != n for c in cols):
        raise DimensionMismatch("all columns of a tuple must have the same length")
    exact = any(c.dtype == object for c in cols)
    if exact:
        cols = [c if c.dtype == object else as_vector(c, exact=True) for c in cols]
        return np.array([[c[i] for c in cols] for i in range(n)], dtype=object)
    return np.column_stack(cols)


def as_tuple(P, normalized=False, tol=TOL_ZERO, tol_norm=TOL_NORM):
    """Validate an ``(n, d)`` array of columns sharing a common support.

    A 1-D input is treated as a single column. With ``normalized=True`` each
    column must sum to one.
    """
    arr = np.asarray(P)
    if arr.dtype != object:
        arr = np.asarray(P, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"tuple must be a nonempty (n, d) array, got shape {arr.shape}")
    if arr.dtype != object and not np.all(np.isfinite(arr)):
        raise ValidationError("tuple entries must be finite")
    if any(v < 0 for v in arr.ravel()):
        raise ValidationError("tuple entries must be nonnegative")
    nz = _nonzero_mask(arr, tol)
    rows_any = nz.any(axis=1)
    if not np.array_equal(rows_any, nz.all(axis=1)):
        bad = int(np.flatnonzero(rows_any & ~nz.all(axis=1))[0])
        raise ValidationError(f"columns do not share a common support (row {bad})")
    if not rows_any.any():
        raise ValidationError("tuple has empty support")
    if normalized:
        for k in range(arr.shape[1]):
            total = float(norm1(arr[:, k]))
            if abs(total - 1.0) > tol_norm:
                raise ValidationError(f"column {k} sums to {total!r}, not 1")
    return arr


def _nonzero_mask(arr, tol=TOL_ZERO):
    if arr.dtype == object:
        return np.vectorize(lambda v: v > 0, otypes=[bool])(arr)
    return arr > tol


def tuple_support(P, tol=TOL_ZERO):
    """Row indices in the common support of ``P``."""
    P = np.asarray(P)
    if P.ndim == 1:
        P = P[:, None]
    return np.flatnonzero(_nonzero_mask(P, tol).any(axis=1))


def column_norms(P):
    """Column sums of a tuple."""
    P = np.asarray(P)
    if P.dtype == object:
        return [sum(P[:, k]) for k in range(P.shape[1])]
    return P.sum(axis=0)


def _same_d(P, Q):
    P, Q = np.asarray(P), np.asarray(Q)
    if P.ndim == 1:
        P = P[:, None]
    if Q.ndim == 1:
        Q = Q[:, None]
    if P.shape[1] != Q.shape[1]:
        raise DimensionMismatch(f"tuples have d={P.shape[1]} and d={Q.shape[1]}")
    if (P.dtype == object) != (Q.dtype == object):
        if P.dtype == object:
            Q = Q.astype(object)
        else:
            P = P.astype(object)
    return P, Q


def tuple_boxplus(P, Q):
    """Row stacking ``P ⊞ Q`` (columnwise direct sum)."""
    P, Q = _same_d(P, Q)
    return np.vstack([P, Q])


def tuple_boxtimes(P, Q):
    """Columnwise Kronecker product ``P ⊠ Q`` with aligned i-major rows."""
    P, Q = _same_d(P, Q)
    d = P.shape[1]
    return (P[:, None, :] * Q[None, :, :]).reshape(-1, d)


def tuple_tensor_power(P, n, cap=SIZE_CAP):
    """``P^{⊠n}``; raises SizeCapExceeded past ``cap`` entries per column."""
    P = np.asarray(P)
    if P.ndim == 1:
        P = P[:, None]
    if int(n) != n or n < 1:
        raise ValidationError("tensor power order must be a positive integer")
    n = int(n)
    if P.shape[0] ** n > cap:
        raise SizeCapExceeded(f"{P.shape[0]}^{n} rows exceeds cap {cap}")
    out = P
    for _ in range(n - 1):
        out = tuple_boxtimes(out, P)
    return out


def tuple_equiv(P, Q, tol=TOL_ENTRY):
    """True iff ``P`` and ``Q`` have the same multiset of nonzero rows."""
    P, Q = _same_d(P, Q)
    rows_p = sorted(tuple(float(v) for v in r) for r in P[tuple_support(P)])
    rows_q = sorted(tuple(float(v) for v in r) for r in Q[tuple_support(Q)])
    if len(rows_p) != len(rows_q):
        return False
    return all(max(abs(a - b) for a, b in zip(r, s)) <= tol for r, s in zip(rows_p, rows_q))
