"""Exact-rational linear feasibility by the two-phase simplex method.

Only phase 1 is needed: we look for ``x >= 0`` with ``A x = b`` by
minimizing the sum of artificial variables. Pivoting uses Bland's rule, so
the method terminates without any tolerance.
"""

from fractions import Fraction


def feasible_point(A, b):
    """Return an exact nonnegative solution of ``A x = b``, or None.

    ``A`` is a list of rows and ``b`` a list of right-hand sides; entries may
    be ints or Fractions. The returned list holds Fractions.
    """
    m = len(A)
    nv = len(A[0]) if m else 0
    rows = []
    for i in range(m):
        sign = -1 if b[i] < 0 else 1
        row = [Fraction(sign * a) for a in A[i]]
        row += [Fraction(int(i == r)) for r in range(m)]
        row.append(Fraction(sign * b[i]))
        rows.append(row)
    width = nv + m + 1
    # Reduced costs of the phase-1 objective (sum of artificials).
    cost = [Fraction(0)] * width
    for row in rows:
        for j in range(nv):
            cost[j] -= row[j]
        cost[-1] -= row[-1]
    basis = [nv + i for i in range(m)]

    while True:
        enter = next((j for j in range(nv + m) if cost[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i, row in enumerate(rows):
            if row[enter] > 0:
                ratio = row[-1] / row[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            # Phase-1 is bounded below by zero, so this cannot happen.
            raise ArithmeticError("unbounded phase-1 problem")
        _pivot(rows, cost, leave, enter)
        basis[leave] = enter

    if cost[-1] != 0:
        return None
    x = [Fraction(0)] * nv
    for i, var in enumerate(basis):
        if var < nv:
            x[var] = rows[i][-1]
    return x


def _pivot(rows, cost, r, c):
    pivot_row = rows[r]
    p = pivot_row[c]
    if p != 1:
        pivot_row[:] = [v / p for v in pivot_row]
    nonzero = [j for j, v in enumerate(pivot_row) if v != 0]
    for i, row in enumerate(rows):
        if i != r and row[c] != 0:
            f = row[c]
            for j in nonzero:
                row[j] -= f * pivot_row[j]
    if cost[c] != 0:
        f = cost[c]
        for j in nonzero:
            cost[j] -= f * pivot_row[j]
