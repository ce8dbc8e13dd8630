"""Rank and null spaces over two backends.

Exact matrices are numpy arrays of ``dtype=object`` holding
:class:`fractions.Fraction` entries; they are reduced with fraction-free
(Bareiss) elimination.  Float matrices are ``float64`` arrays and use the
singular value decomposition with a relative rank threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

#: relative singular-value threshold, scaled by ``sigma_max * max(shape)``
FLOAT_RTOL = 1e-9


def is_exact(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    raise TypeError(f"cannot convert {x!r} to an exact rational")


def exact_array(rows) -> np.ndarray:
    """Build an object array of Fractions from nested sequences."""
    arr = np.array(rows, dtype=object)
    flat = arr.reshape(-1)
    for i, v in enumerate(flat):
        flat[i] = to_fraction(v)
    return flat.reshape(arr.shape)


def zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def _integer_rows(a: np.ndarray) -> list[list[int]]:
    rows = []
    for row in a:
        den = 1
        for v in row:
            den = lcm(den, v.denominator)
        rows.append([int(v * den) for v in row])
    return rows


def bareiss_echelon(a: np.ndarray) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form of an exact matrix.

    Returns the nonzero echelon rows (integers) and the pivot columns.
    """
    m = _integer_rows(a)
    nrows = len(m)
    ncols = a.shape[1] if a.ndim == 2 else 0
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        for i in range(r + 1, nrows):
            mi = m[i]
            f = mi[c]
            if f == 0:
                # still must apply the Bareiss scaling to keep exact division valid
                for j in range(c + 1, ncols):
                    mi[j] = (piv * mi[j]) // prev
            else:
                mr = m[r]
                for j in range(c + 1, ncols):
                    mi[j] = (piv * mi[j] - f * mr[j]) // prev
                mi[c] = 0
        prev = piv
        pivots.append(c)
        r += 1
    return m[:r], pivots


def _exact_rref(a: np.ndarray) -> tuple[list[list[Fraction]], list[int]]:
    echelon, pivots = bareiss_echelon(a)
    rows = [[Fraction(v) for v in row] for row in echelon]
    for i in range(len(rows) - 1, -1, -1):
        c = pivots[i]
        piv = rows[i][c]
        rows[i] = [v / piv for v in rows[i]]
        for k in range(i):
            f = rows[k][c]
            if f:
                rows[k] = [x - f * y for x, y in zip(rows[k], rows[i])]
    return rows, pivots


@dataclass(frozen=True)
class RankResult:
    rank: int
    kernel: np.ndarray  # columns span the null space
    singular_values: np.ndarray | None = None
    threshold: float | None = None

    @property
    def nullity(self) -> int:
        return self.kernel.shape[1]


def rank_and_kernel(a: np.ndarray, rtol: float = FLOAT_RTOL) -> RankResult:
    """Rank and a basis of the right null space (as columns)."""
    nrows, ncols = a.shape
    if is_exact(a):
        if nrows == 0:
            return RankResult(0, _identity_exact(ncols))
        rows, pivots = _exact_rref(a)
        free = [c for c in range(ncols) if c not in set(pivots)]
        kernel = zeros((ncols, len(free)), exact=True)
        for k, f in enumerate(free):
            kernel[f, k] = Fraction(1)
            for i, c in enumerate(pivots):
                kernel[c, k] = -rows[i][f]
        return RankResult(len(pivots), kernel)
    a = np.asarray(a, dtype=float)
    if nrows == 0 or ncols == 0:
        return RankResult(0, np.eye(ncols), np.zeros(0), 0.0)
    _, s, vt = np.linalg.svd(a)
    threshold = (s[0] if s.size else 0.0) * rtol * max(nrows, ncols)
    r = int(np.sum(s > threshold))
    return RankResult(r, vt[r:].T.copy(), s, threshold)


def rank(a: np.ndarray, rtol: float = FLOAT_RTOL) -> int:
    if is_exact(a):
        if a.shape[0] == 0 or a.shape[1] == 0:
            return 0
        return len(bareiss_echelon(a)[1])
    return rank_and_kernel(a, rtol).rank


def left_kernel(a: np.ndarray, rtol: float = FLOAT_RTOL) -> np.ndarray:
    """Basis of ``{w : w^T a = 0}`` as columns."""
    return rank_and_kernel(a.T.copy(), rtol).kernel


def _identity_exact(n: int) -> np.ndarray:
    out = zeros((n, n), exact=True)
    for i in range(n):
        out[i, i] = Fraction(1)
    return out


def identity(n: int, exact: bool) -> np.ndarray:
    return _identity_exact(n) if exact else np.eye(n)


def span_dimension(vectors: np.ndarray, rtol: float = FLOAT_RTOL) -> int:
    """Dimension of the span of the columns of ``vectors``."""
    if vectors.shape[1] == 0:
        return 0
    return rank(vectors.T.copy(), rtol)


def intersection_dimension(u: np.ndarray, v: np.ndarray, rtol: float = FLOAT_RTOL) -> int:
    """``dim(span U ∩ span V)`` for column bases of a common ambient space."""
    du, dv = span_dimension(u, rtol), span_dimension(v, rtol)
    joined = np.concatenate([u, v], axis=1)
    return du + dv - span_dimension(joined, rtol)


def inverse(a: np.ndarray) -> np.ndarray:
    """Inverse of a square matrix; exact matrices stay exact."""
    n = a.shape[0]
    if not is_exact(a):
        return np.linalg.inv(a)
    aug = np.concatenate([a, _identity_exact(n)], axis=1)
    rows, pivots = _exact_rref(aug)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise np.linalg.LinAlgError("singular matrix")
    return exact_array([row[n:] for row in rows[:n]])


def determinant(a: np.ndarray):
    if not is_exact(a):
        return float(np.linalg.det(a))
    a = [[to_fraction(v) for v in row] for row in a]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


def is_zero(x, tol: float = 0.0) -> bool:
    if isinstance(x, Fraction):
        return x == 0
    return abs(x) <= tol


def as_float(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=float)
