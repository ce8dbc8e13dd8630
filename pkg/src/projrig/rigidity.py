"""Projective rigidity matrix, trivial motions and rigidity verdicts."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from . import linalg
from .geometry import IncidenceGeometry
from .realization import Realization, affine_chart, det3


class PinError(ValueError):
    def __init__(self, message: str, triple: Sequence[str] = ()):
        super().__init__(message)
        self.triple = tuple(triple)


@dataclass
class RigidityMatrix:
    """``|I| x (2|L| + 2|P|)`` Jacobian of the chart incidence equations.

    Columns are ``[lines | points]``, two per element in declaration order.
    """

    matrix: np.ndarray
    geometry: IncidenceGeometry
    realization: Realization

    @property
    def exact(self) -> bool:
        return linalg.is_exact(self.matrix)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def column_labels(self) -> list[str]:
        return column_labels(self.geometry)

    def row_labels(self) -> list[str]:
        return [f"({p},{l})" for p, l in self.geometry.incidences]


def line_columns(g: IncidenceGeometry, l: str) -> slice:
    i = g.line_index(l)
    return slice(2 * i, 2 * i + 2)


def point_columns(g: IncidenceGeometry, p: str) -> slice:
    j = 2 * len(g.lines) + 2 * g.point_index(p)
    return slice(j, j + 2)


def column_labels(g: IncidenceGeometry) -> list[str]:
    out = []
    for l in g.lines:
        out += [f"{l}.a", f"{l}.b"]
    for p in g.points:
        out += [f"{p}.x", f"{p}.y"]
    return out


def build_rigidity_matrix(r: Realization) -> RigidityMatrix:
    """Row for incidence (p, l): ``(x, y)`` under ``l`` and ``(a, b)`` under ``p``."""
    chart = affine_chart(r)
    g = r.geometry
    m = linalg.zeros((len(g.incidences), g.num_columns), r.exact)
    for row, (p, l) in enumerate(g.incidences):
        m[row, line_columns(g, l)] = chart.points[p]
        m[row, point_columns(g, p)] = chart.lines[l]
    return RigidityMatrix(m, g, r)


def rank_and_kernel(m: RigidityMatrix | np.ndarray, rtol: float = linalg.FLOAT_RTOL) -> linalg.RankResult:
    a = m.matrix if isinstance(m, RigidityMatrix) else m
    return linalg.rank_and_kernel(a, rtol)


def lie_algebra_basis(exact: bool = True) -> list[np.ndarray]:
    """Traceless basis E11-E33, E22-E33, E12, E13, E21, E23, E31, E32."""
    one = Fraction(1) if exact else 1.0

    def unit(i, j):
        e = linalg.zeros((3, 3), exact)
        e[i, j] = one
        return e

    d1 = unit(0, 0) - unit(2, 2)
    d2 = unit(1, 1) - unit(2, 2)
    off = [unit(i, j) for i, j in ((0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1))]
    return [d1, d2] + off


def infinitesimal_motion(r: Realization, a: np.ndarray) -> np.ndarray:
    """Chart velocity of every element under ``exp(tA)`` at ``t = 0``."""
    chart = affine_chart(r)
    g = r.geometry
    v = linalg.zeros((g.num_columns,), r.exact)
    one = Fraction(1) if r.exact else 1.0
    at = a.T
    for p in g.points:
        x, y = chart.points[p]
        ap = a.dot(np.array([x, y, one], dtype=a.dtype))
        v[point_columns(g, p)] = (ap[0] - x * ap[2], ap[1] - y * ap[2])
    for l in g.lines:
        aa, bb = chart.lines[l]
        al = at.dot(np.array([aa, bb, one], dtype=a.dtype))
        v[line_columns(g, l)] = (-al[0] + aa * al[2], -al[1] + bb * al[2])
    return v


@dataclass
class TrivialMotions:
    vectors: np.ndarray  # columns, one per Lie algebra basis element
    span_dimension: int


def trivial_motion_basis(r: Realization) -> TrivialMotions:
    basis = lie_algebra_basis(r.exact)
    vecs = np.stack([infinitesimal_motion(r, a) for a in basis], axis=1)
    return TrivialMotions(vecs, linalg.span_dimension(vecs))


@dataclass
class Verdict:
    rank: int
    nullity: int
    rows: int
    columns: int
    trivial_span: int
    exact: bool
    singular_values: list[float] | None = None
    rank_threshold: float | None = None

    @property
    def nontrivial_dimension(self) -> int:
        return self.nullity - self.trivial_span

    @property
    def infinitesimally_rigid(self) -> bool:
        return self.nontrivial_dimension == 0

    @property
    def statically_rigid(self) -> bool | None:
        """Rank equals ``2|P| + 2|L| - 8``; only meaningful with full trivial span."""
        if self.trivial_span != 8:
            return None
        return self.rank == self.columns - 8

    @property
    def label(self) -> str:
        return "infinitesimally_rigid" if self.infinitesimally_rigid else "flexible"

    @property
    def singular_gap(self) -> float | None:
        """``sigma_rank / sigma_{rank+1}`` in float mode."""
        s = self.singular_values
        if s is None or self.rank == 0:
            return None
        if self.rank >= len(s):
            return float("inf")
        below = s[self.rank]
        return float("inf") if below == 0 else s[self.rank - 1] / below

    def as_dict(self) -> dict:
        out = {
            "verdict": self.label,
            "rank": self.rank,
            "nullity": self.nullity,
            "rows": self.rows,
            "columns": self.columns,
            "trivial_span": self.trivial_span,
            "nontrivial_dimension": self.nontrivial_dimension,
            "statically_rigid": self.statically_rigid,
            "mode": "exact" if self.exact else "float",
        }
        if not self.exact:
            gap = self.singular_gap
            out["rank_threshold"] = self.rank_threshold
            out["singular_gap"] = None if gap is None or gap == float("inf") else gap
            out["caveat"] = "float rank decided by a singular-value threshold"
        return out


def rigidity_verdict(r: Realization, rtol: float = linalg.FLOAT_RTOL) -> Verdict:
    m = build_rigidity_matrix(r)
    res = rank_and_kernel(m, rtol)
    triv = trivial_motion_basis(r)
    sv = None if res.singular_values is None else [float(x) for x in res.singular_values]
    return Verdict(res.rank, res.nullity, m.shape[0], m.shape[1], triv.span_dimension,
                   r.exact, sv, res.threshold)


@dataclass
class PinnedMatrix:
    matrix: np.ndarray
    pins: tuple[str, ...]
    free_columns: list[int]  # column indices of the full matrix kept

    def kernel(self) -> np.ndarray:
        return linalg.rank_and_kernel(self.matrix).kernel

    def expand(self, reduced: np.ndarray, ncols: int) -> np.ndarray:
        """Embed reduced vectors back into full column space (pins get 0)."""
        exact = linalg.is_exact(reduced)
        shape = (ncols,) + reduced.shape[1:]
        full = linalg.zeros(shape, exact)
        full[self.free_columns] = reduced
        return full


def check_general_position(r: Realization, pins: Sequence[str]) -> None:
    if len(pins) != 4 or len(set(pins)) != 4:
        raise PinError("pinning needs four distinct points")
    for p in pins:
        if not r.geometry.has_point(p):
            raise PinError(f"unknown pin {p!r}")
    for triple in combinations(pins, 3):
        d = det3(*(r.point(p) for p in triple))
        scale = max(1.0, *(float(np.linalg.norm(np.array(r.point(p), dtype=float))) for p in triple)) ** 3
        if (d == 0) if r.exact else abs(d) <= r.tolerance * scale:
            raise PinError(f"pinned points {', '.join(triple)} are collinear", triple)


def pin(r: Realization, pins: Sequence[str], m: RigidityMatrix | None = None) -> PinnedMatrix:
    """Rigidity matrix with the columns of four general-position points removed."""
    check_general_position(r, pins)
    m = m if m is not None else build_rigidity_matrix(r)
    g = r.geometry
    drop = set()
    for p in pins:
        s = point_columns(g, p)
        drop.update(range(s.start, s.stop))
    keep = [c for c in range(g.num_columns) if c not in drop]
    return PinnedMatrix(m.matrix[:, keep], tuple(pins), keep)
