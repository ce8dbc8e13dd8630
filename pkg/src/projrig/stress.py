"""Self-stresses, their projective transport, and weavings of lines."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .realization import (ProjectiveTransformation, Realization, affine_chart,
                          meet, normalization_factor, normalize)
from .rigidity import RigidityMatrix, build_rigidity_matrix

EQUILIBRIUM_TOLERANCE = 1e-8

Incidence = tuple[str, str]


class WeavingError(ValueError):
    def __init__(self, message: str, edge=None):
        super().__init__(message)
        self.edge = edge


@dataclass(frozen=True)
class Stress:
    """A scalar per incidence; pairs not listed are zero."""

    coefficients: dict[Incidence, object]

    def __getitem__(self, inc: Incidence):
        return self.coefficients.get(inc, 0)

    @classmethod
    def from_vector(cls, incidences: Sequence[Incidence], w) -> "Stress":
        return cls({inc: w[i] for i, inc in enumerate(incidences)})

    def vector(self, incidences: Sequence[Incidence], exact: bool = True) -> np.ndarray:
        extra = set(self.coefficients) - set(incidences)
        if extra:
            raise ValueError(f"stress supported off the incidences: {sorted(extra)}")
        out = linalg.zeros((len(incidences),), exact)
        for i, inc in enumerate(incidences):
            v = self.coefficients.get(inc, 0)
            out[i] = linalg.to_fraction(v) if exact else float(v)
        return out

    @property
    def is_zero(self) -> bool:
        return all(v == 0 for v in self.coefficients.values())


def _normalize_first(w: np.ndarray) -> np.ndarray:
    exact = linalg.is_exact(w)
    tol = 0 if exact else 1e-12 * max(1.0, float(np.max(np.abs(w))))
    for x in w:
        if abs(x) > tol:
            return w / x
    return w


def cokernel_stresses(m: RigidityMatrix) -> list[Stress]:
    """Basis of row dependencies, each scaled so its first nonzero entry is 1."""
    left = linalg.left_kernel(m.matrix)
    incs = m.geometry.incidences
    return [Stress.from_vector(incs, _normalize_first(left[:, k])) for k in range(left.shape[1])]


def _sums(r: Realization, w: Stress):
    """Per point and per line weighted sums of the opposite coordinates."""
    g = r.geometry
    zero = (Fraction(0),) * 3 if r.exact else (0.0,) * 3
    at_point = {p: list(zero) for p in g.points}
    at_line = {l: list(zero) for l in g.lines}
    scale_p = {p: 0.0 for p in g.points}
    scale_l = {l: 0.0 for l in g.lines}
    for p, l in g.incidences:
        c = w[(p, l)]
        pv, lv = r.point(p), r.line(l)
        for k in range(3):
            at_point[p][k] += c * lv[k]
            at_line[l][k] += c * pv[k]
        if not r.exact:
            scale_p[p] = max(scale_p[p], abs(float(c)) * float(np.linalg.norm(lv)))
            scale_l[l] = max(scale_l[l], abs(float(c)) * float(np.linalg.norm(pv)))
    return at_point, at_line, scale_p, scale_l


def verify_equilibrium(r: Realization, w: Stress) -> bool:
    """Sum of w * l over lines through each point and of w * p over points on each line vanish."""
    r.require_complete()
    at_point, at_line, scale_p, scale_l = _sums(r, w)
    if r.exact:
        return all(x == 0 for s in (*at_point.values(), *at_line.values()) for x in s)
    for sums, scale in ((at_point, scale_p), (at_line, scale_l)):
        for k, s in sums.items():
            if max(abs(x) for x in s) > EQUILIBRIUM_TOLERANCE * max(1.0, scale[k]):
                return False
    return True


def coefficient_sums_vanish(r: Realization, w: Stress) -> bool:
    g = r.geometry
    per_point = {p: 0 for p in g.points}
    per_line = {l: 0 for l in g.lines}
    scale = 0.0
    for p, l in g.incidences:
        per_point[p] += w[(p, l)]
        per_line[l] += w[(p, l)]
        scale = max(scale, abs(float(w[(p, l)])))
    tol = 0 if r.exact else EQUILIBRIUM_TOLERANCE * max(1.0, scale)
    return all(abs(v) <= tol for v in (*per_point.values(), *per_line.values()))


def is_row_dependence(m: RigidityMatrix, w: Stress) -> bool:
    exact = m.exact
    vec = w.vector(m.geometry.incidences, exact)
    res = vec.dot(m.matrix)
    if exact:
        return all(x == 0 for x in res)
    scale = max(1.0, float(np.max(np.abs(vec))) * float(np.max(np.abs(m.matrix))))
    return bool(np.max(np.abs(res), initial=0.0) <= EQUILIBRIUM_TOLERANCE * scale)


@dataclass(frozen=True)
class StressEquivalence:
    row_dependence: bool
    equilibrium: bool
    sums_vanish: bool

    @property
    def agree(self) -> bool:
        """Row dependence holds iff equilibrium and vanishing sums both hold."""
        return self.row_dependence == (self.equilibrium and self.sums_vanish)


def chart_stress_equivalence(m: RigidityMatrix | None, r: Realization, w: Stress) -> StressEquivalence:
    affine_chart(r)
    m = m if m is not None else build_rigidity_matrix(r)
    return StressEquivalence(is_row_dependence(m, w), verify_equilibrium(r, w),
                             coefficient_sums_vanish(r, w))


def transport_stress(r: Realization, t: ProjectiveTransformation | np.ndarray, w: Stress) -> Stress:
    """Stress on the image of ``r`` under ``t``: scale by both normalization factors."""
    if not isinstance(t, ProjectiveTransformation):
        t = ProjectiveTransformation(t)
    a = t.matrix if r.exact else linalg.as_float(t.matrix)
    ainv_t = linalg.inverse(a).T
    dtype = object if r.exact else float
    lam = {p: normalization_factor(a.dot(np.array(r.point(p), dtype=dtype)), r.exact, 1e-12)
           for p in r.geometry.points}
    mu = {l: normalization_factor(ainv_t.dot(np.array(r.line(l), dtype=dtype)), r.exact, 1e-12)
          for l in r.geometry.lines}
    return Stress({(p, l): lam[p] * mu[l] * c for (p, l), c in w.coefficients.items()})


# --------------------------------------------------------------------------
# weavings


@dataclass(frozen=True)
class Weaving:
    """Directed graph whose vertices carry lines; edges cross at the line meets."""

    lines: dict[str, tuple]
    edges: tuple[tuple[str, str], ...]
    exact: bool = True

    def __post_init__(self):
        for v, l in self.lines.items():
            if (l[2] == 0) if self.exact else abs(l[2]) < 1e-12:
                raise WeavingError(f"line {v!r} passes through the origin")
        for e in self.edges:
            if e[0] not in self.lines or e[1] not in self.lines:
                raise WeavingError(f"edge {e} references an unknown vertex", e)
            self.crossing(e)

    @property
    def vertices(self) -> list[str]:
        return list(self.lines)

    def crossing(self, e: tuple[str, str]) -> tuple:
        """``(x, y, 1)`` where the two lines of edge ``e`` meet."""
        x = meet(self.lines[e[0]], self.lines[e[1]])
        scale = max(abs(float(c)) for c in x)
        if scale == 0 or (not self.exact and scale < 1e-12):
            raise WeavingError(f"lines of edge {e} coincide", e)
        if (x[2] == 0) if self.exact else abs(x[2]) <= 1e-12 * scale:
            raise WeavingError(f"lines of edge {e} are parallel", e)
        return normalize(x, self.exact)


def weaving_matrix(w: Weaving) -> np.ndarray:
    """Rows: three per vertex; column e adds +X_e at its tail and -X_e at its head."""
    verts = w.vertices
    idx = {v: i for i, v in enumerate(verts)}
    a = linalg.zeros((3 * len(verts), len(w.edges)), w.exact)
    for k, e in enumerate(w.edges):
        x = w.crossing(e)
        i, j = idx[e[0]], idx[e[1]]
        for c in range(3):
            a[3 * i + c, k] += x[c]
            a[3 * j + c, k] -= x[c]
    return a


def weaving_stress_basis(w: Weaving) -> np.ndarray:
    """Columns are edge scalars ``s_e`` solving the vertex equations."""
    return linalg.rank_and_kernel(weaving_matrix(w)).kernel


def weaving_residual(w: Weaving, s: Sequence) -> float:
    res = weaving_matrix(w).dot(np.array(list(s), dtype=object if w.exact else float))
    return max((abs(float(x)) for x in res), default=0.0)


def weaving_from_stress(r: Realization, w: Stress) -> tuple[Weaving, list]:
    """Weaving of the configuration lines carrying the line-restricted stress.

    At each point the first line through it is a hub; every other line j
    through the point gets the edge (j, hub) with scalar w(point, j).
    Pairs whose lines coincide have no crossing and are left out.
    """
    g = r.geometry
    edges, values = [], []
    coincide = 0
    for p in g.points:
        through = g.lines_through(p)
        if len(through) < 2:
            continue
        hub = through[0]
        for j in through[1:]:
            if _same_line(r, j, hub):
                coincide += 1
                continue
            edges.append((j, hub))
            values.append(w[(p, j)])
    weaving = Weaving({l: r.line(l) for l in g.lines}, tuple(edges), r.exact)
    return weaving, values


def _same_line(r: Realization, a: str, b: str) -> bool:
    la, lb = r.line(a), r.line(b)
    if r.exact:
        return la == lb
    return all(abs(x - y) <= 1e-9 for x, y in zip(la, lb))
