"""Homogeneous coordinates for the points and lines of an incidence geometry."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .geometry import IncidenceGeometry

DEFAULT_TOLERANCE = 1e-9
COINCIDENCE_TOLERANCE = 1e-7

Vec3 = tuple


class RealizationError(ValueError):
    pass


class MissingCoordinate(RealizationError):
    def __init__(self, kind: str, ident: str):
        super().__init__(f"no coordinates for {kind} {ident!r}")
        self.kind, self.ident = kind, ident


class ChartError(RealizationError):
    """The realization has no affine chart (z = 1 for points, c = 1 for lines)."""

    def __init__(self, message: str, ids: Sequence[str]):
        super().__init__(message)
        self.ids = list(ids)


class PointAtInfinity(ChartError):
    def __init__(self, ids):
        super().__init__(f"point(s) at infinity: {', '.join(ids)}", ids)


class LineThroughOrigin(ChartError):
    def __init__(self, ids):
        super().__init__(f"line(s) through the origin: {', '.join(ids)}", ids)


def _scalar(x, exact: bool):
    return linalg.to_fraction(x) if exact else float(x)


def normalize(v: Sequence, exact: bool = True, tol: float = 0.0) -> Vec3:
    """Representative whose last nonzero coordinate equals 1."""
    v = tuple(_scalar(x, exact) for x in v)
    if len(v) != 3:
        raise RealizationError(f"homogeneous vector needs 3 coordinates, got {len(v)}")
    scale = max((abs(x) for x in v), default=0)
    for x in reversed(v):
        if exact:
            if x != 0:
                return tuple(c / x for c in v)
        elif abs(x) > tol * max(1.0, scale):
            return tuple(c / x for c in v)
    raise RealizationError("the zero vector is not a projective element")


def normalization_factor(v: Sequence, exact: bool = True, tol: float = 0.0):
    """The scalar ``lam`` with ``v = lam * normalize(v)``."""
    for x in reversed(tuple(v)):
        if (x != 0) if exact else abs(x) > tol * max(1.0, max(abs(c) for c in v)):
            return x
    raise RealizationError("the zero vector is not a projective element")


def cross(u: Sequence, v: Sequence) -> Vec3:
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def dot(u: Sequence, v: Sequence):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def join(p: Sequence, q: Sequence) -> Vec3:
    """Line through two points (also: meet of two lines)."""
    return cross(p, q)


meet = join


def det3(a: Sequence, b: Sequence, c: Sequence):
    return dot(a, cross(b, c))


@dataclass(frozen=True)
class ProjectiveTransformation:
    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if not (isinstance(m, np.ndarray) and m.dtype == object):
            raw = np.asarray(m, dtype=object).reshape(-1)
            if all(isinstance(x, (int, np.integer, Fraction, str)) for x in raw):
                m = linalg.exact_array(m)
            else:
                m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise RealizationError("projective transformation must be 3x3")
        det = linalg.determinant(m)
        if (det == 0) if linalg.is_exact(m) else abs(det) < 1e-14 * max(1.0, float(np.abs(m).max()) ** 3):
            raise RealizationError("singular projective transformation")
        object.__setattr__(self, "matrix", m)

    @property
    def exact(self) -> bool:
        return linalg.is_exact(self.matrix)

    def inverse(self) -> "ProjectiveTransformation":
        return ProjectiveTransformation(linalg.inverse(self.matrix))

    def point_map(self, p: Sequence) -> Vec3:
        return tuple(self.matrix.dot(np.array(p, dtype=object if self.exact else float)))

    def line_matrix(self) -> np.ndarray:
        """Matrix acting on line coordinates: the inverse transpose."""
        return linalg.inverse(self.matrix).T.copy()


@dataclass(frozen=True)
class DegeneracyReport:
    coincident_points: list[tuple[str, str]] = field(default_factory=list)
    coincident_lines: list[tuple[str, str]] = field(default_factory=list)
    points_at_infinity: list[str] = field(default_factory=list)
    lines_through_origin: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (self.coincident_points or self.coincident_lines
                    or self.points_at_infinity or self.lines_through_origin)

    def as_dict(self) -> dict:
        return {
            "coincident_points": [list(p) for p in self.coincident_points],
            "coincident_lines": [list(p) for p in self.coincident_lines],
            "points_at_infinity": list(self.points_at_infinity),
            "lines_through_origin": list(self.lines_through_origin),
        }


@dataclass(frozen=True)
class Chart:
    points: dict[str, tuple]
    lines: dict[str, tuple]


class Realization:
    """Coordinates for every point and line of ``geometry``.

    Coordinates are stored as normalized representatives (last nonzero
    coordinate 1).  ``exact=True`` keeps Fractions throughout; otherwise
    floats are compared with the relative ``tolerance``.
    """

    def __init__(self, geometry: IncidenceGeometry, points: Mapping[str, Sequence],
                 lines: Mapping[str, Sequence], exact: bool = True,
                 tolerance: float = DEFAULT_TOLERANCE):
        self.geometry = geometry
        self.exact = exact
        self.tolerance = tolerance
        for ident in points:
            if not geometry.has_point(ident):
                raise RealizationError(f"coordinates given for unknown point {ident!r}")
        for ident in lines:
            if not geometry.has_line(ident):
                raise RealizationError(f"coordinates given for unknown line {ident!r}")
        zt = 0.0 if exact else tolerance * 1e-3
        self.points = {k: normalize(v, exact, zt) for k, v in points.items()}
        self.lines = {k: normalize(v, exact, zt) for k, v in lines.items()}

    def __repr__(self) -> str:
        mode = "exact" if self.exact else f"float(tol={self.tolerance:g})"
        return f"Realization({len(self.points)} points, {len(self.lines)} lines, {mode})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Realization):
            return NotImplemented
        return (self.geometry == other.geometry and self.exact == other.exact
                and self.points == other.points and self.lines == other.lines)

    def point(self, ident: str) -> Vec3:
        try:
            return self.points[ident]
        except KeyError:
            raise MissingCoordinate("point", ident) from None

    def line(self, ident: str) -> Vec3:
        try:
            return self.lines[ident]
        except KeyError:
            raise MissingCoordinate("line", ident) from None

    def require_complete(self) -> None:
        for p in self.geometry.points:
            self.point(p)
        for l in self.geometry.lines:
            self.line(l)

    def replace(self, points=None, lines=None, exact=None) -> "Realization":
        return Realization(self.geometry,
                           self.points if points is None else points,
                           self.lines if lines is None else lines,
                           self.exact if exact is None else exact,
                           self.tolerance)

    def to_float(self) -> "Realization":
        return self.replace(
            points={k: tuple(float(x) for x in v) for k, v in self.points.items()},
            lines={k: tuple(float(x) for x in v) for k, v in self.lines.items()},
            exact=False)

    def incidence_residual(self, p: str, l: str):
        return dot(self.line(l), self.point(p))

    def incidence_ok(self, p: str, l: str) -> bool:
        pv, lv = self.point(p), self.line(l)
        val = dot(lv, pv)
        if self.exact:
            return val == 0
        scale = max(1.0, float(np.linalg.norm(lv) * np.linalg.norm(pv)))
        return abs(val) <= self.tolerance * scale

    def max_residual(self) -> float:
        return max((abs(float(self.incidence_residual(p, l)))
                    for p, l in self.geometry.incidences), default=0.0)


def verify(r: Realization) -> list[tuple[str, str]]:
    """Incidences whose equation ``l . p = 0`` fails."""
    r.require_complete()
    return [(p, l) for p, l in r.geometry.incidences if not r.incidence_ok(p, l)]


def apply_transform(r: Realization, t: ProjectiveTransformation | np.ndarray) -> Realization:
    """Image of ``r``: points by ``T``, lines by ``T^{-T}``."""
    if not isinstance(t, ProjectiveTransformation):
        t = ProjectiveTransformation(t)
    a = t.matrix
    if r.exact and not t.exact:
        raise RealizationError("cannot apply a float transformation in exact mode")
    if not r.exact:
        a = linalg.as_float(a)
    ainv_t = linalg.inverse(a).T
    points = {k: tuple(a.dot(_vec(v, r.exact))) for k, v in r.points.items()}
    lines = {k: tuple(ainv_t.dot(_vec(v, r.exact))) for k, v in r.lines.items()}
    return r.replace(points=points, lines=lines)


def _vec(v, exact: bool) -> np.ndarray:
    return np.array(v, dtype=object if exact else float)


def _same(u, v, exact: bool) -> bool:
    if exact:
        return u == v
    return all(abs(a - b) <= COINCIDENCE_TOLERANCE for a, b in zip(u, v))


def _is_zero(x, exact: bool, tol: float) -> bool:
    return x == 0 if exact else abs(x) <= tol


def degeneracy_report(r: Realization) -> DegeneracyReport:
    """Coincident points/lines, points at infinity, lines through the origin."""
    r.require_complete()
    g = r.geometry
    tol = COINCIDENCE_TOLERANCE
    cp = [(a, b) for i, a in enumerate(g.points) for b in g.points[i + 1:]
          if _same(r.points[a], r.points[b], r.exact)]
    cl = [(a, b) for i, a in enumerate(g.lines) for b in g.lines[i + 1:]
          if _same(r.lines[a], r.lines[b], r.exact)]
    inf = [p for p in g.points if _is_zero(r.points[p][2], r.exact, tol)]
    org = [l for l in g.lines if _is_zero(r.lines[l][2], r.exact, tol)]
    return DegeneracyReport(cp, cl, inf, org)


def affine_chart(r: Realization) -> Chart:
    """Chart coordinates (x, y) per point and (a, b) per line."""
    r.require_complete()
    rep = degeneracy_report(r)
    if rep.points_at_infinity:
        raise PointAtInfinity(rep.points_at_infinity)
    if rep.lines_through_origin:
        raise LineThroughOrigin(rep.lines_through_origin)
    g = r.geometry
    return Chart({p: r.points[p][:2] for p in g.points}, {l: r.lines[l][:2] for l in g.lines})


def has_chart(r: Realization) -> bool:
    try:
        affine_chart(r)
    except ChartError:
        return False
    return True


def random_rational_transform(rng: random.Random, entries=(-3, -2, -1, 1, 2, 3, 0, 0)) -> ProjectiveTransformation:
    """Random invertible integer matrix with entries from a small set."""
    while True:
        m = linalg.exact_array([[rng.choice(entries) for _ in range(3)] for _ in range(3)])
        if linalg.determinant(m) != 0:
            return ProjectiveTransformation(m)


def auto_chart(r: Realization, seed: int = 0, max_tries: int = 200
               ) -> tuple[Realization, ProjectiveTransformation]:
    """Move ``r`` by a seeded random rational projective map until a chart exists.

    A candidate is rejected if it creates coincidences the input did not have.
    """
    before = degeneracy_report(r)
    rng = random.Random(seed)
    for _ in range(max_tries):
        t = random_rational_transform(rng)
        if not r.exact:
            t = ProjectiveTransformation(linalg.as_float(t.matrix))
        moved = apply_transform(r, t)
        rep = degeneracy_report(moved)
        if rep.points_at_infinity or rep.lines_through_origin:
            continue
        if (len(rep.coincident_points) > len(before.coincident_points)
                or len(rep.coincident_lines) > len(before.coincident_lines)):
            continue
        return moved, t
    raise ChartError("no chart-preserving transformation found", [])


def line_through(p: Sequence, q: Sequence, exact: bool = True) -> Vec3:
    return normalize(join(p, q), exact)


def intersection(l: Sequence, m: Sequence, exact: bool = True) -> Vec3:
    return normalize(meet(l, m), exact)


def as_fraction_vector(v) -> tuple:
    return tuple(Fraction(x) if not isinstance(x, Fraction) else x for x in v)
