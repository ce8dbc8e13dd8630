"""Combinatorial incidence geometries (P, L, I) and their counts."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class IncidenceGeometry:
    """A rank 2 incidence geometry: points, lines and point-on-line pairs.

    Identifiers are opaque strings; all matrices index points, lines and
    incidences by their position in declaration order.
    """

    points: tuple[str, ...]
    lines: tuple[str, ...]
    incidences: tuple[tuple[str, str], ...]
    _point_index: dict = field(init=False, repr=False, compare=False)
    _line_index: dict = field(init=False, repr=False, compare=False)

    def __init__(self, points: Iterable[str], lines: Iterable[str],
                 incidences: Iterable[tuple[str, str]]):
        points = tuple(str(p) for p in points)
        lines = tuple(str(l) for l in lines)
        incidences = tuple((str(p), str(l)) for p, l in incidences)
        for kind, ids in (("point", points), ("line", lines)):
            dup = [k for k, n in Counter(ids).items() if n > 1]
            if dup:
                raise GeometryError(f"duplicate {kind} identifier(s): {dup}")
        pidx = {p: i for i, p in enumerate(points)}
        lidx = {l: i for i, l in enumerate(lines)}
        seen = set()
        for p, l in incidences:
            if p not in pidx:
                raise GeometryError(f"incidence ({p}, {l}) references unknown point {p!r}")
            if l not in lidx:
                raise GeometryError(f"incidence ({p}, {l}) references unknown line {l!r}")
            if (p, l) in seen:
                raise GeometryError(f"duplicate incidence ({p}, {l})")
            seen.add((p, l))
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "lines", lines)
        object.__setattr__(self, "incidences", incidences)
        object.__setattr__(self, "_point_index", pidx)
        object.__setattr__(self, "_line_index", lidx)

    @classmethod
    def from_lines(cls, lines: dict[str, Iterable[str]], points: Iterable[str] | None = None):
        """Build from a mapping ``line -> points on it``.

        Points are declared in order of first appearance unless given.
        """
        order: list[str] = list(points) if points is not None else []
        incidences = []
        for l, pts in lines.items():
            for p in pts:
                if points is None and p not in order:
                    order.append(p)
                incidences.append((p, l))
        return cls(order, list(lines), incidences)

    def point_index(self, p: str) -> int:
        return self._point_index[p]

    def line_index(self, l: str) -> int:
        return self._line_index[l]

    def has_point(self, p: str) -> bool:
        return p in self._point_index

    def has_line(self, l: str) -> bool:
        return l in self._line_index

    def points_on(self, l: str) -> list[str]:
        return [p for p, m in self.incidences if m == l]

    def lines_through(self, p: str) -> list[str]:
        return [m for q, m in self.incidences if q == p]

    @property
    def num_columns(self) -> int:
        return 2 * len(self.lines) + 2 * len(self.points)

    def relabel(self, point_map: dict[str, str], line_map: dict[str, str]) -> "IncidenceGeometry":
        return IncidenceGeometry(
            [point_map[p] for p in self.points],
            [line_map[l] for l in self.lines],
            [(point_map[p], line_map[l]) for p, l in self.incidences],
        )


@dataclass(frozen=True)
class ConfigurationSignature:
    p: int
    l: int
    r: int | None
    k: int | None
    balanced: bool

    def __str__(self) -> str:
        if self.balanced:
            return f"{self.p}_{self.r}"
        r = "?" if self.r is None else self.r
        k = "?" if self.k is None else self.k
        return f"({self.p}_{r}, {self.l}_{k})"


def signature(g: IncidenceGeometry) -> ConfigurationSignature:
    """Point/line counts and the constant degrees, if any."""
    pdeg = Counter({p: 0 for p in g.points})
    ldeg = Counter({l: 0 for l in g.lines})
    for p, l in g.incidences:
        pdeg[p] += 1
        ldeg[l] += 1
    rs, ks = set(pdeg.values()), set(ldeg.values())
    r = rs.pop() if len(rs) == 1 else None
    k = ks.pop() if len(ks) == 1 else None
    balanced = r is not None and k is not None and r == k
    return ConfigurationSignature(len(g.points), len(g.lines), r, k, balanced)


def is_linear_space_like(g: IncidenceGeometry) -> bool:
    """Two lines share at most one point and two points at most one line."""
    on_line = {l: set() for l in g.lines}
    through = {p: set() for p in g.points}
    for p, l in g.incidences:
        on_line[l].add(p)
        through[p].add(l)
    for a, b in combinations(g.lines, 2):
        if len(on_line[a] & on_line[b]) > 1:
            return False
    for a, b in combinations(g.points, 2):
        if len(through[a] & through[b]) > 1:
            return False
    return True


def matroid_nonbases(g: IncidenceGeometry) -> set[frozenset[str]]:
    """Triples of distinct points lying on a common line.

    Every other triple of points is a basis of the rank 3 matroid derived
    from ``g``.
    """
    out: set[frozenset[str]] = set()
    for l in g.lines:
        for t in combinations(g.points_on(l), 3):
            out.add(frozenset(t))
    return out


@dataclass(frozen=True)
class SparsityCounts:
    excess: int
    minimally_counted: bool
    # None when the exhaustive subset check was skipped (size cap)
    subsets_ok: bool | None = None
    first_violation: tuple[tuple[str, str], ...] | None = None


def first_subset_violation(g: IncidenceGeometry):
    """Smallest non-empty ``I' ⊆ I`` with ``|I'| > 2|L(I')| + 2|P(I')| - 8``."""
    inc = g.incidences
    for size in range(1, len(inc) + 1):
        for sub in combinations(inc, size):
            n_pts = len({p for p, _ in sub})
            n_lines = len({l for _, l in sub})
            if size > 2 * n_lines + 2 * n_pts - 8:
                return sub
    return None


def sparsity_counts(g: IncidenceGeometry, subset_cap: int = 20) -> SparsityCounts:
    """``|I| - (2|P| + 2|L| - 8)`` and, for small geometries, the subset count.

    The subset search is exponential and only runs when ``|I| <= subset_cap``.
    """
    excess = len(g.incidences) - (2 * len(g.points) + 2 * len(g.lines) - 8)
    if len(g.incidences) > subset_cap:
        return SparsityCounts(excess, excess == 0)
    bad = first_subset_violation(g)
    return SparsityCounts(excess, excess == 0, bad is None, bad)
