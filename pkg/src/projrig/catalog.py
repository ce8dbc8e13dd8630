"""Built-in configurations with their realizations and symmetry groups."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as F
from functools import lru_cache
from math import cos, pi, sin, sqrt

import numpy as np

from . import linalg
from .geometry import IncidenceGeometry
from .realization import Realization, intersection, line_through, verify
from .symmetry import Correlation, CorrelationGroup


class CatalogError(KeyError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    geometry: IncidenceGeometry
    realization: Realization
    groups: dict[str, CorrelationGroup] = field(default_factory=dict)
    pins: tuple[str, ...] = ()
    notes: str = ""

    @property
    def exact(self) -> bool:
        return self.realization.exact


def _finish(name, geometry, points, lines, exact=True, groups=None, pins=(), notes=""):
    r = Realization(geometry, points, lines, exact=exact)
    bad = verify(r)
    if bad:
        raise AssertionError(f"catalog entry {name} fails incidences {bad}")
    return CatalogEntry(name, geometry, r, groups or {}, tuple(pins), notes)


def _lines_from_points(geometry, points, exact=True):
    """Each line as the join of its first two points."""
    out = {}
    for l in geometry.lines:
        on = geometry.points_on(l)
        out[l] = line_through(points[on[0]], points[on[1]], exact)
    return out


# --------------------------------------------------------------------------
# Desargues 10_3


DESARGUES_LINES = {
    "pa": ["p", "a", "a'"], "pb": ["p", "b", "b'"], "pc": ["p", "c", "c'"],
    "ab": ["a", "b", "x"], "a'b'": ["a'", "b'", "x"],
    "ac": ["a", "c", "y"], "a'c'": ["a'", "c'", "y"],
    "bc": ["b", "c", "z"], "b'c'": ["b'", "c'", "z"],
    "axis": ["x", "y", "z"],
}
DESARGUES_POINTS = ["a", "b", "c", "a'", "b'", "c'", "p", "x", "y", "z"]


def desargues_realization(p, a, b, c, ratios) -> Realization:
    """Perspective triangles: ``a' = p + s_a (a - p)`` etc., axis points by meets.

    Points are affine pairs; ``ratios`` are the three ``s`` values.  The
    result is exact when the inputs are rational.
    """
    h = lambda v: (F(v[0]), F(v[1]), F(1))
    pts = {"p": h(p), "a": h(a), "b": h(b), "c": h(c)}
    for name, s in zip("abc", ratios):
        s = F(s)
        q = pts[name]
        pts[name + "'"] = (pts["p"][0] + s * (q[0] - pts["p"][0]), pts["p"][1] + s * (q[1] - pts["p"][1]), F(1))
    j = lambda u, v: line_through(pts[u], pts[v])
    pts["x"] = intersection(j("a", "b"), j("a'", "b'"))
    pts["y"] = intersection(j("a", "c"), j("a'", "c'"))
    pts["z"] = intersection(j("b", "c"), j("b'", "c'"))
    g = IncidenceGeometry.from_lines(DESARGUES_LINES, points=DESARGUES_POINTS)
    return Realization(g, pts, _lines_from_points(g, pts))


@lru_cache(maxsize=None)
def desargues() -> CatalogEntry:
    """Two triangles abc, a'b'c' perspective from p, with axis points x, y, z.

    a' = (1/4, 5/4), b' = (-1/4, 7/4), c' = (1, 7/4) divide pa, pb, pc in the
    ratios 2/5, 1/2, 3/5; x = ab ^ a'b', y = ac ^ a'c', z = bc ^ b'c'.
    """
    r = desargues_realization(("1/4", "1/4"), ("1/4", "11/4"), ("-3/4", "13/4"), ("3/2", "11/4"),
                              ("2/5", "1/2", "3/5"))
    return _finish("desargues", r.geometry, r.points, r.lines,
                   pins=("a", "b", "c", "p"),
                   notes="Desargues 10_3: triangles perspective from p; axis points collinear")


# --------------------------------------------------------------------------
# complete quadrilateral


_QUAD_LINES = {"l0": ["p0", "p1", "p2"], "l1": ["p0", "p3", "p4"],
               "l2": ["p1", "p4", "p5"], "l3": ["p2", "p3", "p5"]}


def _quad_geometry() -> IncidenceGeometry:
    return IncidenceGeometry.from_lines(_QUAD_LINES, points=[f"p{i}" for i in range(6)])


@lru_cache(maxsize=None)
def complete_quadrilateral(generic: bool = True) -> CatalogEntry:
    """Four lines and their six crossings.

    ``generic=False`` is the collapsed position where all lines are y = 1;
    that realization carries a self-stress.
    """
    g = _quad_geometry()
    if generic:
        h = lambda x, y: (F(x), F(y), F(1))
        # p5 = l2 ^ l3; no line passes through the origin
        pts = {"p0": h(1, 3), "p1": h(3, 4), "p2": h(5, 5),
               "p3": h(3, 2), "p4": h(5, 1)}
        pts["p5"] = intersection(line_through(pts["p1"], pts["p4"]), line_through(pts["p2"], pts["p3"]))
        return _finish("quadrilateral", g, pts, _lines_from_points(g, pts), pins=("p0", "p2", "p4", "p5"),
                       notes="complete quadrilateral, four lines in general position")
    xs = {"p0": -2, "p1": 8, "p2": 3, "p3": 0, "p4": -1, "p5": 2}
    pts = {k: (F(x), F(1), F(1)) for k, x in xs.items()}
    lines = {l: (F(0), F(-1), F(1)) for l in g.lines}
    return _finish("quadrilateral-collinear", g, pts, lines,
                   notes="complete quadrilateral collapsed onto y = 1 (stressed position)")


def quadrilateral_stress() -> dict[tuple[str, str], F]:
    """Self-stress of the collapsed quadrilateral, keyed by (point, line)."""
    base = {("p0", "l0"): 1, ("p1", "l0"): 1, ("p2", "l0"): -2,
            ("p3", "l1"): -1, ("p4", "l1"): 2, ("p5", "l2"): 3}
    # each point lies on two lines; its second coefficient is the negative
    partner = {"p0": "l1", "p1": "l2", "p2": "l3", "p3": "l3", "p4": "l2", "p5": "l3"}
    out = {}
    for (p, l), w in base.items():
        out[(p, l)] = F(w)
        out[(p, partner[p])] = F(-w)
    return out


# --------------------------------------------------------------------------
# cyclic (astral) configurations, float


def _rot(v, k: int, n: int = 5):
    a = 2 * pi * k / n
    return (cos(a) * v[0] - sin(a) * v[1], sin(a) * v[0] + cos(a) * v[1])


def _circle_through(a, b, c):
    """Center and squared radius of the circle through three points."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    return (ux, uy), (ax - ux) ** 2 + (ay - uy) ** 2


def _circle_line(center, r2, p, q):
    """The two intersections of a circle with line pq, ordered by distance from O."""
    dx, dy = q[0] - p[0], q[1] - p[1]
    fx, fy = p[0] - center[0], p[1] - center[1]
    a = dx * dx + dy * dy
    b = 2 * (fx * dx + fy * dy)
    c = fx * fx + fy * fy - r2
    disc = b * b - 4 * a * c
    if disc < 0:
        raise ValueError("circle misses the line")
    roots = [(-b + s * sqrt(disc)) / (2 * a) for s in (1, -1)]
    pts = [(p[0] + t * dx, p[1] + t * dy) for t in roots]
    return sorted(pts, key=lambda v: -(v[0] ** 2 + v[1] ** 2))


def _h(v):
    return (float(v[0]), float(v[1]), 1.0)


def _join(u, v):
    return line_through(_h(u) if len(u) == 2 else u, _h(v) if len(v) == 2 else v, exact=False)


def _meet(l, m):
    return intersection(l, m, exact=False)


def _cyclic_base(root: int):
    v = [(cos(2 * pi * i / 5), sin(2 * pi * i / 5)) for i in range(5)]
    lines_l = [_join(v[i], v[(i + 2) % 5]) for i in range(5)]
    # circle through v1, O and v4 (= v_{-1}); w0 on it and on l0
    center, r2 = _circle_through(v[1], (0.0, 0.0), v[4])
    w0 = _circle_line(center, r2, v[0], v[2])[root]
    w = [_rot(w0, i) for i in range(5)]
    # m_i = w_i w_{i+2}; by construction it passes through v_{i+1}
    lines_m = [_join(w[i], w[(i + 2) % 5]) for i in range(5)]
    return v, w, lines_l, lines_m


@lru_cache(maxsize=None)
def cyclic_10_3(root: int = 0) -> CatalogEntry:
    """Cyclic 10_3: the 5-gon v, its star lines l, and the rotated family w, m.

    ``root`` picks the circle/line intersection: 0 is the one farther from O.
    """
    v, w, ll, lm = _cyclic_base(root)
    lines_on = {}
    for i in range(5):
        lines_on[f"l{i}"] = [f"v{i}", f"v{(i + 2) % 5}", f"w{i}"]
        lines_on[f"m{i}"] = [f"v{(i + 1) % 5}", f"w{i}", f"w{(i + 2) % 5}"]
    g = IncidenceGeometry.from_lines(lines_on, points=[f"v{i}" for i in range(5)] + [f"w{i}" for i in range(5)])
    pts = {f"v{i}": _h(v[i]) for i in range(5)} | {f"w{i}": _h(w[i]) for i in range(5)}
    lines = {f"l{i}": ll[i] for i in range(5)} | {f"m{i}": lm[i] for i in range(5)}
    return _finish("cyclic-10_3", g, pts, lines, exact=False, groups={"rotation": rotation_group()},
                   pins=("v0", "v1", "v2", "v3"),
                   notes=f"cyclic 10_3 from the regular pentagon (root choice {root})")


@lru_cache(maxsize=None)
def cyclic_20_4(root: int = 0, root2: int = 0) -> CatalogEntry:
    """Cyclic 20_4: the 10_3 construction run twice, completed by u and o.

    The second circle passes through v1, O, v3 and meets l0 in x0.  Then
    n_i = x_i x_{i+2}, u_i = m_i ^ n_i and o_i = u_i u_{i+2}.
    """
    v, w, ll, lm = _cyclic_base(root)
    center, r2 = _circle_through(v[1], (0.0, 0.0), v[3])
    x0 = _circle_line(center, r2, v[0], v[2])[root2]
    x = [_rot(x0, i) for i in range(5)]
    ln = [_join(x[i], x[(i + 2) % 5]) for i in range(5)]
    u = [_meet(lm[i], ln[i]) for i in range(5)]
    lo = [_join(u[i], u[(i + 2) % 5]) for i in range(5)]
    lines_on = {}
    for i in range(5):
        lines_on[f"l{i}"] = [f"v{i}", f"v{(i + 2) % 5}", f"w{i}", f"x{i}"]
        lines_on[f"m{i}"] = [f"v{(i + 1) % 5}", f"w{i}", f"w{(i + 2) % 5}", f"u{i}"]
        lines_on[f"n{i}"] = [f"v{(i + 3) % 5}", f"x{i}", f"x{(i + 2) % 5}", f"u{i}"]
        lines_on[f"o{i}"] = [f"w{(i + 3) % 5}", f"x{(i + 1) % 5}", f"u{i}", f"u{(i + 2) % 5}"]
    order = [f"{k}{i}" for k in "vwxu" for i in range(5)]
    g = IncidenceGeometry.from_lines(lines_on, points=order)
    pts = {}
    for i in range(5):
        pts[f"v{i}"], pts[f"w{i}"], pts[f"x{i}"] = _h(v[i]), _h(w[i]), _h(x[i])
        pts[f"u{i}"] = u[i]
    lines = {}
    for i in range(5):
        lines[f"l{i}"], lines[f"m{i}"], lines[f"n{i}"], lines[f"o{i}"] = ll[i], lm[i], ln[i], lo[i]
    return _finish("cyclic-20_4", g, pts, lines, exact=False, groups={"rotation": rotation_group()},
                   pins=("v0", "v1", "v2", "v3"),
                   notes=f"cyclic 20_4 from two pentagon constructions (root choices {root}, {root2})")


def rotation_group() -> CorrelationGroup:
    """Rotations by multiples of 2 pi / 5 about the origin (float)."""
    a = 2 * pi / 5
    rot = Correlation(np.array([[cos(a), -sin(a), 0.0], [sin(a), cos(a), 0.0], [0.0, 0.0, 1.0]]))
    return CorrelationGroup.generate([rot])


# --------------------------------------------------------------------------
# D4-symmetric configuration


#: rational rotation conjugating the centered figure so no line meets the origin
D4_FRAME = linalg.exact_array([[F(1, 3), F(2, 3), F(2, 3)],
                               [F(2, 3), F(1, 3), F(-2, 3)],
                               [F(2, 3), F(-2, 3), F(1, 3)]])


def _d4_centered():
    h = lambda x, y: (F(x), F(y), F(1))
    # q0, q1 on the dashed line y = 0; p0 chosen above; the rest by reflection
    pts = {
        "p0": h("-2/3", 1), "p1": h("2/3", 1), "p2": h("2/3", -1), "p3": h("-2/3", -1),
        "q0": h("-4/3", 0), "q1": h("4/3", 0),
        # v0 = (q1 p2) ^ (y = 1), the others by symmetry
        "v0": h(-2, 1), "v1": h(2, 1), "v2": h(-2, -1), "v3": h(2, -1),
        # u0 = (q0 p0) ^ (x = 0), u1 its mirror image
        "u0": h(0, 2), "u1": h(0, -2),
        "c": h(0, 0),
    }
    lines_on = {
        "top": ["v0", "p0", "p1", "v1"], "bottom": ["v2", "p3", "p2", "v3"],
        "dashed": ["q0", "c", "q1"], "dotted": ["u0", "c", "u1"],
        "s0": ["v2", "q0", "p0", "u0"], "s1": ["v3", "q1", "p1", "u0"],
        "s2": ["u1", "q0", "p3", "v0"], "s3": ["u1", "q1", "p2", "v1"],
        "d0": ["v2", "c", "v1"], "d1": ["v3", "c", "v0"],
        "d2": ["p3", "c", "p1"], "d3": ["p2", "c", "p0"],
    }
    return pts, lines_on


@lru_cache(maxsize=None)
def d4_configuration() -> CatalogEntry:
    """13 points, 12 lines and 42 incidences with dihedral symmetry of order 4.

    Built centered at the origin with mirrors y = 0 (dashed) and x = 0
    (dotted), then moved by the rational rotation ``D4_FRAME`` because six
    of the lines pass through the center.  The groups are conjugated along.
    """
    pts0, lines_on = _d4_centered()
    order = ["p0", "p1", "p2", "p3", "q0", "q1", "v0", "v1", "v2", "v3", "u0", "u1", "c"]
    g = IncidenceGeometry.from_lines(lines_on, points=order)
    lines0 = _lines_from_points(g, pts0)
    rot = D4_FRAME
    move = lambda v: tuple(rot.dot(np.array(v, dtype=object)))
    pts = {k: move(v) for k, v in pts0.items()}
    lines = {k: move(v) for k, v in lines0.items()}

    def conj(diag):
        m = np.diag(np.array([F(d) for d in diag], dtype=object))
        return Correlation(rot.dot(m).dot(rot.T))

    dashed, dotted = conj((1, -1, 1)), conj((-1, 1, 1))
    groups = {
        "dashed": CorrelationGroup.generate([dashed]),
        "dotted": CorrelationGroup.generate([dotted]),
        "d4": CorrelationGroup.generate([dashed, dotted]),
    }
    return _finish("d4", g, pts, lines, groups=groups, pins=("p0", "p1", "p2", "u0"),
                   notes="configuration with D4 symmetry: two mirrors and a half-turn")


# --------------------------------------------------------------------------
# autopolar hexagon


AUTOPOLAR_INCIDENCES = [
    # one member per incidence orbit first (i0..i7), then their partners
    ("p1", "L1"), ("p1", "L2"), ("p1", "L3"), ("p4", "L4"),
    ("p4", "L5"), ("p4", "L6"), ("p2", "L6"), ("p3", "L5"),
    ("p2", "L1"), ("p3", "L1"), ("p5", "L4"), ("p6", "L4"), ("p6", "L2"), ("p5", "L3"),
]

#: orbit matrix of the autopolar hexagon, columns (p1 .. p6) x (dx, dy)
AUTOPOLAR_ORBIT_MATRIX = [
    [0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [-1, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0],
    [-2, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, -2, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, -1, -1, 0, -1, 0, 0],
    [0, 0, 0, 0, 0, 0, -2, -1, 0, 0, 0, -1],
    [0, 0, -2, -1, 0, 0, 0, 0, 0, 0, -1, 1],
    [0, 0, 0, 0, -1, -1, 0, 0, -2, -1, 0, 0],
]


@lru_cache(maxsize=None)
def autopolar_hexagon() -> CatalogEntry:
    """Six points and their six polar lines under the unit-circle polarity."""
    pts = {f"p{i + 1}": (F(x), F(y), F(1)) for i, (x, y) in
           enumerate([(0, -1), (1, -1), (2, -1), (0, 1), (1, 1), (2, 1)])}
    lines = {f"L{i + 1}": (F(a), F(b), F(1)) for i, (a, b) in
             enumerate([(0, 1), (-1, 1), (-2, 1), (0, -1), (-1, -1), (-2, -1)])}
    g = IncidenceGeometry([f"p{i}" for i in range(1, 7)], [f"L{i}" for i in range(1, 7)],
                          AUTOPOLAR_INCIDENCES)
    polarity = Correlation(linalg.exact_array([[1, 0, 0], [0, 1, 0], [0, 0, -1]]), is_polarity=True)
    return _finish("autopolar", g, pts, lines, groups={"polarity": CorrelationGroup.generate([polarity])},
                   pins=("p1", "p2", "p4", "p6"),
                   notes="autopolar hexagon, invariant under the polarity diag(1, 1, -1)")


# --------------------------------------------------------------------------


_BUILDERS = {
    "desargues": desargues,
    "quadrilateral": lambda: complete_quadrilateral(True),
    "quadrilateral-collinear": lambda: complete_quadrilateral(False),
    "cyclic-10_3": cyclic_10_3,
    "cyclic-20_4": cyclic_20_4,
    "d4": d4_configuration,
    "autopolar": autopolar_hexagon,
}


def names() -> list[str]:
    return list(_BUILDERS)


def get(name: str) -> CatalogEntry:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise CatalogError(f"unknown catalog entry {name!r}; known: {', '.join(_BUILDERS)}") from None


def entries() -> list[CatalogEntry]:
    return [get(n) for n in _BUILDERS]
