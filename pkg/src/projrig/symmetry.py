"""Correlation groups, orbits and the projective orbit rigidity matrix.

A group element is a 3x3 matrix ``G`` (orthogonal up to a scalar) with a
polarity flag.  It maps point coordinates by ``G`` and line coordinates by
``G^{-T}``; a polarity additionally swaps the two kinds, so a point ``p``
goes to the line ``G p`` and a line ``l`` to the point ``G^{-T} l``.  With
this convention ``l . p`` is invariant for every element and composition is
plain matrix multiplication with XOR of the flags.

Velocities live in the affine chart, two coordinates per element, the same
as in the full rigidity matrix.  For an element ``r`` whose stabilizer is
non-trivial, ``M_r`` is a ``2 x dim`` basis of the chart velocities fixed by
the linearized action of every stabilizing element.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Sequence

import numpy as np

from . import linalg
from .realization import Realization, affine_chart, normalize
from .rigidity import (build_rigidity_matrix, line_columns, point_columns,
                       trivial_motion_basis)

GROUP_CAP = 120
ORTHOGONALITY_TOLERANCE = 1e-12

Element = tuple[str, str]  # ("P" | "L", identifier)


class SymmetryError(ValueError):
    pass


def _rational_sqrt(x: Fraction) -> Fraction | None:
    if x <= 0:
        return None
    n, d = isqrt(x.numerator), isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None


@dataclass(frozen=True, eq=False)
class Correlation:
    """Orthogonal collineation (``is_polarity=False``) or correlation."""

    matrix: np.ndarray
    is_polarity: bool = False

    def __post_init__(self):
        m = self.matrix
        if not (isinstance(m, np.ndarray) and m.dtype in (object, np.float64)):
            raw = np.asarray(m, dtype=object).reshape(-1)
            if all(isinstance(x, (int, np.integer, Fraction, str)) for x in raw):
                m = linalg.exact_array(m)
            else:
                m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise SymmetryError("group element must be a 3x3 matrix")
        gram = m.T.dot(m)
        c = gram[0, 0]
        if linalg.is_exact(m):
            if any(gram[i, j] != (c if i == j else 0) for i in range(3) for j in range(3)):
                raise SymmetryError("group matrix is not orthogonal (up to scale)")
            root = _rational_sqrt(c)
            if root is None:
                raise SymmetryError("orthogonal scale factor is not a rational square; use float mode")
            m = m / root
        else:
            if c <= 0 or not np.allclose(gram, c * np.eye(3), atol=ORTHOGONALITY_TOLERANCE * max(1.0, c)):
                raise SymmetryError("group matrix is not orthogonal (up to scale)")
            m = m / np.sqrt(c)
        object.__setattr__(self, "matrix", m)

    @property
    def exact(self) -> bool:
        return linalg.is_exact(self.matrix)

    def key(self, ndigits: int = 9) -> tuple:
        """Hashable key identifying the projective element (``G ~ -G``)."""
        flat = list(self.matrix.reshape(-1))
        if self.exact:
            lead = next(x for x in flat if x != 0)
            return (self.is_polarity, tuple(x / lead for x in flat))
        lead = next(x for x in flat if abs(x) > 1e-9)
        return (self.is_polarity, tuple(round(float(x / lead), ndigits) + 0.0 for x in flat))

    def __eq__(self, other) -> bool:
        return isinstance(other, Correlation) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __mul__(self, other: "Correlation") -> "Correlation":
        return Correlation(self.matrix.dot(other.matrix), self.is_polarity != other.is_polarity)

    def inverse(self) -> "Correlation":
        return Correlation(self.matrix.T.copy(), self.is_polarity)

    def acting_matrix(self, kind: str) -> np.ndarray:
        """Matrix applied to the homogeneous coordinates of a ``kind`` element."""
        if kind == "P":
            return self.matrix
        return linalg.inverse(self.matrix).T.copy()

    def image_kind(self, kind: str) -> str:
        if not self.is_polarity:
            return kind
        return "L" if kind == "P" else "P"

    def to_float(self) -> "Correlation":
        return Correlation(linalg.as_float(self.matrix), self.is_polarity)


def identity_element(exact: bool = True) -> Correlation:
    return Correlation(linalg.identity(3, exact))


class CorrelationGroup:
    """Finite group of correlations, closed under composition."""

    def __init__(self, elements: Sequence[Correlation]):
        elements = list(elements)
        if not elements:
            raise SymmetryError("empty group")
        index = {}
        for i, e in enumerate(elements):
            if e in index:
                raise SymmetryError("duplicate group element")
            index[e] = i
        ident = identity_element(elements[0].exact)
        if elements[0] != ident:
            raise SymmetryError("the first group element must be the identity")
        self.elements = elements
        self._index = index
        n = len(elements)
        self.table = [[0] * n for _ in range(n)]
        for i, a in enumerate(elements):
            for j, b in enumerate(elements):
                ab = a * b
                if ab not in index:
                    raise SymmetryError("group is not closed under composition")
                self.table[i][j] = index[ab]
        self.inverses = [index[e.inverse()] if e.inverse() in index else None for e in elements]
        if None in self.inverses:
            raise SymmetryError("group is not closed under inverses")

    @classmethod
    def generate(cls, generators: Sequence[Correlation], cap: int = GROUP_CAP) -> "CorrelationGroup":
        """Closure of ``generators`` (the identity is always included)."""
        exact = all(g.exact for g in generators) if generators else True
        if not exact:
            generators = [g.to_float() for g in generators]
        elements = [identity_element(exact)]
        seen = {elements[0]}
        frontier = list(elements)
        while frontier:
            nxt = []
            for a in frontier:
                for g in generators:
                    ab = g * a
                    if ab not in seen:
                        seen.add(ab)
                        elements.append(ab)
                        nxt.append(ab)
                        if len(elements) > cap:
                            raise SymmetryError(f"group closure exceeds {cap} elements")
            frontier = nxt
        return cls(elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i: int) -> Correlation:
        return self.elements[i]

    def index(self, e: Correlation) -> int:
        return self._index[e]

    @property
    def exact(self) -> bool:
        return self.elements[0].exact

    @property
    def has_polarity(self) -> bool:
        return any(e.is_polarity for e in self.elements)

    def to_float(self) -> "CorrelationGroup":
        return CorrelationGroup([e.to_float() for e in self.elements])


# --------------------------------------------------------------------------
# group action on a realization


def element_list(r: Realization) -> list[Element]:
    """Points then lines, each in declaration order."""
    g = r.geometry
    return [("P", p) for p in g.points] + [("L", l) for l in g.lines]


def coords(r: Realization, e: Element) -> tuple:
    return r.point(e[1]) if e[0] == "P" else r.line(e[1])


def act(gamma: Correlation, r: Realization, e: Element) -> tuple[str, tuple]:
    """Kind and normalized coordinates of ``gamma . e``."""
    kind, _ = e
    mat = gamma.acting_matrix(kind)
    if not r.exact:
        mat = linalg.as_float(mat)
    v = np.array(coords(r, e), dtype=object if r.exact else float)
    img = tuple(mat.dot(v))
    return gamma.image_kind(kind), normalize(img, r.exact, 1e-12)


def _close(u, v, exact: bool, tol: float) -> bool:
    if exact:
        return tuple(u) == tuple(v)
    return all(abs(a - b) <= tol for a, b in zip(u, v))


@dataclass
class GroupAction:
    """Permutations of points/lines induced by each group element."""

    group: CorrelationGroup
    perms: list[dict[Element, Element]]

    def image(self, i: int, e: Element) -> Element:
        return self.perms[i][e]


def induced_action(r: Realization, group: CorrelationGroup, tol: float = 1e-7) -> GroupAction:
    """Match every image with a realized element; raise if something is missed."""
    if r.exact and not group.exact:
        raise SymmetryError("float group cannot act on an exact realization; convert to float")
    elems = element_list(r)
    by_kind = {"P": [e for e in elems if e[0] == "P"], "L": [e for e in elems if e[0] == "L"]}
    lookup = {}
    if r.exact:
        for e in elems:
            lookup[(e[0], coords(r, e))] = e
    perms = []
    for gamma in group:
        perm = {}
        for e in elems:
            kind, img = act(gamma, r, e)
            if r.exact:
                target = lookup.get((kind, img))
            else:
                target = next((f for f in by_kind[kind] if _close(coords(r, f), img, False, tol)), None)
            if target is None:
                raise SymmetryError(f"image of {e[1]} is not an element of the configuration")
            perm[e] = target
        if len(set(perm.values())) != len(perm):
            raise SymmetryError("group element does not induce a permutation (coincident elements)")
        perms.append(perm)
    incs = set(r.geometry.incidences)
    for perm in perms:
        for p, l in r.geometry.incidences:
            a, b = perm[("P", p)], perm[("L", l)]
            pair = (a[1], b[1]) if a[0] == "P" else (b[1], a[1])
            if pair not in incs:
                raise SymmetryError(f"incidence ({p}, {l}) is not preserved")
    return GroupAction(group, perms)


def check_group_preserves(r: Realization, group: CorrelationGroup, tol: float = 1e-7) -> bool:
    try:
        induced_action(r, group, tol)
    except SymmetryError:
        return False
    return True


# --------------------------------------------------------------------------
# fixed subspaces


def fixed_subspace(gamma: Correlation) -> list[np.ndarray]:
    """Real eigenspaces of a collineation: the projective subspaces it fixes.

    Each entry is a ``3 x k`` basis (k = 1 fixed point, k = 2 fixed line,
    k = 3 everything).
    """
    if gamma.is_polarity:
        raise SymmetryError("a polarity fixes no points or lines")
    m = gamma.matrix
    out = []
    for lam in (1, -1):
        shift = linalg.identity(3, gamma.exact) * (Fraction(lam) if gamma.exact else float(lam))
        k = linalg.rank_and_kernel(m - shift, 1e-10).kernel
        if k.shape[1]:
            out.append(k)
    return out


def stabilizer(action: GroupAction, e: Element) -> list[int]:
    return [i for i, perm in enumerate(action.perms) if perm[e] == e]


def chart_jacobian(gamma: Correlation, r: Realization, e: Element) -> np.ndarray:
    """2x2 derivative of ``gamma`` in chart coordinates at element ``e``."""
    exact = r.exact
    mat = gamma.acting_matrix(e[0])
    if not exact:
        mat = linalg.as_float(mat)
    one = Fraction(1) if exact else 1.0
    u, v = coords(r, e)[:2]
    h = mat.dot(np.array([u, v, one], dtype=object if exact else float))
    if (h[2] == 0) if exact else abs(h[2]) < 1e-14:
        raise SymmetryError(f"image of {e[1]} leaves the affine chart")
    jac = linalg.zeros((2, 2), exact)
    for i in range(2):
        for j in range(2):
            jac[i, j] = (mat[i, j] * h[2] - h[i] * mat[2, j]) / (h[2] * h[2])
    return jac


def element_space(action: GroupAction, r: Realization, e: Element) -> np.ndarray:
    """Chart basis ``M_e`` (2 x dim) of velocities fixed by the stabilizer of ``e``."""
    exact = r.exact
    stab = [i for i in stabilizer(action, e) if i != 0]
    if not stab:
        return linalg.identity(2, exact)
    ident = linalg.identity(2, exact)
    rows = np.concatenate([chart_jacobian(action.group[i], r, e) - ident for i in stab], axis=0)
    return linalg.rank_and_kernel(rows, 1e-10).kernel


def projective_element_space(action: GroupAction, r: Realization, e: Element) -> np.ndarray:
    """``U_e``: intersection of the fixed subspaces containing ``e`` (3 x k basis)."""
    exact = r.exact
    v = np.array(coords(r, e), dtype=object if exact else float)
    basis = linalg.identity(3, exact)
    for i in stabilizer(action, e):
        gamma = action.group[i]
        mat = gamma.acting_matrix(e[0])
        if not exact:
            mat = linalg.as_float(mat)
        img = mat.dot(v)
        # eigenvalue of e under gamma
        j = next(k for k in range(3) if (v[k] != 0 if exact else abs(v[k]) > 1e-12))
        lam = img[j] / v[j]
        eig = linalg.rank_and_kernel(mat - linalg.identity(3, exact) * lam, 1e-10).kernel
        # intersect span(basis) with span(eig): null space of [basis | -eig]
        both = np.concatenate([basis, -eig], axis=1)
        coeff = linalg.rank_and_kernel(both, 1e-10).kernel
        basis = basis.dot(coeff[: basis.shape[1]])
    return basis


# --------------------------------------------------------------------------
# orbit structure and orbit matrix


@dataclass
class IncidenceOrbit:
    members: list[tuple[str, str]]
    q: Element
    gamma: int
    r: Element

    def label(self) -> str:
        return "{" + ", ".join(f"({p},{l})" for p, l in self.members) + "}"


@dataclass
class OrbitStructure:
    action: GroupAction
    element_orbits: list[list[Element]]
    representatives: list[Element]
    rep_of: dict[Element, Element]
    incidence_orbits: list[IncidenceOrbit]
    spaces: dict[Element, np.ndarray] = field(default_factory=dict)

    @property
    def group(self) -> CorrelationGroup:
        return self.action.group

    def column_blocks(self) -> list[tuple[Element, int, int]]:
        """(representative, first column, width) in matrix order."""
        out, c = [], 0
        for rep in self.representatives:
            w = self.spaces[rep].shape[1]
            out.append((rep, c, w))
            c += w
        return out

    @property
    def num_columns(self) -> int:
        return sum(self.spaces[rep].shape[1] for rep in self.representatives)

    def mover(self, e: Element) -> int:
        """Lowest group index sending the representative of ``e`` to ``e``."""
        rep = self.rep_of[e]
        return next(i for i, perm in enumerate(self.action.perms) if perm[rep] == e)


def orbit_structure(r: Realization, group: CorrelationGroup, action: GroupAction | None = None) -> OrbitStructure:
    action = action or induced_action(r, group)
    elems = element_list(r)
    orbits, rep_of = [], {}
    for e in elems:
        if e in rep_of:
            continue
        orbit = []
        for perm in action.perms:
            f = perm[e]
            if f not in orbit:
                orbit.append(f)
        orbit.sort(key=elems.index)
        for f in orbit:
            rep_of[f] = e
        orbits.append(orbit)
    reps = [o[0] for o in orbits]
    rep_set = set(reps)

    incs = list(r.geometry.incidences)
    inc_index = {inc: i for i, inc in enumerate(incs)}
    seen = set()
    inc_orbits = []
    for inc in incs:
        if inc in seen:
            continue
        p, l = inc
        members = set()
        for perm in action.perms:
            a, b = perm[("P", p)], perm[("L", l)]
            members.add((a[1], b[1]) if a[0] == "P" else (b[1], a[1]))
        members = sorted(members, key=inc_index.__getitem__)
        seen.update(members)
        q = other = None
        for mp, ml in members:
            if ("P", mp) in rep_set:
                q, other = ("P", mp), ("L", ml)
                break
            if ("L", ml) in rep_set:
                q, other = ("L", ml), ("P", mp)
                break
        rr = rep_of[other]
        gamma = next(i for i, perm in enumerate(action.perms) if perm[rr] == other)
        inc_orbits.append(IncidenceOrbit(members, q, gamma, rr))
    st = OrbitStructure(action, orbits, reps, rep_of, inc_orbits)
    st.spaces = {rep: element_space(action, r, rep) for rep in reps}
    return st


@dataclass
class OrbitRigidityMatrix:
    matrix: np.ndarray
    structure: OrbitStructure

    def row_labels(self) -> list[str]:
        return [f"i{k}" for k in range(len(self.structure.incidence_orbits))]

    def column_labels(self) -> list[str]:
        out = []
        for rep, _, w in self.structure.column_blocks():
            orbit = next(o for o in self.structure.element_orbits if o[0] == rep)
            name = "{" + ",".join(e[1] for e in orbit) + "}"
            out += [f"{name}[{k}]" for k in range(w)]
        return out


def _chart(r: Realization, e: Element):
    return coords(r, e)[:2]


def build_orbit_matrix(r: Realization, structure: OrbitStructure) -> OrbitRigidityMatrix:
    """One row per incidence orbit, ``dim U_rep`` columns per element orbit.

    Row for the representative incidence ``(q, gamma r)``: the block of ``q``
    is ``chart(gamma r)^T M_q`` and the block of ``r`` is
    ``chart(q)^T J M_r`` with ``J`` the chart derivative of ``gamma`` at
    ``r``.  Both land in the same block when ``q == r``.
    """
    affine_chart(r)
    exact = r.exact
    blocks = {rep: (c, w) for rep, c, w in structure.column_blocks()}
    spaces = structure.spaces if exact else {k: linalg.as_float(v) for k, v in structure.spaces.items()}
    group = structure.group if exact or not structure.group.exact else structure.group.to_float()
    m = linalg.zeros((len(structure.incidence_orbits), structure.num_columns), exact)
    for row, orb in enumerate(structure.incidence_orbits):
        gamma = group[orb.gamma]
        image = structure.action.perms[orb.gamma][orb.r]
        qc, qw = blocks[orb.q]
        rc, rw = blocks[orb.r]
        cq = np.array(_chart(r, orb.q), dtype=object if exact else float)
        cimg = np.array(_chart(r, image), dtype=object if exact else float)
        m[row, qc:qc + qw] += cimg.dot(spaces[orb.q])
        jac = chart_jacobian(gamma, r, orb.r)
        m[row, rc:rc + rw] += cq.dot(jac.dot(spaces[orb.r]))
    return OrbitRigidityMatrix(m, structure)


def orbit_kernel(om: OrbitRigidityMatrix) -> np.ndarray:
    return linalg.rank_and_kernel(om.matrix).kernel


def lift_motion(r: Realization, structure: OrbitStructure, m_hat: np.ndarray) -> np.ndarray:
    """Full chart motion with ``m(gamma rep) = J_gamma M_rep m_hat(rep)``."""
    exact = r.exact and linalg.is_exact(m_hat)
    if r.exact and not exact:
        r = r.to_float()
    g = r.geometry
    group = structure.group if exact or not structure.group.exact else structure.group.to_float()
    out = linalg.zeros((g.num_columns,), exact)
    blocks = {rep: (c, w) for rep, c, w in structure.column_blocks()}
    for orbit in structure.element_orbits:
        rep = orbit[0]
        c, w = blocks[rep]
        space = structure.spaces[rep] if exact else linalg.as_float(structure.spaces[rep])
        base = space.dot(m_hat[c:c + w])
        for e in orbit:
            i = structure.mover(e)
            vel = chart_jacobian(group[i], r, rep).dot(base)
            cols = point_columns(g, e[1]) if e[0] == "P" else line_columns(g, e[1])
            out[cols] = vel
    return out


def restrict_motion(r: Realization, structure: OrbitStructure, m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`lift_motion` on symmetric motions: solve ``M_rep x = m(rep)``."""
    g = r.geometry
    exact = linalg.is_exact(m)
    parts = []
    for rep in structure.representatives:
        cols = point_columns(g, rep[1]) if rep[0] == "P" else line_columns(g, rep[1])
        space = structure.spaces[rep] if exact else linalg.as_float(structure.spaces[rep])
        if space.shape[1] == 0:
            continue
        # exact solve of the overdetermined consistent system via its normal equations
        lhs = space.T.dot(space)
        rhs = space.T.dot(m[cols])
        parts.append(linalg.inverse(lhs).dot(rhs))
    if not parts:
        return linalg.zeros((0,), exact)
    return np.concatenate(parts)


def symmetric_trivial_dimension(r: Realization, structure: OrbitStructure,
                                kernel: np.ndarray | None = None) -> int:
    """Dimension of the trivial motions that are also Gamma-symmetric."""
    if kernel is None:
        kernel = orbit_kernel(build_orbit_matrix(r, structure))
    lifted = _lift_columns(r, structure, kernel)
    triv = trivial_motion_basis(r).vectors
    return linalg.intersection_dimension(triv, lifted)


def _lift_columns(r, structure, kernel):
    exact = linalg.is_exact(kernel)
    cols = [lift_motion(r, structure, kernel[:, k]) for k in range(kernel.shape[1])]
    if not cols:
        return linalg.zeros((r.geometry.num_columns, 0), exact)
    return np.stack(cols, axis=1)


def nontrivial_orbit_motions(r: Realization, structure: OrbitStructure,
                             kernel: np.ndarray | None = None) -> np.ndarray:
    """Orbit-kernel vectors completing the symmetric trivial motions to a basis.

    Returns columns in orbit coordinates whose lifts are independent modulo
    trivial motions.
    """
    if kernel is None:
        kernel = orbit_kernel(build_orbit_matrix(r, structure))
    triv = trivial_motion_basis(r).vectors
    chosen = []
    current = triv
    base_dim = linalg.span_dimension(current)
    for k in range(kernel.shape[1]):
        lifted = lift_motion(r, structure, kernel[:, k]).reshape(-1, 1)
        trial = np.concatenate([current, lifted], axis=1)
        d = linalg.span_dimension(trial)
        if d > base_dim:
            chosen.append(k)
            current, base_dim = trial, d
    return kernel[:, chosen]


def lift_residual(r: Realization, structure: OrbitStructure, m_hat: np.ndarray):
    """``max |M . lift(m_hat)|`` against the full rigidity matrix."""
    full = build_rigidity_matrix(r if linalg.is_exact(m_hat) or not r.exact else r.to_float())
    res = full.matrix.dot(lift_motion(r, structure, m_hat))
    return max((abs(x) for x in res), default=0)


@dataclass
class OrbitReport:
    structure: OrbitStructure
    matrix: OrbitRigidityMatrix
    kernel: np.ndarray
    symmetric_trivial: int
    lift_residuals: list

    @property
    def kernel_dimension(self) -> int:
        return self.kernel.shape[1]

    @property
    def nontrivial_dimension(self) -> int:
        return self.kernel_dimension - self.symmetric_trivial


def analyze_orbits(r: Realization, group: CorrelationGroup) -> OrbitReport:
    st = orbit_structure(r, group)
    om = build_orbit_matrix(r, st)
    ker = orbit_kernel(om)
    sym_triv = symmetric_trivial_dimension(r, st, ker)
    residuals = [lift_residual(r, st, ker[:, k]) for k in range(ker.shape[1])]
    return OrbitReport(st, om, ker, sym_triv, residuals)
