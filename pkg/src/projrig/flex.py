"""Tracing finite flexes by predictor-corrector continuation.

The unknowns are affine chart coordinates (float).  A trace is parametrized
by the coordinate ``k`` where the initial motion ``m0`` is largest:
``z_k(t) = z_k(0) + t * m0_k``, so ``dz/dt`` at ``t = 0`` is ``m0``.  Each step
predicts along the kernel direction closest to the previous one and then
corrects with Gauss-Newton (minimum-norm steps) back onto the incidence
equations with ``z_k`` held at its target.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .realization import Realization, affine_chart
from .rigidity import (check_general_position, column_labels, line_columns, pin,
                       point_columns)
from .symmetry import (CorrelationGroup, OrbitStructure, build_orbit_matrix,
                       nontrivial_orbit_motions, orbit_structure)

log = logging.getLogger(__name__)

DEFAULT_STEP = 1e-2
DEFAULT_STEPS = 50
MAX_CORRECTOR_ITERATIONS = 25
CORRECTOR_TOLERANCE = 1e-9
CHART_BOUND = 1e8


class FlexError(RuntimeError):
    def __init__(self, message: str, t: float | None = None, partial=None):
        super().__init__(message)
        self.t = t
        self.partial = partial


class ZeroMotion(FlexError):
    pass


class StalledCorrector(FlexError):
    pass


class ChartDegenerate(FlexError):
    pass


@dataclass
class FlexSample:
    t: float
    realization: Realization
    residual: float


@dataclass
class FlexTrace:
    samples: list[FlexSample]
    pins: tuple[str, ...]
    initial_motion: np.ndarray
    parameter: str = ""
    symmetric: bool = False
    diagnostics: list[str] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max((s.residual for s in self.samples), default=0.0)

    def as_dict(self) -> dict:
        out = {
            "pins": list(self.pins),
            "parameter": self.parameter,
            "symmetric": self.symmetric,
            "initial_motion": [float(x) for x in self.initial_motion],
            "max_residual": self.max_residual,
            "samples": [],
        }
        for s in self.samples:
            r = s.realization
            out["samples"].append({
                "t": s.t,
                "residual": s.residual,
                "points": {p: [float(x) for x in r.point(p)[:2]] for p in r.geometry.points},
                "lines": {l: [float(x) for x in r.line(l)[:2]] for l in r.geometry.lines},
            })
        if self.diagnostics:
            out["diagnostics"] = list(self.diagnostics)
        return out


def normalize_motion(m: np.ndarray) -> np.ndarray:
    """Scale so the largest-magnitude entry is +1 (first one on ties)."""
    k = int(np.argmax(np.abs(linalg.as_float(m))))
    return m / m[k]


# --------------------------------------------------------------------------
# equation systems


class _PinnedSystem:
    """Chart coordinates of every element; pinned point columns are frozen."""

    def __init__(self, r: Realization, pins: Sequence[str]):
        self.r = r
        g = r.geometry
        chart = affine_chart(r)
        z = np.zeros(g.num_columns)
        for l in g.lines:
            z[line_columns(g, l)] = [float(x) for x in chart.lines[l]]
        for p in g.points:
            z[point_columns(g, p)] = [float(x) for x in chart.points[p]]
        self.full0 = z
        drop = set()
        for p in pins:
            s = point_columns(g, p)
            drop.update(range(s.start, s.stop))
        self.free = [c for c in range(g.num_columns) if c not in drop]
        keep = set(self.free)
        self.labels = [lab for i, lab in enumerate(column_labels(g)) if i in keep]
        self.z0 = z[self.free].copy()
        g_inc = g.incidences
        self._lcols = np.array([line_columns(g, l).start for _, l in g_inc])
        self._pcols = np.array([point_columns(g, p).start for p, _ in g_inc])

    def full(self, z):
        out = self.full0.copy()
        out[self.free] = z
        return out

    def residual(self, z):
        f = self.full(z)
        a, b = f[self._lcols], f[self._lcols + 1]
        x, y = f[self._pcols], f[self._pcols + 1]
        return a * x + b * y + 1.0

    def jacobian(self, z):
        f = self.full(z)
        n = len(self._lcols)
        jac = np.zeros((n, len(f)))
        rows = np.arange(n)
        jac[rows, self._lcols] = f[self._pcols]
        jac[rows, self._lcols + 1] = f[self._pcols + 1]
        jac[rows, self._pcols] = f[self._lcols]
        jac[rows, self._pcols + 1] = f[self._lcols + 1]
        return jac[:, self.free]

    def snapshot(self, z) -> Realization:
        f = self.full(z)
        g = self.r.geometry
        pts = {p: (*f[point_columns(g, p)], 1.0) for p in g.points}
        lines = {l: (*f[line_columns(g, l)], 1.0) for l in g.lines}
        return Realization(g, pts, lines, exact=False, tolerance=self.r.tolerance)


class _SymmetricSystem:
    """Orbit-reduced coordinates: ``chart(rep) = base + M_rep z_rep``."""

    def __init__(self, r: Realization, structure: OrbitStructure, pins: Sequence[str]):
        self.r = r
        self.structure = structure
        self.group = structure.group if not structure.group.exact else structure.group.to_float()
        self.spaces = {k: linalg.as_float(v) for k, v in structure.spaces.items()}
        chart = affine_chart(r)
        self.base = {}
        for rep in structure.representatives:
            src = chart.points if rep[0] == "P" else chart.lines
            self.base[rep] = np.array([float(x) for x in src[rep[1]]])
        pinned_reps = {structure.rep_of[("P", p)] for p in pins}
        self.blocks = structure.column_blocks()
        self.free = []
        self.labels = []
        for rep, c, w in self.blocks:
            if rep in pinned_reps:
                continue
            self.free.extend(range(c, c + w))
            self.labels.extend(f"{rep[1]}[{i}]" for i in range(w))
        self.ncols = structure.num_columns
        self.z0 = np.zeros(len(self.free))

    def full(self, z):
        out = np.zeros(self.ncols)
        out[self.free] = z
        return out

    def snapshot(self, z) -> Realization:
        f = self.full(z)
        st = self.structure
        coords = {}
        for rep, c, w in self.blocks:
            ch = self.base[rep] + self.spaces[rep].dot(f[c:c + w])
            h = np.array([ch[0], ch[1], 1.0])
            for e in next(o for o in st.element_orbits if o[0] == rep):
                gamma = self.group[st.mover(e)]
                img = gamma.acting_matrix(rep[0]).dot(h)
                if abs(img[2]) < 1e-14 * max(1.0, float(np.max(np.abs(img)))):
                    raise ChartDegenerate(f"{e[1]} left the affine chart")
                coords[e] = tuple(img / img[2])
        g = self.r.geometry
        pts = {p: coords[("P", p)] for p in g.points}
        lines = {l: coords[("L", l)] for l in g.lines}
        return Realization(g, pts, lines, exact=False, tolerance=self.r.tolerance)

    def residual(self, z):
        snap = self.snapshot(z)
        out = []
        for orb in self.structure.incidence_orbits:
            p, l = orb.members[0]
            out.append(float(np.dot(snap.line(l), snap.point(p))))
        return np.array(out)

    def jacobian(self, z):
        snap = self.snapshot(z)
        om = build_orbit_matrix(snap, self.structure)
        return linalg.as_float(om.matrix)[:, self.free]


# --------------------------------------------------------------------------
# continuation


def _kernel(j):
    return linalg.rank_and_kernel(j).kernel


def _correct(system, z, k, target, tol, max_iter):
    # stop well below tol: orbit residuals understate the residuals of the
    # other orbit members by their normalization factors
    stop = tol * 1e-3
    for _ in range(max_iter):
        f = system.residual(z)
        gap = z[k] - target
        if np.max(np.abs(f), initial=0.0) <= stop and abs(gap) <= stop:
            return z, True
        jac = np.vstack([system.jacobian(z), np.eye(len(z))[k]])
        rhs = -np.concatenate([f, [gap]])
        # truncate at the rank threshold so near-null directions do not amplify noise
        dz = np.linalg.lstsq(jac, rhs, rcond=linalg.FLOAT_RTOL * max(jac.shape))[0]
        z = z + dz
        if not np.all(np.isfinite(z)) or np.max(np.abs(z)) > CHART_BOUND:
            raise ChartDegenerate("coordinates diverged")
    f = system.residual(z)
    ok = np.max(np.abs(f), initial=0.0) <= tol and abs(z[k] - target) <= tol
    return z, ok


def _sample(system, z, t) -> FlexSample:
    snap = system.snapshot(z)
    return FlexSample(t, snap, snap.max_residual())


def _accept(trace, sample, tol):
    if sample.residual > tol:
        raise StalledCorrector(f"residual {sample.residual:.3g} above tolerance at t={sample.t:g}",
                               sample.t, trace)
    trace.samples.append(sample)


def _continue(system, m0, steps, step_size, tol, max_iter, pins, symmetric):
    m0 = np.asarray(m0, dtype=float)
    if not np.any(m0):
        raise ZeroMotion("the initial motion is zero")
    k = int(np.argmax(np.abs(m0)))
    z0 = system.z0.copy()
    z = z0.copy()
    direction = m0 / np.linalg.norm(m0)
    trace = FlexTrace([_sample(system, z, 0.0)], tuple(pins), m0,
                      parameter=system.labels[k], symmetric=symmetric)
    for n in range(1, steps + 1):
        t_prev, t = (n - 1) * step_size, n * step_size
        ker = _kernel(system.jacobian(z))
        if ker.shape[1] == 0:
            raise StalledCorrector(f"no motion left at t={t_prev:g}", t_prev, trace)
        tau = ker.dot(ker.T.dot(direction))
        norm = np.linalg.norm(tau)
        if norm < 1e-12 or abs(tau[k]) < 1e-12 * norm:
            raise StalledCorrector(f"parameter direction degenerates at t={t_prev:g}", t_prev, trace)
        tau /= norm
        target = z0[k] + t * m0[k]
        pred = z + tau * (target - z[k]) / tau[k]
        try:
            z_new, ok = _correct(system, pred, k, target, tol, max_iter)
        except ChartDegenerate as exc:
            raise ChartDegenerate(f"chart degenerates at t={t:g}: {exc}", t, trace) from None
        if not ok:
            raise StalledCorrector(f"corrector did not converge at t={t:g}", t, trace)
        try:
            sample = _sample(system, z_new, t)
        except ChartDegenerate as exc:
            raise ChartDegenerate(f"chart degenerates at t={t:g}: {exc}", t, trace) from None
        _accept(trace, sample, tol)
        direction, z = tau, z_new
    log.debug("traced %d steps, max residual %.3g", steps, trace.max_residual)
    return trace


def pinned_motions(r: Realization, pins: Sequence[str]) -> np.ndarray:
    """Full-length basis (columns) of motions with the pins held fixed."""
    pm = pin(r, pins)
    return pm.expand(pm.kernel(), r.geometry.num_columns)


def trace_flex(r: Realization, pins: Sequence[str], m: np.ndarray | None = None,
               steps: int = DEFAULT_STEPS, step_size: float = DEFAULT_STEP,
               tol: float = CORRECTOR_TOLERANCE, max_iter: int = MAX_CORRECTOR_ITERATIONS) -> FlexTrace:
    """Follow a finite flex with four points pinned.

    ``m`` is a full-length chart motion in the pinned kernel; by default the
    first pinned-kernel basis vector is used.
    """
    check_general_position(r, pins)
    if m is None:
        basis = pinned_motions(r, pins)
        if basis.shape[1] == 0:
            raise ZeroMotion("no infinitesimal motion with these pins")
        m = normalize_motion(basis[:, 0])
    fr = r.to_float() if r.exact else r
    system = _PinnedSystem(fr, pins)
    m = linalg.as_float(np.asarray(m))
    if m.shape != (r.geometry.num_columns,):
        raise ValueError(f"motion must have {r.geometry.num_columns} entries")
    pinned = [c for c in range(len(m)) if c not in set(system.free)]
    if np.any(np.abs(m[pinned]) > 1e-12 * max(1.0, float(np.max(np.abs(m))))):
        raise ValueError("motion moves a pinned point")
    reduced = m[system.free]
    if not np.any(reduced):
        raise ZeroMotion("the initial motion is zero")
    jac = system.jacobian(system.z0)
    if np.max(np.abs(jac.dot(reduced))) > 1e-8 * max(1.0, np.linalg.norm(reduced) * np.max(np.abs(jac))):
        raise ValueError("motion is not in the kernel of the pinned rigidity matrix")
    return _continue(system, reduced, steps, step_size, tol, max_iter, pins, False)


def symmetric_trace_flex(r: Realization, group: CorrelationGroup, m_hat: np.ndarray | None = None,
                         pins: Sequence[str] = (), steps: int = DEFAULT_STEPS,
                         step_size: float = DEFAULT_STEP, tol: float = CORRECTOR_TOLERANCE,
                         max_iter: int = MAX_CORRECTOR_ITERATIONS,
                         structure: OrbitStructure | None = None) -> FlexTrace:
    """Follow a symmetric flex in orbit-reduced coordinates.

    ``m_hat`` lives in orbit-matrix coordinates.  Pinning a point freezes its
    whole orbit.  Without ``m_hat`` the first nontrivial orbit motion is
    used (with pins: the first vector of the pinned orbit kernel).
    """
    if pins:
        check_general_position(r, pins)
    structure = structure or orbit_structure(r, group)
    system = _SymmetricSystem(r.to_float() if r.exact else r, structure, pins)
    if m_hat is None:
        om = build_orbit_matrix(r, structure)
        if pins:
            cand = linalg.rank_and_kernel(om.matrix[:, system.free]).kernel
            full = linalg.zeros((structure.num_columns, cand.shape[1]), linalg.is_exact(cand))
            full[system.free] = cand
            cand = full
        else:
            cand = nontrivial_orbit_motions(r, structure)
        if cand.shape[1] == 0:
            raise ZeroMotion("no nontrivial symmetric motion")
        m_hat = normalize_motion(cand[:, 0])
    m_hat = linalg.as_float(np.asarray(m_hat))
    if m_hat.shape != (structure.num_columns,):
        raise ValueError(f"orbit motion must have {structure.num_columns} entries")
    reduced = m_hat[system.free]
    if not np.any(reduced):
        raise ZeroMotion("the initial motion is zero")
    jac = system.jacobian(system.z0)
    if np.max(np.abs(jac.dot(reduced)), initial=0.0) > 1e-8 * max(1.0, np.linalg.norm(reduced) * np.max(np.abs(jac), initial=0.0)):
        raise ValueError("motion is not in the orbit kernel")
    return _continue(system, reduced, steps, step_size, tol, max_iter, pins, True)
