"""Acceptance criteria 1-8 at their stated tolerances.

Each criterion records a PASS/FAIL line that ``conftest.py`` prints in the
terminal summary; running this file directly prints the same lines.
Criteria 5 and 6 contain published numbers our computation does not
reproduce; they are expected failures, not loosened checks.
"""

import random
import time

import numpy as np
import pytest
from scipy.linalg import expm

from projrig import catalog, linalg
from projrig.flex import symmetric_trace_flex
from projrig.realization import affine_chart, apply_transform, auto_chart, has_chart, random_rational_transform
from projrig.rigidity import (build_rigidity_matrix, infinitesimal_motion, lie_algebra_basis,
                              rank_and_kernel, rigidity_verdict, trivial_motion_basis)
from projrig.stress import (Stress, chart_stress_equivalence, cokernel_stresses, transport_stress,
                            verify_equilibrium, weaving_from_stress, weaving_residual)
from projrig.symmetry import (analyze_orbits, build_orbit_matrix, lift_motion, orbit_kernel,
                              orbit_structure, restrict_motion)

RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, checks: dict[str, bool], detail: str = "") -> bool:
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    RESULTS[n] = (ok, detail if ok else f"{detail} failed: {', '.join(failed)}")
    return ok


def summary_lines() -> list[str]:
    return [f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
            for n, (ok, detail) in sorted(RESULTS.items())]


def _clear(fn):
    getattr(fn, "cache_clear", lambda: None)()


# --------------------------------------------------------------------------


def criterion_1() -> bool:
    _clear(catalog.desargues)
    start = time.perf_counter()
    r = catalog.desargues().realization
    m = build_rigidity_matrix(r)
    v = rigidity_verdict(r)
    coker = len(cokernel_stresses(m))
    elapsed = time.perf_counter() - start
    return record(1, {
        "shape 30x40": m.shape == (30, 40),
        "rank 29": v.rank == 29,
        "nullity 11": v.nullity == 11,
        "trivial span 8": v.trivial_span == 8,
        "nontrivial 3": v.nontrivial_dimension == 3,
        "cokernel 1": coker == 1,
        "runtime < 1 s": elapsed < 1.0,
    }, f"Desargues rank {v.rank}, nontrivial {v.nontrivial_dimension}, cokernel {coker}, {elapsed:.2f} s")


def criterion_2() -> bool:
    _clear(catalog.cyclic_20_4)
    start = time.perf_counter()
    r = catalog.cyclic_20_4().realization
    m = build_rigidity_matrix(r)
    v = rigidity_verdict(r)
    elapsed = time.perf_counter() - start
    s = np.linalg.svd(m.matrix, compute_uv=False)
    gap = s[71] / s[72]
    return record(2, {
        "shape 80x80": m.shape == (80, 80),
        "rank 72": v.rank == 72,
        "gap >= 1e6": gap >= 1e6,
        "infinitesimally rigid": v.label == "infinitesimally_rigid",
        "runtime < 1 s": elapsed < 1.0,
    }, f"20_4 rank {v.rank}, gap {gap:.2e}, {v.label}, {elapsed:.2f} s")


def criterion_3() -> bool:
    r = catalog.complete_quadrilateral(generic=False).realization
    w = Stress(catalog.quadrilateral_stress())
    eq = chart_stress_equivalence(None, r, w)
    generic = catalog.complete_quadrilateral().realization
    coker = len(cokernel_stresses(build_rigidity_matrix(generic)))
    return record(3, {
        "equilibrium (exact)": r.exact and verify_equilibrium(r, w),
        "row dependence": eq.row_dependence,
        "coefficient sums vanish": eq.sums_vanish,
        "equivalence agrees": eq.agree,
        "generic cokernel 0": coker == 0,
    }, f"quadrilateral stress equilibrium/row/sums = {eq.equilibrium}/{eq.row_dependence}/{eq.sums_vanish}")


def criterion_4() -> bool:
    r = catalog.complete_quadrilateral(generic=False).realization
    w = Stress(catalog.quadrilateral_stress())
    passed = 0
    for seed in range(10):
        t = random_rational_transform(random.Random(seed))
        moved = apply_transform(r, t)
        passed += moved.exact and verify_equilibrium(moved, transport_stress(r, t, w))
    return record(4, {"10/10 transports in equilibrium": passed == 10}, f"{passed}/10 exact transports")


D4_CLAIMS = {"dashed": (6, 4), "dotted": (6, 4), "d4": (3, 2)}


def d4_measurements():
    e = catalog.d4_configuration()
    v = rigidity_verdict(e.realization)
    reports = {name: analyze_orbits(e.realization, e.groups[name]) for name in D4_CLAIMS}
    return e, v, reports


def criterion_5() -> bool:
    e, v, reports = d4_measurements()
    checks = {
        "shape 42x50": build_rigidity_matrix(e.realization).shape == (42, 50),
        "nontrivial 2": v.nontrivial_dimension == 2,
    }
    for name, (kernel, trivial) in D4_CLAIMS.items():
        rep = reports[name]
        checks[f"{name} orbit kernel {kernel}"] = rep.kernel_dimension == kernel
        checks[f"{name} symmetric trivial {trivial}"] = rep.symmetric_trivial == trivial
        checks[f"{name} lifts exact"] = all(x == 0 for x in rep.lift_residuals)
    got = ", ".join(f"{n} {reports[n].kernel_dimension}/{reports[n].symmetric_trivial}" for n in D4_CLAIMS)
    return record(5, checks, f"D4 kernel/trivial: {got}")


def criterion_6() -> bool:
    e = catalog.autopolar_hexagon()
    st = orbit_structure(e.realization, e.groups["polarity"])
    om = build_orbit_matrix(e.realization, st).matrix
    printed = catalog.AUTOPOLAR_ORBIT_MATRIX
    mismatches = [(f"i{i}", j) for i in range(8) for j in range(12) if om[i, j] != printed[i][j]]
    kernel = orbit_kernel(build_orbit_matrix(e.realization, st)).shape[1]
    return record(6, {
        "8x12 entry-for-entry": om.shape == (8, 12) and not mismatches,
        "orbit kernel 4": kernel == 4,
    }, f"autopolar orbit kernel {kernel}, {96 - len(mismatches)}/96 entries match {mismatches}")


def criterion_7() -> bool:
    e = catalog.autopolar_hexagon()
    start = time.perf_counter()
    tr = symmetric_trace_flex(e.realization, e.groups["polarity"], pins=("p1", "p2", "p4", "p6"),
                              steps=50, step_size=0.01)
    elapsed = time.perf_counter() - start
    err = 0.0
    for s in tr.samples:
        t = s.t
        x3, y3, _ = s.realization.point("p3")
        x5, y5, _ = s.realization.point("p5")
        err = max(err, abs(x3 - (2 + t)), abs(y3 + 1), abs(x5 - (1 - t / (2 + t))), abs(y5 - 1))
    return record(7, {
        "51 samples to t = 0.5": len(tr.samples) == 51 and abs(tr.samples[-1].t - 0.5) < 1e-12,
        "coordinates within 1e-6": err <= 1e-6,
        "residual <= 1e-9": tr.max_residual <= 1e-9,
        "runtime < 5 s": elapsed < 5.0,
    }, f"autopolar trace error {err:.1e}, residual {tr.max_residual:.1e}, {elapsed:.2f} s")


def _chart_vector(r):
    ch = affine_chart(r)
    g = r.geometry
    return np.array([float(x) for l in g.lines for x in ch.lines[l]]
                    + [float(x) for p in g.points for x in ch.points[p]])


def _fd_error(r) -> float:
    worst = 0.0
    rf = r.to_float()
    for a in lie_algebra_basis(exact=False):
        analytic = linalg.as_float(infinitesimal_motion(rf, a))
        d = {h: (_chart_vector(apply_transform(rf, expm(h * a)))
                 - _chart_vector(apply_transform(rf, expm(-h * a)))) / (2 * h) for h in (1e-4, 1e-5)}
        richardson = (100 * d[1e-5] - d[1e-4]) / 99
        worst = max(worst, np.max(np.abs(richardson - analytic)) / max(1.0, np.max(np.abs(analytic))))
    return worst


def criterion_8() -> bool:
    checks = {}
    fd_worst = 0.0
    for name in catalog.names():
        e = catalog.get(name)
        r = e.realization
        m = build_rigidity_matrix(r)
        prod = m.matrix.dot(trivial_motion_basis(r).vectors)
        if r.exact:
            checks[f"(a) {name} annihilated"] = all(x == 0 for x in prod.reshape(-1))
        else:
            checks[f"(a) {name} annihilated"] = np.max(np.abs(prod)) <= 1e-9 * max(1.0, np.max(np.abs(m.matrix)))
        err = _fd_error(r)
        fd_worst = max(fd_worst, err)
        checks[f"(a) {name} finite differences"] = err <= 1e-6
        res = rank_and_kernel(m)
        if r.exact:
            ranks = {rank_and_kernel(build_rigidity_matrix(auto_chart(r, seed)[0])).rank for seed in range(5)}
            checks[f"(b) {name} rank invariant"] = ranks == {res.rank}
        checks[f"(d) {name} rank + nullity"] = res.rank + res.nullity == m.shape[1]
        for gname, group in e.groups.items():
            st = orbit_structure(r, group)
            ker = orbit_kernel(build_orbit_matrix(r, st))
            for k in range(ker.shape[1]):
                back = restrict_motion(r, st, lift_motion(r, st, ker[:, k]))
                same = list(back) == list(ker[:, k]) if r.exact else np.max(np.abs(back - ker[:, k])) <= 1e-9
                checks[f"(c) {name}/{gname} restrict.lift"] = checks.get(f"(c) {name}/{gname} restrict.lift", True) and same
        if has_chart(r):
            for s in cokernel_stresses(m):
                weaving, values = weaving_from_stress(r, s)
                resid = weaving_residual(weaving, values)
                scale = max([1.0] + [abs(float(v)) for v in values])
                ok = resid == 0 if r.exact else resid <= 1e-8 * scale
                checks[f"(e) {name} weaving"] = checks.get(f"(e) {name} weaving", True) and ok
    return record(8, checks, f"{len(checks)} property checks, worst finite-difference error {fd_worst:.1e}")


# --------------------------------------------------------------------------

CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}

D4_REASON = ("single-reflection orbit kernels are 5, not 6; an independent symmetric-kernel "
             "oracle agrees, and 6 would contradict the stated D4 numbers")
AUTOPOLAR_REASON = ("printed entry (i7, p5 y) is -1; the matrix with it has a kernel vector "
                    "that is not a motion, the consistent value is +1 (95/96 entries match)")


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7, 8])
def test_criterion(n):
    CRITERIA[n]()
    ok, detail = RESULTS[n]
    assert ok, detail


@pytest.mark.xfail(strict=True, reason=D4_REASON)
def test_criterion_5():
    criterion_5()
    ok, detail = RESULTS[5]
    assert ok, detail


@pytest.mark.xfail(strict=True, reason=AUTOPOLAR_REASON)
def test_criterion_6():
    criterion_6()
    ok, detail = RESULTS[6]
    assert ok, detail


if __name__ == "__main__":
    for fn in CRITERIA.values():
        fn()
    print("\n".join(summary_lines()))
