import random
from fractions import Fraction as F

import numpy as np
import pytest
import sympy

from projrig import catalog
from projrig.realization import apply_transform, has_chart, random_rational_transform
from projrig.rigidity import build_rigidity_matrix
from projrig.stress import (Stress, Weaving, WeavingError, chart_stress_equivalence,
                            cokernel_stresses, transport_stress, verify_equilibrium,
                            weaving_from_stress, weaving_matrix, weaving_residual,
                            weaving_stress_basis)


def quad():
    return catalog.complete_quadrilateral(generic=False).realization


def quad_stress():
    return Stress(catalog.quadrilateral_stress())


def test_collapsed_coordinates():
    r = quad()
    xs = {p: r.point(p)[0] for p in r.geometry.points}
    assert xs == {"p0": -2, "p1": 8, "p2": 3, "p3": 0, "p4": -1, "p5": 2}
    s = catalog.quadrilateral_stress()
    assert (s[("p0", "l0")], s[("p1", "l0")], s[("p2", "l0")]) == (1, 1, -2)
    assert (s[("p3", "l1")], s[("p4", "l1")], s[("p5", "l2")]) == (-1, 2, 3)


def test_quad_stress_in_equilibrium():
    assert verify_equilibrium(quad(), quad_stress())


def test_zero_stress():
    assert verify_equilibrium(catalog.desargues().realization, Stress({}))


def test_modified_stress_fails():
    coeffs = dict(catalog.quadrilateral_stress())
    coeffs[("p5", "l2")] = F(4)
    assert not verify_equilibrium(quad(), Stress(coeffs))


def test_quad_stress_equivalence():
    eq = chart_stress_equivalence(None, quad(), quad_stress())
    assert eq.row_dependence and eq.equilibrium and eq.sums_vanish and eq.agree


def test_random_vector_is_not_a_stress():
    r = catalog.desargues().realization
    rng = random.Random(7)
    s = Stress({inc: F(rng.randint(-9, 9), rng.randint(1, 4)) for inc in r.geometry.incidences})
    eq = chart_stress_equivalence(None, r, s)
    assert not eq.row_dependence and not (eq.equilibrium and eq.sums_vanish) and eq.agree


@pytest.mark.parametrize("name,dim", [("desargues", 1), ("cyclic-20_4", 8), ("quadrilateral", 0),
                                      ("d4", 2)])
def test_cokernel_dimensions(name, dim):
    assert len(cokernel_stresses(build_rigidity_matrix(catalog.get(name).realization))) == dim


@pytest.mark.parametrize("name", catalog.names())
def test_cokernel_stresses(name):
    r = catalog.get(name).realization
    m = build_rigidity_matrix(r)
    stresses = cokernel_stresses(m)
    for s in stresses:
        vec = s.vector(r.geometry.incidences, r.exact)
        first = next(x for x in vec if abs(x) > 1e-12)
        assert first == 1 if r.exact else abs(first - 1) < 1e-12
        if r.exact:
            assert all(x == 0 for x in vec.dot(m.matrix))
        eq = chart_stress_equivalence(m, r, s)
        assert eq.row_dependence and eq.equilibrium and eq.sums_vanish


def test_stress_support_must_be_incidences():
    r = catalog.desargues().realization
    with pytest.raises(ValueError):
        Stress({("a", "zzz"): 1}).vector(r.geometry.incidences)


def test_transport_identity():
    w = quad_stress()
    out = transport_stress(quad(), [[1, 0, 0], [0, 1, 0], [0, 0, 1]], w)
    assert out.coefficients == w.coefficients


def test_transport_scaling():
    r = quad()
    t = [[1, 0, 0], [0, 2, 0], [0, 0, 1]]
    assert verify_equilibrium(apply_transform(r, t), transport_stress(r, t, quad_stress()))


@pytest.mark.parametrize("seed", range(5))
def test_transport_random_and_back(seed):
    r = quad()
    w = quad_stress()
    t = random_rational_transform(random.Random(seed))
    moved = apply_transform(r, t)
    w2 = transport_stress(r, t, w)
    assert verify_equilibrium(moved, w2)
    back = transport_stress(moved, t.inverse(), w2)
    incs = r.geometry.incidences
    ratios = {back[i] / w[i] for i in incs if w[i] != 0}
    assert len(ratios) == 1 and all(back[i] == 0 for i in incs if w[i] == 0)


def test_transport_desargues_cokernel():
    r = catalog.desargues().realization
    (w,) = cokernel_stresses(build_rigidity_matrix(r))
    t = random_rational_transform(random.Random(11))
    assert verify_equilibrium(apply_transform(r, t), transport_stress(r, t, w))


def test_single_edge_weaving():
    w = Weaving({"a": (F(1), F(0), F(-1)), "b": (F(0), F(1), F(-1))}, (("a", "b"),))
    assert weaving_stress_basis(w).shape[1] == 0


def test_parallel_edge_rejected():
    with pytest.raises(WeavingError, match="parallel") as exc:
        Weaving({"a": (F(1), F(0), F(-1)), "b": (F(1), F(0), F(-2))}, (("a", "b"),))
    assert exc.value.edge == ("a", "b")


def test_line_through_origin_rejected():
    with pytest.raises(WeavingError):
        Weaving({"a": (F(1), F(1), F(0))}, ())


def test_complete_graph_weaving_matches_brute_force():
    r = catalog.complete_quadrilateral().realization
    lines = {l: r.line(l) for l in r.geometry.lines}
    names = list(lines)
    edges = tuple((a, b) for i, a in enumerate(names) for b in names[i + 1:])
    w = Weaving(lines, edges)
    # oracle: sympy nullspace of the vertex equations built directly
    rows = []
    for v in names:
        for c in range(3):
            row = []
            for a, b in edges:
                x = sympy.Matrix(lines[a]).cross(sympy.Matrix(lines[b]))
                x = x / x[2]
                row.append(x[c] if v == a else -x[c] if v == b else 0)
            rows.append(row)
    expected = len(sympy.Matrix(rows).nullspace())
    basis = weaving_stress_basis(w)
    assert basis.shape[1] == expected
    for k in range(basis.shape[1]):
        assert weaving_residual(w, basis[:, k]) == 0
    assert weaving_matrix(w).shape == (12, 6)


@pytest.mark.parametrize("name", [n for n in catalog.names() if has_chart(catalog.get(n).realization)])
def test_line_restricted_stress_is_weaving_stress(name):
    r = catalog.get(name).realization
    for s in cokernel_stresses(build_rigidity_matrix(r)):
        weaving, values = weaving_from_stress(r, s)
        scale = max([1.0] + [abs(float(v)) for v in values])
        res = weaving_residual(weaving, values)
        assert res == 0 if r.exact else res <= 1e-8 * scale
