from math import cos, pi, sin

import numpy as np
import pytest

from projrig import catalog
from projrig.geometry import signature
from projrig.realization import det3, verify
from projrig.rigidity import build_rigidity_matrix, rigidity_verdict
from projrig.stress import cokernel_stresses


@pytest.mark.parametrize("name", catalog.names())
def test_entry_verifies(name):
    e = catalog.get(name)
    assert e.name == name and verify(e.realization) == []
    for p in e.pins:
        assert e.realization.geometry.has_point(p)


def test_unknown_entry():
    with pytest.raises(catalog.CatalogError):
        catalog.get("pappus")


def test_entries_are_cached():
    assert catalog.get("d4") is catalog.get("d4")


@pytest.mark.parametrize("name,sig,incidences", [
    ("desargues", "10_3", 30), ("cyclic-10_3", "10_3", 30), ("cyclic-20_4", "20_4", 80),
    ("quadrilateral", "(6_2, 4_3)", 12), ("d4", None, 42), ("autopolar", None, 14)])
def test_signatures(name, sig, incidences):
    g = catalog.get(name).geometry
    assert len(g.incidences) == incidences
    if sig:
        assert str(signature(g)) == sig


def test_d4_sizes():
    g = catalog.d4_configuration().geometry
    assert (len(g.points), len(g.lines), g.num_columns) == (13, 12, 50)


def test_autopolar_coordinates():
    r = catalog.autopolar_hexagon().realization
    assert [r.point(f"p{i}")[:2] for i in range(1, 7)] == [(0, -1), (1, -1), (2, -1), (0, 1), (1, 1), (2, 1)]
    assert r.line("L5") == (-1, -1, 1)


def test_desargues_construction():
    r = catalog.desargues().realization
    for x, y in (("a", "a'"), ("b", "b'"), ("c", "c'")):
        assert det3(r.point("p"), r.point(x), r.point(y)) == 0
    assert det3(r.point("x"), r.point("y"), r.point("z")) == 0


@pytest.mark.parametrize("root", [0, 1])
def test_cyclic_construction_lemma(root):
    e = catalog.cyclic_10_3(root)
    r = e.realization
    for i in range(5):
        # m_i passes through v_{i+1}, the incidence the construction has to deliver
        m = np.array(r.line(f"m{i}"))
        v = np.array(r.point(f"v{(i + 1) % 5}"))
        assert abs(m.dot(v)) <= 1e-9
        # v on the unit pentagon
        assert np.allclose(v[:2], (cos(2 * pi * (i + 1) / 5), sin(2 * pi * (i + 1) / 5)))


def test_cyclic_root_choice():
    far = np.hypot(*catalog.cyclic_10_3(0).realization.point("w0")[:2])
    near = np.hypot(*catalog.cyclic_10_3(1).realization.point("w0")[:2])
    assert far > near


def test_cyclic_20_4_incidences():
    r = catalog.cyclic_20_4().realization
    for i in range(5):
        for pt in (f"v{(i + 1) % 5}", f"u{i}"):
            assert abs(np.dot(r.line(f"m{i}"), r.point(pt))) <= 1e-9
        for pt in (f"v{(i + 3) % 5}", f"u{i}"):
            assert abs(np.dot(r.line(f"n{i}"), r.point(pt))) <= 1e-9
        for pt in (f"w{(i + 3) % 5}", f"x{(i + 1) % 5}"):
            assert abs(np.dot(r.line(f"o{i}"), r.point(pt))) <= 1e-9


def test_recomputed_numbers():
    assert rigidity_verdict(catalog.cyclic_20_4().realization).label == "infinitesimally_rigid"
    assert rigidity_verdict(catalog.d4_configuration().realization).nontrivial_dimension == 2
    assert len(cokernel_stresses(build_rigidity_matrix(catalog.complete_quadrilateral().realization))) == 0
