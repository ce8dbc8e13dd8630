"""JSON configuration files and report serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import linalg
from .geometry import GeometryError, IncidenceGeometry
from .realization import Realization, RealizationError
from .symmetry import Correlation, CorrelationGroup, SymmetryError

KEYS = {"points", "lines", "incidences", "groups", "pins", "mode"}
MODES = ("exact", "float")


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    geometry: IncidenceGeometry
    realization: Realization
    groups: dict[str, CorrelationGroup] = field(default_factory=dict)
    pins: tuple[str, ...] = ()
    mode: str = "exact"


def _scalar(x, exact: bool, where: str):
    if isinstance(x, bool):
        raise ConfigError(f"{where}: booleans are not numbers")
    if exact:
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            try:
                return Fraction(x.strip())
            except (ValueError, ZeroDivisionError):
                raise ConfigError(f"{where}: cannot parse rational {x!r}") from None
        raise ConfigError(f"{where}: exact mode needs integers or \"num/den\" strings, got {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return float(Fraction(x.strip()))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{where}: cannot parse number {x!r}") from None
    raise ConfigError(f"{where}: expected a number, got {x!r}")


def _vector(v, exact, where, n=3):
    if not isinstance(v, list) or len(v) != n:
        raise ConfigError(f"{where}: expected a list of {n} numbers")
    return tuple(_scalar(x, exact, where) for x in v)


def parse(doc: dict, mode: str | None = None, tolerance: float = 1e-9) -> Config:
    """Validate a decoded configuration document.

    ``mode`` overrides the document's mode; exact documents may be read in
    float mode but not the other way round.
    """
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(doc) - KEYS
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    for k in ("points", "lines", "incidences"):
        if k not in doc:
            raise ConfigError(f"missing key {k!r}")
    doc_mode = doc.get("mode", "exact")
    if doc_mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    mode = mode or doc_mode
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    if mode == "exact" and doc_mode == "float":
        raise ConfigError("a float configuration cannot be analyzed in exact mode")
    read_exact = doc_mode == "exact"
    points, lines = doc["points"], doc["lines"]
    if not isinstance(points, dict) or not isinstance(lines, dict):
        raise ConfigError("points and lines must be objects keyed by identifier")
    incs = doc["incidences"]
    if not isinstance(incs, list) or not all(isinstance(i, list) and len(i) == 2 for i in incs):
        raise ConfigError("incidences must be a list of [point, line] pairs")
    try:
        geometry = IncidenceGeometry(points.keys(), lines.keys(), [tuple(i) for i in incs])
        pts = {k: _vector(v, read_exact, f"point {k}") for k, v in points.items()}
        lns = {k: _vector(v, read_exact, f"line {k}") for k, v in lines.items()}
        r = Realization(geometry, pts, lns, exact=read_exact, tolerance=tolerance)
    except (GeometryError, RealizationError) as exc:
        raise ConfigError(str(exc)) from None
    if mode == "float" and r.exact:
        r = r.to_float()
    groups = {}
    for name, gens in (doc.get("groups") or {}).items():
        if not isinstance(gens, list):
            raise ConfigError(f"group {name}: expected a list of elements")
        elems = []
        for i, el in enumerate(gens):
            where = f"group {name} element {i}"
            if not isinstance(el, dict) or set(el) - {"matrix", "polarity"} or "matrix" not in el:
                raise ConfigError(f"{where}: expected {{\"matrix\": ..., \"polarity\": bool}}")
            mat = el["matrix"]
            if not isinstance(mat, list) or len(mat) != 3:
                raise ConfigError(f"{where}: matrix must be 3x3")
            rows = [_vector(row, read_exact, where) for row in mat]
            m = linalg.exact_array(rows) if read_exact else np.array(rows, dtype=float)
            try:
                elems.append(Correlation(m, bool(el.get("polarity", False))))
            except SymmetryError as exc:
                raise ConfigError(f"{where}: {exc}") from None
        try:
            group = CorrelationGroup.generate(elems)
        except SymmetryError as exc:
            raise ConfigError(f"group {name}: {exc}") from None
        groups[name] = group.to_float() if mode == "float" and group.exact else group
    pins = doc.get("pins", [])
    if not isinstance(pins, list) or not all(isinstance(p, str) for p in pins):
        raise ConfigError("pins must be a list of point identifiers")
    for p in pins:
        if not geometry.has_point(p):
            raise ConfigError(f"unknown pin {p!r}")
    return Config(geometry, r, groups, tuple(pins), mode)


def load(path: str | Path, mode: str | None = None, tolerance: float = 1e-9) -> Config:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse(doc, mode, tolerance)


# --------------------------------------------------------------------------
# serialization


def scalar_json(x):
    """Exact rationals as "num/den" strings, floats as JSON numbers."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return float(x)


def vector_json(v):
    return [scalar_json(x) for x in v]


def dump(r: Realization, groups: dict[str, CorrelationGroup] | None = None,
         pins=()) -> dict:
    """Configuration document for ``r``; group closures are written out in full."""
    g = r.geometry
    doc = {
        "mode": "exact" if r.exact else "float",
        "points": {p: vector_json(r.point(p)) for p in g.points},
        "lines": {l: vector_json(r.line(l)) for l in g.lines},
        "incidences": [[p, l] for p, l in g.incidences],
    }
    if groups:
        doc["groups"] = {
            name: [{"matrix": [vector_json(row) for row in el.matrix], "polarity": el.is_polarity}
                   for el in group.elements[1:]]
            for name, group in groups.items()
        }
    if pins:
        doc["pins"] = list(pins)
    return doc


def write(path: str | Path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
