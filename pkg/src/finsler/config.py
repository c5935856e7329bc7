"""Run-configuration loading and validation.

A run configuration is a JSON document::

    {
      "dim": 2,
      "a": [["1", "0"], ["0", "1"]],
      "b": ["0.2", "0"],
      "family": {"name": "second_matsumoto"},
      "sample": {"base_points": [[0.0, 0.0]], "directions_per_point": 24,
                 "seed": 0},
      "tolerance": 1e-7,
      "resolution": 64,
      "geodesic": {"x0": [0.0, 0.0], "y0": [1.0, 0.0], "t_end": 1.0,
                   "step": 0.01}
    }

``family.name`` is one of ``riemannian``, ``randers``, ``matsumoto``,
``second_matsumoto``, ``approx_matsumoto`` (with ``order``), ``polynomial``
(with ``coefficients``).  Validation failures raise ``ConfigError`` naming
the JSON path of the offending entry.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .errors import ConfigError, ParseError
from .expressions import parse
from .metrics import (
    MetricSpec,
    PhiFamily,
    approx_matsumoto,
    matsumoto,
    polynomial,
    randers,
    riemannian,
    second_matsumoto,
)

_FAMILIES = {
    "riemannian": riemannian,
    "randers": randers,
    "matsumoto": matsumoto,
    "second_matsumoto": second_matsumoto,
}


@dataclass(frozen=True)
class GeodesicRequest:
    x0: tuple[float, ...]
    y0: tuple[float, ...]
    t_end: float
    step: float


@dataclass(frozen=True)
class RunConfig:
    spec: MetricSpec
    base_points: tuple[tuple[float, ...], ...]
    directions_per_point: int
    seed: int
    tolerance: float
    resolution: int
    geodesic: GeodesicRequest | None
    config_sha256: str
    raw: dict = field(repr=False)


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        raise ConfigError("missing required field", f"{path}.{key}" if path else key)
    return doc[key]


def _parse_expr(text, dim: int, path: str):
    if not isinstance(text, str):
        raise ConfigError("expression must be a string", path)
    try:
        return parse(text, dim)
    except ParseError as exc:
        raise ConfigError(f"bad expression: {exc}", path)


def _family(doc, path: str) -> PhiFamily:
    if not isinstance(doc, dict):
        raise ConfigError("family must be an object with a 'name'", path)
    name = _require(doc, "name", path)
    if name in _FAMILIES:
        return _FAMILIES[name]()
    if name == "approx_matsumoto":
        order = doc.get("order")
        if not isinstance(order, int) or order < 1:
            raise ConfigError("approx_matsumoto needs an integer order >= 1", f"{path}.order")
        return approx_matsumoto(order)
    if name == "polynomial":
        coeffs = doc.get("coefficients")
        if not isinstance(coeffs, list) or not coeffs:
            raise ConfigError("polynomial needs a nonempty coefficient list", f"{path}.coefficients")
        return polynomial([float(c) for c in coeffs])
    raise ConfigError(f"unknown family {name!r}", f"{path}.name")


def _point(v, dim: int, path: str) -> tuple[float, ...]:
    if not isinstance(v, list) or len(v) != dim:
        raise ConfigError(f"expected a list of {dim} numbers", path)
    try:
        return tuple(float(c) for c in v)
    except (TypeError, ValueError):
        raise ConfigError("expected numeric entries", path)


def parse_config(doc: dict, sha256: str = "") -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("top-level document must be an object", "")
    dim = _require(doc, "dim", "")
    if not isinstance(dim, int) or dim < 2:
        raise ConfigError("dim must be an integer >= 2", "dim")
    a_doc = _require(doc, "a", "")
    if not isinstance(a_doc, list) or len(a_doc) != dim or any(
        not isinstance(r, list) or len(r) != dim for r in a_doc
    ):
        raise ConfigError(f"a must be a {dim}x{dim} table of expressions", "a")
    a = tuple(
        tuple(_parse_expr(a_doc[i][j], dim, f"a.{i}.{j}") for j in range(dim))
        for i in range(dim)
    )
    for i in range(dim):
        for j in range(i + 1, dim):
            if a[i][j] != a[j][i]:
                raise ConfigError("expression table is not symmetric", f"a.{i}.{j}")
    b_doc = _require(doc, "b", "")
    if not isinstance(b_doc, list) or len(b_doc) != dim:
        raise ConfigError(f"b must list {dim} expressions", "b")
    b = tuple(_parse_expr(b_doc[i], dim, f"b.{i}") for i in range(dim))
    family = _family(_require(doc, "family", ""), "family")
    spec = MetricSpec(dim, a, b, family)

    sample = doc.get("sample", {})
    if not isinstance(sample, dict):
        raise ConfigError("sample must be an object", "sample")
    bp_doc = sample.get("base_points", [[0.0] * dim])
    if not isinstance(bp_doc, list) or not bp_doc:
        raise ConfigError("base_points must be a nonempty list", "sample.base_points")
    base_points = tuple(
        _point(bp_doc[k], dim, f"sample.base_points.{k}") for k in range(len(bp_doc))
    )
    directions = sample.get("directions_per_point", 24)
    if not isinstance(directions, int) or directions < 1:
        raise ConfigError("directions_per_point must be a positive integer", "sample.directions_per_point")
    seed = sample.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer", "sample.seed")

    tol = doc.get("tolerance", 1e-7)
    if not isinstance(tol, (int, float)) or tol <= 0:
        raise ConfigError("tolerance must be positive", "tolerance")
    resolution = doc.get("resolution", 64)
    if not isinstance(resolution, int) or resolution <= 0:
        raise ConfigError("resolution must be a positive integer", "resolution")

    geo_req = None
    if "geodesic" in doc:
        gd = doc["geodesic"]
        if not isinstance(gd, dict):
            raise ConfigError("geodesic must be an object", "geodesic")
        x0 = _point(_require(gd, "x0", "geodesic"), dim, "geodesic.x0")
        y0 = _point(_require(gd, "y0", "geodesic"), dim, "geodesic.y0")
        t_end = gd.get("t_end", 1.0)
        step = gd.get("step", 0.01)
        if not isinstance(t_end, (int, float)) or t_end <= 0:
            raise ConfigError("t_end must be positive", "geodesic.t_end")
        if not isinstance(step, (int, float)) or step <= 0:
            raise ConfigError("step must be positive", "geodesic.step")
        geo_req = GeodesicRequest(x0, y0, float(t_end), float(step))

    return RunConfig(
        spec=spec,
        base_points=base_points,
        directions_per_point=directions,
        seed=seed,
        tolerance=float(tol),
        resolution=resolution,
        geodesic=geo_req,
        config_sha256=sha256,
        raw=doc,
    )


def load_config(path: str) -> RunConfig:
    """Read, hash and validate a configuration file."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read file: {exc}", "")
    sha = hashlib.sha256(blob).hexdigest()
    try:
        doc = json.loads(blob)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}", "")
    return parse_config(doc, sha)
