"""Deterministic direction and state sampling.

Classification reports must be reproducible, so fiber directions come from
low-discrepancy constructions (equispaced angles for n = 2, a Fibonacci
lattice for n = 3) rotated by a seed-dependent offset, then rescaled onto
the unit alpha-sphere.  Higher dimensions fall back to a seeded Gaussian
draw, which is equally deterministic for a fixed seed.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import RegularityError
from .metrics import MetricSpec, PointState, point_state

_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def unit_directions(n: int, count: int, seed: int = 0) -> np.ndarray:
    """``count`` well-spread unit vectors in R^n; deterministic in seed."""
    offset = math.modf(seed * _GOLDEN)[0]
    if n == 2:
        theta = 2.0 * math.pi * ((np.arange(count) + 0.5) / count + offset)
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if n == 3:
        j = np.arange(count)
        z = 1.0 - 2.0 * (j + 0.5) / count
        az = 2.0 * math.pi * ((j * (_GOLDEN - 1.0)) % 1.0 + offset)
        rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        return np.column_stack([rho * np.cos(az), rho * np.sin(az), z])
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def alpha_sphere_states(
    spec: MetricSpec, x, count: int, seed: int = 0
) -> list[PointState]:
    """Point states at base point x with directions scaled to alpha = 1."""
    dirs = unit_directions(spec.dim, count, seed)
    states = []
    for d in dirs:
        p = point_state(spec, x, d)
        states.append(point_state(spec, x, tuple(np.asarray(d) / p.alpha)))
    return states


def sample_states(
    spec: MetricSpec,
    base_points,
    directions_per_point: int,
    seed: int = 0,
) -> list[PointState]:
    """States for a list of base points; directions are alpha-normalized."""
    states: list[PointState] = []
    for k, x in enumerate(base_points):
        states.extend(alpha_sphere_states(spec, tuple(x), directions_per_point, seed + k))
    return states


def random_regular_states(
    spec: MetricSpec,
    count: int,
    seed: int = 0,
    box: float = 0.3,
    normalize_alpha: bool = True,
) -> list[PointState]:
    """Seeded random states inside the chart box, skipping irregular draws."""
    rng = np.random.default_rng(seed)
    states: list[PointState] = []
    attempts = 0
    while len(states) < count:
        attempts += 1
        if attempts > 50 * count:
            raise RegularityError("could not find enough regular sample states")
        x = rng.uniform(-box, box, spec.dim)
        y = rng.normal(size=spec.dim)
        try:
            p = point_state(spec, tuple(x), tuple(y))
            if normalize_alpha:
                p = point_state(spec, tuple(x), tuple(y / p.alpha))
        except RegularityError:
            continue
        states.append(p)
    return states
