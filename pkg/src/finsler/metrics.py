"""Metric specifications for (alpha,beta)-metrics F = alpha * phi(beta/alpha).

A ``MetricSpec`` bundles a chart dimension, expression-valued Riemannian
data a_ij(x), a 1-form b_i(x) and a ``PhiFamily``.  ``PointState`` caches
the scalar invariants of one (x, y) together with the jet intermediates
that the geometry kernels share.

Regularity at a point means: a(x) positive definite, b^2 < 1, and the
strong-convexity criteria phi - s*phi' > 0 and
(phi - s*phi') + (b^2 - s^2)*phi'' > 0.  Violations raise
``RegularityError`` rather than letting NaNs poison downstream tensors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArgumentError, RegularityError
from .expressions import Expr, evaluate, parse
from .jets import Series, SeriesSpace


@dataclass(frozen=True)
class PhiFamily:
    """One admissible profile phi(s); ``coeffs`` are ascending powers of s
    for the polynomial kinds and unused for the Matsumoto slope profile."""

    kind: str  # riemannian | polynomial | matsumoto
    coeffs: tuple[float, ...] = ()
    label: str = ""

    @property
    def is_riemannian(self) -> bool:
        return self.kind == "riemannian"

    def phi(self, s):
        """Evaluate phi on a float, numpy array or jet Series."""
        if self.kind == "riemannian":
            return s * 0.0 + 1.0
        if self.kind == "matsumoto":
            return 1.0 / (1.0 - s)
        acc = self.coeffs[-1] * (s * 0.0 + 1.0) if isinstance(s, Series) else self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * s + c
        return acc


def riemannian() -> PhiFamily:
    return PhiFamily("riemannian", (1.0,), "riemannian")


def randers() -> PhiFamily:
    return PhiFamily("polynomial", (1.0, 1.0), "randers")


def approx_matsumoto(order: int) -> PhiFamily:
    """Truncation of the slope profile 1/(1-s) to powers s^0..s^order."""
    if order < 1:
        raise ArgumentError("approx_matsumoto order must be >= 1")
    return PhiFamily("polynomial", (1.0,) * (order + 1), f"approx_matsumoto({order})")


def second_matsumoto() -> PhiFamily:
    """phi(s) = 1 + s + s^2 + s^3, the second approximate Matsumoto profile."""
    return PhiFamily("polynomial", (1.0, 1.0, 1.0, 1.0), "second_matsumoto")


def matsumoto() -> PhiFamily:
    return PhiFamily("matsumoto", (), "matsumoto")


def polynomial(coeffs: Sequence[float]) -> PhiFamily:
    c = tuple(float(v) for v in coeffs)
    if not c:
        raise ArgumentError("polynomial family needs at least one coefficient")
    return PhiFamily("polynomial", c, f"polynomial{c}")


def phi_derivs(family: PhiFamily, s: float, order: int) -> list[float]:
    """[phi(s), phi'(s), ..., phi^(order)(s)] via one 1-d jet evaluation."""
    if family.is_riemannian:
        return [1.0] + [0.0] * order
    space = SeriesSpace.get(1, 0, order, 0)
    sv = space.variable(0, float(s))
    ser = family.phi(sv)
    return [ser.partial((k,)) for k in range(order + 1)]


@dataclass(frozen=True)
class MetricSpec:
    """Immutable chart-level description of one (alpha,beta)-metric."""

    dim: int
    a: tuple[tuple[Expr, ...], ...]
    b: tuple[Expr, ...]
    family: PhiFamily

    def __post_init__(self):
        if self.dim < 2:
            raise ArgumentError("chart dimension must be >= 2")
        if len(self.a) != self.dim or any(len(row) != self.dim for row in self.a):
            raise ArgumentError("a must be a dim x dim expression table")
        if len(self.b) != self.dim:
            raise ArgumentError("b must have one expression per coordinate")


def spec_from_strings(
    dim: int,
    a: Sequence[Sequence[str]],
    b: Sequence[str],
    family: PhiFamily,
) -> MetricSpec:
    """Convenience constructor parsing expression strings."""
    a_exprs = tuple(tuple(parse(s, dim) for s in row) for row in a)
    b_exprs = tuple(parse(s, dim) for s in b)
    return MetricSpec(dim, a_exprs, b_exprs, family)


def euclidean_spec(dim: int, family: PhiFamily | None = None, b: Sequence[str] | None = None) -> MetricSpec:
    """Flat chart a = identity; b defaults to zero."""
    a = [["1" if i == j else "0" for j in range(dim)] for i in range(dim)]
    bb = list(b) if b is not None else ["0"] * dim
    return spec_from_strings(dim, a, bb, family or riemannian())


class ChartData:
    """Numeric metric data at one base point, reused across many directions."""

    def __init__(self, spec: MetricSpec, x: Sequence[float]):
        self.spec = spec
        self.x = tuple(float(v) for v in x)
        if len(self.x) != spec.dim:
            raise ArgumentError(f"base point has {len(self.x)} coordinates, expected {spec.dim}")
        env = list(self.x)
        n = spec.dim
        a = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                a[i, j] = evaluate(spec.a[i][j], env)
        a = 0.5 * (a + a.T)
        try:
            np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            raise RegularityError(f"a(x) is not positive definite at x = {self.x}")
        self.a = a
        self.a_inv = np.linalg.inv(a)
        self.sqrt_det_a = float(np.sqrt(np.linalg.det(a)))
        self.b = np.array([evaluate(e, env) for e in spec.b], dtype=float)
        self.b_norm2 = float(self.b @ self.a_inv @ self.b)

    def alpha_beta(self, y: np.ndarray) -> tuple[float, float]:
        alpha2 = float(y @ self.a @ y)
        if alpha2 <= 0.0:
            raise RegularityError("alpha vanishes: zero fiber vector")
        return float(np.sqrt(alpha2)), float(self.b @ y)

    def norm(self, y: np.ndarray) -> float:
        alpha, beta = self.alpha_beta(y)
        if self.spec.family.is_riemannian:
            return alpha
        return alpha * float(self.spec.family.phi(beta / alpha))

    def norms(self, Y: np.ndarray) -> np.ndarray:
        """Vectorized F over rows of Y; used by the volume quadrature."""
        alpha = np.sqrt(np.einsum("ki,ij,kj->k", Y, self.a, Y))
        if np.any(alpha <= 0.0) or not np.all(np.isfinite(alpha)):
            raise RegularityError("alpha not positive on direction batch")
        if self.spec.family.is_riemannian:
            return alpha
        s = (Y @ self.b) / alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            phi = self.spec.family.phi(s)
        F = alpha * phi
        if not np.all(np.isfinite(F)):
            raise RegularityError("F not finite on direction batch")
        return F


@dataclass(frozen=True, eq=True)
class PointState:
    """One regular (x, y) with its scalar invariants and a jet cache."""

    spec: MetricSpec
    x: tuple[float, ...]
    y: tuple[float, ...]
    alpha: float
    beta: float
    s: float
    b2: float
    F: float
    cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def dim(self) -> int:
        return self.spec.dim


def point_state(spec: MetricSpec, x: Sequence[float], y: Sequence[float]) -> PointState:
    """Validate regularity of (x, y) and cache the chart data."""
    chart = ChartData(spec, x)
    yv = np.asarray(y, dtype=float)
    if yv.shape != (spec.dim,):
        raise ArgumentError(f"fiber vector has shape {yv.shape}, expected ({spec.dim},)")
    if not np.any(yv):
        raise ArgumentError("fiber vector must be nonzero")
    alpha, beta = chart.alpha_beta(yv)
    s = beta / alpha
    b2 = chart.b_norm2
    if b2 >= 1.0:
        raise RegularityError(f"b^2 = {b2} >= 1 at x = {chart.x}")
    if spec.family.is_riemannian:
        F = alpha
    else:
        phi0, phi1, phi2 = phi_derivs(spec.family, s, 2)
        reg1 = phi0 - s * phi1
        reg2 = reg1 + (b2 - s * s) * phi2
        if phi0 <= 0.0 or reg1 <= 0.0 or reg2 <= 0.0:
            raise RegularityError(
                f"convexity criterion violated at s = {s:.6g}, b^2 = {b2:.6g}"
            )
        F = alpha * phi0
    ps = PointState(spec, chart.x, tuple(float(v) for v in yv), alpha, beta, s, b2, F)
    ps.cache["chart"] = chart
    return ps


def chart_of(p: PointState) -> ChartData:
    chart = p.cache.get("chart")
    if chart is None:
        chart = ChartData(p.spec, p.x)
        p.cache["chart"] = chart
    return chart
