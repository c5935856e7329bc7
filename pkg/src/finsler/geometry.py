"""Definitional Finsler curvature kernels.

Every quantity here is produced from jets of F^2 = (alpha * phi(beta/alpha))^2
at a single point: the fundamental tensor is half the fiber Hessian, the
spray comes from its mixed base/fiber derivatives, Berwald/Riemann/Landsberg
data are higher derivatives of the spray, and the horizontal derivatives use
the nonlinear connection.  No finite differences appear on these paths; the
FD machinery lives in the jets module purely as a test oracle.

Each kernel states the truncation orders of F^2 it needs and the per-point
cache in ``PointState`` shares the intermediate jets between kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ArgumentError,
    DegenerateFlagError,
    DomainError,
    EvaluationError,
    IntegrationError,
    RegularityError,
)
from .expressions import evaluate
from .jets import Series, SeriesSpace
from .metrics import MetricSpec, PointState, point_state

SprayFunction = Callable[[Sequence[Series], Sequence[Series]], Sequence[Series]]


def _check(spec: MetricSpec, p: PointState) -> None:
    if p.spec is not spec and p.spec != spec:
        raise ArgumentError("point state was built for a different metric spec")


def _map_series(v, f):
    if isinstance(v, Series):
        return f(v)
    return [_map_series(u, f) for u in v]


def _get_cached(p: PointState, name: str, kx: int, ky: int, builder):
    key = (name, kx, ky)
    val = p.cache.get(key)
    if val is not None:
        return val
    for k2, v2 in list(p.cache.items()):
        if (
            isinstance(k2, tuple)
            and len(k2) == 3
            and k2[0] == name
            and k2[1] >= kx
            and k2[2] >= ky
        ):
            space = SeriesSpace.get(p.dim, p.dim, kx, ky)
            val = _map_series(v2, lambda s: s.in_space(space))
            p.cache[key] = val
            return val
    val = builder()
    p.cache[key] = val
    return val


# -- F^2 and metric jets -----------------------------------------------------


def _build_f2(p: PointState, kx: int, ky: int) -> tuple[Series, Series]:
    """(F series, F^2 series) at truncation (kx, ky)."""
    spec = p.spec
    n = spec.dim
    space = SeriesSpace.get(n, n, kx, ky)
    env = [space.variable(i, p.x[i]) for i in range(n)] if kx > 0 else [
        space.constant(v) for v in p.x
    ]
    ys = [space.variable(n + i, p.y[i]) for i in range(n)] if ky > 0 else [
        space.constant(v) for v in p.y
    ]

    def as_series(v):
        return v if isinstance(v, Series) else space.constant(float(v))

    A = None
    for i in range(n):
        for j in range(i, n):
            aij = as_series(evaluate(spec.a[i][j], env))
            term = aij * (ys[i] * ys[j])
            if i != j:
                term = term * 2.0
            A = term if A is None else A + term
    alpha = A.sqrt()
    if spec.family.is_riemannian:
        F = alpha
    else:
        B = None
        for i in range(n):
            bi = as_series(evaluate(spec.b[i], env))
            term = bi * ys[i]
            B = term if B is None else B + term
        F = alpha * spec.family.phi(B / alpha)
    f2 = F * F
    if not np.all(np.isfinite(f2.c)):
        raise EvaluationError("non-finite coefficient while building the metric jet")
    return F, f2


def _f2_series(p: PointState, kx: int, ky: int) -> Series:
    def build():
        F, f2 = _build_f2(p, kx, ky)
        p.cache[("F", kx, ky)] = F
        return f2

    return _get_cached(p, "f2", kx, ky, build)


def _f_series(p: PointState, kx: int, ky: int) -> Series:
    def build():
        F, f2 = _build_f2(p, kx, ky)
        p.cache[("f2", kx, ky)] = f2
        return F

    return _get_cached(p, "F", kx, ky, build)


def _g_series(p: PointState, kx: int, ky: int) -> list[list[Series]]:
    def build():
        n = p.dim
        f2 = _f2_series(p, kx, ky + 2)
        g = [[None] * n for _ in range(n)]
        for i in range(n):
            di = f2.deriv(n + i)
            for j in range(i, n):
                gij = di.deriv(n + j) * 0.5
                g[i][j] = gij
                g[j][i] = gij
        return g

    return _get_cached(p, "g", kx, ky, build)


def _ginv_series(p: PointState, kx: int, ky: int) -> list[list[Series]]:
    def build():
        n = p.dim
        g = _g_series(p, kx, ky)
        space = g[0][0].space
        g0 = np.array([[g[i][j].value for j in range(n)] for i in range(n)])
        try:
            inv0 = np.linalg.inv(g0)
        except np.linalg.LinAlgError:
            raise RegularityError("fundamental tensor is singular at this point")
        ghat = [[g[i][j] - g0[i, j] for j in range(n)] for i in range(n)]
        X = [[space.constant(inv0[i, j]) for j in range(n)] for i in range(n)]
        for _ in range(kx + ky):
            GX = [
                [sum_series(ghat[i][k] * X[k][j] for k in range(n)) for j in range(n)]
                for i in range(n)
            ]
            X = [
                [
                    space.constant(inv0[i, j])
                    - sum_series(inv0[i, k] * GX[k][j] for k in range(n))
                    for j in range(n)
                ]
                for i in range(n)
            ]
        return X

    return _get_cached(p, "ginv", kx, ky, build)


def sum_series(items):
    acc = None
    for it in items:
        acc = it if acc is None else acc + it
    return acc


def _spray_series(p: PointState, gx: int, gy: int) -> list[Series]:
    def build():
        n = p.dim
        f2 = _f2_series(p, gx + 1, gy + 2)
        space = SeriesSpace.get(n, n, gx, gy)
        ys = (
            [space.variable(n + i, p.y[i]) for i in range(n)]
            if gy > 0
            else [space.constant(v) for v in p.y]
        )
        dx = [f2.deriv(l) for l in range(n)]  # (gx, gy+2)
        T = []
        for l in range(n):
            acc = None
            for k in range(n):
                dkl = dx[k].deriv(n + l).in_space(space)
                term = ys[k] * dkl
                acc = term if acc is None else acc + term
            T.append(acc - dx[l].in_space(space))
        ginv = _ginv_series(p, gx, gy)
        return [
            sum_series(ginv[i][l] * T[l] for l in range(n)) * 0.25 for i in range(n)
        ]

    return _get_cached(p, "spray", gx, gy, build)


def _mean_cartan_series(p: PointState, ix: int, iy: int) -> list[Series]:
    def build():
        n = p.dim
        f2 = _f2_series(p, ix, iy + 3)
        ginv = _ginv_series(p, ix, iy)
        out = []
        for i in range(n):
            di = f2.deriv(n + i)
            acc = None
            for j in range(n):
                dij = di.deriv(n + j)
                for k in range(j, n):
                    C = dij.deriv(n + k) * 0.25
                    w = 1.0 if j == k else 2.0
                    term = (ginv[j][k] * C) * w
                    acc = term if acc is None else acc + term
            out.append(acc)
        return out

    return _get_cached(p, "meancartan", ix, iy, build)


def _mean_landsberg_series(p: PointState, jx: int, jy: int) -> list[Series]:
    def build():
        n = p.dim
        space = SeriesSpace.get(n, n, jx, jy)
        I = _mean_cartan_series(p, jx + 1, jy + 1)
        G = _spray_series(p, jx, jy)
        Gy = _spray_series(p, jx, jy + 1)
        N = [[Gy[m].deriv(n + i) for i in range(n)] for m in range(n)]
        ys = (
            [space.variable(n + i, p.y[i]) for i in range(n)]
            if jy > 0
            else [space.constant(v) for v in p.y]
        )
        I_r = [I[i].in_space(space) for i in range(n)]
        out = []
        for i in range(n):
            acc = None
            for m in range(n):
                t1 = ys[m] * I[i].deriv(m).in_space(space)
                t2 = (G[m] * I[i].deriv(n + m).in_space(space)) * 2.0
                t3 = I_r[m] * N[m][i].in_space(space)
                term = t1 - t2 - t3
                acc = term if acc is None else acc + term
            out.append(acc)
        return out

    return _get_cached(p, "meanlandsberg", jx, jy, build)


def _exp_tuple(n: int, x_vars: Sequence[int] = (), y_vars: Sequence[int] = ()) -> tuple:
    e = [0] * (2 * n)
    for i in x_vars:
        e[i] += 1
    for i in y_vars:
        e[n + i] += 1
    return tuple(e)


# -- public kernels ----------------------------------------------------------


def fundamental_tensor(spec: MetricSpec, p: PointState) -> np.ndarray:
    """g_ij = half the fiber Hessian of F^2; positive definite on the domain."""
    _check(spec, p)
    n = spec.dim
    f2 = _f2_series(p, 0, 2)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = 0.5 * f2.partial(_exp_tuple(n, y_vars=(i, j)))
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise RegularityError("fundamental tensor not positive definite")
    return g


def inverse_fundamental(spec: MetricSpec, p: PointState) -> np.ndarray:
    return np.linalg.inv(fundamental_tensor(spec, p))


def angular_metric(spec: MetricSpec, p: PointState) -> np.ndarray:
    """h_ij = g_ij - F^-2 (g y)_i (g y)_j; annihilates y."""
    _check(spec, p)
    g = fundamental_tensor(spec, p)
    gy = g @ np.asarray(p.y)
    return g - np.outer(gy, gy) / (p.F * p.F)


def cartan_torsion(spec: MetricSpec, p: PointState) -> np.ndarray:
    """C_ijk = quarter of the third fiber derivative of F^2; totally symmetric."""
    _check(spec, p)
    n = spec.dim
    f2 = _f2_series(p, 0, 3)
    C = np.empty((n, n, n))
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                v = 0.25 * f2.partial(_exp_tuple(n, y_vars=(i, j, k)))
                for perm in {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}:
                    C[perm] = v
    return C


def mean_cartan(spec: MetricSpec, p: PointState) -> np.ndarray:
    """I_i = g^{jk} C_ijk; vanishes exactly for Riemannian metrics."""
    _check(spec, p)
    C = cartan_torsion(spec, p)
    ginv = inverse_fundamental(spec, p)
    return np.einsum("jk,ijk->i", ginv, C)


def norm_fiber_derivatives(spec: MetricSpec, p: PointState) -> tuple[np.ndarray, np.ndarray]:
    """Second and third fiber derivatives of F itself (not F^2), the
    building blocks of the isotropic-Berwald pattern."""
    _check(spec, p)
    n = spec.dim
    F_ser = _f_series(p, 0, 3)
    F2 = np.empty((n, n))
    F3 = np.empty((n, n, n))
    for j in range(n):
        for k in range(j, n):
            F2[j, k] = F2[k, j] = F_ser.partial(_exp_tuple(n, y_vars=(j, k)))
            for l in range(k, n):
                v = F_ser.partial(_exp_tuple(n, y_vars=(j, k, l)))
                for perm in {
                    (j, k, l), (j, l, k), (k, j, l), (k, l, j), (l, j, k), (l, k, j)
                }:
                    F3[perm] = v
    return F2, F3


def spray(spec: MetricSpec, p: PointState) -> np.ndarray:
    """Geodesic spray coefficients G^i; positively 2-homogeneous in y."""
    _check(spec, p)
    return np.array([s.value for s in _spray_series(p, 0, 0)])


def nonlinear_connection(spec: MetricSpec, p: PointState) -> np.ndarray:
    """N^i_j = dG^i/dy^j."""
    _check(spec, p)
    n = spec.dim
    G = _spray_series(p, 0, 1)
    N = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            N[i, j] = G[i].partial(_exp_tuple(n, y_vars=(j,)))
    return N


def berwald_curvature(spec: MetricSpec, p: PointState) -> np.ndarray:
    """B^i_jkl = third fiber derivatives of the spray."""
    _check(spec, p)
    n = spec.dim
    G = _spray_series(p, 0, 3)
    return _berwald_from_sprays(G, n)


def _berwald_from_sprays(G: list[Series], n: int) -> np.ndarray:
    B = np.empty((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                for l in range(k, n):
                    v = G[i].partial(_exp_tuple(n, y_vars=(j, k, l)))
                    for perm in {
                        (j, k, l), (j, l, k), (k, j, l), (k, l, j), (l, j, k), (l, k, j)
                    }:
                        B[(i,) + perm] = v
    return B


def mean_berwald(spec: MetricSpec, p: PointState) -> np.ndarray:
    """E_jk = half the trace B^m_jkm."""
    _check(spec, p)
    B = berwald_curvature(spec, p)
    return 0.5 * np.einsum("mjkm->jk", B)


def douglas_curvature(spec: MetricSpec, p: PointState) -> np.ndarray:
    """Trace-adjusted Berwald curvature; zero iff the spray is projectively affine."""
    _check(spec, p)
    n = spec.dim
    G = _spray_series(p, 0, 4)
    return _douglas_from_sprays(G, n, np.asarray(p.y))


def _douglas_from_sprays(G: list[Series], n: int, y: np.ndarray) -> np.ndarray:
    B = _berwald_from_sprays(G, n)
    E = 0.5 * np.einsum("mjkm->jk", B)
    El = np.empty((n, n, n))
    for j in range(n):
        for k in range(j, n):
            for l in range(n):
                v = 0.5 * sum(
                    G[m].partial(_exp_tuple(n, y_vars=(j, k, m, l))) for m in range(n)
                )
                El[j, k, l] = El[k, j, l] = v
    D = B.copy()
    eye = np.eye(n)
    D -= (2.0 / (n + 1)) * (
        np.einsum("jk,il->ijkl", E, eye)
        + np.einsum("jl,ik->ijkl", E, eye)
        + np.einsum("kl,ij->ijkl", E, eye)
        + np.einsum("jkl,i->ijkl", El, y)
    )
    return D


def riemann_curvature(spec: MetricSpec, p: PointState) -> np.ndarray:
    """R^i_k from the four-term spray formula; R^i_k y^k = 0."""
    _check(spec, p)
    G = _spray_series(p, 1, 2)
    return _riemann_from_sprays(G, spec.dim, np.asarray(p.y))


def _riemann_from_sprays(G: list[Series], n: int, y: np.ndarray) -> np.ndarray:
    Gv = np.array([g.value for g in G])
    dGx = np.empty((n, n))
    dGy = np.empty((n, n))
    dGxy = np.empty((n, n, n))
    dGyy = np.empty((n, n, n))
    for i in range(n):
        for j in range(n):
            dGx[i, j] = G[i].partial(_exp_tuple(n, x_vars=(j,)))
            dGy[i, j] = G[i].partial(_exp_tuple(n, y_vars=(j,)))
            for k in range(n):
                dGxy[i, j, k] = G[i].partial(_exp_tuple(n, x_vars=(j,), y_vars=(k,)))
                dGyy[i, j, k] = G[i].partial(_exp_tuple(n, y_vars=(j, k)))
    R = (
        2.0 * dGx
        - np.einsum("j,ijk->ik", y, dGxy)
        + 2.0 * np.einsum("j,ijk->ik", Gv, dGyy)
        - np.einsum("ij,jk->ik", dGy, dGy)
    )
    return R


def flag_curvature(spec: MetricSpec, p: PointState, u: Sequence[float]) -> float:
    """Flag curvature of the flag spanned by y and u with flagpole y.

    ``u`` is first orthogonalized against y in g_y, which leaves the value
    unchanged but improves conditioning.
    """
    _check(spec, p)
    y = np.asarray(p.y)
    u = np.asarray(u, dtype=float)
    g = fundamental_tensor(spec, p)
    gyy = float(y @ g @ y)
    u_orth = u - (float(u @ g @ y) / gyy) * y
    guu = float(u_orth @ g @ u_orth)
    if guu <= 1e-12 * float(u @ g @ u):
        raise DegenerateFlagError("transverse vector is parallel to the flagpole")
    R = riemann_curvature(spec, p)
    gyu = float(y @ g @ u_orth)
    denom = gyy * guu - gyu * gyu
    return float(u_orth @ g @ (R @ u_orth)) / denom


def mean_landsberg(spec: MetricSpec, p: PointState) -> np.ndarray:
    """J_i: horizontal derivative of the mean Cartan torsion along the spray,
    J_i = y^m dI_i/dx^m - 2 G^m dI_i/dy^m - I_m N^m_i."""
    _check(spec, p)
    n = spec.dim
    I_ser = _mean_cartan_series(p, 1, 1)
    Iv = np.array([s.value for s in I_ser])
    G = spray(spec, p)
    N = nonlinear_connection(spec, p)
    y = np.asarray(p.y)
    J = np.empty(n)
    for i in range(n):
        dIx = np.array([I_ser[i].partial(_exp_tuple(n, x_vars=(m,))) for m in range(n)])
        dIy = np.array([I_ser[i].partial(_exp_tuple(n, y_vars=(m,))) for m in range(n)])
        J[i] = float(y @ dIx - 2.0 * G @ dIy - Iv @ N[:, i])
    return J


def akbar_zadeh_residual(spec: MetricSpec, p: PointState, K: float) -> float:
    """max_i |J_{i;m} y^m + K F^2 I_i| for a caller-asserted constant flag
    curvature K; the gradient term of K drops since K is constant."""
    _check(spec, p)
    n = spec.dim
    J_ser = _mean_landsberg_series(p, 1, 1)
    Jv = np.array([s.value for s in J_ser])
    G = spray(spec, p)
    N = nonlinear_connection(spec, p)
    Iv = mean_cartan(spec, p)
    y = np.asarray(p.y)
    res = 0.0
    for i in range(n):
        dJx = np.array([J_ser[i].partial(_exp_tuple(n, x_vars=(m,))) for m in range(n)])
        dJy = np.array([J_ser[i].partial(_exp_tuple(n, y_vars=(m,))) for m in range(n)])
        cov = float(y @ dJx - 2.0 * G @ dJy - Jv @ N[:, i])
        res = max(res, abs(cov + K * p.F * p.F * Iv[i]))
    return res


# -- custom sprays -----------------------------------------------------------


@dataclass(frozen=True)
class SprayCurvatures:
    """Berwald-type data of an arbitrary spray supplied as a callable."""

    B: np.ndarray
    E: np.ndarray
    D: np.ndarray
    R: np.ndarray


def curvatures_from_spray(
    spray_fn: SprayFunction, x: Sequence[float], y: Sequence[float]
) -> SprayCurvatures:
    """Evaluate B, E, D, R for spray coefficients given as a function of
    jet coordinates; used to probe projective invariance directly."""
    n = len(x)
    space = SeriesSpace.get(n, n, 1, 4)
    xs = [space.variable(i, float(x[i])) for i in range(n)]
    ys = [space.variable(n + i, float(y[i])) for i in range(n)]
    G_raw = spray_fn(xs, ys)
    G = [g if isinstance(g, Series) else space.constant(float(g)) for g in G_raw]
    yv = np.asarray(y, dtype=float)
    B = _berwald_from_sprays(G, n)
    E = 0.5 * np.einsum("mjkm->jk", B)
    D = _douglas_from_sprays(G, n, yv)
    R = _riemann_from_sprays(G, n, yv)
    return SprayCurvatures(B=B, E=E, D=D, R=R)


# -- geodesics ---------------------------------------------------------------


@dataclass
class GeodesicPath:
    """Sampled solution of c'' + 2 G(c, c') = 0."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    F: np.ndarray

    @property
    def drift(self) -> float:
        """Max relative drift of F(c, c') along the run."""
        F0 = self.F[0]
        return float(np.max(np.abs(self.F - F0)) / abs(F0))


def geodesic_integrate(
    spec: MetricSpec,
    x0: Sequence[float],
    y0: Sequence[float],
    t_end: float,
    step: float,
) -> GeodesicPath:
    """Classical fixed-step RK4 for the geodesic ODE."""
    if step <= 0.0:
        raise ArgumentError("step must be positive")
    if t_end <= 0.0:
        raise ArgumentError("t_end must be positive")

    def accel(x: np.ndarray, v: np.ndarray) -> np.ndarray:
        ps = point_state(spec, tuple(x), tuple(v))
        return -2.0 * spray(spec, ps)

    x = np.asarray(x0, dtype=float).copy()
    v = np.asarray(y0, dtype=float).copy()
    ts = [0.0]
    xs = [x.copy()]
    vs = [v.copy()]
    Fs = [point_state(spec, tuple(x), tuple(v)).F]
    t = 0.0
    while t < t_end - 1e-12:
        h = min(step, t_end - t)
        try:
            k1x, k1v = v, accel(x, v)
            k2x, k2v = v + 0.5 * h * k1v, accel(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
            k3x, k3v = v + 0.5 * h * k2v, accel(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
            k4x, k4v = v + h * k3v, accel(x + h * k3x, v + h * k3v)
            x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
            v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
            t += h
            F_here = point_state(spec, tuple(x), tuple(v)).F
        except (RegularityError, EvaluationError, DomainError, ArgumentError) as exc:
            raise IntegrationError(f"trajectory left the regularity domain: {exc}", t)
        ts.append(t)
        xs.append(x.copy())
        vs.append(v.copy())
        Fs.append(F_here)
    return GeodesicPath(np.array(ts), np.array(xs), np.array(vs), np.array(Fs))


# -- assembled bundle --------------------------------------------------------


@dataclass
class CurvatureBundle:
    """Every pointwise tensor of interest, computed with shared jets."""

    g: np.ndarray
    g_inv: np.ndarray
    h: np.ndarray
    C: np.ndarray
    I: np.ndarray
    G: np.ndarray
    N: np.ndarray
    B: np.ndarray
    E: np.ndarray
    D: np.ndarray
    R: np.ndarray
    J: np.ndarray
    S: float | None = None


def curvature_bundle(
    spec: MetricSpec,
    p: PointState,
    with_s: bool = False,
    resolution: int = 64,
) -> CurvatureBundle:
    _check(spec, p)
    bundle = CurvatureBundle(
        g=fundamental_tensor(spec, p),
        g_inv=inverse_fundamental(spec, p),
        h=angular_metric(spec, p),
        C=cartan_torsion(spec, p),
        I=mean_cartan(spec, p),
        G=spray(spec, p),
        N=nonlinear_connection(spec, p),
        B=berwald_curvature(spec, p),
        E=mean_berwald(spec, p),
        D=douglas_curvature(spec, p),
        R=riemann_curvature(spec, p),
        J=mean_landsberg(spec, p),
    )
    if with_s:
        from . import busemann  # deferred: busemann imports this module

        bundle.S = busemann.s_curvature_definitional(spec, p, resolution)
    return bundle
