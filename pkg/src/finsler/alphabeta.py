"""Closed-form machinery for (alpha,beta)-metrics.

The covariant data of the 1-form beta (r_ij, s_ij and their contractions),
the profile scalars Q, Theta, Psi, Delta, Phi, Psi1, Psi2, theta built from
phi(s), and the explicit formulas for the spray, the S-curvature, the mean
Cartan torsion and the mean Landsberg curvature.  Each closed form has the
matching definitional kernel in ``geometry`` as its independent oracle; the
test suite drives the two against each other.

Two transcription notes, both validated against the definitional kernels:

* Q uses the denominator phi - s*phi' (the variant consistent with the
  second-Matsumoto specialization; the exact-arithmetic certificate in
  ``ratfunc`` pins this down).
* In the S-curvature formula the volume term lambda multiplies both
  contractions r_0 and s_0 -- the arrangement under which the closed form
  reproduces the Busemann-Hausdorff definition exactly.  lambda itself is
  -f'(b)/(2 b f(b)) for the volume-ratio function f; ``busemann`` estimates
  it numerically and the definitional S-curvature arbitrates.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ArgumentError, DomainError, RegularityError
from .expressions import diff_expr, evaluate
from .jets import SeriesSpace
from .metrics import MetricSpec, PhiFamily, PointState, chart_of, phi_derivs


# -- covariant data of beta ---------------------------------------------------


@dataclass(frozen=True)
class BetaCovariant:
    """Covariant derivative of beta with respect to alpha at one point,
    split into symmetric (r) and antisymmetric (s) parts, plus every
    contraction the closed forms consume."""

    b_cov: np.ndarray  # b_{i|j}
    r: np.ndarray  # r_ij
    s: np.ndarray  # s_ij
    r_vec: np.ndarray  # r_j = b^i r_ij
    s_vec: np.ndarray  # s_j = b^i s_ij
    r00: float  # r_ij y^i y^j
    r0: float  # r_j y^j
    s0: float  # s_j y^j
    ri0: np.ndarray  # r_ij y^j
    si0: np.ndarray  # s_ij y^j
    si0_up: np.ndarray  # a^{im} s_{m0}


@lru_cache(maxsize=64)
def _metric_x_derivatives(spec: MetricSpec) -> tuple:
    """Symbolic d(a_ij)/dx^k and d(b_i)/dx^k, cached per spec."""
    n = spec.dim
    da = tuple(
        tuple(tuple(diff_expr(spec.a[i][j], k) for k in range(n)) for j in range(n))
        for i in range(n)
    )
    db = tuple(tuple(diff_expr(spec.b[i], k) for k in range(n)) for i in range(n))
    return da, db


def christoffel_symbols(spec: MetricSpec, x) -> np.ndarray:
    """Levi-Civita symbols of alpha at the base point, Gamma^k_ij."""
    n = spec.dim
    da, _ = _metric_x_derivatives(spec)
    env = [float(v) for v in x]
    dav = np.empty((n, n, n))  # dav[i,j,k] = d a_ij / dx^k
    for i in range(n):
        for j in range(n):
            for k in range(n):
                dav[i, j, k] = evaluate(da[i][j][k], env)
    a = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            a[i, j] = evaluate(spec.a[i][j], env)
    a_inv = np.linalg.inv(0.5 * (a + a.T))
    # Gamma^k_ij = 1/2 a^{kl} (d_i a_lj + d_j a_li - d_l a_ij)
    gamma = 0.5 * (
        np.einsum("kl,lji->kij", a_inv, dav)
        + np.einsum("kl,lij->kij", a_inv, dav)
        - np.einsum("kl,ijl->kij", a_inv, dav)
    )
    return gamma


def levi_civita_spray(spec: MetricSpec, p: PointState) -> np.ndarray:
    """Spray coefficients of alpha alone: 1/2 Gamma^i_jk y^j y^k."""
    gamma = christoffel_symbols(spec, p.x)
    y = np.asarray(p.y)
    return 0.5 * np.einsum("ijk,j,k->i", gamma, y, y)


def covariant_beta_data(spec: MetricSpec, p: PointState) -> BetaCovariant:
    """b_{i|j} = d b_i/dx^j - b_k Gamma^k_ij and all its contractions."""
    n = spec.dim
    chart = chart_of(p)
    _, db = _metric_x_derivatives(spec)
    env = list(p.x)
    dbv = np.empty((n, n))  # dbv[i,j] = d b_i / dx^j
    for i in range(n):
        for j in range(n):
            dbv[i, j] = evaluate(db[i][j], env)
    gamma = christoffel_symbols(spec, p.x)
    b = chart.b
    b_cov = dbv - np.einsum("k,kij->ij", b, gamma)
    r = 0.5 * (b_cov + b_cov.T)
    s = 0.5 * (b_cov - b_cov.T)
    b_up = chart.a_inv @ b
    r_vec = b_up @ r
    s_vec = b_up @ s
    y = np.asarray(p.y)
    ri0 = r @ y
    si0 = s @ y
    return BetaCovariant(
        b_cov=b_cov,
        r=r,
        s=s,
        r_vec=r_vec,
        s_vec=s_vec,
        r00=float(y @ r @ y),
        r0=float(r_vec @ y),
        s0=float(s_vec @ y),
        ri0=ri0,
        si0=si0,
        si0_up=chart.a_inv @ si0,
    )


# -- profile scalars ----------------------------------------------------------


@dataclass(frozen=True)
class PhiScalars:
    """The scalar functions of (s, b^2) entering every closed form."""

    s: float
    b2: float
    n: int
    Q: float
    Qp: float
    Qpp: float
    Theta: float
    Psi: float
    Psip: float
    Delta: float
    Phi: float
    Psi1: float
    Psi2: float
    theta: float
    PsiQp: float  # d/ds of (Psi * Q)
    lam: float | None = None


def phi_scalars(
    family: PhiFamily, s: float, b2: float, n: int, lam: float | None = None
) -> PhiScalars:
    """Evaluate Q, Theta, Psi, Delta, Phi, Psi1, Psi2, theta at (s, b^2).

    The primes (d/ds at fixed b^2) come from a one-variable jet of phi, so
    no hand-expanded derivative formulas enter.  Psi1 is computed in the
    square-root-free rearrangement
    Psi1 = -s*Phi/Delta + (b^2-s^2) * (Phi' - 1.5*Phi*Delta'/Delta) / Delta,
    identical to the textbook definition by the product rule.
    """
    if n < 2:
        raise ArgumentError("dimension must be >= 2")
    w = b2 - s * s
    if w < 0.0:
        raise DomainError(f"b^2 = {b2} < s^2 = {s * s}")
    if family.is_riemannian:
        return PhiScalars(
            s=s, b2=b2, n=n, Q=0.0, Qp=0.0, Qpp=0.0, Theta=0.0, Psi=0.0, Psip=0.0,
            Delta=1.0, Phi=0.0, Psi1=0.0, Psi2=0.0, theta=0.0, PsiQp=0.0, lam=lam,
        )
    space = SeriesSpace.get(1, 0, 5, 0)
    sv = space.variable(0, float(s))
    phi = family.phi(sv)
    phip = phi.deriv(0)
    phi_r = phi.in_space(phip.space)
    denom_q = phi_r - sv.in_space(phip.space) * phip
    if denom_q.value <= 0.0:
        raise RegularityError(f"phi - s*phi' = {denom_q.value} <= 0 at s = {s}")
    sQ = phip / denom_q  # series of Q in s, order 4
    sQp = sQ.deriv(0)
    sp3 = sQp.space  # order 3
    s3 = sv.in_space(sp3)
    Q3 = sQ.in_space(sp3)
    sDelta = 1.0 + s3 * Q3 + (b2 - s3 * s3) * sQp
    if sDelta.value == 0.0:
        raise RegularityError("Delta vanishes")
    sQpp = sQp.deriv(0)  # order 2
    sp2 = sQpp.space
    s2 = sv.in_space(sp2)
    Q2 = sQ.in_space(sp2)
    Qp2 = sQp.in_space(sp2)
    D2 = sDelta.in_space(sp2)
    sPhi = -(n * D2 + 1.0 + s2 * Q2) * (Q2 - s2 * Qp2) - (b2 - s2 * s2) * (
        1.0 + s2 * Q2
    ) * sQpp
    # Theta and Psi from phi directly (order 3 is plenty)
    phipp = phip.deriv(0)  # order 3
    sp3b = phipp.space
    phi3 = phi.in_space(sp3b)
    phip3 = phip.in_space(sp3b)
    s3b = sv.in_space(sp3b)
    bracket = (phi3 - s3b * phip3) + (b2 - s3b * s3b) * phipp
    if bracket.value <= 0.0:
        raise RegularityError("convexity denominator (phi - s phi') + (b^2-s^2) phi'' <= 0")
    sTheta = (phi3 * phip3 - s3b * (phi3 * phipp + phip3 * phip3)) / (2.0 * phi3 * bracket)
    sPsi = phipp / (2.0 * bracket)
    sPsip = sPsi.deriv(0)
    sPsiQ = sPsi * sQ.in_space(sPsi.space)
    sPsiQp = sPsiQ.deriv(0)
    Delta = sDelta.value
    Phi = sPhi.value
    Phip = sPhi.partial((1,))
    Deltap = sDelta.partial((1,))
    Psi1 = -s * Phi / Delta + w * (Phip - 1.5 * Phi * Deltap / Delta) / Delta
    Q = sQ.value
    Qp = sQ.partial((1,))
    Psi2 = 2.0 * (n + 1) * (Q - s * Qp) + 3.0 * Phi / Delta
    return PhiScalars(
        s=s,
        b2=b2,
        n=n,
        Q=Q,
        Qp=Qp,
        Qpp=sQ.partial((2,)),
        Theta=sTheta.value,
        Psi=sPsi.value,
        Psip=sPsi.partial((1,)),
        Delta=Delta,
        Phi=Phi,
        Psi1=Psi1,
        Psi2=Psi2,
        theta=(Q - s * Qp) / (2.0 * Delta),
        PsiQp=sPsiQp.value,
        lam=lam,
    )


def second_matsumoto_scalars(s: float, b2: float) -> tuple[float, float, float]:
    """The reduced (Q, Theta, Psi) of phi = 1 + s + s^2 + s^3, as published."""
    d1 = -1.0 + s * s + 2.0 * s**3
    if d1 == 0.0:
        raise RegularityError("reduced Q denominator vanishes")
    Q = -(1.0 + 2.0 * s + 3.0 * s * s) / d1
    d2 = 1.0 - 3.0 * s * s - 8.0 * s**3 + 2.0 * b2 + 6.0 * b2 * s
    d3 = 1.0 + s + s * s + s**3
    if d2 == 0.0 or d3 == 0.0:
        raise RegularityError("reduced Theta/Psi denominator vanishes")
    Theta = 0.5 * (1.0 - 6.0 * s**2 - 12.0 * s**3 - 15.0 * s**4 - 12.0 * s**5) / (d3 * d2)
    Psi = (1.0 + 3.0 * s) / d2
    return Q, Theta, Psi


# -- closed forms -------------------------------------------------------------


def spray_closed_form(spec: MetricSpec, p: PointState) -> np.ndarray:
    """G^i = G_alpha^i + alpha*Q*s^i_0 + theta*(r_00 - 2*alpha*Q*s_0) *
    [y^i/alpha + Q'/(Q - s*Q') * b^i]."""
    g_alpha = levi_civita_spray(spec, p)
    if spec.family.is_riemannian:
        return g_alpha
    sc = phi_scalars(spec.family, p.s, p.b2, spec.dim)
    bc = covariant_beta_data(spec, p)
    chart = chart_of(p)
    qsq = sc.Q - p.s * sc.Qp
    if qsq == 0.0:
        raise RegularityError("Q - s*Q' vanishes: spray closed form is singular")
    y = np.asarray(p.y)
    b_up = chart.a_inv @ chart.b
    core = -2.0 * p.alpha * sc.Q * bc.s0 + bc.r00
    return (
        g_alpha
        + p.alpha * sc.Q * bc.si0_up
        + sc.theta * core * (y / p.alpha + (sc.Qp / qsq) * b_up)
    )


def resolve_lambda(spec: MetricSpec, p: PointState, lam: float | None) -> float:
    """Volume term used by the closed S-curvature.

    ``None`` means: zero when the family is Riemannian or beta vanishes at
    the point (the term multiplies b-contractions that are then zero), and
    the Busemann-Hausdorff estimate otherwise.
    """
    if lam is not None:
        return lam
    if spec.family.is_riemannian:
        return 0.0
    if p.b2 < 1e-14:
        return 0.0
    from . import busemann  # deferred: busemann imports geometry which we feed

    return busemann.lambda_from_volume(spec, p.x, cross_check_directions=0).value


def s_curvature_closed(
    spec: MetricSpec, p: PointState, lam: float | None = None
) -> float:
    """Closed-form S-curvature

    S = [Q' - 2*Psi*Q*s - 2*(Psi*Q)'*(b^2-s^2) - 2*(n+1)*Q*Theta + 2*lam] * s_0
        + 2*(Psi + lam) * r_0
        + [(b^2-s^2)*Psi' + (n+1)*Theta] * r_00 / alpha
    """
    n = spec.dim
    if spec.family.is_riemannian:
        return 0.0
    bc = covariant_beta_data(spec, p)
    lam_v = resolve_lambda(spec, p, lam)
    sc = phi_scalars(spec.family, p.s, p.b2, n)
    w = p.b2 - p.s * p.s
    coeff_s0 = (
        sc.Qp
        - 2.0 * sc.Psi * sc.Q * p.s
        - 2.0 * sc.PsiQp * w
        - 2.0 * (n + 1) * sc.Q * sc.Theta
        + 2.0 * lam_v
    )
    coeff_r0 = 2.0 * (sc.Psi + lam_v)
    coeff_r00 = (w * sc.Psip + (n + 1) * sc.Theta) / p.alpha
    return coeff_s0 * bc.s0 + coeff_r0 * bc.r0 + coeff_r00 * bc.r00


def mean_cartan_closed(spec: MetricSpec, p: PointState) -> np.ndarray:
    """I_i = -Phi*(phi - s*phi') / (2*Delta*phi*alpha^2) * (alpha*b_i - s*y_i)."""
    n = spec.dim
    if spec.family.is_riemannian:
        return np.zeros(n)
    sc = phi_scalars(spec.family, p.s, p.b2, n)
    phi0, phi1 = phi_derivs(spec.family, p.s, 1)
    chart = chart_of(p)
    y_low = chart.a @ np.asarray(p.y)
    pref = -sc.Phi * (phi0 - p.s * phi1) / (2.0 * sc.Delta * phi0 * p.alpha**2)
    return pref * (p.alpha * chart.b - p.s * y_low)


def mean_cartan_bcontract(spec: MetricSpec, p: PointState) -> float:
    """I_i b^i = -Phi*(phi - s*phi')*(b^2 - s^2) / (2*Delta*F)."""
    if spec.family.is_riemannian:
        return 0.0
    sc = phi_scalars(spec.family, p.s, p.b2, spec.dim)
    phi0, phi1 = phi_derivs(spec.family, p.s, 1)
    return -sc.Phi * (phi0 - p.s * phi1) * (p.b2 - p.s * p.s) / (2.0 * sc.Delta * p.F)


def mean_landsberg_closed(spec: MetricSpec, p: PointState) -> np.ndarray:
    """Closed-form mean Landsberg curvature J_i with h_i = alpha*b_i - s*y_i."""
    n = spec.dim
    if spec.family.is_riemannian:
        return np.zeros(n)
    sc = phi_scalars(spec.family, p.s, p.b2, n)
    bc = covariant_beta_data(spec, p)
    chart = chart_of(p)
    w = p.b2 - p.s * p.s
    if w <= 0.0:
        raise DomainError("b^2 - s^2 must be positive for the closed form")
    alpha = p.alpha
    y = np.asarray(p.y)
    y_low = chart.a @ y
    h_low = alpha * chart.b - p.s * y_low
    phi_over_delta = sc.Phi / sc.Delta
    core = bc.r00 - 2.0 * alpha * sc.Q * bc.s0
    term1 = (
        (2.0 * alpha**2 / w)
        * (phi_over_delta + (n + 1) * (sc.Q - p.s * sc.Qp))
        * (bc.r0 + bc.s0)
        * h_low
    )
    term2 = (alpha / w) * (sc.Psi1 + p.s * phi_over_delta) * core * h_low
    inner = (
        -alpha * sc.Qp * bc.s0 * h_low
        + alpha * sc.Q * (alpha**2 * bc.s_vec - y_low * bc.s0)
        + alpha**2 * sc.Delta * bc.si0
        + alpha**2 * (bc.ri0 - 2.0 * alpha * sc.Q * bc.s_vec)
        - core * y_low
    )
    term3 = alpha * inner * phi_over_delta
    return -(term1 + term2 + term3) / (2.0 * sc.Delta * alpha**4)


def jbar(spec: MetricSpec, p: PointState) -> float:
    """J_i b^i = -[Psi1*(r_00 - 2*alpha*Q*s_0) + alpha*Psi2*(r_0 + s_0)]
    / (2*Delta*alpha^2)."""
    if spec.family.is_riemannian:
        return 0.0
    sc = phi_scalars(spec.family, p.s, p.b2, spec.dim)
    bc = covariant_beta_data(spec, p)
    core = bc.r00 - 2.0 * p.alpha * sc.Q * bc.s0
    return -(sc.Psi1 * core + p.alpha * sc.Psi2 * (bc.r0 + bc.s0)) / (
        2.0 * sc.Delta * p.alpha**2
    )
