"""Independent oracles for the test suite.

Nothing here touches the jet engine: Christoffel symbols and their
derivatives come from central finite differences of the plain numeric
metric, Hessians from central differences of scalar evaluations.  These
are deliberately slower, lower-precision second routes.
"""

from __future__ import annotations

import numpy as np

from finsler.expressions import evaluate
from finsler.metrics import ChartData, MetricSpec


def metric_matrix(spec: MetricSpec, x) -> np.ndarray:
    env = [float(v) for v in x]
    n = spec.dim
    a = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            a[i, j] = evaluate(spec.a[i][j], env)
    return 0.5 * (a + a.T)


def christoffels_fd(spec: MetricSpec, x, h: float = 1e-5) -> np.ndarray:
    """Gamma^k_ij with metric x-derivatives by central differences."""
    n = spec.dim
    da = np.empty((n, n, n))  # da[i,j,k] = d a_ij / dx^k
    for k in range(n):
        xp = list(x)
        xm = list(x)
        xp[k] += h
        xm[k] -= h
        da[:, :, k] = (metric_matrix(spec, xp) - metric_matrix(spec, xm)) / (2 * h)
    a_inv = np.linalg.inv(metric_matrix(spec, x))
    gamma = np.empty((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                gamma[k, i, j] = 0.5 * sum(
                    a_inv[k, l] * (da[l, j, i] + da[l, i, j] - da[i, j, l])
                    for l in range(n)
                )
    return gamma


def sectional_curvature_fd(spec: MetricSpec, x, y, u, h: float = 1e-4) -> float:
    """Riemannian sectional curvature of span{y, u} from Christoffel
    symbols, with the symbol derivatives by central differences."""
    n = spec.dim
    dgamma = np.empty((n, n, n, n))  # dgamma[k,i,j,m] = d Gamma^k_ij / dx^m
    for m in range(n):
        xp = list(x)
        xm = list(x)
        xp[m] += h
        xm[m] -= h
        dgamma[:, :, :, m] = (christoffels_fd(spec, xp) - christoffels_fd(spec, xm)) / (
            2 * h
        )
    gamma = christoffels_fd(spec, x)
    # R^l_{kij} = d_i Gamma^l_jk - d_j Gamma^l_ik
    #             + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik
    riem = (
        np.einsum("ljki->lkij", dgamma)
        - np.einsum("likj->lkij", dgamma)
        + np.einsum("lim,mjk->lkij", gamma, gamma)
        - np.einsum("ljm,mik->lkij", gamma, gamma)
    )
    a = metric_matrix(spec, x)
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    # K = <R(u, y) y, u> / (|y|^2 |u|^2 - <y, u>^2)
    r_uyy = np.einsum("lkij,k,i,j->l", riem, y, u, y)
    num = float(u @ a @ r_uyy)
    yy = float(y @ a @ y)
    uu = float(u @ a @ u)
    yu = float(y @ a @ u)
    return num / (yy * uu - yu * yu)


def fd_fiber_hessian(spec: MetricSpec, x, y, fun=None, h: float = 1e-4) -> np.ndarray:
    """Central-difference fiber Hessian of F^2 (or of a supplied scalar)."""
    chart = ChartData(spec, x)
    if fun is None:
        fun = lambda v: chart.norm(np.asarray(v)) ** 2
    n = spec.dim
    H = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            ypp = np.array(y, dtype=float)
            ypm = np.array(y, dtype=float)
            ymp = np.array(y, dtype=float)
            ymm = np.array(y, dtype=float)
            ypp[i] += h
            ypp[j] += h
            ypm[i] += h
            ypm[j] -= h
            ymp[i] -= h
            ymp[j] += h
            ymm[i] -= h
            ymm[j] -= h
            H[i, j] = (fun(ypp) - fun(ypm) - fun(ymp) + fun(ymm)) / (4 * h * h)
    return H
