"""Numeric classifiers for the named metric classes.

Membership in a class (Riemannian, Berwald, Douglas, ...) is a pointwise
identity, so every residual reported here is a max-norm over the sampled
states -- a single violation falsifies the class.  Isotropy fits solve a
per-base-point least-squares problem and report the worst equation
residual in a scale-invariant normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import alphabeta, busemann, geometry
from .errors import ArgumentError
from .metrics import MetricSpec, PointState, chart_of

DEFAULT_TOL = 1e-7


@dataclass(frozen=True)
class FlagResult:
    holds: bool
    residual: float

    def to_dict(self):
        return {"holds": self.holds, "residual": self.residual}


@dataclass(frozen=True)
class FitResult:
    """Least-squares estimate of the scalar c(x) per base point."""

    c: tuple[float, ...]
    residual: float

    def to_dict(self):
        return {"c": list(self.c), "residual": self.residual}


@dataclass(frozen=True)
class FlagCurvatureFit:
    """Per-base-point fit of K to (gradient 1-form)/F + sigma.

    ``c_form`` holds the estimated gradient components of c(x) (the fit
    estimates the 1-form; whether it is closed is not enforced), ``sigma``
    the constant part, ``residual`` the worst equation error.
    """

    c_form: tuple[tuple[float, ...], ...]
    sigma: tuple[float, ...]
    residual: float

    @property
    def c_magnitude(self) -> float:
        return max((max(abs(v) for v in row) for row in self.c_form), default=0.0)

    def to_dict(self):
        return {
            "c_form": [list(r) for r in self.c_form],
            "sigma": list(self.sigma),
            "c_magnitude": self.c_magnitude,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class BranchResult:
    kind: str  # CS1 | CS2 | none
    epsilon: tuple[float, ...] | None
    residual: float

    def to_dict(self):
        return {
            "kind": self.kind,
            "epsilon": None if self.epsilon is None else list(self.epsilon),
            "residual": self.residual,
        }


@dataclass
class ClassificationReport:
    flags: dict[str, FlagResult]
    fits: dict[str, FitResult | FlagCurvatureFit]
    lemma_branch: BranchResult
    tol: float
    base_points: list[tuple[float, ...]] = field(default_factory=list)

    def to_dict(self):
        return {
            "tol": self.tol,
            "base_points": [list(x) for x in self.base_points],
            "flags": {k: v.to_dict() for k, v in sorted(self.flags.items())},
            "fits": {k: v.to_dict() for k, v in sorted(self.fits.items())},
            "lemma_branch": self.lemma_branch.to_dict(),
        }


def _group_by_base(states: list[PointState]) -> dict[tuple, list[PointState]]:
    groups: dict[tuple, list[PointState]] = {}
    for p in states:
        groups.setdefault(p.x, []).append(p)
    return groups


def classify_at_points(
    spec: MetricSpec,
    states: list[PointState],
    tol: float = DEFAULT_TOL,
    s_resolution: int = 64,
) -> ClassificationReport:
    """Classify the metric over the sampled states.

    Requires at least 20 directions per base point so the isotropy fits
    are overdetermined.  The isotropic-S fit uses the definitional
    S-curvature, so the chart dimension is capped at 3 by the volume
    quadrature.
    """
    if not states:
        raise ArgumentError("empty sample")
    groups = _group_by_base(states)
    for x, grp in groups.items():
        if len(grp) < 20:
            raise ArgumentError(
                f"base point {x} has {len(grp)} directions; at least 20 required"
            )

    res_I = res_B = res_E = res_D = res_J = res_kill = res_par = 0.0
    iso_s_cs: list[float] = []
    iso_s_res = 0.0
    iso_e_cs: list[float] = []
    iso_e_res = 0.0
    iso_b_cs: list[float] = []
    iso_b_res = 0.0
    n = spec.dim
    eye = np.eye(n)

    for x, grp in groups.items():
        bc = alphabeta.covariant_beta_data(spec, grp[0])
        res_par = max(res_par, float(np.abs(bc.b_cov).max()))
        s_vals = []
        f_vals = []
        e_rows = []  # (E_jk, h_jk, F) samples for the E-fit
        b_rows = []  # (B, pattern, weight) samples for the isotropic-Berwald fit
        for p in grp:
            I = geometry.mean_cartan(spec, p)
            B = geometry.berwald_curvature(spec, p)
            E = 0.5 * np.einsum("mjkm->jk", B)
            D = geometry.douglas_curvature(spec, p)
            J = geometry.mean_landsberg(spec, p)
            res_I = max(res_I, float(np.abs(I).max()))
            res_B = max(res_B, float(np.abs(B).max()))
            res_E = max(res_E, float(np.abs(E).max()))
            res_D = max(res_D, float(np.abs(D).max()))
            res_J = max(res_J, float(np.abs(J).max()))
            bcp = alphabeta.covariant_beta_data(spec, p)
            res_kill = max(res_kill, abs(bcp.r00))
            S = busemann.s_curvature_definitional(spec, p, s_resolution)
            s_vals.append(S)
            f_vals.append(p.F)
            h = geometry.angular_metric(spec, p)
            e_rows.append((E, h, p.F))
            F2, F3 = geometry.norm_fiber_derivatives(spec, p)
            pattern = (
                np.einsum("jk,il->ijkl", F2, eye)
                + np.einsum("kl,ij->ijkl", F2, eye)
                + np.einsum("lj,ik->ijkl", F2, eye)
                + np.einsum("jkl,i->ijkl", F3, np.asarray(p.y))
            )
            b_rows.append((B, pattern))

        # isotropic S: S = (n+1) c F over directions; scale-free via u = S / ((n+1) F)
        u = np.array(s_vals) / ((n + 1) * np.array(f_vals))
        c_hat = float(np.mean(u))
        iso_s_cs.append(c_hat)
        iso_s_res = max(iso_s_res, float(np.max(np.abs(u - c_hat))))

        # isotropic E: 2 F E_jk = (n+1) c h_jk, entrywise least squares
        num = sum(float(np.sum(2.0 * F * E * h)) for E, h, F in e_rows)
        den = sum((n + 1) * float(np.sum(h * h)) for _, h, _ in e_rows)
        c_e = num / den if den else 0.0
        iso_e_cs.append(c_e)
        for E, h, F in e_rows:
            iso_e_res = max(
                iso_e_res, float(np.abs(2.0 * F * E - (n + 1) * c_e * h).max())
            )

        # isotropic Berwald: B = c * pattern
        num = sum(float(np.sum(B * pat)) for B, pat in b_rows)
        den = sum(float(np.sum(pat * pat)) for _, pat in b_rows)
        c_b = num / den if den else 0.0
        iso_b_cs.append(c_b)
        for B, pat in b_rows:
            iso_b_res = max(iso_b_res, float(np.abs(B - c_b * pat).max()))

    flag_fit = flag_curvature_fit(spec, states)
    branch = lemma_cs_branch(spec, states, tol)

    flags = {
        "riemannian": FlagResult(res_I <= tol, res_I),
        "berwald": FlagResult(res_B <= tol, res_B),
        "weakly_berwald": FlagResult(res_E <= tol, res_E),
        "douglas": FlagResult(res_D <= tol, res_D),
        "weakly_landsberg": FlagResult(res_J <= tol, res_J),
        "killing_beta": FlagResult(res_kill <= tol, res_kill),
        "parallel_beta": FlagResult(res_par <= tol, res_par),
    }
    fits = {
        "isotropic_S": FitResult(tuple(iso_s_cs), iso_s_res),
        "isotropic_E": FitResult(tuple(iso_e_cs), iso_e_res),
        "isotropic_berwald": FitResult(tuple(iso_b_cs), iso_b_res),
        "almost_isotropic_flag": flag_fit,
    }
    return ClassificationReport(
        flags=flags,
        fits=fits,
        lemma_branch=branch,
        tol=tol,
        base_points=list(groups.keys()),
    )


def isotropic_e_residual(
    spec: MetricSpec, states: list[PointState], c_per_base: dict[tuple, float]
) -> float:
    """Worst |2FE_jk - (n+1) c h_jk| using an externally supplied c(x)."""
    n = spec.dim
    worst = 0.0
    for p in states:
        c = c_per_base[p.x]
        E = geometry.mean_berwald(spec, p)
        h = geometry.angular_metric(spec, p)
        worst = max(worst, float(np.abs(2.0 * p.F * E - (n + 1) * c * h).max()))
    return worst


def fit_cs_branch(entries, tol: float) -> BranchResult:
    """Core branch test over (a, b_vec, r, s_vec) tuples, one per base point.

    Tests the parallel-type branch (r = 0, s_vec = 0) first; otherwise fits
    epsilon(x) in r_ij = epsilon (b^2 a_ij - b_i b_j) by least squares.
    """
    max_r = max(float(np.abs(r).max()) for _, _, r, _ in entries)
    max_s = max(float(np.abs(sv).max()) for _, _, _, sv in entries)
    if max_r <= tol and max_s <= tol:
        return BranchResult("CS2", None, max(max_r, max_s))
    if max_s > tol:
        return BranchResult("none", None, max_s)
    eps: list[float] = []
    worst = 0.0
    for a, b_vec, r, _ in entries:
        b2 = float(b_vec @ np.linalg.inv(a) @ b_vec)
        pattern = b2 * a - np.outer(b_vec, b_vec)
        den = float(np.sum(pattern * pattern))
        e = float(np.sum(r * pattern)) / den if den else 0.0
        eps.append(e)
        worst = max(worst, float(np.abs(r - e * pattern).max()))
    if worst <= tol:
        return BranchResult("CS1", tuple(eps), worst)
    return BranchResult("none", None, worst)


def lemma_cs_branch(
    spec: MetricSpec, states: list[PointState], tol: float = DEFAULT_TOL
) -> BranchResult:
    """Which branch of the isotropic-S characterization the 1-form satisfies
    over the sampled base points."""
    groups = _group_by_base(states)
    entries = []
    for x, grp in groups.items():
        p = grp[0]
        bc = alphabeta.covariant_beta_data(spec, p)
        chart = chart_of(p)
        entries.append((chart.a, chart.b, bc.r, bc.s_vec))
    return fit_cs_branch(entries, tol)


def flag_curvature_fit(spec: MetricSpec, states: list[PointState]) -> FlagCurvatureFit:
    """Least-squares fit of K(x, y) over flags to (w . y)/F + sigma with
    unknowns w = 3 grad c and sigma, per base point."""
    n = spec.dim
    groups = _group_by_base(states)
    c_rows = []
    sigmas = []
    residual = 0.0
    for x, grp in groups.items():
        if 2 * len(grp) < 2 * n + 1:
            raise ArgumentError(
                f"base point {x} needs at least {n + 1} directions for the flag fit"
            )
        rows = []
        ks = []
        m = len(grp)
        for idx, p in enumerate(grp):
            # transverse vector: the next sampled direction (never parallel
            # for distinct alpha-sphere samples)
            u = np.asarray(grp[(idx + 1) % m].y)
            K = geometry.flag_curvature(spec, p, u)
            rows.append(list(np.asarray(p.y) / p.F) + [1.0])
            ks.append(K)
            if n > 2:
                u2 = np.asarray(grp[(idx + 2) % m].y)
                K2 = geometry.flag_curvature(spec, p, u2)
                rows.append(list(np.asarray(p.y) / p.F) + [1.0])
                ks.append(K2)
        A = np.array(rows)
        k_arr = np.array(ks)
        sol, *_ = np.linalg.lstsq(A, k_arr, rcond=None)
        c_rows.append(tuple(float(v) / 3.0 for v in sol[:n]))
        sigmas.append(float(sol[n]))
        residual = max(residual, float(np.max(np.abs(A @ sol - k_arr))))
    return FlagCurvatureFit(tuple(c_rows), tuple(sigmas), residual)
