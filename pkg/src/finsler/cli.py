"""Command-line surface: batch computations over a JSON configuration.

    finsler curvatures --config cfg.json [--out report.json] [--plot [FIG]]
    finsler classify   --config cfg.json [--out report.json]
    finsler verify     [--config cfg.json] [--out report.json]
    finsler geodesic   --config cfg.json [--out traj.csv] [--plot [FIG]]

Reports are JSON with sorted keys (bit-identical for a fixed config and
seed) and carry the tool version plus the sha256 of the configuration
file.  Trajectories are CSV.  Exit codes: 0 success, 2 configuration
error, 3 regularity/domain error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__, alphabeta, busemann, classify, geometry, ratfunc
from .config import RunConfig, load_config, parse_config
from .errors import (
    ArgumentError,
    ConfigError,
    DegenerateFlagError,
    DomainError,
    EvaluationError,
    FinslerError,
    IntegrationError,
    RegularityError,
)
from .metrics import point_state, randers, second_matsumoto, spec_from_strings
from .sampling import sample_states

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_VERIFY = 4


def _report_header(cmd: str, cfg: RunConfig | None) -> dict:
    return {
        "command": cmd,
        "version": __version__,
        "config_sha256": cfg.config_sha256 if cfg else None,
    }


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _emit_json(doc: dict, out: str | None) -> None:
    _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", out)


def _figure_path(explicit: str | None, out: str | None, default: str) -> str:
    if explicit:
        return explicit
    if out:
        stem = out.rsplit(".", 1)[0]
        return stem + ".png"
    return default


def cmd_curvatures(cfg: RunConfig, out: str | None, plot: str | None, want_plot: bool) -> int:
    states = sample_states(cfg.spec, cfg.base_points, cfg.directions_per_point, cfg.seed)
    samples = []
    for idx, p in enumerate(states):
        B = geometry.berwald_curvature(cfg.spec, p)
        D = geometry.douglas_curvature(cfg.spec, p)
        J = geometry.mean_landsberg(cfg.spec, p)
        I = geometry.mean_cartan(cfg.spec, p)
        S = busemann.s_curvature_definitional(cfg.spec, p, cfg.resolution)
        group = [q for q in states if q.x == p.x]
        u = np.asarray(group[(group.index(p) + 1) % len(group)].y)
        try:
            K = geometry.flag_curvature(cfg.spec, p, u)
        except DegenerateFlagError:
            K = None  # no transverse direction available at this sample
        samples.append(
            {
                "index": idx,
                "x": list(p.x),
                "y": list(p.y),
                "F": p.F,
                "S": S,
                "K": K,
                "B_max": float(np.abs(B).max()),
                "D_max": float(np.abs(D).max()),
                "J_max": float(np.abs(J).max()),
                "I_max": float(np.abs(I).max()),
            }
        )
    doc = _report_header("curvatures", cfg)
    doc["samples"] = samples
    doc["summary"] = {
        key: max((abs(s[key]) for s in samples if s[key] is not None), default=0.0)
        for key in ("S", "K", "B_max", "D_max", "J_max", "I_max")
    }
    _emit_json(doc, out)
    if want_plot:
        from .plots import save_curvature_figure

        save_curvature_figure(_figure_path(plot, out, "curvatures.png"), samples)
    return EXIT_OK


def cmd_classify(cfg: RunConfig, out: str | None) -> int:
    states = sample_states(cfg.spec, cfg.base_points, cfg.directions_per_point, cfg.seed)
    report = classify.classify_at_points(
        cfg.spec, states, tol=cfg.tolerance, s_resolution=cfg.resolution
    )
    doc = _report_header("classify", cfg)
    doc["report"] = report.to_dict()
    _emit_json(doc, out)
    return EXIT_OK


def _default_verify_instances():
    flat = [["1", "0"], ["0", "1"]]
    curved = [["1 + 0.2*sin(x1)", "0.05*x1*x2"], ["0.05*x1*x2", "1 + 0.1*x2^2"]]
    b_var = ["0.18 + 0.04*x2", "0.1*x1"]
    return [
        ("randers", spec_from_strings(2, curved, b_var, randers())),
        ("second_matsumoto", spec_from_strings(2, curved, b_var, second_matsumoto())),
        ("randers_flat_beta", spec_from_strings(2, flat, ["0.2 + 0.05*x2", "-0.05*x1"], randers())),
    ]


def cmd_verify(cfg: RunConfig | None, out: str | None) -> int:
    checks: list[dict] = []

    cert = ratfunc.verify_second_matsumoto_reduction()
    checks.append(
        {
            "name": "reduced-scalar-certificate",
            "passed": cert.all_ok,
            "detail": {"q": cert.q_ok, "theta": cert.theta_ok, "psi": cert.psi_ok},
        }
    )
    phi_ok = {n: ratfunc.phi_nonvanishing_certificate(n) for n in (2, 3, 4)}
    checks.append(
        {
            "name": "phi-nonvanishing-certificate",
            "passed": all(phi_ok.values()),
            "detail": {str(k): v for k, v in phi_ok.items()},
        }
    )

    instances = _default_verify_instances()
    if cfg is not None:
        instances.insert(0, ("config", cfg.spec))
    rng = np.random.default_rng(cfg.seed if cfg else 0)
    for label, spec in instances:
        worst = {"spray": 0.0, "mean_cartan": 0.0, "mean_landsberg": 0.0}
        count = 0
        attempts = 0
        while count < 12 and attempts < 200:
            attempts += 1
            x = rng.uniform(-0.3, 0.3, spec.dim)
            y = rng.normal(size=spec.dim)
            try:
                p = point_state(spec, tuple(x), tuple(y))
            except (RegularityError, DomainError):
                continue
            count += 1
            gd = geometry.spray(spec, p)
            gc = alphabeta.spray_closed_form(spec, p)
            worst["spray"] = max(worst["spray"], float(np.abs(gd - gc).max() / (1.0 + np.abs(gd).max())))
            Id = geometry.mean_cartan(spec, p)
            Ic = alphabeta.mean_cartan_closed(spec, p)
            worst["mean_cartan"] = max(worst["mean_cartan"], float(np.abs(Id - Ic).max() / (1.0 + np.abs(Id).max())))
            Jd = geometry.mean_landsberg(spec, p)
            Jc = alphabeta.mean_landsberg_closed(spec, p)
            worst["mean_landsberg"] = max(worst["mean_landsberg"], float(np.abs(Jd - Jc).max() / (1.0 + np.abs(Jd).max())))
        passed = count >= 12 and all(v <= 1e-7 for v in worst.values())
        checks.append(
            {
                "name": f"closed-vs-definitional[{label}]",
                "passed": passed,
                "detail": {**worst, "states": count},
            }
        )

    # S-curvature arbitration on a nonconstant-beta Randers instance
    spec_s = _default_verify_instances()[2][1]
    worst_s = 0.0
    for _ in range(6):
        x = rng.uniform(-0.25, 0.25, 2)
        y = rng.normal(size=2)
        p = point_state(spec_s, tuple(x), tuple(y / np.linalg.norm(y)))
        lam = busemann.lambda_from_volume(spec_s, p.x).value
        s_closed = alphabeta.s_curvature_closed(spec_s, p, lam=lam)
        s_def = busemann.s_curvature_definitional(spec_s, p, 96)
        worst_s = max(worst_s, abs(s_closed - s_def))
    checks.append(
        {
            "name": "s-curvature-arbitration",
            "passed": worst_s <= 2e-3,
            "detail": {"max_abs_diff": worst_s},
        }
    )

    all_passed = all(c["passed"] for c in checks)
    doc = _report_header("verify", cfg)
    doc["checks"] = checks
    doc["passed"] = all_passed
    _emit_json(doc, out)
    return EXIT_OK if all_passed else EXIT_VERIFY


def cmd_geodesic(cfg: RunConfig, out: str | None, plot: str | None, want_plot: bool) -> int:
    if cfg.geodesic is None:
        raise ConfigError("geodesic command requires a 'geodesic' section", "geodesic")
    req = cfg.geodesic
    traj = geometry.geodesic_integrate(cfg.spec, req.x0, req.y0, req.t_end, req.step)
    n = cfg.spec.dim
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["t"] + [f"x{i+1}" for i in range(n)] + [f"v{i+1}" for i in range(n)] + ["F"]
    )
    for k in range(len(traj.t)):
        writer.writerow(
            [repr(float(traj.t[k]))]
            + [repr(float(v)) for v in traj.x[k]]
            + [repr(float(v)) for v in traj.v[k]]
            + [repr(float(traj.F[k]))]
        )
    _emit(buf.getvalue(), out)
    if want_plot:
        from .plots import save_geodesic_figure

        save_geodesic_figure(_figure_path(plot, out, "geodesic.png"), traj)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finsler",
        description="Curvature computations for (alpha,beta)-Finsler metrics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config, has_plot in (
        ("curvatures", True, True),
        ("classify", True, False),
        ("verify", False, False),
        ("geodesic", True, True),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=needs_config, help="path to the JSON configuration")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--tol", type=float, default=None, help="override tolerance")
        p.add_argument("--seed", type=int, default=None, help="override sample seed")
        if has_plot:
            p.add_argument(
                "--plot",
                nargs="?",
                const="",
                default=None,
                help="render a figure (optionally to the given path)",
            )
    return parser


def _error_json(exc: Exception) -> str:
    doc = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ConfigError):
        doc["path"] = exc.path
    if isinstance(exc, IntegrationError):
        doc["last_t"] = exc.last_t
    return json.dumps(doc, sort_keys=True)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else None
        if cfg is not None and (args.tol is not None or args.seed is not None):
            overrides = dict(cfg.raw)
            if args.tol is not None:
                overrides["tolerance"] = args.tol
            if args.seed is not None:
                overrides.setdefault("sample", {})
                overrides["sample"] = {**overrides.get("sample", {}), "seed": args.seed}
            cfg = parse_config(overrides, cfg.config_sha256)
        if args.command == "curvatures":
            want_plot = args.plot is not None
            return cmd_curvatures(cfg, args.out, args.plot or None, want_plot)
        if args.command == "classify":
            return cmd_classify(cfg, args.out)
        if args.command == "verify":
            return cmd_verify(cfg, args.out)
        want_plot = args.plot is not None
        return cmd_geodesic(cfg, args.out, args.plot or None, want_plot)
    except ConfigError as exc:
        sys.stderr.write(_error_json(exc) + "\n")
        return EXIT_CONFIG
    except (
        RegularityError,
        DomainError,
        ArgumentError,
        EvaluationError,
        IntegrationError,
        DegenerateFlagError,
    ) as exc:
        sys.stderr.write(_error_json(exc) + "\n")
        return EXIT_DOMAIN
    except FinslerError as exc:
        sys.stderr.write(_error_json(exc) + "\n")
        return EXIT_DOMAIN


if __name__ == "__main__":
    raise SystemExit(main())
