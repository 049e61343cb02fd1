"""Command-line driver: simulate / certify / fit / oracle / sweep.

Exit codes: 0 success (all checks pass), 1 usage or input error, 2 failed
invariant or diverged integration.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import analysis, csvio, energies, slowset
from .config import (
    ConfigError,
    ResolvedRun,
    RunConfig,
    parse_config,
    resolve,
    with_scaled_data,
)
from .integrator import IntegrationDivergedError, Trajectory, run

USAGE_ERROR = 1
CHECK_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise UsageError(message)


@dataclass(frozen=True)
class RunArtifacts:
    resolved: ResolvedRun
    trajectory: Trajectory
    series: list
    eps: float
    eps_valid: bool
    metadata: dict[str, str]


def execute_run(cfg: RunConfig) -> RunArtifacts:
    """Resolve, integrate, select eps when auto, and assemble metadata."""
    res = resolve(cfg)
    traj = run(res.problem, res.integrator)
    if res.eps is None:
        sel = energies.select_epsilon(traj)
        eps, eps_valid = sel.eps, sel.valid
    else:
        eps = res.eps
        sandwich, monotone = energies.epsilon_conditions(traj, eps)
        eps_valid = sandwich and monotone
    series = energies.energy_series(traj, eps, res.delta)
    return RunArtifacts(res, traj, series, eps, eps_valid, _metadata(res, eps))


def _metadata(res: ResolvedRun, eps: float) -> dict[str, str]:
    """Resolved config echo (a runnable config) plus derived cert_/info_ keys."""
    cfg = res.config
    f = csvio.format_float
    meta = {
        "problem": cfg.problem,
        "p": f(cfg.p),
        "u0_spec": cfg.u0_spec,
        "u1_spec": cfg.u1_spec,
        "phi_spec": cfg.phi_spec,
        "n_modes": str(res.problem.basis.n_modes),
        "n_grid": str(res.problem.basis.n_grid),
        "dt": f(cfg.dt),
        "t_end": f(cfg.t_end),
        "sampling": cfg.sampling,
        "sample_count": str(cfg.sample_count),
        "scheme": cfg.scheme,
        "eps": f(eps),
        "delta": f(res.delta),
        "R": f(res.R),
        "alpha": f(res.alpha),
        "rho": f(res.rho),
        "seed": str(cfg.seed),
    }
    if cfg.out_path is not None:
        meta["out_path"] = cfg.out_path
    meta["info_nu"] = f(res.problem.basis.nu)
    meta["info_beta"] = f(cfg.p / (cfg.p + 2.0))
    cert = res.certificate
    if cert is not None:
        meta.update({
            "cert_member": str(int(cert.member)),
            "cert_sigma0": f(cert.sigma0),
            "cert_sigma1": f(cert.sigma1),
            "cert_delta": f(cert.delta),
            "cert_R": f(cert.R),
            "cert_margin1": f(cert.cond1_margin),
            "cert_margin2": f(cert.cond2_margin),
            "cert_margin3": f(cert.cond3_margin),
            "cert_y0": f(cert.y0),
            "cert_envelope_rate": f(cert.envelope_rate),
        })
    return meta


def _print_report(title: str, text: str) -> None:
    print(f"[{title}]")
    for line in text.splitlines():
        print(f"  {line}")


def cmd_simulate(args) -> int:
    cfg = parse_config(Path(args.config).read_text())
    out = args.out or cfg.out_path
    if out is None:
        raise UsageError("no output path: pass --out or set out_path in the config")
    art = execute_run(cfg)
    csvio.write_run_csv(out, art.metadata, art.series)
    print(f"wrote {out} ({len(art.series)} samples)")

    if not args.check:
        return 0
    failed = False
    basic = energies.check_basic_bound(art.trajectory)
    _print_report("basic-bound", basic.as_text())
    failed |= not basic.ok
    print(f"[epsilon] eps={csvio.format_float(art.eps)} valid={art.eps_valid}")
    failed |= not art.eps_valid
    cert = art.resolved.certificate
    if cert is not None and cert.member:
        certified = slowset.check_certified_run(cert, art.series)
        _print_report("certified-run", certified.as_text())
        failed |= not certified.ok
    print("check: FAIL" if failed else "check: PASS")
    return CHECK_ERROR if failed else 0


def cmd_certify(args) -> int:
    cfg = parse_config(Path(args.config).read_text())
    res = resolve(cfg)
    if res.certificate is None:
        raise UsageError("certificate requires nonzero u0")
    print(res.certificate.as_text())
    return 0


def cmd_fit(args) -> int:
    _, columns = csvio.read_csv(args.csv)
    if args.column not in columns:
        raise UsageError(
            f"column {args.column!r} not in {sorted(columns)}"
        )
    try:
        fit = analysis.fit_slope_xy(
            columns["t"], columns[args.column], args.t_min, args.t_max
        )
    except analysis.FitError as exc:
        raise UsageError(str(exc)) from None
    print(fit.as_text())
    return 0


def cmd_oracle(args) -> int:
    res = analysis.ode_oracle(
        p=args.p, v0=args.v0, v1=args.v1, dt=args.dt, t_end=args.t_end,
        sample_count=args.samples,
    )
    f = csvio.format_float
    metadata = {
        "p": f(args.p), "v0": f(args.v0), "v1": f(args.v1),
        "dt": f(args.dt), "t_end": f(args.t_end),
        "sample_count": str(args.samples),
    }
    csvio.write_columns(
        args.out, metadata,
        {"t": res.times, "v": res.v, "v_prime": res.v_prime, "v_pred": res.v_pred},
    )
    print(f"wrote {args.out} ({len(res.times)} samples)")
    return 0


def cmd_sweep(args) -> int:
    cfg = parse_config(Path(args.config).read_text())
    try:
        amplitudes = [float(a) for a in args.amplitudes.split(",") if a.strip()]
    except ValueError:
        raise UsageError(f"bad amplitude list: {args.amplitudes!r}") from None
    if not amplitudes:
        raise UsageError("empty amplitude list")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = {k: [] for k in (
        "index", "amplitude", "exponent", "r_squared", "classification",
        "member", "sigma0", "sigma1", "csv",
    )}
    for idx, amp in enumerate(amplitudes):
        run_cfg = replace(with_scaled_data(cfg, amp), out_path=None)
        art = execute_run(run_cfg)
        csv_path = out_dir / f"run_{idx:03d}.csv"
        csvio.write_run_csv(csv_path, art.metadata, art.series)
        cert = art.resolved.certificate
        try:
            verdict = analysis.classify(art.series, cfg.p, cert)
            exponent, r2 = verdict.fitted_norm_exponent, verdict.r_squared
            label = verdict.classification.value
        except (ValueError, analysis.FitError):
            exponent, r2, label = float("nan"), float("nan"), "inconclusive"
        rows["index"].append(float(idx))
        rows["amplitude"].append(amp)
        rows["exponent"].append(exponent)
        rows["r_squared"].append(r2)
        rows["classification"].append(label)
        rows["member"].append(float(cert.member) if cert is not None else 0.0)
        rows["sigma0"].append(cert.sigma0 if cert is not None else float("nan"))
        rows["sigma1"].append(cert.sigma1 if cert is not None else float("nan"))
        rows["csv"].append(csv_path.name)
        print(f"[{idx}] amplitude={amp:g} classification={label}")

    summary = out_dir / "summary.csv"
    csvio.write_columns(summary, {"runs": str(len(amplitudes))}, rows)
    print(f"wrote {summary}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="slowdecay", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a trajectory and write its CSV")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--check", action="store_true",
                       help="verify invariants; exit 2 on failure")
    p_sim.set_defaults(func=cmd_simulate)

    p_cert = sub.add_parser("certify", help="print the slow-set certificate")
    p_cert.add_argument("--config", required=True)
    p_cert.set_defaults(func=cmd_certify)

    p_fit = sub.add_parser("fit", help="fit a log-log slope from a CSV column")
    p_fit.add_argument("--csv", required=True)
    p_fit.add_argument("--column", required=True)
    p_fit.add_argument("--t-min", type=float, required=True, dest="t_min")
    p_fit.add_argument("--t-max", type=float, required=True, dest="t_max")
    p_fit.set_defaults(func=cmd_fit)

    p_or = sub.add_parser("oracle", help="integrate the scalar comparison equation")
    p_or.add_argument("--p", type=float, required=True)
    p_or.add_argument("--v0", type=float, required=True)
    p_or.add_argument("--v1", type=float, default=0.0)
    p_or.add_argument("--dt", type=float, default=0.05)
    p_or.add_argument("--t-end", type=float, required=True, dest="t_end")
    p_or.add_argument("--samples", type=int, default=400)
    p_or.add_argument("--out", required=True)
    p_or.set_defaults(func=cmd_oracle)

    p_sw = sub.add_parser("sweep", help="simulate over an amplitude grid")
    p_sw.add_argument("--config", required=True)
    p_sw.add_argument("--amplitudes", required=True,
                      help="comma-separated scale factors for the initial data")
    p_sw.add_argument("--out-dir", required=True, dest="out_dir")
    p_sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except IntegrationDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CHECK_ERROR


if __name__ == "__main__":
    sys.exit(main())
