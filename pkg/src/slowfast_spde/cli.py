"""Command-line interface: config parsing, dispatch, run manifests.

Subcommands: ``simulate`` (coupled trajectory to CSV), ``average``
(averaged-drift estimate at a point), ``check`` (assumption report),
``converge`` (strong-convergence experiment), ``verify --lemma <name>``
(one named verification experiment), ``zvonkin`` (truncated elliptic
solve).  Exit codes: 0 pass, 1 verdict failure, 2 usage/config error;
the JSON ``verdict`` field and the exit code always agree.

Every run emits a manifest next to its primary output recording the
fully resolved configuration, the seed, the package version and the
SHA-256 digest of each output file; reruns with an equal manifest
reproduce equal digests (all randomness flows from the single seed;
the environment variable ``SPDE_SEED`` overrides it for CI).  Outputs
are CSV (RFC 4180, header row, ``.`` decimal) and JSON (UTF-8, sorted
keys); there are no binary formats.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .averaging import AveragingParams, estimate_bbar
from .config import ResolvedConfig, parse_config
from .errors import ConfigError, SlowFastError
from .experiments import (ExperimentReport, aux_fast_error,
                          averaged_drift_holder, contraction_test,
                          correlation_decay, ergodic_consistency,
                          increment_scaling, moment_sweep, strong_error)
from .model import check_assumptions
from .noise import derive_substream
from .simulate import simulate_slow_fast
from .spectral import SpectralField, h_norm
from .zvonkin import OuKernel, TruncatedFunction, box_axes, dlambda_curve, picard_solve

_ENV_SEED = "SPDE_SEED"


@dataclass
class RunManifest:
    """Reproducibility record emitted for every run."""

    subcommand: str
    config: dict
    seed: int
    version: str
    wall_clock_s: float
    outputs: dict


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _write_csv(path: Path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow(row)


def _emit_manifest(subcommand: str, rc: ResolvedConfig, seed: int,
                   t_start: float, outputs: list[Path]) -> None:
    manifest = RunManifest(
        subcommand=subcommand,
        config=rc.echo,
        seed=seed,
        version=__version__,
        wall_clock_s=time.perf_counter() - t_start,
        outputs={str(p): _sha256(p) for p in outputs if p.exists()},
    )
    base = outputs[0] if outputs else Path(f"{subcommand}.out")
    _write_json(Path(str(base) + ".manifest.json"), asdict(manifest))


def _resolve_seed(args, rc: ResolvedConfig) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get(_ENV_SEED)
    if env is not None:
        return int(env)
    return rc.seed


def _emit_report(report: ExperimentReport, out: Path, subcommand: str,
                 rc: ResolvedConfig, seed: int, t0: float) -> int:
    _write_json(out, report.to_json_dict(include_timing=False))
    csv_path = out.with_suffix(".csv")
    _write_csv(csv_path, report.csv_rows())
    _emit_manifest(subcommand, rc, seed, t0, [out, csv_path])
    print(f"{report.name}: {report.verdict} "
          f"(slope={report.slope:.4g} +/- {report.slope_ci:.4g}, "
          f"target={report.target:.4g})")
    return 0 if report.verdict == "pass" else 1


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    rc = parse_config(args.config, overrides={
        "eps": args.eps, "t_final": args.T, "dt": args.dt})
    seed = _resolve_seed(args, rc)
    if rc.eps is None:
        raise ConfigError("eps is required (flag --eps or config key eps)")
    n = rc.model.n_modes
    w1 = derive_substream(seed, 0, "W1", n)
    w2 = derive_substream(seed, 0, "W2", n)
    xs, ys = simulate_slow_fast(rc.model, rc.eps, np.zeros(n), np.zeros(n),
                                rc.t_final, rc.scheme, w1, w2)
    k_show = min(4, n)
    header = (["t", "x_norm", f"x_hnorm_theta_{rc.theta:g}", "y_norm"]
              + [f"x_mode_{k}" for k in range(1, k_show + 1)])
    rows = [header]
    for i, t in enumerate(xs.times):
        u = SpectralField(xs.states[i])
        rows.append([repr(float(t)),
                     repr(float(np.linalg.norm(xs.states[i]))),
                     repr(float(h_norm(u, rc.theta, rc.model.eigs))),
                     repr(float(np.linalg.norm(ys.states[i])))]
                    + [repr(float(v)) for v in xs.states[i][:k_show]])
    out = Path(args.out)
    _write_csv(out, rows)
    _emit_manifest("simulate", rc, seed, t0, [out])
    print(f"wrote {len(xs.times)} macro states to {out}")
    return 0


def _averaging_params(rc: ResolvedConfig, args) -> AveragingParams:
    t_burn = getattr(args, "Tb", None)
    if t_burn is None:
        t_burn = rc.t_burn
    t_avg = getattr(args, "Ta", None) or rc.t_avg
    dt = getattr(args, "dt_frozen", None) or rc.dt_frozen
    replicas = getattr(args, "replicas", None) or rc.replicas
    if t_burn is None:
        return AveragingParams.for_model(rc.model, t_avg=t_avg, dt=dt,
                                         n_replicas=replicas)
    return AveragingParams(t_burn=t_burn, t_avg=t_avg, dt=dt,
                           n_replicas=replicas)


def cmd_average(args) -> int:
    t0 = time.perf_counter()
    rc = parse_config(args.config)
    seed = _resolve_seed(args, rc)
    params = _averaging_params(rc, args)
    n = rc.model.n_modes
    if args.x == "zero":
        x = np.zeros(n)
    else:
        x = np.loadtxt(args.x, delimiter=",", ndmin=1)[:n]
        x = np.pad(x, (0, n - x.shape[0]))
    est = estimate_bbar(rc.model, x, params, seed)
    rows = [("mode", "bbar_coeff", "stderr")]
    for k, v in enumerate(est.value, start=1):
        rows.append((str(k), repr(float(v)), repr(est.stderr)))
    out = Path(args.out)
    _write_csv(out, rows)
    _emit_manifest("average", rc, seed, t0, [out])
    print(f"averaged drift at |x|={np.linalg.norm(x):.4g}: "
          f"|Bbar|={np.linalg.norm(est.value):.6g} +/- {est.stderr:.2g}")
    return 0


def cmd_check(args) -> int:
    t0 = time.perf_counter()
    rc = parse_config(args.config, overrides={"theta": args.theta})
    seed = _resolve_seed(args, rc)
    report = check_assumptions(rc.model, rc.theta, kappa1=args.kappa1)
    print(report.summary())
    outputs = []
    if args.out:
        out = Path(args.out)
        _write_json(out, report.to_dict())
        outputs.append(out)
        _emit_manifest("check", rc, seed, t0, outputs)
    return 0 if report.all_hold else 1


def cmd_converge(args) -> int:
    t0 = time.perf_counter()
    rc = parse_config(args.config, overrides={"t_final": args.T, "dt": args.dt})
    seed = _resolve_seed(args, rc)
    eps_grid = [float(v) for v in args.eps_grid.split(",")]
    if len(eps_grid) < 3:
        raise ConfigError("--eps-grid needs at least 3 values for a rate fit")
    n_mc = args.n_mc or rc.n_mc
    params = AveragingParams(t_burn=10.0, t_avg=20.0, dt=0.05, n_replicas=2)
    report = strong_error(rc.model, eps_grid, rc.t_final, rc.scheme, n_mc,
                          seed, oracle_params=params, theta=rc.theta)
    return _emit_report(report, Path(args.out), "converge", rc, seed, t0)


_LEMMAS = ("contraction", "increments", "aux-fast", "correlation", "moments",
           "ergodicity", "holder")


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    rc = parse_config(args.config)
    seed = _resolve_seed(args, rc)
    n_mc = args.n_mc or rc.n_mc
    eps = args.eps if args.eps is not None else (rc.eps or 1e-2)
    model, scheme, theta = rc.model, rc.scheme, rc.theta
    if args.lemma == "contraction":
        report = contraction_test(model, t_checks=(1.0, 2.0, 4.0), dt=0.01,
                                  n_mc=n_mc, seed=seed)
    elif args.lemma == "increments":
        deltas = [2.0**-k for k in range(4, 9)]
        report = increment_scaling(model, eps, deltas, rc.t_final, scheme,
                                   n_mc, seed, theta=theta)
    elif args.lemma == "aux-fast":
        deltas = [2.0**-k for k in range(4, 9)]
        report = aux_fast_error(model, eps, deltas, rc.t_final, scheme,
                                n_mc, seed, theta=theta)
    elif args.lemma == "correlation":
        report = correlation_decay(model, np.zeros(model.n_modes),
                                   lag_max=16.0, n_mc=n_mc, seed=seed)
    elif args.lemma == "moments":
        report = moment_sweep(model, (1e-1, 1e-2, 1e-3), rc.t_final, scheme,
                              n_mc, seed)
    elif args.lemma == "ergodicity":
        report = ergodic_consistency(model, _averaging_params(rc, args), seed)
    elif args.lemma == "holder":
        params = AveragingParams(t_burn=16.0, t_avg=rc.t_avg, dt=rc.dt_frozen,
                                 n_replicas=rc.replicas)
        report = averaged_drift_holder(model, n_pairs=n_mc, params=params,
                                       seed=seed)
    else:  # unreachable with argparse choices
        raise ConfigError(f"unknown lemma {args.lemma!r}")
    return _emit_report(report, Path(args.out), "verify", rc, seed, t0)


def cmd_zvonkin(args) -> int:
    t0 = time.perf_counter()
    rc = parse_config(args.config)
    seed = _resolve_seed(args, rc)
    d = args.dim
    if not 1 <= d <= 3:
        raise ConfigError("dim must be 1, 2 or 3")
    model = rc.model
    kernel = OuKernel(model.eigs.eigenvalues[:d], model.q1.q[:d])
    axes = box_axes(kernel, n_per_axis=args.grid)
    lambdas = sorted(float(v) for v in args.lam.split(","))

    from .averaging import estimate_bbar_batch

    params = AveragingParams(t_burn=16.0, t_avg=rc.t_avg, dt=rc.dt_frozen,
                             n_replicas=max(2, rc.replicas))

    def bbar_truncated(points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        xs = np.zeros((pts.shape[0], model.n_modes))
        xs[:, :d] = pts
        values, _ = estimate_bbar_batch(model, xs, params, seed)
        return values[:, :d]

    g = TruncatedFunction.from_callable(bbar_truncated, axes)
    rows = dlambda_curve(g, bbar_truncated, kernel, lambdas)
    sol = picard_solve(g, bbar_truncated, lambdas[0], kernel)

    out = Path(args.out)
    csv_rows = [tuple(f"x_{j+1}" for j in range(d))
                + tuple(f"u_{c+1}" for c in range(d))
                + tuple(f"du_{c+1}_{j+1}" for c in range(d) for j in range(d))]
    pts = sol.u.grid_points()
    uv = sol.u.values.reshape(-1, d)
    dv = sol.du.values.reshape(-1, d * d)
    for i in range(pts.shape[0]):
        csv_rows.append(tuple(repr(float(v)) for v in pts[i])
                        + tuple(repr(float(v)) for v in uv[i])
                        + tuple(repr(float(v)) for v in dv[i]))
    _write_csv(out, csv_rows)
    summary = {"lambda_table": rows, "residual": sol.residual,
               "iterations": sol.iterations, "converged": sol.converged}
    json_path = out.with_suffix(".json")
    _write_json(json_path, summary)
    _emit_manifest("zvonkin", rc, seed, t0, [out, json_path])
    print(f"residual={sol.residual:.3g}, lambda table: "
          + ", ".join(f"{r['lambda']:g}: |U|={r['sup_u']:.4g}" for r in rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slowfast-spde",
        description="Simulate and verify a two-scale stochastic heat "
                    "equation with rough drifts.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, out_default):
        p.add_argument("--config", required=True, help="config file path")
        p.add_argument("--seed", type=int, default=None,
                       help=f"root seed (overrides config and ${_ENV_SEED})")
        p.add_argument("--out", default=out_default, help="output path")

    p = sub.add_parser("simulate", help="integrate one coupled trajectory")
    common(p, "trajectory.csv")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("average", help="estimate the averaged drift at a point")
    common(p, "bbar.csv")
    p.add_argument("--x", default="zero", help="'zero' or CSV of coefficients")
    p.add_argument("--Tb", type=float, default=None, help="burn-in time")
    p.add_argument("--Ta", type=float, default=None, help="averaging time")
    p.add_argument("--dt-frozen", dest="dt_frozen", type=float, default=None)
    p.add_argument("--replicas", type=int, default=None)
    p.set_defaults(handler=cmd_average)

    p = sub.add_parser("check", help="run the assumption checker")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--kappa1", type=float, default=None)
    p.add_argument("--out", default=None, help="optional JSON report path")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("converge", help="strong-convergence experiment")
    common(p, "strong_error.json")
    p.add_argument("--eps-grid", dest="eps_grid", default="1e-1,3e-2,1e-2,3e-3")
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--n-mc", dest="n_mc", type=int, default=None)
    p.set_defaults(handler=cmd_converge)

    p = sub.add_parser("verify", help="run one named verification experiment")
    common(p, "verify.json")
    p.add_argument("--lemma", required=True, choices=_LEMMAS)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--n-mc", dest="n_mc", type=int, default=None)
    p.add_argument("--Tb", type=float, default=None)
    p.add_argument("--Ta", type=float, default=None)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("zvonkin", help="solve the truncated elliptic equation")
    common(p, "zvonkin.csv")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--lambda", dest="lam", default="1,10,100",
                   help="comma-separated increasing resolvent parameters")
    p.add_argument("--grid", type=int, default=129, help="points per axis")
    p.set_defaults(handler=cmd_zvonkin)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SlowFastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
