"""Command-line entry point.

Exit codes: 0 success (a reported blow-up counts as success), 1 invalid configuration or
arguments, 2 numerical fault.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import experiments as ex
from .diagnostics import predict_blowup
from .grid import BlownUpStateError, InvalidParameterError
from .littlewood_paley import BesovParams, besov_norm, block_energies
from .peakon import PeakonParams

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _print_prediction(p, out):
    print(f"triggered={p.triggered} margin={p.margin:.6g} C0={p.C0:.6g}", file=out)
    if p.triggered:
        print(f"x0={p.x0:.6g} Jx0={p.Jx0:.6g} |m0(x0)|={p.m0_at_x0:.6g} T*={p.T_star:.6g}", file=out)


def cmd_simulate(args, out):
    cfg = ex.load_config(args.config)
    art = ex.run_scenario(cfg)
    dest = Path(args.out) if args.out else Path(args.config).with_suffix("")
    ex.write_artifact(art, dest)
    print(f"scenario={cfg.kind} theta={art.theta:.6g} output={dest}", file=out)
    _print_prediction(art.prediction, out)
    for name, r in art.runs.items():
        last = r.series[-1] if r.series else None
        status = f"blow-up ({r.blowup_reason}) at t={r.blowup_time:.6g}" if r.blown_up else "completed"
        line = f"{name}: {status}, {len(r.times)} snapshots, dt={r.dt:.3g}"
        if last is not None:
            line += f", t={last.t:.6g} l1={last.l1_m:.12g} H1={last.H1:.12g} H2={last.H2:.12g}"
        print(line, file=out)
        if r.tracking is not None and not isinstance(r.tracking, Exception):
            print(f"{name}: fitted speed={r.tracking.fitted_speed:.6g} "
                  f"frequency={r.tracking.fitted_frequency:.6g}", file=out)
    if art.cross_check:
        t, d = art.cross_check[-1]
        print(f"cross-check: t={t:.6g} relative L2={d:.3e}", file=out)
    return EXIT_OK


def cmd_sweep(args, out):
    d = Path(args.config_dir)
    paths = sorted(d.glob("*.ini"))
    if not paths:
        raise ex.ConfigError(f"no *.ini configs in {d}")
    cfgs = [ex.load_config(p) for p in paths]
    rows = ex.sweep(cfgs, workers=args.workers)
    dest = Path(args.out) if args.out else d / "sweep_report.csv"
    ex.write_report_csv(dest, rows)
    failed = sum(r["status"] != "ok" for r in rows)
    print(f"{len(rows)} runs, {failed} failed, report={dest}", file=out)
    for r in rows:
        print(f"{r['name']} theta={r['theta']:.6g} amplitude={r['amplitude']:.6g} "
              f"status={r['status']} T*={r['T_star']} spectral_T_obs={r['spectral_T_obs']} "
              f"particle_T_obs={r['particle_T_obs']}", file=out)
    return EXIT_OK


def cmd_peakon_check(args, out):
    theta = ex.parse_number(args.theta)
    cfg = ex.ScenarioConfig(kind="peakon", integrator=args.integrator, theta=theta, a=args.a,
                            sigma=args.sigma, N=args.N, L=args.L, t_end=args.t_end,
                            snapshot_every=args.snapshot_every)
    params = PeakonParams(a=args.a, theta=theta)
    art = ex.run_scenario(cfg)
    print(f"exact: c={params.c:.6g} omega={params.omega:.6g}", file=out)
    code = EXIT_OK
    for name, r in art.runs.items():
        tr = r.tracking
        if tr is None or isinstance(tr, Exception):
            print(f"{name}: tracking failed: {tr}", file=out)
            code = EXIT_NUMERIC
            continue
        print(f"{name}: c={tr.fitted_speed:.6g} (error {tr.speed_error:.3g}) "
              f"omega={tr.fitted_frequency:.6g} (error {tr.frequency_error:.3g}) "
              f"shape error {tr.shape_error:.3g}", file=out)
    return code


def cmd_besov(args, out):
    m, t, theta = ex.read_snapshot_json(args.snapshot)
    params = BesovParams(args.s, ex.parse_number(args.p), ex.parse_number(args.r))
    print(f"snapshot t={t:.6g} theta={theta:.6g} L={m.grid.L:g} N={m.grid.N}", file=out)
    for q, e in block_energies(m).items():
        print(f"block {q:3d}: energy {e:.6e}", file=out)
    print(f"besov B^{args.s:g}_{params.p:g},{params.r:g} = {besov_norm(m, params):.12g}", file=out)
    return EXIT_OK


def cmd_predict(args, out):
    cfg = ex.load_config(args.config)
    for c, th, amp in ex.expand(cfg):
        m0, _ = ex.initial_momentum(c, None if math.isnan(amp) else amp)
        print(f"theta={th:.6g} amplitude={amp:.6g}", file=out)
        _print_prediction(predict_blowup(m0, th, q_form=c.q_form), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="peakonlab", description="U(1)-invariant peakon experiments")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one scenario config")
    s.add_argument("config")
    s.add_argument("--out", help="output directory (default: config path without suffix)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="run every *.ini in a directory")
    s.add_argument("config_dir")
    s.add_argument("--out", help="report CSV (default: <dir>/sweep_report.csv)")
    s.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${ex.WORKERS_ENV} or CPU count)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("peakon-check", help="compare a simulated peakon with the exact solution")
    s.add_argument("--theta", default="0")
    s.add_argument("--a", type=float, default=1.0)
    s.add_argument("--sigma", type=float, default=0.05)
    s.add_argument("--N", type=int, default=4096)
    s.add_argument("--L", type=float, default=20.0)
    s.add_argument("--t-end", type=float, default=1.0)
    s.add_argument("--snapshot-every", type=int, default=20)
    s.add_argument("--integrator", choices=ex.INTEGRATORS, default="particle")
    s.set_defaults(func=cmd_peakon_check)

    s = sub.add_parser("besov", help="block energies and Besov norm of a stored snapshot")
    s.add_argument("--snapshot", required=True)
    s.add_argument("--s", type=float, required=True)
    s.add_argument("--p", default="2")
    s.add_argument("--r", default="2")
    s.set_defaults(func=cmd_besov)

    s = sub.add_parser("predict-blowup", help="evaluate the blow-up condition on a config's datum")
    s.add_argument("config")
    s.set_defaults(func=cmd_predict)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args, out)
    except (InvalidParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlownUpStateError, FloatingPointError, ArithmeticError, RuntimeError) as exc:
        print(f"numerical fault: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
