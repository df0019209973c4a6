"""Command-line entry points: ``python -m blowup_lab <command> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import kato, specfun
from .comparison import build_setup, calibrate_envelope, envelope_A, f0_lower_ode
from .lifespan import TheoremSetup, log_asymptote, zeta_solve
from .params import PARAM_KEYS, params_from_mapping, read_config
from .pde import RadialSolver, data_from_mapping, solver_config_from_mapping
from .sweep import (SweepPlan, consistency_ok, fit_rows, read_alpha, read_rows, run_sweep)


def _emit(obj) -> None:
    print(json.dumps(obj, default=_json_default))


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(type(x).__name__)


def _finite_or_none(x):
    return x if x is not None and math.isfinite(x) else None


def _add_param_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--config", type=Path)
    for key in PARAM_KEYS:
        ap.add_argument(f"--{key}", dest=key, default=None)


def _load(args):
    cfg = read_config(args.config) if args.config else {}
    params = params_from_mapping(cfg, {k: getattr(args, k) for k in PARAM_KEYS})
    base = args.config.parent if args.config else None
    return cfg, params, base


def _solver_bits(args, cfg, base, t_max=None):
    data = data_from_mapping(cfg, base)
    solver = solver_config_from_mapping(cfg, dr=getattr(args, "dr", None), t_max=t_max)
    return data, solver


def cmd_besselfn(args) -> int:
    fn = specfun.bessel_i if args.kind == "i" else specfun.bessel_k
    log_fn = specfun.log_bessel_i if args.kind == "i" else specfun.log_bessel_k
    try:
        value = float(fn(args.nu, args.x))
    except OverflowError:
        value = None
    _emit({"kind": args.kind, "nu": args.nu, "x": args.x, "value": value,
           "log_value": float(log_fn(args.nu, args.x))})
    return 0


def cmd_compare(args) -> int:
    cfg, params, base = _load(args)
    data, solver = _solver_bits(args, cfg, base, t_max=args.t_end)
    f_l1, g_l1 = RadialSolver(params, data, solver).data_l1()
    setup = build_setup(params, f_l1, g_l1)
    env = calibrate_envelope(setup)
    ode = f0_lower_ode(params, params.eps * f_l1, params.eps * g_l1, args.t_end)
    ts = np.arange(setup.t0, args.t_end + 0.5 * args.dt, args.dt)
    F_ode = np.interp(ts, ode.times, ode.F, right=math.nan)
    with Path(args.out).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "J", "A", "F0_ode"])
        for t, F in zip(ts, F_ode):
            A = float(envelope_A(setup, env, t)) if t >= env.T1 else math.nan
            with np.errstate(over="ignore"):
                J = float(np.exp(setup.log_J(t)))
            w.writerow([repr(float(t)), repr(J), repr(A), repr(float(F))])
    _emit({"t0": setup.t0, "c_plus": setup.c_plus, "c_minus": setup.c_minus,
           "C1": env.C1, "C2": env.C2, "T1": env.T1, "T2": env.T2,
           "ode_blow_up": ode.blow_up, "ode_bracket": [ode.t_lo, ode.t_hi], "out": str(args.out)})
    return 0


def cmd_kato_check(args) -> int:
    cfg = read_config(args.config)
    inst, cand = kato.instance_from_mapping(cfg)
    report = kato.certify(inst, cand)
    out = report.as_dict()
    if args.oracle:
        res = kato.oracle_for(inst, t_max=10.0 * report.bound)
        out["oracle"] = {"blow_up": res.blow_up, "t_lo": res.t_lo, "t_hi": res.t_hi}
    print(json.dumps(out, indent=2, default=_json_default))
    return 0


def cmd_lifespan(args) -> int:
    cfg, params, base = _load(args)
    if args.eps_bar is not None:
        rep = zeta_solve(params, args.eps_bar)
        d = rep.as_dict()
        if args.eps_bar < math.exp(-1):
            d["asymptote"] = log_asymptote(params, args.eps_bar)
        _emit(d)
        return 0
    data, solver = _solver_bits(args, cfg, base)
    f_l1, g_l1 = RadialSolver(params, data, solver).data_l1()
    theorem = TheoremSetup.build(params, f_l1, g_l1)
    eps = params.eps
    rep = theorem.bound(eps)
    d = rep.as_dict()
    d["eps"] = eps
    d["asymptote"] = log_asymptote(params, rep.eps_bar) if rep.eps_bar < math.exp(-1) else None
    _emit(d)
    for w in rep.warnings:
        _emit({"warning": w})
    return 0


def cmd_simulate(args) -> int:
    cfg, params, base = _load(args)
    data, solver = _solver_bits(args, cfg, base, t_max=args.t_max)
    trace = RadialSolver(params, data, solver).run()
    side = trace.write(args.out)
    meta = trace.metadata()
    meta["sidecar"] = str(side)
    _emit(meta)
    return 0


def cmd_sweep(args) -> int:
    cfg, params, base = _load(args)
    data, solver = _solver_bits(args, cfg, base)
    t_max = args.t_max if args.t_max is not None else float(cfg.get("t_max", 200.0))
    plan = SweepPlan.geometric(params, args.eps_start, args.eps_stop, args.eps_count,
                               t_max=t_max, output_path=str(args.out), data=data,
                               solver=solver, workers=args.workers)
    rows = run_sweep(plan)
    for r in rows:
        _emit(dict(zip(("eps", "t_blow_lo", "t_blow_hi", "zeta", "bound_3zeta", "asymptote", "status"),
                       [_finite_or_none(x) if not isinstance(x, str) else x for x in r.as_list()])))
    ok = consistency_ok(rows)
    _emit({"consistent": ok, "out": str(args.out)})
    return 0 if ok else 1


def cmd_fit(args) -> int:
    rows = read_rows(args.inp)
    alpha = args.alpha if args.alpha is not None else read_alpha(args.inp)
    if alpha is None:
        print("fit: alpha unknown (no JSON sidecar); pass --alpha", file=sys.stderr)
        return 2
    _emit(fit_rows(rows, alpha).as_dict())
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="blowup-lab")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("besselfn", help="modified Bessel function value and log-value")
    p.add_argument("--kind", choices=("i", "k"), required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.set_defaults(func=cmd_besselfn)

    p = sub.add_parser("compare", help="comparison solution J, envelope A and the F0 ODE")
    _add_param_flags(p)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("kato-check", help="certify a blow-up bound for a parametric instance")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--oracle", action="store_true", help="also integrate the equality case")
    p.set_defaults(func=cmd_kato_check)

    p = sub.add_parser("lifespan", help="solve the lifespan equation")
    _add_param_flags(p)
    p.add_argument("--eps-bar", type=float, help="solve directly at eps_bar = C eps (ignores --eps)")
    p.set_defaults(func=cmd_lifespan)

    p = sub.add_parser("simulate", help="run the radial solver until blow-up")
    _add_param_flags(p)
    p.add_argument("--dr", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="lifespan sweep over a geometric eps grid")
    _add_param_flags(p)
    p.add_argument("--eps-start", type=float, required=True)
    p.add_argument("--eps-stop", type=float, required=True)
    p.add_argument("--eps-count", type=int, required=True)
    p.add_argument("--t-max", type=float)
    p.add_argument("--dr", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit c in T = c [log(1/eps)]^(2/(1-alpha))")
    p.add_argument("--in", dest="inp", type=Path, required=True)
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_fit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
