"""Six-point lifespan sweep on the standard config, then the log-curve fit."""
import argparse
import json
from pathlib import Path

from blowup_lab.params import load_params
from blowup_lab.pde import SolverConfig
from blowup_lab.sweep import SweepPlan, consistency_ok, fit_rows, run_sweep

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path, default=ROOT / "configs" / "standard.cfg")
    ap.add_argument("--eps-stop", type=float, default=1e-3)
    ap.add_argument("--count", type=int, default=6)
    ap.add_argument("--dr", type=float, default=0.01)
    ap.add_argument("--out", type=Path, default=Path("standard_sweep.csv"))
    args = ap.parse_args()

    params = load_params(args.config)
    plan = SweepPlan.geometric(params, 0.5, args.eps_stop, args.count, t_max=200.0,
                               output_path=str(args.out), solver=SolverConfig(dr=args.dr))
    rows = run_sweep(plan)
    print(f"{'eps':>10} {'T_lo':>9} {'T_hi':>9} {'3 zeta':>9} {'asymptote':>10}  status")
    for r in rows:
        print(f"{r.eps:10.3e} {r.t_blow_lo:9.4f} {r.t_blow_hi:9.4f} {r.bound_3zeta:9.2f} {r.asymptote:10.2f}  {r.status}")
    print(json.dumps(fit_rows(rows, params.alpha).as_dict()))
    print("consistent:", consistency_ok(rows))


if __name__ == "__main__":
    main()
