"""Grid refinement of the radial solver: d'Alembert order, Laplacian order, T_num drift."""
import argparse

import numpy as np

from blowup_lab import pde
from blowup_lab.params import ProblemParams


def bump(r):
    return np.where(r < 1, (1 - r * r) ** 4, 0.0)


def dalembert_error(dr, t_end=1.5):
    r = np.arange(0, 3.0, dr)
    data = pde.InitialData("table", table=(tuple(r), tuple(bump(r)), tuple(0 * r)))
    cfg = pde.SolverConfig(dr=dr, t_max=t_end, nonlinear=False, mass=False, damping=False)
    s = pde.RadialSolver(ProblemParams(n=1, mu1=0, eps=1.0), data, cfg)
    st = s.init_state()
    while st.t < t_end - 1e-9:
        st = s.step(st)
    return float(np.max(np.abs(st.u - 0.5 * (bump(s.r + st.t) + bump(np.abs(s.r - st.t))))))


def laplacian_error(n, dr):
    s = pde.RadialSolver(ProblemParams(n=n), pde.InitialData(), pde.SolverConfig(dr=dr, t_max=1),
                         grid=pde.RadialGrid(n, dr, 8.0))
    u = np.exp(-s.r ** 2)
    return float(np.max(np.abs(s.laplacian(u) - (4 * s.r ** 2 - 2 * n) * u)[:-1]))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()
    drs = [0.02 / 2 ** k for k in range(args.levels)]

    errs = [dalembert_error(dr) for dr in drs]
    print("d'Alembert, n=1")
    for dr, e, o in zip(drs, errs, [np.nan] + list(np.log2(np.array(errs[:-1]) / errs[1:]))):
        print(f"  dr={dr:.5f} err={e:.3e} order={o:.3f}")

    for n in (1, 2, 3):
        le = [laplacian_error(n, dr) for dr in drs[:3]]
        print(f"Laplacian n={n}: orders {np.round(np.log2(np.array(le[:-1]) / le[1:]), 3)}")

    for n in (1, 2, 3):
        P = ProblemParams(n=n, p=2, alpha=0, beta=2, mu1=1, mu2=1, eps=0.5)
        ts = [pde.run_until_blowup(P, t_max=100, dr=dr) for dr in drs]
        mids = [0.5 * (t.t_lo + t.t_hi) for t in ts]
        print(f"T_num n={n}: " + ", ".join(f"{m:.5f}" for m in mids))
        sup = max(float(np.max(t.support_radius - t.times - P.R)) for t in ts)
        print(f"  max support excess over t+R: {sup:.3f}")


if __name__ == "__main__":
    main()
