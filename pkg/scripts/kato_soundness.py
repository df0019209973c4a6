"""Randomized soundness study of the blow-up certificate against the ODE oracle."""
import argparse
from collections import Counter

import numpy as np

from blowup_lab.kato import soundness_trial


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    accepted, rejected = [], Counter()
    while len(accepted) < args.trials:
        tr = soundness_trial(rng)
        if tr.accepted:
            accepted.append(tr)
        else:
            rejected[tr.reason.split(":")[0]] += 1
    ratio = np.array([t.t_blow_hi / t.bound for t in accepted])
    print(f"certified {len(accepted)}, rejected draws {dict(rejected)}")
    print(f"unsound: {sum(not t.sound for t in accepted)}")
    print(f"t_blow / (3T): min {ratio.min():.3f}, median {np.median(ratio):.3f}, max {ratio.max():.3f}")
    for fam in ("power", "exponential"):
        r = ratio[[t.family == fam for t in accepted]]
        if r.size:
            print(f"  {fam:12s} n={r.size:4d} max {r.max():.3f}")


if __name__ == "__main__":
    main()
