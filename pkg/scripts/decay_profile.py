"""Monte Carlo P(|w.v - L n| <= 1) for centered unit w and v = (1..n)."""

import argparse

from permconc.bounds import soze_decay_profile


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--L", default="0,0.25,0.5,1,2")
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--threads", type=int)
    args = ap.parse_args()
    w = list(range(1, args.n + 1))
    prof, sc = soze_decay_profile(w, args.n, args.L.split(","), args.samples, args.seed, args.threads)
    print(f"# n={args.n} samples={args.samples} seed={args.seed} map: {sc.describe()}")
    print("L,estimate,stderr,n_times_estimate")
    for L, e in prof:
        print(f"{L},{e.estimate!r},{e.stderr!r},{e.estimate * args.n!r}")


if __name__ == "__main__":
    main()
