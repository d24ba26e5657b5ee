"""Largest point mass over small integer grids, compared with 1/n and 1/(n-1)."""

import argparse

from permconc.bounds import pawlowski_bound
from permconc.experiments import extremal_search


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=6)
    ap.add_argument("--coord-bound", type=int, default=3)
    ap.add_argument("--restarts", type=int, default=16)
    args = ap.parse_args()
    for n in range(2, args.n_max + 1):
        r = extremal_search(n, args.coord_bound, restarts=args.restarts, seed=n)
        print(f"n={n} value={r.value} bound={pawlowski_bound(n)} w={r.w} v={r.v} ({r.mode})")


if __name__ == "__main__":
    main()
