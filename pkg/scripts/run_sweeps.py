"""Run every JSON sweep config given on the command line (default: configs/*.json)."""

import argparse
import sys
import time
from pathlib import Path

from permconc.experiments import SweepConfig, run_sweep


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("configs", nargs="*")
    ap.add_argument("--workers", type=int)
    args = ap.parse_args(argv)
    paths = args.configs or sorted(str(p) for p in Path(__file__).parent.parent.glob("configs/*.json"))
    failed = 0
    for p in paths:
        cfg = SweepConfig.load(p)
        if args.workers:
            cfg.workers = args.workers
        t0 = time.perf_counter()
        records, s = run_sweep(cfg)
        failed += not s["pass"]
        print(f"{p}: {s['statement']} records={s['records']} C*={s['fitted_constant']:.4f} "
              f"trend_p={s['trend_pvalue']:.3g} pass={s['pass']} ({time.perf_counter() - t0:.1f}s)"
              + (f" -> {cfg.output}.csv" if cfg.output else ""))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
