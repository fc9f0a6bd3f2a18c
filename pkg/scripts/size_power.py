"""Monte Carlo size and power of the equal-predictive-ability tests.

Runs each test under its null (size) and under an alternative where the
challenger has a genuine edge (power), printing empirical rejection
rates with binomial confidence bands.
"""

import argparse

import pandas as pd

from volcast.simulate import size_power_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--obs", type=int, default=500)
    ap.add_argument("--alpha", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="optional CSV path")
    args = ap.parse_args()

    table = pd.concat(
        size_power_experiment(kind=kind, n_reps=args.reps, n_obs=args.obs,
                              alpha=args.alpha, seed=args.seed)
        for kind in ("null", "alternative")
    )
    with pd.option_context("display.float_format", "{:.4f}".format):
        print(table)
    if args.out:
        table.to_csv(args.out)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
