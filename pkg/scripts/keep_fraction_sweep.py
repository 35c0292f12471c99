#!/usr/bin/env python3
"""Keep fraction and decode accuracy of each variant across round counts."""

import argparse

from mdiqd.analysis import monte_carlo
from mdiqd.dialogue import DialogueConfig, ProtocolVariant


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 1000, 10_000, 100_000])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    print(f"{'variant':15s} {'n':>8s} {'keep_a':>8s} {'keep_b':>8s} {'accuracy':>9s}")
    for v in ProtocolVariant:
        for n in args.sizes:
            mc = monte_carlo(DialogueConfig(n=n, variant=v, seed=args.seed),
                             args.trials, workers=args.workers)
            print(f"{v.value:15s} {n:8d} {mc.keep_fraction_a:8.4f} "
                  f"{mc.keep_fraction_b:8.4f} {mc.decode_accuracy:9.4f}")


if __name__ == "__main__":
    main()
