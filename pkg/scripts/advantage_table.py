#!/usr/bin/env python3
"""Closed-form advantage next to the exact expectation and a Monte-Carlo estimate.

Also lists, for a few epsilons, the closed-form threshold ``min_l`` against
the smallest ``l`` that actually meets ``advantage(l) < epsilon``.
"""

import argparse

from mdiqd.analysis import (
    advantage,
    expected_success_p1,
    expected_success_p2,
    min_l,
    secure_min_l,
    utp_guess_experiment,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-l", type=int, default=10)
    ap.add_argument("--trials", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for proto, exact_fn in (("protocol1", expected_success_p1), ("protocol2", expected_success_p2)):
        print(f"\n{proto}")
        print(f"{'l':>3s} {'closed form':>12s} {'exact':>12s} {'monte carlo':>12s}")
        for l in range(1, args.max_l + 1):
            utp, blind = exact_fn(l)
            mc = utp_guess_experiment(proto, l, args.trials, seed=args.seed + l)
            print(f"{l:3d} {advantage(proto, l):12.6g} {float(abs(blind - utp)):12.6g} "
                  f"{mc['empirical_advantage']:12.6g}")

    print(f"\n{'epsilon':>10s} {'proto':>10s} {'min_l':>6s} {'adv':>10s} {'secure_l':>9s}")
    for k in (4, 10, 20, 40):
        eps = 2.0**-k
        for proto in ("protocol1", "protocol2"):
            l = min_l(proto, eps)
            print(f"{'2^-%d' % k:>10s} {proto:>10s} {l:6d} {advantage(proto, l):10.3g} "
                  f"{secure_min_l(proto, eps):9d}")


if __name__ == "__main__":
    main()
