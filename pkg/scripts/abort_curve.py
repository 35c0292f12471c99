#!/usr/bin/env python3
"""Abort rate and mean estimated error against UTP misreport probability."""

import argparse

import numpy as np

from mdiqd.analysis import monte_carlo
from mdiqd.dialogue import DialogueConfig, NoiseModel, ProtocolVariant


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--variant", default="protocol1")
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--gamma", type=float, default=0.1)
    ap.add_argument("--threshold", type=float, default=0.05)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--noise", choices=["misreport", "flip"], default="misreport")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    variant = ProtocolVariant.parse(args.variant)
    print(f"{'p':>6s} {'est. error':>10s} {'abort rate':>10s}")
    for p in np.linspace(0.0, 0.2, 11):
        noise = (NoiseModel(outcome_misreport_prob=p) if args.noise == "misreport"
                 else NoiseModel(qubit_flip_prob=p))
        cfg = DialogueConfig(n=args.n, gamma=args.gamma, error_threshold=args.threshold,
                             variant=variant, noise=noise, seed=args.seed)
        mc = monte_carlo(cfg, args.trials)
        print(f"{p:6.3f} {mc.mean_estimated_error:10.4f} {mc.abort_rate:10.3f}")


if __name__ == "__main__":
    main()
