"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 protocol abort,
3 fixture mismatch. ``MDIQD_SEED`` overrides the default seed.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .analysis import advantage, min_l, monte_carlo, secure_min_l
from .bb84 import Bb84Config
from .dialogue import DialogueConfig, NoiseModel, ProtocolVariant, run_dialogue
from .fixtures import FixtureError, load_fixture, verify_fixture
from .report import RunReport, build_montecarlo_report, build_run_report

EXIT_OK, EXIT_USAGE, EXIT_ABORT, EXIT_MISMATCH = 0, 1, 2, 3
SEED_ENV = "MDIQD_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_number(text: str) -> float:
    """Accept plain floats and powers written as ``2^-10`` or ``2**-10``."""
    m = re.fullmatch(r"\s*([0-9.]+)\s*(?:\^|\*\*)\s*(-?[0-9.]+)\s*", text)
    try:
        return float(m.group(1)) ** float(m.group(2)) if m else float(text)
    except (ValueError, OverflowError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _add_dialogue_flags(p: argparse.ArgumentParser, with_config: bool) -> None:
    if with_config:
        p.add_argument("--config", type=Path, help="JSON file with any of the flags below")
    p.add_argument("--variant", choices=[v.value for v in ProtocolVariant] + ["baseline"])
    p.add_argument("--n", type=int, help="rounds per run")
    p.add_argument("--gamma", type=float, help="fraction of rounds used for error estimation")
    p.add_argument("--threshold", type=float, help="abort threshold on the estimated error")
    p.add_argument("--noise-misreport", type=float, help="UTP misreport probability")
    p.add_argument("--noise-flip", type=float, help="per-qubit flip probability")
    p.add_argument("--seed", type=int)
    p.add_argument("--key", help="inject this n-bit key instead of running BB84")
    p.add_argument("--eve", choices=["off", "intercept_resend"], help="BB84 eavesdropper")
    p.add_argument("--bb84-flip", type=float, help="BB84 channel flip probability")
    p.add_argument("--out", type=Path, help="write the JSON report here (default: stdout)")


_DEFAULTS = {"variant": "protocol1", "n": 1000, "gamma": 0.1, "threshold": 0.05,
             "noise_misreport": 0.0, "noise_flip": 0.0, "key": None, "eve": "off",
             "bb84_flip": 0.0}


def _dialogue_config(args) -> DialogueConfig:
    values = dict(_DEFAULTS, seed=_default_seed())
    cfg_path = getattr(args, "config", None)
    if cfg_path is not None:
        try:
            loaded = json.loads(cfg_path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {cfg_path}: {exc}") from None
        unknown = set(loaded) - set(values)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for name in values:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    try:
        n = int(values["n"])
        key_source = values["key"]
        if key_source is None and (values["eve"] != "off" or values["bb84_flip"]):
            key_source = Bb84Config(target_key_length=max(n, 1), eve_mode=values["eve"],
                                    channel_flip_prob=values["bb84_flip"],
                                    seed=int(values["seed"]))
        return DialogueConfig(
            n=n,
            gamma=float(values["gamma"]),
            error_threshold=float(values["threshold"]),
            variant=ProtocolVariant.parse(values["variant"]),
            noise=NoiseModel(float(values["noise_misreport"]), float(values["noise_flip"])),
            seed=int(values["seed"]),
            key_source=key_source,
        )
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def _emit(report: RunReport, out: Optional[Path]) -> None:
    text = report.to_json()
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def cmd_run(args) -> int:
    cfg = _dialogue_config(args)
    t = run_dialogue(cfg)
    _emit(build_run_report(cfg, t), args.out)
    if t.aborted:
        print(f"aborted at {t.abort_stage}: estimated error {t.estimated_error:.4f}",
              file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    cfg = _dialogue_config(args)
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    mc = monte_carlo(cfg, args.trials, workers=args.workers)
    _emit(build_montecarlo_report(cfg, mc), args.out)
    return EXIT_OK


def cmd_verify_paper(args) -> int:
    try:
        fx = load_fixture(args.fixture_file or args.fixture)
        ok, first, compared = verify_fixture(fx)
    except FixtureError as exc:
        raise UsageError(str(exc)) from None
    label = fx.id or args.fixture
    for name, (want, got) in compared.items():
        mark = "ok" if want == got else "MISMATCH"
        print(f"{label} {name:10s} {mark}")
        if want != got:
            print(f"    expected {want}\n    observed {got}")
    if not ok:
        print(f"{label}: first mismatch at {first}", file=sys.stderr)
        return EXIT_MISMATCH
    print(f"{label}: all {len(compared)} fields match")
    return EXIT_OK


def cmd_advantage(args) -> int:
    if args.l is None and args.epsilon is None:
        raise UsageError("give --l and/or --epsilon")
    if args.epsilon is not None and not 0.0 < args.epsilon < 1.0:
        raise UsageError(f"epsilon must lie in (0, 1), got {args.epsilon}")
    if args.l is not None and args.l < 0:
        raise UsageError("l must be non-negative")
    v = ProtocolVariant.parse(args.protocol)
    if args.l is not None:
        print(f"advantage({v.value}, l={args.l}) = {advantage(v, args.l):.17g}")
    if args.epsilon is not None:
        print(f"min_l({v.value}, epsilon={args.epsilon:.6g}) = {min_l(v, args.epsilon)}")
        print(f"secure_min_l({v.value}, epsilon={args.epsilon:.6g}) = "
              f"{secure_min_l(v, args.epsilon)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mdiqd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mdiqd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="simulate one protocol run")
    _add_dialogue_flags(p, with_config=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("montecarlo", help="aggregate many independent runs")
    _add_dialogue_flags(p, with_config=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("verify-paper", help="replay a worked-example fixture")
    p.add_argument("fixture", help="3.3.1, 3.3.2, or a fixture file path")
    p.add_argument("--fixture-file", type=Path,
                   help="replay this file instead of the shipped one")
    p.set_defaults(func=cmd_verify_paper)

    p = sub.add_parser("advantage", help="closed-form adversary advantage and thresholds")
    p.add_argument("protocol", choices=["protocol1", "protocol2", "p1", "p2"])
    p.add_argument("--l", type=int)
    p.add_argument("--epsilon", type=parse_number)
    p.set_defaults(func=cmd_advantage)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mdiqd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
