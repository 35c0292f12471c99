#!/usr/bin/env python3
"""Replay the shipped worked-example fixtures and print every intermediate."""

from mdiqd.fixtures import SHIPPED, load_fixture, observed_fields, replay_fixture, verify_fixture


def main():
    status = 0
    for fid in SHIPPED:
        fx = load_fixture(fid)
        t = replay_fixture(fx)
        print(f"== {fid} ({fx.variant.value})")
        print(f"  key          {fx.key}   c={t.key.parity_c}")
        print(f"  a            {fx.a}")
        print(f"  b            {fx.b}")
        print(f"  kept         {list(map(int, t.kept_a))}")
        for name, value in observed_fields(t).items():
            print(f"  {name:13s}{value}")
        ok, first, _ = verify_fixture(fx)
        print(f"  -> {'all fields match' if ok else 'first mismatch at ' + first}")
        status |= not ok
    return status


if __name__ == "__main__":
    raise SystemExit(main())
