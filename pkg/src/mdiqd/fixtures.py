"""Replay fixtures: a line-oriented ``name = value`` text format.

Required fields are ``key``, ``a``, ``b``, ``m`` (comma-separated outcome
labels ``PhiPlus|PhiMinus|PsiPlus|PsiMinus``) and ``variant``. Optional
``expect.<field>`` lines hold the intermediates a replay must reproduce;
:func:`verify_fixture` compares them in a fixed order. Blank lines and lines
starting with ``#`` are ignored.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union


from .bits import as_bits, bits_to_str
from .dialogue import DialogueTranscript, ProtocolVariant, inject_replay
from .qcore import BellOutcome, PreparedQubit

__all__ = [
    "Fixture",
    "FixtureError",
    "SHIPPED",
    "parse_fixture",
    "load_fixture",
    "dump_fixture",
    "replay_fixture",
    "verify_fixture",
    "observed_fields",
    "EXPECT_ORDER",
]

SHIPPED = {"3.3.1": "paper_3_3_1.txt", "3.3.2": "paper_3_3_2.txt"}

# Comparison order; the first mismatch is the one reported.
EXPECT_ORDER = ("x", "y", "z", "x_xor_y", "x_xor_z", "a_prime", "b_prime",
                "c", "qubits_a", "qubits_b")


class FixtureError(ValueError):
    pass


@dataclass
class Fixture:
    key: str
    a: str
    b: str
    m: List[BellOutcome]
    variant: ProtocolVariant
    id: Optional[str] = None
    expect: Dict[str, str] = field(default_factory=dict)
    sha256: str = ""


def parse_fixture(text: str) -> Fixture:
    fields: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, value = line.partition("=")
        if not sep:
            raise FixtureError(f"line {lineno}: expected 'name = value'")
        name = name.strip()
        if name in fields:
            raise FixtureError(f"line {lineno}: duplicate field {name!r}")
        fields[name] = value.strip()
    missing = [f for f in ("key", "a", "b", "m", "variant") if f not in fields]
    if missing:
        raise FixtureError(f"missing fields: {', '.join(missing)}")
    try:
        m = [BellOutcome[label.strip()] for label in fields["m"].split(",") if label.strip()]
    except KeyError as exc:
        raise FixtureError(f"unknown outcome label {exc.args[0]!r}") from None
    for name in ("key", "a", "b"):
        as_bits(fields[name], name)
    return Fixture(
        key=fields["key"], a=fields["a"], b=fields["b"], m=m,
        variant=ProtocolVariant.parse(fields["variant"]), id=fields.get("id"),
        expect={k[len("expect."):]: v for k, v in fields.items() if k.startswith("expect.")},
        sha256=hashlib.sha256(text.encode("utf-8")).hexdigest(),
    )


def load_fixture(ref: Union[str, Path]) -> Fixture:
    """Load a shipped fixture by id (``"3.3.1"``, ``"paper_3_3_1"``) or any file path."""
    name = str(ref)
    stem = {Path(v).stem: v for v in SHIPPED.values()}
    fname = SHIPPED.get(name) or stem.get(name)
    if fname is not None:
        text = resources.files("mdiqd").joinpath("data", fname).read_text("utf-8")
    else:
        path = Path(ref)
        if not path.is_file():
            raise FixtureError(f"no shipped fixture or file named {name!r}")
        text = path.read_text("utf-8")
    return parse_fixture(text)


def dump_fixture(fx: Fixture) -> str:
    lines = []
    if fx.id:
        lines.append(f"id = {fx.id}")
    lines += [
        f"variant = {fx.variant.value}",
        f"key = {fx.key}",
        f"a = {fx.a}",
        f"b = {fx.b}",
        "m = " + ",".join(BellOutcome(v).name for v in fx.m),
    ]
    lines += [f"expect.{k} = {v}" for k, v in fx.expect.items()]
    return "\n".join(lines) + "\n"


def replay_fixture(fx: Fixture, check: bool = True) -> DialogueTranscript:
    return inject_replay(fx.key, fx.a, fx.b, fx.m, fx.variant, check=check)


def _labels(qubits) -> str:
    return ",".join(PreparedQubit(int(q)).name for q in qubits)


def observed_fields(t: DialogueTranscript) -> Dict[str, str]:
    a_rel, b_rel = t.a_relabeled, t.b_relabeled
    return {
        "x": bits_to_str(t.x),
        "y": bits_to_str(t.y),
        "z": bits_to_str(t.z),
        "x_xor_y": bits_to_str(t.x ^ t.y),
        "x_xor_z": bits_to_str(t.x ^ t.z),
        "a_prime": bits_to_str(t.alice_recovered),
        "b_prime": bits_to_str(t.bob_recovered),
        "c": str(t.key.parity_c),
        "qubits_a": _labels(t.qubits_a),
        "qubits_b": _labels(t.qubits_b),
        # truth at the kept positions, for cross-checking the decoded strings
        "a_kept_truth": bits_to_str(a_rel[t.kept_a - 1]),
        "b_kept_truth": bits_to_str(b_rel[t.kept_b - 1]),
    }


def verify_fixture(fx: Fixture) -> Tuple[bool, Optional[str], Dict[str, Tuple[str, str]]]:
    """Replay ``fx`` and compare every ``expect.*`` entry.

    The replay skips the consistency check so that a tampered fixture is
    reported as a field mismatch instead of an exception. Returns
    ``(ok, first_mismatch, {field: (expected, observed)})``.
    """
    obs = observed_fields(replay_fixture(fx, check=False))
    unknown = set(fx.expect) - set(EXPECT_ORDER)
    if unknown:
        raise FixtureError(f"unknown expect fields: {sorted(unknown)}")
    compared = {}
    first = None
    for name in EXPECT_ORDER:
        if name not in fx.expect:
            continue
        want = fx.expect[name].replace(" ", "")
        if name in ("x", "y", "z", "x_xor_y", "x_xor_z", "a_prime", "b_prime"):
            want = want.replace(",", "")
        compared[name] = (want, obs[name])
        if first is None and want != obs[name]:
            first = name
    return first is None, first, compared
