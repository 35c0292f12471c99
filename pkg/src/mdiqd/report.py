"""JSON run reports.

Every report is one JSON object::

    {
      "schema": "mdiqd.report/1",
      "kind": "run" | "montecarlo" | "verify" | "advantage",
      "config": {...},       # echo of the inputs
      "summary": {...},      # n, n', kept counts, abort flag, estimated error
      "statistics": {...},   # keep fractions, accuracy, leakage, frequencies
      "provenance": {"seed": ..., "tool_version": ..., "fixture_sha256": ...}
    }

Reports contain no timestamps, so equal inputs give byte-identical output.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from . import __version__
from .analysis import MonteCarloReport, leakage_stats
from .bb84 import Bb84Config
from .dialogue import DialogueConfig, DialogueTranscript
from .qcore import BellOutcome, PreparedQubit

SCHEMA = "mdiqd.report/1"


@dataclass
class RunReport:
    kind: str
    config: Dict[str, Any]
    summary: Dict[str, Any] = field(default_factory=dict)
    statistics: Dict[str, Any] = field(default_factory=dict)
    provenance: Dict[str, Any] = field(default_factory=dict)
    schema: str = SCHEMA

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        data = json.loads(text)
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        return cls(**data)


def _provenance(seed: Optional[int], fixture_sha256: Optional[str] = None) -> Dict[str, Any]:
    return {"seed": seed, "tool_version": __version__, "fixture_sha256": fixture_sha256}


def config_echo(cfg: DialogueConfig) -> Dict[str, Any]:
    ks = cfg.key_source
    if ks is None:
        key = {"source": "bb84", "settings": "default"}
    elif isinstance(ks, Bb84Config):
        key = {"source": "bb84", "settings": asdict(ks)}
    else:
        key = {"source": "injected"}
    return {
        "n": cfg.n,
        "gamma": cfg.gamma,
        "error_threshold": cfg.error_threshold,
        "variant": cfg.variant.value,
        "noise": asdict(cfg.noise),
        "seed": cfg.seed,
        "key": key,
        "messages": "injected" if cfg.messages is not None else "random",
    }


def _frequencies(qa, qb, m) -> Dict[str, Dict[str, float]]:
    counts = np.zeros((4, 4, 4), dtype=np.int64)
    np.add.at(counts, (np.asarray(qa, int), np.asarray(qb, int), np.asarray(m, int)), 1)
    out = {}
    for a in PreparedQubit:
        for b in PreparedQubit:
            row = counts[a, b]
            if row.sum():
                out[f"{a.name},{b.name}"] = {o.name: float(row[o]) / float(row.sum())
                                             for o in BellOutcome}
    return out


def transcript_summary(t: DialogueTranscript) -> Dict[str, Any]:
    return {
        "n": t.n,
        "n_prime": t.n_prime if not t.aborted else None,
        "estimation_rounds": int(t.estimation_indices.size),
        "estimated_error": t.estimated_error,
        "aborted": t.aborted,
        "abort_stage": t.abort_stage,
        "kept_a": int(t.kept_a.size),
        "kept_b": int(t.kept_b.size),
        "synchronized": bool(t.synchronized),
        "key_parity": t.key.parity_c,
        "key_estimated_qber": t.key.estimated_qber,
        "public_nonce": t.public_nonce,
    }


def build_run_report(cfg: DialogueConfig, t: DialogueTranscript) -> RunReport:
    stats: Dict[str, Any] = {}
    if not t.aborted:
        npr = t.n_prime
        a_rel, b_rel = t.a_relabeled, t.b_relabeled
        ok_a = np.count_nonzero(t.alice_recovered == a_rel[t.kept_a - 1])
        ok_b = np.count_nonzero(t.bob_recovered == b_rel[t.kept_b - 1])
        leak = leakage_stats(t)
        stats = {
            "keep_fraction_a": t.kept_a.size / npr if npr else 0.0,
            "keep_fraction_b": t.kept_b.size / npr if npr else 0.0,
            "decode_accuracy_a": ok_a / t.kept_a.size if t.kept_a.size else 1.0,
            "decode_accuracy_b": ok_b / t.kept_b.size if t.kept_b.size else 1.0,
            "leakage": {"l": leak.l, "c1": leak.c1},
            "outcome_frequencies": _frequencies(t.qubits_a, t.qubits_b, t.m_seq),
        }
    return RunReport(kind="run", config=config_echo(cfg), summary=transcript_summary(t),
                     statistics=stats, provenance=_provenance(cfg.seed))


def build_montecarlo_report(cfg: DialogueConfig, mc: MonteCarloReport) -> RunReport:
    stats = mc.to_dict()
    summary = {k: stats.pop(k) for k in ("variant", "trials", "n", "master_seed")}
    summary["abort_rate"] = stats["abort_rate"]
    return RunReport(kind="montecarlo", config=config_echo(cfg), summary=summary,
                     statistics=stats, provenance=_provenance(cfg.seed))
