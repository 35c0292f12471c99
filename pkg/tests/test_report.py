import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdiqd.analysis import monte_carlo
from mdiqd.dialogue import DialogueConfig, NoiseModel, ProtocolVariant, run_dialogue
from mdiqd.report import SCHEMA, RunReport, build_montecarlo_report, build_run_report


@given(st.integers(0, 2**64 - 1), st.sampled_from(list(ProtocolVariant)),
       st.sampled_from([0.0, 0.5]))
@settings(max_examples=15, deadline=None)
def test_run_report_round_trip(seed, variant, misreport):
    cfg = DialogueConfig(n=120, seed=seed, variant=variant,
                         noise=NoiseModel(outcome_misreport_prob=misreport))
    rep = build_run_report(cfg, run_dialogue(cfg))
    text = rep.to_json()
    assert RunReport.from_json(text) == rep
    assert RunReport.from_json(text).to_json() == text
    assert json.loads(text)["provenance"]["seed"] == seed


def test_run_report_contents():
    cfg = DialogueConfig(n=1000, seed=7)
    rep = build_run_report(cfg, run_dialogue(cfg))
    assert rep.schema == SCHEMA and rep.kind == "run"
    assert rep.summary["n"] == 1000 and rep.summary["n_prime"] == 900
    assert rep.statistics["decode_accuracy_a"] == 1.0
    assert set(rep.statistics["leakage"]) == {"l", "c1"}
    assert rep.config["variant"] == "protocol1"


def test_montecarlo_report_deterministic():
    cfg = DialogueConfig(n=500, seed=3, variant="protocol2")
    a = build_montecarlo_report(cfg, monte_carlo(cfg, 3)).to_json()
    b = build_montecarlo_report(cfg, monte_carlo(cfg, 3)).to_json()
    assert a == b
    assert RunReport.from_json(a).summary["trials"] == 3


def test_schema_checked():
    with pytest.raises(ValueError):
        RunReport.from_json(json.dumps({"schema": "other/9", "kind": "run", "config": {}}))
