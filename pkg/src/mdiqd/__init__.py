"""Simulator and analysis toolkit for efficient MDI quantum dialogue protocols."""

__version__ = "0.1.0"

from .qcore import (  # noqa: E402
    BellOutcome,
    PreparedQubit,
    bell_distribution,
    measure_bell,
    outcome_probability,
)
from .codec import decode_guess, encode_bit, encode_message  # noqa: E402
from .bb84 import Bb84Config, KeyMaterial, key_parity, run_bb84  # noqa: E402
from .dialogue import (  # noqa: E402
    DialogueConfig,
    NoiseModel,
    ProtocolVariant,
    inject_replay,
    run_dialogue,
)
