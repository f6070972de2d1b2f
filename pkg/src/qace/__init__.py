"""Trace-distance average causal effect for two-qubit gates, MBQC and teleportation."""

from qace.closed_forms import closed_form_mbqc, elliptic_e, separable_product_ace_mbqc
from qace.engine import (
    AceEstimate,
    AveragingConfig,
    GateScenario,
    MbqcScenario,
    Method,
    PairMode,
    TeleportScenario,
    ace,
    ace_gate,
    ace_mbqc,
    ace_teleport,
    gate_output_state,
    mbqc_output_state,
    teleport_output_state,
)
from qace.linalg import trace_distance
from qace.quantum import concurrence, family_state, standard_gate

__version__ = "0.1.0"
