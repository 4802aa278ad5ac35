"""Weightless controllers for continuous control."""

from ._dwc import (
    Circuit,
    ConfigError,
    DomainError,
    FormatError,
    NumericError,
    Policy,
    ProtocolError,
    ShapeError,
    StateError,
    compile,
    compute_thresholds,
    config_hash,
    evaluate,
    inverse_normal_cdf,
    load_circuit,
    load_policy,
    preset_names,
    random_policy,
    reference_action_words,
    train,
)

__all__ = [
    "Circuit",
    "ConfigError",
    "DomainError",
    "FormatError",
    "NumericError",
    "Policy",
    "ProtocolError",
    "ShapeError",
    "StateError",
    "compile",
    "compute_thresholds",
    "config_hash",
    "evaluate",
    "inverse_normal_cdf",
    "load_circuit",
    "load_policy",
    "preset_names",
    "random_policy",
    "reference_action_words",
    "train",
]
