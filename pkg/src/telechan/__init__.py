"""Standard teleportation through mixed resources as a generalized depolarizing channel."""

__version__ = "0.1.0"

from .channel import ChannelSpec, apply, apply_to_half, compose, spectrum_of
from .protocol_sim import OutcomeRecord, TeleportResult, swap, teleport
from .states import (
    DensityMatrix,
    OperatorBasis,
    PureState,
    StateError,
    bell_basis,
    bell_diagonal,
    bell_state,
    isotropic_state,
    load_state,
    pauli,
    random_pure,
    random_separable,
    random_state,
    save_state,
    weyl,
    werner_state,
)

__all__ = [
    "ChannelSpec",
    "DensityMatrix",
    "OperatorBasis",
    "OutcomeRecord",
    "PureState",
    "StateError",
    "TeleportResult",
    "apply",
    "apply_to_half",
    "bell_basis",
    "bell_diagonal",
    "bell_state",
    "compose",
    "isotropic_state",
    "load_state",
    "pauli",
    "random_pure",
    "random_separable",
    "random_state",
    "save_state",
    "spectrum_of",
    "swap",
    "teleport",
    "weyl",
    "werner_state",
]
