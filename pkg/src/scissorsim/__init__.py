"""Sparse Fock-space simulation of quantum scissors and photonic qudit teleportation."""

from .errors import ScissorsimError
from .fock import (
    FockState,
    ModeLabel,
    ModeRegistry,
    QuditVector,
    Role,
    annihilate,
    basis_state,
    create,
    inner_product,
    make_vacuum,
    normalize,
)
from .measurement import (
    Branch,
    DetectorModel,
    HeraldedEnsemble,
    herald,
    measure_distribution,
    project,
)
from .optics import HADAMARD_BS, BeamSplitter, ModePermutation, PhaseShifter, apply, apply_all
from .protocols import (
    ScissorsReport,
    TeleportationReport,
    build_teleporter,
    paper_fidelity,
    run_scissors,
    teleport_qudit,
    teleport_qudit_to_basis,
)

__all__ = [
    "HADAMARD_BS",
    "BeamSplitter",
    "Branch",
    "DetectorModel",
    "FockState",
    "HeraldedEnsemble",
    "ModeLabel",
    "ModePermutation",
    "ModeRegistry",
    "PhaseShifter",
    "QuditVector",
    "Role",
    "ScissorsReport",
    "ScissorsimError",
    "TeleportationReport",
    "annihilate",
    "apply",
    "apply_all",
    "basis_state",
    "build_teleporter",
    "create",
    "herald",
    "inner_product",
    "make_vacuum",
    "measure_distribution",
    "normalize",
    "paper_fidelity",
    "project",
    "run_scissors",
    "teleport_qudit",
    "teleport_qudit_to_basis",
]
