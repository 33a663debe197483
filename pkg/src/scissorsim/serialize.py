"""Plain-data encoding of states and reports for JSON/CSV output.

Complex numbers become ``[re, im]`` pairs of doubles and NaN becomes ``None``,
so ``json.dumps`` (which writes shortest round-trip reprs) loses nothing.
"""

from __future__ import annotations

import math
from typing import Any

from .fock import FockState, ModeRegistry
from .measurement import Branch, HeraldedEnsemble
from .protocols import ScissorsReport, TeleportationReport


def encode_float(x: float) -> float | None:
    x = float(x)
    return None if math.isnan(x) else x


def decode_float(x: float | None) -> float:
    return math.nan if x is None else float(x)


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(pair) -> complex:
    re, im = pair
    return complex(float(re), float(im))


def encode_state(state: FockState) -> dict[str, Any]:
    return {
        "modes": list(state.registry.names),
        "cutoff": state.cutoff,
        "components": [
            {"occupation": list(occ), "amplitude": encode_complex(amp)}
            for occ, amp in sorted(state.items())
        ],
    }


def decode_state(data: dict[str, Any]) -> FockState:
    reg = ModeRegistry.from_names(data["modes"])
    amps = {tuple(c["occupation"]): decode_complex(c["amplitude"]) for c in data["components"]}
    return FockState(reg, amps, int(data["cutoff"]))


def _encode_branch(b: Branch) -> dict[str, Any]:
    return {
        "probability": b.probability,
        "pattern": list(b.pattern),
        "counts": list(b.counts),
        "exact": b.exact,
        "state": encode_state(b.state),
    }


def encode_ensemble(ens: HeraldedEnsemble) -> list[dict[str, Any]]:
    return [_encode_branch(b) for b in ens.branches]


def _patterns(per_pattern: dict) -> list[dict[str, Any]]:
    return [{"pattern": list(p), "probability": v} for p, v in per_pattern.items()]


def encode_scissors(rep: ScissorsReport) -> dict[str, Any]:
    exact_d1 = [b for b in rep.output.branches if b.exact and b.pattern == (1, 0)]
    amps = None
    if exact_d1:
        st = exact_d1[0].state
        amps = [encode_complex(st.amplitude((n,))) for n in range(2)]
    return {
        "eta": rep.eta,
        "alphas": [encode_complex(a) for a in rep.alphas],
        "per_pattern": _patterns(rep.per_pattern),
        "success_probability": rep.success_probability,
        "exact_probability": rep.exact_probability,
        "output_amplitudes": amps,
        "fidelity": encode_float(rep.fidelity),
        "target": None if rep.target is None else encode_state(rep.target),
        "branches": encode_ensemble(rep.output),
    }


def encode_teleport(rep: TeleportationReport, output_gammas=None) -> dict[str, Any]:
    return {
        "d": rep.d,
        "eta": rep.eta,
        "success_probability": rep.success_probability,
        "announcement_probability": rep.announcement_probability,
        "false_announcement_probability": rep.false_announcement_probability,
        "conditional_fidelity": encode_float(rep.conditional_fidelity),
        "paper_fidelity": rep.paper_fidelity,
        "fidelity_gap": encode_float(rep.fidelity_gap),
        "two_photon_event_probability": rep.two_photon_event_probability,
        "detector_names": list(rep.detector_names),
        "output_modes": list(rep.output_modes),
        "per_pattern": _patterns(rep.per_pattern),
        "output_gammas": None if output_gammas is None else [encode_complex(g) for g in output_gammas],
        "target": encode_state(rep.target),
        "branches": encode_ensemble(rep.output),
    }
