"""Quantum scissors and qudit teleportation built from the simulator primitives.

The qudit teleporter sorts a single photon carried by ``d`` co-propagating
OAM modes onto ``d`` spatial paths ``c_l``, teleports each single-rail qubit
with its own scissors device (ancilla photon in ``a_i``, output ``b_i``),
undoes the sign flip left by a click at the ``c`` detector with a pi phase
shift, and recombines the ``b`` paths into one output beam.

Mode names are ``"<path>/<species>"``: ``in`` and ``out`` are the input and
output beams, ``a{i}``, ``b{i}``, ``c{i}`` the scissors ports.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    EmptyEnsembleError,
    NormalizationError,
    ScissorsimError,
    SubspaceViolationError,
)
from .fock import (
    FockState,
    ModeRef,
    ModeRegistry,
    QuditVector,
    Role,
    create,
    inner_product,
    make_vacuum,
)
from .measurement import (
    DetectionPattern,
    DetectorModel,
    HeraldedEnsemble,
    herald,
    measure_distribution,
    true_count_distribution,
)
from .optics import (
    HADAMARD_BS,
    BeamSplitter,
    Matrix2,
    ModePermutation,
    PhaseShifter,
    apply_all,
    apply_permutation,
    is_unitary,
)

SUBSPACE_TOL = 1e-10

IN_BEAM = "in"
OUT_BEAM = "out"


def oam(l: int) -> str:
    return f"OAM:{l}"


def mode_name(path: str, species: str) -> str:
    return f"{path}/{species}"


def qudit_registry(d: int) -> ModeRegistry:
    """Input beam plus the ``d`` sorted paths: the smallest registry ``transcribe`` accepts."""
    specs = [(mode_name(IN_BEAM, oam(l)), Role.OTHER, IN_BEAM, oam(l)) for l in range(d)]
    specs += [(mode_name(f"c{l}", oam(l)), Role.INPUT_C, f"c{l}", oam(l)) for l in range(d)]
    return ModeRegistry.build(specs)


def sorter(registry: ModeRegistry, d: int) -> ModePermutation:
    """OAM mode sorter: beam mode with OAM ``l`` goes to path ``c_l``."""
    return ModePermutation.from_pairs(
        registry,
        [(registry.find(IN_BEAM, oam(l)), registry.find(f"c{l}", oam(l))) for l in range(d)],
    )


def transcribe(qudit: QuditVector, registry: ModeRegistry, cutoff: int | None = None) -> FockState:
    """Prepare the qudit in the input beam and sort it onto the ``c`` paths."""
    d = qudit.d
    cutoff = d + 2 if cutoff is None else cutoff
    vac = make_vacuum(registry, cutoff)
    beam = FockState._raw(registry, {}, cutoff)
    for l, g in enumerate(qudit.gammas):
        beam = beam + g * create(vac, registry.find(IN_BEAM, oam(l)))
    return apply_permutation(beam, sorter(registry, d))


def mix(state: FockState, modes: Sequence[ModeRef]) -> QuditVector:
    """Read a single photon spread over ``modes`` back out as qudit amplitudes."""
    reg = state.registry
    ids = [reg.index(m) for m in modes]
    where = {i: pos for pos, i in enumerate(ids)}
    gammas = [0j] * len(ids)
    for occ, amp in state.items():
        occupied = [i for i, n in enumerate(occ) if n]
        if sum(occ) == 1 and occupied[0] in where:
            gammas[where[occupied[0]]] = amp
        elif abs(amp) > SUBSPACE_TOL:
            raise SubspaceViolationError(
                f"component {occ} (amplitude {amp:.3g}) is outside the single-photon subspace"
            )
    return QuditVector(tuple(gammas))


def qudit_state(qudit: QuditVector, registry: ModeRegistry, modes: Sequence[ModeRef],
                cutoff: int | None = None) -> FockState:
    """sum_l gamma_l |1 in modes[l]>."""
    if len(modes) != qudit.d:
        raise ScissorsimError("need one mode per qudit amplitude")
    cutoff = qudit.d + 2 if cutoff is None else cutoff
    vac = make_vacuum(registry, cutoff)
    out = FockState._raw(registry, {}, cutoff)
    for g, m in zip(qudit.gammas, modes):
        out = out + g * create(vac, m)
    return out


def fidelity_against(ensemble: HeraldedEnsemble, target: FockState) -> float:
    """Probability-weighted overlap of the heralded branches with ``target``."""
    total = ensemble.total_probability
    if not ensemble.branches or total <= 0.0:
        raise EmptyEnsembleError("fidelity of an empty ensemble is undefined")
    if abs(target.norm2() - 1.0) > 1e-12:
        raise NormalizationError("fidelity target must be normalized")
    acc = math.fsum(b.probability * abs(inner_product(target, b.state)) ** 2 for b in ensemble.branches)
    return min(acc / total, 1.0)


def paper_fidelity(eta: float) -> float:
    """Closed-form fidelity 1 - eta(1 - eta), read as one minus the false-announcement rate."""
    return 1.0 - eta * (1.0 - eta)


def _one_click_per_pair(pattern: DetectionPattern) -> bool:
    return all(pattern[k] + pattern[k + 1] == 1 for k in range(0, len(pattern), 2))


# --------------------------------------------------------------------------
# single quantum scissors


@dataclass(frozen=True)
class ScissorsSetup:
    index: int
    input_mode: str
    ancilla_mode: str
    output_mode: str
    d1: str
    d2: str


@dataclass(frozen=True)
class ScissorsReport:
    eta: float
    alphas: tuple[complex, ...]
    per_pattern: dict[DetectionPattern, float]
    success_probability: float
    exact_probability: float
    output: HeraldedEnsemble
    target: FockState | None
    fidelity: float


def _scissors_registry() -> ModeRegistry:
    return ModeRegistry.build([
        ("a", Role.ANCILLA_A, "a", ""),
        ("b", Role.OUTPUT_B, "b", ""),
        ("c", Role.INPUT_C, "c", ""),
    ])


def run_scissors(alphas: Sequence[complex] | FockState, eta: float = 1.0,
                 cutoff: int | None = None) -> ScissorsReport:
    """Run one scissors device on a single-mode input ``sum_n alpha_n |n>``.

    Accepts either amplitude list or a one-mode :class:`FockState`. Heralds on
    exactly one click at D1 (port a) or D2 (port c); a D2 click is followed by a
    pi phase shift on the output.
    """
    if isinstance(alphas, FockState):
        if len(alphas.registry) != 1:
            raise ScissorsimError("scissors input must be a single-mode state")
        top = max(occ[0] for occ in alphas) if len(alphas) else 0
        alphas = [alphas.amplitude((n,)) for n in range(top + 1)]
    alphas = tuple(complex(a) for a in alphas)
    if not alphas:
        raise ScissorsimError("no input amplitudes")
    if abs(math.fsum(abs(a) ** 2 for a in alphas) - 1.0) > 1e-12:
        raise NormalizationError("scissors input amplitudes must be normalized")
    top = len(alphas) - 1
    cutoff = top + 2 if cutoff is None else cutoff

    reg = _scissors_registry()
    state = FockState(reg, {(0, 0, n): a for n, a in enumerate(alphas)}, cutoff)
    state = create(state, "a")
    state = apply_all(state, [BeamSplitter("a", "b", HADAMARD_BS), BeamSplitter("a", "c", HADAMARD_BS)])
    detectors = [DetectorModel("D1", ("a",), eta), DetectorModel("D2", ("c",), eta)]
    ens = herald(state, detectors, lambda p: p[0] + p[1] == 1)
    ens = ens.map_states(
        lambda b: apply_all(b.state, [PhaseShifter("b", math.pi)]) if b.pattern[1] else b.state
    )

    kept = abs(alphas[0]) ** 2 + (abs(alphas[1]) ** 2 if len(alphas) > 1 else 0.0)
    target = None
    fidelity = float("nan")
    if kept > 0 and ens.branches:
        out_reg = ens.branches[0].state.registry
        amps = {(0,): alphas[0] / math.sqrt(kept)}
        if len(alphas) > 1:
            amps[(1,)] = alphas[1] / math.sqrt(kept)
        target = FockState(out_reg, amps, cutoff)
        fidelity = fidelity_against(ens, target)

    per_pattern = {p: ens.by_pattern().get(p, 0.0) for p in ((1, 0), (0, 1))}
    return ScissorsReport(
        eta=eta,
        alphas=alphas,
        per_pattern=per_pattern,
        success_probability=ens.total_probability,
        exact_probability=math.fsum(b.probability for b in ens.branches if b.exact),
        output=ens,
        target=target,
        fidelity=fidelity,
    )


# --------------------------------------------------------------------------
# qudit teleportation


@dataclass(frozen=True)
class Teleporter:
    """A d-scissors teleportation circuit, ready to run on any qudit."""

    d: int
    registry: ModeRegistry
    cutoff: int
    setups: tuple[ScissorsSetup, ...]
    elements: tuple[BeamSplitter, ...]
    detectors: tuple[DetectorModel, ...]
    output_modes: tuple[str, ...]
    mixer_pairs: tuple[tuple[str, str], ...]
    target_species: tuple[str, ...]

    def accept(self, pattern: DetectionPattern) -> bool:
        """Exactly one click in every scissors device, at either detector."""
        return _one_click_per_pair(pattern)

    def accepted_patterns(self) -> list[DetectionPattern]:
        return [sum(choice, ()) for choice in itertools.product(((1, 0), (0, 1)), repeat=self.d)]

    def corrections(self, pattern: DetectionPattern) -> tuple[PhaseShifter, ...]:
        """Pi phase shift on ``b_j`` for every device whose click came from its c-port detector."""
        return tuple(
            PhaseShifter(s.output_mode, math.pi) for s in self.setups if pattern[2 * s.index + 1] == 1
        )


def _splitter(hi: str, lo: str, matrix: Matrix2) -> BeamSplitter:
    if is_unitary(matrix):
        return BeamSplitter(hi, lo, matrix)
    # fault injection path (see scissorsim.verify.WRONG_SIGN_BS)
    return BeamSplitter.unchecked(hi, lo, matrix)


@lru_cache(maxsize=64)
def build_teleporter(
    d: int,
    target_species: tuple[str, ...] | None = None,
    bs2: Matrix2 = HADAMARD_BS,
    coherent_detectors: bool = True,
) -> Teleporter:
    """Build the d-device teleporter.

    ``target_species`` selects the transverse mode of each ancilla photon and
    therefore of each output mode; by default it equals the input species
    ``OAM:i``. Paths carrying more than one species get one mode per species,
    and beam splitters act on each species separately. Detectors see all
    species on their path.
    """
    if d < 1:
        raise ScissorsimError("d must be at least 1")
    inputs = tuple(oam(i) for i in range(d))
    targets = inputs if target_species is None else tuple(target_species)
    if len(targets) != d:
        raise ScissorsimError(f"need {d} target species, got {len(targets)}")
    if len(set(targets)) != d:
        raise ScissorsimError("target species must be distinct")

    specs = [(mode_name(IN_BEAM, s), Role.OTHER, IN_BEAM, s) for s in inputs]
    species_on = []
    for i in range(d):
        sp = (inputs[i],) if targets[i] == inputs[i] else (inputs[i], targets[i])
        species_on.append(sp)
        for path, role in ((f"a{i}", Role.ANCILLA_A), (f"b{i}", Role.OUTPUT_B), (f"c{i}", Role.INPUT_C)):
            specs += [(mode_name(path, s), role, path, s) for s in sp]
    specs += [(mode_name(OUT_BEAM, t), Role.OTHER, OUT_BEAM, t) for t in targets]
    reg = ModeRegistry.build(specs)

    setups, bs1s, bs2s, detectors = [], [], [], []
    for i, sp in enumerate(species_on):
        t = targets[i]
        setups.append(ScissorsSetup(
            index=i,
            input_mode=mode_name(f"c{i}", inputs[i]),
            ancilla_mode=mode_name(f"a{i}", t),
            output_mode=mode_name(f"b{i}", t),
            d1=f"D1_{i}",
            d2=f"D2_{i}",
        ))
        bs1s += [BeamSplitter(mode_name(f"a{i}", s), mode_name(f"b{i}", s), HADAMARD_BS) for s in sp]
        bs2s += [_splitter(mode_name(f"a{i}", s), mode_name(f"c{i}", s), bs2) for s in sp]
        detectors.append(DetectorModel(f"D1_{i}", tuple(mode_name(f"a{i}", s) for s in sp),
                                       coherent=coherent_detectors))
        detectors.append(DetectorModel(f"D2_{i}", tuple(mode_name(f"c{i}", s) for s in sp),
                                       coherent=coherent_detectors))

    return Teleporter(
        d=d,
        registry=reg,
        cutoff=d + 2,
        setups=tuple(setups),
        elements=tuple(bs1s + bs2s),
        detectors=tuple(detectors),
        output_modes=tuple(mode_name(OUT_BEAM, t) for t in targets),
        mixer_pairs=tuple((s.output_mode, mode_name(OUT_BEAM, t)) for s, t in zip(setups, targets)),
        target_species=targets,
    )


@dataclass(frozen=True)
class TeleportationReport:
    """Exact outcome statistics of one teleportation run.

    ``success_probability`` counts announcements in which every photon reaching
    a detector was registered; ``false_announcement_probability`` is the rest of
    the announcement probability (some photon went unregistered).
    """

    d: int
    eta: float
    success_probability: float
    announcement_probability: float
    false_announcement_probability: float
    per_pattern: dict[DetectionPattern, float]
    conditional_fidelity: float
    paper_fidelity: float
    two_photon_event_probability: float
    detector_names: tuple[str, ...]
    output_modes: tuple[str, ...]
    output: HeraldedEnsemble
    target: FockState

    @property
    def fidelity_gap(self) -> float:
        return self.paper_fidelity - self.conditional_fidelity


def prepare_teleporter_input(tp: Teleporter, qudit: QuditVector) -> FockState:
    """Sorted qudit plus one ancilla photon per device, before any beam splitter."""
    if qudit.d != tp.d:
        raise ScissorsimError(f"qudit has dimension {qudit.d}, teleporter expects {tp.d}")
    state = transcribe(qudit, tp.registry, tp.cutoff)
    for s in tp.setups:
        state = create(state, s.ancilla_mode)
    return state


def _run(tp: Teleporter, qudit: QuditVector, eta: float) -> TeleportationReport:
    if not 0.0 <= eta <= 1.0:
        raise ScissorsimError(f"efficiency {eta} outside [0, 1]")
    state = apply_all(prepare_teleporter_input(tp, qudit), tp.elements)
    detectors = [d.with_efficiency(eta) for d in tp.detectors]
    ens = herald(state, detectors, tp.accept)

    measured = [tp.registry.index(m) for det in tp.detectors for m in det.modes]
    rest, _ = tp.registry.without(measured)
    mixer = ModePermutation.from_pairs(rest, tp.mixer_pairs)
    ens = ens.map_states(lambda b: apply_permutation(apply_all(b.state, tp.corrections(b.pattern)), mixer))
    target = qudit_state(qudit, rest, tp.output_modes, tp.cutoff)

    per_pattern = {p: 0.0 for p in tp.accepted_patterns()}
    for b in ens.branches:
        if b.exact:
            per_pattern[b.pattern] += b.probability
    success = math.fsum(per_pattern.values())
    announced = ens.total_probability
    fidelity = fidelity_against(ens, target) if announced > 0 else float("nan")

    ideal = true_count_distribution(state, tp.detectors)
    two_photon = math.fsum(p for counts, p in ideal.items() if 2 in counts)

    return TeleportationReport(
        d=tp.d,
        eta=eta,
        success_probability=success,
        announcement_probability=announced,
        false_announcement_probability=announced - success,
        per_pattern=per_pattern,
        conditional_fidelity=fidelity,
        paper_fidelity=paper_fidelity(eta),
        two_photon_event_probability=two_photon,
        detector_names=tuple(d.name for d in tp.detectors),
        output_modes=tp.output_modes,
        output=ens,
        target=target,
    )


def teleport_qudit(qudit: QuditVector, d: int | None = None, eta: float = 1.0, *,
                   bs2: Matrix2 = HADAMARD_BS) -> TeleportationReport:
    """Teleport a photonic qudit through ``d`` parallel scissors devices."""
    d = qudit.d if d is None else d
    if d != qudit.d:
        raise ScissorsimError(f"qudit has dimension {qudit.d}, expected {d}")
    return _run(build_teleporter(d, None, bs2), qudit, eta)


def teleport_qudit_to_basis(qudit: QuditVector, d: int | None, eta: float,
                            target_species: Sequence[str], *,
                            coherent_detectors: bool = True) -> TeleportationReport:
    """Teleport onto output modes of different transverse species.

    The ancilla photon of device ``i`` is prepared in ``target_species[i]``, so
    the teleported photon leaves in that species. With ``coherent_detectors``
    false, detectors keep which-species information and the output loses its
    coherence for ``d >= 2``.
    """
    d = qudit.d if d is None else d
    if d != qudit.d:
        raise ScissorsimError(f"qudit has dimension {qudit.d}, expected {d}")
    return _run(build_teleporter(d, tuple(target_species), HADAMARD_BS, coherent_detectors), qudit, eta)


def teleport_pattern_distribution(qudit: QuditVector, eta: float,
                                  target_species: Sequence[str] | None = None) -> dict[DetectionPattern, float]:
    """Full click-pattern distribution of the teleporter, for sampling."""
    tp = build_teleporter(qudit.d, None if target_species is None else tuple(target_species))
    state = apply_all(prepare_teleporter_input(tp, qudit), tp.elements)
    return measure_distribution(state, [d.with_efficiency(eta) for d in tp.detectors])
