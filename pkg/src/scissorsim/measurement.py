"""Photon-number-resolving detection with finite efficiency.

A detector covers one or more modes and reports the number of photons it
registered across all of them. Each photon is registered independently with
probability ``efficiency``, so ``n`` incident photons produce ``k`` clicks with
probability ``C(n, k) eta**k (1 - eta)**(n - k)``. There are no dark counts.

Detection patterns are tuples of click counts ordered like the detector list
passed in.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import OverlappingDetectorsError, ScissorsimError
from .fock import FockState, ModeRef, Occupation, normalize

DetectionPattern = tuple[int, ...]
AcceptPredicate = Callable[[DetectionPattern], bool]


@dataclass(frozen=True)
class DetectorModel:
    """A number-resolving detector.

    Attributes:
        name: label used in reports.
        modes: covered modes; clicks count photons summed over all of them.
        efficiency: per-photon registration probability.
        coherent: for multi-mode coverage, whether absorption erases which
            mode a photon came from. When true, the post-detection state is the
            coherent sum over all ways of splitting the registered photon number
            among the covered modes (the idealized species-blind detector).
            When false each split is a separate, incoherent branch.
    """

    name: str
    modes: tuple[ModeRef, ...]
    efficiency: float = 1.0
    coherent: bool = True

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ScissorsimError(f"detector {self.name!r} covers no modes")
        if not 0.0 <= self.efficiency <= 1.0:
            raise ScissorsimError(f"efficiency {self.efficiency} outside [0, 1]")

    def with_efficiency(self, eta: float) -> DetectorModel:
        return DetectorModel(self.name, self.modes, eta, self.coherent)


def click_probability(k: int, n: int, eta: float) -> float:
    """Probability that ``n`` incident photons yield ``k`` clicks."""
    if k < 0 or k > n:
        return 0.0
    return math.comb(n, k) * eta**k * (1.0 - eta) ** (n - k)


@dataclass(frozen=True)
class Branch:
    """One heralded outcome.

    ``counts`` are the true photon numbers that reached each detector and
    ``pattern`` the clicks reported. ``state`` is normalized.
    """

    probability: float
    state: FockState
    pattern: DetectionPattern
    counts: DetectionPattern
    split: tuple = ()

    @property
    def exact(self) -> bool:
        """True when every incident photon was registered."""
        return self.pattern == self.counts


@dataclass(frozen=True)
class HeraldedEnsemble:
    branches: tuple[Branch, ...] = field(default_factory=tuple)

    @property
    def total_probability(self) -> float:
        return math.fsum(b.probability for b in self.branches)

    def by_pattern(self) -> dict[DetectionPattern, float]:
        out: dict[DetectionPattern, float] = {}
        for b in self.branches:
            out[b.pattern] = out.get(b.pattern, 0.0) + b.probability
        return dict(sorted(out.items()))

    def map_states(self, fn: Callable[[Branch], FockState]) -> HeraldedEnsemble:
        return HeraldedEnsemble(tuple(
            Branch(b.probability, fn(b), b.pattern, b.counts, b.split) for b in self.branches
        ))


def _resolve(state: FockState, detectors: Sequence[DetectorModel]) -> list[tuple[int, ...]]:
    seen: set[int] = set()
    resolved = []
    for det in detectors:
        ids = tuple(state.registry.index(m) for m in det.modes)
        if seen.intersection(ids) or len(set(ids)) != len(ids):
            raise OverlappingDetectorsError(f"detector {det.name!r} overlaps another detector")
        seen.update(ids)
        resolved.append(ids)
    return resolved


@lru_cache(maxsize=1024)
def _click_options(n: int, eta: float) -> tuple[tuple[int, float], ...]:
    opts = ((k, click_probability(k, n, eta)) for k in range(n + 1))
    return tuple((k, p) for k, p in opts if p > 0.0)


def _pattern_probabilities(counts: DetectionPattern, etas: Sequence[float]) -> Iterable[tuple[DetectionPattern, float]]:
    per_det = [_click_options(n, eta) for n, eta in zip(counts, etas)]
    for combo in itertools.product(*per_det):
        p = 1.0
        for _, pk in combo:
            p *= pk
        yield tuple(k for k, _ in combo), p


def true_count_distribution(state: FockState, detectors: Sequence[DetectorModel]) -> dict[DetectionPattern, float]:
    """Probability of each configuration of photon numbers reaching the detectors."""
    ids = _resolve(state, detectors)
    norm2 = state.norm2()
    if norm2 <= 0:
        raise ScissorsimError("cannot measure the zero state")
    dist: dict[DetectionPattern, float] = {}
    for occ, amp in state.items():
        n = tuple(sum(occ[i] for i in det) for det in ids)
        dist[n] = dist.get(n, 0.0) + abs(amp) ** 2 / norm2
    return dict(sorted(dist.items()))


def measure_distribution(state: FockState, detectors: Sequence[DetectorModel]) -> dict[DetectionPattern, float]:
    """Born-rule distribution of reported click patterns, canonically ordered."""
    true_counts = true_count_distribution(state, detectors)
    etas = [d.efficiency for d in detectors]
    dist: dict[DetectionPattern, float] = {}
    for n, pn in true_counts.items():
        for pattern, pk in _pattern_probabilities(n, etas):
            dist[pattern] = dist.get(pattern, 0.0) + pn * pk
    return dict(sorted(dist.items()))


def project(state: FockState, counts: Mapping[ModeRef, int]) -> tuple[FockState, float]:
    """Ideal projection onto exact photon numbers on some modes.

    Returns the normalized state of the remaining modes and the probability of
    the outcome. An impossible outcome gives the zero state and probability 0.
    """
    reg = state.registry
    wanted = {reg.index(m): int(n) for m, n in counts.items()}
    rest, keep = reg.without(wanted)
    norm2 = state.norm2()
    if norm2 <= 0:
        raise ScissorsimError("cannot project the zero state")
    out: dict[Occupation, complex] = {}
    for occ, amp in state.items():
        if all(occ[i] == n for i, n in wanted.items()):
            key = tuple(occ[i] for i in keep)
            out[key] = out.get(key, 0j) + amp
    cond = FockState._raw(rest, out, state.cutoff)
    prob = cond.norm2() / norm2
    if prob == 0.0:
        return cond, 0.0
    return normalize(cond)[0], prob


def herald(
    state: FockState,
    detectors: Sequence[DetectorModel],
    accept: AcceptPredicate,
) -> HeraldedEnsemble:
    """Conditional post-measurement ensemble for the accepted click patterns.

    Branches are kept apart by the true photon numbers at each detector (and,
    for incoherent multi-mode detectors, by how those photons were split among
    the covered modes) and by the reported pattern. Each branch weight is the
    probability of that true configuration times the probability that the
    detectors report the accepted pattern.
    """
    ids = _resolve(state, detectors)
    norm2 = state.norm2()
    if norm2 <= 0:
        raise ScissorsimError("cannot herald the zero state")
    measured = [i for det in ids for i in det]
    rest, keep = state.registry.without(measured)
    split_dets = [k for k, det in enumerate(detectors) if not det.coherent and len(ids[k]) > 1]

    groups: dict[tuple, dict[Occupation, complex]] = {}
    for occ, amp in state.items():
        n = tuple(sum(occ[i] for i in det) for det in ids)
        split = tuple(tuple(occ[i] for i in ids[k]) for k in split_dets)
        rem = tuple(occ[i] for i in keep)
        bucket = groups.setdefault((n, split), {})
        bucket[rem] = bucket.get(rem, 0j) + amp

    etas = [d.efficiency for d in detectors]
    branches = []
    for (n, split), amps in sorted(groups.items()):
        cond = FockState._raw(rest, amps, state.cutoff)
        weight = cond.norm2() / norm2
        if weight <= 0.0:
            continue
        cond = normalize(cond)[0]
        for pattern, pk in _pattern_probabilities(n, etas):
            if accept(pattern):
                branches.append(Branch(weight * pk, cond, pattern, n, split))
    return HeraldedEnsemble(tuple(branches))
