"""Sparse photon-number-basis states over a registry of named bosonic modes.

A :class:`FockState` maps occupation vectors (one photon count per registered
mode, in mode-id order) to complex amplitudes. Only non-negligible amplitudes
are stored, which keeps few-photon states over many modes cheap.

States are immutable: every operation returns a new state.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Union

import numpy as np

from .errors import (
    CutoffExceededError,
    NormalizationError,
    RegistryMismatchError,
    ScissorsimError,
    UnknownModeError,
)

PRUNE_EPS = 1e-14
DEFAULT_CUTOFF = 8
NORM_TOL = 1e-12

Occupation = tuple[int, ...]


class Role(str, Enum):
    INPUT_C = "input_c"
    ANCILLA_A = "ancilla_a"
    OUTPUT_B = "output_b"
    OTHER = "other"


@dataclass(frozen=True)
class ModeLabel:
    """One bosonic mode: a spatial path carrying one transverse-mode species."""

    id: int
    name: str
    role: Role = Role.OTHER
    path: str = ""
    species: str = ""


ModeRef = Union[int, str, ModeLabel]


class ModeRegistry:
    """Ordered, immutable collection of modes with contiguous ids from 0.

    An empty registry is allowed only as what remains after every mode has been
    measured.
    """

    __slots__ = ("_modes", "_by_name", "_by_place")

    def __init__(self, modes: Iterable[ModeLabel]):
        modes = tuple(modes)
        by_name: dict[str, int] = {}
        by_place: dict[tuple[str, str], int] = {}
        for expected, mode in enumerate(modes):
            if mode.id != expected:
                raise ScissorsimError(f"mode ids must be contiguous from 0; got {mode.id} at {expected}")
            if mode.name in by_name:
                raise ScissorsimError(f"duplicate mode name {mode.name!r}")
            place = (mode.path, mode.species)
            if place in by_place:
                raise ScissorsimError(f"two modes share path/species {place}")
            by_name[mode.name] = mode.id
            by_place[place] = mode.id
        self._modes = modes
        self._by_name = by_name
        self._by_place = by_place

    @classmethod
    def from_names(cls, names: Iterable[str]) -> ModeRegistry:
        return cls(ModeLabel(i, n, path=n) for i, n in enumerate(names))

    @classmethod
    def build(cls, specs: Iterable[tuple[str, Role, str, str]]) -> ModeRegistry:
        """Build from ``(name, role, path, species)`` tuples, assigning ids in order."""
        return cls(
            ModeLabel(i, name, role, path or name, species)
            for i, (name, role, path, species) in enumerate(specs)
        )

    def __len__(self) -> int:
        return len(self._modes)

    def __iter__(self) -> Iterator[ModeLabel]:
        return iter(self._modes)

    def __getitem__(self, i: int) -> ModeLabel:
        return self._modes[i]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ModeRegistry) and self._modes == other._modes

    def __hash__(self) -> int:
        return hash(self._modes)

    def __repr__(self) -> str:
        return f"ModeRegistry({[m.name for m in self._modes]})"

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self._modes)

    def index(self, mode: ModeRef) -> int:
        """Resolve a mode given by id, name or label to its id."""
        if isinstance(mode, ModeLabel):
            mode = mode.name
        if isinstance(mode, str):
            try:
                return self._by_name[mode]
            except KeyError:
                raise UnknownModeError(f"no mode named {mode!r}") from None
        if isinstance(mode, (int, np.integer)) and 0 <= mode < len(self._modes):
            return int(mode)
        raise UnknownModeError(f"mode {mode!r} is not registered")

    def find(self, path: str, species: str) -> int:
        try:
            return self._by_place[(path, species)]
        except KeyError:
            raise UnknownModeError(f"no mode on path {path!r} with species {species!r}") from None

    def without(self, drop: Iterable[int]) -> tuple[ModeRegistry, tuple[int, ...]]:
        """Registry of the modes not in ``drop`` (re-numbered) and the kept old ids."""
        drop = set(drop)
        keep = tuple(i for i in range(len(self._modes)) if i not in drop)
        reg = ModeRegistry(
            ModeLabel(new, m.name, m.role, m.path, m.species)
            for new, m in enumerate(self._modes[i] for i in keep)
        )
        return reg, keep


class FockState:
    """Sparse pure state (not necessarily normalized) of the modes in ``registry``.

    Args:
        registry: the modes the occupation vectors refer to.
        amplitudes: mapping from occupation vector to complex amplitude.
        cutoff: maximum total photon number any component may carry.
    """

    __slots__ = ("registry", "cutoff", "_amps")

    def __init__(
        self,
        registry: ModeRegistry,
        amplitudes: Mapping[Sequence[int], complex] | None = None,
        cutoff: int = DEFAULT_CUTOFF,
    ):
        self.registry = registry
        self.cutoff = int(cutoff)
        n = len(registry)
        amps: dict[Occupation, complex] = {}
        for occ, amp in (amplitudes or {}).items():
            occ = tuple(int(k) for k in occ)
            if len(occ) != n:
                raise ScissorsimError(f"occupation {occ} does not match {n} registered modes")
            if occ and min(occ) < 0:
                raise ScissorsimError(f"negative photon count in {occ}")
            if sum(occ) > self.cutoff:
                raise CutoffExceededError(f"{occ} carries more than {self.cutoff} photons")
            amp = complex(amp)
            if abs(amp) > PRUNE_EPS:
                amps[occ] = amps.get(occ, 0j) + amp
        self._amps = amps

    @classmethod
    def _raw(cls, registry: ModeRegistry, amps: dict[Occupation, complex], cutoff: int) -> FockState:
        # Trusted constructor for internal use: keys already valid; prunes only.
        obj = cls.__new__(cls)
        obj.registry = registry
        obj.cutoff = cutoff
        obj._amps = {k: v for k, v in amps.items() if abs(v) > PRUNE_EPS}
        return obj

    @property
    def amplitudes(self) -> Mapping[Occupation, complex]:
        return MappingProxyType(self._amps)

    def amplitude(self, occupation: Sequence[int]) -> complex:
        return self._amps.get(tuple(occupation), 0j)

    def items(self):
        return self._amps.items()

    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self) -> Iterator[Occupation]:
        return iter(self._amps)

    def is_zero(self) -> bool:
        return not self._amps

    def norm2(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self._amps.values())

    def photon_numbers(self) -> set[int]:
        return {sum(occ) for occ in self._amps}

    def with_cutoff(self, cutoff: int) -> FockState:
        return FockState(self.registry, self._amps, cutoff)

    def _check_compatible(self, other: FockState) -> None:
        if self.registry != other.registry:
            raise RegistryMismatchError("states live on different mode registries")

    def __add__(self, other: FockState) -> FockState:
        self._check_compatible(other)
        amps = dict(self._amps)
        for occ, a in other._amps.items():
            amps[occ] = amps.get(occ, 0j) + a
        return FockState._raw(self.registry, amps, max(self.cutoff, other.cutoff))

    def __sub__(self, other: FockState) -> FockState:
        return self + (-1) * other

    def __neg__(self) -> FockState:
        return (-1) * self

    def __mul__(self, scalar: complex) -> FockState:
        scalar = complex(scalar)
        return FockState._raw(self.registry, {k: scalar * v for k, v in self._amps.items()}, self.cutoff)

    __rmul__ = __mul__

    def allclose(self, other: FockState, atol: float = 1e-12) -> bool:
        self._check_compatible(other)
        keys = self._amps.keys() | other._amps.keys()
        return all(abs(self.amplitude(k) - other.amplitude(k)) <= atol for k in keys)

    def ket(self) -> str:
        """Readable ket expansion, mostly for debugging and the CLI table output."""
        if not self._amps:
            return "0"
        terms = []
        for occ in sorted(self._amps):
            a = self._amps[occ]
            terms.append(f"({a.real:+.6g}{a.imag:+.6g}j)|{','.join(map(str, occ))}>")
        return " ".join(terms)

    def __repr__(self) -> str:
        return f"FockState({self.registry.names}, {self.ket()})"


def make_vacuum(registry: ModeRegistry, cutoff: int = DEFAULT_CUTOFF) -> FockState:
    if len(registry) == 0:
        raise ScissorsimError("vacuum of an empty registry")
    return FockState._raw(registry, {(0,) * len(registry): 1 + 0j}, cutoff)


def basis_state(registry: ModeRegistry, counts: Mapping[ModeRef, int] | Sequence[int],
                cutoff: int = DEFAULT_CUTOFF) -> FockState:
    """Normalized number state, given as a full occupation vector or a sparse ``{mode: n}`` map."""
    if isinstance(counts, Mapping):
        occ = [0] * len(registry)
        for mode, n in counts.items():
            occ[registry.index(mode)] = n
    else:
        occ = list(counts)
    return FockState(registry, {tuple(occ): 1.0}, cutoff)


def create(state: FockState, mode: ModeRef) -> FockState:
    """Apply the creation operator of ``mode``; raises if any component exceeds the cutoff."""
    i = state.registry.index(mode)
    out: dict[Occupation, complex] = {}
    for occ, amp in state._amps.items():
        if sum(occ) + 1 > state.cutoff:
            raise CutoffExceededError(
                f"creating a photon in {state.registry[i].name!r} exceeds cutoff {state.cutoff}"
            )
        n = occ[i]
        new = occ[:i] + (n + 1,) + occ[i + 1:]
        out[new] = amp * math.sqrt(n + 1)
    return FockState._raw(state.registry, out, state.cutoff)


def annihilate(state: FockState, mode: ModeRef) -> FockState:
    i = state.registry.index(mode)
    out: dict[Occupation, complex] = {}
    for occ, amp in state._amps.items():
        n = occ[i]
        if n == 0:
            continue
        out[occ[:i] + (n - 1,) + occ[i + 1:]] = amp * math.sqrt(n)
    return FockState._raw(state.registry, out, state.cutoff)


def inner_product(s1: FockState, s2: FockState) -> complex:
    """<s1|s2>, antilinear in the first argument."""
    s1._check_compatible(s2)
    small, large = (s1, s2) if len(s1) <= len(s2) else (s2, s1)
    total = 0j
    for occ, a in small._amps.items():
        b = large._amps.get(occ)
        if b is not None:
            total += (a.conjugate() * b) if small is s1 else (b.conjugate() * a)
    return total


def normalize(state: FockState) -> tuple[FockState, float]:
    """Return the unit-norm version of ``state`` and its original squared norm."""
    n2 = state.norm2()
    if n2 <= 0.0:
        raise NormalizationError("cannot normalize the zero state")
    return state * (1.0 / math.sqrt(n2)), n2


@dataclass(frozen=True)
class QuditVector:
    """Amplitudes of a single photon shared among d modes."""

    gammas: tuple[complex, ...]

    def __post_init__(self):
        gammas = tuple(complex(g) for g in self.gammas)
        object.__setattr__(self, "gammas", gammas)
        if not gammas:
            raise ScissorsimError("a qudit needs at least one amplitude")
        norm2 = math.fsum(abs(g) ** 2 for g in gammas)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NormalizationError(f"qudit amplitudes have squared norm {norm2!r}, expected 1")

    @property
    def d(self) -> int:
        return len(self.gammas)

    @classmethod
    def haar_random(cls, d: int, rng: np.random.Generator) -> QuditVector:
        z = rng.normal(size=d) + 1j * rng.normal(size=d)
        z /= np.linalg.norm(z)
        return cls(tuple(z))

    def distance_up_to_phase(self, other: Sequence[complex]) -> float:
        """Max amplitude deviation after removing the best global phase."""
        other = np.asarray(other, dtype=complex)
        mine = np.asarray(self.gammas)
        if other.shape != mine.shape:
            raise ScissorsimError("dimension mismatch")
        overlap = np.vdot(other, mine)
        phase = cmath.exp(1j * cmath.phase(overlap)) if abs(overlap) > 0 else 1.0
        return float(np.max(np.abs(other * phase - mine)))
