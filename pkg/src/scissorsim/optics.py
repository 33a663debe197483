"""Passive linear-optical elements acting on :class:`~scissorsim.fock.FockState`.

Every element is described by its action on creation operators. A beam
splitter with matrix ``U`` sends the creation operator of its first mode to
``U[0][0] a1 + U[1][0] a2`` and the second to ``U[0][1] a1 + U[1][1] a2``
(columns are images).
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from .errors import NotUnitaryError, PermutationError
from .fock import FockState, ModeRef, ModeRegistry, Occupation

UNITARY_TOL = 1e-12

Matrix2 = tuple[tuple[complex, complex], tuple[complex, complex]]

_S = 1 / math.sqrt(2)
# first -> (first + second)/sqrt2, second -> (first - second)/sqrt2
HADAMARD_BS: Matrix2 = ((_S + 0j, _S + 0j), (_S + 0j, -_S + 0j))


def _as_matrix(m) -> Matrix2:
    rows = tuple(tuple(complex(x) for x in row) for row in m)
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise NotUnitaryError("beam splitter matrix must be 2x2")
    return rows  # type: ignore[return-value]


def is_unitary(m: Matrix2, tol: float = UNITARY_TOL) -> bool:
    (a, b), (c, d) = m
    # columns orthonormal
    return (
        abs(abs(a) ** 2 + abs(c) ** 2 - 1) <= tol
        and abs(abs(b) ** 2 + abs(d) ** 2 - 1) <= tol
        and abs(a.conjugate() * b + c.conjugate() * d) <= tol
    )


@dataclass(frozen=True)
class BeamSplitter:
    mode_hi: ModeRef
    mode_lo: ModeRef
    matrix: Matrix2 = HADAMARD_BS

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        if not is_unitary(m):
            raise NotUnitaryError(f"beam splitter matrix {m} is not unitary")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_angles(cls, mode_hi: ModeRef, mode_lo: ModeRef, theta: float, phi: float = 0.0) -> BeamSplitter:
        """Splitter with transmission ``cos(theta)`` and relative phase ``phi``."""
        c, s = math.cos(theta), math.sin(theta)
        e = cmath.exp(1j * phi)
        return cls(mode_hi, mode_lo, ((c, -s * e.conjugate()), (s * e, c)))

    @classmethod
    def unchecked(cls, mode_hi: ModeRef, mode_lo: ModeRef, matrix) -> BeamSplitter:
        """Skip the unitarity check. Only for fault-injection tests."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "mode_hi", mode_hi)
        object.__setattr__(obj, "mode_lo", mode_lo)
        object.__setattr__(obj, "matrix", _as_matrix(matrix))
        return obj

    def inverse(self) -> BeamSplitter:
        (a, b), (c, d) = self.matrix
        return BeamSplitter(self.mode_hi, self.mode_lo, ((a.conjugate(), c.conjugate()), (b.conjugate(), d.conjugate())))


@dataclass(frozen=True)
class PhaseShifter:
    mode: ModeRef
    phi: float


@dataclass(frozen=True)
class ModePermutation:
    """Relocates photons: whatever occupies mode ``i`` moves to mode ``mapping[i]``."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        mapping = tuple(int(x) for x in self.mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise PermutationError(f"{mapping} is not a bijection on mode ids")
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def identity(cls, n: int) -> ModePermutation:
        return cls(tuple(range(n)))

    @classmethod
    def from_pairs(cls, registry: ModeRegistry, pairs: Iterable[tuple[ModeRef, ModeRef]]) -> ModePermutation:
        """Permutation exchanging each pair of modes; all other modes stay put."""
        mapping = list(range(len(registry)))
        touched: set[int] = set()
        for x, y in pairs:
            i, j = registry.index(x), registry.index(y)
            if i in touched or j in touched or i == j:
                raise PermutationError("swap pairs must be disjoint")
            touched.update((i, j))
            mapping[i], mapping[j] = j, i
        return cls(tuple(mapping))

    @classmethod
    def from_mapping(cls, registry: ModeRegistry, mapping: Mapping[ModeRef, ModeRef]) -> ModePermutation:
        full = list(range(len(registry)))
        for src, dst in mapping.items():
            full[registry.index(src)] = registry.index(dst)
        return cls(tuple(full))

    def inverse(self) -> ModePermutation:
        inv = [0] * len(self.mapping)
        for src, dst in enumerate(self.mapping):
            inv[dst] = src
        return ModePermutation(tuple(inv))


Element = Union[BeamSplitter, PhaseShifter, ModePermutation]


@lru_cache(maxsize=4096)
def _bs_table(matrix: Matrix2, n: int, m: int) -> tuple[tuple[int, int, complex], ...]:
    """Output (p, q, amplitude) terms for n, m photons entering the two ports."""
    (u11, u12), (u21, u22) = matrix
    acc: dict[int, complex] = {}
    for k in range(n + 1):
        ck = math.comb(n, k) * u11**k * u21 ** (n - k)
        if ck == 0:
            continue
        for j in range(m + 1):
            cj = math.comb(m, j) * u12**j * u22 ** (m - j)
            p = k + j
            acc[p] = acc.get(p, 0j) + ck * cj
    total = n + m
    norm = math.sqrt(math.factorial(n) * math.factorial(m))
    return tuple(
        (p, total - p, c * math.sqrt(math.factorial(p) * math.factorial(total - p)) / norm)
        for p, c in sorted(acc.items())
    )


def apply_beam_splitter(state: FockState, bs: BeamSplitter) -> FockState:
    reg = state.registry
    i, j = reg.index(bs.mode_hi), reg.index(bs.mode_lo)
    if i == j:
        raise PermutationError("a beam splitter needs two distinct modes")
    out: dict[Occupation, complex] = {}
    for occ, amp in state.items():
        n, m = occ[i], occ[j]
        if n == 0 and m == 0:
            out[occ] = out.get(occ, 0j) + amp
            continue
        base = list(occ)
        for p, q, c in _bs_table(bs.matrix, n, m):
            base[i], base[j] = p, q
            key = tuple(base)
            out[key] = out.get(key, 0j) + amp * c
    return FockState._raw(reg, out, state.cutoff)


def apply_phase_shift(state: FockState, ps: PhaseShifter) -> FockState:
    i = state.registry.index(ps.mode)
    phase = cmath.exp(1j * ps.phi)
    out = {occ: amp * phase ** occ[i] if occ[i] else amp for occ, amp in state.items()}
    return FockState._raw(state.registry, out, state.cutoff)


def apply_permutation(state: FockState, perm: ModePermutation) -> FockState:
    mapping = perm.mapping
    if len(mapping) != len(state.registry):
        raise PermutationError(
            f"permutation acts on {len(mapping)} modes, state has {len(state.registry)}"
        )
    out: dict[Occupation, complex] = {}
    n = len(mapping)
    for occ, amp in state.items():
        new = [0] * n
        for src, dst in enumerate(mapping):
            new[dst] = occ[src]
        out[tuple(new)] = amp
    return FockState._raw(state.registry, out, state.cutoff)


def apply(state: FockState, element: Element) -> FockState:
    if isinstance(element, BeamSplitter):
        return apply_beam_splitter(state, element)
    if isinstance(element, PhaseShifter):
        return apply_phase_shift(state, element)
    if isinstance(element, ModePermutation):
        return apply_permutation(state, element)
    raise TypeError(f"not an optical element: {element!r}")


def apply_all(state: FockState, elements: Sequence[Element]) -> FockState:
    for el in elements:
        state = apply(state, el)
    return state
