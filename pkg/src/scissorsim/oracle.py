"""Brute-force dense reference used to cross-check the sparse engine.

Element matrices are built by substituting every creation operator with its
image (a linear form in all creation operators) and expanding the resulting
monomial with multinomial coefficients. This shares no code with the
per-component two-mode transform in :mod:`scissorsim.optics`.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import BasisTooLargeError, ScissorsimError
from .fock import FockState, ModeRef, ModeRegistry, Occupation
from .optics import BeamSplitter, Element, ModePermutation, PhaseShifter

MAX_BASIS = 10**6
MAX_DENSE_DIM = 6000


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` non-negative ints summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def fock_basis(n_modes: int, cutoff: int) -> list[Occupation]:
    """All occupations with at most ``cutoff`` photons, graded then lexicographic."""
    size = math.comb(n_modes + cutoff, cutoff)
    if size > MAX_BASIS:
        raise BasisTooLargeError(f"basis of {size} states exceeds {MAX_BASIS}")
    basis: list[Occupation] = []
    for n in range(cutoff + 1):
        basis.extend(sorted(_compositions(n, n_modes)))
    return basis


@dataclass
class DenseStateVector:
    basis: list[Occupation]
    amplitudes: np.ndarray

    def __post_init__(self):
        self.index = {occ: i for i, occ in enumerate(self.basis)}

    @classmethod
    def from_fock(cls, state: FockState, cutoff: int | None = None) -> DenseStateVector:
        cutoff = state.cutoff if cutoff is None else cutoff
        basis = fock_basis(len(state.registry), cutoff)
        vec = cls(basis, np.zeros(len(basis), dtype=complex))
        for occ, amp in state.items():
            vec.amplitudes[vec.index[occ]] = amp
        return vec

    def to_fock(self, registry: ModeRegistry, cutoff: int | None = None) -> FockState:
        cutoff = max(map(sum, self.basis)) if cutoff is None else cutoff
        return FockState(registry, {occ: a for occ, a in zip(self.basis, self.amplitudes) if a != 0}, cutoff)


def mode_transform(element: Element, registry: ModeRegistry) -> np.ndarray:
    """Matrix ``T`` with creation operator ``k`` mapped to ``sum_j T[j, k] a_j``."""
    n = len(registry)
    T = np.eye(n, dtype=complex)
    if isinstance(element, BeamSplitter):
        i, j = registry.index(element.mode_hi), registry.index(element.mode_lo)
        T[np.ix_([i, j], [i, j])] = np.array(element.matrix, dtype=complex)
    elif isinstance(element, PhaseShifter):
        T[registry.index(element.mode), registry.index(element.mode)] = np.exp(1j * element.phi)
    elif isinstance(element, ModePermutation):
        T = np.zeros((n, n), dtype=complex)
        for src, dst in enumerate(element.mapping):
            T[dst, src] = 1.0
    else:
        raise TypeError(f"not an optical element: {element!r}")
    return T


def _expand_power(column: np.ndarray, power: int) -> dict[Occupation, complex]:
    """(sum_j column[j] a_j)^power as a polynomial {exponent vector: coefficient}."""
    support = [j for j in range(len(column)) if column[j] != 0]
    n = len(column)
    poly: dict[Occupation, complex] = {}
    if power == 0:
        return {(0,) * n: 1.0}
    for ks in _compositions(power, len(support)):
        coeff = math.factorial(power)
        term = 1.0 + 0j
        exps = [0] * n
        for j, k in zip(support, ks):
            term *= column[j] ** k / math.factorial(k)
            exps[j] = k
        poly[tuple(exps)] = coeff * term
    return poly


def _poly_mul(p: dict[Occupation, complex], q: dict[Occupation, complex]) -> dict[Occupation, complex]:
    out: dict[Occupation, complex] = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = out.get(e, 0j) + c1 * c2
    return out


def dense_element_matrix(element: Element, basis: Sequence[Occupation], registry: ModeRegistry) -> np.ndarray:
    """Dense matrix of ``element`` on ``basis`` (columns are images of basis states)."""
    dim = len(basis)
    if dim > MAX_DENSE_DIM:
        raise BasisTooLargeError(f"dense matrix of dimension {dim} exceeds {MAX_DENSE_DIM}")
    T = mode_transform(element, registry)
    index = {occ: i for i, occ in enumerate(basis)}
    n = len(registry)
    M = np.zeros((dim, dim), dtype=complex)
    for col, occ in enumerate(basis):
        # |occ> = prod_k (a_k^dag)^{n_k} / sqrt(n_k!) |0>
        poly: dict[Occupation, complex] = {(0,) * n: 1.0}
        for k, nk in enumerate(occ):
            if nk:
                poly = _poly_mul(poly, _expand_power(T[:, k], nk))
        norm_in = math.prod(math.factorial(x) for x in occ)
        for exps, c in poly.items():
            if c == 0:
                continue
            # (a^dag)^m |0> = sqrt(m!) |m>
            amp = c * math.sqrt(math.prod(math.factorial(x) for x in exps) / norm_in)
            M[index[exps], col] += amp
    return M


def run_dense(state: FockState, elements: Sequence[Element]) -> DenseStateVector:
    vec = DenseStateVector.from_fock(state)
    for el in elements:
        vec = DenseStateVector(vec.basis, dense_element_matrix(el, vec.basis, state.registry) @ vec.amplitudes)
    return vec


@dataclass(frozen=True)
class Outcome:
    probability: float
    state: FockState | None


def enumerate_outcomes(
    elements: Sequence[Element],
    state: FockState,
    measured: Sequence[ModeRef],
) -> dict[tuple[int, ...], Outcome]:
    """Exact joint distribution of photon counts on ``measured`` after ``elements``.

    Every photon-count pattern compatible with the cutoff is listed, including
    impossible ones (probability 0, state ``None``).
    """
    reg = state.registry
    ids = [reg.index(m) for m in measured]
    if len(set(ids)) != len(ids):
        raise ScissorsimError("measured modes repeat")
    vec = run_dense(state, elements)
    probs = np.abs(vec.amplitudes) ** 2
    norm2 = probs.sum()
    rest, keep = reg.without(ids)

    grouped: dict[tuple[int, ...], list[int]] = {}
    for i, occ in enumerate(vec.basis):
        grouped.setdefault(tuple(occ[j] for j in ids), []).append(i)

    out: dict[tuple[int, ...], Outcome] = {}
    for pattern in sorted(grouped):
        rows = grouped[pattern]
        p = float(probs[rows].sum() / norm2)
        if p == 0.0:
            out[pattern] = Outcome(0.0, None)
            continue
        amps = {}
        for r in rows:
            a = vec.amplitudes[r]
            if a != 0:
                amps[tuple(vec.basis[r][k] for k in keep)] = a / math.sqrt(p * norm2)
        out[pattern] = Outcome(p, FockState(rest, amps, state.cutoff))
    return out

