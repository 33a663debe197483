import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scissorsim import (
    HADAMARD_BS,
    BeamSplitter,
    FockState,
    ModePermutation,
    ModeRegistry,
    PhaseShifter,
    apply,
    apply_all,
    basis_state,
)
from scissorsim.errors import NotUnitaryError, PermutationError

S = 1 / math.sqrt(2)


def test_single_photon_in_first_port(two_modes):
    out = apply(basis_state(two_modes, (1, 0)), BeamSplitter("a", "b"))
    assert out.amplitude((1, 0)) == pytest.approx(S)
    assert out.amplitude((0, 1)) == pytest.approx(S)


def test_single_photon_in_second_port_picks_up_sign(two_modes):
    out = apply(basis_state(two_modes, (0, 1)), BeamSplitter("a", "b"))
    assert out.amplitude((1, 0)) == pytest.approx(S)
    assert out.amplitude((0, 1)) == pytest.approx(-S)


def test_hong_ou_mandel(two_modes):
    out = apply(basis_state(two_modes, (1, 1)), BeamSplitter("a", "b"))
    assert out.amplitude((1, 1)) == 0
    assert out.amplitude((2, 0)) == pytest.approx(S)
    assert out.amplitude((0, 2)) == pytest.approx(-S)
    assert len(out) == 2


def test_vacuum_untouched(two_modes):
    out = apply(basis_state(two_modes, (0, 0)), BeamSplitter("a", "b"))
    assert dict(out.amplitudes) == {(0, 0): 1}


def test_splitter_is_own_inverse(two_modes):
    s = FockState(two_modes, {(2, 1): 0.6, (0, 3): 0.8j}, cutoff=3)
    bs = BeamSplitter("a", "b")
    assert apply_all(s, [bs, bs]).allclose(s)


def test_inverse_undoes_general_splitter(two_modes):
    bs = BeamSplitter.from_angles("a", "b", 0.3, 1.1)
    s = FockState(two_modes, {(2, 1): 0.6, (0, 3): 0.8j}, cutoff=3)
    assert apply_all(s, [bs, bs.inverse()]).allclose(s)


def test_non_unitary_matrix_rejected():
    with pytest.raises(NotUnitaryError):
        BeamSplitter("a", "b", ((1, 1), (1, 1)))
    with pytest.raises(NotUnitaryError):
        BeamSplitter("a", "b", ((1, 0, 0), (0, 1, 0)))


def test_same_mode_twice_rejected(two_modes):
    with pytest.raises(PermutationError):
        apply(basis_state(two_modes, (1, 0)), BeamSplitter("a", "a"))


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_phase_shift_scales_with_photon_number(n):
    reg = ModeRegistry.from_names(["a"])
    out = apply(basis_state(reg, (n,)), PhaseShifter("a", 0.4))
    assert out.amplitude((n,)) == pytest.approx(np.exp(0.4j * n))


def test_pi_phase_on_single_photon_flips_sign(two_modes):
    s = FockState(two_modes, {(0, 0): S, (1, 0): S})
    out = apply(s, PhaseShifter("a", math.pi))
    assert out.amplitude((1, 0)) == pytest.approx(-S)
    assert out.amplitude((0, 0)) == pytest.approx(S)


def test_permutation_moves_photons():
    reg = ModeRegistry.from_names(["a", "b", "c"])
    s = basis_state(reg, (1, 2, 0))
    perm = ModePermutation((1, 2, 0))  # a->b, b->c, c->a
    assert apply(s, perm).amplitude((0, 1, 2)) == 1
    assert apply_all(s, [perm, perm.inverse()]).allclose(s)


def test_permutation_from_pairs_and_mapping():
    reg = ModeRegistry.from_names(["a", "b", "c"])
    assert ModePermutation.from_pairs(reg, [("a", "c")]).mapping == (2, 1, 0)
    assert ModePermutation.from_mapping(reg, {"a": "b", "b": "a"}).mapping == (1, 0, 2)
    with pytest.raises(PermutationError):
        ModePermutation.from_pairs(reg, [("a", "b"), ("b", "c")])


@pytest.mark.parametrize("bad", [(0, 0, 1), (0, 3, 1), (1,)])
def test_invalid_permutations(bad):
    if len(bad) == 1:
        reg = ModeRegistry.from_names(["a", "b"])
        with pytest.raises(PermutationError):
            apply(basis_state(reg, (1, 0)), ModePermutation((0,)))
    else:
        with pytest.raises(PermutationError):
            ModePermutation(bad)


def test_apply_rejects_unknown_elements(two_modes):
    with pytest.raises(TypeError):
        apply(basis_state(two_modes, (1, 0)), "mirror")


def test_hadamard_constant_matches_rules():
    (a, b), (c, d) = HADAMARD_BS
    assert (a, c) == (S, S)  # first port -> (first + second)/sqrt2
    assert (b, d) == (S, -S)  # second port -> (first - second)/sqrt2


@settings(max_examples=80, deadline=None)
@given(
    st.floats(0, math.pi), st.floats(-math.pi, math.pi),
    st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=4, unique=True),
    st.integers(0, 2**32 - 1),
)
def test_splitter_preserves_norm_and_photon_number(theta, phi, occs, seed):
    reg = ModeRegistry.from_names(["a", "b"])
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=len(occs)) + 1j * rng.normal(size=len(occs))
    raw /= np.linalg.norm(raw)
    s = FockState(reg, dict(zip(occs, raw)), cutoff=6)
    out = apply(s, BeamSplitter.from_angles("a", "b", theta, phi))
    assert out.norm2() == pytest.approx(1.0, abs=1e-12)
    for n in {sum(o) for o in occs}:
        before = sum(abs(a) ** 2 for o, a in s.items() if sum(o) == n)
        after = sum(abs(a) ** 2 for o, a in out.items() if sum(o) == n)
        assert after == pytest.approx(before, abs=1e-12)
