import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scissorsim import (
    HADAMARD_BS,
    BeamSplitter,
    DetectorModel,
    FockState,
    ModeRegistry,
    apply_all,
    basis_state,
    create,
    herald,
    make_vacuum,
    measure_distribution,
    project,
)
from scissorsim.errors import OverlappingDetectorsError, ScissorsimError
from scissorsim.measurement import click_probability, true_count_distribution

S = 1 / math.sqrt(2)


def one_mode(n):
    reg = ModeRegistry.from_names(["a"])
    return basis_state(reg, (n,))


def test_single_photon_ideal_detector():
    assert measure_distribution(one_mode(1), [DetectorModel("D", ("a",))]) == {(1,): 1.0}


@pytest.mark.parametrize("eta", [0.0, 0.3, 0.8, 1.0])
def test_single_photon_lossy_detector(eta):
    dist = measure_distribution(one_mode(1), [DetectorModel("D", ("a",), eta)])
    assert dist.get((1,), 0.0) == pytest.approx(eta, abs=1e-15)
    assert dist.get((0,), 0.0) == pytest.approx(1 - eta, abs=1e-15)


@pytest.mark.parametrize("eta", [0.2, 0.5, 0.9])
def test_two_photons_read_as_one(eta):
    dist = measure_distribution(one_mode(2), [DetectorModel("D", ("a",), eta)])
    assert dist[(1,)] == pytest.approx(2 * eta * (1 - eta), abs=1e-15)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)


def test_click_probability_edges():
    assert click_probability(3, 2, 0.5) == 0.0
    assert click_probability(-1, 2, 0.5) == 0.0
    assert click_probability(0, 0, 0.5) == 1.0


def test_detector_validation():
    with pytest.raises(ScissorsimError):
        DetectorModel("D", ())
    with pytest.raises(ScissorsimError):
        DetectorModel("D", ("a",), 1.5)


def test_overlapping_detectors_rejected(two_modes):
    s = basis_state(two_modes, (1, 0))
    dets = [DetectorModel("D1", ("a",)), DetectorModel("D2", ("a", "b"))]
    with pytest.raises(OverlappingDetectorsError):
        measure_distribution(s, dets)


def test_multi_mode_detector_sums_counts(two_modes):
    s = basis_state(two_modes, (1, 1))
    assert measure_distribution(s, [DetectorModel("D", ("a", "b"))]) == {(2,): 1.0}


def test_distribution_is_canonically_ordered(two_modes):
    s = FockState(two_modes, {(0, 1): S, (1, 0): S})
    dist = measure_distribution(s, [DetectorModel("A", ("a",)), DetectorModel("B", ("b",))])
    assert list(dist) == sorted(dist)


def _abc():
    reg = ModeRegistry.from_names(["a", "b", "c"])
    vac = make_vacuum(reg, 2)
    state = create(create(vac, "c"), "a")
    return apply_all(state, [BeamSplitter("a", "b", HADAMARD_BS), BeamSplitter("a", "c", HADAMARD_BS)])


def test_single_device_post_splitter_state():
    s = _abc()
    # four equally weighted components with amplitudes +-1/2
    assert {occ: round(abs(a), 12) for occ, a in s.items()} == {
        (1, 1, 0): 0.5, (0, 1, 1): 0.5, (2, 0, 0): 0.5, (0, 0, 2): 0.5,
    }


def test_project_single_click_at_first_detector():
    rest, p = project(_abc(), {"a": 1, "c": 0})
    assert p == pytest.approx(0.25, abs=1e-15)
    assert rest.registry.names == ("b",)
    assert abs(rest.amplitude((1,))) == pytest.approx(1.0)


def test_project_everything_leaves_empty_registry():
    reg = ModeRegistry.from_names(["a"])
    rest, p = project(basis_state(reg, (1,)), {"a": 1})
    assert p == 1.0
    assert len(rest.registry) == 0
    assert rest.amplitude(()) == pytest.approx(1.0)


def test_project_impossible_outcome_has_zero_probability():
    reg = ModeRegistry.from_names(["a"])
    s = FockState(reg, {(0,): S, (1,): S})
    rest, p = project(s, {"a": 2})
    assert p == 0.0
    assert rest.is_zero()


def test_project_probabilities_sum_to_one():
    s = _abc()
    total = sum(project(s, {"a": na, "c": nc})[1] for na in range(3) for nc in range(3))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_herald_single_device_lossy():
    dets = [DetectorModel("D1", ("a",), 0.8), DetectorModel("D2", ("c",), 0.8)]
    ens = herald(_abc(), dets, lambda p: p[0] + p[1] == 1)
    assert ens.total_probability == pytest.approx(0.56, abs=1e-12)
    vacuum = sum(b.probability for b in ens.branches if b.state.amplitude((0,)) != 0)
    assert vacuum == pytest.approx(0.16, abs=1e-12)
    assert sum(b.probability for b in ens.branches if b.exact) == pytest.approx(0.4, abs=1e-12)


def test_herald_accept_nothing():
    ens = herald(_abc(), [DetectorModel("D1", ("a",))], lambda p: False)
    assert ens.total_probability == 0.0
    assert ens.branches == ()


def test_herald_ideal_matches_projection():
    s = _abc()
    dets = [DetectorModel("D1", ("a",)), DetectorModel("D2", ("c",))]
    ens = herald(s, dets, lambda p: True)
    for b in ens.branches:
        rest, p = project(s, {"a": b.pattern[0], "c": b.pattern[1]})
        assert b.probability == pytest.approx(p, abs=1e-12)
        assert b.state.allclose(rest, atol=1e-12)


def test_incoherent_detector_splits_branches(two_modes):
    reg = ModeRegistry.from_names(["x", "y", "z"])
    s = FockState(reg, {(1, 0, 0): S, (0, 1, 1): S})
    coherent = herald(s, [DetectorModel("D", ("x", "y"))], lambda p: True)
    split = herald(s, [DetectorModel("D", ("x", "y"), coherent=False)], lambda p: True)
    assert len(coherent.branches) == 1
    assert len(split.branches) == 2
    assert split.total_probability == pytest.approx(1.0)


def test_by_pattern_groups_branches():
    dets = [DetectorModel("D1", ("a",), 0.5), DetectorModel("D2", ("c",), 0.5)]
    ens = herald(_abc(), dets, lambda p: True)
    assert sum(ens.by_pattern().values()) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_completeness_for_random_states(seed, eta):
    rng = np.random.default_rng(seed)
    reg = ModeRegistry.from_names(["a", "b", "c"])
    occs = {tuple(rng.integers(0, 3, size=3)) for _ in range(5)}
    raw = rng.normal(size=len(occs)) + 1j * rng.normal(size=len(occs))
    raw /= np.linalg.norm(raw)
    s = FockState(reg, dict(zip(occs, raw)), cutoff=6)
    dets = [DetectorModel("A", ("a",), eta), DetectorModel("BC", ("b", "c"), eta)]
    assert sum(measure_distribution(s, dets).values()) == pytest.approx(1.0, abs=1e-12)
    assert sum(true_count_distribution(s, dets).values()) == pytest.approx(1.0, abs=1e-12)
