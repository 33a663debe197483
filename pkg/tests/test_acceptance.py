"""One test per acceptance criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import pytest

from scissorsim import verify


CRITERIA = [
    ("scissors truncation", lambda: verify.check_scissors_truncation()),
    ("qudit transfer identity", lambda: verify.check_transfer_identity((1, 2, 3, 4), samples=200)),
    ("efficiency scaling", lambda: verify.check_efficiency_scaling((1, 2, 3))),
    ("false announcement", lambda: verify.check_false_announcement((1, 2, 3))),
    ("fidelity figures", lambda: verify.check_fidelity_figures((1, 2, 3))),
    ("basis-change teleportation", lambda: verify.check_basis_change((1, 2, 3))),
    ("oracle equivalence", lambda: verify.check_oracle_equivalence(100)),
    ("property suites", lambda: verify.check_property_suites(100)),
]


@pytest.mark.parametrize("name, check", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(name, check):
    result = check()
    print(result.line())
    assert result.passed, result.detail


def test_scissors_runtime_budget():
    result = verify.check_scissors_truncation()
    assert result.data["runtime_s"] < 1e-3


def test_transfer_identity_runtime_budget():
    result = verify.check_transfer_identity((1, 2, 3, 4), samples=200)
    assert result.seconds < 10.0


def test_false_announcement_records_dimension_dependence():
    result = verify.check_false_announcement((1, 2, 3))
    ratios = result.data["ratio_at_0.8"]
    assert ratios == pytest.approx({1: 1.0, 2: 0.4, 3: 0.16}, abs=1e-12)
