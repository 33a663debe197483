import csv
import io
import json
import math
import time

import pytest

from scissorsim import QuditVector, teleport_qudit
from scissorsim.cli import (
    SWEEP_HEADER,
    UsageError,
    eta_grid,
    main,
    normalized,
    parse_amplitudes,
    parse_complex,
    thread_count,
)
from scissorsim.serialize import decode_complex, decode_float, decode_state, encode_state


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    return json.loads(out)["report"]


@pytest.mark.parametrize("token, value", [
    ("1", 1), ("-0.5", -0.5), ("0.5+0.25i", 0.5 + 0.25j), ("0.5-i", 0.5 - 1j),
    ("0.8i", 0.8j), ("1e-3", 0.001), (" 2 ", 2),
])
def test_parse_complex(token, value):
    assert parse_complex(token) == value


@pytest.mark.parametrize("token", ["", "x", "1j", "1+", "1+2", "i1", "1,2"])
def test_parse_complex_rejects(token):
    with pytest.raises(UsageError):
        parse_complex(token)


def test_parse_amplitudes_rejects_empty_entries():
    with pytest.raises(UsageError):
        parse_amplitudes("1,,0")


def test_normalization_tolerances(caplog):
    assert normalized([1.0], "x") == [1.0]
    out = normalized([0.7071, 0.7071], "x")
    assert math.fsum(abs(a) ** 2 for a in out) == pytest.approx(1.0, abs=1e-15)
    assert "renormalizing" in caplog.text
    with pytest.raises(UsageError):
        normalized([0.5, 0.5], "x")


def test_scissors_equal_superposition(capsys):
    rep = report(capsys, "scissors", "--alphas", "0.7071,0.7071", "--eta", "1")
    assert rep["success_probability"] == pytest.approx(0.5, abs=1e-12)
    assert [decode_complex(a) for a in rep["output_amplitudes"]] == pytest.approx([1 / math.sqrt(2)] * 2)


def test_scissors_vacuum(capsys):
    rep = report(capsys, "scissors", "--alphas", "1")
    assert rep["success_probability"] == pytest.approx(0.5)
    assert [decode_complex(a) for a in rep["output_amplitudes"]] == pytest.approx([1, 0])


def test_scissors_three_components(capsys):
    rep = report(capsys, "scissors", "--alphas", "0.7071,0.5477,0.4472")
    # the typed amplitudes are rounded; renormalization leaves a 1e-6 offset
    assert rep["success_probability"] == pytest.approx(0.4, abs=1e-5)


@pytest.mark.parametrize("alphas", ["1,abc", "", "0.5,0.5"])
def test_scissors_bad_input_is_usage_error(capsys, alphas):
    with pytest.raises(SystemExit) as exc:
        main(["scissors", "--alphas", alphas])
    assert exc.value.code == 2


def test_teleport_random_d3(capsys):
    rep = report(capsys, "teleport", "-d", "3", "--gammas", "random:42", "--eta", "1")
    assert rep["success_probability"] == pytest.approx(0.125, abs=1e-12)


def test_teleport_lossy_d2(capsys):
    rep = report(capsys, "teleport", "-d", "2", "--gammas", "1,0", "--eta", "0.5")
    assert rep["success_probability"] == pytest.approx(0.0625, abs=1e-12)


def test_teleport_closed_form_fidelity(capsys):
    rep = report(capsys, "teleport", "-d", "1", "--gammas", "1", "--eta", "0.9")
    assert rep["paper_fidelity"] == pytest.approx(0.91, abs=1e-12)


def test_teleport_output_gammas_match_input(capsys):
    rep = report(capsys, "teleport", "--gammas", "0.6,0.8i")
    out = [decode_complex(g) for g in rep["output_gammas"]]
    assert QuditVector((0.6, 0.8j)).distance_up_to_phase(out) < 1e-12


@pytest.mark.parametrize("argv", [
    ["teleport", "-d", "3", "--gammas", "1,0"],
    ["teleport", "--gammas", "random:1"],
    ["teleport", "--gammas", "random:x", "-d", "2"],
    ["teleport", "--gammas", "1", "--eta", "1.5"],
    ["teleport-basis", "--gammas", "1,0", "--target-species", "HG:0,0"],
    ["sweep-eta", "-d", "1", "--eta-range", "0.5", "0.2", "3"],
    ["sweep-eta", "-d", "1", "--eta-range", "0", "1", "1"],
    ["verify", "--d-max", "0"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_teleport_basis_default_species(capsys):
    rep = report(capsys, "teleport-basis", "-d", "2", "--gammas", "random:5")
    assert rep["output_modes"] == ["out/HG:0,0", "out/HG:1,0"]
    assert rep["conditional_fidelity"] == pytest.approx(1.0, abs=1e-10)


def test_teleport_basis_explicit_species(capsys):
    rep = report(capsys, "teleport-basis", "--gammas", "1", "--target-species", "HG:0,1")
    assert rep["output_modes"] == ["out/HG:0,1"]
    assert rep["success_probability"] == pytest.approx(0.5)


def test_sampling_is_seeded(capsys):
    argv = ["teleport", "-d", "2", "--gammas", "random:3", "--eta", "0.8", "--samples", "500", "--seed", "9"]
    a = report(capsys, *argv)["samples"]
    b = report(capsys, *argv)["samples"]
    assert a == b
    assert sum(c["count"] for c in a["counts"]) == 500
    exact = teleport_qudit(QuditVector.haar_random(2, __import__("numpy").random.default_rng(3)), 2, 0.8)
    assert a["announced_fraction"] == pytest.approx(exact.announcement_probability, abs=0.06)


@pytest.mark.parametrize("argv", [
    ["teleport", "-d", "3", "--gammas", "random:42", "--eta", "0.7", "--format", "json"],
    ["teleport", "-d", "2", "--gammas", "random:4", "--format", "csv", "--samples", "50"],
    ["scissors", "--alphas", "0.6,0.8", "--format", "table"],
    ["sweep-eta", "-d", "2", "--eta-range", "0.1", "1", "10"],
])
def test_output_is_deterministic(capsys, argv):
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_json_round_trip_is_exact(capsys):
    rep = report(capsys, "teleport", "-d", "2", "--gammas", "random:8", "--eta", "0.6")
    q = QuditVector.haar_random(2, __import__("numpy").random.default_rng(8))
    mem = teleport_qudit(q, 2, 0.6)
    assert rep["success_probability"] == mem.success_probability
    assert rep["false_announcement_probability"] == mem.false_announcement_probability
    assert decode_float(rep["conditional_fidelity"]) == mem.conditional_fidelity
    assert decode_state(rep["target"]).amplitudes == mem.target.amplitudes
    for enc, br in zip(rep["branches"], mem.output.branches):
        assert enc["probability"] == br.probability
        assert tuple(enc["pattern"]) == br.pattern
        assert decode_state(enc["state"]).amplitudes == br.state.amplitudes


def test_encode_state_round_trip():
    mem = teleport_qudit(QuditVector((0.6, 0.8j)), 2, 1.0).target
    assert decode_state(json.loads(json.dumps(encode_state(mem)))).amplitudes == mem.amplitudes


def test_nan_serializes_as_null(capsys):
    rep = report(capsys, "teleport", "--gammas", "1", "--eta", "0")
    assert rep["conditional_fidelity"] is None


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep-eta", "-d", "2", "--eta-range", "0.2", "1", "5")
    assert code == 0
    assert "\r" not in out
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == SWEEP_HEADER
    etas = [float(r[0]) for r in rows[1:]]
    assert etas == [0.2, 0.4, 0.6, 0.8, 1.0]
    succ = [float(r[1]) for r in rows[1:]]
    assert succ == sorted(succ)
    assert succ[3] == pytest.approx(0.16, abs=1e-12)


def test_sweep_single_point_matches_teleport(capsys):
    _, out, _ = run(capsys, "sweep-eta", "-d", "1", "--eta-range", "1", "1", "1")
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) == 2
    eta, success, pf, cf, fa = map(float, rows[1])
    assert (eta, success, pf, cf, fa) == (1.0, 0.5, 1.0, 1.0, 0.0)
    rep = report(capsys, "teleport", "-d", "1", "--gammas", "random:0", "--eta", "1")
    assert rep["success_probability"] == success


def test_sweep_rows_ordered_with_threads(capsys, monkeypatch):
    monkeypatch.setenv("SCISSORSIM_THREADS", "4")
    _, threaded, _ = run(capsys, "sweep-eta", "-d", "3", "--eta-range", "0", "1", "11")
    monkeypatch.setenv("SCISSORSIM_THREADS", "1")
    _, serial, _ = run(capsys, "sweep-eta", "-d", "3", "--eta-range", "0", "1", "11")
    assert threaded == serial


def test_thread_count(monkeypatch):
    monkeypatch.setenv("SCISSORSIM_THREADS", "3")
    assert thread_count(10) == 3
    assert thread_count(2) == 2
    monkeypatch.setenv("SCISSORSIM_THREADS", "nope")
    assert thread_count(1) == 1


def test_eta_grid_endpoints():
    assert eta_grid(0.1, 1.0, 10) == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    assert eta_grid(0.5, 0.5, 1) == [0.5]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep-eta", "-d", "1", "--eta-range", "0.5", "1", "2", "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_bytes().startswith(b"eta,success,")
    assert b"\r\n" not in target.read_bytes()


def test_verify_passes_within_a_minute(capsys):
    t0 = time.perf_counter()
    code, out, _ = run(capsys, "verify", "--d-max", "4")
    elapsed = time.perf_counter() - t0
    print(f"verify --d-max 4 took {elapsed:.2f} s")
    assert code == 0, out
    assert "8/8 checks passed" in out
    assert elapsed < 60


def test_verify_catches_wrong_sign(capsys):
    code, out, _ = run(capsys, "verify", "--d-max", "2", "--inject-bs-sign-error", "--format", "csv")
    assert code == 1
    rows = {r[0]: r[1] for r in csv.reader(io.StringIO(out))}
    assert rows["2 qudit transfer identity"] == "FAIL"


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "scissorsim", "scissors", "--alphas", "0,1", "--format", "csv"],
                         capture_output=True, text=True, check=True)
    assert "success_probability,0.5" in res.stdout
