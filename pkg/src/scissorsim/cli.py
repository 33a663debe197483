"""Command-line front end: ``scissorsim <command> [options]``.

Commands: scissors, teleport, teleport-basis, sweep-eta, verify. Results go to
stdout or ``--out FILE`` as JSON (default), CSV, or an aligned text table.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import re
import sys
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import numpy as np

from .errors import ScissorsimError
from .fock import QuditVector
from .protocols import (
    mix,
    run_scissors,
    teleport_pattern_distribution,
    teleport_qudit,
    teleport_qudit_to_basis,
)
from .serialize import encode_complex, encode_float, encode_scissors, encode_teleport
from .verify import hadamard_target_species, run_all

log = logging.getLogger("scissorsim")

NORM_WARN = 1e-6
NORM_FAIL = 1e-2
SWEEP_HEADER = ("eta", "success", "paper_fidelity", "conditional_fidelity", "false_announcement")

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"^\s*(?:(?P<re>[+-]?{_NUM})(?:(?P<im>[+-](?:{_NUM})?)i)?|(?P<pure>[+-]?(?:{_NUM})?)i)\s*$"
)


class UsageError(Exception):
    pass


def parse_complex(token: str) -> complex:
    """``"0.5"`` or ``"0.5-0.25i"`` to a complex number."""
    m = _COMPLEX_RE.match(token)
    if not m:
        raise UsageError(f"malformed complex amplitude {token!r} (expected re or re+imi)")
    if m.group("re") is None:
        pure = m.group("pure")
        return complex(0.0, float(pure + "1" if pure in ("", "+", "-") else pure))
    im = m.group("im")
    if im in ("+", "-"):
        im += "1"
    return complex(float(m.group("re")), float(im) if im else 0.0)


def parse_amplitudes(text: str) -> list[complex]:
    tokens = [t for t in text.split(",")]
    if not text.strip() or any(not t.strip() for t in tokens):
        raise UsageError(f"malformed amplitude list {text!r}")
    return [parse_complex(t) for t in tokens]


def normalized(amps: Sequence[complex], what: str) -> list[complex]:
    """Rescale to unit norm, warning above 1e-6 deviation and refusing above 1e-2."""
    norm = math.sqrt(math.fsum(abs(a) ** 2 for a in amps))
    dev = abs(norm - 1.0)
    if dev > NORM_FAIL:
        raise UsageError(f"{what} have norm {norm:.6g}; deviation from 1 exceeds {NORM_FAIL}")
    if dev > NORM_WARN:
        log.warning("%s have norm %.9g; renormalizing", what, norm)
    return [a / norm for a in amps]


def resolve_gammas(text: str, d: int | None) -> QuditVector:
    if text.startswith("random:"):
        try:
            seed = int(text.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad random seed in {text!r}") from None
        if d is None:
            raise UsageError("--gammas random:SEED needs -d")
        if d < 1:
            raise UsageError("d must be at least 1")
        return QuditVector.haar_random(d, np.random.default_rng(seed))
    amps = normalized(parse_amplitudes(text), "gammas")
    if d is not None and d != len(amps):
        raise UsageError(f"-d {d} does not match {len(amps)} gamma amplitudes")
    return QuditVector(tuple(amps))


# --------------------------------------------------------------------------
# output


def _json_ready(obj: Any) -> Any:
    if isinstance(obj, float):
        return encode_float(obj)
    if isinstance(obj, complex):
        return encode_complex(obj)
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    return obj


def to_json(config: dict, report: Any) -> str:
    doc = {"config": _json_ready(config), "report": _json_ready(report)}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def to_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return "" if v is None else str(v)


def to_table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    cells = [list(header)] + [[_cell(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _pattern_key(p: Sequence[int]) -> str:
    return "pattern:" + "-".join(str(k) for k in p)


def _quantities(report: dict) -> list[tuple[str, Any]]:
    """Flatten the scalar part of a report into (name, value) pairs."""
    rows: list[tuple[str, Any]] = []
    for key, val in report.items():
        if key in ("branches", "target", "detector_names", "output_modes", "samples"):
            continue
        if key == "per_pattern":
            rows += [(_pattern_key(e["pattern"]), e["probability"]) for e in val]
        elif isinstance(val, list):
            for i, v in enumerate(val):
                if isinstance(v, list):
                    rows += [(f"{key}[{i}].re", v[0]), (f"{key}[{i}].im", v[1])]
                else:
                    rows.append((f"{key}[{i}]", v))
        else:
            rows.append((key, val))
    samples = report.get("samples")
    if samples:
        rows.append(("samples.n", samples["n"]))
        rows.append(("samples.announced_fraction", samples["announced_fraction"]))
        rows += [(f"samples.{_pattern_key(e['pattern'])}", e["count"]) for e in samples["counts"]]
    return rows


def render(fmt: str, config: dict, report: dict) -> str:
    if fmt == "json":
        return to_json(config, report)
    rows = _quantities(report)
    if fmt == "csv":
        return to_csv(("quantity", "value"), rows)
    return to_table(("quantity", "value"), rows)


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands


def _check_eta(eta: float) -> float:
    if not 0.0 <= eta <= 1.0:
        raise UsageError(f"--eta {eta} outside [0, 1]")
    return eta


def _teleport_report(rep, args, qudit: QuditVector, target_species=None) -> dict:
    exact = [b for b in rep.output.branches if b.exact]
    gammas = mix(exact[0].state, rep.output_modes).gammas if exact else None
    report = encode_teleport(rep, gammas)
    if args.samples:
        dist = teleport_pattern_distribution(qudit, rep.eta, target_species)
        patterns = list(dist)
        probs = np.array([dist[p] for p in patterns])
        rng = np.random.default_rng(args.seed)
        draws = rng.choice(len(patterns), size=args.samples, p=probs / probs.sum())
        counts = np.bincount(draws, minlength=len(patterns))
        accepted = sum(int(c) for p, c in zip(patterns, counts) if _accepted(p))
        report["samples"] = {
            "n": args.samples,
            "seed": args.seed,
            "announced_fraction": accepted / args.samples,
            "counts": [{"pattern": list(p), "count": int(c)} for p, c in zip(patterns, counts) if c],
        }
    return report


def _accepted(pattern: Sequence[int]) -> bool:
    return all(pattern[k] + pattern[k + 1] == 1 for k in range(0, len(pattern), 2))


def _base_config(args) -> dict:
    return {"command": args.command, "format": args.format, "seed": args.seed}


def cmd_scissors(args) -> int:
    alphas = normalized(parse_amplitudes(args.alphas), "alphas")
    eta = _check_eta(args.eta)
    rep = run_scissors(alphas, eta)
    config = _base_config(args) | {"alphas": alphas, "eta": eta}
    emit(render(args.format, config, encode_scissors(rep)), args.out)
    return 0


def cmd_teleport(args) -> int:
    qudit = resolve_gammas(args.gammas, args.d)
    eta = _check_eta(args.eta)
    rep = teleport_qudit(qudit, qudit.d, eta)
    config = _base_config(args) | {
        "d": qudit.d, "gammas": list(qudit.gammas), "gammas_input": args.gammas,
        "eta": eta, "samples": args.samples,
    }
    emit(render(args.format, config, _teleport_report(rep, args, qudit)), args.out)
    return 0


def cmd_teleport_basis(args) -> int:
    qudit = resolve_gammas(args.gammas, args.d)
    eta = _check_eta(args.eta)
    species = tuple(args.target_species) if args.target_species else hadamard_target_species(qudit.d)
    if len(species) != qudit.d:
        raise UsageError(f"need {qudit.d} target species, got {len(species)}")
    rep = teleport_qudit_to_basis(qudit, qudit.d, eta, species)
    config = _base_config(args) | {
        "d": qudit.d, "gammas": list(qudit.gammas), "gammas_input": args.gammas,
        "eta": eta, "target_species": list(species), "samples": args.samples,
    }
    emit(render(args.format, config, _teleport_report(rep, args, qudit, species)), args.out)
    return 0


def eta_grid(lo: float, hi: float, steps: int) -> list[float]:
    if steps < 1:
        raise UsageError("--eta-range needs at least one step")
    if steps == 1:
        if lo != hi:
            raise UsageError("a single-step range needs FROM == TO")
        return [_check_eta(lo)]
    for x in (lo, hi):
        _check_eta(x)
    if hi < lo:
        raise UsageError("--eta-range needs FROM <= TO")
    return [round(lo + (hi - lo) * k / (steps - 1), 12) for k in range(steps)]


def thread_count(n_tasks: int) -> int:
    env = os.environ.get("SCISSORSIM_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            log.warning("ignoring SCISSORSIM_THREADS=%r", env)
    return max(1, min(cap, n_tasks))


def sweep_rows(qudit: QuditVector, etas: Sequence[float]) -> list[tuple[float, ...]]:
    def point(eta: float) -> tuple[float, ...]:
        rep = teleport_qudit(qudit, qudit.d, eta)
        return (eta, rep.success_probability, rep.paper_fidelity,
                rep.conditional_fidelity, rep.false_announcement_probability)

    with ThreadPoolExecutor(max_workers=thread_count(len(etas))) as pool:
        # map() yields in submission order, so rows follow the grid
        return list(pool.map(point, etas))


def cmd_sweep_eta(args) -> int:
    lo, hi, steps = args.eta_range
    etas = eta_grid(float(lo), float(hi), int(steps))
    gammas = args.gammas if args.gammas is not None else f"random:{args.seed}"
    qudit = resolve_gammas(gammas, args.d)
    rows = sweep_rows(qudit, etas)
    fmt = args.format
    if fmt == "json":
        config = _base_config(args) | {
            "d": qudit.d, "gammas": list(qudit.gammas), "gammas_input": gammas,
            "eta_range": [float(lo), float(hi), int(steps)],
        }
        report = {"rows": [dict(zip(SWEEP_HEADER, r)) for r in rows]}
        text = to_json(config, report)
    elif fmt == "csv":
        text = to_csv(SWEEP_HEADER, rows)
    else:
        text = to_table(SWEEP_HEADER, rows)
    emit(text, args.out)
    return 0


def cmd_verify(args) -> int:
    results = run_all(d_max=args.d_max, seed=args.seed, inject_bs_sign_error=args.inject_bs_sign_error)
    header = ("check", "result", "seconds", "detail")
    rows = [(r.name, "PASS" if r.passed else "FAIL", round(r.seconds, 3), r.detail) for r in results]
    if args.format == "json":
        config = _base_config(args) | {"d_max": args.d_max, "inject_bs_sign_error": args.inject_bs_sign_error}
        report = {"all_passed": all(r.passed for r in results),
                  "checks": [dict(zip(header, row)) for row in rows]}
        text = to_json(config, report)
    elif args.format == "csv":
        text = to_csv(header, rows)
    else:
        text = to_table(header, rows)
        n_ok = sum(r.passed for r in results)
        text += f"\n{n_ok}/{len(results)} checks passed, {sum(r.seconds for r in results):.2f} s\n"
    emit(text, args.out)
    return 0 if all(r.passed for r in results) else 1


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "table"), default=None,
                        help="output format (default: json; csv for sweep-eta; table for verify)")
    common.add_argument("--out", metavar="FILE", help="write output to FILE instead of stdout")
    common.add_argument("--seed", type=int, default=None,
                        help="seed for sampling and random defaults")

    parser = argparse.ArgumentParser(prog="scissorsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scissors", parents=[common], help="single quantum-scissors device")
    p.add_argument("--alphas", required=True, help='input amplitudes, e.g. "0.7071,0.5477,0.4472"')
    p.add_argument("--eta", type=float, default=1.0, help="detector efficiency")
    p.set_defaults(func=cmd_scissors, default_format="json")

    for name, func, helptext in (
        ("teleport", cmd_teleport, "qudit teleportation with d scissors devices"),
        ("teleport-basis", cmd_teleport_basis, "teleportation onto other transverse species"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("-d", type=int, default=None, help="qudit dimension")
        p.add_argument("--gammas", required=True, help='amplitudes "g0,g1,..." or "random:SEED"')
        p.add_argument("--eta", type=float, default=1.0)
        p.add_argument("--samples", type=int, default=0,
                       help="also draw this many click patterns (seeded by --seed)")
        if name == "teleport-basis":
            p.add_argument("--target-species", nargs="+", metavar="SPECIES",
                           help="output species, one per dimension (default HG:l,0)")
        p.set_defaults(func=func, default_format="json")

    p = sub.add_parser("sweep-eta", parents=[common], help="tabulate results over an efficiency grid")
    p.add_argument("-d", type=int, default=None)
    p.add_argument("--gammas", default=None, help="default: random:SEED with --seed")
    p.add_argument("--eta-range", nargs=3, metavar=("FROM", "TO", "STEPS"), default=("0.1", "1.0", "10"))
    p.set_defaults(func=cmd_sweep_eta, default_format="csv")

    p = sub.add_parser("verify", parents=[common], help="run all acceptance checks")
    p.add_argument("--d-max", type=int, default=4, help="largest d for the transfer-identity check")
    p.add_argument("--inject-bs-sign-error", action="store_true",
                   help="debug: drop the minus sign of the second beam splitter")
    p.set_defaults(func=cmd_verify, default_format="table")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(format="%(name)s: %(levelname)s: %(message)s", level=logging.WARNING)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    if args.seed is None:
        args.seed = 2024 if args.command == "verify" else 0
    try:
        if args.command == "sweep-eta":
            try:
                float(args.eta_range[0]), float(args.eta_range[1]), int(args.eta_range[2])
            except ValueError:
                raise UsageError(f"bad --eta-range {args.eta_range}") from None
        if args.command == "verify" and args.d_max < 1:
            raise UsageError("--d-max must be at least 1")
        if getattr(args, "samples", 0) < 0:
            raise UsageError("--samples must be non-negative")
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except ScissorsimError as exc:
        print(f"scissorsim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
