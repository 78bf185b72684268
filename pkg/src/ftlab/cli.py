"""Command-line entry point: ``ftlab <subcommand> ...``.

Exit codes: 0 success, 1 verification violations, 2 usage or config errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from . import __version__
from .builders import get_circuit
from .circuit import CircuitError, emit, parse
from .codes import CODES, distance, get_code, validate
from .decoder import POLICIES, build_decoder
from .experiments import ConfigError, ExperimentConfig, fidelity_steane, gain, run
from .ftverify import verify_ec_round, verify_prep
from .noise import NoiseModel
from .stats import beta_posterior, ml_linear_fit

RATE_FLAGS = ("p_2q", "p_1q", "p_prep", "p_meas", "p_idle")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunManifest:
    config: dict
    tool_version: str
    seed: int
    wall_clock_seconds: float
    report_path: str | None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read {path}: {e}") from e


# -- subcommands ------------------------------------------------------------


def cmd_validate_code(a) -> int:
    code = get_code(a.code)
    res = validate(code)
    d = distance(code, a.max_weight)
    print(f"{code.name}: [[{code.n},{code.k}]] distance {d}")
    for f in res.failures:
        print(f"  FAIL {f}")
    print("valid" if res.ok else "invalid")
    return 0 if res.ok else 1


def cmd_emit_circuit(a) -> int:
    if a.input:
        text = Path(a.input).read_text()
        circ = parse(text)
    else:
        circ = get_circuit(a.circuit)
    _write(emit(circ), a.out)
    return 0


def cmd_verify_ft(a) -> int:
    circ = parse(Path(a.input).read_text()) if a.input else get_circuit(a.circuit)
    t0 = time.perf_counter()
    if circ.readouts:
        code = get_code(circ.readouts[0].code)
        res = verify_ec_round(circ, build_decoder(code, a.policy), a.order, idle=not a.no_idle)
    else:
        res = verify_prep(circ, a.order, idle=not a.no_idle)
    dt = time.perf_counter() - t0
    print(f"{circ.name}: {res.summary()} ({dt:.2f}s)")
    for v in res.violations[: a.show]:
        faults = ", ".join(f"{f.error.label()}@{f.location}" for f in v.faults) or "none"
        resid = " ".join(p.label() for p in v.residual)
        print(f"  [{v.syndrome_class}] faults: {faults}" + (f"  residual: {resid}" if resid else ""))
    return 0 if res.ok else 1


def cmd_build_decoder(a) -> int:
    dec = build_decoder(get_code(a.code), a.policy)
    _write(dec.to_text(), a.out)
    return 0


def _config_from_args(a) -> ExperimentConfig:
    d: dict = {}
    if a.config:
        d.update(_load_json(a.config))
    if a.noise:
        d.update({k: v for k, v in _load_json(a.noise).items()})
    for key in ("protocol", "mode", "basis", "rounds", "shots", "seed"):
        v = getattr(a, key)
        if v is not None:
            d[key] = v
    for key in RATE_FLAGS:
        v = getattr(a, key)
        if v is not None:
            d[key] = v
    if "protocol" not in d:
        raise ConfigError("--protocol is required (flag or config file)")
    try:
        return ExperimentConfig.from_dict(d)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def cmd_run_experiment(a) -> int:
    cfg = _config_from_args(a)
    t0 = time.perf_counter()
    rep = run(cfg, keep_log=a.format == "csv")
    dt = time.perf_counter() - t0
    text = rep.to_csv() if a.format == "csv" else rep.to_json()
    _write(text, a.out)
    if a.out:
        man = RunManifest(cfg.to_dict(), __version__, cfg.seed, dt, a.out)
        Path(a.out + ".manifest.json").write_text(man.to_json())
    else:
        e = rep.error_rate
        print(f"# error rate {e.render()}", file=sys.stderr)
    return 0


def cmd_fit(a) -> int:
    raw = json.loads(sys.stdin.read()) if a.points in (None, "-") else _load_json(a.points)
    try:
        pts = [(float(p[0]), int(p[1]), int(p[2])) for p in raw]
    except (TypeError, ValueError, IndexError, KeyError) as e:
        raise ConfigError(f"points must be a JSON list of [r, F, N]: {e}") from e
    try:
        fit = ml_linear_fit(pts)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    _write(json.dumps(fit.to_dict(), indent=2, sort_keys=True) + "\n", a.out)
    return 0


def _reproduce(shots: int, seed: int, noise: NoiseModel, log) -> dict:
    results: dict = {}

    def cell(name, **kw):
        cfg = ExperimentConfig(shots=shots, seed=seed, noise=noise, **kw)
        rep = run(cfg)
        results[name] = rep
        log(f"  {name:<28} " + "  ".join(f"{c:>8}" for c in rep.table_row()))
        return rep

    header = "  " + " " * 28 + "  ".join(f"{h:>8}" for h in ("runs", "pre-acc", "post-acc", "corr", "errors", "rate"))
    log("Steane Bell pair")
    log(header)
    phys = cell("steane unencoded", protocol="steane_bell", mode="unencoded")
    qec = cell("steane pre-selection", protocol="steane_bell", mode="qec")
    qed = cell("steane pre+post-selection", protocol="steane_bell", mode="qed")
    log(f"  gain: pre-selection {gain(phys, qec):.3g}, pre+post {gain(phys, qed):.3g}")
    es = {}
    for mode in ("unencoded", "qec", "qed"):
        ey = cell(f"steane {mode} Y", protocol="steane_bell", mode=mode, basis="Y")
        by = results[{"unencoded": "steane unencoded", "qec": "steane pre-selection",
                      "qed": "steane pre+post-selection"}[mode]].by_basis
        rates = [beta_posterior(c.errors, c.post_accepted).median for c in (by["X"], ey.counts, by["Z"])]
        es[mode] = fidelity_steane(*rates)
        log(f"  E_s ({mode}): {100 * es[mode]:.3g}%")

    log("Carbon Bell pairs")
    log(header)
    phys = cell("carbon unencoded", protocol="carbon_bell", mode="unencoded")
    qec = cell("carbon correction", protocol="carbon_bell", mode="qec")
    qed = cell("carbon correction+rejection", protocol="carbon_bell", mode="qed")
    log(f"  gain: correction {gain(phys, qec):.3g}, correction+rejection {gain(phys, qed):.3g}")

    log("Repeated EC (Carbon)")
    log(header)
    for r in (1, 2, 3):
        tel = cell(f"r={r} baseline teleports", protocol="baseline_teleport", mode="unencoded", rounds=r)
        cn = cell(f"r={r} baseline CNOTs", protocol="baseline_cnot", mode="unencoded", rounds=r)
        enc = cell(f"r={r} encoded pre+post", protocol="repeated_ec", mode="qed", rounds=r)
        log(f"  gain: {gain(cn, enc):.3g}--{gain(tel, enc):.3g}")
    for name in ("baseline teleports", "baseline CNOTs", "encoded pre+post"):
        pts = [(r, results[f"r={r} {name}"].errors, results[f"r={r} {name}"].post_accepted) for r in (1, 2, 3)]
        if any(F == 0 for _, F, _ in pts):
            # a Jeffreys density with F = 0 peaks at p = 0, so the likelihood has no interior maximum
            log(f"  fit {name}: skipped, a round count has zero errors")
            continue
        f = ml_linear_fit(pts)
        log(f"  fit {name}: slope {100 * f.slope:.3g}% +- {100 * f.slope_uncertainty:.2g}%, "
            f"intercept {100 * f.intercept:.3g}% +- {100 * f.intercept_uncertainty:.2g}%")
    return {"cells": {k: v.to_dict() for k, v in results.items()}, "E_s": es}


def cmd_reproduce_tables(a) -> int:
    shots = a.shots if a.shots is not None else (10_000 if a.fast else 100_000)
    if shots < 1:
        raise ConfigError("shots must be >= 1")
    noise = NoiseModel.from_dict(_load_json(a.noise)) if a.noise else NoiseModel()
    out = _reproduce(shots, a.seed or 0, noise, print)
    if a.out:
        Path(a.out).write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ftlab", description="Stabilizer simulation and fault-tolerance checks for small CSS codes.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate-code", help="check a code's stabilizers and logicals, report its distance")
    s.add_argument("--code", required=True, choices=sorted(CODES))
    s.add_argument("--max-weight", type=int, default=3, help="distance search bound (default 3)")
    s.set_defaults(func=cmd_validate_code)

    s = sub.add_parser("emit-circuit", help="print a builder circuit (or re-emit a parsed file) in text form")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--circuit", help="builder name, e.g. carbon_prep_00 or repeated_ec_r2_Z")
    g.add_argument("--input", help="circuit text file to parse and re-emit")
    s.add_argument("--out")
    s.set_defaults(func=cmd_emit_circuit)

    s = sub.add_parser("verify-ft", help="exhaustive single/double fault scan")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--circuit")
    g.add_argument("--input", help="circuit text file")
    s.add_argument("--order", type=int, choices=(1, 2), default=1)
    s.add_argument("--policy", choices=POLICIES, default="restricted", help="decoder for circuits with readouts")
    s.add_argument("--no-idle", action="store_true", help="ignore TICK idle faults")
    s.add_argument("--show", type=int, default=5, help="violations to print")
    s.set_defaults(func=cmd_verify_ft)

    s = sub.add_parser("build-decoder", help="print a lookup table, one syndrome per line")
    s.add_argument("--code", required=True, choices=sorted(CODES))
    s.add_argument("--policy", required=True, choices=POLICIES)
    s.add_argument("--out")
    s.set_defaults(func=cmd_build_decoder)

    s = sub.add_parser("run-experiment", help="Monte Carlo run of one protocol; flags override --config")
    s.add_argument("--config", help="flat JSON config (protocol, mode, basis, rounds, shots, seed, p_*)")
    s.add_argument("--protocol")
    s.add_argument("--mode")
    s.add_argument("--basis")
    s.add_argument("--rounds", type=int)
    s.add_argument("--shots", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--noise", help="flat JSON of noise rates")
    for k in RATE_FLAGS:
        s.add_argument("--" + k.replace("_", "-"), dest=k, type=float)
    s.add_argument("--out", help="report path; a manifest is written next to it")
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.set_defaults(func=cmd_run_experiment)

    s = sub.add_parser("fit", help="maximum-likelihood line through [r, F, N] points (JSON file or stdin)")
    s.add_argument("points", nargs="?", help="JSON file; '-' or omitted reads stdin")
    s.add_argument("--out")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("reproduce-tables", help="run every table cell and print the summary")
    s.add_argument("--fast", action="store_true", help="1e4 shots per cell instead of 1e5")
    s.add_argument("--shots", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise")
    s.add_argument("--out", help="JSON path for all cells")
    s.set_defaults(func=cmd_reproduce_tables)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        return a.func(a)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 2
    except (ConfigError, CircuitError, ValueError) as e:
        print(f"ftlab: error: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)


if __name__ == "__main__":
    sys.exit(main())
