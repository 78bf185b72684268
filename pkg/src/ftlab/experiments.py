"""Monte Carlo protocol harnesses: Bell pairs, repeated EC and unencoded baselines.

Each shot draws its faults from its own generator ``default_rng([seed, shot])``,
so a report does not depend on batching.  Outcomes are evaluated with the
linear fault model of the protocol circuit: the fault features of a shot are
the XOR of its fault events' rows, and the decoded outputs follow from the
destructive-readout tables of the selected decoder policy.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import builders
from .circuit import Circuit
from .codes import get_code
from .decoder import build_decoder, destructive_table
from .faultmodel import FaultModel, fault_model
from .noise import NoiseModel
from .stats import PosteriorEstimate, beta_posterior, ml_linear_fit

PROTOCOLS = ("steane_bell", "carbon_bell", "repeated_ec", "baseline_teleport", "baseline_cnot")
MODES = ("unencoded", "qec", "qed")
BASES = ("X", "Y", "Z", "mixed")
_BASELINES = ("baseline_teleport", "baseline_cnot")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    protocol: str
    mode: str = "qed"
    basis: str = "mixed"
    rounds: int | None = None
    shots: int = 1000
    noise: NoiseModel = field(default_factory=NoiseModel)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}; choose from {PROTOCOLS}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.basis not in BASES:
            raise ConfigError(f"unknown basis {self.basis!r}; choose from {BASES}")
        if self.basis == "Y" and self.protocol != "steane_bell":
            raise ConfigError("the Y basis is only available for steane_bell")
        has_rounds = self.protocol in ("repeated_ec",) + _BASELINES
        if has_rounds:
            if self.rounds is None or int(self.rounds) < 1:
                raise ConfigError(f"{self.protocol} needs rounds >= 1")
        elif self.rounds is not None:
            raise ConfigError(f"rounds do not apply to {self.protocol}")
        if self.protocol in _BASELINES and self.mode != "unencoded":
            raise ConfigError(f"{self.protocol} is unencoded; use mode 'unencoded'")
        if self.protocol == "repeated_ec" and self.mode == "unencoded":
            raise ConfigError("the unencoded analog of repeated_ec is baseline_cnot or baseline_teleport")
        if int(self.shots) < 1:
            raise ConfigError("shots must be >= 1")
        if int(self.seed) < 0:
            raise ConfigError("seed must be non-negative")

    @property
    def bases(self) -> tuple[str, ...]:
        return ("X", "Z") if self.basis == "mixed" else (self.basis,)

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "noise"}
        d.update(self.noise.to_dict())
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        rates = {k: d.pop(k) for k in list(d) if k.startswith("p_")}
        unknown = set(d) - {"protocol", "mode", "basis", "rounds", "shots", "seed"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(noise=NoiseModel(**rates), **d)
        except TypeError as e:
            raise ConfigError(str(e)) from e


@dataclass
class Counts:
    runs: int = 0
    pre_accepted: int = 0
    post_accepted: int = 0
    corrections: int = 0
    errors: int = 0

    def add(self, other: "Counts") -> None:
        for k in asdict(self):
            setattr(self, k, getattr(self, k) + getattr(other, k))

    def error_rate(self) -> PosteriorEstimate:
        return beta_posterior(self.errors, self.post_accepted)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["error_rate"] = _estimate_dict(self.error_rate())
        return d


def _estimate_dict(e: PosteriorEstimate) -> dict:
    return {"median": e.median, "lo": e.lo, "hi": e.hi}


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    counts: Counts
    by_basis: dict[str, Counts]
    shot_log: list[tuple[int, str, bool, bool, bool, bool]] = field(default_factory=list, repr=False)

    @property
    def runs(self) -> int:
        return self.counts.runs

    @property
    def pre_accepted(self) -> int:
        return self.counts.pre_accepted

    @property
    def post_accepted(self) -> int:
        return self.counts.post_accepted

    @property
    def corrections(self) -> int:
        return self.counts.corrections

    @property
    def errors(self) -> int:
        return self.counts.errors

    @property
    def error_rate(self) -> PosteriorEstimate:
        return self.counts.error_rate()

    @property
    def pre_rejection_rate(self) -> float:
        return 1.0 - self.pre_accepted / self.runs

    @property
    def post_rejection_rate(self) -> float:
        """Fraction of pre-accepted shots rejected by the decoder."""
        return 1.0 - self.post_accepted / self.pre_accepted if self.pre_accepted else 0.0

    def to_dict(self) -> dict:
        d = {"config": self.config.to_dict()}
        d.update(self.counts.to_dict())
        d["basis"] = {b: c.to_dict() for b, c in self.by_basis.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["shot", "basis", "accepted_pre", "accepted_post", "corrected", "error"])
        for shot, basis, pre, post, corr, err in self.shot_log:
            w.writerow([shot, basis, int(pre), int(post), int(corr), int(err)])
        return buf.getvalue()

    def table_row(self) -> list[str]:
        """Columns runs, pre-accepted, post-accepted, corrections, errors, rate (dash = not applicable)."""
        c, m = self.counts, self.config.mode
        dash = "—"
        cells = [str(c.runs)]
        cells.append(dash if m == "unencoded" else str(c.pre_accepted))
        cells.append(str(c.post_accepted) if m == "qed" else dash)
        cells.append(dash if m == "unencoded" else str(c.corrections))
        cells.append(str(c.errors))
        cells.append(self.error_rate.render())
        return cells


# -- protocol circuits ----------------------------------------------------


def protocol_circuit(cfg: ExperimentConfig, basis: str) -> Circuit:
    p, m = cfg.protocol, cfg.mode
    if p == "steane_bell":
        return builders.physical_bell(basis, 1) if m == "unencoded" else builders.steane_bell(basis)
    if p == "carbon_bell":
        return builders.physical_bell(basis, 2) if m == "unencoded" else builders.carbon_bell(basis)
    if p == "repeated_ec":
        return builders.repeated_ec(int(cfg.rounds), basis)
    kind = "two_teleports" if p == "baseline_teleport" else "two_cnots"
    return builders.physical_baseline(kind, int(cfg.rounds), basis)


def mode_policy(code_name: str, mode: str) -> str:
    """Decoder policy per mode; odd-distance Steane detects rather than restricts."""
    if mode == "qec":
        return "naive"
    if mode == "qed":
        return "detect" if code_name == "steane" else "restricted"
    raise ConfigError(f"mode {mode!r} has no decoder")


def readout_tables(fm: FaultModel, mode: str) -> dict:
    out = {}
    for label, rs in fm.readouts.items():
        code = get_code(rs.code)
        out[label] = destructive_table(build_decoder(code, mode_policy(rs.code, mode)), rs.basis)
    return out


def classify_shot(protocol: str, basis: str, bits: Sequence[int], reference: Sequence[int] | None = None) -> bool:
    """True on success.

    Bell protocols: every pair parity is even, except in the Y basis where
    the Bell state has <YY> = -1 and odd parity is correct.  EC and baseline
    protocols: the frame-corrected outputs equal the noiseless ``reference``.
    """
    if protocol in ("steane_bell", "carbon_bell"):
        want = 1 if basis == "Y" else 0
        return all(int(b) == want for b in bits)
    if reference is None:
        raise ValueError(f"{protocol} needs the noiseless reference outputs")
    return tuple(int(b) for b in bits) == tuple(int(b) for b in reference)


class _Sampler:
    """Per-shot fault sampling against one circuit's fault model."""

    def __init__(self, circuit: Circuit, noise: NoiseModel):
        self.fm = fault_model(circuit, True)
        locs = self.fm.locations
        rates = locs.rates(noise)
        self.alpha = np.array([len(loc.alphabet) for loc in locs], dtype=np.int64)
        self.offset = np.asarray(self.fm.event_offset[:-1], dtype=np.int64)
        idx = np.array([loc.index for loc in locs], dtype=np.int64)
        in_region = np.zeros(len(locs), dtype=bool)
        self.regions = []
        for rt in circuit.retries:
            sel = (idx >= rt.start) & (idx < rt.stop)
            in_region |= sel
            pre_cols = self._region_pre_cols(circuit, rt)
            self.regions.append((np.flatnonzero(sel), rates[sel], pre_cols, rt.attempts))
        self.rest = np.flatnonzero(~in_region)
        self.rest_rates = rates[~in_region]

    def _region_pre_cols(self, circuit: Circuit, rt) -> np.ndarray:
        cb = set()
        for ins in circuit.instructions[rt.start : rt.stop]:
            if ins.is_measurement and circuit.role(ins.cbit) == "pre-select":
                cb.add(ins.cbit)
        cols = [self.fm.pre.start + j for j, c in enumerate(self.fm.pre_bits) if c in cb]
        return np.array(cols, dtype=np.int64)

    def _draw(self, rng: np.random.Generator, locs: np.ndarray, rates: np.ndarray) -> np.ndarray:
        hit = locs[rng.random(len(locs)) < rates]
        if not len(hit):
            return hit
        return self.offset[hit] + rng.integers(0, self.alpha[hit])

    def shot(self, seed: int, shot: int) -> np.ndarray:
        rng = np.random.default_rng([seed, shot])
        ev = self.fm.events
        parts = []
        for locs, rates, pre_cols, attempts in self.regions:
            for _ in range(attempts):
                ids = self._draw(rng, locs, rates)
                if not len(ids) or not np.bitwise_xor.reduce(ev[np.ix_(ids, pre_cols)], axis=0).any():
                    break
            parts.append(ids)
        parts.append(self._draw(rng, self.rest, self.rest_rates))
        ids = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
        if not len(ids):
            return np.zeros(self.fm.n_feat, dtype=bool)
        return np.bitwise_xor.reduce(ev[ids], axis=0)


def run(cfg: ExperimentConfig, *, keep_log: bool = False, batch: int = 4096) -> ExperimentReport:
    """Simulate ``cfg.shots`` shots; shot ``s`` uses basis ``bases[s % len(bases)]``."""
    bases = cfg.bases
    total = Counts()
    by_basis: dict[str, Counts] = {}
    log = []
    for bi, basis in enumerate(bases):
        circ = protocol_circuit(cfg, basis)
        sampler = _Sampler(circ, cfg.noise)
        fm = sampler.fm
        tables = {} if cfg.mode == "unencoded" else readout_tables(fm, cfg.mode)
        shots = np.arange(bi, int(cfg.shots), len(bases))
        cnt = Counts()
        for b0 in range(0, len(shots), batch):
            chunk = shots[b0 : b0 + batch]
            flips = np.stack([sampler.shot(int(cfg.seed), int(s)) for s in chunk])
            cl = fm.classify(flips, tables)
            post = cl["accepted_pre"] & ~cl["rejected_post"]
            cnt.runs += len(chunk)
            cnt.pre_accepted += int(cl["accepted_pre"].sum())
            cnt.post_accepted += int(post.sum())
            cnt.corrections += int(cl["corrected"].sum())
            cnt.errors += int(cl["accepted_wrong"].sum())
            if keep_log:
                for j, s in enumerate(chunk):
                    log.append((int(s), basis, bool(cl["accepted_pre"][j]), bool(post[j]),
                                bool(cl["corrected"][j]), bool(cl["accepted_wrong"][j])))
        by_basis[basis] = cnt
        total.add(cnt)
    log.sort()
    return ExperimentReport(cfg, total, by_basis, log)


# -- derived quantities ---------------------------------------------------


def fidelity_steane(e_x: float, e_y: float, e_z: float) -> float:
    """Bell-state infidelity from the three wrong-parity fractions."""
    for e in (e_x, e_y, e_z):
        if not 0.0 <= e <= 1.0:
            raise ValueError("error rates must lie in [0, 1]")
    return (e_x + e_y + e_z) / 2.0


def gain(physical: ExperimentReport | float, logical: ExperimentReport | float) -> float:
    """Physical over logical error rate (posterior medians, never zero)."""
    def rate(x):
        return x.error_rate.median if isinstance(x, ExperimentReport) else float(x)

    den = rate(logical)
    if den <= 0:
        raise ValueError("logical error rate must be positive")
    return rate(physical) / den


@dataclass(frozen=True)
class RejectionTrend:
    rounds: tuple[int, ...]
    pre_rejection: tuple[float, ...]
    post_rejection: tuple[float, ...]
    pre_fit: tuple[float, float] | None
    post_fit: tuple[float, float] | None
    pre_residual_sigma: tuple[float, ...]
    post_residual_sigma: tuple[float, ...]
    post_over_pre: tuple[float, ...]


def _fit_residuals(rs: np.ndarray, F: np.ndarray, N: np.ndarray):
    if not N.all() or len(np.unique(rs)) < 2:
        return None, tuple(0.0 for _ in rs)
    if not F.any():
        return (0.0, 0.0), tuple(0.0 for _ in rs)
    f = ml_linear_fit(list(zip(rs, F, N)))
    pred = np.clip(f.slope * rs + f.intercept, 1e-12, 1.0)
    sigma = np.sqrt(pred * (1 - pred) / N)
    return (f.slope, f.intercept), tuple(float(x) for x in (F / N - pred) / sigma)


def rejection_trend(reports: Sequence[ExperimentReport]) -> RejectionTrend:
    """Per-round rejection rates with line fits and residuals in binomial sigmas."""
    if len(reports) < 2:
        raise ValueError("need reports for at least two round counts")
    reports = sorted(reports, key=lambda r: r.config.rounds)
    rs = np.array([r.config.rounds for r in reports], dtype=float)
    pre_F = np.array([r.runs - r.pre_accepted for r in reports], dtype=float)
    pre_N = np.array([r.runs for r in reports], dtype=float)
    post_F = np.array([r.pre_accepted - r.post_accepted for r in reports], dtype=float)
    post_N = np.array([r.pre_accepted for r in reports], dtype=float)
    pre_fit, pre_res = _fit_residuals(rs, pre_F, pre_N)
    post_fit, post_res = _fit_residuals(rs, post_F, post_N)
    pre = tuple(float(x) for x in pre_F / pre_N)
    post = tuple(float(x) for x in np.divide(post_F, post_N, out=np.zeros_like(post_F), where=post_N > 0))
    ratio = tuple(p / q if q else 0.0 for p, q in zip(post, pre))
    return RejectionTrend(tuple(int(r) for r in rs), pre, post, pre_fit, post_fit, pre_res, post_res, ratio)
