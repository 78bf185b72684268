"""Exact sampling of stabilizer circuits.

Two methods give identically distributed records:

``tableau``
    Direct simulation with faults applied as Paulis at their locations.
``frame``
    A noiseless reference record (random outcomes fixed to 0) XORed with the
    linear effect of a random gauge and of the faults.  The gauge is a
    uniformly random Z after every Z preparation/measurement and after the
    initial ``|0>``s, and a random X after every X preparation/measurement;
    it leaves the state invariant but randomizes exactly the outcomes that
    are not forced.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .circuit import Circuit, CircuitError, Instruction
from .noise import FaultEvent
from .pauli import indices_from_mask
from .tableau import Tableau

__all__ = [
    "FaultEvent",
    "MeasurementRecord",
    "Injection",
    "propagate",
    "run_tableau",
    "sample_circuit",
    "sample_batch",
    "reference_record",
    "reference_outcomes",
    "FrameModel",
    "frame_model",
]


@dataclass(frozen=True)
class MeasurementRecord:
    bits: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, i: int) -> int:
        return self.bits[i]


@dataclass(frozen=True)
class Injection:
    """Basis Pauli (``kind`` is "X" or "Z") on ``qubit`` at instruction ``index``."""

    index: int
    after: bool
    qubit: int
    kind: str


def _fault_timing(ins: Instruction) -> bool:
    """True when faults at this instruction act after it."""
    return not ins.is_measurement


def propagate(circuit: Circuit, injections: Sequence[Injection]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Push every injection through the circuit at once.

    Returns ``(record, fx, fz)``: ``record[m, j]`` is whether injection ``j``
    flips measurement ``m``; ``fx``/``fz`` are the final X/Z frame components
    (``n_qubits x len(injections)``).
    """
    n = circuit.n_qubits
    b = len(injections)
    fx = np.zeros((n, b), dtype=bool)
    fz = np.zeros((n, b), dtype=bool)
    record = np.zeros((circuit.n_measurements, b), dtype=bool)
    before: dict[int, list[tuple[int, int, str]]] = defaultdict(list)
    after: dict[int, list[tuple[int, int, str]]] = defaultdict(list)
    for j, inj in enumerate(injections):
        (after if inj.after else before)[inj.index].append((j, inj.qubit, inj.kind))

    def inject(items):
        for j, q, kind in items:
            if kind == "X":
                fx[q, j] ^= True
            else:
                fz[q, j] ^= True

    inject(before.get(-1, ()))
    m = 0
    for i, ins in enumerate(circuit.instructions):
        inject(before.get(i, ()))
        k, qs = ins.kind, ins.qubits
        if k == "CNOT":
            c, t = qs
            fx[t] ^= fx[c]
            fz[c] ^= fz[t]
        elif k == "H":
            q = qs[0]
            fx[q], fz[q] = fz[q].copy(), fx[q].copy()
        elif k == "S":
            q = qs[0]
            fz[q] ^= fx[q]
        elif k in ("PREP_Z", "PREP_X"):
            fx[qs[0]] = False
            fz[qs[0]] = False
        elif k == "MEAS_Z":
            record[m] = fx[qs[0]]
            m += 1
        elif k == "MEAS_X":
            record[m] = fz[qs[0]]
            m += 1
        elif k == "PERMUTE":
            src = list(qs)
            dst = [qs[p] for p in ins.perm]
            fx[dst] = fx[src].copy()
            fz[dst] = fz[src].copy()
        inject(after.get(i, ()))
    return record, fx, fz


def gauge_injections(circuit: Circuit) -> list[Injection]:
    inj = [Injection(-1, False, q, "Z") for q in range(circuit.n_qubits)]
    for i, ins in enumerate(circuit.instructions):
        if ins.kind in ("PREP_Z", "MEAS_Z"):
            inj.append(Injection(i, True, ins.qubits[0], "Z"))
        elif ins.kind in ("PREP_X", "MEAS_X"):
            inj.append(Injection(i, True, ins.qubits[0], "X"))
    return inj


def event_injections(circuit: Circuit, event: FaultEvent) -> list[Injection]:
    if not 0 <= event.location < len(circuit.instructions):
        raise CircuitError(f"fault at nonexistent location {event.location}")
    ins = circuit.instructions[event.location]
    support = indices_from_mask(event.error.x | event.error.z)
    ops = ins.qubits
    if ins.kind == "PERMUTE" or not set(support) <= set(ops):
        raise CircuitError(f"fault {event.error} not supported on instruction {event.location} operands")
    after = _fault_timing(ins)
    out = []
    for q in indices_from_mask(event.error.x):
        out.append(Injection(event.location, after, q, "X"))
    for q in indices_from_mask(event.error.z):
        out.append(Injection(event.location, after, q, "Z"))
    return out


# -- tableau simulation ---------------------------------------------------


def run_tableau(
    circuit: Circuit,
    faults: Iterable[FaultEvent] = (),
    rng: np.random.Generator | None = None,
    forced: dict[int, int] | None = None,
) -> tuple[MeasurementRecord, Tableau]:
    """Simulate directly.  Random outcomes use ``rng`` (or 0 when ``rng`` is None)."""
    by_loc: dict[int, list[FaultEvent]] = defaultdict(list)
    for f in faults:
        event_injections(circuit, f)  # validates
        by_loc[f.location].append(f)
    t = Tableau(circuit.n_qubits)
    bits = []
    for i, ins in enumerate(circuit.instructions):
        k, qs = ins.kind, ins.qubits
        if ins.is_measurement:
            for f in by_loc.get(i, ()):
                t.apply_pauli(f.error)
            fo = None if forced is None else forced.get(ins.cbit)
            if k == "MEAS_Z":
                bits.append(t.measure_z(qs[0], rng, fo))
            else:
                bits.append(t.measure_x(qs[0], rng, fo))
            continue
        if k == "PREP_Z":
            t.reset_z(qs[0])
        elif k == "PREP_X":
            t.reset_x(qs[0])
        elif k == "H":
            t.h(qs[0])
        elif k == "S":
            t.s(qs[0])
        elif k == "CNOT":
            t.cnot(*qs)
        elif k == "PERMUTE":
            t.permute(qs, ins.perm)
        for f in by_loc.get(i, ()):
            t.apply_pauli(f.error)
    return MeasurementRecord(tuple(bits)), t


# -- frame model ----------------------------------------------------------


class FrameModel:
    """Reference record plus linear gauge map for one circuit."""

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        rec, _ = run_tableau(circuit)
        self.reference = np.array(rec.bits, dtype=np.uint8)
        self.gauge, _, _ = propagate(circuit, gauge_injections(circuit))
        # a bit is forced when no gauge column reaches it
        self.forced = ~self.gauge.any(axis=1)

    def fault_flips(self, faults: Iterable[FaultEvent]) -> np.ndarray:
        inj = [j for f in faults for j in event_injections(self.circuit, f)]
        if not inj:
            return np.zeros(len(self.reference), dtype=bool)
        rec, _, _ = propagate(self.circuit, inj)
        return np.bitwise_xor.reduce(rec, axis=1)

    def is_forced(self, cbits: Sequence[int]) -> bool:
        """Whether the parity of ``cbits`` is deterministic in a noiseless run."""
        return not np.bitwise_xor.reduce(self.gauge[list(cbits)], axis=0).any()


@lru_cache(maxsize=64)
def frame_model(circuit: Circuit) -> FrameModel:
    return FrameModel(circuit)


def sample_circuit(
    circuit: Circuit, faults: Iterable[FaultEvent] = (), seed=0, method: str = "frame"
) -> MeasurementRecord:
    """One shot of ``circuit`` with the given faults injected."""
    faults = list(faults)
    rng = np.random.default_rng(seed)
    if method == "tableau":
        rec, _ = run_tableau(circuit, faults, rng)
        return rec
    if method != "frame":
        raise ValueError(f"unknown method {method!r}")
    fm = frame_model(circuit)
    g = rng.integers(0, 2, size=fm.gauge.shape[1], dtype=np.uint8).astype(bool)
    bits = fm.reference.astype(bool) ^ ((fm.gauge & g).sum(axis=1) & 1).astype(bool) ^ fm.fault_flips(faults)
    return MeasurementRecord(tuple(int(b) for b in bits))


def sample_batch(circuit: Circuit, shots: int, faults: Iterable[FaultEvent] = (), seed=0) -> np.ndarray:
    """``shots`` frame-sampled records (rows) sharing one fault set."""
    fm = frame_model(circuit)
    rng = np.random.default_rng(seed)
    g = rng.integers(0, 2, size=(shots, fm.gauge.shape[1]), dtype=np.uint8)
    rand = (g.astype(np.int64) @ fm.gauge.T.astype(np.int64)) & 1
    flips = fm.fault_flips(list(faults)).astype(np.int64)
    return (fm.reference.astype(np.int64) ^ rand ^ flips).astype(np.uint8)


def reference_record(circuit: Circuit) -> MeasurementRecord:
    """Noiseless record with every random outcome set to 0."""
    return MeasurementRecord(tuple(int(b) for b in frame_model(circuit).reference))


def reference_outcomes(circuit: Circuit) -> list[str]:
    """Per measurement: ``"0"``/``"1"`` when forced in noiseless runs, else ``"random"``."""
    fm = frame_model(circuit)
    return [str(int(r)) if f else "random" for r, f in zip(fm.reference, fm.forced)]
