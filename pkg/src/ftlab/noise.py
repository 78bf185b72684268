"""Circuit-level noise: fault locations, their Pauli alphabets, and sampling."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import NamedTuple

import numpy as np

from .circuit import Circuit
from .pauli import PauliOperator

_1Q = ("X", "Y", "Z")
_2Q = tuple(a + b for a in "IXYZ" for b in "IXYZ" if a + b != "II")

# (alphabet, whether the fault acts after the instruction, rate field)
_LOCATION_KIND = {
    "CNOT": (_2Q, True, "p_2q"),
    "H": (_1Q, True, "p_1q"),
    "S": (_1Q, True, "p_1q"),
    "TICK": (_1Q, True, "p_idle"),
    "PREP_Z": (("X",), True, "p_prep"),
    "PREP_X": (("Z",), True, "p_prep"),
    "MEAS_Z": (("X",), False, "p_meas"),
    "MEAS_X": (("Z",), False, "p_meas"),
}


@dataclass(frozen=True)
class NoiseModel:
    p_2q: float = 0.0014
    p_1q: float = 0.00003
    p_prep: float = 0.0015
    p_meas: float = 0.0015
    p_idle: float = 0.0003

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{f.name}={v} outside [0, 1]")

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0)

    def scaled(self, factor: float) -> "NoiseModel":
        return replace(self, **{f.name: getattr(self, f.name) * factor for f in fields(self)})

    def to_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown noise parameters: {sorted(extra)}")
        return cls(**{k: float(v) for k, v in d.items()})


@dataclass(frozen=True)
class FaultEvent:
    """Pauli ``error`` applied at instruction ``location``.

    After the instruction for preparations, gates and idles; before it for
    measurements.
    """

    location: int
    error: PauliOperator

    def __post_init__(self) -> None:
        if self.error.is_identity():
            raise ValueError("fault error must not be the identity")


class Location(NamedTuple):
    index: int  # instruction index
    qubits: tuple[int, ...]
    alphabet: tuple[str, ...]  # local Pauli labels, one char per qubit
    after: bool
    rate: str  # NoiseModel field name

    def event(self, n: int, a: int) -> FaultEvent:
        label = self.alphabet[a]
        x = z = 0
        for q, c in zip(self.qubits, label):
            if c in "XY":
                x |= 1 << q
            if c in "ZY":
                z |= 1 << q
        return FaultEvent(self.index, PauliOperator(n, x, z))


class FaultLocationSet(tuple):
    """Ordered tuple of ``Location``; also knows the circuit width."""

    def __new__(cls, locations, n_qubits: int):
        obj = super().__new__(cls, locations)
        obj.n_qubits = n_qubits
        return obj

    @property
    def n_events(self) -> int:
        return sum(len(loc.alphabet) for loc in self)

    def events(self) -> list[tuple[int, int]]:
        """(location index, alphabet index) for every single fault, in order."""
        return [(i, a) for i, loc in enumerate(self) for a in range(len(loc.alphabet))]

    def rates(self, model: NoiseModel) -> np.ndarray:
        return np.array([getattr(model, loc.rate) for loc in self], dtype=float)


def enumerate_locations(circuit: Circuit, *, idle: bool = True) -> FaultLocationSet:
    locs = []
    for i, ins in enumerate(circuit.instructions):
        if ins.kind == "PERMUTE":
            continue
        alphabet, after, rate = _LOCATION_KIND[ins.kind]
        if ins.kind == "TICK":
            if idle:
                for q in ins.qubits:
                    locs.append(Location(i, (q,), alphabet, after, rate))
            continue
        locs.append(Location(i, ins.qubits, alphabet, after, rate))
    return FaultLocationSet(locs, circuit.n_qubits)


def sample_location_faults(
    locations: FaultLocationSet, rates: np.ndarray, rng: np.random.Generator
) -> list[tuple[int, int]]:
    """Draw (location, alphabet index) pairs: each location fails independently."""
    hit = np.flatnonzero(rng.random(len(locations)) < rates)
    return [(int(i), int(rng.integers(len(locations[i].alphabet)))) for i in hit]


def sample_faults(circuit: Circuit, model: NoiseModel, seed) -> tuple[FaultEvent, ...]:
    locs = enumerate_locations(circuit)
    rng = np.random.default_rng(seed)
    picks = sample_location_faults(locs, locs.rates(model), rng)
    return tuple(locs[i].event(circuit.n_qubits, a) for i, a in picks)


def expected_fault_count(circuit: Circuit, model: NoiseModel) -> float:
    return float(enumerate_locations(circuit).rates(model).sum())
