"""Lookup-table decoders.

``naive``
    Every syndrome maps to the first Pauli producing it, enumerating by
    increasing CSS weight, then ordinary weight, then label.
``restricted``
    Only syndromes produced by Paulis of CSS weight <= 1 are corrected;
    everything else is rejected.
``detect``
    Only the trivial syndrome is accepted (pure error detection).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np

from .codes import CssCode, Syndrome, syndrome_value
from .pauli import PauliOperator, popcount

POLICIES = ("naive", "restricted", "detect")


@dataclass(frozen=True)
class Correct:
    correction: PauliOperator

    def __str__(self) -> str:
        return self.correction.label()


class _Reject:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "Reject"

    def __str__(self) -> str:
        return "REJECT"


Reject = _Reject()
DecodeAction = Correct | _Reject


class SyndromeLengthError(ValueError):
    pass


@dataclass(frozen=True)
class LookupDecoder:
    code: CssCode
    table: dict  # syndrome int -> DecodeAction
    policy: str

    def decode(self, syndrome: Sequence[int] | int) -> Correct | _Reject:
        if isinstance(syndrome, (int, np.integer)):
            value = int(syndrome)
            if not 0 <= value < 1 << self.code.r:
                raise SyndromeLengthError(f"syndrome value {value} out of range")
        else:
            if len(syndrome) != self.code.r:
                raise SyndromeLengthError(f"syndrome has {len(syndrome)} bits, code has {self.code.r} generators")
            value = Syndrome(int(b) for b in syndrome).value
        return self.table.get(value, Reject)

    def to_text(self) -> str:
        r = self.code.r
        lines = []
        for s in range(1 << r):
            act = self.table.get(s, Reject)
            lines.append(f"{s:0{r}b} -> {act}")
        return "\n".join(lines) + "\n"


def decode(decoder: LookupDecoder, syndrome) -> Correct | _Reject:
    return decoder.decode(syndrome)


def _masks_of_weight(n: int, w: int) -> list[int]:
    out = []
    for qs in combinations(range(n), w):
        m = 0
        for q in qs:
            m |= 1 << q
        out.append(m)
    return out


def _label_key(n: int, x: int, z: int) -> str:
    return PauliOperator(n, x, z).label()


def paulis_by_css_weight(n: int, w: int) -> list[tuple[int, int]]:
    """(x, z) masks of all Paulis with CSS weight exactly ``w``, in decoder order."""
    small = [m for v in range(w + 1) for m in _masks_of_weight(n, v)]
    items = [
        (x, z)
        for x in small
        for z in small
        if max(popcount(x), popcount(z)) == w
    ]
    items.sort(key=lambda p: (popcount(p[0] | p[1]), _label_key(n, *p)))
    return items


@lru_cache(maxsize=None)
def _naive_table(code: CssCode) -> dict:
    total = 1 << code.r
    table: dict[int, Correct] = {}
    w = 0
    while len(table) < total and w <= code.n:
        for x, z in paulis_by_css_weight(code.n, w):
            s = syndrome_value(code, x, z)
            if s not in table:
                table[s] = Correct(PauliOperator(code.n, x, z))
        w += 1
    return table


def weight_one_syndromes(code: CssCode) -> frozenset[int]:
    return frozenset(syndrome_value(code, x, z) for w in (0, 1) for x, z in paulis_by_css_weight(code.n, w))


def build_naive(code: CssCode) -> LookupDecoder:
    return LookupDecoder(code, dict(_naive_table(code)), "naive")


def build_restricted(code: CssCode) -> LookupDecoder:
    naive = _naive_table(code)
    return LookupDecoder(code, {s: naive[s] for s in weight_one_syndromes(code)}, "restricted")


def build_detect(code: CssCode) -> LookupDecoder:
    return LookupDecoder(code, {0: Correct(PauliOperator(code.n))}, "detect")


def build_decoder(code: CssCode, policy: str) -> LookupDecoder:
    if policy == "naive":
        return build_naive(code)
    if policy == "restricted":
        return build_restricted(code)
    if policy == "detect":
        return build_detect(code)
    raise ValueError(f"unknown policy {policy!r}; choose from {POLICIES}")


# -- destructive measurement ----------------------------------------------


def _parity(mask: int, bits: Sequence[int]) -> int:
    return sum(bits[q] for q in range(len(bits)) if (mask >> q) & 1) & 1


def basis_checks(code: CssCode, basis: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(stabilizer supports, logical supports) measurable from a transversal readout."""
    if basis == "Z":
        return tuple(g.z for g in code.z_stabilizers), tuple(l.z for l in code.logical_z)
    if basis == "X":
        return tuple(g.x for g in code.x_stabilizers), tuple(l.x for l in code.logical_x)
    raise ValueError(f"basis must be X or Z, got {basis!r}")


def full_syndrome(code: CssCode, basis: str, partial: int) -> int:
    """Embed a measured-basis syndrome into the full generator order (zeros elsewhere)."""
    nz = len(code.z_stabilizers)
    return partial if basis == "Z" else partial << nz


def correction_flip(code: CssCode, basis: str, corr: PauliOperator) -> int:
    """Logical-parity flips (bit j = logical j) that ``corr`` causes in a ``basis`` readout."""
    _, logs = basis_checks(code, basis)
    err = corr.x if basis == "Z" else corr.z
    return sum((popcount(err & m) & 1) << j for j, m in enumerate(logs))


@dataclass(frozen=True)
class DestructiveTable:
    """Vectorized decoder for one transversal readout: index by partial syndrome."""

    reject: np.ndarray  # bool, shape (2^r_basis,)
    flip: np.ndarray  # int, logical flip mask
    nontrivial: np.ndarray  # bool: syndrome != 0


@lru_cache(maxsize=None)
def _destructive_table_cached(code: CssCode, policy: str, basis: str) -> DestructiveTable:
    dec = build_decoder(code, policy)
    checks, _ = basis_checks(code, basis)
    size = 1 << len(checks)
    reject = np.zeros(size, dtype=bool)
    flip = np.zeros(size, dtype=np.int64)
    for s in range(size):
        act = dec.table.get(full_syndrome(code, basis, s), Reject)
        if act is Reject:
            reject[s] = True
        else:
            flip[s] = correction_flip(code, basis, act.correction)
    nontriv = np.arange(size) != 0
    return DestructiveTable(reject, flip, nontriv)


def destructive_table(decoder: LookupDecoder, basis: str) -> DestructiveTable:
    return _destructive_table_cached(decoder.code, decoder.policy, basis)


def decode_destructive(
    code: CssCode, basis: str, bits: Sequence[int], decoder: LookupDecoder
) -> tuple[tuple[int, ...], Correct | _Reject]:
    """Decode a transversal ``basis`` readout of one block.

    Returns the corrected logical bits and the decoder action; on Reject the
    raw logical bits are returned unchanged.
    """
    if len(bits) != code.n:
        raise SyndromeLengthError(f"need {code.n} bits, got {len(bits)}")
    checks, logs = basis_checks(code, basis)
    partial = 0
    for m in checks:
        partial = (partial << 1) | _parity(m, bits)
    raw = [_parity(m, bits) for m in logs]
    act = decoder.decode(full_syndrome(code, basis, partial))
    if act is Reject:
        return tuple(raw), act
    f = correction_flip(code, basis, act.correction)
    return tuple(b ^ ((f >> j) & 1) for j, b in enumerate(raw)), act
