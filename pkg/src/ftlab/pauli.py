"""Pauli operators in the binary symplectic representation.

A Pauli on ``n`` qubits is stored as two integer bitmasks (bit ``i`` is
qubit ``i``) plus a sign.  ``x`` and ``z`` both set on a qubit means ``Y``.
Only Hermitian operators are representable, so the phase is always +1 or -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

_CHARS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {"I": (0, 0), ".": (0, 0), "_": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


class NonHermitianProduct(ValueError):
    """A product of anticommuting Paulis picked up a factor of +-i."""


def popcount(v: int) -> int:
    return bin(v).count("1")


def mask_from_indices(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def indices_from_mask(m: int) -> list[int]:
    out = []
    i = 0
    while m:
        if m & 1:
            out.append(i)
        m >>= 1
        i += 1
    return out


@dataclass(frozen=True)
class PauliOperator:
    n: int
    x: int = 0
    z: int = 0
    sign: int = 1

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        limit = 1 << self.n
        if self.x < 0 or self.z < 0 or self.x >= limit or self.z >= limit:
            raise ValueError(f"bitmask exceeds {self.n} qubits")

    # -- constructors -------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n)

    @classmethod
    def from_string(cls, s: str) -> "PauliOperator":
        """Parse ``"+XIZY"``, ``"-ZZ.."`` etc.  Character ``i`` is qubit ``i``."""
        s = s.strip()
        sign = 1
        if s and s[0] in "+-":
            sign = -1 if s[0] == "-" else 1
            s = s[1:]
        x = z = 0
        for i, c in enumerate(s):
            try:
                bx, bz = _BITS[c.upper()]
            except KeyError:
                raise ValueError(f"bad Pauli character {c!r} in {s!r}") from None
            x |= bx << i
            z |= bz << i
        return cls(len(s), x, z, sign)

    @classmethod
    def from_sparse(
        cls, n: int, x: Iterable[int] = (), z: Iterable[int] = (), y: Iterable[int] = (), sign: int = 1
    ) -> "PauliOperator":
        ym = mask_from_indices(y)
        return cls(n, mask_from_indices(x) | ym, mask_from_indices(z) | ym, sign)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliOperator":
        bx, bz = _BITS[kind]
        return cls(n, bx << qubit, bz << qubit)

    # -- views --------------------------------------------------------
    @property
    def x_bits(self) -> tuple[int, ...]:
        return tuple((self.x >> i) & 1 for i in range(self.n))

    @property
    def z_bits(self) -> tuple[int, ...]:
        return tuple((self.z >> i) & 1 for i in range(self.n))

    @property
    def support(self) -> list[int]:
        return indices_from_mask(self.x | self.z)

    @property
    def weight(self) -> int:
        return popcount(self.x | self.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def unsigned(self) -> "PauliOperator":
        return PauliOperator(self.n, self.x, self.z)

    def label(self) -> str:
        return "".join(_CHARS[((self.x >> i) & 1, (self.z >> i) & 1)] for i in range(self.n))

    def __str__(self) -> str:
        return ("+" if self.sign > 0 else "-") + self.label()

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)

    def restrict(self, qubits: Sequence[int]) -> "PauliOperator":
        """Pauli on ``len(qubits)`` qubits taken from the listed positions."""
        x = z = 0
        for j, q in enumerate(qubits):
            x |= ((self.x >> q) & 1) << j
            z |= ((self.z >> q) & 1) << j
        return PauliOperator(len(qubits), x, z)

    def embed(self, n: int, qubits: Sequence[int]) -> "PauliOperator":
        """Place this Pauli onto ``qubits`` of an ``n``-qubit register."""
        if len(qubits) != self.n:
            raise DimensionError(f"need {self.n} target qubits, got {len(qubits)}")
        x = z = 0
        for j, q in enumerate(qubits):
            x |= ((self.x >> j) & 1) << q
            z |= ((self.z >> j) & 1) << q
        return PauliOperator(n, x, z, self.sign)


def _check_dims(p: PauliOperator, q: PauliOperator) -> None:
    if p.n != q.n:
        raise DimensionError(f"Pauli sizes differ: {p.n} vs {q.n}")


def symplectic_product(p: PauliOperator, q: PauliOperator) -> int:
    """0 if ``p`` and ``q`` commute, 1 if they anticommute."""
    _check_dims(p, q)
    return popcount((p.x & q.z) ^ (p.z & q.x)) & 1


def product_phase(p: PauliOperator, q: PauliOperator) -> tuple[int, PauliOperator]:
    """Return ``(k, R)`` with ``p * q == i**k * R`` and ``R`` Hermitian, sign +1."""
    _check_dims(p, q)
    x, z = p.x ^ q.x, p.z ^ q.z
    # Y = i X Z, so a Hermitian Pauli is i^{|x&z|} X^x Z^z
    k = popcount(p.x & p.z) + popcount(q.x & q.z) - popcount(x & z) + 2 * popcount(p.z & q.x)
    if p.sign < 0:
        k += 2
    if q.sign < 0:
        k += 2
    return k % 4, PauliOperator(p.n, x, z)


def multiply(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    k, r = product_phase(p, q)
    if k % 2:
        raise NonHermitianProduct(f"{p} * {q} is not Hermitian")
    return PauliOperator(r.n, r.x, r.z, -1 if k == 2 else 1)


def css_weight(p: PauliOperator) -> int:
    """Larger of the Hamming weights of the X and Z bitstrings."""
    return max(popcount(p.x), popcount(p.z))


def span(masks: Sequence[int]) -> np.ndarray:
    """All 2^len(masks) XOR combinations, element ``j`` uses generators in bits of ``j``."""
    out = np.zeros(1 << len(masks), dtype=np.int64)
    for i, m in enumerate(masks):
        size = 1 << i
        out[size : 2 * size] = out[:size] ^ m
    return out


def reduce_mod_stabilizers(p: PauliOperator, code) -> PauliOperator:
    """Element of the coset ``p * S`` of minimal CSS weight.

    Exhaustive over the full stabilizer group of ``code``; ties go to the
    lowest group index, so the result is deterministic.  The returned
    operator carries sign +1 (errors matter only up to phase).
    """
    if p.n != code.n:
        raise DimensionError(f"Pauli on {p.n} qubits, code on {code.n}")
    gx, gz = code.group_masks()
    xs = gx ^ p.x
    zs = gz ^ p.z
    w = np.maximum(np.bitwise_count(xs), np.bitwise_count(zs))
    j = int(np.argmin(w))
    return PauliOperator(p.n, int(xs[j]), int(zs[j]))


def paulis_up_to_weight(n: int, max_weight: int) -> Iterable[PauliOperator]:
    """Every non-identity Pauli of (ordinary) weight 1..max_weight."""
    for w in range(1, max_weight + 1):
        for qubits in combinations(range(n), w):
            for kinds in product(range(3), repeat=w):
                x = z = 0
                for q, k in zip(qubits, kinds):
                    if k in (0, 1):
                        x |= 1 << q
                    if k in (1, 2):
                        z |= 1 << q
                yield PauliOperator(n, x, z)
