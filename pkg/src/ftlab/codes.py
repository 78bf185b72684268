"""CSS code definitions: Steane [[7,1,3]], Carbon [[12,2,4]] and C4 [[4,2,2]]."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .pauli import (
    DimensionError,
    PauliOperator,
    mask_from_indices,
    paulis_up_to_weight,
    popcount,
    span,
    symplectic_product,
)


@dataclass(frozen=True)
class CssCode:
    name: str
    n: int
    k: int
    x_stabilizers: tuple[PauliOperator, ...]
    z_stabilizers: tuple[PauliOperator, ...]
    logical_x: tuple[PauliOperator, ...]
    logical_z: tuple[PauliOperator, ...]

    @property
    def generators(self) -> tuple[PauliOperator, ...]:
        """Stabilizer generators in syndrome order: X-type block, then Z-type block."""
        return self.x_stabilizers + self.z_stabilizers

    @property
    def r(self) -> int:
        return len(self.x_stabilizers) + len(self.z_stabilizers)

    @cached_property
    def _group(self) -> tuple[np.ndarray, np.ndarray]:
        gx = span([g.x for g in self.x_stabilizers])
        gz = span([g.z for g in self.z_stabilizers])
        # full group = every (X element, Z element) pair
        return np.repeat(gx, len(gz)), np.tile(gz, len(gx))

    def group_masks(self) -> tuple[np.ndarray, np.ndarray]:
        """Bitmasks (x, z) of all 2^(n-k) stabilizer group elements."""
        return self._group

    @cached_property
    def _group_set(self) -> frozenset[tuple[int, int]]:
        gx, gz = self._group
        return frozenset(zip(gx.tolist(), gz.tolist()))

    def in_stabilizer_group(self, p: PauliOperator) -> bool:
        """Membership up to sign."""
        return (p.x, p.z) in self._group_set

    # masks used by the destructive-measurement decoders
    @cached_property
    def z_check_masks(self) -> tuple[int, ...]:
        return tuple(g.z for g in self.z_stabilizers)

    @cached_property
    def x_check_masks(self) -> tuple[int, ...]:
        return tuple(g.x for g in self.x_stabilizers)


class Syndrome(tuple):
    """Bit tuple, one entry per generator (X-type generators first)."""

    @property
    def value(self) -> int:
        """Integer with the first generator as the most significant bit."""
        v = 0
        for b in self:
            v = (v << 1) | b
        return v

    def __str__(self) -> str:
        return "".join(str(b) for b in self)


def syndrome(code: CssCode, error: PauliOperator) -> Syndrome:
    if error.n != code.n:
        raise DimensionError(f"error on {error.n} qubits, code on {code.n}")
    return Syndrome(symplectic_product(g, error) for g in code.generators)


def syndrome_value(code: CssCode, x: int, z: int) -> int:
    """Integer syndrome of the Pauli with masks ``(x, z)``; fast path for tables."""
    v = 0
    for g in code.x_stabilizers:
        v = (v << 1) | (popcount(g.x & z) & 1)
    for g in code.z_stabilizers:
        v = (v << 1) | (popcount(g.z & x) & 1)
    return v


# -- validation -----------------------------------------------------------


@dataclass
class ValidationResult:
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok


def validate(code: CssCode) -> ValidationResult:
    """Check every CssCode invariant; failures name the offending operators."""
    res = ValidationResult()
    ops = list(code.generators) + list(code.logical_x) + list(code.logical_z)
    for p in ops:
        if p.n != code.n:
            res.failures.append(f"{p} has {p.n} qubits, code has {code.n}")
    if res.failures:
        return res
    for p in code.x_stabilizers:
        if p.z:
            res.failures.append(f"X-type generator {p} has Z support")
    for p in code.z_stabilizers:
        if p.x:
            res.failures.append(f"Z-type generator {p} has X support")
    if code.r != code.n - code.k:
        res.failures.append(f"{code.r} generators, expected n-k = {code.n - code.k}")
    if len(code.logical_x) != code.k or len(code.logical_z) != code.k:
        res.failures.append(f"expected {code.k} logical X and Z operators")

    gens = code.generators
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if symplectic_product(gens[i], gens[j]):
                res.failures.append(f"generators S{i + 1}={gens[i]} and S{j + 1}={gens[j]} anticommute")
    for name, logs in (("X", code.logical_x), ("Z", code.logical_z)):
        for a, L in enumerate(logs):
            for i, g in enumerate(gens):
                if symplectic_product(L, g):
                    res.failures.append(f"logical {name}{a}={L} anticommutes with S{i + 1}={g}")
    for a, lx in enumerate(code.logical_x):
        for b, lz in enumerate(code.logical_z):
            want = 1 if a == b else 0
            if symplectic_product(lx, lz) != want:
                rel = "commute" if want else "anticommute"
                res.failures.append(f"logical X{a}={lx} and Z{b}={lz} should {rel}")
    for a in range(code.k):
        for b in range(a + 1, code.k):
            if symplectic_product(code.logical_x[a], code.logical_x[b]):
                res.failures.append(f"logical X{a} and X{b} anticommute")
            if symplectic_product(code.logical_z[a], code.logical_z[b]):
                res.failures.append(f"logical Z{a} and Z{b} anticommute")
    # independence: the group must have 2^(n-k) distinct elements
    if not res.failures and len(code._group_set) != 1 << code.r:
        res.failures.append("stabilizer generators are not independent")
    return res


# -- distance -------------------------------------------------------------


class Distance(NamedTuple):
    value: int
    exact: bool

    def __str__(self) -> str:
        return str(self.value) if self.exact else f">{self.value}"


def is_logical(code: CssCode, p: PauliOperator) -> bool:
    """Commutes with every generator but is not a stabilizer."""
    return not any(symplectic_product(g, p) for g in code.generators) and not code.in_stabilizer_group(p)


def distance(code: CssCode, max_weight: int) -> Distance:
    """Least weight of a nontrivial logical, searching weights 1..max_weight."""
    if max_weight > code.n:
        raise ValueError(f"max_weight {max_weight} exceeds n={code.n}")
    best = None
    for p in paulis_up_to_weight(code.n, max_weight):
        if best is not None and p.weight > best:
            break
        if is_logical(code, p):
            best = p.weight
            break
    if best is None:
        return Distance(max_weight, False)
    return Distance(best, True)


# -- code constructors ----------------------------------------------------


def _xs(n: int, *supports: Sequence[int]) -> tuple[PauliOperator, ...]:
    return tuple(PauliOperator(n, x=mask_from_indices(s)) for s in supports)


def _zs(n: int, *supports: Sequence[int]) -> tuple[PauliOperator, ...]:
    return tuple(PauliOperator(n, z=mask_from_indices(s)) for s in supports)


@lru_cache(maxsize=None)
def carbon() -> CssCode:
    """The [[12,2,4]] Carbon code, generators in stabilizer-table order."""
    xs = ((0, 1, 2, 3), (4, 5, 6, 7), (8, 9, 10, 11), (0, 1, 5, 7, 8, 11), (0, 3, 4, 5, 9, 11))
    zs = ((0, 1, 2, 3), (4, 5, 6, 7), (8, 9, 10, 11), (0, 2, 6, 7, 8, 11), (0, 3, 4, 6, 10, 11))
    return CssCode(
        name="carbon",
        n=12,
        k=2,
        x_stabilizers=_xs(12, *xs),
        z_stabilizers=_zs(12, *zs),
        logical_x=_xs(12, (0, 3, 10, 11), (1, 3, 9, 10)),
        logical_z=_zs(12, (0, 3, 9, 11), (0, 1, 9, 10)),
    )


@lru_cache(maxsize=None)
def steane() -> CssCode:
    """Steane code from the [7,4,3] Hamming checks (column j is binary j+1)."""
    checks = ((3, 4, 5, 6), (1, 2, 5, 6), (0, 2, 4, 6))
    return CssCode(
        name="steane",
        n=7,
        k=1,
        x_stabilizers=_xs(7, *checks),
        z_stabilizers=_zs(7, *checks),
        logical_x=_xs(7, (0, 1, 2)),
        logical_z=_zs(7, (0, 1, 2)),
    )


@lru_cache(maxsize=None)
def c4() -> CssCode:
    """The [[4,2,2]] code with XXXX and ZZZZ."""
    return CssCode(
        name="c4",
        n=4,
        k=2,
        x_stabilizers=_xs(4, (0, 1, 2, 3)),
        z_stabilizers=_zs(4, (0, 1, 2, 3)),
        logical_x=_xs(4, (0, 1), (0, 2)),
        logical_z=_zs(4, (0, 2), (0, 1)),
    )


CODES = {"carbon": carbon, "steane": steane, "c4": c4}


def get_code(name: str) -> CssCode:
    try:
        return CODES[name]()
    except KeyError:
        raise ValueError(f"unknown code {name!r}; choose from {sorted(CODES)}") from None


# -- stabilizer-table text format -------------------------------------------


def _row(p: PauliOperator) -> str:
    return "".join("." if c == "I" else c for c in p.label())


def format_table(code: CssCode) -> str:
    """One generator per line, then ``--`` and the logicals X0, Z0, X1, Z1, ..."""
    lines = [_row(g) for g in code.generators]
    lines.append("--")
    for lx, lz in zip(code.logical_x, code.logical_z):
        lines.append(_row(lx))
        lines.append(_row(lz))
    return "\n".join(lines) + "\n"


def parse_table(text: str, name: str = "custom") -> CssCode:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if "--" not in lines:
        raise ValueError("stabilizer table needs a '--' line before the logicals")
    cut = lines.index("--")
    gens = [PauliOperator.from_string(ln) for ln in lines[:cut]]
    logs = [PauliOperator.from_string(ln) for ln in lines[cut + 1 :]]
    if not gens:
        raise ValueError("no generators")
    n = gens[0].n
    if any(p.n != n for p in gens + logs):
        raise ValueError("rows have different lengths")
    xs = [g for g in gens if g.x and not g.z]
    zs = [g for g in gens if g.z and not g.x]
    if len(xs) + len(zs) != len(gens):
        raise ValueError("only CSS generators (pure X or pure Z rows) are supported")
    if len(logs) % 2:
        raise ValueError("logicals must come in X, Z pairs")
    return CssCode(
        name=name,
        n=n,
        k=len(logs) // 2,
        x_stabilizers=tuple(xs),
        z_stabilizers=tuple(zs),
        logical_x=tuple(logs[0::2]),
        logical_z=tuple(logs[1::2]),
    )
