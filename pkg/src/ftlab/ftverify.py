"""Exhaustive single- and double-fault verification.

Preparation circuits are checked against two conditions on the residual
error left on the output blocks of an accepted run:

order 1
    every single fault leaves residual CSS weight <= 1;
order 2
    every pair of faults leaves residual CSS weight <= 2, or a syndrome that
    no CSS weight-one error produces (so a restricted decoder rejects it).

Residuals are reduced modulo the stabilizer group of the prepared state,
i.e. the code stabilizers of each block together with any logical
operators that stabilize the target state.  X and Z components are handled
separately, because a transversal readout only ever sees one of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable

import numpy as np

from .circuit import Circuit, CircuitError
from .codes import CssCode, get_code, syndrome_value
from .decoder import LookupDecoder, destructive_table
from .faultmodel import FaultModel, fault_model
from .noise import FaultEvent
from .pauli import PauliOperator, reduce_mod_stabilizers, span
from .sampling import run_tableau

MAX_STORED = 200


@dataclass(frozen=True)
class FtPrepReport:
    """One violating fault set."""

    faults: tuple[FaultEvent, ...]
    residual: tuple[PauliOperator, ...]  # per out-block, or () for EC scans
    weight: int
    syndrome_class: str  # "weight-one" / "distinct" / "post-rejected" / "logical-error"


@dataclass
class FaultScanResult:
    order: int
    total_fault_sets: int = 0
    accepted: int = 0
    post_rejected: int = 0
    n_violations: int = 0
    violations: list[FtPrepReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.n_violations == 0

    def summary(self) -> str:
        return (
            f"order {self.order}: {self.total_fault_sets} fault sets, {self.accepted} accepted, "
            f"{self.post_rejected} post-rejected, {self.n_violations} violations"
        )


# -- per-code lookup tables ---------------------------------------------------

@lru_cache(maxsize=None)
def _coset_tables(code: CssCode):
    """For each type t: min weight over the t-stabilizer coset and t-syndrome, indexed by mask."""
    n = code.n
    masks = np.arange(1 << n, dtype=np.int64)
    out = {}
    for t in "XZ":
        stabs = [g.x for g in code.x_stabilizers] if t == "X" else [g.z for g in code.z_stabilizers]
        group = span(stabs)
        w = np.full(1 << n, n + 1, dtype=np.int64)
        for g in group:
            w = np.minimum(w, np.bitwise_count(masks ^ int(g)).astype(np.int64))
        checks = [g.z for g in code.z_stabilizers] if t == "X" else [g.x for g in code.x_stabilizers]
        syn = np.zeros(1 << n, dtype=np.int64)
        for m in checks:
            syn = (syn << 1) | (np.bitwise_count(masks & m).astype(np.int64) & 1)
        w1 = np.zeros(1 << len(checks), dtype=bool)
        w1[syn[0]] = True
        for q in range(n):
            w1[syn[1 << q]] = True
        out[t] = (w, syn, w1)
    return out


def _block_masks(bits: np.ndarray) -> np.ndarray:
    return bits.astype(np.int64) @ (1 << np.arange(bits.shape[1], dtype=np.int64))


def logical_stabilizers(circuit: Circuit) -> dict[str, list[tuple[int, ...]]]:
    """Per type, the logical operator products (per-block masks) stabilizing the output."""
    _, tab = run_tableau(circuit)
    n = circuit.n_qubits
    out: dict[str, list[tuple[int, ...]]] = {}
    total_bits = 0
    for t in "XZ":
        per_block = []
        for ob in circuit.outblocks:
            code = get_code(ob.code)
            logs = code.logical_x if t == "X" else code.logical_z
            per_block.append([lg.x if t == "X" else lg.z for lg in logs])
            for g in code.generators:
                emb = g.embed(n, ob.qubits)
                if tab.expectation(emb) == 0:
                    raise CircuitError(f"{circuit.name}: block {ob.label} is not stabilized by {g}")
        gens = [(b, m) for b, ms in enumerate(per_block) for m in ms]
        elements = []
        for choice in product((0, 1), repeat=len(gens)):
            masks = [0] * len(per_block)
            for (b, m), c in zip(gens, choice):
                if c:
                    masks[b] ^= m
            x = z = 0
            for ob, m in zip(circuit.outblocks, masks):
                for j, q in enumerate(ob.qubits):
                    if (m >> j) & 1:
                        if t == "X":
                            x |= 1 << q
                        else:
                            z |= 1 << q
            if tab.expectation(PauliOperator(n, x, z)) != 0:
                elements.append(tuple(masks))
        out[t] = elements
        total_bits += len(elements).bit_length() - 1
    need = sum(get_code(ob.code).k for ob in circuit.outblocks)
    if total_bits != need:
        raise CircuitError(f"{circuit.name}: output is not a logical stabilizer state ({total_bits} of {need})")
    return out


class _PrepEvaluator:
    def __init__(self, fm: FaultModel):
        c = fm.circuit
        if not c.outblocks:
            raise CircuitError("preparation circuit declares no output blocks")
        self.fm = fm
        self.codes = [get_code(ob.code) for ob, _, _ in fm.blocks]
        self.tables = [_coset_tables(code) for code in self.codes]
        self.lstab = logical_stabilizers(c)

    def weights(self, flips: np.ndarray):
        """Return (w_X, w_Z, all_w1_X, all_w1_Z) per row, plus block masks."""
        k = flips.shape[0]
        masks = {"X": [], "Z": []}
        for ob, sx, sz in self.fm.blocks:
            masks["X"].append(_block_masks(flips[:, sx]))
            masks["Z"].append(_block_masks(flips[:, sz]))
        w = {}
        in_w1 = {}
        for t in "XZ":
            best = np.full(k, 1 << 30, dtype=np.int64)
            for elem in self.lstab[t]:
                worst = np.zeros(k, dtype=np.int64)
                for b, m in enumerate(masks[t]):
                    worst = np.maximum(worst, self.tables[b][t][0][m ^ elem[b]])
                best = np.minimum(best, worst)
            w[t] = best
            ok = np.ones(k, dtype=bool)
            for b, m in enumerate(masks[t]):
                _, syn, w1 = self.tables[b][t]
                ok &= w1[syn[m]]
            in_w1[t] = ok
        return w, in_w1, masks

    def reduced_residual(self, masks, row: int) -> tuple[PauliOperator, ...]:
        """Per-block representative of minimal weight (ignoring logical stabilizers)."""
        out = []
        for b, code in enumerate(self.codes):
            x, z = int(masks["X"][b][row]), int(masks["Z"][b][row])
            out.append(reduce_mod_stabilizers(PauliOperator(code.n, x, z), code))
        return tuple(out)


def _events_for(fm: FaultModel, ids: Iterable[int]) -> tuple[FaultEvent, ...]:
    out = []
    for e in ids:
        li, a = fm.event_index[e]
        out.append(fm.locations[li].event(fm.circuit.n_qubits, a))
    return tuple(out)


def _scan(fm: FaultModel, order: int, check, restrict: np.ndarray | None = None, chunk_rows: int = 4_000_000):
    """Feed every fault set of the given order to ``check(flips, ids_i, ids_j)``."""
    ev = fm.events
    ids = np.arange(len(ev)) if restrict is None else np.asarray(restrict)
    if order == 1:
        check(np.zeros((1, fm.n_feat), dtype=bool), np.array([-1]), np.array([-1]))
        check(ev[ids], ids, np.full(len(ids), -1))
        return 1 + len(ids)
    if order != 2:
        raise ValueError("order must be 1 or 2")
    total = 0
    sub = ev[ids]
    for a in range(len(ids)):
        flips = sub[a] ^ sub[a + 1 :]
        if len(flips):
            check(flips, np.full(len(flips), ids[a]), ids[a + 1 :])
            total += len(flips)
    return total


def verify_prep(circuit: Circuit, order: int = 1, *, idle: bool = True, locations=None) -> FaultScanResult:
    """Exhaustively check the order-``order`` condition on ``circuit``'s output blocks.

    ``locations`` optionally restricts faults to the given instruction indices.
    """
    if not circuit.bits_with_role("pre-select"):
        raise CircuitError("circuit declares no pre-select bits")
    fm = fault_model(circuit, idle)
    ev_ = _PrepEvaluator(fm)
    res = FaultScanResult(order)
    restrict = None
    if locations is not None:
        keep = set(locations)
        restrict = np.array(
            [e for e, (li, _) in enumerate(fm.event_index) if fm.locations[li].index in keep], dtype=np.int64
        )

    def check(flips, ii, jj):
        acc = ~flips[:, fm.pre].any(axis=1)
        res.accepted += int(acc.sum())
        if not acc.any():
            return
        rows = np.flatnonzero(acc)
        f = flips[rows]
        w, in_w1, masks = ev_.weights(f)
        wmax = np.maximum(w["X"], w["Z"])
        if order == 1:
            bad = wmax > 1
        else:
            bad = ((w["X"] > 2) & in_w1["X"]) | ((w["Z"] > 2) & in_w1["Z"])
        nb = int(bad.sum())
        res.n_violations += nb
        for r in np.flatnonzero(bad):
            if len(res.violations) >= MAX_STORED:
                break
            ids = [int(x) for x in (ii[rows[r]], jj[rows[r]]) if x >= 0]
            cls = "weight-one" if (in_w1["X"][r] and in_w1["Z"][r]) else "distinct"
            res.violations.append(FtPrepReport(_events_for(fm, ids), ev_.reduced_residual(masks, r), int(wmax[r]), cls))

    res.total_fault_sets = _scan(fm, order, check, restrict)
    return res


def _tables_for(fm: FaultModel, decoders) -> dict:
    out = {}
    for label, rs in fm.readouts.items():
        dec = decoders[rs.code] if isinstance(decoders, dict) else decoders
        if isinstance(dec, LookupDecoder):
            out[label] = destructive_table(dec, rs.basis)
        else:
            out[label] = dec
    return out


def verify_ec_round(circuit: Circuit, decoder, order: int = 1, *, idle: bool = True) -> FaultScanResult:
    """Decoder-in-the-loop scan of a complete circuit with decoded readouts.

    At order 1 a violation is any post-rejection or accepted wrong outcome;
    at order 2 only accepted wrong outcomes count.  ``decoder`` is a
    LookupDecoder or a dict from code name to LookupDecoder.
    """
    fm = fault_model(circuit, idle)
    tables = _tables_for(fm, decoder)
    res = FaultScanResult(order)

    def check(flips, ii, jj):
        cl = fm.classify(flips, tables)
        res.accepted += int((cl["accepted_pre"] & ~cl["rejected_post"]).sum())
        res.post_rejected += int(cl["rejected_post"].sum())
        bad = cl["accepted_wrong"]
        if order == 1:
            bad = bad | cl["rejected_post"]
        res.n_violations += int(bad.sum())
        for r in np.flatnonzero(bad):
            if len(res.violations) >= MAX_STORED:
                break
            ids = [int(x) for x in (ii[r], jj[r]) if x >= 0]
            cls = "post-rejected" if cl["rejected_post"][r] else "logical-error"
            res.violations.append(FtPrepReport(_events_for(fm, ids), (), 0, cls))

    res.total_fault_sets = _scan(fm, order, check)
    return res
