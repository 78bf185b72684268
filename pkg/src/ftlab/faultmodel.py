"""Linear fault-effect model of a circuit.

Every single fault (location, alphabet entry) is pushed through the circuit
once.  Its effect is summarized as a row of boolean *features*:

* ``pre``: flips of the pre-select bits,
* per readout: flips of the measured-basis syndrome and of the raw logical
  parities,
* per output: flip of the raw XOR of its terms,
* per out-block: X and Z components of the residual Pauli on its qubits.

Because propagation is linear over GF(2), the features of any fault set are
the XOR of its rows.  The noiseless values come from the reference record;
every record-derived feature except raw readout logicals is checked to be
gauge independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import Circuit, CircuitError, _parse_term
from .codes import get_code
from .decoder import DestructiveTable, basis_checks
from .noise import FaultLocationSet, enumerate_locations
from .sampling import Injection, frame_model, propagate


@dataclass(frozen=True)
class ReadoutSlice:
    label: str
    basis: str
    code: str
    syn: slice
    log: slice


def _weights(k: int) -> np.ndarray:
    """Bit weights so that column 0 is the most significant bit."""
    return (1 << np.arange(k - 1, -1, -1)).astype(np.int64)


class FaultModel:
    def __init__(self, circuit: Circuit, idle: bool = True):
        self.circuit = circuit
        self.locations: FaultLocationSet = enumerate_locations(circuit, idle=idle)
        n_meas = circuit.n_measurements

        # record -> feature parity matrix A (n_feat_rec x n_meas)
        rows: list[np.ndarray] = []

        def add_row(cbits) -> int:
            r = np.zeros(n_meas, dtype=bool)
            for c in cbits:
                r[c] ^= True
            rows.append(r)
            return len(rows) - 1

        self.pre_bits = circuit.bits_with_role("pre-select")
        start = len(rows)
        for c in self.pre_bits:
            add_row([c])
        self.pre = slice(start, len(rows))

        self.readouts: dict[str, ReadoutSlice] = {}
        for ro in circuit.readouts:
            code = get_code(ro.code)
            checks, logs = basis_checks(code, ro.basis)
            s0 = len(rows)
            for m in checks:
                add_row([ro.cbits[q] for q in range(code.n) if (m >> q) & 1])
            s1 = len(rows)
            for m in logs:
                add_row([ro.cbits[q] for q in range(code.n) if (m >> q) & 1])
            self.readouts[ro.label] = ReadoutSlice(ro.label, ro.basis, ro.code, slice(s0, s1), slice(s1, len(rows)))

        # outputs: raw XOR of terms; decoded terms contribute their logical row
        self.output_terms: list[list[tuple[str, int]]] = []
        o0 = len(rows)
        for out in circuit.outputs:
            cb: list[int] = []
            dec_terms = []
            for t in out.terms:
                kind, label, idx = _parse_term(t)
                if kind == "raw":
                    cb.append(idx)
                else:
                    ro = circuit.readout(label)
                    code = get_code(ro.code)
                    _, logs = basis_checks(code, ro.basis)
                    cb.extend(ro.cbits[q] for q in range(code.n) if (logs[idx] >> q) & 1)
                    dec_terms.append((label, idx))
            add_row(cb)
            self.output_terms.append(dec_terms)
        self.outputs = slice(o0, len(rows))
        self.n_rec_feat = len(rows)
        A = np.array(rows, dtype=np.float32).reshape(len(rows), n_meas)

        # residual features on out-blocks
        self.blocks = []
        nf = self.n_rec_feat
        for ob in circuit.outblocks:
            nq = len(ob.qubits)
            self.blocks.append((ob, slice(nf, nf + nq), slice(nf + nq, nf + 2 * nq)))
            nf += 2 * nq
        self.n_feat = nf

        fm = frame_model(circuit)
        gauge = ((A @ fm.gauge.astype(np.float32)) % 2).any(axis=1)
        # raw logical parities of a readout may be random (teleportation
        # frames); only syndromes, pre-select bits and outputs must be fixed
        for rs in self.readouts.values():
            gauge[rs.log] = False
        if gauge.any():
            bad = [int(i) for i in np.flatnonzero(gauge)]
            raise CircuitError(f"{circuit.name}: features {bad} are not deterministic in noiseless runs")
        self.reference = (A @ fm.reference.astype(np.float32)) % 2 > 0.5
        self.ref_record = fm.reference

        # basis injections: X and Z on every operand of every location
        inj = []
        for loc in self.locations:
            for q in loc.qubits:
                inj.append(Injection(loc.index, loc.after, q, "X"))
                inj.append(Injection(loc.index, loc.after, q, "Z"))
        rec, fx, fz = propagate(circuit, inj)
        basis = np.zeros((len(inj), self.n_feat), dtype=bool)
        basis[:, : self.n_rec_feat] = ((rec.T.astype(np.float32) @ A.T) % 2) > 0.5
        for ob, sx, sz in self.blocks:
            q = list(ob.qubits)
            basis[:, sx] = fx[q].T
            basis[:, sz] = fz[q].T
        self.record_basis = rec.T  # (n_inj, n_meas)

        # events: XOR of the basis columns named by each alphabet entry
        ev_rows = []
        rec_rows = []
        self.event_index: list[tuple[int, int]] = []
        col = 0
        for li, loc in enumerate(self.locations):
            for a, label in enumerate(loc.alphabet):
                sel = []
                for j, c in enumerate(label):
                    if c in "XY":
                        sel.append(col + 2 * j)
                    if c in "ZY":
                        sel.append(col + 2 * j + 1)
                ev_rows.append(np.bitwise_xor.reduce(basis[sel], axis=0))
                rec_rows.append(np.bitwise_xor.reduce(rec.T[sel], axis=0))
                self.event_index.append((li, a))
            col += 2 * len(loc.qubits)
        self.events = np.array(ev_rows, dtype=bool).reshape(len(ev_rows), self.n_feat)
        self.event_records = np.array(rec_rows, dtype=bool).reshape(len(rec_rows), n_meas)
        self.event_offset = np.cumsum([0] + [len(loc.alphabet) for loc in self.locations])

    @property
    def n_events(self) -> int:
        return len(self.events)

    def event_id(self, loc: int, a: int) -> int:
        return int(self.event_offset[loc] + a)

    def ref_value(self, sl: slice) -> np.ndarray:
        return self.reference[sl]

    # -- evaluation -------------------------------------------------------
    def syndrome_ints(self, flips: np.ndarray, label: str) -> np.ndarray:
        rs = self.readouts[label]
        bits = flips[:, rs.syn] ^ self.reference[rs.syn]
        return bits.astype(np.int64) @ _weights(bits.shape[1])

    def classify(self, flips: np.ndarray, tables: dict[str, DestructiveTable]) -> dict[str, np.ndarray]:
        """Per fault set (row of ``flips``): accepted, post-rejected, corrected, wrong.

        ``tables`` maps readout label to its decoder table.  ``wrong`` is
        evaluated for every row (regardless of acceptance).
        """
        k = flips.shape[0]
        pre_ok = ~flips[:, self.pre].any(axis=1) if self.pre.stop > self.pre.start else np.ones(k, bool)
        post_rej = np.zeros(k, dtype=bool)
        corrected = np.zeros(k, dtype=bool)
        flipmask: dict[str, np.ndarray] = {}
        for label, rs in self.readouts.items():
            s = self.syndrome_ints(flips, label)
            t = tables[label]
            post_rej |= t.reject[s]
            corrected |= t.nontrivial[s]
            flipmask[label] = t.flip[s]
        ref_dec = self._reference_decoded(tables)
        out_flip = flips[:, self.outputs].copy()
        for o, terms in enumerate(self.output_terms):
            v = out_flip[:, o].astype(np.int64)
            for label, idx in terms:
                v ^= (flipmask[label] >> idx) & 1
            out_flip[:, o] = (v ^ ref_dec[o]) > 0
        wrong = out_flip.any(axis=1)
        return {
            "accepted_pre": pre_ok,
            "rejected_post": pre_ok & post_rej,
            "corrected": pre_ok & ~post_rej & corrected,
            "wrong": wrong,
            "accepted_wrong": pre_ok & ~post_rej & wrong,
        }

    def _reference_decoded(self, tables) -> np.ndarray:
        """Decoder flip contribution of the noiseless syndromes, per output."""
        out = np.zeros(len(self.output_terms), dtype=np.int64)
        zero = np.zeros((1, self.n_feat), dtype=bool)
        for o, terms in enumerate(self.output_terms):
            for label, idx in terms:
                s = int(self.syndrome_ints(zero, label)[0])
                out[o] ^= (int(tables[label].flip[s]) >> idx) & 1
        return out

    def output_values(self, flips: np.ndarray, tables) -> np.ndarray:
        """Decoded output bits (rows: fault sets)."""
        ref_out = self.reference[self.outputs].astype(np.int64)
        vals = flips[:, self.outputs].astype(np.int64) ^ ref_out
        for label in self.readouts:
            s = self.syndrome_ints(flips, label)
            fm = tables[label].flip[s]
            for o, terms in enumerate(self.output_terms):
                for lb, idx in terms:
                    if lb == label:
                        vals[:, o] ^= (fm >> idx) & 1
        return vals


@lru_cache(maxsize=32)
def fault_model(circuit: Circuit, idle: bool = True) -> FaultModel:
    return FaultModel(circuit, idle)
