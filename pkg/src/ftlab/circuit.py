"""Circuit intermediate representation and its plain-text format.

A circuit is a flat list of instructions over ``n_qubits`` qubits, all of
which start in ``|0>``.  Measurement ``k`` (in instruction order) writes
classical bit ``c<k>``.  Besides the instructions a circuit carries
metadata that downstream analysis needs:

* ``roles``: every classical bit is ``pre-select`` (must read 0 for the
  shot to be accepted), ``decode`` (part of a destructive block readout),
  ``logical`` (raw bit used directly as an outcome) or ``frame`` (raw bit
  used as a Pauli-frame update).
* ``readouts``: transversal block measurements that get decoded.
* ``outblocks``: qubits holding an encoded output state.
* ``outputs``: classical parities whose noiseless value is deterministic
  and which define success of a shot.
* ``retries``: repeat-until-success regions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

KINDS = ("PREP_Z", "PREP_X", "H", "S", "CNOT", "PERMUTE", "MEAS_Z", "MEAS_X", "TICK")
MNEMONIC = {
    "PREP_Z": "PZ",
    "PREP_X": "PX",
    "H": "H",
    "S": "S",
    "CNOT": "CNOT",
    "PERMUTE": "PERM",
    "MEAS_Z": "MZ",
    "MEAS_X": "MX",
    "TICK": "TICK",
}
KIND_OF = {v: k for k, v in MNEMONIC.items()}
ROLES = ("pre-select", "decode", "logical", "frame")
MEASUREMENTS = ("MEAS_Z", "MEAS_X")
PREPS = ("PREP_Z", "PREP_X")


class CircuitError(ValueError):
    """Invalid circuit structure."""


class ParseError(CircuitError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Instruction:
    kind: str
    qubits: tuple[int, ...] = ()
    cbit: int | None = None
    # PERMUTE only: the state at operand position j moves to position perm[j]
    perm: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        check_instruction(self)

    @property
    def is_measurement(self) -> bool:
        return self.kind in MEASUREMENTS


def check_instruction(ins: Instruction) -> None:
    k, q = ins.kind, ins.qubits
    if k not in KINDS:
        raise CircuitError(f"unknown instruction kind {k!r}")
    if len(set(q)) != len(q):
        raise CircuitError("distinct operands required")
    if any(x < 0 for x in q):
        raise CircuitError("negative qubit index")
    if k == "CNOT" and len(q) != 2:
        raise CircuitError("CNOT takes exactly 2 operands")
    if k in ("PREP_Z", "PREP_X", "H", "S", "MEAS_Z", "MEAS_X") and len(q) != 1:
        raise CircuitError(f"{MNEMONIC[k]} takes exactly 1 operand")
    if k == "PERMUTE":
        if len(q) < 2:
            raise CircuitError("PERM needs at least 2 operands")
        if ins.perm is None or sorted(ins.perm) != list(range(len(q))):
            raise CircuitError("PERM needs a permutation of its operand positions")
    elif ins.perm is not None:
        raise CircuitError("only PERM carries a permutation")
    if ins.is_measurement:
        if ins.cbit is None:
            raise CircuitError("measurement needs a classical target")
    elif ins.cbit is not None:
        raise CircuitError("only measurements have classical targets")


@dataclass(frozen=True)
class Readout:
    """Transversal destructive measurement of a code block."""

    label: str
    code: str
    basis: str  # "Z" or "X"
    cbits: tuple[int, ...]


@dataclass(frozen=True)
class OutBlock:
    label: str
    code: str
    qubits: tuple[int, ...]


@dataclass(frozen=True)
class Output:
    """XOR of terms: ``"A.1"`` is decoded logical 1 of readout A, ``"raw c5"`` a raw bit."""

    name: str
    terms: tuple[str, ...]


@dataclass(frozen=True)
class Retry:
    """Instructions ``start..stop-1`` are retried up to ``attempts`` times.

    An attempt fails when any pre-select bit measured inside the region
    reads 1; the region must prepare its qubits from scratch.
    """

    start: int
    stop: int
    attempts: int


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    instructions: tuple[Instruction, ...]
    name: str = ""
    code: str = ""
    roles: tuple[tuple[int, str], ...] = ()
    readouts: tuple[Readout, ...] = ()
    outblocks: tuple[OutBlock, ...] = ()
    outputs: tuple[Output, ...] = ()
    retries: tuple[Retry, ...] = ()

    def __post_init__(self) -> None:
        validate_circuit(self)

    @property
    def n_measurements(self) -> int:
        return sum(1 for ins in self.instructions if ins.is_measurement)

    def role(self, cbit: int) -> str:
        return dict(self.roles)[cbit]

    def bits_with_role(self, role: str) -> list[int]:
        return [c for c, r in self.roles if r == role]

    def readout(self, label: str) -> Readout:
        for r in self.readouts:
            if r.label == label:
                return r
        raise KeyError(label)

    def count(self, kind: str) -> int:
        return sum(1 for ins in self.instructions if ins.kind == kind)

    def measurement_instructions(self) -> list[int]:
        return [i for i, ins in enumerate(self.instructions) if ins.is_measurement]

    def replace(self, **kw) -> "Circuit":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(kw)
        return Circuit(**d)


def _parse_term(term: str) -> tuple[str, str, int]:
    """``"A.1"`` -> ("readout", "A", 1); ``"raw c5"`` -> ("raw", "", 5)."""
    if term.startswith("raw c"):
        return "raw", "", int(term[5:])
    label, _, idx = term.rpartition(".")
    return "readout", label, int(idx)


def validate_circuit(c: Circuit) -> None:
    if c.n_qubits < 1:
        raise CircuitError("circuit needs at least one qubit")
    n_meas = 0
    meas_basis = {}
    for i, ins in enumerate(c.instructions):
        if not isinstance(ins, Instruction):
            raise CircuitError(f"instruction {i} is not an Instruction")
        if any(q >= c.n_qubits for q in ins.qubits):
            raise CircuitError(f"instruction {i}: qubit index out of range (n_qubits={c.n_qubits})")
        if ins.is_measurement:
            if ins.cbit != n_meas:
                raise CircuitError(f"instruction {i}: measurement {n_meas} must write c{n_meas}, got c{ins.cbit}")
            meas_basis[ins.cbit] = "Z" if ins.kind == "MEAS_Z" else "X"
            n_meas += 1
    role_of = {}
    for cb, r in c.roles:
        if r not in ROLES:
            raise CircuitError(f"unknown role {r!r}")
        if cb in role_of:
            raise CircuitError(f"role conflict on c{cb}")
        if cb not in meas_basis:
            raise CircuitError(f"role for unmeasured bit c{cb}")
        role_of[cb] = r
    missing = sorted(set(meas_basis) - set(role_of))
    if missing:
        raise CircuitError(f"bits without a role: {', '.join(f'c{b}' for b in missing)}")
    seen = {}
    for ro in c.readouts:
        if ro.label in seen:
            raise CircuitError(f"duplicate readout {ro.label}")
        if ro.basis not in ("X", "Z"):
            raise CircuitError(f"readout {ro.label}: basis must be X or Z")
        for cb in ro.cbits:
            if role_of.get(cb) != "decode":
                raise CircuitError(f"readout {ro.label}: c{cb} must have role decode")
            if meas_basis[cb] != ro.basis:
                raise CircuitError(f"readout {ro.label}: c{cb} measured in the wrong basis")
            if cb in seen.values():
                raise CircuitError(f"c{cb} belongs to two readouts")
        seen[ro.label] = ro.cbits
    for ob in c.outblocks:
        if any(q >= c.n_qubits for q in ob.qubits):
            raise CircuitError(f"outblock {ob.label}: qubit out of range")
    labels = {ro.label for ro in c.readouts}
    for out in c.outputs:
        for t in out.terms:
            try:
                kind, label, idx = _parse_term(t)
            except ValueError:
                raise CircuitError(f"output {out.name}: bad term {t!r}") from None
            if kind == "raw" and idx not in meas_basis:
                raise CircuitError(f"output {out.name}: c{idx} is not measured")
            if kind == "readout" and label not in labels:
                raise CircuitError(f"output {out.name}: unknown readout {label}")
    for rt in c.retries:
        if not (0 <= rt.start < rt.stop <= len(c.instructions)) or rt.attempts < 1:
            raise CircuitError(f"bad retry region {rt}")


# -- text format ----------------------------------------------------------


def _cycles(perm: Sequence[int]) -> list[list[int]]:
    seen = set()
    out = []
    for s in range(len(perm)):
        if s in seen or perm[s] == s:
            continue
        cyc = [s]
        seen.add(s)
        j = perm[s]
        while j != s:
            cyc.append(j)
            seen.add(j)
            j = perm[j]
        out.append(cyc)
    return out


def emit_instruction(ins: Instruction) -> str:
    m = MNEMONIC[ins.kind]
    if ins.kind == "PERMUTE":
        cyc = "".join("(" + " ".join(map(str, c)) + ")" for c in _cycles(ins.perm)) or "()"
        return f"PERM {cyc} ON " + " ".join(map(str, ins.qubits))
    if ins.is_measurement:
        return f"{m} {ins.qubits[0]} -> c{ins.cbit}"
    return " ".join([m, *map(str, ins.qubits)])


def emit(c: Circuit) -> str:
    lines = []
    if c.name:
        lines.append(f"NAME {c.name}")
    lines.append(f"QUBITS {c.n_qubits}")
    if c.code:
        lines.append(f"CODE {c.code}")
    for ob in c.outblocks:
        lines.append(f"OUTBLOCK {ob.label} {ob.code} " + " ".join(map(str, ob.qubits)))
    for ro in c.readouts:
        lines.append(f"READOUT {ro.label} {ro.code} {ro.basis} " + " ".join(f"c{b}" for b in ro.cbits))
    for out in c.outputs:
        lines.append(f"OUTPUT {out.name} " + ", ".join(out.terms))
    for rt in c.retries:
        lines.append(f"RETRY {rt.start} {rt.stop} {rt.attempts}")
    for cb, r in sorted(c.roles):
        lines.append(f"ROLE c{cb} {r}")
    lines.extend(emit_instruction(ins) for ins in c.instructions)
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(r"\(|\)|->|,|[^\s(),]+")


def _tokens(text: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in _TOKEN.finditer(text)]


class _Line:
    def __init__(self, text: str, lineno: int):
        self.toks = _tokens(text)
        self.pos = 0
        self.lineno = lineno
        self.end_col = len(text) + 1

    def error(self, msg: str, col: int | None = None) -> ParseError:
        if col is None:
            col = self.toks[self.pos][1] if self.pos < len(self.toks) else self.end_col
        return ParseError(msg, self.lineno, col)

    def peek(self) -> str | None:
        return self.toks[self.pos][0] if self.pos < len(self.toks) else None

    def next(self, what: str) -> tuple[str, int]:
        if self.pos >= len(self.toks):
            raise self.error(f"expected {what}")
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def int(self, what: str = "integer") -> int:
        tok, col = self.next(what)
        if not tok.isdigit():
            raise ParseError(f"expected {what}, got {tok!r}", self.lineno, col)
        return int(tok)

    def cbit(self) -> int:
        tok, col = self.next("classical bit")
        if not re.fullmatch(r"c\d+", tok):
            raise ParseError(f"expected classical bit like c3, got {tok!r}", self.lineno, col)
        return int(tok[1:])

    def rest_ints(self, what: str = "qubit index") -> list[int]:
        out = []
        while self.peek() is not None:
            out.append(self.int(what))
        return out

    def done(self) -> None:
        if self.pos < len(self.toks):
            raise self.error(f"unexpected token {self.toks[self.pos][0]!r}")


def parse(text: str) -> Circuit:
    name = code = ""
    n_qubits = None
    roles: list[tuple[int, str]] = []
    readouts: list[Readout] = []
    outblocks: list[OutBlock] = []
    outputs: list[Output] = []
    retries: list[Retry] = []
    instructions: list[Instruction] = []
    role_seen: dict[int, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        ln = _Line(body, lineno)
        head, hcol = ln.next("keyword")
        key = head.upper()
        try:
            if key == "NAME":
                name = ln.next("name")[0]
            elif key == "CODE":
                code = ln.next("code name")[0]
            elif key == "QUBITS":
                if n_qubits is not None:
                    raise ln.error("QUBITS given twice", hcol)
                n_qubits = ln.int("qubit count")
            elif key == "ROLE":
                cb = ln.cbit()
                r, rcol = ln.next("role")
                if r not in ROLES:
                    raise ParseError(f"unknown role {r!r}; expected one of {', '.join(ROLES)}", lineno, rcol)
                if cb in role_seen:
                    raise ln.error(f"role conflict: c{cb} already has a role (line {role_seen[cb]})", hcol)
                role_seen[cb] = lineno
                roles.append((cb, r))
            elif key == "READOUT":
                label = ln.next("label")[0]
                cname = ln.next("code name")[0]
                basis, bcol = ln.next("basis")
                if basis not in ("X", "Z"):
                    raise ParseError("readout basis must be X or Z", lineno, bcol)
                bits = []
                while ln.peek() is not None:
                    bits.append(ln.cbit())
                readouts.append(Readout(label, cname, basis, tuple(bits)))
            elif key == "OUTBLOCK":
                label = ln.next("label")[0]
                cname = ln.next("code name")[0]
                outblocks.append(OutBlock(label, cname, tuple(ln.rest_ints())))
            elif key == "OUTPUT":
                oname = ln.next("output name")[0]
                terms = []
                cur: list[str] = []
                while ln.peek() is not None:
                    tok, _ = ln.next("term")
                    if tok == ",":
                        terms.append(" ".join(cur))
                        cur = []
                    else:
                        cur.append(tok)
                if cur:
                    terms.append(" ".join(cur))
                outputs.append(Output(oname, tuple(terms)))
            elif key == "RETRY":
                retries.append(Retry(ln.int("start"), ln.int("stop"), ln.int("attempts")))
            elif key in KIND_OF:
                instructions.append(_parse_instruction(KIND_OF[key], ln))
            else:
                raise ParseError(f"unknown keyword {head!r}", lineno, hcol)
            ln.done()
        except ParseError:
            raise
        except CircuitError as e:
            raise ParseError(str(e), lineno, hcol) from None
    if n_qubits is None:
        raise ParseError("missing QUBITS header", 1, 1)
    try:
        return Circuit(
            n_qubits=n_qubits,
            instructions=tuple(instructions),
            name=name,
            code=code,
            roles=tuple(sorted(roles)),
            readouts=tuple(readouts),
            outblocks=tuple(outblocks),
            outputs=tuple(outputs),
            retries=tuple(retries),
        )
    except CircuitError as e:
        # locate the first offending instruction if the message names one
        m = re.match(r"instruction (\d+)", str(e))
        line = 1
        if m:
            line = _instruction_line(text, int(m.group(1)))
        raise ParseError(str(e), line, 1) from None


def _instruction_line(text: str, index: int) -> int:
    k = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].split()
        if body and body[0].upper() in KIND_OF:
            k += 1
            if k == index:
                return lineno
    return 1


def _parse_instruction(kind: str, ln: _Line) -> Instruction:
    if kind == "PERMUTE":
        cycles: list[list[int]] = []
        while ln.peek() == "(":
            ln.next("(")
            cyc = []
            while ln.peek() not in (")", None):
                cyc.append(ln.int("position"))
            if ln.peek() is None:
                raise ln.error("unclosed '('")
            ln.next(")")
            cycles.append(cyc)
        tok, col = ln.next("ON")
        if tok.upper() != "ON":
            raise ParseError(f"expected ON, got {tok!r}", ln.lineno, col)
        qubits = ln.rest_ints()
        perm = list(range(len(qubits)))
        used: set[int] = set()
        for cyc in cycles:
            for a in cyc:
                if a >= len(qubits):
                    raise ln.error(f"cycle position {a} exceeds operand count {len(qubits)}", col)
                if a in used:
                    raise ln.error(f"position {a} appears twice in cycles", col)
                used.add(a)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                perm[a] = b
        return Instruction(kind, tuple(qubits), perm=tuple(perm))
    if kind in MEASUREMENTS:
        q = ln.int()
        tok, col = ln.next("->")
        if tok != "->":
            raise ParseError(f"expected '->', got {tok!r}", ln.lineno, col)
        return Instruction(kind, (q,), cbit=ln.cbit())
    return Instruction(kind, tuple(ln.rest_ints()))


# -- builder --------------------------------------------------------------


@dataclass
class CircuitBuilder:
    """Mutable helper for assembling circuits; ``build()`` freezes it."""

    n_qubits: int
    name: str = ""
    code: str = ""
    instructions: list[Instruction] = field(default_factory=list)
    roles: dict[int, str] = field(default_factory=dict)
    readouts: list[Readout] = field(default_factory=list)
    outblocks: list[OutBlock] = field(default_factory=list)
    outputs: list[Output] = field(default_factory=list)
    retries: list[Retry] = field(default_factory=list)
    n_meas: int = 0

    def _add(self, kind: str, *qubits: int, perm=None) -> None:
        self.instructions.append(Instruction(kind, tuple(qubits), perm=perm))

    def pz(self, *qs: int) -> None:
        for q in qs:
            self._add("PREP_Z", q)

    def px(self, *qs: int) -> None:
        for q in qs:
            self._add("PREP_X", q)

    def h(self, *qs: int) -> None:
        for q in qs:
            self._add("H", q)

    def s(self, *qs: int) -> None:
        for q in qs:
            self._add("S", q)

    def cnot(self, c: int, t: int) -> None:
        self._add("CNOT", c, t)

    def cnots(self, pairs: Iterable[tuple[int, int]]) -> None:
        for c, t in pairs:
            self.cnot(c, t)

    def perm(self, qubits: Sequence[int], perm: Sequence[int]) -> None:
        self._add("PERMUTE", *qubits, perm=tuple(perm))

    def tick(self, *qs: int) -> None:
        self._add("TICK", *qs)

    def measure(self, basis: str, q: int, role: str) -> int:
        kind = "MEAS_Z" if basis == "Z" else "MEAS_X"
        cb = self.n_meas
        self.instructions.append(Instruction(kind, (q,), cbit=cb))
        self.roles[cb] = role
        self.n_meas += 1
        return cb

    def mz(self, q: int, role: str = "pre-select") -> int:
        return self.measure("Z", q, role)

    def mx(self, q: int, role: str = "pre-select") -> int:
        return self.measure("X", q, role)

    def readout(self, label: str, code: str, basis: str, qubits: Sequence[int]) -> Readout:
        bits = tuple(self.measure(basis, q, "decode") for q in qubits)
        ro = Readout(label, code, basis, bits)
        self.readouts.append(ro)
        return ro

    def build(self) -> Circuit:
        return Circuit(
            n_qubits=self.n_qubits,
            instructions=tuple(self.instructions),
            name=self.name,
            code=self.code,
            roles=tuple(sorted(self.roles.items())),
            readouts=tuple(self.readouts),
            outblocks=tuple(self.outblocks),
            outputs=tuple(self.outputs),
            retries=tuple(self.retries),
        )
