"""Builders for every protocol circuit.

Gadgets write into a ``CircuitBuilder`` on caller-chosen qubits, so the same
preparation can sit inside a Bell-state circuit or an error-correction round.
Each complete builder is checked by ``ftverify`` in the test suite.
"""

from __future__ import annotations

from typing import Sequence

from .circuit import Circuit, CircuitBuilder, OutBlock, Output, Retry

# -- C4 gadgets -----------------------------------------------------------


def c4_ghz(b: CircuitBuilder, d: Sequence[int], flag: int) -> None:
    """C4 logical |00> (the 4-qubit GHZ state) with one flag.

    The only harmful single fault leaves X on d0,d2; the flag measures
    Z d0 Z d1, which that error flips.
    """
    b.px(d[0])
    b.pz(d[1], d[2], d[3], flag)
    b.cnot(d[0], d[1])
    b.cnot(d[0], d[2])
    b.cnot(d[1], d[3])
    b.cnot(d[0], flag)
    b.cnot(d[1], flag)
    b.mz(flag)


def c4_plus(b: CircuitBuilder, d: Sequence[int], flag: int) -> None:
    """C4 logical |++>: the Hadamard dual of ``c4_ghz``."""
    b.pz(d[0])
    b.px(d[1], d[2], d[3], flag)
    b.cnot(d[1], d[0])
    b.cnot(d[2], d[0])
    b.cnot(d[3], d[1])
    b.cnot(flag, d[0])
    b.cnot(flag, d[1])
    b.mx(flag)


def measure_xz4(b: CircuitBuilder, dx: Sequence[int], dz: Sequence[int], a: int, z: int) -> None:
    """Measure X^4 on ``dx`` and Z^4 on ``dz`` with two ancillas that flag each other.

    ``a`` starts in |+> and collects X^4; ``z`` starts in |0> and collects
    Z^4.  ``dx`` and ``dz`` may be the same four qubits.  The two a->z
    CNOTs cancel in the noiseless circuit but expose the faults that would
    otherwise spread to weight two.
    """
    b.px(a)
    b.pz(z)
    b.cnot(a, dx[0])
    b.cnot(dz[0], z)
    b.cnot(a, z)
    b.cnot(a, dx[1])
    b.cnot(dz[1], z)
    b.cnot(a, dx[2])
    b.cnot(dz[2], z)
    b.cnot(a, z)
    b.cnot(a, dx[3])
    b.cnot(dz[3], z)
    b.mx(a)
    b.mz(z)


def measure_z4_flagged(b: CircuitBuilder, d: Sequence[int], anc: int, flag: int) -> None:
    b.pz(anc)
    b.px(flag)
    b.cnot(d[0], anc)
    b.cnot(flag, anc)
    b.cnot(d[1], anc)
    b.cnot(d[2], anc)
    b.cnot(flag, anc)
    b.cnot(d[3], anc)
    b.mx(flag)
    b.mz(anc)


def measure_x4_flagged(b: CircuitBuilder, d: Sequence[int], anc: int, flag: int) -> None:
    b.px(anc)
    b.pz(flag)
    b.cnot(anc, d[0])
    b.cnot(anc, flag)
    b.cnot(anc, d[1])
    b.cnot(anc, d[2])
    b.cnot(anc, flag)
    b.cnot(anc, d[3])
    b.mz(flag)
    b.mx(anc)


# -- Carbon ---------------------------------------------------------------

# the hub block's |++> fans out into the two GHZ blocks; these relabelings
# on the middle and bottom blocks then land exactly on the Carbon code
CARBON_PERM_MID = (0, 2, 3, 1)
CARBON_PERM_LOW = (0, 3, 1, 2)


def carbon_00_core(b: CircuitBuilder, d: Sequence[int], flags: Sequence[int]) -> None:
    """Flagged C4 preparations, inter-block CNOTs and relabeling, no final checks."""
    top, mid, low = d[0:4], d[4:8], d[8:12]
    c4_ghz(b, top, flags[0])
    c4_plus(b, mid, flags[1])
    c4_ghz(b, low, flags[2])
    for i in range(4):
        b.cnot(mid[i], top[i])
    for i in range(4):
        b.cnot(mid[i], low[i])
    b.perm(mid, CARBON_PERM_MID)
    b.perm(low, CARBON_PERM_LOW)


def carbon_00_checks(b: CircuitBuilder, d: Sequence[int], anc: Sequence[int]) -> None:
    """X^4 and Z^4 on the middle block, flagged Z^4 on the bottom block."""
    mid, low = d[4:8], d[8:12]
    measure_xz4(b, mid, mid, anc[0], anc[1])
    measure_z4_flagged(b, low, anc[2], anc[3])


def carbon_hadamard(b: CircuitBuilder, d: Sequence[int]) -> None:
    """Transversal H plus the relabeling that maps the code back onto itself.

    Turns logical |00> into |++>.
    """
    b.h(*d)
    b.perm(d[4:8], CARBON_PERM_MID)
    b.perm(d[8:12], CARBON_PERM_LOW)


def carbon_00(b: CircuitBuilder, d: Sequence[int], anc: Sequence[int]) -> None:
    """Verified Carbon |00> on 12 data qubits using 7 ancillas (3 flags + 4 check qubits)."""
    carbon_00_core(b, d, anc[0:3])
    carbon_00_checks(b, d, anc[3:7])


def carbon_pp(b: CircuitBuilder, d: Sequence[int], anc: Sequence[int]) -> None:
    carbon_00(b, d, anc)
    carbon_hadamard(b, d)


def _finish(b: CircuitBuilder, blocks: Sequence[tuple[str, Sequence[int]]]) -> Circuit:
    for label, qs in blocks:
        b.outblocks.append(OutBlock(label, b.code, tuple(qs)))
    return b.build()


def carbon_prep_00() -> Circuit:
    b = CircuitBuilder(19, name="carbon_prep_00", code="carbon")
    carbon_00(b, range(12), range(12, 19))
    return _finish(b, [("out", range(12))])


def carbon_prep_pp() -> Circuit:
    b = CircuitBuilder(19, name="carbon_prep_pp", code="carbon")
    carbon_pp(b, range(12), range(12, 19))
    return _finish(b, [("out", range(12))])


def carbon_bell_core(b: CircuitBuilder, top: Sequence[int], bot: Sequence[int], anc: Sequence[int]) -> None:
    """Two logical Bell pairs between ``top`` and ``bot``; uses 12 ancillas."""
    carbon_00_core(b, top, anc[0:3])
    carbon_hadamard(b, top)
    carbon_00_core(b, bot, anc[3:6])
    for i in range(12):
        b.cnot(top[i], bot[i])
    for k in range(3):
        blk = slice(4 * k, 4 * k + 4)
        measure_xz4(b, top[blk], bot[blk], anc[6 + 2 * k], anc[7 + 2 * k])


def carbon_bell_prep() -> Circuit:
    b = CircuitBuilder(36, name="carbon_bell_prep", code="carbon")
    carbon_bell_core(b, range(12), range(12, 24), range(24, 36))
    return _finish(b, [("top", range(12)), ("bot", range(12, 24))])


def carbon_bell(basis: str) -> Circuit:
    """Bell preparation followed by transversal readout of both blocks."""
    b = CircuitBuilder(36, name=f"carbon_bell_{basis}", code="carbon")
    top, bot = list(range(12)), list(range(12, 24))
    carbon_bell_core(b, top, bot, range(24, 36))
    b.readout("top", "carbon", basis, top)
    b.readout("bot", "carbon", basis, bot)
    b.outputs.extend([Output("p0", ("top.0", "bot.0")), Output("p1", ("top.1", "bot.1"))])
    return b.build()


def teleport_ec_round(
    b: CircuitBuilder, r0: Sequence[int], r1: Sequence[int], anc: Sequence[int], tag: str, wait_first: bool
) -> tuple[str, str]:
    """Two 1-bit teleportations: data enters in ``r0`` and leaves in ``r0``.

    Step A teleports through a fresh |++> in ``r1`` and reads ``r0`` in Z
    (X-type frame, X-error syndrome).  Step B teleports back through a fresh
    |00> in ``r0`` and reads ``r1`` in X (Z-type frame, Z-error syndrome).
    Returns the two readout labels.
    """
    carbon_pp(b, r1, anc)
    if wait_first:
        b.tick(*r0)
    for i in range(12):
        b.cnot(r1[i], r0[i])
    la = f"A{tag}"
    b.readout(la, "carbon", "Z", r0)
    carbon_00(b, r0, anc)
    b.tick(*r1)
    for i in range(12):
        b.cnot(r1[i], r0[i])
    lb = f"B{tag}"
    b.readout(lb, "carbon", "X", r1)
    return la, lb


def repeated_ec(rounds: int, basis: str = "Z") -> Circuit:
    """Logical |00> (Z basis) or |++> (X basis), ``rounds`` EC rounds, transversal readout.

    The idle windows of the data block number ``2 * rounds - 1``.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    b = CircuitBuilder(31, name=f"repeated_ec_r{rounds}_{basis}", code="carbon")
    r0, r1, anc = list(range(12)), list(range(12, 24)), list(range(24, 31))
    (carbon_00 if basis == "Z" else carbon_pp)(b, r0, anc)
    frames = []
    for k in range(1, rounds + 1):
        la, lb = teleport_ec_round(b, r0, r1, anc, str(k), wait_first=k > 1)
        frames.append(la if basis == "Z" else lb)
    b.readout("F", "carbon", basis, r0)
    for j in range(2):
        b.outputs.append(Output(f"q{j}", (f"F.{j}",) + tuple(f"{f}.{j}" for f in frames)))
    return b.build()


# -- Steane ---------------------------------------------------------------

STEANE_ROWS = ((3, 4, 5, 6), (1, 2, 5, 6), (0, 2, 4, 6))
# pivot of each row, then the fan-out order; chosen so that a single
# verification of the logical Z leaves at most weight-one errors
GOTO_CNOTS = ((3, 6), (0, 6), (1, 2), (3, 4), (0, 2), (3, 5), (0, 4), (1, 6), (1, 5))
GOTO_ZL = (0, 5, 6)
_GOTO_PIVOTS = (0, 1, 3)


def goto_zero(b: CircuitBuilder, d: Sequence[int], anc: int) -> None:
    """Encode Steane |0> and verify it by measuring a weight-3 logical Z."""
    b.pz(*[d[q] for q in range(7) if q not in _GOTO_PIVOTS])
    b.px(*[d[q] for q in _GOTO_PIVOTS])
    for c, t in GOTO_CNOTS:
        b.cnot(d[c], d[t])
    b.pz(anc)
    for q in GOTO_ZL:
        b.cnot(d[q], anc)
    b.mz(anc)


def goto_prep_steane() -> Circuit:
    b = CircuitBuilder(8, name="goto_prep_steane", code="steane")
    goto_zero(b, range(7), 7)
    b.retries.append(Retry(0, len(b.instructions), 3))
    return _finish(b, [("out", range(7))])


def steane_syndrome_round(b: CircuitBuilder, d: Sequence[int], anc: Sequence[int]) -> None:
    """All six Steane generators, measured in (X, Z) pairs on shared supports."""
    for row in STEANE_ROWS:
        qs = [d[q] for q in row]
        measure_xz4(b, qs, qs, anc[0], anc[1])


def steane_flagged_syndrome_round() -> Circuit:
    """Verified |0> followed by one flagged syndrome round (10 qubits)."""
    b = CircuitBuilder(10, name="steane_flagged_syndrome_round", code="steane")
    goto_zero(b, range(7), 7)
    steane_syndrome_round(b, range(7), (8, 9))
    return _finish(b, [("out", range(7))])


def _steane_measure(b: CircuitBuilder, label: str, d: Sequence[int], basis: str) -> None:
    if basis == "Y":
        # S^3 H maps Y onto Z, qubit by qubit
        for _ in range(3):
            b.s(*d)
        b.h(*d)
        b.readout(label, "steane", "Z", d)
    else:
        b.readout(label, "steane", basis, d)


def steane_bell(basis: str) -> Circuit:
    """Two verified |0> blocks, transversal H and CNOT, flagged rounds, readout."""
    b = CircuitBuilder(20, name=f"steane_bell_{basis}", code="steane")
    top, bot = list(range(7)), list(range(10, 17))
    for d, anc in ((top, 7), (bot, 17)):
        start = len(b.instructions)
        goto_zero(b, d, anc)
        b.retries.append(Retry(start, len(b.instructions), 3))
    b.h(*top)
    for i in range(7):
        b.cnot(top[i], bot[i])
    steane_syndrome_round(b, top, (8, 9))
    steane_syndrome_round(b, bot, (18, 19))
    _steane_measure(b, "top", top, basis)
    _steane_measure(b, "bot", bot, basis)
    b.outputs.append(Output("p0", ("top.0", "bot.0")))
    return b.build()


def steane_bell_prep() -> Circuit:
    """Steane Bell pair with its checks, open output blocks (for verification)."""
    b = CircuitBuilder(20, name="steane_bell_prep", code="steane")
    top, bot = list(range(7)), list(range(10, 17))
    goto_zero(b, top, 7)
    goto_zero(b, bot, 17)
    b.h(*top)
    for i in range(7):
        b.cnot(top[i], bot[i])
    steane_syndrome_round(b, top, (8, 9))
    steane_syndrome_round(b, bot, (18, 19))
    return _finish(b, [("top", top), ("bot", bot)])


# -- unencoded baselines ----------------------------------------------------


def physical_bell(basis: str, pairs: int = 1) -> Circuit:
    """``pairs`` unencoded Bell pairs measured in ``basis`` (X, Y or Z)."""
    n = 2 * pairs
    b = CircuitBuilder(n, name=f"physical_bell_{basis}_{pairs}")
    for k in range(pairs):
        b.px(2 * k)
        b.pz(2 * k + 1)
        b.cnot(2 * k, 2 * k + 1)
    if basis == "Y":
        for _ in range(3):
            b.s(*range(n))
        b.h(*range(n))
    mb = "X" if basis == "X" else "Z"
    bits = [b.measure(mb, q, "logical") for q in range(n)]
    for k in range(pairs):
        b.outputs.append(Output(f"p{k}", (f"raw c{bits[2 * k]}", f"raw c{bits[2 * k + 1]}")))
    return b.build()


def physical_baseline(kind: str, rounds: int, basis: str = "Z") -> Circuit:
    """Unencoded analog of ``repeated_ec``: two qubits, ``rounds`` repetitions.

    ``two_cnots`` applies CNOT twice per round; ``two_teleports`` moves each
    qubit through a fresh |+> (Z readout) and then a fresh |0> (X readout).
    Both have the same ``2 * rounds - 1`` idle windows as the encoded circuit.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if basis not in ("X", "Z"):
        raise ValueError("basis must be X or Z")
    prep = CircuitBuilder.pz if basis == "Z" else CircuitBuilder.px
    if kind == "two_cnots":
        b = CircuitBuilder(2, name=f"baseline_cnot_r{rounds}_{basis}")
        prep(b, 0, 1)
        for k in range(2 * rounds):
            if k:
                b.tick(0, 1)
            b.cnot(0, 1)
        bits = [b.measure(basis, q, "logical") for q in (0, 1)]
        b.outputs.extend(Output(f"q{j}", (f"raw c{bits[j]}",)) for j in range(2))
        return b.build()
    if kind != "two_teleports":
        raise ValueError(f"unknown baseline {kind!r}")
    b = CircuitBuilder(4, name=f"baseline_teleport_r{rounds}_{basis}")
    # logical qubit j lives on register pair (j, j + 2)
    r0, r1 = [0, 1], [2, 3]
    prep(b, *r0)
    frames: list[list[int]] = [[], []]
    for k in range(rounds):
        b.px(*r1)
        if k:
            b.tick(*r0)
        for j in range(2):
            b.cnot(r1[j], r0[j])
        za = [b.mz(r0[j], "frame") for j in range(2)]
        b.pz(*r0)
        b.tick(*r1)
        for j in range(2):
            b.cnot(r1[j], r0[j])
        xb = [b.mx(r1[j], "frame") for j in range(2)]
        for j in range(2):
            frames[j].append(za[j] if basis == "Z" else xb[j])
    bits = [b.measure(basis, r0[j], "logical") for j in range(2)]
    for j in range(2):
        b.outputs.append(Output(f"q{j}", (f"raw c{bits[j]}",) + tuple(f"raw c{c}" for c in frames[j])))
    return b.build()


CIRCUITS = {
    "carbon_prep_00": carbon_prep_00,
    "carbon_prep_pp": carbon_prep_pp,
    "carbon_bell_prep": carbon_bell_prep,
    "goto_prep_steane": goto_prep_steane,
    "steane_flagged_syndrome_round": steane_flagged_syndrome_round,
    "steane_bell_prep": steane_bell_prep,
    "ec_round": lambda: repeated_ec(1, "Z"),
    "ec_round_x": lambda: repeated_ec(1, "X"),
}


def get_circuit(name: str) -> Circuit:
    """Builder output by name; also accepts parameterized names such as
    ``repeated_ec_r2_Z``, ``carbon_bell_X``, ``steane_bell_Y``,
    ``baseline_cnot_r3_Z``, ``baseline_teleport_r1_X`` and ``physical_bell_Z_2``.
    """
    if name in CIRCUITS:
        return CIRCUITS[name]()
    parts = name.split("_")
    try:
        if name.startswith("repeated_ec_r"):
            return repeated_ec(int(parts[2][1:]), parts[3])
        if name.startswith("carbon_bell_"):
            return carbon_bell(parts[2])
        if name.startswith("steane_bell_"):
            return steane_bell(parts[2])
        if name.startswith("baseline_cnot_r"):
            return physical_baseline("two_cnots", int(parts[2][1:]), parts[3])
        if name.startswith("baseline_teleport_r"):
            return physical_baseline("two_teleports", int(parts[2][1:]), parts[3])
        if name.startswith("physical_bell_"):
            return physical_bell(parts[2], int(parts[3]))
    except (IndexError, ValueError):
        pass
    raise ValueError(f"unknown circuit {name!r}; known: {', '.join(sorted(CIRCUITS))} (plus parameterized forms)")
