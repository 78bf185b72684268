import numpy as np
import pytest

from ftlab import builders
from ftlab.circuit import Circuit, CircuitBuilder, CircuitError, Instruction, ParseError, emit, parse
from ftlab.codes import get_code
from ftlab.pauli import PauliOperator
from ftlab.sampling import reference_outcomes, run_tableau
from ftlab.tableau import Tableau

ALL_BUILDERS = sorted(builders.CIRCUITS) + [
    "repeated_ec_r2_Z", "repeated_ec_r3_X", "carbon_bell_X", "carbon_bell_Z",
    "steane_bell_X", "steane_bell_Y", "steane_bell_Z",
    "baseline_cnot_r3_Z", "baseline_teleport_r2_X", "physical_bell_Y_1", "physical_bell_Z_2",
]


@pytest.mark.parametrize("name", ALL_BUILDERS)
def test_roundtrip(name):
    c = builders.get_circuit(name)
    text = emit(c)
    c2 = parse(text)
    assert c2 == c
    assert emit(c2) == text


def test_roundtrip_ignores_whitespace_and_comments():
    text = emit(builders.carbon_prep_00())
    noisy = "# header\n" + "\n".join("  " + ln.replace(" ", "   ") + "   # c" for ln in text.splitlines())
    assert parse(noisy) == builders.carbon_prep_00()


def test_distinct_operands():
    with pytest.raises(ParseError, match="distinct operands required") as e:
        parse("QUBITS 4\nCNOT 3 3\n")
    assert e.value.line == 2


def test_syntax_error_location():
    with pytest.raises(ParseError) as e:
        parse("QUBITS 4\nH 0\nMZ 1 => c0\n")
    assert e.value.line == 3 and e.value.col > 1


def test_role_conflict_and_range():
    with pytest.raises(ParseError, match="role conflict"):
        parse("QUBITS 1\nROLE c0 pre-select\nROLE c0 logical\nMZ 0 -> c0\n")
    with pytest.raises(ParseError, match="out of range"):
        parse("QUBITS 2\nH 2\n")
    with pytest.raises(CircuitError, match="without a role"):
        parse("QUBITS 1\nMZ 0 -> c0\n")


def test_instruction_arity():
    with pytest.raises(CircuitError):
        Instruction("CNOT", (1,))
    with pytest.raises(CircuitError):
        Instruction("PERMUTE", (0,), perm=(0,))


def test_perm_cycle_semantics():
    c = parse("QUBITS 8\nPERM (0 3 1 2) ON 4 5 6 7\n")
    ins = c.instructions[0]
    assert ins.qubits == (4, 5, 6, 7)
    # position 0 -> 3, 3 -> 1, 1 -> 2, 2 -> 0
    assert ins.perm == (3, 2, 0, 1)
    # an X on qubit 4 (position 0) ends on qubit 7 (position 3)
    t = Tableau(8)
    t.h(4)
    t.permute(ins.qubits, ins.perm)
    assert t.expectation(PauliOperator.single(8, 7, "X")) == 1
    assert emit(c).splitlines()[-1] == "PERM (0 3 1 2) ON 4 5 6 7"


def test_permute_is_relabeling():
    """Simulating then permuting equals permuting the operand list of later gates."""
    b1 = CircuitBuilder(3)
    b1.px(0)
    b1.cnot(0, 1)
    b1.perm([0, 1, 2], [2, 0, 1])
    b1.h(2)
    b2 = CircuitBuilder(3)
    b2.px(2)
    b2.cnot(2, 0)
    b2.h(2)
    _, t1 = run_tableau(b1.build())
    _, t2 = run_tableau(b2.build())
    for g in t1.stabilizers():
        assert t2.expectation(g) == 1


def _stabilized(circuit: Circuit, ob, extra=()):
    _, tab = run_tableau(circuit)
    code = get_code(ob.code)
    ops = list(code.generators) + list(extra)
    return all(tab.expectation(g.embed(circuit.n_qubits, ob.qubits)) == 1 for g in ops)


def test_carbon_prep_targets():
    c = builders.carbon_prep_00()
    code = get_code("carbon")
    assert _stabilized(c, c.outblocks[0], code.logical_z)
    c = builders.carbon_prep_pp()
    assert _stabilized(c, c.outblocks[0], code.logical_x)


def test_carbon_prep_counts():
    for c in (builders.carbon_prep_00(), builders.carbon_prep_pp()):
        assert c.n_qubits <= 21 and c.count("CNOT") <= 40
        assert c.bits_with_role("pre-select") == list(range(c.n_measurements))
    bell = builders.carbon_bell_prep()
    assert bell.n_qubits <= 38


def test_goto_prep_structure():
    c = builders.goto_prep_steane()
    assert c.n_qubits == 8 and c.n_measurements == 1
    assert c.bits_with_role("pre-select") == [0]
    code = get_code("steane")
    assert _stabilized(c, c.outblocks[0], code.logical_z)
    assert reference_outcomes(c) == ["0"]


def test_steane_round_structure():
    c = builders.steane_flagged_syndrome_round()
    assert c.n_qubits == 10  # 7 data + 3 ancillas
    assert set(reference_outcomes(c)) == {"0"}
    assert set(c.role(b) for b in range(c.n_measurements)) == {"pre-select"}


def test_bell_prep_correlations():
    c = builders.carbon_bell_prep()
    _, tab = run_tableau(c)
    code = get_code("carbon")
    top, bot = (ob.qubits for ob in c.outblocks)
    for j in range(2):
        zz = code.logical_z[j].embed(36, top)
        zz = PauliOperator(36, 0, zz.z | code.logical_z[j].embed(36, bot).z)
        xx = PauliOperator(36, code.logical_x[j].embed(36, top).x | code.logical_x[j].embed(36, bot).x, 0)
        assert tab.expectation(zz) == 1 and tab.expectation(xx) == 1


def test_bell_z_readout_parity_forced():
    c = builders.carbon_bell("Z")
    from ftlab.faultmodel import FaultModel

    fm = FaultModel(c)
    assert not fm.reference[fm.outputs].any()


@pytest.mark.parametrize("basis", ["Z", "X"])
def test_ec_round_identity(basis):
    from ftlab.faultmodel import FaultModel

    c = builders.repeated_ec(1, basis)
    fm = FaultModel(c)
    assert not fm.reference[fm.outputs].any()
    # two registers of 12 plus the shared 7 preparation ancillas
    assert c.n_qubits == 31
    ticks = [ins for ins in c.instructions if ins.kind == "TICK"]
    assert len(ticks) == 1


@pytest.mark.parametrize("r", [1, 2, 3])
def test_idle_windows(r):
    c = builders.repeated_ec(r, "Z")
    assert sum(ins.kind == "TICK" for ins in c.instructions) == 2 * r - 1
    for kind in ("two_cnots", "two_teleports"):
        b = builders.physical_baseline(kind, r, "Z")
        assert sum(ins.kind == "TICK" for ins in b.instructions) == 2 * r - 1


def test_baselines():
    c = builders.physical_baseline("two_cnots", 1, "Z")
    bits, _ = run_tableau(c)
    assert bits.bits == (0, 0)
    assert builders.physical_baseline("two_cnots", 3, "Z").count("CNOT") == 6
    t = builders.physical_baseline("two_teleports", 1, "Z")
    ro = reference_outcomes(t)
    frames = t.bits_with_role("frame")
    assert all(ro[b] == "random" for b in frames)
    from ftlab.faultmodel import FaultModel

    fm = FaultModel(t)
    assert not fm.reference[fm.outputs].any()
    with pytest.raises(ValueError):
        builders.physical_baseline("two_cnots", 0)


def test_unknown_circuit_name():
    with pytest.raises(ValueError, match="unknown circuit"):
        builders.get_circuit("nope")
