import numpy as np
import pytest

from ftlab import builders
from ftlab.circuit import CircuitBuilder
from ftlab.noise import NoiseModel, enumerate_locations, expected_fault_count, sample_faults


def _one(kind):
    b = CircuitBuilder(2)
    if kind == "CNOT":
        b.cnot(0, 1)
    elif kind == "MZ":
        b.mz(0, "logical")
    elif kind == "PERM":
        b.perm([0, 1], [1, 0])
    return b.build()


def test_location_census():
    assert enumerate_locations(_one("CNOT")).n_events == 15
    locs = enumerate_locations(_one("MZ"))
    assert locs.n_events == 1 and locs[0].alphabet == ("X",) and not locs[0].after
    assert enumerate_locations(_one("PERM")).n_events == 0


def test_cnot_alphabet_is_all_nonidentity_pairs():
    a = enumerate_locations(_one("CNOT"))[0].alphabet
    assert len(set(a)) == 15 and "II" not in a


def test_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(p_2q=1.5)
    assert NoiseModel.from_dict(NoiseModel().to_dict()) == NoiseModel()


def test_zero_rates_never_fault():
    c = builders.carbon_prep_00()
    for s in range(50):
        assert sample_faults(c, NoiseModel.noiseless(), seed=s) == ()


def test_certain_cnot_fault_uniform():
    c = _one("CNOT")
    m = NoiseModel(p_2q=1.0, p_1q=0, p_prep=0, p_meas=0, p_idle=0)
    counts = {}
    n = 15000
    for s in range(n):
        f = sample_faults(c, m, seed=s)
        assert len(f) == 1
        counts[f[0].error.label()] = counts.get(f[0].error.label(), 0) + 1
    assert len(counts) == 15
    exp = n / 15
    assert max(abs(v - exp) for v in counts.values()) < 4 * np.sqrt(exp)


def test_reproducible():
    c = builders.carbon_prep_00()
    m = NoiseModel().scaled(10)
    assert sample_faults(c, m, seed=4) == sample_faults(c, m, seed=4)


def test_mean_fault_count():
    c = builders.carbon_prep_00()
    m = NoiseModel()
    mu = expected_fault_count(c, m)
    locs = enumerate_locations(c)
    rates = locs.rates(m)
    # 10^5 shots: drawing only the per-location Bernoullis
    total = 0
    shots = 100_000
    r = np.random.default_rng(3)
    for _ in range(10):
        total += int((r.random((shots // 10, len(locs))) < rates).sum())
    sd = np.sqrt(mu * shots)
    assert abs(total - mu * shots) < 3 * sd
    # and through the public sampler on fewer shots
    k = sum(len(sample_faults(c, m, seed=s)) for s in range(20000))
    assert abs(k - 20000 * mu) < 3 * np.sqrt(20000 * mu)


def test_idle_zero_removes_tick_faults():
    c = builders.repeated_ec(2, "Z")
    locs = enumerate_locations(c)
    ticks = [l for l in locs if c.instructions[l.index].kind == "TICK"]
    assert ticks and len(ticks) == 3 * 12
    m = NoiseModel(p_idle=0.0)
    rates = locs.rates(m)
    assert all(rates[i] == 0 for i, l in enumerate(locs) if c.instructions[l.index].kind == "TICK")
    assert len(enumerate_locations(c, idle=False)) == len(locs) - len(ticks)


def test_bare_tick_has_no_locations():
    b = CircuitBuilder(3)
    b.tick()
    assert len(enumerate_locations(b.build())) == 0
