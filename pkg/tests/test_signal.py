import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erfc

from itsradio.pn_code import ChipSequence, barker13, msequence
from itsradio.signal import (
    DEFAULT_START_MARKER,
    NO_SIGNAL,
    Frame,
    HopPlan,
    IqBuffer,
    decision_variables,
    despread,
    make_hop_plan,
    read_iq_csv,
    rssi,
    spread,
    wavelength,
    write_iq_csv,
)

BARKER = np.array([1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1])


def test_iqbuffer_validation():
    with pytest.raises(ValueError):
        IqBuffer(np.ones(4), 0.0)
    with pytest.raises(ValueError):
        IqBuffer(np.array([1.0, np.nan]), 1.0)
    with pytest.raises(ValueError):
        IqBuffer(np.array([1.0, np.inf]), 1.0)
    b = IqBuffer([1, 2j], 10.0)
    assert len(b) == 2 and b.duration_s == pytest.approx(0.2)
    with pytest.raises(ValueError):
        b.samples[0] = 3


def test_spread_examples():
    c = barker13()
    np.testing.assert_array_equal(spread([1], c, 1).samples.real, BARKER)
    np.testing.assert_array_equal(spread([0], c, 1).samples.real, -BARKER)
    assert len(spread([1, 0], c, 4)) == 104
    assert spread([1], c, 4).sample_rate_hz == 40e6
    with pytest.raises(ValueError):
        spread([], c, 4)
    with pytest.raises(ValueError):
        spread([2], c, 4)


def test_despread_round_trip_and_negation():
    c = barker13()
    tx = spread([1, 0, 1, 1], c, 4)
    assert despread(tx, c, 4).tolist() == [1, 0, 1, 1]
    assert despread(-tx.samples, c, 4).tolist() == [0, 1, 0, 0]


def test_despread_misalignment():
    c = barker13()
    with pytest.raises(ValueError, match="frame misalignment"):
        despread(np.ones(53), c, 4)


def test_despread_at_10db_chip_snr():
    c = barker13()
    rng = np.random.default_rng(3)
    bits = rng.integers(0, 2, 10_000)
    tx = spread(bits, c, 4).samples
    # chip SNR 10 dB: chip energy 4 over N0
    n0 = 4 / 10
    rx = tx + math.sqrt(n0 / 2) * (rng.standard_normal(tx.size) + 1j * rng.standard_normal(tx.size))
    ber = np.mean(despread(rx, c, 4) != bits)
    ebn0 = 13 * 10.0
    oracle = 0.5 * erfc(math.sqrt(ebn0))
    assert ber < 1e-3
    assert ber <= max(oracle * 10, 1e-4)


def test_decision_variable_scale():
    c = barker13()
    dv = decision_variables(spread([1, 0], c, 4), c, 4)
    np.testing.assert_allclose(dv, [52, -52])


def test_frame_layout():
    f = Frame()
    assert f.start_marker == DEFAULT_START_MARKER
    assert f.bits == [1, 1, 1, 0, 1, 1]
    assert f.code_offset_samples(4) == 5 * 13 * 4
    assert len(f.waveform(4)) == 6 * 52
    with pytest.raises(ValueError):
        Frame(start_marker=(1, 1, 1, 1, 1))  # Barker-13 begins with five ones
    with pytest.raises(ValueError):
        Frame(start_marker=())


def test_hop_plan_examples():
    p1 = make_hop_plan(1, 1e-3, 0)
    assert p1.carriers_hz == (5.8e9,)
    p8 = make_hop_plan(8, 1e-3, 42)
    assert len(set(p8.carriers_hz)) == 8
    assert p8 == make_hop_plan(8, 1e-3, 42)
    cycle = [p8.carrier_for_hop(i) for i in range(16)]
    assert sorted(cycle[:8]) == sorted(p8.carriers_hz) == sorted(cycle[8:])
    assert p8.carrier_at(2.5e-3) == p8.carriers_hz[2]
    with pytest.raises(ValueError):
        make_hop_plan(81, 1e-3, 0)
    with pytest.raises(ValueError):
        HopPlan((5.9e9,), 1e-3)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 80), st.integers(0, 2**32 - 1))
def test_hop_carriers_in_band(n, seed):
    plan = make_hop_plan(n, 1e-3, seed)
    assert all(5.76e9 <= f <= 5.84e9 for f in plan.carriers_hz)
    assert len(set(plan.carriers_hz)) == n


def test_rssi_examples():
    x = np.exp(1j * np.linspace(0, 6, 50))
    assert rssi(IqBuffer(x, 1.0)) == pytest.approx(0.0, abs=1e-12)
    assert rssi(IqBuffer(10 * x, 1.0)) == pytest.approx(20.0)
    assert rssi(IqBuffer(np.zeros(8), 1.0)) == NO_SIGNAL


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), min_size=1, max_size=40).filter(
        lambda v: any(abs(z) > 1e-6 for z in v)
    ),
    st.floats(1e-3, 1e3),
)
def test_rssi_shift_property(vals, alpha):
    x = np.array(vals)
    diff = rssi(alpha * x) - rssi(x)
    assert abs(diff - 20 * math.log10(alpha)) < 1e-9


def test_wavelength():
    assert wavelength(5.8e9) * 100 == pytest.approx(5.172, rel=5e-3)
    assert wavelength(900e6) * 100 == pytest.approx(33.3, abs=0.05)
    assert wavelength(2.4e9) * 100 == pytest.approx(12.5, rel=5e-3)
    with pytest.raises(ValueError):
        wavelength(0)
    f = np.linspace(1e8, 1e10, 50)
    lam = [wavelength(x) for x in f]
    assert all(a > b for a, b in zip(lam, lam[1:]))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.integers(0, 1), min_size=1, max_size=30),
    st.sampled_from([1, 2, 4, 8]),
    st.sampled_from(["barker", "m3", "m5", "random"]),
    st.integers(0, 1000),
)
def test_spread_despread_identity(bits, spc, kind, seed):
    if kind == "barker":
        code = barker13()
    elif kind == "random":
        code = ChipSequence(np.random.default_rng(seed).choice([-1, 1], 1 + seed % 40))
    else:
        code = msequence(int(kind[1:]))
    tx = spread(bits, code, spc)
    assert len(tx) == len(bits) * code.length * spc
    assert despread(tx, code, spc).tolist() == bits


def test_iq_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    b = IqBuffer(rng.standard_normal(20) + 1j * rng.standard_normal(20), 40e6)
    path = tmp_path / "iq.csv"
    write_iq_csv(b, path, {"config": "t", "seed": 0})
    first = path.read_text().splitlines()[0]
    assert first.startswith("#") and "sample_rate_hz" in first
    assert path.read_text().splitlines()[1] == "index,real,imag"
    assert read_iq_csv(path) == b
