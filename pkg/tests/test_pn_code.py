import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from itsradio.pn_code import (
    PRIMITIVE_TAPS,
    ChipSequence,
    aperiodic_autocorrelation,
    barker13,
    chip_template,
    correlate,
    msequence,
    periodic_autocorrelation,
)
from itsradio.signal import IqBuffer

BARKER = [1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1]


def brute_aperiodic(chips, k):
    n = len(chips)
    return sum(chips[i] * chips[i + k] for i in range(n - k))


def brute_periodic(chips, k):
    n = len(chips)
    return sum(chips[i] * chips[(i + k) % n] for i in range(n))


def test_barker13_chips():
    c = barker13()
    assert c.chips.tolist() == BARKER
    assert c.length == 13


def test_barker13_sidelobes_by_enumeration():
    c = barker13().chips.tolist()
    assert brute_aperiodic(c, 0) == 13
    side = [abs(brute_aperiodic(c, k)) for k in range(1, 13)]
    assert max(side) <= 1
    assert 13 / max(side) >= 13


def test_library_autocorrelation_matches_brute_force():
    c = barker13()
    ac = aperiodic_autocorrelation(c)
    assert ac.tolist() == [brute_aperiodic(c.chips.tolist(), k) for k in range(13)]


def test_chip_sequence_rejects_non_bipolar():
    with pytest.raises(ValueError):
        ChipSequence(np.array([1, 0, -1]))
    with pytest.raises(ValueError):
        ChipSequence(np.array([], dtype=int))


def test_text_round_trip():
    c = barker13()
    line = c.to_text()
    assert line.startswith("+1,+1,+1")
    assert ChipSequence.from_text(line) == c


def test_msequence_degree3():
    m = msequence(3, (3, 1))
    assert m.length == 7
    chips = m.chips.tolist()
    assert [brute_periodic(chips, k) for k in range(1, 7)] == [-1] * 6


def test_msequence_non_primitive_rejected():
    # x^2 + 1 gives period 2
    with pytest.raises(ValueError, match="non-primitive feedback polynomial"):
        msequence(2, (2,))
    with pytest.raises(ValueError, match="non-primitive feedback polynomial"):
        msequence(4, (4, 2))


@pytest.mark.parametrize("degree", sorted(PRIMITIVE_TAPS))
def test_default_taps_give_msequences(degree):
    m = msequence(degree)
    assert m.length == 2**degree - 1
    assert abs(int(m.chips.sum())) == 1
    if degree <= 10:
        pac = periodic_autocorrelation(m)
        assert pac[0] == m.length
        assert np.all(pac[1:] == -1)


def test_msequence_degree_bounds():
    for bad in (1, 17):
        with pytest.raises(ValueError):
            msequence(bad)


def test_correlate_peak_positions():
    c = barker13()
    tpl = chip_template(c, 4)
    x = np.zeros(400, dtype=complex)
    x[: tpl.size] = tpl
    assert int(np.argmax(correlate(x, c, 4))) == 0
    for d in (1, 7, 100, 400 - tpl.size):
        y = np.zeros(400, dtype=complex)
        y[d : d + tpl.size] = tpl
        assert int(np.argmax(correlate(IqBuffer(y, 40e6), c, 4))) == d


def test_correlate_is_linear_and_checks_length():
    c = barker13()
    rng = np.random.default_rng(1)
    x = rng.standard_normal(200) + 1j * rng.standard_normal(200)
    np.testing.assert_allclose(correlate(2 * x, c, 4), 2 * correlate(x, c, 4))
    assert correlate(x, c, 4).size == 200 - 52 + 1
    with pytest.raises(ValueError, match="insufficient samples"):
        correlate(x[:51], c, 4)


def test_correlate_shift_equivariant_random_delays():
    c = barker13()
    tpl = chip_template(c, 4)
    rng = np.random.default_rng(7)
    for d in rng.integers(0, 500, 20):
        y = 0.05 * (rng.standard_normal(600) + 1j * rng.standard_normal(600))
        y[d : d + tpl.size] += tpl
        assert int(np.argmax(correlate(y, c, 4))) == d


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=64))
def test_zero_shift_autocorrelation_is_length(chips):
    c = ChipSequence(np.array(chips))
    assert aperiodic_autocorrelation(c)[0] == len(chips)
    assert periodic_autocorrelation(c)[0] == len(chips)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12))
def test_msequence_balance(degree):
    m = msequence(degree)
    assert int(np.sum(m.chips == 1)) - int(np.sum(m.chips == -1)) == 1
