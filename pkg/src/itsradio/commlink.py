"""Communication mode: burst transport with preamble antenna selection, BER
measurement and jamming-margin curves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelModel, ChannelTap, Interferer, apply_channel, noise_psd_for_ebn0
from .csvio import write_csv
from .diversity import select_antenna
from .pn_code import ChipSequence
from .radar import RadarTiming
from .signal import DEFAULT_START_MARKER, HopPlan, decision_variables, rssi, spread

__all__ = [
    "LinkResult",
    "run_link",
    "processing_gain_db",
    "jammed_ber",
    "jamming_margin_curve",
    "burst_seed",
    "write_margin_csv",
]

DEFAULT_CARRIER_HZ = 5.8e9
BER_CEILING = 1e-2
SEARCH_STEP_DB = 0.5
SEARCH_RANGE_DB = (-20.0, 60.0)
SEARCH_MAX_ITER = 12


@dataclass(frozen=True)
class LinkResult:
    bits_sent: int
    bit_errors: int
    snr_db: float
    jammer_power_db: float | None = None

    def __post_init__(self):
        if self.bits_sent < 1 or not 0 <= self.bit_errors <= self.bits_sent:
            raise ValueError("bit counts out of range")

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_sent


def burst_seed(seed: int, burst: int) -> int:
    return int(np.random.SeedSequence([seed, burst]).generate_state(1)[0])


def _link_snr_db(model: ChannelModel, code: ChipSequence, spc: int) -> float:
    if model.noise_psd == 0:
        return math.inf
    return 10 * math.log10(code.length * spc / model.noise_psd)


def run_link(
    bits: Sequence[int],
    code: ChipSequence,
    model: ChannelModel,
    timing: RadarTiming,
    seed: int,
    *,
    carrier_hz: float = DEFAULT_CARRIER_HZ,
    burst_bits: int = 100,
    diversity: bool = True,
    hop_plan: HopPlan | None = None,
    start_marker: Sequence[int] = DEFAULT_START_MARKER,
) -> LinkResult:
    """Send ``bits`` in bursts and count decision errors.

    Each burst is the start marker (used as preamble) followed by up to
    ``burst_bits`` data bits. The receiver picks the antenna with the higher
    preamble RSSI, takes its carrier phase from the preamble, then despreads.
    Channel gains are redrawn per burst; with a ``hop_plan`` each burst goes
    out on the next carrier.
    """
    data = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if data.size == 0:
        raise ValueError("no bits to send")
    spc = timing.samples_per_chip
    marker = np.asarray(start_marker, dtype=np.uint8)
    pre_len = marker.size * code.length * spc
    pre_ref = spread(marker, code, spc).samples
    errors = 0
    for b, lo in enumerate(range(0, data.size, burst_bits)):
        chunk = data[lo : lo + burst_bits]
        tx = spread(np.concatenate([marker, chunk]), code, spc, timing.chip_rate_hz)
        carrier = hop_plan.carrier_for_hop(b) if hop_plan is not None else carrier_hz
        s = burst_seed(seed, b)
        rx = apply_channel(tx, model, carrier, 0, s)
        if diversity:
            rx1 = apply_channel(tx, model, carrier, 1, s)
            if select_antenna(rssi(rx.samples[:pre_len]), rssi(rx1.samples[:pre_len])).antenna == 1:
                rx = rx1
        h = np.vdot(pre_ref, rx.samples[:pre_len])
        y = rx.samples[pre_len:]
        if h != 0:
            y = y * (np.conj(h) / abs(h))
        decided = (decision_variables(y, code, spc) > 0).astype(np.uint8)
        errors += int(np.count_nonzero(decided != chunk))
    jammer = max((i.power_db for i in model.interferers), default=None)
    return LinkResult(int(data.size), errors, _link_snr_db(model, code, spc), jammer)


def processing_gain_db(code_length: int) -> float:
    if code_length < 1:
        raise ValueError("code length must be >= 1")
    return 10 * math.log10(code_length)


def _jammer(offset_hz: float, power_db: float, kind: str | None = None) -> Interferer:
    if kind is None:
        kind = "cochannel_tone" if offset_hz == 0 else "adjacent_tone"
    return Interferer(kind, power_db, offset_hz)


def jammed_ber(
    code: ChipSequence,
    offset_hz: float,
    power_db: float,
    seed: int,
    *,
    n_bits: int = 20_000,
    ebn0_db: float = 20.0,
    timing: RadarTiming | None = None,
    jammer_kind: str | None = None,
    hop_plan: HopPlan | None = None,
    burst_bits: int = 50,
) -> float:
    """BER of an unfaded single-antenna link with one jammer.

    Bits, noise and jammer phases depend only on ``seed``, so calls that
    differ only in ``power_db`` share their random numbers.
    """
    timing = timing or RadarTiming()
    bits = np.random.default_rng([seed, 7]).integers(0, 2, n_bits)
    intf = _jammer(offset_hz, power_db, jammer_kind)
    if hop_plan is not None:
        intf = Interferer(intf.kind, intf.power_db, intf.freq_offset_hz, hop_plan.carriers_hz[0])
    model = ChannelModel(
        (ChannelTap(),),
        noise_psd_for_ebn0(ebn0_db, code.length, timing.samples_per_chip),
        (intf,),
    )
    res = run_link(bits, code, model, timing, seed, burst_bits=burst_bits, diversity=False, hop_plan=hop_plan)
    return res.ber


def jamming_margin_curve(
    code: ChipSequence,
    jammer_freq_offsets_hz: Sequence[float],
    ber_ceiling: float = BER_CEILING,
    seed: int = 0,
    **link_kwargs,
) -> list[tuple[float, float]]:
    """Largest jammer power per offset that keeps BER at or below the ceiling.

    Bisection over a 0.5 dB grid spanning -20..60 dB (at most 12 steps) with
    common random numbers. A curve value pinned at either end of the grid
    means the true margin lies beyond it.
    """
    if not 0 < ber_ceiling < 0.5:
        raise ValueError("ber_ceiling must lie in (0, 0.5)")
    lo_db, hi_db = SEARCH_RANGE_DB
    grid = np.arange(lo_db, hi_db + SEARCH_STEP_DB / 2, SEARCH_STEP_DB)
    curve = []
    for off in jammer_freq_offsets_hz:
        def ok(i: int) -> bool:
            return jammed_ber(code, float(off), float(grid[i]), seed, **link_kwargs) <= ber_ceiling

        a, b = 0, grid.size - 1
        if ok(b):
            curve.append((float(off), float(grid[b])))
            continue
        if not ok(a):
            curve.append((float(off), float(grid[a])))
            continue
        for _ in range(SEARCH_MAX_ITER):
            if b - a <= 1:
                break
            mid = (a + b) // 2
            if ok(mid):
                a = mid
            else:
                b = mid
        curve.append((float(off), float(grid[a])))
    return curve


def write_margin_csv(curve: Sequence[tuple[float, float]], path, meta: dict | None = None) -> None:
    write_csv(path, ["offset_hz", "max_jammer_db"], curve, meta)
