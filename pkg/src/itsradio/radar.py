"""Radar mode: coded burst, start-marker authentication, delay to range,
and nearest-target selection across the two diversity antennas."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import signal as sps

from .channel import ChannelModel, ChannelTap, apply_channel
from .csvio import write_csv
from .diversity import select_antenna
from .pn_code import correlate
from .signal import (
    DEFAULT_CHIP_RATE_HZ,
    DEFAULT_SAMPLES_PER_CHIP,
    SPEED_OF_LIGHT,
    Frame,
    IqBuffer,
    rssi,
)

__all__ = [
    "PRT_WINDOW_S",
    "DEFAULT_THRESHOLD",
    "RadarTiming",
    "RangeEstimate",
    "AuthResult",
    "Echo",
    "UnambiguousRange",
    "delay_to_range",
    "range_to_delay",
    "max_unambiguous_range",
    "find_echoes",
    "authenticate",
    "estimate_nearest",
    "target_channel",
    "transmit_window",
    "receive_pair",
    "write_range_csv",
]

PRT_WINDOW_S = (350e-6, 600e-6)
DEFAULT_THRESHOLD = 0.6


@dataclass(frozen=True)
class RadarTiming:
    prt_s: float = 500e-6
    samples_per_chip: int = DEFAULT_SAMPLES_PER_CHIP
    chip_rate_hz: float = DEFAULT_CHIP_RATE_HZ

    def __post_init__(self):
        if not self.prt_s > 0:
            raise ValueError("prt_s must be positive")
        if int(self.samples_per_chip) != self.samples_per_chip or self.samples_per_chip < 1:
            raise ValueError("samples_per_chip must be a positive integer")
        if not self.chip_rate_hz > 0:
            raise ValueError("chip_rate_hz must be positive")
        object.__setattr__(self, "samples_per_chip", int(self.samples_per_chip))

    @property
    def sample_rate_hz(self) -> float:
        return self.chip_rate_hz * self.samples_per_chip

    @property
    def valid(self) -> bool:
        """Inside the 350-600 us PRT window the radio is rated for."""
        return PRT_WINDOW_S[0] <= self.prt_s <= PRT_WINDOW_S[1]

    @property
    def range_resolution_m(self) -> float:
        return SPEED_OF_LIGHT / (2 * self.sample_rate_hz)


@dataclass(frozen=True)
class RangeEstimate:
    """Outcome of one ranging burst.

    ``delay_s``/``range_m`` are ``None`` when nothing authenticated; that is
    a "no target" result and is distinct from a detected zero-range echo.
    """

    delay_s: float | None
    range_m: float | None
    peak_magnitude: float
    authenticated: bool
    antenna_used: int
    rejected_peaks: int = 0

    @property
    def detected(self) -> bool:
        return self.range_m is not None

    @classmethod
    def no_target(cls, antenna_used: int = 0) -> "RangeEstimate":
        return cls(None, None, 0.0, False, antenna_used, 0)


class AuthResult(NamedTuple):
    authenticated: bool
    delay_s: float | None
    reason: str = ""
    peak_magnitude: float = 0.0


class Echo(NamedTuple):
    marker_lag: int
    code_lag: int
    code_peak: float
    authenticated: bool


class UnambiguousRange(NamedTuple):
    range_m: float
    valid: bool


def delay_to_range(delay_s: float) -> float:
    if delay_s < 0:
        raise ValueError("delay must be >= 0")
    return SPEED_OF_LIGHT * delay_s / 2


def range_to_delay(range_m: float) -> float:
    if range_m < 0:
        raise ValueError("range must be >= 0")
    return 2 * range_m / SPEED_OF_LIGHT


def max_unambiguous_range(prt_s: float) -> UnambiguousRange:
    if not prt_s > 0:
        raise ValueError("prt_s must be positive")
    return UnambiguousRange(SPEED_OF_LIGHT * prt_s / 2, PRT_WINDOW_S[0] <= prt_s <= PRT_WINDOW_S[1])


def _check_threshold(threshold_fraction: float) -> None:
    if not 0 < threshold_fraction < 1:
        raise ValueError("threshold_fraction must lie strictly between 0 and 1")


def find_echoes(
    received: IqBuffer,
    frame: Frame,
    timing: RadarTiming,
    threshold_fraction: float = DEFAULT_THRESHOLD,
) -> list[Echo]:
    """Every start-marker detection with its code check, earliest first.

    The marker is found by correlating with its own spread waveform. The
    code peak is then searched within one sample of where the code must
    start if the marker was genuine; marker and code share the sample grid,
    so a wider window only lets an overlapping echo's marker bits in.
    """
    _check_threshold(threshold_fraction)
    spc = timing.samples_per_chip
    x = received.samples
    marker = frame.marker_waveform(spc)
    code_len = frame.code.length * spc
    offset = frame.code_offset_samples(spc)
    if x.size < marker.size + code_len:
        return []
    marker_trace = np.abs(sps.correlate(x, marker, mode="valid"))
    code_trace = correlate(x, frame.code, spc)
    marker_thr = threshold_fraction * marker.size
    code_thr = threshold_fraction * code_len
    peaks, _ = sps.find_peaks(np.concatenate(([0.0], marker_trace, [0.0])), height=marker_thr, distance=spc)
    peaks = peaks - 1
    half = 1
    echoes = []
    for m in sorted(int(p) for p in peaks):
        expected = m + offset
        lo, hi = max(expected - half, 0), min(expected + half, code_trace.size - 1)
        if lo > hi:
            continue
        k = lo + int(np.argmax(code_trace[lo : hi + 1]))
        peak = float(code_trace[k])
        echoes.append(Echo(m, k, peak, peak > code_thr))
    return echoes


def authenticate(
    received: IqBuffer,
    frame: Frame,
    timing: RadarTiming,
    threshold_fraction: float = DEFAULT_THRESHOLD,
) -> AuthResult:
    """Measure the echo delay only if a start marker is followed by the code."""
    echoes = find_echoes(received, frame, timing, threshold_fraction)
    if not echoes:
        return AuthResult(False, None, "no start marker")
    offset = frame.code_offset_samples(timing.samples_per_chip)
    for e in echoes:
        if e.authenticated:
            delay = (e.code_lag - offset) / received.sample_rate_hz
            return AuthResult(True, max(delay, 0.0), "", e.code_peak)
    best = max(e.code_peak for e in echoes)
    return AuthResult(False, None, "code mismatch", best)


def _nearest_on(received: IqBuffer, frame: Frame, timing: RadarTiming, threshold_fraction: float, antenna: int):
    hits = [e for e in find_echoes(received, frame, timing, threshold_fraction) if e.authenticated]
    if not hits:
        return None
    offset = frame.code_offset_samples(timing.samples_per_chip)
    first = min(hits, key=lambda e: e.code_lag)
    delay = max((first.code_lag - offset) / received.sample_rate_hz, 0.0)
    return RangeEstimate(delay, delay_to_range(delay), first.code_peak, True, antenna, len(hits) - 1)


def estimate_nearest(
    received_a: IqBuffer,
    received_b: IqBuffer,
    frame: Frame,
    timing: RadarTiming,
    threshold_fraction: float = DEFAULT_THRESHOLD,
) -> RangeEstimate:
    """Range to the nearest authenticated target.

    The antenna with the stronger receive-window RSSI is processed first;
    its earliest authenticated echo wins and later ones (more distant cars)
    are counted in ``rejected_peaks``. The other antenna is only consulted
    when the selected one yields nothing.
    """
    if len(received_a) != len(received_b) or received_a.sample_rate_hz != received_b.sample_rate_hz:
        raise ValueError("antenna buffers must match in length and sample rate")
    buffers = (received_a, received_b)
    choice = select_antenna(rssi(received_a), rssi(received_b)).antenna
    for antenna in (choice, 1 - choice):
        est = _nearest_on(buffers[antenna], frame, timing, threshold_fraction, antenna)
        if est is not None:
            return est
    return RangeEstimate.no_target(choice)


def target_channel(
    ranges_m: Sequence[float],
    gains: Sequence[complex] | None = None,
    noise_psd: float = 0.0,
    fading: str = "none",
    antenna_decorrelation: float = 1.0,
) -> ChannelModel:
    """Targets as channel taps at their two-way delay; RCS folds into the gain."""
    gains = [1.0] * len(ranges_m) if gains is None else list(gains)
    if len(gains) != len(ranges_m):
        raise ValueError("one gain per target range")
    taps = tuple(ChannelTap(range_to_delay(r), g) for r, g in zip(ranges_m, gains))
    if not taps:
        # an empty scene is a single silent path
        taps = (ChannelTap(0.0, 0.0),)
    return ChannelModel(taps, noise_psd, (), antenna_decorrelation, fading)


def transmit_window(frame: Frame, timing: RadarTiming, n_samples: int | None = None) -> IqBuffer:
    """The coded burst followed by silence for the listening window.

    The window defaults to one PRT.
    """
    burst = frame.waveform(timing.samples_per_chip, timing.chip_rate_hz)
    if n_samples is None:
        n_samples = int(round(timing.prt_s * timing.sample_rate_hz))
    n_samples = max(n_samples, len(burst))
    x = np.zeros(n_samples, dtype=np.complex128)
    x[: len(burst)] = burst.samples
    return burst.with_samples(x)


def receive_pair(
    frame: Frame,
    timing: RadarTiming,
    model: ChannelModel,
    carrier_hz: float,
    seed: int,
    n_samples: int | None = None,
) -> tuple[IqBuffer, IqBuffer]:
    tx = transmit_window(frame, timing, n_samples)
    return (
        apply_channel(tx, model, carrier_hz, 0, seed),
        apply_channel(tx, model, carrier_hz, 1, seed),
    )


def write_range_csv(rows: Sequence[tuple[float, RangeEstimate]], path, meta: dict | None = None) -> None:
    out = (
        (t, e.range_m, e.peak_magnitude, e.authenticated, e.antenna_used, e.rejected_peaks)
        for t, e in rows
    )
    write_csv(path, ["t_s", "range_m", "peak", "authenticated", "antenna", "rejected_peaks"], out, meta)
