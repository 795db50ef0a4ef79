"""Baseband waveforms: spreading, framing, hop planning and RSSI.

Everything runs at complex baseband. Carrier frequencies are metadata that
only enter through channel phase terms and wavelength arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .csvio import read_csv, write_csv
from .pn_code import ChipSequence, barker13, chip_template

__all__ = [
    "SPEED_OF_LIGHT",
    "DEFAULT_CHIP_RATE_HZ",
    "DEFAULT_SAMPLES_PER_CHIP",
    "DEFAULT_START_MARKER",
    "ISM_58_BAND_HZ",
    "NO_SIGNAL",
    "IqBuffer",
    "Frame",
    "HopPlan",
    "spread",
    "despread",
    "decision_variables",
    "make_hop_plan",
    "rssi",
    "wavelength",
    "write_iq_csv",
    "read_iq_csv",
]

DEFAULT_CHIP_RATE_HZ = 10e6
DEFAULT_SAMPLES_PER_CHIP = 4
DEFAULT_START_MARKER = (1, 1, 1, 0, 1)
ISM_58_BAND_HZ = (5.76e9, 5.84e9)
NO_SIGNAL = float("-inf")


@dataclass(frozen=True, eq=False)
class IqBuffer:
    """Complex baseband samples at a fixed sample rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        s = np.array(self.samples, dtype=np.complex128, copy=True).reshape(-1)
        if not np.all(np.isfinite(s)):
            raise ValueError("IQ samples must be finite")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def sample_period_s(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def with_samples(self, samples) -> "IqBuffer":
        return IqBuffer(samples, self.sample_rate_hz)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IqBuffer):
            return NotImplemented
        return self.sample_rate_hz == other.sample_rate_hz and np.array_equal(self.samples, other.samples)

    __hash__ = None


@dataclass(frozen=True)
class Frame:
    """Start marker, then one code period, then optional payload bits.

    The marker bits and the payload are spread with the same code, so the
    on-air layout is ``spread(marker + [1] + payload)``.
    """

    code: ChipSequence = field(default_factory=barker13)
    start_marker: tuple[int, ...] = DEFAULT_START_MARKER
    payload_bits: tuple[int, ...] = ()

    def __post_init__(self):
        marker = tuple(int(b) for b in self.start_marker)
        if not marker:
            raise ValueError("start marker must be nonempty")
        if any(b not in (0, 1) for b in marker):
            raise ValueError("start marker must be made of bits")
        prefix = tuple(int(b) for b in self.code.bits[: len(marker)])
        if marker == prefix:
            raise ValueError("start marker must differ from the leading bits of the code")
        object.__setattr__(self, "start_marker", marker)
        object.__setattr__(self, "payload_bits", tuple(int(b) for b in self.payload_bits))

    @property
    def bits(self) -> list[int]:
        return list(self.start_marker) + [1] + list(self.payload_bits)

    def code_offset_samples(self, samples_per_chip: int) -> int:
        """Sample index where the ranging code starts inside the frame."""
        return len(self.start_marker) * self.code.length * samples_per_chip

    def marker_waveform(self, samples_per_chip: int) -> np.ndarray:
        return spread(self.start_marker, self.code, samples_per_chip).samples

    def waveform(self, samples_per_chip: int, chip_rate_hz: float = DEFAULT_CHIP_RATE_HZ) -> IqBuffer:
        return spread(self.bits, self.code, samples_per_chip, chip_rate_hz)


@dataclass(frozen=True)
class HopPlan:
    carriers_hz: tuple[float, ...]
    dwell_s: float
    band_low_hz: float = ISM_58_BAND_HZ[0]
    band_high_hz: float = ISM_58_BAND_HZ[1]

    def __post_init__(self):
        if not self.carriers_hz:
            raise ValueError("hop plan needs at least one carrier")
        for f in self.carriers_hz:
            if not self.band_low_hz <= f <= self.band_high_hz:
                raise ValueError(f"carrier {f} Hz outside band [{self.band_low_hz}, {self.band_high_hz}]")

    def carrier_for_hop(self, hop_index: int) -> float:
        return self.carriers_hz[hop_index % len(self.carriers_hz)]

    def carrier_at(self, t_s: float) -> float:
        return self.carrier_for_hop(int(t_s // self.dwell_s))


def spread(
    bits: Sequence[int],
    code: ChipSequence,
    samples_per_chip: int = DEFAULT_SAMPLES_PER_CHIP,
    chip_rate_hz: float = DEFAULT_CHIP_RATE_HZ,
) -> IqBuffer:
    """Antipodal DSSS: bit b emits ``code * (2b - 1)``, chips held ``samples_per_chip``."""
    b = np.asarray(bits, dtype=np.int64).reshape(-1)
    if b.size == 0:
        raise ValueError("cannot spread an empty bit list")
    if np.any((b != 0) & (b != 1)):
        raise ValueError("bits must be 0 or 1")
    template = chip_template(code, samples_per_chip)
    samples = np.outer(2 * b - 1, template).reshape(-1)
    return IqBuffer(samples, chip_rate_hz * samples_per_chip)


def decision_variables(buffer, code: ChipSequence, samples_per_chip: int = DEFAULT_SAMPLES_PER_CHIP) -> np.ndarray:
    """Real part of the per-bit correlation with the code."""
    x = np.asarray(getattr(buffer, "samples", buffer))
    template = chip_template(code, samples_per_chip)
    n = template.size
    if x.shape[-1] % n:
        raise ValueError("frame misalignment: length is not a whole number of bit periods")
    blocks = x.reshape(x.shape[:-1] + (-1, n))
    return blocks.real @ template


def despread(buffer, code: ChipSequence, samples_per_chip: int = DEFAULT_SAMPLES_PER_CHIP) -> np.ndarray:
    """Hard bit decisions; inverse of :func:`spread` on a clean channel."""
    return (decision_variables(buffer, code, samples_per_chip) > 0).astype(np.uint8)


def make_hop_plan(
    n_channels: int,
    dwell_s: float,
    seed: int,
    band_hz: tuple[float, float] = ISM_58_BAND_HZ,
) -> HopPlan:
    """Pseudorandom permutation of equally spaced channel centres."""
    if n_channels < 1:
        raise ValueError("n_channels must be >= 1")
    if dwell_s <= 0:
        raise ValueError("dwell_s must be positive")
    low, high = band_hz
    spacing = (high - low) / n_channels
    if spacing < 1e6:
        raise ValueError(f"channel spacing {spacing:.0f} Hz is below 1 MHz")
    centres = low + spacing * (np.arange(n_channels) + 0.5)
    order = np.random.default_rng(seed).permutation(n_channels)
    return HopPlan(tuple(float(f) for f in centres[order]), float(dwell_s), low, high)


def rssi(buffer) -> float:
    """Mean power in dB; an all-zero buffer gives :data:`NO_SIGNAL`."""
    x = np.asarray(getattr(buffer, "samples", buffer))
    if x.size == 0:
        raise ValueError("rssi of an empty buffer")
    p = float(np.mean(np.abs(x) ** 2))
    if p == 0.0:
        return NO_SIGNAL
    return 10.0 * math.log10(p)


def wavelength(freq_hz: float, c: float = SPEED_OF_LIGHT) -> float:
    if not freq_hz > 0:
        raise ValueError("frequency must be positive")
    return c / freq_hz


def write_iq_csv(buffer: IqBuffer, path, meta: dict | None = None) -> None:
    header = {"sample_rate_hz": buffer.sample_rate_hz, **(meta or {})}
    rows = ((i, float(z.real), float(z.imag)) for i, z in enumerate(buffer.samples))
    write_csv(path, ["index", "real", "imag"], rows, header)


def read_iq_csv(path) -> IqBuffer:
    meta, rows = read_csv(path)
    if "sample_rate_hz" not in meta:
        raise ValueError("missing sample_rate_hz header")
    samples = np.array([complex(float(r["real"]), float(r["imag"])) for r in rows])
    return IqBuffer(samples, float(meta["sample_rate_hz"]))
