"""Propagation: tap-delay-line multipath, slow Rayleigh fading, two-path
frequency-selective fading, interferers and receiver noise.

Fading is slow: one call to :func:`apply_channel` models one burst, and the
tap gains are constant for its duration. All randomness is drawn from the
explicit ``seed`` arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .csvio import write_csv
from .signal import IqBuffer

__all__ = [
    "INTERFERER_KINDS",
    "ChannelTap",
    "Interferer",
    "ChannelModel",
    "two_path_gain",
    "two_path_response",
    "rayleigh_fade_trace",
    "correlated_branch",
    "apply_channel",
    "add_interference",
    "write_fade_csv",
    "burst_gains",
    "noise_psd_for_chip_snr",
    "noise_psd_for_ebn0",
    "taps_from_delays",
]

INTERFERER_KINDS = ("cochannel_tone", "adjacent_tone", "broadband_jammer")
DEFAULT_OSCILLATORS = 64


@dataclass(frozen=True)
class ChannelTap:
    delay_s: float = 0.0
    gain: complex = 1.0 + 0j
    doppler_hz: float = 0.0

    def __post_init__(self):
        if self.delay_s < 0:
            raise ValueError("tap delay must be >= 0")
        if not np.isfinite(complex(self.gain)):
            raise ValueError("tap gain must be finite")
        object.__setattr__(self, "gain", complex(self.gain))


@dataclass(frozen=True)
class Interferer:
    """A tone or broadband jammer.

    ``power_db`` is relative to a unit-power signal sample; ``-inf``
    disables the interferer. When ``reference_carrier_hz`` is set the
    interferer sits at a fixed RF frequency
    (``reference_carrier_hz + freq_offset_hz``) and its baseband offset
    follows the receiver's carrier, which is how hopping dodges it.
    """

    kind: str
    power_db: float
    freq_offset_hz: float = 0.0
    reference_carrier_hz: float | None = None

    def __post_init__(self):
        if self.kind not in INTERFERER_KINDS:
            raise ValueError(f"unknown interferer kind {self.kind!r}")
        if self.kind == "cochannel_tone" and self.freq_offset_hz != 0:
            raise ValueError("a cochannel tone has zero frequency offset")
        if self.kind == "adjacent_tone" and self.freq_offset_hz == 0:
            raise ValueError("an adjacent tone needs a nonzero frequency offset")

    def baseband_offset_hz(self, carrier_hz: float) -> float:
        if self.reference_carrier_hz is None:
            return self.freq_offset_hz
        return self.reference_carrier_hz + self.freq_offset_hz - carrier_hz


@dataclass(frozen=True)
class ChannelModel:
    """Tap-delay line plus interferers and white noise.

    ``noise_psd`` is the complex noise variance per sample. With
    ``fading="rayleigh"`` every tap gain is multiplied by a unit-power
    complex Gaussian drawn once per burst. ``antenna_decorrelation`` sets
    how independently antenna 1 sees the taps: 0 gives the same channel as
    antenna 0, 1 gives an independent one.
    """

    taps: tuple[ChannelTap, ...] = (ChannelTap(),)
    noise_psd: float = 0.0
    interferers: tuple[Interferer, ...] = ()
    antenna_decorrelation: float = 1.0
    fading: str = "none"

    def __post_init__(self):
        object.__setattr__(self, "taps", tuple(self.taps))
        object.__setattr__(self, "interferers", tuple(self.interferers))
        if not self.taps:
            raise ValueError("channel needs at least one tap")
        if not 0.0 <= self.antenna_decorrelation <= 1.0:
            raise ValueError("antenna_decorrelation must lie in [0, 1]")
        if self.noise_psd < 0:
            raise ValueError("noise_psd must be >= 0")
        if self.fading not in ("none", "rayleigh"):
            raise ValueError(f"unknown fading {self.fading!r}")


def two_path_response(freq_hz, gain1, delay1_s, gain2, delay2_s):
    """Vectorised ``|g1 e^{-j2pi f t1} + g2 e^{-j2pi f t2}|``."""
    f = np.asarray(freq_hz, dtype=float)
    h = gain1 * np.exp(-2j * np.pi * f * np.asarray(delay1_s)) + gain2 * np.exp(
        -2j * np.pi * f * np.asarray(delay2_s)
    )
    return np.abs(h)


def two_path_gain(freq_hz: float, tap1: ChannelTap, tap2: ChannelTap) -> float:
    """Magnitude of a two-ray channel at one frequency.

    The paths add when ``f * (t2 - t1)`` is an integer and cancel at
    half-integers, so two carriers a few hundred MHz apart fade at
    different path-delay differences.
    """
    return float(two_path_response(freq_hz, tap1.gain, tap1.delay_s, tap2.gain, tap2.delay_s))


def correlated_branch(primary, independent, decorrelation: float):
    """Unit-power mix: ``sqrt(1-d) * primary + sqrt(d) * independent``."""
    return math.sqrt(1.0 - decorrelation) * primary + math.sqrt(decorrelation) * independent


def _complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)


def rayleigh_fade_trace(
    doppler_hz: float,
    duration_s: float,
    sample_interval_s: float,
    seed: int,
    n_oscillators: int = DEFAULT_OSCILLATORS,
) -> np.ndarray:
    """Unit-mean-power Rayleigh gain process, sum-of-sinusoids generator.

    Uses the randomised arrival-angle model of Zheng and Xiao: in-phase and
    quadrature parts are each a sum of ``n_oscillators`` cosines at
    ``doppler_hz * cos(alpha_n)`` / ``sin(alpha_n)`` with random phases.
    The trace can be sampled at any interval, including intervals much
    longer than the coherence time.
    """
    if not doppler_hz > 0:
        raise ValueError("doppler_hz must be positive")
    if not duration_s > 0:
        raise ValueError("duration_s must be positive")
    if not sample_interval_s > 0:
        raise ValueError("sample_interval_s must be positive")
    n = max(1, int(round(duration_s / sample_interval_s)))
    m = int(n_oscillators)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-np.pi, np.pi)
    phi = rng.uniform(-np.pi, np.pi, m)
    psi = rng.uniform(-np.pi, np.pi, m)
    alpha = (2 * np.pi * np.arange(1, m + 1) - np.pi + theta) / (4 * m)
    wc = 2 * np.pi * doppler_hz * np.cos(alpha)
    ws = 2 * np.pi * doppler_hz * np.sin(alpha)
    t = np.arange(n) * sample_interval_s
    out = np.empty(n, dtype=np.complex128)
    chunk = 1 << 14
    for lo in range(0, n, chunk):
        tt = t[lo : lo + chunk, None]
        xc = np.cos(tt * wc + phi).sum(axis=1)
        xs = np.cos(tt * ws + psi).sum(axis=1)
        out[lo : lo + chunk] = (xc + 1j * xs) / math.sqrt(m)
    return out


def write_fade_csv(gains: np.ndarray, sample_interval_s: float, path, meta: dict | None = None) -> None:
    g = np.asarray(gains)
    env_db = 20 * np.log10(np.maximum(np.abs(g), 1e-300))
    rows = ((i * sample_interval_s, z.real, z.imag, e) for i, (z, e) in enumerate(zip(g, env_db)))
    write_csv(path, ["time_s", "gain_real", "gain_imag", "envelope_db"], rows, meta)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def add_interference(buffer: IqBuffer, interferer: Interferer, carrier_hz: float, seed=0) -> IqBuffer:
    """Add one interferer at its stated power.

    Tones get a random starting phase. A tone whose baseband offset falls
    outside the receiver bandwidth (``|f| >= fs/2``) is filtered out.
    """
    if len(buffer) == 0:
        raise ValueError("empty buffer")
    p = interferer.power_db
    if p == float("-inf"):
        return buffer
    rng = _as_rng(seed)
    amp = math.sqrt(10.0 ** (p / 10.0))
    n = len(buffer)
    fs = buffer.sample_rate_hz
    if interferer.kind == "broadband_jammer":
        extra = amp * _complex_normal(rng, n)
    else:
        f = interferer.baseband_offset_hz(carrier_hz)
        phase0 = rng.uniform(-np.pi, np.pi)
        if abs(f) >= fs / 2:
            return buffer
        extra = amp * np.exp(1j * (2 * np.pi * f * np.arange(n) / fs + phase0))
    return buffer.with_samples(buffer.samples + extra)


def _tap_gains(model: ChannelModel, antenna_index: int, rng: np.random.Generator) -> np.ndarray:
    k = len(model.taps)
    base = np.array([t.gain for t in model.taps])
    # fixed draw order keeps antenna 0 identical whichever antenna is asked for
    z0 = _complex_normal(rng, k)
    w = _complex_normal(rng, k)
    u = rng.uniform(-np.pi, np.pi, k)
    rho = model.antenna_decorrelation
    if model.fading == "rayleigh":
        fade = z0 if antenna_index == 0 else correlated_branch(z0, w, rho)
        return base * fade
    if antenna_index == 0:
        return base
    return base * np.exp(1j * rho * u)


def apply_channel(
    tx: IqBuffer,
    model: ChannelModel,
    carrier_hz: float,
    antenna_index: int = 0,
    seed: int = 0,
) -> IqBuffer:
    """Pass one burst through the channel as seen by one antenna.

    Each tap delays the input by its delay rounded to the sample grid and
    rotates it by the carrier phase ``exp(-j 2 pi f_c tau)``; a tap Doppler
    adds a linear phase ramp. Interferers are the same waveform on both
    antennas. Receiver noise is independent per antenna.
    """
    if antenna_index not in (0, 1):
        raise ValueError("antenna_index must be 0 or 1")
    n = len(tx)
    if n == 0:
        raise ValueError("empty transmit buffer")
    fs = tx.sample_rate_hz
    rng = np.random.default_rng(seed)
    gains = _tap_gains(model, antenna_index, rng)
    x = tx.samples
    out = np.zeros(n, dtype=np.complex128)
    t = np.arange(n) / fs
    for tap, g in zip(model.taps, gains):
        d = int(round(tap.delay_s * fs))
        if d >= n:
            raise ValueError(f"delay beyond buffer: tap delay {tap.delay_s!r} s needs {d} samples, buffer has {n}")
        coeff = g * np.exp(-2j * np.pi * carrier_hz * tap.delay_s)
        seg = coeff * x[: n - d]
        if tap.doppler_hz:
            seg = seg * np.exp(2j * np.pi * tap.doppler_hz * t[d:])
        out[d:] += seg
    rx = tx.with_samples(out)
    for i, intf in enumerate(model.interferers):
        rx = add_interference(rx, intf, carrier_hz, np.random.default_rng([seed, 1000 + i]))
    if model.noise_psd > 0:
        noise_rng = np.random.default_rng([seed, antenna_index])
        rx = rx.with_samples(rx.samples + math.sqrt(model.noise_psd) * _complex_normal(noise_rng, n))
    return rx


def burst_gains(
    n_bursts: int,
    decorrelation: float,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Flat Rayleigh gains for both antennas over many independent bursts."""
    rng = np.random.default_rng(seed)
    z0 = _complex_normal(rng, n_bursts)
    w = _complex_normal(rng, n_bursts)
    return z0, correlated_branch(z0, w, decorrelation)


def noise_psd_for_chip_snr(chip_snr_db: float, samples_per_chip: int) -> float:
    """Per-sample noise variance giving chip energy over N0 of ``chip_snr_db``."""
    return samples_per_chip / 10.0 ** (chip_snr_db / 10.0)


def noise_psd_for_ebn0(ebn0_db: float, code_length: int, samples_per_chip: int) -> float:
    """Per-sample noise variance giving post-despreading Eb/N0 of ``ebn0_db``."""
    return code_length * samples_per_chip / 10.0 ** (ebn0_db / 10.0)


def taps_from_delays(delays_s: Sequence[float], gains: Sequence[complex] | None = None) -> tuple[ChannelTap, ...]:
    gains = [1.0] * len(delays_s) if gains is None else list(gains)
    return tuple(ChannelTap(float(d), complex(g)) for d, g in zip(delays_s, gains))
