"""Bipolar spreading and ranging codes.

Chips are stored as ``int8`` arrays of -1/+1 so correlations are plain dot
products. Bit images use the same mapping as spreading: bit 1 -> +1,
bit 0 -> -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import signal as sps

__all__ = [
    "ChipSequence",
    "PRIMITIVE_TAPS",
    "barker13",
    "msequence",
    "aperiodic_autocorrelation",
    "periodic_autocorrelation",
    "correlate",
    "chip_template",
]

BARKER13 = (1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1)

# Exponents of a primitive polynomial x^n + ... + 1 per degree (constant term implied).
PRIMITIVE_TAPS: dict[int, tuple[int, ...]] = {
    2: (2, 1),
    3: (3, 1),
    4: (4, 1),
    5: (5, 2),
    6: (6, 1),
    7: (7, 1),
    8: (8, 4, 3, 2),
    9: (9, 4),
    10: (10, 3),
    11: (11, 2),
    12: (12, 6, 4, 1),
    13: (13, 4, 3, 1),
    14: (14, 10, 6, 1),
    15: (15, 1),
    16: (16, 12, 3, 1),
}


@dataclass(frozen=True, eq=False)
class ChipSequence:
    """An ordered run of bipolar chips."""

    chips: np.ndarray

    def __post_init__(self):
        chips = np.asarray(self.chips)
        if chips.ndim != 1 or chips.size < 1:
            raise ValueError("a chip sequence needs at least one chip")
        if not np.all(np.abs(chips) == 1):
            raise ValueError("chips must be exactly -1 or +1")
        chips = chips.astype(np.int8)
        chips.flags.writeable = False
        object.__setattr__(self, "chips", chips)

    @property
    def length(self) -> int:
        return int(self.chips.size)

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChipSequence):
            return NotImplemented
        return np.array_equal(self.chips, other.chips)

    def __hash__(self) -> int:
        return hash(self.chips.tobytes())

    @property
    def bits(self) -> np.ndarray:
        """Bit image of the code (+1 -> 1, -1 -> 0)."""
        return (self.chips > 0).astype(np.uint8)

    def to_text(self) -> str:
        return ",".join("+1" if c > 0 else "-1" for c in self.chips)

    @classmethod
    def from_text(cls, line: str) -> "ChipSequence":
        values = [int(tok) for tok in line.strip().split(",") if tok.strip()]
        return cls(np.array(values))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "ChipSequence":
        b = np.asarray(list(bits), dtype=np.int64)
        if np.any((b != 0) & (b != 1)):
            raise ValueError("bits must be 0 or 1")
        return cls(2 * b - 1)


def barker13() -> ChipSequence:
    """The length-13 Barker code; aperiodic sidelobes never exceed 1."""
    return ChipSequence(np.array(BARKER13))


def _normalize_taps(degree: int, taps) -> tuple[int, ...]:
    if taps is None:
        return PRIMITIVE_TAPS[degree]
    if isinstance(taps, (int, np.integer)):
        # bit k of the mask marks the x^k term
        exps = tuple(k for k in range(1, degree + 1) if (int(taps) >> k) & 1)
    else:
        exps = tuple(sorted({int(t) for t in taps}, reverse=True))
    if not exps or max(exps) != degree or min(exps) < 1:
        raise ValueError(f"taps {taps!r} must include the degree {degree} and only exponents in 1..{degree}")
    return exps


def msequence(degree: int, taps: Sequence[int] | int | None = None) -> ChipSequence:
    """Maximal-length LFSR sequence of period ``2**degree - 1``.

    ``taps`` lists the exponents of the feedback polynomial
    ``x**degree + ... + 1`` (the constant term is implied), e.g. ``(3, 1)``
    for ``x^3 + x + 1``. An integer is read as a bit mask with bit *k*
    marking ``x**k``. The polynomial is checked by running the register
    through a full period.
    """
    if not 2 <= degree <= 16:
        raise ValueError("degree must lie in 2..16")
    exps = _normalize_taps(degree, taps)
    # a[t+n] = a[t] xor a[t+k] for every lower exponent k
    lower = [k for k in exps if k != degree]
    period = (1 << degree) - 1
    state = [1] * degree  # a[t], ..., a[t+n-1]
    start = tuple(state)
    out = np.empty(period, dtype=np.int8)
    for i in range(period):
        out[i] = state[0]
        fb = state[0]
        for k in lower:
            fb ^= state[k]
        state = state[1:] + [fb]
        if tuple(state) == start and i < period - 1:
            raise ValueError("non-primitive feedback polynomial")
    return ChipSequence(2 * out.astype(np.int64) - 1)


def aperiodic_autocorrelation(code: ChipSequence) -> np.ndarray:
    """Zero-padded autocorrelation for shifts ``0 .. length-1``."""
    c = code.chips.astype(np.int64)
    n = c.size
    return np.array([int(np.dot(c[: n - k], c[k:])) for k in range(n)])


def periodic_autocorrelation(code: ChipSequence) -> np.ndarray:
    """Circular autocorrelation for shifts ``0 .. length-1``."""
    c = code.chips.astype(np.int64)
    return np.array([int(np.dot(c, np.roll(c, -k))) for k in range(c.size)])


def chip_template(code: ChipSequence, samples_per_chip: int) -> np.ndarray:
    """Sample-rate replica of the code (each chip held ``samples_per_chip``)."""
    if samples_per_chip < 1:
        raise ValueError("samples_per_chip must be >= 1")
    return np.repeat(code.chips.astype(np.float64), samples_per_chip)


def correlate(received, code: ChipSequence, samples_per_chip: int = 4) -> np.ndarray:
    """Matched-filter magnitude at every full-overlap lag.

    ``trace[k] = |sum_m template[m] * received[k + m]|`` for
    ``k = 0 .. len(received) - len(template)``. ``received`` may be an
    :class:`~itsradio.signal.IqBuffer` or a plain sample array.
    """
    template = chip_template(code, samples_per_chip)
    x = np.asarray(getattr(received, "samples", received))
    if x.size < template.size:
        raise ValueError("insufficient samples: buffer shorter than one full code")
    return np.abs(sps.correlate(x, template, mode="valid"))
