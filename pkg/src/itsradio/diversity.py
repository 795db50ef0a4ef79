"""Space diversity by preamble RSSI selection, antenna spacing bookkeeping,
and the three-region classifier for two-carrier frequency diversity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .channel import burst_gains
from .csvio import write_csv
from .signal import NO_SIGNAL, wavelength

__all__ = [
    "RssiTrace",
    "RegionLabel",
    "Selection",
    "SeparationReport",
    "select_antenna",
    "spatial_separation_report",
    "classify_regions",
    "region_intervals",
    "selection_outage_probability",
    "write_regions_csv",
]


@dataclass(frozen=True, eq=False)
class RssiTrace:
    times_s: np.ndarray
    levels_db: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times_s, dtype=float)
        lv = np.asarray(self.levels_db, dtype=float)
        if t.shape != lv.shape or t.ndim != 1:
            raise ValueError("times and levels must be 1-D and the same length")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times_s", t)
        object.__setattr__(self, "levels_db", lv)

    def __len__(self) -> int:
        return int(self.times_s.size)


class RegionLabel(str, Enum):
    """Reception state of the (lower, upper) carrier pair.

    ``BOTH_FADED`` is a diagnostic: both carriers down at once does not fit
    the three regions and is reported rather than forced into one.
    """

    I = "I"  # noqa: E741
    II = "II"
    III = "III"
    BOTH_FADED = "both-faded"


class Selection(NamedTuple):
    antenna: int
    blind: bool = False


class SeparationReport(NamedTuple):
    separation_m: float
    wavelength_m: float
    wavelengths: float
    effective: bool


def select_antenna(rssi_a_db: float, rssi_b_db: float) -> Selection:
    """Pick the antenna with the stronger preamble; ties go to antenna 0."""
    for v in (rssi_a_db, rssi_b_db):
        if math.isnan(v) or v == float("inf"):
            raise ValueError(f"invalid RSSI {v!r}")
    if rssi_a_db == NO_SIGNAL and rssi_b_db == NO_SIGNAL:
        return Selection(0, blind=True)
    return Selection(1 if rssi_b_db > rssi_a_db else 0)


def spatial_separation_report(separation_m: float, carrier_hz: float) -> SeparationReport:
    if not separation_m > 0:
        raise ValueError("antenna separation must be positive")
    lam = wavelength(carrier_hz)
    ratio = separation_m / lam
    return SeparationReport(separation_m, lam, ratio, ratio >= 0.5)


def classify_regions(
    trace_lo: RssiTrace,
    trace_hi: RssiTrace,
    fade_threshold_db: float = 10.0,
) -> list[tuple[float, RegionLabel]]:
    """Label each sample of two RSSI traces sharing one time axis.

    A carrier counts as faded when it sits more than ``fade_threshold_db``
    below its own median, so the labels do not depend on absolute
    calibration. I: neither faded, II: only the upper carrier faded,
    III: only the lower one.
    """
    if not fade_threshold_db > 0:
        raise ValueError("fade_threshold_db must be positive")
    if len(trace_lo) != len(trace_hi) or not np.array_equal(trace_lo.times_s, trace_hi.times_s):
        raise ValueError("traces must share the same time axis")
    lo = trace_lo.levels_db
    hi = trace_hi.levels_db
    faded_lo = lo < np.median(lo) - fade_threshold_db
    faded_hi = hi < np.median(hi) - fade_threshold_db
    table = {
        (False, False): RegionLabel.I,
        (False, True): RegionLabel.II,
        (True, False): RegionLabel.III,
        (True, True): RegionLabel.BOTH_FADED,
    }
    return [(float(t), table[(bool(a), bool(b))]) for t, a, b in zip(trace_lo.times_s, faded_lo, faded_hi)]


def region_intervals(labels: Sequence[tuple[float, RegionLabel]]) -> list[tuple[RegionLabel, float, float]]:
    """Collapse per-sample labels into ``(label, first_time, last_time)`` runs."""
    runs: list[tuple[RegionLabel, float, float]] = []
    for t, lab in labels:
        if runs and runs[-1][0] is lab:
            runs[-1] = (lab, runs[-1][1], t)
        else:
            runs.append((lab, t, t))
    return runs


def selection_outage_probability(
    fade_threshold_db: float,
    n_trials: int,
    decorrelation: float,
    seed: int,
) -> tuple[float, float]:
    """Monte Carlo outage of one branch versus best-of-two selection.

    A burst is in outage when its power gain (unit mean) falls below
    ``fade_threshold_db``. Returns ``(p_single, p_selected)``.
    """
    if n_trials < 1000:
        raise ValueError("n_trials must be >= 1000")
    if not 0.0 <= decorrelation <= 1.0:
        raise ValueError("decorrelation must lie in [0, 1]")
    h0, h1 = burst_gains(n_trials, decorrelation, seed)
    thr = 10.0 ** (fade_threshold_db / 10.0)
    p0 = np.abs(h0) ** 2
    p1 = np.abs(h1) ** 2
    out0 = p0 < thr
    selected = np.where(p1 > p0, p1, p0)
    return float(out0.mean()), float((selected < thr).mean())


def write_regions_csv(trace_lo: RssiTrace, trace_hi: RssiTrace, labels, path, meta: dict | None = None) -> None:
    rows = (
        (t, lo, hi, lab.value)
        for (t, lab), lo, hi in zip(labels, trace_lo.levels_db, trace_hi.levels_db)
    )
    write_csv(path, ["time_s", "level_lo_db", "level_hi_db", "region"], rows, meta)
