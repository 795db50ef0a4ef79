"""ISM band planner reproducing the frequency-choice table."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..csvio import write_csv

# wavelengths in the table were worked out with c = 3e8 m/s
TABLE_C = 3e8


@dataclass(frozen=True)
class BandInfo:
    span_mhz: tuple[float, float]
    delta_f_mhz: float
    lambda_cm: float
    space_diversity_verdict: str
    remark: str
    nominal_mhz: float
    lambda_exact_cm: float

    def __post_init__(self):
        lo, hi = self.span_mhz
        if self.delta_f_mhz != hi - lo:
            raise ValueError("delta_f must equal the span width")


# (low MHz, high MHz, nominal MHz, printed significant figures, verdict, remark)
_TABLE = (
    (900.0, 930.0, 900.0, 2, "Not effective", "Δf less, λ more."),
    (2400.0, 2480.0, 2400.0, 3, "Effective", "Δf more, λ less"),
    (5760.0, 5840.0, 5800.0, 4, "More effective", "Δf more, λ least"),
)


def round_sig(x: float, digits: int) -> float:
    if x == 0:
        return 0.0
    return round(x, digits - 1 - int(math.floor(math.log10(abs(x)))))


def band_report() -> list[BandInfo]:
    """The three ISM candidates with bandwidth, wavelength and verdict.

    Wavelength is taken at each band's nominal ISM designation (900 MHz,
    2.4 GHz, 5.8 GHz) with c = 3e8 and rounded to the precision the table
    prints; the unrounded value is kept in ``lambda_exact_cm``. Verdicts
    and remarks are qualitative and carried as data.
    """
    rows = []
    for lo, hi, nominal, sig, verdict, remark in _TABLE:
        exact = TABLE_C / (nominal * 1e6) * 100
        rows.append(BandInfo((lo, hi), hi - lo, round_sig(exact, sig), verdict, remark, nominal, exact))
    return rows


def write_band_csv(rows: list[BandInfo], path, meta: dict | None = None) -> None:
    out = (
        (r.span_mhz[0], r.span_mhz[1], r.delta_f_mhz, r.lambda_cm, r.lambda_exact_cm, r.space_diversity_verdict, r.remark)
        for r in rows
    )
    write_csv(
        path,
        ["low_mhz", "high_mhz", "delta_f_mhz", "lambda_cm", "lambda_exact_cm", "space_diversity", "remark"],
        out,
        meta,
    )
