"""Figure rendering for scenario reports.

Figures are written next to the CSVs they are drawn from. The CSVs remain
the record; the PNGs are a convenience for eyeballing a run.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

REGION_COLOURS = {"I": "#ffffff", "II": "#ff9999", "III": "#66b3ff", "both-faded": "#999999"}


def prettify(ax):
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    ax.grid(alpha=0.3, linestyle=":")


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_rssi(t, rssi_a, rssi_b, selected, path, title=""):
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.plot(t, rssi_a, lw=0.8, label="antenna A")
    ax.plot(t, rssi_b, lw=0.8, alpha=0.7, label="antenna B")
    ax.plot(t, selected, lw=1.2, color="k", label="selected")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("RSSI (dB)")
    ax.set_title(title)
    ax.legend(frameon=False, ncol=3, fontsize=8)
    prettify(ax)
    return _save(fig, path)


def plot_regions(t, level_lo, level_hi, labels, carriers_hz, path):
    fig, ax = plt.subplots(figsize=(8, 3.5))
    labs = [lab.value for _, lab in labels]
    start = 0
    for i in range(1, len(labs) + 1):
        if i == len(labs) or labs[i] != labs[start]:
            if labs[start] != "I":
                ax.axvspan(t[start], t[i - 1], color=REGION_COLOURS[labs[start]], alpha=0.4, lw=0)
                ax.text((t[start] + t[i - 1]) / 2, np.max(level_hi) + 1, labs[start], ha="center", fontsize=8)
            start = i
    ax.plot(t, level_lo, lw=1, label=f"{carriers_hz[0] / 1e9:g} GHz")
    ax.plot(t, level_hi, lw=1, label=f"{carriers_hz[1] / 1e9:g} GHz")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("level (dB)")
    ax.legend(frameon=False, fontsize=8)
    prettify(ax)
    return _save(fig, path)


def plot_margin(curve, path, title=""):
    off = np.array([c[0] for c in curve]) / 1e6
    pw = np.array([c[1] for c in curve])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(off, pw, "o-")
    ax.fill_between(off, pw.min() - 10, pw, alpha=0.15)
    ax.set_xlabel("jammer offset (MHz)")
    ax.set_ylabel("max tolerable jammer (dB)")
    ax.set_title(title)
    prettify(ax)
    return _save(fig, path)


def plot_prt(rows, path, title=""):
    prt = np.array([r.prt_s for r in rows]) * 1e6
    rng = np.array([r.max_unambiguous_range_m for r in rows]) / 1e3
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(prt, rng, "o-")
    for r, x in zip(rows, prt):
        if r.valid:
            ax.axvspan(x - 2, x + 2, color="#99ff99", alpha=0.5, lw=0)
    ax.set_xlabel("PRT (us)")
    ax.set_ylabel("max unambiguous range (km)")
    ax.set_title(title)
    prettify(ax)
    return _save(fig, path)


def plot_ranges(rows, true_ranges, path, title=""):
    t = [row[0] * 1e3 for row in rows]
    r = [row[1].range_m if row[1].detected else np.nan for row in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, r, "o", label="estimate")
    for tr in true_ranges:
        ax.axhline(tr, ls="--", lw=0.8, color="gray")
    ax.set_xlabel("time (ms)")
    ax.set_ylabel("range (m)")
    ax.set_title(title)
    prettify(ax)
    return _save(fig, path)
