"""SVG figures rendered from the harness CSV outputs.

Every function here reads a CSV written by `uavcharge.harness` and writes one
standalone SVG. Nothing is fed back into the data files.
"""

from __future__ import annotations

import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed element ids and no timestamp, so reruns give identical bytes
_RC = {
    "svg.hashsalt": "uavcharge",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
}
_METADATA = {"Date": None, "Creator": None}

POLICY_LABELS = {"learned": "Q-learning", "random": "Random trajectory", "static": "Static hovering"}
POLICY_COLORS = {"learned": "#1f77b4", "random": "#ff7f0e", "static": "#2ca02c"}


def _read(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata=_METADATA)
    plt.close(fig)


def moving_average(values, window: int) -> np.ndarray:
    """Trailing mean over up to `window` samples; the first points average what exists so far."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return x
    c = np.cumsum(np.insert(x, 0, 0.0))
    idx = np.arange(1, x.size + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def learning_curve(csv_path, svg_path, window: int = 500, title: str | None = None) -> None:
    rows = _read(csv_path)
    ep = np.array([int(r["episode"]) for r in rows])
    ft = np.array([float(r["mean_flight_time_min"]) for r in rows])
    eps = np.array([float(r["epsilon"]) for r in rows])

    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(ep, moving_average(ft, window), color=POLICY_COLORS["learned"], lw=1.2)
        ax.set_xlabel("Episode")
        ax.set_ylabel(f"Mean rUAV flying time (min, {window}-episode average)")
        zero = np.flatnonzero(eps == 0.0)
        if zero.size and zero[0] > 0:
            ax.axvline(ep[zero[0]], color="0.5", ls="--", lw=0.8)
            ax.annotate(
                "exploration = 0",
                (ep[zero[0]], 0.02),
                xycoords=("data", "axes fraction"),
                ha="right",
                fontsize=8,
                color="0.4",
            )
        if title:
            ax.set_title(title)
        fig.tight_layout()
        _save(fig, svg_path)


def comparison_bars(csv_path, svg_path, title: str | None = None) -> None:
    rows = _read(csv_path)
    names = [r["policy"] for r in rows]
    means = np.array([float(r["mean_flight_time_min"]) for r in rows])
    errs = np.array([float(r["std_error_min"]) for r in rows])

    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 4))
        x = np.arange(len(rows))
        ax.bar(x, means, yerr=errs, capsize=4, color=[POLICY_COLORS.get(n, "0.6") for n in names])
        ax.set_xticks(x, [POLICY_LABELS.get(n, n) for n in names])
        ax.set_ylabel("Mean rUAV flying time (min)")
        # differences are small next to the absolute level; zoom on the bar tops
        if len(rows):
            span = max(float(np.ptp(means)), float(errs.max()), 1e-3)
            ax.set_ylim(means.min() - 3 * span, means.max() + 2 * span)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        _save(fig, svg_path)


def sweep_bars(csv_path, svg_path, title: str | None = None) -> None:
    rows = _read(csv_path)
    by_policy = defaultdict(dict)
    powers = []
    for r in rows:
        p = float(r["tx_power"])
        if p not in powers:
            powers.append(p)
        by_policy[r["policy"]][p] = (float(r["mean_flight_time_min"]), float(r["std_error_min"]))

    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7, 4))
        x = np.arange(len(powers))
        width = 0.8 / max(len(by_policy), 1)
        lows = []
        for k, (name, cells) in enumerate(by_policy.items()):
            m = np.array([cells[p][0] for p in powers])
            e = np.array([cells[p][1] for p in powers])
            lows.append(m.min())
            ax.bar(
                x + (k - (len(by_policy) - 1) / 2) * width,
                m,
                width,
                yerr=e,
                capsize=3,
                label=POLICY_LABELS.get(name, name),
                color=POLICY_COLORS.get(name, None),
            )
        ax.set_xticks(x, [f"{p:g} W" for p in powers])
        ax.set_xlabel("Transmit power")
        ax.set_ylabel("Mean rUAV flying time (min)")
        if lows:
            top = max(v[0] for cells in by_policy.values() for v in cells.values())
            span = max(top - min(lows), 1e-3)
            ax.set_ylim(min(lows) - 0.5 * span, top + 0.3 * span)
        ax.legend(frameon=False, fontsize=8)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        _save(fig, svg_path)
