"""Report rendering: delimited timing/metric files plus matplotlib figures."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def write_timings_csv(path: str | Path, column: str, values: list[float]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", column])
        for i, v in enumerate(values):
            writer.writerow([i, f"{v:.4f}"])


def read_timings_csv(path: str | Path) -> list[float]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        return [float(row[1]) for row in reader if len(row) >= 2]


def timings_figure(
    path: str | Path,
    accumulate_ms: list[float] | None = None,
    lookup_ms: list[float] | None = None,
) -> None:
    """Per-frame timing traces; skipped silently when there is nothing to plot."""
    series = [(n, v) for n, v in (("accumulate", accumulate_ms), ("lookup", lookup_ms)) if v]
    if not series:
        return
    fig, axes = plt.subplots(1, len(series), figsize=(6 * len(series), 3.2), squeeze=False)
    for ax, (name, values) in zip(axes[0], series):
        ax.plot(values, lw=1.0)
        ax.axhline(np.mean(values), color="tab:red", ls="--", lw=0.8,
                   label=f"mean {np.mean(values):.2f} ms")
        ax.set_xlabel("call")
        ax.set_ylabel("ms")
        ax.set_title(f"{name} time")
        ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def reconstruction_figure(path: str | Path, texture: np.ndarray, score_vis: np.ndarray) -> None:
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 4.4))
    ax0.imshow(np.clip(texture, 0, 1))
    ax0.set_title("reconstructed texture")
    im = ax1.imshow(score_vis, cmap="viridis")
    ax1.set_title("score map (normalized)")
    fig.colorbar(im, ax=ax1, fraction=0.046)
    for ax in (ax0, ax1):
        ax.set_xticks(())
        ax.set_yticks(())
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def eval_figure(path: str | Path, report) -> None:
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(8, 3.4))
    ax0.bar(["TPR"], [report.true_positive_rate], color="tab:blue")
    ax0.set_ylim(0, 1.05)
    ax0.axhline(1.0, color="gray", lw=0.6, ls=":")
    ax0.set_title(f"true positive rate = {report.true_positive_rate:.3f}")
    names = ["gt", "candidates", "assigned", "correct"]
    vals = [report.gt_instances, report.candidates, report.assignments, report.correct_assignments]
    ax1.bar(names, vals, color="tab:gray")
    ax1.set_title("counts")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
