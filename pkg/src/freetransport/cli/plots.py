"""Deterministic SVG figures (fixed hash salt, no date metadata)."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "freetransport"


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def density_overlay(path: Path, eigenvalues: np.ndarray, measure=None, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.hist(eigenvalues, bins=80, density=True, alpha=0.5, label="pooled eigenvalues")
    if measure is not None:
        x = np.linspace(measure.a - 0.1, measure.b + 0.1, 400)
        ax.plot(x, measure.density(x), "k-", lw=1.2, label="equilibrium density")
    ax.set_xlabel("x")
    ax.legend(fontsize=7)
    ax.set_title(title, fontsize=9)
    return _save(fig, path)


def lines(path: Path, x, ys: Sequence, labels: Sequence[str], xlabel: str, ylabel: str, logy: bool = False, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for y, lab in zip(ys, labels):
        ax.plot(x, y, label=lab)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=7)
    ax.set_title(title, fontsize=9)
    return _save(fig, path)


def residual_bars(path: Path, labels: Sequence[str], means, errs, title: Optional[str] = None) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    idx = np.arange(len(labels))
    ax.bar(idx, means, yerr=errs, capsize=2)
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_xticks(idx)
    ax.set_xticklabels(labels, rotation=60, fontsize=6)
    ax.set_ylabel("SD residual")
    if title:
        ax.set_title(title, fontsize=9)
    return _save(fig, path)
