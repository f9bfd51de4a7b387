"""Render figures from a run directory's CSV outputs.

The delimited files remain the contract; these PNGs are the human view.
Each known CSV maps to one figure under ``<run>/figures/``.
"""

from __future__ import annotations

import glob
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .config import read_csv


def _load_numeric(path):
    header, rows = read_csv(path)
    def to_num(v):
        if v in ("true", "True"):
            return 1.0
        if v in ("false", "False"):
            return 0.0
        try:
            return float(v)
        except ValueError:
            return np.nan
    return header, np.array([[to_num(v) for v in row] for row in rows])


def _fig_path(run_dir: str, name: str) -> str:
    fig_dir = os.path.join(run_dir, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    return os.path.join(fig_dir, name)


def _render_training(run_dir: str, csv_path: str) -> str:
    header, data = _load_numeric(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    epochs = data[:, 0]
    for col in range(1, data.shape[1]):
        series = data[:, col]
        if np.all(series > 0):
            ax.semilogy(epochs, series, label=header[col])
        else:
            ax.plot(epochs, series, label=header[col])
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.legend(frameon=False)
    ax.set_title("training loss")
    out = _fig_path(run_dir, "training_loss.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def _grid_axes(data: np.ndarray, n_rows: int) -> list[np.ndarray]:
    axes = []
    for col in range(data.shape[1]):
        uniq = np.unique(data[:, col])
        axes.append(uniq)
        if int(np.prod([len(a) for a in axes])) == n_rows:
            return axes
    return []


def _render_field(run_dir: str, csv_path: str) -> str | None:
    header, data = _load_numeric(csv_path)
    axes = _grid_axes(data, data.shape[0])
    if not axes:
        return None
    n_axes = len(axes)
    field_names = header[n_axes:]
    shape = tuple(len(a) for a in axes)
    values = data[:, n_axes:].reshape(shape + (len(field_names),))
    stem = os.path.splitext(os.path.basename(csv_path))[0]

    if n_axes == 1:
        fig, ax = plt.subplots(figsize=(6, 4))
        for i, name in enumerate(field_names):
            ax.plot(axes[0], values[:, i], label=name)
        ax.set_xlabel(header[0])
        ax.legend(frameon=False)
        ax.set_title(stem)
    else:
        if n_axes == 3:
            # middle slice along the last (time) axis
            mid = shape[2] // 2
            values = values[:, :, mid, :]
        fig, axs = plt.subplots(
            1, len(field_names), figsize=(4.2 * len(field_names), 3.6), squeeze=False
        )
        for i, name in enumerate(field_names):
            ax = axs[0][i]
            mesh = ax.pcolormesh(axes[0], axes[1], values[..., i].T, shading="auto", cmap="RdBu_r")
            fig.colorbar(mesh, ax=ax)
            ax.set_xlabel(header[0])
            ax.set_ylabel(header[1])
            ax.set_title(f"{stem}:{name}")
    out = _fig_path(run_dir, f"{stem}.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def _render_sweep(run_dir: str, csv_path: str) -> str:
    _, data = _load_numeric(csv_path)
    ts, errors, slope = data[:, 0], data[:, 1], data[0, 2]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(ts, errors, "o-", label="conversion error")
    if np.isfinite(slope) and errors[0] > 0:
        guide = errors[0] * (ts / ts[0]) ** -1.0
        ax.loglog(ts, guide, "k--", alpha=0.5, label="1/T guide")
    ax.set_xlabel("timesteps T")
    ax.set_ylabel("output error")
    ax.set_title(f"error vs T (fit slope {slope:.2f})")
    ax.legend(frameon=False)
    out = _fig_path(run_dir, "sweep_t.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def _render_bound(run_dir: str, csv_path: str) -> str:
    _, data = _load_numeric(csv_path)
    lhs, rhs = data[:, 1], data[:, 2]
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.scatter(rhs, lhs, s=8, alpha=0.6)
    finite = np.concatenate([lhs[lhs > 0], rhs[rhs > 0]])
    if finite.size:
        lo, hi = finite.min(), finite.max()
        ax.plot([lo, hi], [lo, hi], "k--", alpha=0.6, label="equality")
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("weighted local errors (rhs)")
    ax.set_ylabel("output error (lhs)")
    ax.set_title("output error vs weighted local errors")
    ax.legend(frameon=False)
    out = _fig_path(run_dir, "bound.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def _render_calibration(run_dir: str, csv_path: str) -> str:
    header, rows = read_csv(csv_path)
    labels = [r[0] for r in rows]
    pre = np.array([float(r[1]) for r in rows])
    post = np.array([float(r[2]) for r in rows])
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(x - 0.2, pre, width=0.4, label="before")
    ax.bar(x + 0.2, post, width=0.4, label="after")
    ax.set_xticks(x, labels, rotation=45, ha="right")
    ax.set_ylabel("local error norm")
    stem = os.path.splitext(os.path.basename(csv_path))[0]
    ax.set_title(stem)
    ax.legend(frameon=False)
    out = _fig_path(run_dir, f"{stem}.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_run(run_dir: str) -> list[str]:
    """Render every known CSV in ``<run>/csv``; returns written figure paths."""
    csv_dir = os.path.join(run_dir, "csv")
    written: list[str] = []

    def try_render(fn, path):
        try:
            out = fn(run_dir, path)
        except Exception:
            return
        if out:
            written.append(out)

    train_log = os.path.join(csv_dir, "train_log.csv")
    if os.path.exists(train_log):
        try_render(_render_training, train_log)
    for path in sorted(glob.glob(os.path.join(csv_dir, "field_*.csv"))):
        try_render(_render_field, path)
    sweep = os.path.join(csv_dir, "sweep.csv")
    if os.path.exists(sweep):
        try_render(_render_sweep, sweep)
    bound = os.path.join(csv_dir, "bound.csv")
    if os.path.exists(bound):
        try_render(_render_bound, bound)
    for path in sorted(glob.glob(os.path.join(csv_dir, "calibration_*.csv"))):
        try_render(_render_calibration, path)
    return written
