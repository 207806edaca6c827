"""Figure rendering for run outputs: one PNG alongside each table."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .cli import ResultTable


def _finite(xs, ys):
    pts = [(x, y) for x, y in zip(xs, ys) if isinstance(y, (int, float)) and math.isfinite(y)]
    return [p[0] for p in pts], [p[1] for p in pts]


def render_figure(table: ResultTable, mode: str, path: str) -> None:
    """Render the table's curves; layout depends on the run mode."""
    if mode == "pulses":
        _render_pulses(table, path)
        return
    _render_metrics(table, path, mode)


def _render_pulses(table: ResultTable, path: str) -> None:
    alpha = table.column(table.columns[0])
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for col in table.columns[1:]:
        if not col.startswith("eff_cross_ul:"):
            continue
        label = col.split(":", 1)[1].split(" [")[0]
        x, y = _finite(alpha, table.column(col))
        ax.plot(x, y, label=label)
    ax.set_xlabel(r"overlap parameter $\alpha$")
    ax.set_ylabel(r"effective cross-mode power factor $|\tilde{C}_u|^2$")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _render_metrics(table: ResultTable, path: str, mode: str) -> None:
    xcol = table.columns[0]
    x = table.column(xcol)
    fig, axes = plt.subplots(1, 3, figsize=(12.5, 4.0))
    panels = (("bep", "bit error probability"), ("outage", "outage probability"), ("eff_rate", "effective rate [bit/s]"))
    for ax, (metric, ylabel) in zip(axes, panels):
        for d, style in (("ul", "-o"), ("dl", "-s")):
            ana = f"{metric}_{d} [{'bit/s' if metric == 'eff_rate' else '1'}]"
            if ana in table.columns:
                xs, ys = _finite(x, table.column(ana))
                ax.plot(xs, ys, style, ms=3, label=f"{d} analytic")
            mc = f"mc_{metric}_{d} [{'bit/s' if metric == 'eff_rate' else '1'}]"
            ci = f"mc_{metric}_{d}_ci95 [{'bit/s' if metric == 'eff_rate' else '1'}]"
            if mc in table.columns:
                xs, ys = _finite(x, table.column(mc))
                errs = [e for xv, e in zip(x, table.column(ci)) if xv in xs]
                ax.errorbar(xs, ys, yerr=errs[: len(ys)], fmt="x", ms=4, capsize=2, label=f"{d} MC")
        ax.set_xlabel(xcol)
        ax.set_ylabel(ylabel)
        ax.grid(alpha=0.3)
        ax.legend(fontsize=7)
    fig.suptitle(f"fdcell {mode}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
