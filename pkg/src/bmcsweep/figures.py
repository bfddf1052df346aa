"""PNG charts rendered next to the delimited reports."""

from __future__ import annotations

import os

from bmcsweep.analysis import ViolationCategory
from bmcsweep.report import RunReport

CATEGORY_PNG = "violations_by_category.png"
CPU_PNG = "cpu_time_by_function.png"
TOP_N = 25


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_categories(report: RunReport, path: str) -> str:
    plt = _pyplot()
    cats = [c for c in ViolationCategory]
    counts = [report.summary.violations_by_category.get(c, 0) for c in cats]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar([c.value for c in cats], counts, color="#4c72b0")
    ax.set_ylabel("violations")
    ax.set_title(f"Violations by category ({report.summary.violations_total} total)")
    for x, n in enumerate(counts):
        if n:
            ax.text(x, n, str(n), ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_cpu_time(report: RunReport, path: str, top_n: int = TOP_N) -> str:
    plt = _pyplot()
    ranked = sorted(report.invocations, key=lambda i: (-i.run.cpu_time_s, i.file, i.function))
    ranked = ranked[:top_n]
    labels = [f"{os.path.basename(i.file)}::{i.function}" for i in ranked]
    times = [i.run.cpu_time_s for i in ranked]
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.3 * len(ranked) + 1)))
    ax.barh(range(len(ranked)), times, color="#dd8452")
    ax.set_yticks(range(len(ranked)))
    ax.set_yticklabels(labels, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("checker CPU time (s)")
    ax.set_title(f"Most expensive invocations (top {len(ranked)})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_figures(report: RunReport, output_dir: str) -> list[str]:
    return [
        plot_categories(report, os.path.join(output_dir, CATEGORY_PNG)),
        plot_cpu_time(report, os.path.join(output_dir, CPU_PNG)),
    ]
