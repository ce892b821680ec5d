"""Plot-ready series and figures derived from metrics files.

Given one metrics file, emits a two-column utilization series per step
(round, active %) plus a rendered figure of the same curves.  Given a second
metrics file to compare against, also emits a per-step scheduled-round-count
table and a bar chart (typically plain vs coded: the gather steps lose one
round in coded mode).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .engine import Metrics


def utilization_series(metrics: Metrics) -> dict[int, list[tuple[int, float]]]:
    out: dict[int, list[tuple[int, float]]] = {}
    for rec in metrics.records:
        out.setdefault(rec.step, []).append((rec.round, rec.active_pct))
    return out


def write_utilization_series(metrics: Metrics, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for step, series in sorted(utilization_series(metrics).items()):
        path = out_dir / f"utilization_step_{step:02d}.csv"
        lines = ["round,active_pct"]
        lines += [f"{rnd},{pct:.2f}" for rnd, pct in series]
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


def rounds_table(metrics_a: Metrics, metrics_b: Metrics) -> list[tuple[int, int, int]]:
    """(step, scheduled rounds of a, scheduled rounds of b) for every step."""
    steps = sorted(set(metrics_a.scheduled_rounds) | set(metrics_b.scheduled_rounds))
    return [
        (s, metrics_a.scheduled_rounds.get(s, 0), metrics_b.scheduled_rounds.get(s, 0))
        for s in steps
    ]


def write_rounds_diff(metrics_a: Metrics, metrics_b: Metrics,
                      out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "rounds_diff.csv"
    lines = [f"step,rounds_{metrics_a.mode},rounds_{metrics_b.mode},delta"]
    for step, ra, rb in rounds_table(metrics_a, metrics_b):
        lines.append(f"{step},{ra},{rb},{ra - rb}")
    path.write_text("\n".join(lines) + "\n")
    return path


def render_utilization_figure(metrics: Metrics, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(8, 5))
    for step, series in sorted(utilization_series(metrics).items()):
        rounds = [r for r, _ in series]
        pcts = [p for _, p in series]
        ax.plot(rounds, pcts, marker="o", markersize=3, label=f"step {step}")
    ax.set_xlabel("round within step")
    ax.set_ylabel("active processors (%)")
    ax.set_title(f"Processor involvement per round (n={metrics.n}, {metrics.mode})")
    ax.legend(fontsize=7, ncol=2)
    ax.grid(True, alpha=0.3)
    path = out_dir / "utilization.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def render_rounds_figure(metrics_a: Metrics, metrics_b: Metrics,
                         out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    table = rounds_table(metrics_a, metrics_b)
    steps = [row[0] for row in table]
    fig, ax = plt.subplots(figsize=(8, 4))
    width = 0.38
    xs = range(len(steps))
    ax.bar([x - width / 2 for x in xs], [row[1] for row in table],
           width=width, label=metrics_a.mode)
    ax.bar([x + width / 2 for x in xs], [row[2] for row in table],
           width=width, label=metrics_b.mode)
    ax.set_xticks(list(xs))
    ax.set_xticklabels([str(s) for s in steps])
    ax.set_xlabel("step")
    ax.set_ylabel("scheduled rounds")
    ax.set_title(f"Rounds per step (n={metrics_a.n})")
    ax.legend()
    path = out_dir / "rounds_diff.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def generate_report(metrics: Metrics, out_dir: Path,
                    compare: Metrics | None = None) -> list[Path]:
    """All series files and figures for one (optionally two) metrics files."""
    written = write_utilization_series(metrics, out_dir)
    written.append(render_utilization_figure(metrics, out_dir))
    if compare is not None:
        written.append(write_rounds_diff(metrics, compare, out_dir))
        written.append(render_rounds_figure(metrics, compare, out_dir))
    return written
