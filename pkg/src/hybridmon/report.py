"""Replay report files: delimited snapshots plus rendered figures.

A report directory holds `snapshots.jsonl` (one canonical JSON line per
snapshot), `report.json` (the full replay result), and two figures: a
verdict timeline per component and the cost curves over the trace.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Patch

from .automata import Verdict
from .model import ReplayReport, snapshot_json

_VERDICT_COLORS = {
    Verdict.PS: "#2e7d32",
    Verdict.TS: "#a5d6a7",
    Verdict.TV: "#ffcc80",
    Verdict.PV: "#c62828",
}


def write_report(report: ReplayReport, out_dir: str | Path) -> list[Path]:
    """Write the delimited output and figures; returns the created paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    created = []

    jsonl = out / "snapshots.jsonl"
    jsonl.write_text(
        "".join(snapshot_json(s) + "\n" for s in report.snapshots)
    )
    created.append(jsonl)

    full = out / "report.json"
    full.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    created.append(full)

    created.append(_verdict_timeline(report, out / "verdicts.png"))
    created.append(_cost_curves(report, out / "costs.png"))
    return created


def _step_labels(report: ReplayReport) -> list[str]:
    labels = []
    for snapshot in report.snapshots:
        labels.append("start" if snapshot.event is None else snapshot.event.name)
    return labels


def _verdict_timeline(report: ReplayReport, path: Path) -> Path:
    snapshots = report.snapshots
    component_ids = [c.component_id for c in snapshots[0].components]
    rows = component_ids + ["global"]
    fig, ax = plt.subplots(
        figsize=(max(4.0, 1.0 + 0.9 * len(snapshots)), 1.0 + 0.5 * len(rows))
    )
    for x, snapshot in enumerate(snapshots):
        verdicts = [c.verdict for c in snapshot.components] + [
            snapshot.global_verdict
        ]
        for y, verdict in enumerate(verdicts):
            ax.add_patch(
                plt.Rectangle(
                    (x, len(rows) - 1 - y),
                    1,
                    1,
                    facecolor=_VERDICT_COLORS[verdict],
                    edgecolor="white",
                )
            )
        if snapshot.conflict:
            ax.plot(x + 0.5, len(rows) + 0.25, marker="v", color="#c62828")
            ax.text(
                x + 0.5,
                len(rows) + 0.45,
                "conflict",
                ha="center",
                fontsize=8,
                color="#c62828",
            )
    ax.set_xlim(0, len(snapshots))
    ax.set_ylim(0, len(rows) + 0.9)
    ax.set_xticks([i + 0.5 for i in range(len(snapshots))])
    ax.set_xticklabels(_step_labels(report), rotation=45, ha="right", fontsize=8)
    ax.set_yticks([len(rows) - 1 - i + 0.5 for i in range(len(rows))])
    ax.set_yticklabels(rows, fontsize=9)
    ax.set_title("verdicts per step")
    ax.legend(
        handles=[
            Patch(facecolor=color, label=verdict.value)
            for verdict, color in _VERDICT_COLORS.items()
        ],
        loc="upper left",
        bbox_to_anchor=(1.01, 1.0),
        fontsize=8,
    )
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _cost_curves(report: ReplayReport, path: Path) -> Path:
    snapshots = report.snapshots
    xs = list(range(len(snapshots)))
    fig, ax = plt.subplots(figsize=(max(4.0, 1.0 + 0.9 * len(snapshots)), 3.0))
    ax.step(xs, [s.cost_cur for s in snapshots], where="post", label="cost_cur")
    ax.step(
        xs,
        [s.cost_best for s in snapshots],
        where="post",
        linestyle="--",
        label="cost_best",
    )
    if report.first_conflict_index is not None:
        ax.axvline(
            report.first_conflict_index, color="#c62828", linestyle=":", label="conflict"
        )
    ax.set_xticks(xs)
    ax.set_xticklabels(_step_labels(report), rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("violation cost")
    ax.set_title("current and best achievable cost")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
