"""Render validation reports from an event log to figures and CSV.

For every validation_report event this writes, side by side:
  validation_<seq>.png  loss-matrix heatmap plus risk/err bars, winner marked
  validation_<seq>.csv  one row per candidate: generation_index,risk,err,selected
and a turns.csv summarizing every turn's event kinds.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .events import EvolutionEvent


def load_events(events_path: Path) -> list[EvolutionEvent]:
    events = []
    with Path(events_path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(EvolutionEvent.from_json(line))
    return events


def write_scores_csv(payload: dict, target: Path) -> None:
    selected = payload["selected_index"]
    with target.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["generation_index", "risk", "err", "selected"])
        for i, (risk, err) in enumerate(zip(payload["risk"], payload["err"]), start=1):
            writer.writerow([i, risk, err, "yes" if i == selected else "no"])


def render_validation_figure(payload: dict, target: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    loss = payload["loss_matrix"]
    risk = payload["risk"]
    err = payload["err"]
    n = len(risk)
    selected = payload["selected_index"]
    labels = [f"p{i}" for i in range(1, n + 1)]

    fig, (ax_loss, ax_scores) = plt.subplots(
        1, 2, figsize=(9, 4), gridspec_kw={"width_ratios": [1, 1.2]}
    )
    ax_loss.imshow(loss, cmap="Reds", vmin=0, vmax=1)
    ax_loss.set_xticks(range(n), labels)
    ax_loss.set_yticks(range(n), labels)
    for i in range(n):
        for j in range(n):
            ax_loss.text(j, i, str(loss[i][j]), ha="center", va="center", fontsize=9)
    ax_loss.set_title("pairwise mismatch loss")

    x = range(n)
    ax_scores.bar([i - 0.18 for i in x], risk, width=0.36, label="risk")
    ax_scores.bar([i + 0.18 for i in x], err, width=0.36, label="err")
    ax_scores.set_xticks(list(x), labels)
    ax_scores.axvline(selected - 1, color="green", linestyle="--", alpha=0.6)
    ax_scores.set_title(f"scores (winner p{selected}, verdict {payload['verdict']})")
    ax_scores.legend()

    fig.tight_layout()
    fig.savefig(target, dpi=110)
    plt.close(fig)


def write_turns_csv(events: list[EvolutionEvent], target: Path) -> None:
    by_turn: dict[tuple[str, int], list[str]] = {}
    for event in events:
        turn = event.payload.get("turn")
        if turn is None:
            continue
        by_turn.setdefault((event.session_id, turn), []).append(event.kind)
    with target.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["session_id", "turn", "event_kinds"])
        for (session_id, turn), kinds in sorted(by_turn.items()):
            writer.writerow([session_id, turn, " ".join(kinds)])


def render_report(events_path: Path, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    events = load_events(events_path)
    written: list[Path] = []
    for event in events:
        if event.kind != "validation_report":
            continue
        csv_path = out_dir / f"validation_{event.seq}.csv"
        png_path = out_dir / f"validation_{event.seq}.png"
        write_scores_csv(event.payload, csv_path)
        render_validation_figure(event.payload, png_path)
        written.extend([csv_path, png_path])
    turns_path = out_dir / "turns.csv"
    write_turns_csv(events, turns_path)
    written.append(turns_path)
    return written
