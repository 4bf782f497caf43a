"""Report figures rendered alongside the delimited outputs.

Every CLI report path drops a PNG next to its CSV/JSON so results can be
eyeballed without a notebook. Agg backend only; no display required.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .signals import Muscle


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def pam_curves_figure(curves: dict, path: str | Path) -> Path:
    """Force vs contraction, one line per charge pressure."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for pressure in sorted(curves):
        xs, fs = zip(*curves[pressure])
        ax.plot(xs, fs, label=f"{pressure:g} psi")
    ax.set_xlabel("contraction (mm)")
    ax.set_ylabel("force (N)")
    ax.set_title("PAM quasistatic force vs contraction")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def filter_response_figure(freq, bandpass_db, notch_db, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(freq, bandpass_db, label="bandpass")
    ax.plot(freq, notch_db, label="notch")
    ax.plot(freq, bandpass_db + notch_db, label="chain", ls="--")
    ax.set_ylim(-80, 5)
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("gain (dB)")
    ax.set_title("Preprocessing chain frequency response (zero-phase)")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def confusion_figure(report: dict, path: str | Path) -> Path:
    """Per-pair confusion matrices with accuracies in the titles."""
    pairs = report["pairs"]
    fig, axes = plt.subplots(1, len(pairs), figsize=(5 * len(pairs), 4))
    if len(pairs) == 1:
        axes = [axes]
    for ax, (pair, cm) in zip(axes, pairs.items()):
        counts = np.array(cm["counts"])
        ax.imshow(counts, cmap="Blues")
        classes = cm["classes"]
        ax.set_xticks(range(len(classes)), classes)
        ax.set_yticks(range(len(classes)), classes)
        ax.set_xlabel("predicted")
        ax.set_ylabel("true")
        for i in range(counts.shape[0]):
            for j in range(counts.shape[1]):
                ax.text(j, i, str(counts[i, j]), ha="center", va="center",
                        color="black" if counts[i, j] < counts.max() / 2 else "white")
        ax.set_title(f"{pair}: {cm['accuracy']*100:.2f}%")
    fig.suptitle("Pair classification accuracy (simulator)")
    return _save(fig, path)


def history_figure(histories: dict, path: str | Path) -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for muscle, history in histories.items():
        epochs = [e["epoch"] for e in history.epochs]
        ax1.plot(epochs, [e["val_loss"] for e in history.epochs], label=muscle)
        ax2.plot(epochs, [e["val_acc"] for e in history.epochs], label=muscle)
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("validation loss")
    ax2.set_xlabel("epoch")
    ax2.set_ylabel("validation accuracy")
    ax1.legend(fontsize=8)
    ax2.legend(fontsize=8)
    ax1.grid(alpha=0.3)
    ax2.grid(alpha=0.3)
    fig.suptitle("Training history")
    return _save(fig, path)


def comparison_figure(report, path: str | Path) -> Path:
    """Assisted vs unassisted %MVC bars with std whiskers."""
    fig, ax = plt.subplots(figsize=(4.5, 4))
    means = [report.unassisted_mean_pct_mvc, report.assisted_mean_pct_mvc]
    stds = [report.unassisted_std_pct_mvc, report.assisted_std_pct_mvc]
    ax.bar(["unassisted", "assisted"], means, yerr=stds, capsize=6,
           color=["#b23b3b", "#3b7ab2"])
    ax.set_ylabel("mean EMG activation (%MVC)")
    title = f"{report.motion}, load {report.load_kg:g} kg\n"
    title += f"reduction ratio {report.reduction_ratio:.2f}x"
    ax.set_title(title)
    ax.grid(alpha=0.3, axis="y")
    return _save(fig, path)


def timeline_figure(timeline, path: str | Path) -> Path:
    """Pressures, FSM state band, and per-muscle EMG over the scenario."""
    ticks = timeline.ticks
    fig, (ax1, ax2, ax3) = plt.subplots(3, 1, figsize=(9, 8), sharex=True)
    t_s = ticks["t_ms"] / 1000.0
    for pam_name in ("elbow", "shoulder", "shoulder_aux"):
        ax1.plot(t_s, ticks[f"pressure_{pam_name}"], label=pam_name)
    ax1.set_ylabel("pressure (psi)")
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3)

    states = ticks["fsm_state"]
    unique = list(dict.fromkeys(states))
    level = {s: i for i, s in enumerate(unique)}
    ax2.step(t_s, [level[s] for s in states], where="post")
    ax2.set_yticks(range(len(unique)), unique, fontsize=7)
    ax2.set_ylabel("FSM state")
    ax2.grid(alpha=0.3)

    emg_events: dict[str, list] = {m.value: [] for m in Muscle}
    for ev in timeline.of_kind("emg_sample"):
        emg_events[ev.payload["muscle"]].append((ev.t_ms / 1000.0, ev.payload["mv"]))
    for muscle, points in emg_events.items():
        if points:
            ts, vs = zip(*points)
            ax3.plot(ts, vs, label=muscle, lw=0.8)
    ax3.set_xlabel("time (s)")
    ax3.set_ylabel("EMG (mV)")
    ax3.legend(fontsize=8)
    ax3.grid(alpha=0.3)
    fig.suptitle(f"Scenario: {timeline.meta['scenario']['name']}")
    return _save(fig, path)
