"""Report emission: delimited tables, JSON summaries, and rendered figures.

Each report writes three sibling files from one prefix: `<prefix>.csv`
(the raw table), `<prefix>.json` (scalar summary metrics), and
`<prefix>.png` (the rendered figure). Rendering uses the Agg backend and
fixed metadata so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .analysis import Histogram, SweepResult

_PNG_METADATA = {"Software": "margin-probe"}
_AXIS_LABELS = {
    "center_freq_thz": "CUT center frequency (THz)",
    "fill_fraction": "fill fraction",
    "p_ch_dbm": "launch power (dBm)",
}


def _write_json(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_histogram(hist: Histogram, prefix) -> list[str]:
    """Emit <prefix>.{csv,json,png} for an error histogram."""
    prefix = str(prefix)
    with open(prefix + ".csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("bin_left_db", "bin_right_db", "count"))
        for left, right, count in zip(hist.bin_edges[:-1],
                                      hist.bin_edges[1:], hist.counts):
            writer.writerow((repr(left), repr(right), count))
    _write_json(prefix + ".json", {
        "mean_error_db": hist.mean_db,
        "std_error_db": hist.std_db,
        "rmse_db": hist.rmse_db,
        "n_samples": hist.n_samples,
    })
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    lefts = hist.bin_edges[:-1]
    widths = [r - l for l, r in zip(hist.bin_edges[:-1], hist.bin_edges[1:])]
    ax.bar(lefts, hist.counts, width=widths, align="edge",
           color="#4878cf", edgecolor="white", linewidth=0.3)
    ax.set_xlabel("estimation error (dB)")
    ax.set_ylabel("count")
    ax.set_title(f"mean {hist.mean_db:+.3f} dB, RMSE {hist.rmse_db:.3f} dB")
    fig.tight_layout()
    fig.savefig(prefix + ".png", dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)
    return [prefix + ext for ext in (".csv", ".json", ".png")]


def write_sweep(result: SweepResult, prefix, summary: dict | None = None,
                ylabel: str = "margin (dB)") -> list[str]:
    """Emit <prefix>.{csv,json,png} for a sweep result."""
    prefix = str(prefix)
    with open(prefix + ".csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow((result.variable, "gn_mean", "gn_std",
                         "ml_mean", "ml_std", "count"))
        for row in zip(result.grid, result.gn_mean, result.gn_std,
                       result.ml_mean, result.ml_std, result.counts):
            writer.writerow([repr(v) for v in row[:5]] + [row[5]])
    doc = {"variable": result.variable,
           "n_grid_values": len(result.grid),
           "n_samples": int(sum(result.counts))}
    doc.update(summary or {})
    _write_json(prefix + ".json", doc)

    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    x = result.grid
    for mean, std, label, color in (
            (result.gn_mean, result.gn_std, "engine", "#4878cf"),
            (result.ml_mean, result.ml_std, "model", "#d65f5f")):
        lo = [m - s for m, s in zip(mean, std)]
        hi = [m + s for m, s in zip(mean, std)]
        ax.fill_between(x, lo, hi, alpha=0.25, color=color, linewidth=0)
        ax.plot(x, mean, color=color, label=label)
    ax.set_xlabel(_AXIS_LABELS.get(result.variable, result.variable))
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    fig.savefig(prefix + ".png", dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)
    return [prefix + ext for ext in (".csv", ".json", ".png")]


def write_granularity(rows, prefix) -> list[str]:
    """Emit <prefix>.{csv,json,png} for a granularity sweep table."""
    prefix = str(prefix)
    with open(prefix + ".csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("granularity", "rmse_original_db", "rmse_retrained_db"))
        for g, orig, retrained in rows:
            writer.writerow((repr(g), repr(orig), repr(retrained)))
    summary = {f"rmse_retrained_at_{g:g}": r for g, _, r in rows}
    summary.update({f"rmse_original_at_{g:g}": o for g, o, _ in rows})
    _write_json(prefix + ".json", summary)

    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    gs = [g for g, _, _ in rows]
    ax.plot(gs, [o for _, o, _ in rows], "o-", color="#4878cf",
            label="original model")
    ax.plot(gs, [r for _, _, r in rows], "s-", color="#d65f5f",
            label="retrained")
    ax.set_xlabel("fill-feature granularity")
    ax.set_ylabel("RMSE (dB)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(prefix + ".png", dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)
    return [prefix + ext for ext in (".csv", ".json", ".png")]
