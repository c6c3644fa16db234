"""Turn sweep CSVs into the delivery / overhead / delay figure family.

One panel per (node count, area) scenario and metric, malicious-node count
on the x-axis, one errorbar series per protocol. Twelve files for the full
grid. Everything is read from the aggregate rows; the renderer never
recomputes statistics.
"""

from __future__ import annotations

import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

REQUIRED_COLUMNS = ["protocol", "n_nodes", "area_m", "n_malicious", "seed",
                    "sent", "delivered", "control_packets", "delivery_ratio",
                    "routing_overhead", "avg_delay_s", "avg_hops"]

METRICS = {
    "delivery_ratio": "Delivery ratio",
    "routing_overhead": "Routing overhead",
    "avg_delay_s": "Average end-to-end delay (s)",
}

SERIES_STYLE = {
    "gpsr": dict(color="#c0392b", marker="s", label="GPSR"),
    "sgpsr": dict(color="#2471a3", marker="o", label="S-GPSR"),
}


class CsvFormatError(ValueError):
    """The CSV does not carry what the figure family needs."""


@dataclass(frozen=True)
class SeriesPoint:
    malicious: int
    mean: float | None
    stddev: float | None


def _parse_float(text: str) -> float | None:
    return None if text == "" else float(text)


def load_aggregates(csv_path) -> dict:
    """Aggregate rows keyed by (protocol, nodes, area), each a list of
    per-malicious-count points carrying mean and stddev."""
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise CsvFormatError(f"missing columns: {', '.join(missing)}")
        rows = list(reader)

    cells = {}
    for row in rows:
        if row["seed"] not in ("mean", "stddev"):
            continue
        key = (row["protocol"], int(row["n_nodes"]), float(row["area_m"]),
               int(row["n_malicious"]))
        cells.setdefault(key, {})[row["seed"]] = row

    series = {}
    for (protocol, nodes, area, malicious), agg in sorted(cells.items()):
        if "mean" not in agg:
            raise CsvFormatError(
                f"cell {protocol}/{nodes}/{area:g}/{malicious} has no mean row")
        for metric in METRICS:
            mean = _parse_float(agg["mean"][metric])
            std = _parse_float(agg.get("stddev", {}).get(metric, ""))
            series.setdefault((metric, nodes, area), {}).setdefault(
                protocol, []).append(SeriesPoint(malicious, mean, std))
    return series


def figure_name(metric: str, nodes: int, area: float, ext: str) -> str:
    return f"fig_{metric}_{nodes}_{area:g}.{ext}"


def build_figure(metric: str, nodes: int, area: float, protocols: dict):
    """One panel; returns the figure plus the exact values plotted per
    protocol so callers can cross-check them against the CSV."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    plotted = {}
    for protocol in sorted(protocols):
        points = sorted(protocols[protocol], key=lambda p: p.malicious)
        xs = [p.malicious for p in points]
        ys = [math.nan if p.mean is None else p.mean for p in points]
        errs = [0.0 if p.stddev is None else p.stddev for p in points]
        style = SERIES_STYLE.get(protocol, dict(marker="x", label=protocol))
        ax.errorbar(xs, ys, yerr=errs, capsize=3, linewidth=1.4, **style)
        plotted[protocol] = list(zip(xs, ys))
    ax.set_xlabel("Number of malicious nodes")
    ax.set_ylabel(METRICS[metric])
    ax.set_title(f"{METRICS[metric]}: {nodes} nodes, "
                 f"{area:g}x{area:g} m, mean with stddev bars")
    if metric == "delivery_ratio":
        ax.set_ylim(0.0, 1.0)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig, plotted


def render_family(csv_path, out_dir, fmt: str = "png") -> list:
    """Write one image per metric and scenario; returns the file paths."""
    series = load_aggregates(csv_path)
    if not series:
        raise CsvFormatError("no aggregate rows (seed=mean/stddev) in the CSV")
    scenarios = sorted({(nodes, area) for (_, nodes, area) in series})
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    written = []
    for metric in METRICS:
        for nodes, area in scenarios:
            protocols = series.get((metric, nodes, area))
            if not protocols:
                raise CsvFormatError(
                    f"no data for metric {metric} at {nodes} nodes / "
                    f"{area:g} m area")
            if len(protocols) == 1:
                only = next(iter(protocols))
                print(f"warning: only one protocol ({only}) in the CSV for "
                      f"{metric} at {nodes}/{area:g}; rendering single series",
                      file=sys.stderr)
            fig, _ = build_figure(metric, nodes, area, protocols)
            path = out_dir / figure_name(metric, nodes, area, fmt)
            metadata = {"Date": None} if fmt == "svg" else None
            fig.savefig(path, format=fmt, dpi=120, metadata=metadata)
            plt.close(fig)
            written.append(path)
    return written
