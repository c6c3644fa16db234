"""Run metrics, the experiment grid, and deterministic CSV emission."""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass, replace

from .core import SimConfig
from .engine import RunRecord, run_simulation

CSV_HEADER = ("protocol,n_nodes,area_m,n_malicious,seed,sent,delivered,"
              "control_packets,delivery_ratio,routing_overhead,avg_delay_s,"
              "avg_hops")

GRID_NODE_COUNTS = (150, 200)
GRID_AREAS = (300.0, 500.0)
GRID_MALICIOUS = (0, 5, 10, 15, 20, 25)
GRID_PROTOCOLS = ("gpsr", "sgpsr")


class MetricsError(ValueError):
    """Counters that cannot have come from a sane run."""


class SweepError(RuntimeError):
    """A sweep run failed; the message names the offending cell."""


@dataclass(slots=True)
class RunMetrics:
    sent: int
    delivered: int
    control_packets: int
    delivery_ratio: float
    routing_overhead: float | None   # None when no packet was delivered
    avg_delay: float
    avg_hops_delivered: float


def compute_delivery_ratio(sent: int, delivered: int) -> float:
    if delivered > sent:
        raise MetricsError(f"delivered {delivered} exceeds sent {sent}")
    if sent == 0:
        return 0.0
    return delivered / sent


def compute_overhead(control_packets: int, delivered: int) -> float | None:
    if delivered == 0:
        return None
    return control_packets / delivered


def compute_avg_delay(delays) -> float:
    delays = list(delays)
    if not delays:
        return 0.0
    return sum(delays) / len(delays)


def metrics_from_record(rec: RunRecord) -> RunMetrics:
    delivered = rec.delivered
    return RunMetrics(
        sent=rec.sent,
        delivered=delivered,
        control_packets=rec.control_packets,
        delivery_ratio=compute_delivery_ratio(rec.sent, delivered),
        routing_overhead=compute_overhead(rec.control_packets, delivered),
        avg_delay=rec.delay_sum / delivered if delivered else 0.0,
        avg_hops_delivered=rec.hops_sum / delivered if delivered else 0.0,
    )


# -- sweep grid --------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Cell:
    protocol: str
    nodes: int
    area: float
    malicious: int


def grid_cells(node_counts=GRID_NODE_COUNTS, areas=GRID_AREAS,
               malicious_counts=GRID_MALICIOUS,
               protocols=GRID_PROTOCOLS) -> list:
    return [Cell(p, n, a, m)
            for p in protocols
            for n in node_counts
            for a in areas
            for m in malicious_counts]


def cell_config(base: SimConfig, cell: Cell, seed: int) -> SimConfig:
    return replace(base, protocol=cell.protocol, nodes=cell.nodes,
                   area_m=(cell.area, cell.area), malicious=cell.malicious,
                   seed=seed)


def _run_one(args):
    cfg, collect_packets = args
    try:
        return run_simulation(cfg, trace=False, collect_packets=collect_packets)
    except Exception as exc:
        raise SweepError(
            f"run failed for {cfg.protocol}/{cfg.nodes}n/"
            f"{cfg.area_m[0]:g}m/{cfg.malicious}mal/seed={cfg.seed}: {exc}"
        ) from exc


def run_grid(base: SimConfig, cells, n_seeds: int, jobs: int = 1,
             collect_packets: bool = False):
    """Execute every (cell, seed) run; results come back in sweep order
    regardless of worker completion order."""
    specs = [(cell_config(base, cell, base.seed + i), collect_packets)
             for cell in cells for i in range(n_seeds)]
    if jobs > 1 and len(specs) > 1:
        with multiprocessing.Pool(processes=jobs) as pool:
            records = pool.map(_run_one, specs, chunksize=1)
    else:
        records = [_run_one(spec) for spec in specs]
    grouped = {}
    idx = 0
    for cell in cells:
        grouped[cell] = records[idx:idx + n_seeds]
        idx += n_seeds
    return grouped


# -- CSV emission -------------------------------------------------------------


def _fmt_area(area: float) -> str:
    return f"{area:g}"


def _fmt_ratio(value: float | None) -> str:
    return "" if value is None else f"{value:.4f}"


def _fmt_delay(value: float) -> str:
    return f"{value:.6f}"


def run_row(rec: RunRecord) -> str:
    m = metrics_from_record(rec)
    cfg = rec.cfg
    return ",".join([
        cfg.protocol, str(cfg.nodes), _fmt_area(cfg.area_m[0]),
        str(cfg.malicious), str(cfg.seed), str(m.sent), str(m.delivered),
        str(m.control_packets), _fmt_ratio(m.delivery_ratio),
        _fmt_ratio(m.routing_overhead), _fmt_delay(m.avg_delay),
        _fmt_ratio(m.avg_hops_delivered),
    ])


def _mean(values) -> float | None:
    values = [v for v in values if v is not None]
    if not values:
        return None
    return sum(values) / len(values)


def _stddev(values) -> float | None:
    values = [v for v in values if v is not None]
    if not values:
        return None
    if len(values) < 2:
        return 0.0
    mu = sum(values) / len(values)
    return math.sqrt(sum((v - mu) ** 2 for v in values) / (len(values) - 1))


def aggregate_rows(cell: Cell, records) -> list:
    metrics = [metrics_from_record(r) for r in records]
    columns = {
        "sent": [float(m.sent) for m in metrics],
        "delivered": [float(m.delivered) for m in metrics],
        "control": [float(m.control_packets) for m in metrics],
        "ratio": [m.delivery_ratio for m in metrics],
        "overhead": [m.routing_overhead for m in metrics],
        "delay": [m.avg_delay for m in metrics],
        "hops": [m.avg_hops_delivered for m in metrics],
    }
    rows = []
    for label, agg in (("mean", _mean), ("stddev", _stddev)):
        overhead = agg(columns["overhead"])
        rows.append(",".join([
            cell.protocol, str(cell.nodes), _fmt_area(cell.area),
            str(cell.malicious), label,
            f"{agg(columns['sent']):.3f}", f"{agg(columns['delivered']):.3f}",
            f"{agg(columns['control']):.3f}", _fmt_ratio(agg(columns["ratio"])),
            _fmt_ratio(overhead), _fmt_delay(agg(columns["delay"])),
            _fmt_ratio(agg(columns["hops"])),
        ]))
    return rows


def sweep_csv(grouped) -> str:
    lines = [CSV_HEADER]
    for cell, records in grouped.items():
        for rec in records:
            lines.append(run_row(rec))
        lines.extend(aggregate_rows(cell, records))
    return "\n".join(lines) + "\n"


def run_sweep(base: SimConfig, n_seeds: int = 10, jobs: int = 1,
              cells=None, collect_packets: bool = False):
    """The full experiment grid as CSV text plus the raw per-run records."""
    if cells is None:
        cells = grid_cells()
    grouped = run_grid(base, cells, n_seeds, jobs=jobs,
                       collect_packets=collect_packets)
    return sweep_csv(grouped), grouped
