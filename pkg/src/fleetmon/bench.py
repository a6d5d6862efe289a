"""Benchmark harness: contrasts update strategies across fleet sizes.

Reports median phase timings (pod update, cold startup, node update) plus
invocation counters per strategy and fleet size, over a deterministic
simulated workload. Medians are taken after a warm-up exclusion; raw samples
ride along for auditing. Absolute seconds depend on the host; the meaningful
outputs are the counter invariants and the scaling ratios.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from dataclasses import dataclass

from .alerts import default_rules
from .manager import MANAGED, CycleConfig, UpdateStrategy, run_cycle, startup_load
from .simulator import FleetConfig, FleetSimulator
from .store import StateStore

ROW_ECOPOD = "EcoPOD Update"
ROW_STARTUP = "Node Startup"
ROW_UPDATE = "Node Update"
ROWS = (ROW_ECOPOD, ROW_STARTUP, ROW_UPDATE)

DEFAULT_CYCLES = 50
DEFAULT_WARMUP = 5
DEFAULT_SENSORS = 5000
DEFAULT_MAX_NODES = 200_000
MIN_CYCLES = 30


class BenchRefusedError(ValueError):
    """The requested fleet size exceeds the configured memory guard."""


@dataclass(frozen=True)
class BenchCell:
    strategy: str
    nodes: int
    row: str
    median_s: float
    samples: tuple[float, ...]
    ticks_consumed: int
    top_level_invocations: int
    per_entity_callbacks: int


@dataclass(frozen=True)
class BenchReport:
    strategies: tuple[str, ...]
    node_counts: tuple[int, ...]
    cycles: int
    warmup: int
    seed: int
    sensor_count: int
    cells: tuple[BenchCell, ...]

    def cell(self, strategy: str, nodes: int, row: str) -> BenchCell:
        for c in self.cells:
            if c.strategy == strategy and c.nodes == nodes and c.row == row:
                return c
        raise KeyError((strategy, nodes, row))


def run_bench(
    strategies: list[UpdateStrategy] | tuple[UpdateStrategy, ...],
    node_counts: list[int] | tuple[int, ...],
    cycles: int = DEFAULT_CYCLES,
    seed: int = 7,
    *,
    warmup: int = DEFAULT_WARMUP,
    sensor_count: int = DEFAULT_SENSORS,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> BenchReport:
    """Run the strategy x fleet-size grid over identical batch sequences.

    The workload for a given (seed, N, cycles) is bit-identical across
    strategies and across runs; only the timings vary with the host.
    """
    if cycles < MIN_CYCLES:
        raise ValueError(f"cycles must be >= {MIN_CYCLES} for stable medians")
    oversized = [n for n in node_counts if n > max_nodes]
    if oversized:
        raise BenchRefusedError(
            f"fleet sizes {oversized} exceed the memory guard of {max_nodes} nodes; "
            "raise --max-nodes (or bench.max_nodes) if the host has the memory for it"
        )
    rules = default_rules()
    cycle_cfg = CycleConfig()
    cells: list[BenchCell] = []
    for n in node_counts:
        sim = FleetSimulator(FleetConfig(node_count=n, sensor_count=sensor_count, seed=seed))
        startup_batch = sim.generate_fleet()
        tick_batches = [sim.tick() for _ in range(warmup + cycles)]
        for strategy in strategies:
            startup_samples = []
            startup_report = None
            for _ in range(warmup + cycles):
                cold = StateStore()
                _, rep = startup_load(cold, startup_batch, rules, cycle_cfg, strategy)
                startup_samples.append(rep.phase_durations["nodes"])
                startup_report = rep
            startup_samples = startup_samples[warmup:]

            store = StateStore()
            startup_load(store, startup_batch, rules, cycle_cfg, strategy)
            pod_samples: list[float] = []
            node_samples: list[float] = []
            last = None
            for batch in tick_batches:
                _, rep = run_cycle(store, batch, rules, cycle_cfg, strategy)
                pod_samples.append(rep.phase_durations["pod"])
                node_samples.append(rep.phase_durations["nodes"])
                last = rep
            pod_samples = pod_samples[warmup:]
            node_samples = node_samples[warmup:]
            assert last is not None and startup_report is not None

            for row, samples, rep in (
                (ROW_ECOPOD, pod_samples, last),
                (ROW_STARTUP, startup_samples, startup_report),
                (ROW_UPDATE, node_samples, last),
            ):
                cells.append(
                    BenchCell(
                        strategy=strategy.label,
                        nodes=n,
                        row=row,
                        median_s=statistics.median(samples),
                        samples=tuple(samples),
                        ticks_consumed=rep.ticks_consumed,
                        top_level_invocations=rep.top_level_invocations,
                        per_entity_callbacks=rep.per_entity_callbacks,
                    )
                )
    return BenchReport(
        strategies=tuple(s.label for s in strategies),
        node_counts=tuple(node_counts),
        cycles=cycles,
        warmup=warmup,
        seed=seed,
        sensor_count=sensor_count,
        cells=tuple(cells),
    )


def scaling_ratios(report: BenchReport, strategy: str = "Managed") -> list[tuple[int, int, float]]:
    """(N, 2N, ratio) of node-update medians for every doubling in the sweep."""
    out = []
    for n in report.node_counts:
        if 2 * n in report.node_counts:
            m1 = report.cell(strategy, n, ROW_UPDATE).median_s
            m2 = report.cell(strategy, 2 * n, ROW_UPDATE).median_s
            out.append((n, 2 * n, m2 / m1 if m1 else float("inf")))
    return out


# --- emit / parse ---


def emit_report(report: BenchReport, fmt: str) -> bytes:
    if fmt == "json":
        return _emit_json(report)
    if fmt == "csv":
        return _emit_csv(report)
    if fmt == "markdown":
        return _emit_markdown(report)
    raise ValueError(f"unknown format {fmt!r} (expected json, csv or markdown)")


def _meta_dict(report: BenchReport) -> dict:
    return {
        "strategies": list(report.strategies),
        "node_counts": list(report.node_counts),
        "cycles": report.cycles,
        "warmup": report.warmup,
        "seed": report.seed,
        "sensor_count": report.sensor_count,
    }


def _emit_json(report: BenchReport) -> bytes:
    doc = {
        "meta": _meta_dict(report),
        "cells": [
            {
                "strategy": c.strategy,
                "nodes": c.nodes,
                "row": c.row,
                "median_s": c.median_s,
                "ticks_consumed": c.ticks_consumed,
                "top_level_invocations": c.top_level_invocations,
                "per_entity_callbacks": c.per_entity_callbacks,
                "samples": list(c.samples),
            }
            for c in report.cells
        ],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def parse_report_json(data: bytes | str) -> BenchReport:
    doc = json.loads(data)
    meta = doc["meta"]
    cells = tuple(
        BenchCell(
            strategy=c["strategy"],
            nodes=int(c["nodes"]),
            row=c["row"],
            median_s=float(c["median_s"]),
            samples=tuple(float(s) for s in c["samples"]),
            ticks_consumed=int(c["ticks_consumed"]),
            top_level_invocations=int(c["top_level_invocations"]),
            per_entity_callbacks=int(c["per_entity_callbacks"]),
        )
        for c in doc["cells"]
    )
    return BenchReport(
        strategies=tuple(meta["strategies"]),
        node_counts=tuple(int(n) for n in meta["node_counts"]),
        cycles=int(meta["cycles"]),
        warmup=int(meta["warmup"]),
        seed=int(meta["seed"]),
        sensor_count=int(meta["sensor_count"]),
        cells=cells,
    )


_CSV_HEADER = "strategy,nodes,row,median_s,ticks_consumed,top_level_invocations,per_entity_callbacks,samples"


def _emit_csv(report: BenchReport) -> bytes:
    lines = [
        f"#meta strategies={'|'.join(report.strategies)}",
        f"#meta node_counts={'|'.join(str(n) for n in report.node_counts)}",
        f"#meta cycles={report.cycles}",
        f"#meta warmup={report.warmup}",
        f"#meta seed={report.seed}",
        f"#meta sensor_count={report.sensor_count}",
        _CSV_HEADER,
    ]
    for c in report.cells:
        samples = ";".join(repr(s) for s in c.samples)
        lines.append(
            f"{c.strategy},{c.nodes},{c.row},{c.median_s!r},"
            f"{c.ticks_consumed},{c.top_level_invocations},{c.per_entity_callbacks},{samples}"
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_report_csv(data: bytes | str) -> BenchReport:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    meta: dict[str, str] = {}
    cells: list[BenchCell] = []
    header_seen = False
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("#meta "):
            key, _, value = line[len("#meta "):].partition("=")
            meta[key] = value
            continue
        if not header_seen:
            if line != _CSV_HEADER:
                raise ValueError(f"unexpected csv header {line!r}")
            header_seen = True
            continue
        strategy, nodes, row, median_s, ticks, top, callbacks, samples = line.split(",")
        cells.append(
            BenchCell(
                strategy=strategy,
                nodes=int(nodes),
                row=row,
                median_s=float(median_s),
                samples=tuple(float(s) for s in samples.split(";")) if samples else (),
                ticks_consumed=int(ticks),
                top_level_invocations=int(top),
                per_entity_callbacks=int(callbacks),
            )
        )
    strategies = tuple(s for s in meta.get("strategies", "").split("|") if s)
    node_counts = tuple(int(n) for n in meta.get("node_counts", "").split("|") if n)
    return BenchReport(
        strategies=strategies,
        node_counts=node_counts,
        cycles=int(meta.get("cycles", "0")),
        warmup=int(meta.get("warmup", "0")),
        seed=int(meta.get("seed", "0")),
        sensor_count=int(meta.get("sensor_count", "0")),
        cells=tuple(cells),
    )


def _emit_markdown(report: BenchReport) -> bytes:
    columns = [(s, n) for s in report.strategies for n in report.node_counts]
    labels = [f"{s} N={n}" for s, n in columns]
    lines = ["# Update strategy benchmark", ""]
    lines.append("| | " + " | ".join(labels) + " |")
    lines.append("| --- |" + " --- |" * len(labels))
    for row in ROWS:
        values = [f"{report.cell(s, n, row).median_s:.6f}s" for s, n in columns]
        lines.append(f"| {row} | " + " | ".join(values) + " |")
    lines.append("")
    lines.append("| | " + " | ".join(labels) + " |")
    lines.append("| --- |" + " --- |" * len(labels))
    counter_rows = (
        ("Top-level invocations", "top_level_invocations"),
        ("Per-entity callbacks", "per_entity_callbacks"),
        ("Ticks per cycle", "ticks_consumed"),
    )
    for label, attr in counter_rows:
        values = [str(getattr(report.cell(s, n, ROW_UPDATE), attr)) for s, n in columns]
        lines.append(f"| {label} | " + " | ".join(values) + " |")
    lines.append("")
    return "\n".join(lines).encode("utf-8")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fleetmon-bench", description=__doc__)
    parser.add_argument(
        "--strategies",
        default="managed,perentity,staggered,chunked:256",
        help="comma list: managed, perentity, staggered, chunked:<size>",
    )
    parser.add_argument("--nodes", default="1000,2000", help="comma list of fleet sizes")
    parser.add_argument("--cycles", type=int, default=DEFAULT_CYCLES)
    parser.add_argument("--warmup", type=int, default=DEFAULT_WARMUP)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--sensors", type=int, default=DEFAULT_SENSORS)
    parser.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES)
    parser.add_argument("--format", choices=("json", "csv", "markdown"), default="markdown")
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument(
        "--check-scaling",
        action="store_true",
        help="exit nonzero unless managed node-update medians stay within 1.8x per doubling",
    )
    args = parser.parse_args(argv)

    try:
        strategies = [UpdateStrategy.parse(s) for s in args.strategies.split(",") if s.strip()]
        node_counts = [int(n) for n in args.nodes.split(",") if n.strip()]
        report = run_bench(
            strategies,
            node_counts,
            cycles=args.cycles,
            seed=args.seed,
            warmup=args.warmup,
            sensor_count=args.sensors,
            max_nodes=args.max_nodes,
        )
    except (ValueError, BenchRefusedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    payload = emit_report(report, args.format)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload.decode("utf-8"))

    if args.check_scaling:
        failures = []
        if MANAGED.label in report.strategies:
            for n, n2, ratio in scaling_ratios(report):
                line = f"managed node update {n} -> {n2}: ratio {ratio:.3f}"
                print(line, file=sys.stderr)
                if ratio > 1.8:
                    failures.append(line)
        if failures:
            print("scaling guard exceeded (> 1.8x per doubling)", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
