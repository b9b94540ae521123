"""Traceroute path records to per-bin topology snapshots.

Path file format: one record per line, ``timestamp|hop1|hop2|...`` with
``*`` for a hop that did not answer. Lines starting with ``#`` are ignored.
"""
from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .graph import SnapshotGraph, build_graph, write_edge_list

MAX_HOPS = 64
UNRESOLVED = None


class RejectReason(str, Enum):
    TOO_LONG = "TOO_LONG"
    MALFORMED = "MALFORMED"


@dataclass(frozen=True)
class PathRecord:
    timestamp: int
    hops: tuple  # labels, with UNRESOLVED (None) for '*'


@dataclass(frozen=True)
class Rejected:
    reason: RejectReason
    timestamp: int | None = None


@dataclass(frozen=True)
class BinSpec:
    bin_seconds: int = 600
    origin: int = 0

    def __post_init__(self):
        if self.bin_seconds <= 0:
            raise ValueError("bin_seconds must be positive")

    def bin_of(self, timestamp: int) -> int:
        return (timestamp - self.origin) // self.bin_seconds


def parse_path_record(line: str) -> PathRecord | Rejected:
    fields = line.strip().split("|")
    if len(fields) < 2:
        return Rejected(RejectReason.MALFORMED)
    try:
        ts = int(fields[0])
    except ValueError:
        return Rejected(RejectReason.MALFORMED)
    if ts < 0:
        return Rejected(RejectReason.MALFORMED)
    hops = [h.strip() for h in fields[1:]]
    if any(h == "" for h in hops):
        return Rejected(RejectReason.MALFORMED, ts)
    if len(hops) > MAX_HOPS:
        return Rejected(RejectReason.TOO_LONG, ts)
    return PathRecord(ts, tuple(UNRESOLVED if h == "*" else h for h in hops))


def edges_from_path(rec: PathRecord) -> list[tuple[str, str]]:
    """Links between consecutive answered hops; a '*' hop breaks the chain."""
    out = []
    for a, b in zip(rec.hops, rec.hops[1:]):
        if a is UNRESOLVED or b is UNRESOLVED or a == b:
            continue
        out.append((a, b))
    return out


def iter_records(lines: Iterable[str]) -> Iterator[PathRecord | Rejected]:
    for line in lines:
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield parse_path_record(stripped)


@dataclass
class BinStats:
    record_count: int = 0
    rejected_count: int = 0


def bin_paths(records: Iterable[PathRecord], spec: BinSpec = BinSpec()) -> dict[int, SnapshotGraph]:
    graphs, _ = bin_paths_with_stats(records, spec)
    return graphs


def bin_paths_with_stats(
    records: Iterable[PathRecord | Rejected], spec: BinSpec = BinSpec()
) -> tuple[dict[int, SnapshotGraph], dict[int, BinStats]]:
    """Group records into fixed-width time bins and build one graph per bin.

    Edge sets are sorted before building, so the result does not depend on
    record order. Bins without any edge are left out of the graph map but
    keep their counters. Rejections without a timestamp are not binned.
    """
    edge_sets: dict[int, set] = defaultdict(set)
    stats: dict[int, BinStats] = defaultdict(BinStats)
    for rec in records:
        if isinstance(rec, Rejected):
            if rec.timestamp is not None:
                stats[spec.bin_of(rec.timestamp)].rejected_count += 1
            continue
        b = spec.bin_of(rec.timestamp)
        stats[b].record_count += 1
        for u, v in edges_from_path(rec):
            edge_sets[b].add((u, v) if u <= v else (v, u))
    graphs = {
        b: build_graph(sorted(edges), bin_id=b)
        for b, edges in sorted(edge_sets.items()) if edges
    }
    return graphs, dict(sorted(stats.items()))


def ingest_file(path: str | Path, out_dir: str | Path, spec: BinSpec = BinSpec(),
                header: Iterable[str] = ()) -> dict[int, BinStats]:
    """Write ``bin_<id>.edges`` per non-empty bin plus ``index.csv`` under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(path, encoding="utf-8") as fh:
        graphs, stats = bin_paths_with_stats(iter_records(fh), spec)
    header = list(header)
    for b, g in graphs.items():
        write_edge_list(g, out / f"bin_{b}.edges", header + [f"bin_id={b}"])
    with open(out / "index.csv", "w", newline="", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_id", "record_count", "rejected_count"])
        for b, s in stats.items():
            w.writerow([b, s.record_count, s.rejected_count])
    return stats
