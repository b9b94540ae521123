"""Sliding normal-domain classifier over a stream of NPCC values.

Each snapshot judged NORMAL contributes a redundancy range
``[r - tau, r + tau]``; the normal domain is the union of the ranges of the
``k`` most recent NORMAL snapshots. A snapshot whose r falls outside the
domain is ABNORMAL and never enters the window.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

from .metrics import SnapshotMetrics

STATE_VERSION = 1

Interval = tuple[float, float]


class TauMode(str, Enum):
    LITERAL = "literal"      # tau = mean + lambda * std
    DEVIATION = "deviation"  # tau = lambda * std


class Label(str, Enum):
    NORMAL = "NORMAL"
    ABNORMAL = "ABNORMAL"
    SKIPPED = "SKIPPED"


@dataclass(frozen=True)
class DetectorConfig:
    """Window length ``k``, normal quantile ``lam`` and how tau is formed.

    While the window holds fewer than ``warmup`` entries (default: ``k``,
    capped at ``k``) snapshots are admitted as NORMAL without testing. A
    window of one value has zero spread, so testing against it in
    deviation mode would reject everything that differs from that value.
    """

    k: int = 36
    lam: float = 1.96
    tau_mode: TauMode = TauMode.DEVIATION
    warmup: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "tau_mode", TauMode(self.tau_mode))
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.lam > 0:
            raise ValueError("lambda must be > 0")
        if self.warmup is not None and self.warmup < 1:
            raise ValueError("warmup must be >= 1")

    @property
    def warmup_entries(self) -> int:
        return self.k if self.warmup is None else min(self.warmup, self.k)

    def as_dict(self) -> dict:
        return {"k": self.k, "lambda": self.lam, "tau_mode": self.tau_mode.value,
                "warmup": self.warmup}

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorConfig":
        return cls(k=int(d["k"]), lam=float(d["lambda"]), tau_mode=TauMode(d["tau_mode"]),
                   warmup=None if d.get("warmup") is None else int(d["warmup"]))


@dataclass(frozen=True)
class HistoryEntry:
    tick: int
    r: float
    eta: Interval


@dataclass(frozen=True)
class DetectorState:
    history: tuple[HistoryEntry, ...] = ()
    total_ticks_seen: int = 0
    last_tick: int | None = None

    def r_values(self) -> list[float]:
        return [e.r for e in self.history]

    def to_json(self, cfg: DetectorConfig) -> str:
        doc = {
            "version": STATE_VERSION,
            "config": cfg.as_dict(),
            "total_ticks_seen": self.total_ticks_seen,
            "last_tick": self.last_tick,
            "history": [
                {"tick": e.tick, "r": e.r, "eta": [e.eta[0], e.eta[1]]} for e in self.history
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> tuple["DetectorState", DetectorConfig]:
        doc = json.loads(text)
        if doc.get("version") != STATE_VERSION:
            raise ValueError(f"unsupported detector state version {doc.get('version')!r}")
        cfg = DetectorConfig.from_dict(doc["config"])
        history = tuple(
            HistoryEntry(int(e["tick"]), float(e["r"]), (float(e["eta"][0]), float(e["eta"][1])))
            for e in doc["history"]
        )
        if len(history) > cfg.k:
            raise ValueError("checkpoint history longer than k")
        state = cls(history, int(doc["total_ticks_seen"]), doc["last_tick"])
        return state, cfg


@dataclass(frozen=True)
class Verdict:
    tick: int
    r: float | None
    label: Label
    domain: tuple[Interval, ...] = field(default=())


def compute_tau(history_rs: Sequence[float], lam: float,
                tau_mode: TauMode | str = TauMode.DEVIATION) -> float:
    """Half-width of a redundancy range from the window's r-values.

    Uses the sample standard deviation (n - 1 divisor, zero for one value).
    """
    n = len(history_rs)
    if n == 0:
        raise ValueError("tau needs at least one r-value")
    mu = math.fsum(history_rs) / n
    sigma = 0.0
    if n > 1:
        sigma = math.sqrt(math.fsum((x - mu) ** 2 for x in history_rs) / (n - 1))
    if TauMode(tau_mode) is TauMode.LITERAL:
        return mu + lam * sigma
    return lam * sigma


def make_eta(r0: float, tau: float) -> Interval:
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    return (r0 - tau, r0 + tau)


def normal_domain(state: DetectorState | Iterable[Interval]) -> tuple[Interval, ...]:
    """Union of the window's ranges as sorted, disjoint closed intervals."""
    etas = [e.eta for e in state.history] if isinstance(state, DetectorState) else list(state)
    merged: list[list[float]] = []
    for lo, hi in sorted(etas):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


def in_domain(r: float, domain: Sequence[Interval]) -> bool:
    return any(lo <= r <= hi for lo, hi in domain)


def classify(state: DetectorState, tick: int, r: float | None,
             cfg: DetectorConfig) -> tuple[Verdict, DetectorState]:
    """Judge one snapshot and return the verdict with the successor state."""
    if state.last_tick is not None and tick <= state.last_tick:
        raise ValueError(f"tick {tick} does not follow {state.last_tick}")
    seen = replace(state, total_ticks_seen=state.total_ticks_seen + 1, last_tick=tick)
    if r is None or math.isnan(r):
        return Verdict(tick, None, Label.SKIPPED), seen

    domain = normal_domain(state)
    if len(state.history) < cfg.warmup_entries or in_domain(r, domain):
        label = Label.NORMAL
    else:
        label = Label.ABNORMAL
    if label is Label.ABNORMAL:
        return Verdict(tick, r, label, domain), seen

    basis = state.r_values() or [r]
    entry = HistoryEntry(tick, r, make_eta(r, compute_tau(basis, cfg.lam, cfg.tau_mode)))
    history = (state.history + (entry,))[-cfg.k:]
    return Verdict(tick, r, label, domain), replace(seen, history=history)


def run_stream(metrics: Sequence[SnapshotMetrics], cfg: DetectorConfig,
               state: DetectorState | None = None) -> list[Verdict]:
    verdicts, _ = run_stream_with_state(metrics, cfg, state)
    return verdicts


def run_stream_with_state(
    metrics: Sequence[SnapshotMetrics], cfg: DetectorConfig,
    state: DetectorState | None = None,
) -> tuple[list[Verdict], DetectorState]:
    """Fold :func:`classify` over ``metrics``, which must be sorted by bin_id."""
    state = state or DetectorState()
    ids = [m.bin_id for m in metrics]
    if any(b <= a for a, b in zip(ids, ids[1:])):
        raise ValueError("metrics must be strictly increasing in bin_id")
    verdicts = []
    for m in metrics:
        v, state = classify(state, m.bin_id, m.r, cfg)
        verdicts.append(v)
    return verdicts, state
