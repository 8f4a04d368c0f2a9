"""Constant-bit-rate traffic, per-UE FIFO queues, and KPI aggregation."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np


class PacketStatus(Enum):
    QUEUED = "QUEUED"
    IN_FLIGHT = "IN_FLIGHT"
    DELIVERED = "DELIVERED"
    LOST = "LOST"


@dataclass
class Packet:
    id: int
    ue: int
    bytes: int = 1500
    t_gen_s: float = 0.0
    t_rx_s: float | None = None
    status: PacketStatus = PacketStatus.QUEUED
    # internal scheduling/delivery progress
    bytes_scheduled: int = 0
    bytes_delivered: int = 0
    attempts: int = 0

    @property
    def latency_s(self) -> float | None:
        if self.t_rx_s is None:
            return None
        return self.t_rx_s - self.t_gen_s


@dataclass(frozen=True)
class CbrSource:
    """Deterministic constant-bit-rate downlink source."""

    rate_bps: float = 50e6
    packet_bytes: int = 1500

    def __post_init__(self):
        if self.rate_bps <= 0 or self.packet_bytes <= 0:
            raise ValueError("CBR rate and packet size must be positive")

    @property
    def interarrival_s(self) -> float:
        return self.packet_bytes * 8.0 / self.rate_bps


def generate_arrivals(src: CbrSource, t0_s: float, t1_s: float,
                      ue: int = 0, start_id: int = 0) -> list[Packet]:
    """floor((t1-t0)/interarrival) packets at t0 + k*interarrival, inside [t0, t1)."""
    if t1_s <= t0_s:
        return []
    dt = src.interarrival_s
    count = int(math.floor((t1_s - t0_s) / dt + 1e-9))
    return [Packet(id=start_id + k, ue=ue, bytes=src.packet_bytes,
                   t_gen_s=t0_s + k * dt)
            for k in range(count)]


class FlowQueue:
    """Drop-tail FIFO byte queue; occupancy counts not-yet-scheduled bytes."""

    def __init__(self, capacity_bytes: int = 5_000_000):
        self.capacity_bytes = capacity_bytes
        self.packets: deque[Packet] = deque()
        self.occupancy_bytes = 0

    def __len__(self) -> int:
        return len(self.packets)


def enqueue(q: FlowQueue, p: Packet) -> str:
    """Returns "accepted" or "dropped_overflow"; overflow marks the packet LOST."""
    if q.occupancy_bytes + p.bytes > q.capacity_bytes:
        p.status = PacketStatus.LOST
        return "dropped_overflow"
    q.packets.append(p)
    q.occupancy_bytes += p.bytes
    return "accepted"


def throughput_bps(delivered: list[Packet], sim_duration_s: float) -> dict[int, float]:
    """Delivered application bits per second, grouped by UE."""
    if sim_duration_s <= 0:
        raise ValueError("duration must be positive")
    per_ue: dict[int, float] = {}
    for p in delivered:
        per_ue[p.ue] = per_ue.get(p.ue, 0.0) + p.bytes * 8.0
    return {ue: bits / sim_duration_s for ue, bits in per_ue.items()}


def _nearest_rank(sorted_vals: list[float], q: float) -> float:
    rank = max(1, math.ceil(q * len(sorted_vals)))
    return sorted_vals[rank - 1]


def latency_p95_s(delivered: list[Packet]) -> dict[int, float]:
    """Nearest-rank 95th percentile of t_rx - t_gen per UE; absent UEs omitted."""
    groups: dict[int, list[float]] = {}
    for p in delivered:
        groups.setdefault(p.ue, []).append(p.latency_s)
    return {ue: _nearest_rank(sorted(vals), 0.95) for ue, vals in groups.items()}


def latency_mean_s(delivered: list[Packet]) -> dict[int, float]:
    groups: dict[int, list[float]] = {}
    for p in delivered:
        groups.setdefault(p.ue, []).append(p.latency_s)
    return {ue: sum(v) / len(v) for ue, v in groups.items()}


def per(delivered: int, lost: int) -> float | None:
    """Application packet error rate; None when nothing was accounted."""
    total = delivered + lost
    if total == 0:
        return None
    return lost / total


class SinrTrace:
    """Per-transmission effective-SINR trace for ECDF emission."""

    def __init__(self):
        self.t_s: list[float] = []
        self.ue: list[int] = []
        self.eff_db: list[float] = []

    def append(self, t_s: float, ue: int, eff_db: float) -> None:
        self.t_s.append(t_s)
        self.ue.append(ue)
        self.eff_db.append(eff_db)

    def __len__(self) -> int:
        return len(self.t_s)

    def for_ue(self, ue: int) -> np.ndarray:
        return np.array([e for u, e in zip(self.ue, self.eff_db) if u == ue])


def ecdf(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Empirical CDF sample points: (sorted values, cumulative fractions)."""
    v = np.sort(np.asarray(values, dtype=float))
    return v, np.arange(1, len(v) + 1) / len(v)


@dataclass(frozen=True)
class UeMetrics:
    throughput_bps: float
    latency_p95_s: float | None
    latency_mean_s: float | None
    per: float | None
    sinr_mean_db: float | None
    generated: int
    delivered: int
    lost: int
    residual: int  # still queued or in flight at end of run


@dataclass(frozen=True)
class MetricsSummary:
    per_ue: dict[int, UeMetrics]
    duration_s: float

    @property
    def mean_throughput_bps(self) -> float:
        vals = [m.throughput_bps for m in self.per_ue.values()]
        return sum(vals) / len(vals) if vals else 0.0

    @property
    def mean_sinr_db(self) -> float | None:
        vals = [m.sinr_mean_db for m in self.per_ue.values() if m.sinr_mean_db is not None]
        return sum(vals) / len(vals) if vals else None

    @property
    def mean_per(self) -> float | None:
        vals = [m.per for m in self.per_ue.values() if m.per is not None]
        return sum(vals) / len(vals) if vals else None
