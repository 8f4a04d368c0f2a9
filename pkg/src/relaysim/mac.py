"""MAC/PHY abstraction: MCS selection, L2SM error draws, TDMA, ARQ.

The link-to-system table maps (MCS, effective SINR) to a transport-block
error probability via logistic curves sampled on a SINR grid; both the table
and the MCS thresholds can be replaced from CSV files.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .util import ConfigError

LN9 = math.log(9.0)  # logistic offset between the BLER=0.5 center and the 10% point


@dataclass(frozen=True)
class McsEntry:
    index: int
    min_sinr_db: float
    spectral_eff: float
    beta: float = 1.0


NO_TRANSMISSION = McsEntry(index=-1, min_sinr_db=-math.inf, spectral_eff=0.0)

# Centers (BLER = 0.5) sit LN9 below each threshold so the threshold is the
# ~10% BLER point, the AMC target.  The top entries flatten out: the table
# stands in for unpublished link-level maps and is file-replaceable.
_DEFAULT_TABLE = [
    # (min_sinr_db, spectral_eff bits/s/Hz)
    (-3.8, 0.15),
    (-1.8, 0.38),
    (0.7, 0.60),
    (3.2, 0.88),
    (5.7, 1.18),
    (8.2, 1.48),
    (10.7, 1.91),
    (12.4, 2.60),
    (16.0, 2.85),
    (21.0, 3.00),
]


def default_mcs_table() -> list[McsEntry]:
    return [McsEntry(index=i, min_sinr_db=thr, spectral_eff=se)
            for i, (thr, se) in enumerate(_DEFAULT_TABLE)]


def validate_mcs_table(table: list[McsEntry]) -> list[McsEntry]:
    if not table:
        raise ConfigError("MCS table must not be empty")
    thresholds = [e.min_sinr_db for e in sorted(table, key=lambda e: e.index)]
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise ConfigError("MCS thresholds must be strictly increasing with index")
    if any(e.spectral_eff <= 0 for e in table):
        raise ConfigError("spectral efficiencies must be positive")
    return sorted(table, key=lambda e: e.index)


def load_mcs_csv(path: str | Path) -> list[McsEntry]:
    """Override file: CSV rows `index,min_sinr_db,spectral_eff,beta`."""
    entries = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                entries.append(McsEntry(index=int(row["index"]),
                                        min_sinr_db=float(row["min_sinr_db"]),
                                        spectral_eff=float(row["spectral_eff"]),
                                        beta=float(row.get("beta", 1.0))))
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"bad MCS table row {row}: {exc}")
    return validate_mcs_table(entries)


def select_mcs(table: list[McsEntry], eff_sinr_db: float) -> McsEntry:
    """Highest-index entry whose threshold is <= the effective SINR (inclusive)."""
    chosen = NO_TRANSMISSION
    for entry in table:
        if eff_sinr_db >= entry.min_sinr_db:
            chosen = entry
    return chosen


class L2smTable:
    """Per-MCS BLER curves on a SINR grid, linearly interpolated and clamped."""

    def __init__(self, curves: dict[int, tuple[np.ndarray, np.ndarray]]):
        for mcs, (grid, bler) in curves.items():
            grid = np.asarray(grid, dtype=float)
            bler = np.asarray(bler, dtype=float)
            if np.any(np.diff(grid) <= 0):
                raise ConfigError(f"L2SM grid for MCS {mcs} must be strictly increasing")
            if np.any(np.diff(bler) > 1e-12):
                raise ConfigError(f"L2SM BLER for MCS {mcs} must be non-increasing in SINR")
            if np.any((bler < 0) | (bler > 1)):
                raise ConfigError(f"L2SM BLER for MCS {mcs} outside [0, 1]")
            curves[mcs] = (grid, bler)
        self._curves = curves

    @classmethod
    def logistic(cls, table: list[McsEntry], steepness_db: float = 1.0) -> "L2smTable":
        """Default table: logistic curves centered LN9 below each MCS threshold."""
        curves = {}
        for entry in table:
            center = entry.min_sinr_db - LN9 * steepness_db
            grid = center + np.arange(-8.0, 8.25, 0.25)
            bler = 1.0 / (1.0 + np.exp((grid - center) / steepness_db))
            curves[entry.index] = (grid, bler)
        return cls(curves)

    @classmethod
    def from_csv(cls, path: str | Path) -> "L2smTable":
        """Override file: CSV rows `mcs,sinr_db,bler`."""
        rows: dict[int, list[tuple[float, float]]] = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                try:
                    rows.setdefault(int(row["mcs"]), []).append(
                        (float(row["sinr_db"]), float(row["bler"])))
                except (KeyError, ValueError) as exc:
                    raise ConfigError(f"bad L2SM row {row}: {exc}")
        curves = {}
        for mcs, pts in rows.items():
            pts.sort()
            curves[mcs] = (np.array([p[0] for p in pts]), np.array([p[1] for p in pts]))
        return cls(curves)

    def bler(self, mcs: int, eff_sinr_db: float) -> float:
        if mcs not in self._curves:
            raise ConfigError(f"MCS {mcs} missing from the L2SM table")
        grid, bler = self._curves[mcs]
        return float(np.interp(eff_sinr_db, grid, bler))

    @property
    def mcs_indices(self) -> list[int]:
        return sorted(self._curves)


def tb_error(rng: np.random.Generator, table: L2smTable, mcs: McsEntry,
             eff_sinr_db: float) -> bool:
    """Bernoulli error draw against the interpolated BLER."""
    p = table.bler(mcs.index, eff_sinr_db)
    return bool(rng.uniform() < p)


@dataclass(frozen=True)
class SlotClock:
    slot_duration_s: float = 125e-6
    slots_elapsed: int = 0

    def __post_init__(self):
        if self.slot_duration_s <= 0:
            raise ConfigError("slot duration must be positive")

    def time_of(self, slot: int) -> float:
        return slot * self.slot_duration_s


def tb_size_bytes(mcs: McsEntry, bandwidth_hz: float, clock: SlotClock,
                  overhead_frac: float = 0.2) -> int:
    """floor(SE * B * T_slot * (1 - overhead) / 8) application-payload bytes."""
    if not 0.0 <= overhead_frac < 1.0:
        raise ValueError("overhead fraction must lie in [0, 1)")
    bits = mcs.spectral_eff * bandwidth_hz * clock.slot_duration_s * (1.0 - overhead_frac)
    return int(bits // 8)


@dataclass
class TransportBlock:
    ue: int
    bytes: int
    mcs: int
    slot: int
    attempt: int = 1
    # (packet id, byte count) spans carried by this TB, in queue order
    spans: list[tuple[int, int]] = None

    def __post_init__(self):
        if self.bytes < 0:
            raise ValueError("TB size must be >= 0")
        if self.spans is None:
            self.spans = []


def schedule(ues_with_backlog: list[int], slot: int) -> int | None:
    """Round-robin over backlogged UEs, deterministic by UE id; None when idle."""
    if not ues_with_backlog:
        return None
    order = sorted(ues_with_backlog)
    return order[slot % len(order)]


def arq_on_failure(tb: TransportBlock, max_retx: int) -> TransportBlock | None:
    """Retransmit (attempt+1) while attempts remain, else None meaning drop."""
    if tb.attempt < 1:
        raise ValueError("ARQ applies to attempted transport blocks")
    if tb.attempt <= max_retx:
        return replace_tb(tb, attempt=tb.attempt + 1)
    return None


def replace_tb(tb: TransportBlock, **kwargs) -> TransportBlock:
    merged = dict(ue=tb.ue, bytes=tb.bytes, mcs=tb.mcs, slot=tb.slot,
                  attempt=tb.attempt, spans=tb.spans)
    merged.update(kwargs)
    return TransportBlock(**merged)
