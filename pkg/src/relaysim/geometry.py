"""Scenario geometry: nodes, obstacles, LOS determination, scenario files."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np

from .util import ConfigError


class Role(Enum):
    GNB = "GNB"
    UE = "UE"
    RELAY = "RELAY"


@dataclass(frozen=True)
class ArraySpec:
    """Panel description as it appears in a scenario file."""

    rows_v: int = 1
    cols_h: int = 1
    spacing_wl: float = 0.5
    pattern: str = "iso"
    orientation_deg: tuple[float, float] | None = None  # explicit (az, zen) override

    def __post_init__(self):
        if self.pattern not in ("iso", "tr38901"):
            raise ConfigError(f"unknown element pattern {self.pattern!r}")


@dataclass(frozen=True)
class Node:
    id: int
    role: Role
    position: np.ndarray
    array: ArraySpec = field(default_factory=ArraySpec)
    tx_power_dbm: float = 33.0

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (3,) or not np.all(np.isfinite(pos)):
            raise ConfigError(f"node {self.id}: position must be a finite 3-vector")
        object.__setattr__(self, "position", pos)
        if self.role is Role.GNB and not 0.0 <= self.tx_power_dbm <= 50.0:
            raise ConfigError(f"node {self.id}: tx power {self.tx_power_dbm} dBm outside [0, 50]")


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned box with a penetration loss."""

    box_min: np.ndarray
    box_max: np.ndarray
    penetration_loss_db: float = 40.0

    def __post_init__(self):
        lo = np.asarray(self.box_min, dtype=float)
        hi = np.asarray(self.box_max, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,) or np.any(lo > hi):
            raise ConfigError("obstacle box must satisfy min <= max per axis")
        if self.penetration_loss_db < 0:
            raise ConfigError("penetration loss must be >= 0 dB")
        object.__setattr__(self, "box_min", lo)
        object.__setattr__(self, "box_max", hi)


@dataclass(frozen=True)
class RelaySpec:
    kind: str = "irs"
    rows_v: int = 120
    cols_h: int = 60
    amp_gain_db: float = 40.0
    codebook_n_in: int = 9
    codebook_n_out: int = 9

    def __post_init__(self):
        if self.kind not in ("irs", "af"):
            raise ConfigError(f"unknown relay kind {self.kind!r}")
        if self.amp_gain_db < 0:
            raise ConfigError("relay amplification must be >= 0 dB")

    @property
    def n_elements(self) -> int:
        return self.rows_v * self.cols_h

    @property
    def label(self) -> str:
        return f"{self.kind}{self.cols_h}x{self.rows_v}"


@dataclass(frozen=True)
class LosState:
    """Outcome of the geometric LOS test; blockers is empty iff LOS."""

    blockers: tuple[Obstacle, ...] = ()

    @property
    def is_los(self) -> bool:
        return not self.blockers


@dataclass(frozen=True)
class Scenario:
    name: str
    nodes: tuple[Node, ...]
    obstacles: tuple[Obstacle, ...]
    carrier_hz: float = 28e9
    bandwidth_hz: float = 100e6
    relay: RelaySpec | None = None
    channel_overrides: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.5e9 <= self.carrier_hz <= 100e9:
            raise ConfigError("carrier frequency outside the 0.5-100 GHz model range")
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth must be positive")
        gnbs = [n for n in self.nodes if n.role is Role.GNB]
        relays = [n for n in self.nodes if n.role is Role.RELAY]
        if len(gnbs) != 1:
            raise ConfigError(f"scenario needs exactly one GNB node, found {len(gnbs)}")
        if len(relays) > 1:
            raise ConfigError("at most one RELAY node per scenario")

    @property
    def gnb(self) -> Node:
        return next(n for n in self.nodes if n.role is Role.GNB)

    @property
    def relay_node(self) -> Node | None:
        return next((n for n in self.nodes if n.role is Role.RELAY), None)

    @property
    def ues(self) -> tuple[Node, ...]:
        return tuple(n for n in self.nodes if n.role is Role.UE)


def distance_3d(a: Node, b: Node) -> float:
    return float(np.linalg.norm(a.position - b.position))


def segment_intersects_box(p0: np.ndarray, p1: np.ndarray,
                           box_min: np.ndarray, box_max: np.ndarray) -> bool:
    """Slab test with inclusive bounds: touching a face counts as intersecting."""
    d = p1 - p0
    t_lo, t_hi = 0.0, 1.0
    for ax in range(3):
        if d[ax] == 0.0:
            if p0[ax] < box_min[ax] or p0[ax] > box_max[ax]:
                return False
            continue
        ta = (box_min[ax] - p0[ax]) / d[ax]
        tb = (box_max[ax] - p0[ax]) / d[ax]
        if ta > tb:
            ta, tb = tb, ta
        t_lo = max(t_lo, ta)
        t_hi = min(t_hi, tb)
        if t_lo > t_hi:
            return False
    return True


def los_state(scenario: Scenario, a: Node, b: Node) -> LosState:
    """LOS unless the 3D segment a->b intersects at least one obstacle box."""
    if a.id == b.id:
        raise ValueError("los_state requires two distinct nodes")
    blockers = tuple(o for o in scenario.obstacles
                     if segment_intersects_box(a.position, b.position, o.box_min, o.box_max))
    return LosState(blockers)


def blockage_loss_db(state: LosState) -> float:
    """0 dB when LOS, sum of blocker penetration losses otherwise."""
    return sum(o.penetration_loss_db for o in state.blockers)


def _parse_array(raw: dict) -> ArraySpec:
    orientation = raw.get("orientation_deg")
    return ArraySpec(
        rows_v=int(raw.get("rows_v", 1)),
        cols_h=int(raw.get("cols_h", 1)),
        spacing_wl=float(raw.get("spacing_wl", 0.5)),
        pattern=raw.get("pattern", "iso"),
        orientation_deg=tuple(orientation) if orientation is not None else None,
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file {path} is not valid JSON: {exc}")
    return scenario_from_dict(raw, name=path.stem)


def scenario_from_dict(raw: dict, name: str = "scenario") -> Scenario:
    try:
        nodes = tuple(
            Node(
                id=int(n["id"]),
                role=Role(n["role"]),
                position=np.asarray(n["pos"], dtype=float),
                array=_parse_array(n.get("array", {})),
                tx_power_dbm=float(n.get("tx_power_dbm", 33.0)),
            )
            for n in raw["nodes"]
        )
        obstacles = tuple(
            Obstacle(
                box_min=np.asarray(o["box_min"], dtype=float),
                box_max=np.asarray(o["box_max"], dtype=float),
                penetration_loss_db=float(o.get("loss_db", 40.0)),
            )
            for o in raw.get("obstacles", [])
        )
        relay = None
        if "relay" in raw:
            r = raw["relay"]
            cb = r.get("codebook", {})
            relay = RelaySpec(
                kind=r.get("kind", "irs"),
                rows_v=int(r["rows_v"]),
                cols_h=int(r["cols_h"]),
                amp_gain_db=float(r.get("amp_gain_db", 40.0)),
                codebook_n_in=int(cb.get("n_in", 9)),
                codebook_n_out=int(cb.get("n_out", 9)),
            )
        return Scenario(
            name=name,
            nodes=nodes,
            obstacles=obstacles,
            carrier_hz=float(raw.get("carrier_hz", 28e9)),
            bandwidth_hz=float(raw.get("bandwidth_hz", 100e6)),
            relay=relay,
            channel_overrides=dict(raw.get("channel", {})),
            meta=dict(raw.get("meta", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad scenario key or value: {exc}")


def bundled_scenario_path(name: str) -> Path:
    """Path of one of the packaged scenario files ('scenario1' or 'scenario2')."""
    base = resources.files("relaysim") / "scenarios" / f"{name}.json"
    with resources.as_file(base) as p:
        return Path(p)
