"""Shared helpers: dB conversions, error types, seeded stream derivation."""
from __future__ import annotations

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Invalid configuration input: unknown keys, bad files, out-of-range values."""


class InvariantError(RuntimeError):
    """A runtime invariant of the simulation was violated."""


def db_to_lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0) if np.ndim(x) else 10.0 ** (x / 10.0)


def lin_to_db(x, floor: float = 1e-40):
    """10*log10 with a floor so silent subbands map to a large negative dB value."""
    if np.ndim(x):
        return 10.0 * np.log10(np.maximum(np.asarray(x, dtype=float), floor))
    return 10.0 * np.log10(max(x, floor))


def dbm_to_watt(x: float) -> float:
    return 10.0 ** ((x - 30.0) / 10.0)


def watt_to_dbm(x: float) -> float:
    return 10.0 * np.log10(max(x, 1e-40)) + 30.0


# Named sub-streams of the master seed.  Each subsystem draws from its own
# derived generator, so e.g. changing how many L2SM draws happen cannot
# perturb channel realizations.
_STREAMS = {"channel": 0, "l2sm": 1, "traffic": 2, "shadow": 3}


def derived_rng(master_seed: int, stream: str, *key: int) -> np.random.Generator:
    """Generator for a named subsystem stream, optionally keyed further.

    The extra key components (link index, epoch index, ...) make draws
    reproducible regardless of the order in which subsystems consume them.
    """
    code = _STREAMS[stream]
    ss = np.random.SeedSequence(master_seed, spawn_key=(code, *key))
    return np.random.default_rng(ss)
