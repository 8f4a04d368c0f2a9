"""Uniform planar arrays: geometry, element pattern, steering vectors, codebooks.

Conventions
-----------
Global directions are (azimuth, zenith) in radians: azimuth measured in the
x-y plane from +x, zenith from +z (zenith = pi/2 is horizontal).  A panel is
described by its boresight direction; elements lie on a grid spanned by the
horizontal tangent and the local up axis, indexed row-major as
``m = iv * cols_h + ih``.

``plane_wave_phases`` returns the physical array response exp(+j k.d) of an
impinging wave.  Codewords are the conjugated, normalized responses so that
the transpose combining w^T a(az, zen) used throughout the link equations
peaks at the matched direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .util import ConfigError


def unit_vector(az: float, zen: float) -> np.ndarray:
    """Cartesian unit vector of a (azimuth, zenith) direction."""
    sz = math.sin(zen)
    return np.array([sz * math.cos(az), sz * math.sin(az), math.cos(zen)])


def angles_of(v: np.ndarray) -> tuple[float, float]:
    """(azimuth, zenith) of a direction vector (not necessarily unit)."""
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero direction vector has no angles")
    az = math.atan2(v[1], v[0])
    zen = math.acos(min(1.0, max(-1.0, v[2] / n)))
    return az, zen


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array: rows_v x cols_h elements, spacing in wavelengths."""

    rows_v: int
    cols_h: int
    spacing_wl: float = 0.5
    boresight_az: float = 0.0
    boresight_zen: float = math.pi / 2

    def __post_init__(self):
        if self.rows_v < 1 or self.cols_h < 1:
            raise ConfigError("array dimensions must be >= 1")
        if self.spacing_wl <= 0:
            raise ConfigError("element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.rows_v * self.cols_h

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(boresight, horizontal, up) orthonormal triad of the panel."""
        az, zen = self.boresight_az, self.boresight_zen
        n = unit_vector(az, zen)
        h = np.array([-math.sin(az), math.cos(az), 0.0])
        up = np.array([-math.cos(zen) * math.cos(az),
                       -math.cos(zen) * math.sin(az),
                       math.sin(zen)])
        return n, h, up

    def phase_steps(self, az, zen) -> tuple[np.ndarray, np.ndarray]:
        """Per-direction phase increments (alpha, beta) along columns and rows."""
        az = np.atleast_1d(np.asarray(az, dtype=float))
        zen = np.atleast_1d(np.asarray(zen, dtype=float))
        sz = np.sin(zen)
        u = np.stack([sz * np.cos(az), sz * np.sin(az), np.cos(zen)], axis=0)
        _, h, up = self.axes()
        k = 2.0 * math.pi * self.spacing_wl
        return k * (h @ u), k * (up @ u)

    def local_angles(self, az: float, zen: float) -> tuple[float, float]:
        """Direction expressed in the panel frame (azimuth, zenith)."""
        u = unit_vector(az, zen)
        n, h, up = self.axes()
        return math.atan2(float(h @ u), float(n @ u)), math.acos(min(1.0, max(-1.0, float(up @ u))))


def plane_wave_phases(geom: ArrayGeometry, az, zen) -> np.ndarray:
    """Array response exp(+j k.d) per element, shape (n_elements,) or (n, R)."""
    alpha, beta = geom.phase_steps(az, zen)
    table = kernels.upa_phases(alpha, beta, geom.cols_h, geom.rows_v)
    return table[:, 0] if np.ndim(az) == 0 else table


@dataclass(frozen=True)
class ElementPattern:
    """Parabolic-in-dB single-element pattern (standards-style parameterization)."""

    max_gain_dbi: float = 8.0
    hpbw_az_deg: float = 65.0
    hpbw_zen_deg: float = 65.0
    sla_db: float = 30.0
    a_max_db: float = 30.0
    isotropic: bool = False

    def __post_init__(self):
        if not (0 < self.hpbw_az_deg <= 180 and 0 < self.hpbw_zen_deg <= 180):
            raise ConfigError("half-power beamwidths must lie in (0, 180] degrees")


ISOTROPIC = ElementPattern(max_gain_dbi=0.0, isotropic=True)
TR38901 = ElementPattern()

PATTERNS = {"iso": ISOTROPIC, "tr38901": TR38901}


def element_gain_db(pattern: ElementPattern, az_local: float, zen_local: float) -> float:
    """Element gain toward a direction given in the panel's local frame (radians)."""
    if pattern.isotropic:
        return 0.0
    az_deg = math.degrees(az_local)
    zen_deg = math.degrees(zen_local)
    a_v = -min(12.0 * ((zen_deg - 90.0) / pattern.hpbw_zen_deg) ** 2, pattern.sla_db)
    a_h = -min(12.0 * (az_deg / pattern.hpbw_az_deg) ** 2, pattern.a_max_db)
    return -min(-(a_v + a_h), pattern.a_max_db) + pattern.max_gain_dbi


def element_amplitudes(pattern: ElementPattern, geom: ArrayGeometry,
                       az: np.ndarray, zen: np.ndarray) -> np.ndarray:
    """Linear field amplitudes for arrays of global directions."""
    az = np.atleast_1d(az)
    zen = np.atleast_1d(zen)
    if pattern.isotropic:
        return np.ones(az.shape)
    gains = np.array([element_gain_db(pattern, *geom.local_angles(a, z))
                      for a, z in zip(az, zen)])
    return 10.0 ** (gains / 20.0)


@dataclass(frozen=True)
class Codeword:
    """Unit-norm beamforming weight vector."""

    weights: np.ndarray

    def __post_init__(self):
        norm = np.linalg.norm(self.weights)
        if not math.isclose(norm, 1.0, rel_tol=0, abs_tol=1e-12):
            raise ValueError(f"codeword norm {norm} is not 1")


@dataclass(frozen=True)
class Codebook:
    """Steering codewords on a local (azimuth x zenith) grid, row-major over az."""

    codewords: tuple[Codeword, ...]
    az_grid: np.ndarray
    zen_grid: np.ndarray

    def __post_init__(self):
        if not self.codewords:
            raise ConfigError("empty codebook")

    def __len__(self) -> int:
        return len(self.codewords)

    def matrix(self) -> np.ndarray:
        """Stacked weights, shape (n_codewords, n_elements)."""
        return np.stack([c.weights for c in self.codewords])


def steering_vector(geom: ArrayGeometry, az: float, zen: float) -> Codeword:
    """Codeword matched to a plane wave from the global direction (az, zen).

    Phases are the negated plane-wave phases so that w^T a(az, zen) attains the
    maximum |response| = sqrt(n_elements) under transpose combining.
    """
    pw = plane_wave_phases(geom, az, zen)
    return Codeword(np.conj(pw) / math.sqrt(geom.n_elements))


def build_codebook(geom: ArrayGeometry, n_az: int, n_zen: int) -> Codebook:
    """Steering vectors on a uniform local grid covering the front hemisphere.

    The grid always contains the boresight direction, so a single-entry
    codebook degenerates to the boresight codeword.
    """
    if n_az < 1 or n_zen < 1:
        raise ConfigError("codebook grid counts must be >= 1")
    az_grid = (np.arange(n_az) - n_az // 2) * math.pi / n_az
    zen_grid = math.pi / 2 + (np.arange(n_zen) - n_zen // 2) * math.pi / n_zen
    n, h, up = geom.axes()
    words = []
    for zl in zen_grid:
        for al in az_grid:
            u = (math.sin(zl) * math.cos(al) * n
                 + math.sin(zl) * math.sin(al) * h
                 + math.cos(zl) * up)
            words.append(steering_vector(geom, *angles_of(u)))
    return Codebook(tuple(words), az_grid, zen_grid)
