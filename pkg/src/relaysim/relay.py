"""Relay configuration matrices: passive IRS phases and AF phase+gain profiles.

Both kinds share the diagonal structure Phi = g * diag(e^{j theta_n}) with
g = 1 for an IRS, so the IRS is the 0 dB special case of the AF matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .antenna import ArrayGeometry, Codeword, plane_wave_phases
from .channel import ChannelRealization
from .util import ConfigError


@dataclass(frozen=True)
class RelayConfigMatrix:
    """Diagonal relay matrix: unit-modulus phases, times a uniform gain for AF."""

    kind: str                 # "irs" | "af"
    phases: np.ndarray
    amp_gain_db: float = 0.0

    def __post_init__(self):
        if self.kind not in ("irs", "af"):
            raise ConfigError(f"unknown relay kind {self.kind!r}")
        if self.kind == "irs" and self.amp_gain_db != 0.0:
            raise ValueError("IRS configurations carry no amplification")

    @property
    def gain_lin(self) -> float:
        """Amplitude gain g of each diagonal entry."""
        return 10.0 ** (self.amp_gain_db / 20.0)

    @property
    def diag(self) -> np.ndarray:
        return self.gain_lin * kernels.cis(self.phases)

    @property
    def n_elements(self) -> int:
        return len(self.phases)


@dataclass(frozen=True)
class RelayNoise:
    """Per-receive-chain noise power of an active relay front end."""

    sigma2_w: float
    noise_figure_db: float = 5.0

    def __post_init__(self):
        if self.sigma2_w < 0:
            raise ConfigError("relay noise power must be >= 0")


def irs_matrix(phases: np.ndarray) -> RelayConfigMatrix:
    """Passive configuration: diagonal entries e^{j theta_n}."""
    return RelayConfigMatrix(kind="irs", phases=np.asarray(phases, dtype=float))


def af_matrix(phases: np.ndarray, amp_gain_db: float) -> RelayConfigMatrix:
    """Active configuration: diagonal entries g * e^{j theta_n}, g = 10^(dB/20)."""
    if amp_gain_db < 0:
        raise ValueError(f"amplification gain must be >= 0 dB, got {amp_gain_db}")
    return RelayConfigMatrix(kind="af", phases=np.asarray(phases, dtype=float),
                             amp_gain_db=amp_gain_db)


def _grid_shape(n: int) -> tuple[int, int]:
    """(n_az, n_zen) with n_az * n_zen == n, as square as possible, az >= zen."""
    b = int(math.isqrt(n))
    while n % b:
        b -= 1
    return max(n // b, b), min(n // b, b)


def _direction_grid(geom: ArrayGeometry, n: int,
                    center: tuple[float, float] | None,
                    span: tuple[float, float] | None) -> list[tuple[float, float]]:
    """Global (az, zen) directions on a small centered grid around `center`.

    With no center/span the grid covers the front hemisphere like a regular
    codebook.  Counts are factored into an az x zen sub-grid; odd counts keep
    the exact center direction in the grid.
    """
    n_az, n_zen = _grid_shape(n)
    if center is None:
        center = (geom.boresight_az, geom.boresight_zen)
        span = (math.pi, math.pi)
    if span is None:
        # one half-power beamwidth per dimension keeps the pointing loss of the
        # center-adjacent entries bounded independently of the panel size
        span = (0.886 / (geom.cols_h * geom.spacing_wl),
                0.886 / (geom.rows_v * geom.spacing_wl))

    def offsets(k: int, width: float) -> np.ndarray:
        if k == 1:
            return np.zeros(1)
        return (np.arange(k) - (k - 1) / 2) * (width / (k - 1))

    dirs = []
    for d_zen in offsets(n_zen, span[1]):
        for d_az in offsets(n_az, span[0]):
            zen = min(max(center[1] + d_zen, 1e-6), math.pi - 1e-6)
            dirs.append((center[0] + d_az, zen))
    return dirs


def relay_codebook(kind: str,
                   geom: ArrayGeometry,
                   n_in: int,
                   n_out: int,
                   in_center: tuple[float, float] | None = None,
                   out_center: tuple[float, float] | None = None,
                   in_span: tuple[float, float] | None = None,
                   out_span: tuple[float, float] | None = None,
                   amp_gain_db: float = 0.0) -> list[RelayConfigMatrix]:
    """Reflect-and-steer profiles over an (incidence x departure) direction grid.

    Entry (i, o) negates the summed plane-wave phases of incidence direction i
    and departure direction o, so a wave from i is re-radiated coherently
    toward o.  Entries are ordered i-major; the codebook size is n_in * n_out.
    """
    if n_in < 1 or n_out < 1:
        raise ConfigError("relay codebook grid counts must be >= 1")
    in_dirs = _direction_grid(geom, n_in, in_center, in_span)
    out_dirs = _direction_grid(geom, n_out, out_center, out_span)
    in_args = [np.angle(plane_wave_phases(geom, az, zen)) for az, zen in in_dirs]
    out_args = [np.angle(plane_wave_phases(geom, az, zen)) for az, zen in out_dirs]
    entries = []
    for arg_i in in_args:
        for arg_o in out_args:
            theta = -(arg_i + arg_o)
            if kind == "irs":
                entries.append(irs_matrix(theta))
            else:
                entries.append(af_matrix(theta, amp_gain_db))
    return entries


def af_relayed_noise_power(w_d: Codeword,
                           h_rd: ChannelRealization,
                           phi: RelayConfigMatrix,
                           noise: RelayNoise) -> float:
    """Relayed noise power after the combiner:

    sigma_hat^2 = w_D^T H_RD Phi Phi^H H_RD^H w_D^* * sigma^2

    with H_RD the long-term (delay/Doppler-free) channel.  Always real, >= 0.
    """
    if phi.kind != "af":
        raise ValueError("relayed noise applies to AF configurations only")
    h = h_rd.long_term
    if h.shape[0] != len(w_d.weights) or h.shape[1] != phi.n_elements:
        raise ValueError(
            f"dimension mismatch: w_d {len(w_d.weights)}, H_RD {h.shape}, phi {phi.n_elements}")
    v = (w_d.weights @ h) * phi.diag
    return float(np.real(v @ v.conj())) * noise.sigma2_w
