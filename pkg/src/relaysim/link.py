"""Link engine: configuration sweep, long-term fading, per-subband SINR.

Implements the relayed-link evaluation pipeline: exhaustive codebook sweep on
long-term channels, the per-cluster-pair long-term gains L[n, m], the
small-scale delay/Doppler phasors applied per subband, cascaded path loss,
interference accumulation, and the exponential effective-SINR reduction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .antenna import Codebook, Codeword
from .channel import ChannelRealization, PathLossParams, path_loss_db
from .relay import RelayConfigMatrix, RelayNoise
from .util import lin_to_db

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SubbandGrid:
    """Even split of the occupied bandwidth into subbands (baseband offsets)."""

    n_subbands: int
    subband_hz: float
    center_freqs: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.n_subbands < 1 or self.subband_hz <= 0:
            raise ValueError("subband grid needs n >= 1 and positive width")
        total = self.n_subbands * self.subband_hz
        freqs = -total / 2 + (np.arange(self.n_subbands) + 0.5) * self.subband_hz
        object.__setattr__(self, "center_freqs", freqs)

    @classmethod
    def for_bandwidth(cls, bandwidth_hz: float, n_subbands: int = 50) -> "SubbandGrid":
        return cls(n_subbands=n_subbands, subband_hz=bandwidth_hz / n_subbands)

    @property
    def bandwidth_hz(self) -> float:
        return self.n_subbands * self.subband_hz


@dataclass(frozen=True)
class Psd:
    """Power spectral density over a subband grid, W/Hz."""

    values: np.ndarray
    grid: SubbandGrid

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_subbands,):
            raise ValueError("PSD length must match the subband grid")
        if np.any(vals < 0):
            raise ValueError("PSD values must be >= 0")
        object.__setattr__(self, "values", vals)

    @classmethod
    def flat(cls, grid: SubbandGrid, value_w_per_hz: float) -> "Psd":
        return cls(np.full(grid.n_subbands, value_w_per_hz), grid)


@dataclass(frozen=True)
class LongTermMatrix:
    """Per-cluster-pair gains: matrix (N_RD x N_SR) for relayed links, vector for direct."""

    entries: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("long-term entries must be finite")

    @property
    def is_direct(self) -> bool:
        return self.entries.ndim == 1


@dataclass(frozen=True)
class SweepResult:
    w_s_idx: int
    w_d_idx: int
    phi_idx: int
    predicted_snr_db: float


@dataclass(frozen=True)
class SinrReport:
    per_subband_db: np.ndarray
    effective_db: float
    timestamp_s: float = 0.0


def long_term(w_s: Codeword, w_d: Codeword, phi: RelayConfigMatrix,
              h_sr: ChannelRealization, h_rd: ChannelRealization) -> LongTermMatrix:
    """L[n, m] = w_D^T H_RD[n] Phi H_SR[m] w_S for every cluster pair (n, m)."""
    n_r = phi.n_elements
    if h_rd.per_cluster.shape[2] != n_r or h_sr.per_cluster.shape[1] != n_r:
        raise ValueError("relay dimension mismatch between Phi and the channels")
    if h_rd.per_cluster.shape[1] != len(w_d.weights) or h_sr.per_cluster.shape[2] != len(w_s.weights):
        raise ValueError("beamformer length does not match its channel side")
    # rows: w_D^T H_RD[n] scaled by the diagonal; cols: H_SR[m] w_S
    b = h_rd.per_cluster.transpose(0, 2, 1) @ w_d.weights      # (N_rd, N_R)
    c = h_sr.per_cluster @ w_s.weights                         # (N_sr, N_R)
    return LongTermMatrix((b * phi.diag) @ c.T)


def direct_long_term(w_s: Codeword, w_d: Codeword,
                     h_sd: ChannelRealization) -> LongTermMatrix:
    """Single-hop analogue: L[n] = w_D^T H_SD[n] w_S."""
    return LongTermMatrix(w_d.weights @ h_sd.per_cluster @ w_s.weights)


def sweep(cb_s: Codebook, cb_d: Codebook, cb_phi: list[RelayConfigMatrix],
          h_sr: ChannelRealization, h_rd: ChannelRealization,
          noise_w: float, relay_noise: RelayNoise | None = None) -> SweepResult:
    """Exhaustive search over (w_S, w_D, Phi) on the long-term channels.

    Objective: |w_D^T H_RD Phi H_SR w_S|^2 / (noise_w + relayed noise), the
    relayed-noise term being recomputed per (w_D, Phi) pair for AF entries.
    Small-scale phasors are neglected (long-term channels).  Ties break toward
    the lowest (w_s_idx, w_d_idx, phi_idx) lexicographically.
    """
    if not len(cb_s) or not len(cb_d) or not cb_phi:
        raise ValueError("sweep requires non-empty codebooks")
    hbar_sr = h_sr.long_term
    hbar_rd = h_rd.long_term

    w_s_mat = cb_s.matrix()                      # (n_s, N_tx)
    w_d_mat = cb_d.matrix()                      # (n_d, N_rx)
    c = hbar_sr @ w_s_mat.T                      # (N_R, n_s)
    b = w_d_mat @ hbar_rd                        # (n_d, N_R)
    phi_mat = np.stack([p.diag for p in cb_phi])  # (n_phi, N_R)

    is_af = cb_phi[0].kind == "af" and relay_noise is not None
    abs_phi_sq = np.abs(phi_mat) ** 2 if is_af else None

    best = None  # (snr, s, d, phi)
    for d in range(b.shape[0]):
        gains = np.abs((phi_mat * b[d]) @ c) ** 2          # (n_phi, n_s)
        if is_af:
            relayed = (abs_phi_sq @ (np.abs(b[d]) ** 2)) * relay_noise.sigma2_w
            snr = gains / (noise_w + relayed[:, None])
        else:
            snr = gains / noise_w
        flat = np.argwhere(snr == snr.max())
        # lexicographic preference: lowest s, then d, then phi
        order = np.lexsort((flat[:, 0], flat[:, 1]))
        phi_i, s_i = flat[order[0]]
        cand = (float(snr[phi_i, s_i]), int(s_i), d, int(phi_i))
        if best is None or cand[0] > best[0] or (
                cand[0] == best[0] and (cand[1], cand[2], cand[3]) < (best[1], best[2], best[3])):
            best = cand
    snr_val, s_i, d_i, phi_i = best
    return SweepResult(w_s_idx=s_i, w_d_idx=d_i, phi_idx=phi_i,
                       predicted_snr_db=lin_to_db(snr_val))


def sweep_direct(cb_s: Codebook, cb_d: Codebook, h_sd: ChannelRealization,
                 noise_w: float) -> SweepResult:
    """Relay-free variant: argmax |w_D^T H_SD w_S|^2 over both codebooks."""
    if not len(cb_s) or not len(cb_d):
        raise ValueError("sweep requires non-empty codebooks")
    g = cb_d.matrix() @ h_sd.long_term @ cb_s.matrix().T     # (n_d, n_s)
    snr = np.abs(g) ** 2 / noise_w
    flat = np.argwhere(snr == snr.max())
    order = np.lexsort((flat[:, 0], flat[:, 1]))
    d_i, s_i = flat[order[0]]
    return SweepResult(w_s_idx=int(s_i), w_d_idx=int(d_i), phi_idx=0,
                       predicted_snr_db=lin_to_db(float(snr[d_i, s_i])))


def small_scale_psd(lt: LongTermMatrix,
                    dopplers_rd: np.ndarray, dopplers_sr: np.ndarray | None,
                    delays_rd: np.ndarray, delays_sr: np.ndarray | None,
                    t: float, grid: SubbandGrid, tx_psd: Psd) -> Psd:
    """Apply the per-cluster delay/Doppler phasors at time t over the grid.

    Relayed links:  P(t, f) = tx(f) * |sum_{n,m} L[n,m] e^{j2pi(v_n+v_m)t}
    e^{j2pi(tau_n+tau_m)f}|^2.  Direct links use the single-sum analogue
    (pass the vector L and None for the second delay/Doppler set).
    """
    freqs = grid.center_freqs
    if lt.is_direct:
        r = kernels.direct_response(lt.entries, TWO_PI * dopplers_rd * t,
                                    TWO_PI * delays_rd, freqs)
    else:
        if dopplers_sr is None or delays_sr is None:
            raise ValueError("relayed long-term matrix needs both delay/Doppler sets")
        r = kernels.cascade_response(lt.entries,
                                     TWO_PI * dopplers_rd * t, TWO_PI * delays_rd,
                                     TWO_PI * dopplers_sr * t, TWO_PI * delays_sr,
                                     freqs)
    return Psd(tx_psd.values * np.abs(r) ** 2, grid)


def cascade_gain_db(d_sr_m: float, d_rd_m: float, fc_ghz: float,
                    env_sr: PathLossParams, env_rd: PathLossParams,
                    shadow_sr_db: float | None = None,
                    shadow_rd_db: float | None = None) -> float:
    """Total cascade attenuation: the two hop path losses added in dB."""
    return (path_loss_db(d_sr_m, fc_ghz, env_sr, shadow_sr_db)
            + path_loss_db(d_rd_m, fc_ghz, env_rd, shadow_rd_db))


def attenuate(psd: Psd, loss_db: float) -> Psd:
    return Psd(psd.values * 10.0 ** (-loss_db / 10.0), psd.grid)


def direct_psd(w_s: Codeword, w_d: Codeword, h_sd: ChannelRealization,
               t: float, grid: SubbandGrid, tx_psd: Psd,
               blockage_db: float = 0.0, path_loss_db: float = 0.0) -> Psd:
    """Relay-free received PSD: single channel, one path-loss term, plus blockage."""
    lt = direct_long_term(w_s, w_d, h_sd)
    faded = small_scale_psd(lt, h_sd.dopplers_hz, None, h_sd.delays_s, None,
                            t, grid, tx_psd)
    return attenuate(faded, blockage_db + path_loss_db)


@dataclass(frozen=True)
class InterferencePath:
    """One interferer: its own beam toward its own destination, fixed at D and R."""

    w_i: Codeword
    is_los_to_dest: bool
    h_direct: ChannelRealization | None = None     # H_ID when LOS
    h_to_relay: ChannelRealization | None = None   # H_IR when relayed
    path_loss_db: float = 0.0
    blockage_db: float = 0.0


def interference_psd(interferers: list[InterferencePath],
                     w_d: Codeword,
                     phi: RelayConfigMatrix | None,
                     h_rd: ChannelRealization | None,
                     grid: SubbandGrid, t: float, tx_psd: Psd) -> list[Psd]:
    """Per-interferer received PSDs with D's combiner and the relay fixed.

    LOS interferers contribute through their direct channel; NLOS interferers
    ride the relay cascade H_RD Phi H_IR with the serving configuration.
    """
    out = []
    for it in interferers:
        if it.is_los_to_dest:
            out.append(direct_psd(it.w_i, w_d, it.h_direct, t, grid, tx_psd,
                                  blockage_db=it.blockage_db,
                                  path_loss_db=it.path_loss_db))
        else:
            if phi is None or h_rd is None:
                raise ValueError("relayed interferer needs the serving relay state")
            lt = long_term(it.w_i, w_d, phi, it.h_to_relay, h_rd)
            faded = small_scale_psd(lt, h_rd.dopplers_hz, it.h_to_relay.dopplers_hz,
                                    h_rd.delays_s, it.h_to_relay.delays_s,
                                    t, grid, tx_psd)
            out.append(attenuate(faded, it.path_loss_db + it.blockage_db))
    return out


def sinr_per_subband(rx: Psd, interference: list[Psd], noise_psd: Psd,
                     af_noise_w: float = 0.0) -> np.ndarray:
    """Lambda(f) = rx / (sum interferers + noise + AF noise as a flat PSD); in dB."""
    for p in [*interference, noise_psd]:
        if p.grid.n_subbands != rx.grid.n_subbands or p.grid.subband_hz != rx.grid.subband_hz:
            raise ValueError("all PSDs must share one subband grid")
    denom = noise_psd.values.copy()
    for p in interference:
        denom = denom + p.values
    denom = denom + af_noise_w / rx.grid.bandwidth_hz
    return lin_to_db(rx.values / denom)


def effective_sinr(per_subband_db: np.ndarray, beta: float = 1.0) -> float:
    """Exponential effective-SINR mapping over the subbands, in dB.

    -beta * ln(mean_f exp(-lambda_f / beta)) on linear SINRs, computed with a
    shift for numerical stability at large SINR.
    """
    lam = 10.0 ** (np.asarray(per_subband_db, dtype=float) / 10.0)
    if lam.size == 0:
        raise ValueError("effective SINR of an empty report")
    m = lam.min()
    eff = m - beta * math.log(np.mean(np.exp(-(lam - m) / beta)))
    return lin_to_db(eff)


def make_report(per_subband_db: np.ndarray, t: float, beta: float = 1.0) -> SinrReport:
    return SinrReport(per_subband_db=per_subband_db,
                      effective_db=effective_sinr(per_subband_db, beta),
                      timestamp_s=t)
