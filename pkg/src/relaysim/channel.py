"""Stochastic cluster channel: parameter draws, matrix assembly, path loss.

Each link is a superposition of N clusters of M rays.  Per-cluster complex
MIMO matrices carry the array responses, element patterns, and random ray
phases; cluster delays and Dopplers stay outside the matrices and are applied
as phasors in the link engine.  A frequency-flat dB path-loss law covers the
large-scale budget.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import kernels
from .antenna import ArrayGeometry, ElementPattern, ISOTROPIC, element_amplitudes
from .util import ConfigError


@dataclass(frozen=True)
class PathLossParams:
    """Coefficients of the dB law  A*log10(d) + B + C*log10(f_GHz) + X."""

    a: float
    b: float
    c: float
    shadow_sigma_db: float = 0.0

    def __post_init__(self):
        if self.a <= 0:
            raise ConfigError("path-loss distance coefficient must be positive")
        if self.shadow_sigma_db < 0:
            raise ConfigError("shadowing sigma must be >= 0")


def path_loss_db(d_m: float, fc_ghz: float, env: PathLossParams,
                 shadow_draw_db: float | None = None) -> float:
    """Frequency-flat path loss in dB; optional shadowing term is passed in."""
    if d_m <= 0:
        raise ValueError(f"distance must be positive, got {d_m}")
    x = shadow_draw_db if shadow_draw_db is not None else 0.0
    return env.a * math.log10(d_m) + env.b + env.c * math.log10(fc_ghz) + x


@dataclass(frozen=True)
class ClusterProfile:
    """Cluster statistics of an environment (overridable per scenario)."""

    n_clusters: int = 20
    n_rays: int = 20
    delay_spread_s: float = 100e-9
    decay_db: float = 3.0
    asd_deg: float = 10.0
    zsd_deg: float = 5.0
    coherence_s: float = 0.1
    shadow_sigma_db: float = 0.0
    los: bool = False
    k_factor_db: float = 10.0  # specular-to-diffuse ratio for LOS links

    def __post_init__(self):
        if self.n_clusters < 1 or self.n_rays < 1:
            raise ConfigError("cluster/ray counts must be >= 1")
        if self.delay_spread_s < 0 or self.coherence_s <= 0:
            raise ConfigError("delay spread must be >= 0 and coherence > 0")


@dataclass(frozen=True)
class EnvProfile:
    path_loss: PathLossParams
    clusters: ClusterProfile


ENVIRONMENTS: dict[str, EnvProfile] = {
    "uma_los": EnvProfile(
        PathLossParams(a=22.0, b=28.0, c=20.0, shadow_sigma_db=4.0),
        ClusterProfile(delay_spread_s=50e-9, los=True),
    ),
    "uma_nlos": EnvProfile(
        PathLossParams(a=39.08, b=13.54, c=20.0, shadow_sigma_db=6.0),
        ClusterProfile(delay_spread_s=100e-9, los=False),
    ),
}


def resolve_env(env: str | EnvProfile) -> EnvProfile:
    if isinstance(env, EnvProfile):
        return env
    try:
        return ENVIRONMENTS[env]
    except KeyError:
        raise ConfigError(f"unknown environment profile {env!r}")


def apply_channel_overrides(profile: ClusterProfile, overrides: dict) -> ClusterProfile:
    """Scenario-file channel overrides onto a cluster profile."""
    mapping = {
        "n_clusters": "n_clusters", "n_rays": "n_rays",
        "delay_spread_s": "delay_spread_s", "decay_db": "decay_db",
        "asd_deg": "asd_deg", "zsd_deg": "zsd_deg",
        "coherence_s": "coherence_s", "shadow_sigma_db": "shadow_sigma_db",
        "k_factor_db": "k_factor_db",
    }
    kwargs = {}
    for key, val in overrides.items():
        if key not in mapping:
            raise ConfigError(f"unknown channel override key {key!r}")
        kwargs[mapping[key]] = val
    return replace(profile, **kwargs) if kwargs else profile


@dataclass(frozen=True)
class RayParams:
    aod_az: float
    aod_zen: float
    aoa_az: float
    aoa_zen: float
    phase: float


@dataclass(frozen=True)
class Cluster:
    power: float
    delay_s: float
    doppler_hz: float
    rays: tuple[RayParams, ...]

    def __post_init__(self):
        if self.power < 0 or self.delay_s < 0:
            raise ValueError("cluster power and delay must be >= 0")
        if not self.rays:
            raise ValueError("cluster needs at least one ray")


@dataclass(frozen=True)
class ClusterSet:
    clusters: tuple[Cluster, ...]
    link_kind: str = "SD"

    def __post_init__(self):
        if not self.clusters:
            raise ValueError("cluster set must not be empty")
        total = sum(c.power for c in self.clusters)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"cluster powers sum to {total}, expected 1")

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def delays(self) -> np.ndarray:
        return np.array([c.delay_s for c in self.clusters])

    @property
    def dopplers(self) -> np.ndarray:
        return np.array([c.doppler_hz for c in self.clusters])


@lru_cache(maxsize=None)
def _delay_scale(n_clusters: int, decay_db: float) -> float:
    """Normalization so the power-weighted RMS spread of sorted unit-exponential
    delays with the exponential power profile has mean ~= the configured spread.

    Uses the expected order statistics of Exp(1) as the reference profile.
    """
    if n_clusters == 1:
        return 1.0
    n = n_clusters
    eos = np.array([sum(1.0 / k for k in range(n - i, n + 1)) for i in range(n)])
    eos -= eos[0]
    p = 10.0 ** (-decay_db * np.arange(n) / 10.0)
    p /= p.sum()
    mean = float(p @ eos)
    rms = math.sqrt(float(p @ eos**2) - mean**2)
    return 1.0 / rms if rms > 0 else 1.0


def _wrap_pi(x: np.ndarray) -> np.ndarray:
    return (x + np.pi) % (2.0 * np.pi) - np.pi


def _clip_zen(x: np.ndarray) -> np.ndarray:
    return np.clip(x, 1e-6, math.pi - 1e-6)


def draw_clusters(rng: np.random.Generator,
                  link_kind: str,
                  env: str | EnvProfile,
                  mean_aod: tuple[float, float] = (0.0, math.pi / 2),
                  mean_aoa: tuple[float, float] = (0.0, math.pi / 2),
                  profile: ClusterProfile | None = None,
                  max_doppler_hz: float = 0.0) -> ClusterSet:
    """Draw the stochastic multipath description of one link.

    Powers follow an exponential per-cluster decay normalized to 1; delays are
    sorted/shifted exponential draws scaled to the profile delay spread; ray
    angles are wrapped Gaussians around per-cluster mean angles which in turn
    scatter around the link's geometric direction.  For LOS profiles the first
    cluster is a single specular ray at the exact geometric angles carrying
    the Ricean K-factor share of the power.
    """
    prof = profile if profile is not None else resolve_env(env).clusters
    n, m = prof.n_clusters, prof.n_rays

    specular = prof.los and n > 1
    n_diffuse = n - 1 if specular else n

    if specular:
        k_lin = 10.0 ** (prof.k_factor_db / 10.0)
        spec_power = k_lin / (k_lin + 1.0)
        diffuse_total = 1.0 / (k_lin + 1.0)
    elif prof.los and n == 1:
        spec_power, diffuse_total = 1.0, 0.0
    else:
        spec_power, diffuse_total = 0.0, 1.0

    clusters: list[Cluster] = []
    if prof.los:
        ray = RayParams(aod_az=mean_aod[0], aod_zen=mean_aod[1],
                        aoa_az=mean_aoa[0], aoa_zen=mean_aoa[1],
                        phase=float(rng.uniform(-math.pi, math.pi)))
        clusters.append(Cluster(power=spec_power if specular else 1.0,
                                delay_s=0.0, doppler_hz=_draw_doppler(rng, max_doppler_hz),
                                rays=(ray,)))

    if n_diffuse > 0 and diffuse_total > 0:
        powers = 10.0 ** (-prof.decay_db * np.arange(n_diffuse) / 10.0)
        powers *= diffuse_total / powers.sum()

        raw = np.sort(rng.exponential(1.0, n_diffuse))
        raw -= raw[0]
        delays = raw * prof.delay_spread_s * _delay_scale(n_diffuse, prof.decay_db)

        asd = math.radians(prof.asd_deg)
        zsd = math.radians(prof.zsd_deg)
        shape = (n_diffuse, m)
        # cluster means scatter around the geometric direction; rays scatter
        # around their cluster mean with half that spread
        c_aod_az = mean_aod[0] + rng.normal(0.0, asd, n_diffuse)
        c_aod_zen = mean_aod[1] + rng.normal(0.0, zsd, n_diffuse)
        c_aoa_az = mean_aoa[0] + rng.normal(0.0, asd, n_diffuse)
        c_aoa_zen = mean_aoa[1] + rng.normal(0.0, zsd, n_diffuse)
        aod_az = _wrap_pi(c_aod_az[:, None] + rng.normal(0.0, asd / 2, shape))
        aod_zen = _clip_zen(c_aod_zen[:, None] + rng.normal(0.0, zsd / 2, shape))
        aoa_az = _wrap_pi(c_aoa_az[:, None] + rng.normal(0.0, asd / 2, shape))
        aoa_zen = _clip_zen(c_aoa_zen[:, None] + rng.normal(0.0, zsd / 2, shape))
        phases = rng.uniform(-math.pi, math.pi, shape)
        for i in range(n_diffuse):
            rays = tuple(
                RayParams(aod_az=aod_az[i, j], aod_zen=aod_zen[i, j],
                          aoa_az=aoa_az[i, j], aoa_zen=aoa_zen[i, j],
                          phase=phases[i, j])
                for j in range(m)
            )
            clusters.append(Cluster(power=float(powers[i]), delay_s=float(delays[i]),
                                    doppler_hz=_draw_doppler(rng, max_doppler_hz), rays=rays))

    return ClusterSet(tuple(clusters), link_kind=link_kind)


def _draw_doppler(rng: np.random.Generator, max_doppler_hz: float) -> float:
    if max_doppler_hz == 0.0:
        return 0.0
    return float(max_doppler_hz * math.cos(rng.uniform(0.0, 2.0 * math.pi)))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Per-cluster MIMO matrices plus delays/Dopplers, frozen for a coherence span."""

    per_cluster: np.ndarray          # (N, n_rx, n_tx) complex
    delays_s: np.ndarray
    dopplers_hz: np.ndarray
    generated_at: float = 0.0
    coherence_until: float = math.inf
    link_kind: str = "SD"

    def __post_init__(self):
        if not (len(self.per_cluster) == len(self.delays_s) == len(self.dopplers_hz)):
            raise ValueError("per-cluster lists must share one length")
        if not np.all(np.isfinite(self.per_cluster)):
            raise ValueError("channel matrices must be finite")

    @property
    def n_clusters(self) -> int:
        return len(self.per_cluster)

    @property
    def long_term(self) -> np.ndarray:
        """Delay/Doppler-free channel: plain sum of the per-cluster matrices."""
        return self.per_cluster.sum(axis=0)


def is_expired(realization: ChannelRealization, now_s: float) -> bool:
    """Inclusive at the boundary: the realization is stale at coherence_until."""
    return now_s >= realization.coherence_until


MAX_ELEMENTS = 2**16


def assemble_channel(clusters: ClusterSet,
                     tx: ArrayGeometry,
                     rx: ArrayGeometry,
                     carrier_hz: float,
                     tx_pattern: ElementPattern = ISOTROPIC,
                     rx_pattern: ElementPattern = ISOTROPIC,
                     generated_at: float = 0.0,
                     coherence_s: float = math.inf) -> ChannelRealization:
    """Assemble per-cluster MIMO matrices from a cluster draw.

    H_n[q, p] = sqrt(P_n / M_n) * sum_m F_rx(aoa) F_tx(aod) e^{j phase}
                * e^{j k_rx . d_q} * e^{j k_tx . d_p}

    Time/frequency phasors (Doppler, delay) are *not* baked in; they live in
    the realization's delay/Doppler lists.
    """
    if not 0.5e9 <= carrier_hz <= 100e9:
        raise ConfigError("carrier frequency outside the 0.5-100 GHz model range")
    if tx.n_elements > MAX_ELEMENTS or rx.n_elements > MAX_ELEMENTS:
        raise ConfigError(f"array exceeds {MAX_ELEMENTS} elements")

    mats = np.empty((clusters.n_clusters, rx.n_elements, tx.n_elements), dtype=np.complex128)
    for idx, cl in enumerate(clusters.clusters):
        m_rays = len(cl.rays)
        aod_az = np.array([r.aod_az for r in cl.rays])
        aod_zen = np.array([r.aod_zen for r in cl.rays])
        aoa_az = np.array([r.aoa_az for r in cl.rays])
        aoa_zen = np.array([r.aoa_zen for r in cl.rays])
        phases = np.array([r.phase for r in cl.rays])

        a_tx = kernels.upa_phases(*tx.phase_steps(aod_az, aod_zen), tx.cols_h, tx.rows_v)
        a_rx = kernels.upa_phases(*rx.phase_steps(aoa_az, aoa_zen), rx.cols_h, rx.rows_v)
        f_tx = element_amplitudes(tx_pattern, tx, aod_az, aod_zen)
        f_rx = element_amplitudes(rx_pattern, rx, aoa_az, aoa_zen)

        coef = math.sqrt(cl.power / m_rays) * f_rx * f_tx * kernels.cis(phases)
        mats[idx] = (a_rx * coef) @ a_tx.T

    return ChannelRealization(
        per_cluster=mats,
        delays_s=clusters.delays,
        dopplers_hz=clusters.dopplers,
        generated_at=generated_at,
        coherence_until=generated_at + coherence_s,
        link_kind=clusters.link_kind,
    )
