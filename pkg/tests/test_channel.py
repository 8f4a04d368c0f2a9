import math

import numpy as np
import pytest

from relaysim.antenna import (ArrayGeometry, ISOTROPIC, TR38901,
                              element_amplitudes, plane_wave_phases)
from relaysim.channel import (ChannelRealization, Cluster, ClusterProfile,
                              ClusterSet, RayParams, assemble_channel,
                              draw_clusters, is_expired, path_loss_db,
                              ENVIRONMENTS)
from relaysim.util import ConfigError

UMA_LOS_PL = ENVIRONMENTS["uma_los"].path_loss


def eq1_oracle(clusters: ClusterSet, tx, rx, tx_pat, rx_pat) -> np.ndarray:
    """Naive triple-loop evaluation of the per-cluster channel matrices."""
    mats = []
    for c in clusters.clusters:
        h = np.zeros((rx.n_elements, tx.n_elements), complex)
        m = len(c.rays)
        for ray in c.rays:
            a_tx = plane_wave_phases(tx, ray.aod_az, ray.aod_zen)
            a_rx = plane_wave_phases(rx, ray.aoa_az, ray.aoa_zen)
            f_tx = element_amplitudes(tx_pat, tx, np.array([ray.aod_az]),
                                      np.array([ray.aod_zen]))[0]
            f_rx = element_amplitudes(rx_pat, rx, np.array([ray.aoa_az]),
                                      np.array([ray.aoa_zen]))[0]
            for q in range(rx.n_elements):
                for p in range(tx.n_elements):
                    h[q, p] += (math.sqrt(c.power / m) * f_rx * f_tx
                                * np.exp(1j * ray.phase) * a_rx[q] * a_tx[p])
        mats.append(h)
    return np.array(mats)


class TestDrawClusters:
    def test_powers_normalized(self):
        for seed in range(20):
            cs = draw_clusters(np.random.default_rng(seed), "SD", "uma_nlos")
            assert abs(sum(c.power for c in cs.clusters) - 1.0) <= 1e-9

    @pytest.mark.parametrize("env", ["uma_nlos", "uma_los"])
    def test_degenerate_single_cluster(self, env, rng):
        prof = ClusterProfile(n_clusters=1, n_rays=1,
                              los=(env == "uma_los"))
        cs = draw_clusters(rng, "SD", env, profile=prof)
        assert cs.n_clusters == 1
        assert cs.clusters[0].power == pytest.approx(1.0)
        assert cs.clusters[0].delay_s == 0.0

    def test_delay_spread_statistic(self):
        # Monte-Carlo estimate of the power-weighted RMS delay spread on the
        # UMa NLOS defaults (N=20, M=20) vs the configured parameter
        prof = ENVIRONMENTS["uma_nlos"].clusters
        ds_cfg = prof.delay_spread_s
        rng = np.random.default_rng(99)
        vals = []
        for _ in range(10_000):
            cs = draw_clusters(rng, "SD", "uma_nlos")
            p = np.array([c.power for c in cs.clusters])
            tau = cs.delays
            mean = float(p @ tau)
            vals.append(math.sqrt(float(p @ tau**2) - mean**2))
        est = float(np.mean(vals))
        assert abs(est - ds_cfg) / ds_cfg < 0.10

    def test_unknown_env_rejected(self, rng):
        with pytest.raises(ConfigError):
            draw_clusters(rng, "SD", "indoor_hotspot")

    def test_angle_ranges(self, rng):
        cs = draw_clusters(rng, "SD", "uma_nlos",
                           mean_aod=(3.0, 0.2), mean_aoa=(-3.0, 2.9))
        for c in cs.clusters:
            for r in c.rays:
                assert -math.pi <= r.aod_az <= math.pi
                assert 0.0 <= r.aod_zen <= math.pi
                assert -math.pi <= r.phase <= math.pi

    def test_los_specular_cluster(self, rng):
        cs = draw_clusters(rng, "SR", "uma_los", mean_aod=(0.5, 1.5),
                           mean_aoa=(-0.5, 1.6))
        spec = cs.clusters[0]
        assert len(spec.rays) == 1
        assert spec.delay_s == 0.0
        assert spec.rays[0].aod_az == 0.5
        assert spec.rays[0].aoa_zen == 1.6
        k_lin = 10.0 ** (ENVIRONMENTS["uma_los"].clusters.k_factor_db / 10.0)
        assert spec.power == pytest.approx(k_lin / (k_lin + 1.0))

    def test_same_seed_identical(self):
        a = draw_clusters(np.random.default_rng(7), "SD", "uma_nlos")
        b = draw_clusters(np.random.default_rng(7), "SD", "uma_nlos")
        assert a == b

    def test_doppler_machinery(self, rng):
        cs = draw_clusters(rng, "SD", "uma_nlos", max_doppler_hz=100.0)
        assert any(c.doppler_hz != 0.0 for c in cs.clusters)
        assert all(abs(c.doppler_hz) <= 100.0 for c in cs.clusters)


class TestAssembleChannel:
    def test_single_ray_unit_arrays_amplitude(self, rng):
        ray = RayParams(0.3, 1.5, -0.2, 1.6, 0.9)
        cs = ClusterSet((Cluster(0.6, 0.0, 0.0, (ray,)),
                         Cluster(0.4, 50e-9, 0.0, (ray,))))
        one = ArrayGeometry(rows_v=1, cols_h=1)
        r = assemble_channel(cs, one, one, 28e9)
        assert abs(r.per_cluster[0][0, 0]) == pytest.approx(math.sqrt(0.6), rel=1e-12)
        assert abs(r.per_cluster[1][0, 0]) == pytest.approx(math.sqrt(0.4), rel=1e-12)

    def test_broadside_equal_phase(self):
        geom = ArrayGeometry(rows_v=1, cols_h=2, spacing_wl=0.5)
        ray = RayParams(geom.boresight_az, geom.boresight_zen,
                        geom.boresight_az, geom.boresight_zen, 0.0)
        cs = ClusterSet((Cluster(1.0, 0.0, 0.0, (ray,)),))
        r = assemble_channel(cs, geom, geom, 28e9)
        h = r.per_cluster[0]
        assert np.allclose(h, h[0, 0])

    def test_matches_triple_loop_oracle(self, rng):
        prof = ClusterProfile(n_clusters=3, n_rays=4, los=False)
        cs = draw_clusters(rng, "SD", "uma_nlos", profile=prof,
                           mean_aod=(0.4, 1.5), mean_aoa=(2.0, 1.7))
        tx = ArrayGeometry(rows_v=2, cols_h=2, boresight_az=0.5, boresight_zen=1.5)
        rx = ArrayGeometry(rows_v=2, cols_h=2, boresight_az=2.2, boresight_zen=1.6)
        got = assemble_channel(cs, tx, rx, 28e9, tx_pattern=TR38901,
                               rx_pattern=ISOTROPIC)
        want = eq1_oracle(cs, tx, rx, TR38901, ISOTROPIC)
        err = np.abs(got.per_cluster - want).max() / np.abs(want).max()
        assert err < 1e-12

    def test_power_conservation_isotropic(self):
        # E[sum_n |H_n|^2] = 1 for 1x1 isotropic arrays
        rng = np.random.default_rng(5)
        one = ArrayGeometry(rows_v=1, cols_h=1)
        total = 0.0
        n_draws = 10_000
        for _ in range(n_draws):
            cs = draw_clusters(rng, "SD", "uma_nlos")
            r = assemble_channel(cs, one, one, 28e9)
            total += float(np.sum(np.abs(r.per_cluster) ** 2))
        assert total / n_draws == pytest.approx(1.0, rel=0.05)

    def test_dimension_guard(self, rng):
        prof = ClusterProfile(n_clusters=1, n_rays=1)
        cs = draw_clusters(rng, "SD", "uma_nlos", profile=prof)
        big = ArrayGeometry(rows_v=300, cols_h=300)
        with pytest.raises(ConfigError):
            assemble_channel(cs, big, big, 28e9)


class TestPathLoss:
    def test_reference_point_gives_b(self):
        assert path_loss_db(1.0, 1.0, UMA_LOS_PL) == pytest.approx(UMA_LOS_PL.b)

    def test_uma_los_at_100m_28ghz(self):
        val = path_loss_db(100.0, 28.0, UMA_LOS_PL)
        assert round(val, 2) == 100.94

    def test_doubling_distance(self):
        base = path_loss_db(50.0, 28.0, UMA_LOS_PL)
        double = path_loss_db(100.0, 28.0, UMA_LOS_PL)
        assert double - base == pytest.approx(UMA_LOS_PL.a * math.log10(2.0), abs=1e-12)

    def test_strictly_increasing(self):
        d = np.linspace(10, 500, 40)
        vals = [path_loss_db(x, 28.0, UMA_LOS_PL) for x in d]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        f = np.linspace(1, 90, 40)
        vals_f = [path_loss_db(100.0, x, UMA_LOS_PL) for x in f]
        assert all(b > a for a, b in zip(vals_f, vals_f[1:]))

    def test_shadow_term(self):
        assert (path_loss_db(100.0, 28.0, UMA_LOS_PL, shadow_draw_db=3.5)
                - path_loss_db(100.0, 28.0, UMA_LOS_PL)) == pytest.approx(3.5)

    def test_nonpositive_distance_rejected(self):
        with pytest.raises(ValueError):
            path_loss_db(0.0, 28.0, UMA_LOS_PL)


class TestCoherence:
    def _realization(self, t0=0.0, coherence=0.1):
        return ChannelRealization(
            per_cluster=np.ones((1, 1, 1), complex),
            delays_s=np.zeros(1), dopplers_hz=np.zeros(1),
            generated_at=t0, coherence_until=t0 + coherence)

    def test_fresh(self):
        assert not is_expired(self._realization(), 0.0)

    def test_boundary_inclusive(self):
        assert is_expired(self._realization(), 0.1)

    def test_default_coherence_midpoint(self):
        assert not is_expired(self._realization(), 0.05)


def test_cluster_set_validates_power():
    ray = RayParams(0, 1.5, 0, 1.5, 0)
    with pytest.raises(ValueError):
        ClusterSet((Cluster(0.5, 0, 0, (ray,)),))
