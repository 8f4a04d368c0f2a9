import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaysim.antenna import ArrayGeometry, plane_wave_phases
from relaysim.relay import (RelayNoise, af_matrix, af_relayed_noise_power,
                            irs_matrix, relay_codebook)
from conftest import random_realization, unit_codeword


class TestIrsMatrix:
    def test_zero_phases_identity(self):
        phi = irs_matrix(np.zeros(5))
        assert np.allclose(phi.diag, np.ones(5))

    def test_unit_modulus(self, rng):
        phi = irs_matrix(rng.uniform(-np.pi, np.pi, 64))
        assert np.allclose(np.abs(phi.diag), 1.0, atol=1e-14)

    def test_coherent_combining_on_rank_one_cascade(self, rng):
        # phases chosen as the negated cascade phase align every term
        h_rd = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        h_sr = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        phi = irs_matrix(-(np.angle(h_rd) + np.angle(h_sr)))
        got = abs(np.sum(h_rd * phi.diag * h_sr))
        want = float(np.sum(np.abs(h_rd) * np.abs(h_sr)))
        assert got == pytest.approx(want, rel=1e-12)


class TestAfMatrix:
    def test_zero_db_equals_irs(self, rng):
        phases = rng.uniform(-np.pi, np.pi, 10)
        assert np.allclose(af_matrix(phases, 0.0).diag, irs_matrix(phases).diag)

    def test_forty_db_modulus_100(self, rng):
        phi = af_matrix(rng.uniform(-np.pi, np.pi, 8), 40.0)
        assert np.allclose(np.abs(phi.diag), 100.0, rtol=1e-12)

    def test_twenty_db_zero_phases(self):
        phi = af_matrix(np.zeros(4), 20.0)
        assert np.allclose(phi.diag, 10.0 * np.ones(4))

    def test_negative_gain_rejected(self):
        with pytest.raises(ValueError):
            af_matrix(np.zeros(4), -1.0)


class TestRelayCodebook:
    def test_scalar_panel(self):
        geom = ArrayGeometry(rows_v=1, cols_h=1)
        cb = relay_codebook("irs", geom, 3, 4)
        assert len(cb) == 12
        assert all(p.phases.shape == (1,) for p in cb)

    @pytest.mark.parametrize("n_in,n_out", [(1, 1), (4, 9), (9, 9), (7, 5)])
    def test_cardinality(self, n_in, n_out):
        geom = ArrayGeometry(rows_v=4, cols_h=2)
        assert len(relay_codebook("irs", geom, n_in, n_out)) == n_in * n_out

    def test_rank_one_argmax_hits_matching_entry(self, rng):
        # LOS-only channels from grid direction i to grid direction o: the
        # (i, o) codebook entry maximizes the cascade gain
        geom = ArrayGeometry(rows_v=4, cols_h=4)
        in_center, out_center = (0.4, 1.4), (-0.8, 1.8)
        in_span, out_span = (0.5, 0.4), (0.5, 0.4)
        n_in, n_out = 9, 9
        cb = relay_codebook("irs", geom, n_in, n_out, in_center=in_center,
                            out_center=out_center, in_span=in_span, out_span=out_span)

        def grid_dirs(center, span, n):  # mirrors the balanced-factor grid
            n_az, n_zen = 3, 3
            offs = lambda k, w: (np.arange(k) - (k - 1) / 2) * (w / (k - 1))
            return [(center[0] + da, center[1] + dz)
                    for dz in offs(n_zen, span[1]) for da in offs(n_az, span[0])]

        ins = grid_dirs(in_center, in_span, n_in)
        outs = grid_dirs(out_center, out_span, n_out)
        for i, o in [(0, 0), (4, 4), (2, 7)]:
            h_in = plane_wave_phases(geom, *ins[i])
            h_out = plane_wave_phases(geom, *outs[o])
            gains = [abs(np.sum(h_out * p.diag * h_in)) for p in cb]
            assert int(np.argmax(gains)) == i * n_out + o

    def test_af_entries_carry_gain(self):
        geom = ArrayGeometry(rows_v=2, cols_h=2)
        cb = relay_codebook("af", geom, 2, 2, amp_gain_db=40.0)
        assert all(np.allclose(np.abs(p.diag), 100.0) for p in cb)


class TestAfRelayedNoise:
    def test_zero_sigma_zero(self, rng):
        h = random_realization(rng, 2, 4)
        phi = af_matrix(rng.uniform(-np.pi, np.pi, 4), 40.0)
        w = unit_codeword(rng.standard_normal(2) + 1j * rng.standard_normal(2))
        assert af_relayed_noise_power(w, h, phi, RelayNoise(0.0)) == 0.0

    def test_isometry_case(self):
        from relaysim.channel import ChannelRealization
        h = ChannelRealization(per_cluster=np.eye(3, dtype=complex)[None],
                               delays_s=np.zeros(1), dopplers_hz=np.zeros(1))
        phi = af_matrix(np.zeros(3), 20.0)  # g = 10
        w = unit_codeword([1.0, 0.0, 0.0])
        got = af_relayed_noise_power(w, h, phi, RelayNoise(2.0))
        assert got == pytest.approx(100.0 * 2.0, rel=1e-12)

    def test_matches_direct_product_oracle(self, rng):
        h = random_realization(rng, 4, 4, n_clusters=3)
        phi = af_matrix(rng.uniform(-np.pi, np.pi, 4), 12.0)
        wv = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        w = unit_codeword(wv)
        sigma2 = 1.7e-12
        got = af_relayed_noise_power(w, h, phi, RelayNoise(sigma2))
        hbar = h.per_cluster.sum(axis=0)
        phi_full = np.diag(phi.diag)
        row = w.weights @ hbar @ phi_full
        want = float(np.real(row @ phi_full.conj().T @ hbar.conj().T
                             @ w.weights.conj())) * sigma2
        assert got == pytest.approx(want, rel=1e-12)
        assert got >= 0.0

    def test_scales_as_g_squared(self, rng):
        h = random_realization(rng, 2, 6)
        w = unit_codeword(rng.standard_normal(2) + 1j * rng.standard_normal(2))
        phases = rng.uniform(-np.pi, np.pi, 6)
        noise = RelayNoise(1e-12)
        base = af_relayed_noise_power(w, h, af_matrix(phases, 0.0), noise)
        for gain_db in (6.0, 20.0, 40.0):
            val = af_relayed_noise_power(w, h, af_matrix(phases, gain_db), noise)
            g = 10.0 ** (gain_db / 20.0)
            assert val == pytest.approx(base * g * g, rel=1e-12)

    def test_requires_af_kind(self, rng):
        h = random_realization(rng, 2, 4)
        w = unit_codeword([1.0, 0.0])
        with pytest.raises(ValueError):
            af_relayed_noise_power(w, h, irs_matrix(np.zeros(4)), RelayNoise(1e-12))

    def test_dimension_mismatch(self, rng):
        h = random_realization(rng, 2, 4)
        phi = af_matrix(np.zeros(3), 10.0)
        w = unit_codeword([1.0, 0.0])
        with pytest.raises(ValueError):
            af_relayed_noise_power(w, h, phi, RelayNoise(1e-12))


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_irs_isometry(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 40))
    phi = irs_matrix(rng.uniform(-np.pi, np.pi, n))
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    assert np.linalg.norm(phi.diag * x) == pytest.approx(np.linalg.norm(x), rel=1e-12)


def test_structural_degeneracy(rng):
    phases = rng.uniform(-np.pi, np.pi, 12)
    assert np.array_equal(irs_matrix(phases).diag, af_matrix(phases, 0.0).diag)
