import math

import numpy as np
import pytest

from relaysim.antenna import (ArrayGeometry, Codeword, ISOTROPIC, TR38901,
                              angles_of, build_codebook, element_gain_db,
                              plane_wave_phases, steering_vector, unit_vector)


class TestSteeringVector:
    def test_boresight_equal_phase(self):
        geom = ArrayGeometry(rows_v=4, cols_h=4)
        w = steering_vector(geom, geom.boresight_az, geom.boresight_zen).weights
        assert np.allclose(w, w[0])

    def test_single_element_scalar_one(self):
        geom = ArrayGeometry(rows_v=1, cols_h=1)
        w = steering_vector(geom, 0.7, 1.1).weights
        assert w.shape == (1,)
        assert abs(w[0] - 1.0) < 1e-12

    def test_endfire_half_wavelength_pi_shift(self):
        # two elements along the horizontal axis; endfire direction is that axis
        geom = ArrayGeometry(rows_v=1, cols_h=2, spacing_wl=0.5)
        _, h_axis, _ = geom.axes()
        az, zen = angles_of(h_axis)
        w = steering_vector(geom, az, zen).weights
        dphi = abs(np.angle(w[1] / w[0]))
        assert dphi == pytest.approx(math.pi, abs=1e-12)

    def test_unit_norm(self, rng):
        geom = ArrayGeometry(rows_v=3, cols_h=5)
        for _ in range(10):
            w = steering_vector(geom, rng.uniform(-np.pi, np.pi),
                                rng.uniform(0.1, np.pi - 0.1)).weights
            assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-12)

    def test_matched_response_attains_sqrt_n(self, rng):
        geom = ArrayGeometry(rows_v=4, cols_h=4)
        for _ in range(10):
            az = rng.uniform(-np.pi / 2, np.pi / 2)
            zen = rng.uniform(0.5, np.pi - 0.5)
            a = plane_wave_phases(geom, az, zen)
            w = steering_vector(geom, az, zen).weights
            assert abs(w @ a) == pytest.approx(math.sqrt(geom.n_elements), rel=1e-12)
            other = plane_wave_phases(geom, az + 0.5, zen)
            assert abs(w @ other) <= math.sqrt(geom.n_elements) + 1e-9


class TestElementGain:
    def test_isotropic_everywhere_zero(self, rng):
        for _ in range(20):
            az, zen = rng.uniform(-np.pi, np.pi), rng.uniform(0, np.pi)
            assert element_gain_db(ISOTROPIC, az, zen) == 0.0

    def test_boresight_max_gain(self):
        assert element_gain_db(TR38901, 0.0, math.pi / 2) == pytest.approx(8.0)

    def test_half_beamwidth_is_3db_down(self):
        az = math.radians(TR38901.hpbw_az_deg / 2)
        assert element_gain_db(TR38901, az, math.pi / 2) == pytest.approx(8.0 - 3.0)

    def test_backlobe_clamped(self):
        g = element_gain_db(TR38901, math.pi, math.pi / 2)
        assert g == pytest.approx(TR38901.max_gain_dbi - TR38901.a_max_db)


class TestCodebook:
    def test_single_entry_is_boresight(self):
        geom = ArrayGeometry(rows_v=2, cols_h=2, boresight_az=0.4, boresight_zen=1.5)
        cb = build_codebook(geom, 1, 1)
        assert len(cb) == 1
        ref = steering_vector(geom, geom.boresight_az, geom.boresight_zen).weights
        assert np.allclose(cb.codewords[0].weights, ref)

    @pytest.mark.parametrize("n_az,n_zen", [(3, 2), (16, 8), (5, 5)])
    def test_cardinality(self, n_az, n_zen):
        geom = ArrayGeometry(rows_v=2, cols_h=2)
        assert len(build_codebook(geom, n_az, n_zen)) == n_az * n_zen

    def test_argmax_is_nearest_grid_point(self, rng):
        # directions slightly offset from a grid point must select that point
        geom = ArrayGeometry(rows_v=8, cols_h=8)
        cb = build_codebook(geom, 16, 8)
        n, h, up = geom.axes()
        for _ in range(10):
            i_az = rng.integers(4, 12)
            j_zen = rng.integers(2, 6)
            al = cb.az_grid[i_az] + 0.2 * (cb.az_grid[1] - cb.az_grid[0])
            zl = cb.zen_grid[j_zen] + 0.2 * (cb.zen_grid[1] - cb.zen_grid[0])
            u = (math.sin(zl) * math.cos(al) * n + math.sin(zl) * math.sin(al) * h
                 + math.cos(zl) * up)
            a = plane_wave_phases(geom, *angles_of(u))
            responses = np.abs(cb.matrix() @ a)
            assert int(np.argmax(responses)) == j_zen * 16 + i_az

    def test_deterministic(self):
        geom = ArrayGeometry(rows_v=4, cols_h=2, boresight_az=0.3)
        cb1 = build_codebook(geom, 6, 4)
        cb2 = build_codebook(geom, 6, 4)
        assert np.array_equal(cb1.matrix(), cb2.matrix())

    def test_all_unit_norm(self):
        geom = ArrayGeometry(rows_v=3, cols_h=3)
        cb = build_codebook(geom, 7, 3)
        assert np.allclose(np.linalg.norm(cb.matrix(), axis=1), 1.0, atol=1e-12)


class TestCodewordInvariant:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            Codeword(np.array([1.0, 1.0], dtype=complex))

    def test_accepts_global_phase(self):
        w = np.exp(1j * 0.7) * np.array([1.0, 0.0], dtype=complex)
        Codeword(w)


def test_unit_vector_roundtrip(rng):
    for _ in range(20):
        az, zen = rng.uniform(-np.pi, np.pi), rng.uniform(0.01, np.pi - 0.01)
        az2, zen2 = angles_of(unit_vector(az, zen))
        assert az2 == pytest.approx(az, abs=1e-12)
        assert zen2 == pytest.approx(zen, abs=1e-12)
