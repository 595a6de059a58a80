import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from locpilot.geometry import (CellConfig, UserDrop, UserLocation, channel_from_parts,
                               draw_channel, los_steering, pathloss, rician_weights)


class TestPathloss:
    def test_unity_at_cell_edge(self):
        cell = CellConfig(8, cell_radius_m=1000.0, pathloss_exponent=3.8)
        assert pathloss(1000.0, cell) == 1.0

    def test_reference_value(self):
        # 0.1 ** -3.8 evaluated with mpmath at 30 digits
        cell = CellConfig(8, cell_radius_m=1000.0, pathloss_exponent=3.8)
        assert pathloss(100.0, cell) == pytest.approx(6309.57344480193249434360136623, rel=1e-14)

    def test_zero_exponent(self):
        cell = CellConfig(8, pathloss_exponent=0.0)
        np.testing.assert_array_equal(pathloss(np.array([1.0, 50.0, 5000.0]), cell), 1.0)

    @pytest.mark.parametrize("r", [0.0, -3.0, float("nan")])
    def test_rejects_non_positive(self, r):
        with pytest.raises(ValueError):
            pathloss(r, CellConfig(4))

    @given(st.floats(1.0, 1e4), st.floats(1.0, 1e4))
    def test_strictly_decreasing(self, a, b):
        cell = CellConfig(4)
        if a < b:
            assert pathloss(a, cell) > pathloss(b, cell)


class TestSteering:
    @pytest.mark.parametrize("theta", [0.0, math.pi])
    @pytest.mark.parametrize("m", [1, 5, 64])
    def test_broadside_all_ones(self, theta, m):
        np.testing.assert_allclose(los_steering(theta, CellConfig(m)), np.ones(m), atol=1e-15)

    def test_endfire_half_wavelength(self):
        np.testing.assert_allclose(los_steering(math.pi / 2, CellConfig(4)), [1, -1, 1, -1], atol=1e-15)

    @given(st.floats(0, 2 * math.pi, exclude_max=True), st.integers(1, 300))
    @settings(max_examples=50)
    def test_unit_modulus_and_norm(self, theta, m):
        a = los_steering(theta, CellConfig(m))
        np.testing.assert_allclose(np.abs(a), 1.0, rtol=1e-14)
        assert np.vdot(a, a).real == pytest.approx(m, rel=1e-13)

    def test_matrix_columns(self):
        thetas = np.array([0.1, 1.0, 4.0])
        cell = CellConfig(7, antenna_spacing_ratio=0.3)
        mat = los_steering(thetas, cell)
        assert mat.shape == (7, 3)
        for k, t in enumerate(thetas):
            expected = [np.exp(-1j * m * 2 * np.pi * 0.3 * np.sin(t)) for m in range(7)]
            np.testing.assert_allclose(mat[:, k], expected, rtol=1e-14)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            los_steering(float("inf"), CellConfig(4))


class TestTypes:
    @pytest.mark.parametrize("kwargs", [dict(r=0, theta=0, k_factor=1),
                                        dict(r=1, theta=2 * math.pi, k_factor=1),
                                        dict(r=1, theta=-0.1, k_factor=1),
                                        dict(r=1, theta=0, k_factor=-1)])
    def test_user_location_invariants(self, kwargs):
        with pytest.raises(ValueError):
            UserLocation(**kwargs)

    def test_empty_drop(self):
        with pytest.raises(ValueError):
            UserDrop(())

    @pytest.mark.parametrize("m", [0, -2, 2.5])
    def test_cell_rejects_bad_m(self, m):
        with pytest.raises(ValueError):
            CellConfig(m)

    def test_drop_roundtrip(self, default_drop):
        assert UserDrop.from_dict(default_drop.to_dict()) == default_drop

    @pytest.mark.parametrize("bad,field", [({}, "users"),
                                           ({"users": [{"r": 1, "theta": 0}]}, "k_factor"),
                                           ({"users": [{"r": "x", "theta": 0, "k_factor": 1}]}, "r")])
    def test_from_dict_names_field(self, bad, field):
        with pytest.raises(ValueError, match=field):
            UserDrop.from_dict(bad)


class TestDrawChannel:
    def test_column_structure(self, rng):
        drop = UserDrop.from_arrays([150.0, 700.0, 990.0], [0.3, 2.0, 5.5], [0.0, 3.0, 10.0])
        cell = CellConfig(32)
        chan = draw_channel(drop, cell, rng)
        beta = pathloss(drop.r, cell)
        los_w, nlos_w = rician_weights(drop.k_factor)
        assert chan.g_los.shape == chan.g_nlos.shape == (32, 3)
        np.testing.assert_allclose(np.sum(np.abs(chan.g_los) ** 2, axis=0), 32 * beta * los_w, rtol=1e-13)
        # K = 0: no LOS part at all
        assert np.all(chan.g_los[:, 0] == 0)

    def test_reconstruction(self, rng):
        drop = UserDrop.from_arrays([300.0, 800.0], [1.0, 3.0], [2.0, 5.0])
        cell = CellConfig(16)
        h = (rng.standard_normal((16, 2)) + 1j * rng.standard_normal((16, 2))) / np.sqrt(2)
        chan = channel_from_parts(drop, cell, h)
        beta = pathloss(drop.r, cell)
        k = drop.k_factor
        a = los_steering(drop.theta, cell)
        expected = np.sqrt(beta) * (np.sqrt(k / (k + 1)) * a + np.sqrt(1 / (k + 1)) * h)
        np.testing.assert_allclose(chan.g, expected, rtol=1e-14, atol=1e-14)

    def test_pure_los_limit(self, rng):
        drop = UserDrop.from_arrays([400.0], [0.7], 1e12)
        cell = CellConfig(64)
        chan = draw_channel(drop, cell, rng)
        beta = pathloss(400.0, cell)
        assert np.linalg.norm(chan.g_nlos) < 1e-5 * np.sqrt(beta * 64)
        np.testing.assert_allclose(chan.g[:, 0], np.sqrt(beta) * los_steering(0.7, cell), rtol=1e-5)

    def test_infinite_k(self, rng):
        drop = UserDrop.from_arrays([400.0], [0.7], math.inf)
        chan = draw_channel(drop, CellConfig(8), rng)
        assert np.all(chan.g_nlos == 0)

    def test_nlos_power_statistics(self, rng):
        # mean of ||g_nlos||^2 / M over 10^4 draws vs beta/(K+1), 3 standard errors
        drop = UserDrop.from_arrays([250.0, 900.0], [1.0, 2.0], [3.0, 0.5])
        cell = CellConfig(4)
        chan = draw_channel(drop, cell, rng, batch=10_000)
        per_draw = np.sum(np.abs(chan.g_nlos) ** 2, axis=-2) / cell.m_antennas
        expected = pathloss(drop.r, cell) / (drop.k_factor + 1)
        mean = per_draw.mean(axis=0)
        se = per_draw.std(axis=0, ddof=1) / np.sqrt(per_draw.shape[0])
        assert np.all(np.abs(mean - expected) < 3 * se)

    def test_per_entry_variance_within_5pct(self, rng):
        drop = UserDrop.from_arrays([500.0], [1.0], 2.0)
        cell = CellConfig(3)
        chan = draw_channel(drop, cell, rng, batch=10_000)
        var = np.var(chan.g_nlos[:, :, 0], axis=0)
        expected = pathloss(500.0, cell) / 3.0
        np.testing.assert_allclose(var, expected, rtol=0.05)
        # real and imaginary parts each carry half the variance
        np.testing.assert_allclose(np.var(chan.g_nlos.real[:, :, 0], axis=0), expected / 2, rtol=0.05)
