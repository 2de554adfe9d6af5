#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
JRSWW測度の求積のテスト
"""

import numpy as np
import pytest

from retrodictor.core.quadrature import (
    cdf,
    characteristic_from_nodes,
    density,
    inverse_cdf,
    jrsww_characteristic_exact,
    jrsww_nodes,
    mass_error,
    self_test,
)


class TestDensity:
    """密度関数と累積分布関数のテスト"""

    def test_density_at_zero(self):
        """π/(cosh 0 + 1) = π/2"""
        assert density(0.0) == pytest.approx(np.pi / 2)

    def test_cdf_symmetry(self):
        """F(−t) = 1 − F(t)"""
        ts = np.linspace(-2.0, 2.0, 9)
        assert np.allclose(cdf(-ts), 1.0 - cdf(ts))
        assert cdf(0.0) == pytest.approx(0.5)

    @pytest.mark.parametrize("u", [1e-12, 1e-3, 0.3, 0.5, 0.9, 1 - 1e-9])
    def test_inverse_cdf(self, u):
        """F(F⁻¹(u)) = u（端点近くでも桁落ちしない）"""
        assert cdf(inverse_cdf(u)) == pytest.approx(u, rel=1e-9, abs=1e-15)


class TestNodes:
    """求積点と重みのテスト"""

    def test_mass(self):
        """重みの和は1"""
        assert mass_error() <= 1e-12
        assert self_test()

    def test_coarse_rule_fails_self_test(self):
        """パネルが少ないと取りこぼす質量が大きく自己検査に失敗する"""
        assert not self_test(order=16, panels=10)

    def test_symmetric(self):
        """求積点は原点について対称"""
        nodes, weights = jrsww_nodes()
        assert np.allclose(nodes, -nodes[::-1])
        assert np.allclose(weights, weights[::-1])
        assert np.all(weights > 0)

    def test_invalid_order(self):
        """次数やパネル数が1未満ならエラー"""
        with pytest.raises(ValueError):
            jrsww_nodes(0)
        with pytest.raises(ValueError):
            jrsww_nodes(16, 0)


class TestCharacteristic:
    """特性関数のテスト"""

    def test_exact_at_zero(self):
        """確率測度の特性関数は ω = 0 で 1"""
        assert jrsww_characteristic_exact(np.array([0.0]))[0] == pytest.approx(1.0)

    def test_exact_is_even(self):
        """(ω/2)/sinh(ω/2) は偶関数"""
        omega = np.array([0.5, 3.0, 12.0])
        assert np.allclose(jrsww_characteristic_exact(omega), jrsww_characteristic_exact(-omega))

    def test_exact_large_frequency(self):
        """大きな周波数ではオーバーフローせず 0 に近づく"""
        value = jrsww_characteristic_exact(np.array([2000.0]))[0]
        assert np.isfinite(value)
        assert value == pytest.approx(0.0, abs=1e-300)

    @pytest.mark.parametrize("omega", [0.0, 1.0, 2 * np.pi, 4 * np.pi, 10.0])
    def test_quadrature_matches_closed_form(self, omega):
        """求積による特性関数が閉形式と一致する"""
        nodes, weights = jrsww_nodes()
        computed = characteristic_from_nodes(np.array([omega]), nodes, weights)[0]
        expected = jrsww_characteristic_exact(np.array([omega]))[0]
        assert abs(computed - expected) <= 1e-8

    def test_shape_preserved(self):
        """入力の形状が保たれる"""
        nodes, weights = jrsww_nodes()
        omega = np.arange(6.0).reshape(2, 3)
        assert characteristic_from_nodes(omega, nodes, weights).shape == (2, 3)
