import math

import numpy as np
import pytest

from srcond.errors import ConfigError, DomainError
from srcond.specfun import BesselOrder, bessel_j, first_bessel_zero, gauss_legendre


def bessel_series(nu: float, x: float, terms: int = 140) -> float:
    """Independent oracle: the ascending power series, summed with fsum."""
    parts = []
    for k in range(terms):
        parts.append((-1.0) ** k * (0.5 * x) ** (nu + 2 * k)
                     / (math.factorial(k) * math.gamma(nu + k + 1)))
    return math.fsum(parts)


class TestBesselJ:
    def test_j0_at_zero(self):
        assert bessel_j(0, 0.0) == 1.0

    def test_half_order_at_pi(self):
        assert abs(bessel_j(0.5, math.pi)) < 1e-15

    def test_j0_near_first_j1_zero(self):
        # frozen from the power-series oracle summed to machine precision
        assert bessel_j(0, 3.8317059702) == pytest.approx(-0.402759395702553, abs=1e-12)

    @pytest.mark.parametrize("twice_order", [-1, 0, 1, 2, 3, 4])
    def test_against_series_oracle(self, twice_order):
        nu = twice_order / 2.0
        for x in np.linspace(0.05, 12.0, 23):
            assert bessel_j(nu, float(x)) == pytest.approx(
                bessel_series(nu, float(x)), abs=1e-12
            )

    def test_vectorized(self):
        x = np.linspace(0.0, 40.0, 101)
        vals = bessel_j(1, x)
        assert vals.shape == x.shape
        assert vals[0] == 0.0

    def test_recurrence_residual(self):
        # J_{nu-1} + J_{nu+1} = (2 nu / x) J_nu on (0, 50]
        x = np.linspace(0.02, 50.0, 400)
        for nu in (-0.5, 0.0, 0.5, 1.0, 1.5, 2.0):
            res = bessel_j(nu - 1, x) + bessel_j(nu + 1, x) - (2 * nu / x) * bessel_j(nu, x)
            bound = 1e-10 * (1.0 + np.abs(bessel_j(nu, x)))
            assert np.all(np.abs(res) <= bound), f"nu={nu}"

    def test_unsupported_order(self):
        with pytest.raises(ConfigError):
            bessel_j(7.0, 1.0)
        with pytest.raises(ConfigError):
            bessel_j(0.3, 1.0)

    def test_negative_x(self):
        with pytest.raises(DomainError):
            bessel_j(0, -1.0)


class TestFirstZero:
    def test_half_order_zero_is_pi(self):
        assert abs(first_bessel_zero(0.5) - math.pi) < 1e-12

    def test_order_one(self):
        z = first_bessel_zero(1)
        assert z == pytest.approx(3.8317059702075125, abs=1e-12)
        assert z / math.pi == pytest.approx(1.22, abs=5e-3)

    def test_order_zero(self):
        z = first_bessel_zero(0)
        assert z == pytest.approx(2.4048255576957728, abs=1e-12)
        assert 2 * z / math.pi == pytest.approx(1.53, abs=5e-3)

    @pytest.mark.parametrize("twice_order", [-1, 0, 1, 2, 3, 4])
    def test_residual_at_zero(self, twice_order):
        order = BesselOrder(twice_order)
        z = first_bessel_zero(order)
        assert abs(bessel_j(order, z)) <= 1e-11

    def test_unsupported(self):
        with pytest.raises(ConfigError):
            first_bessel_zero(2.5)


class TestGaussLegendre:
    def test_midpoint(self):
        rule = gauss_legendre(1)
        assert rule.nodes.tolist() == [0.0]
        assert rule.weights.tolist() == [2.0]

    def test_quartic(self):
        rule = gauss_legendre(5)
        assert rule.integrate(lambda x: x**4) == pytest.approx(0.4, rel=1e-13)

    def test_cosine_on_unit_interval(self):
        rule = gauss_legendre(50)
        val = rule.integrate(lambda x: np.cos(2 * np.pi * x), -0.5, 0.5)
        assert abs(val) < 1e-14

    @pytest.mark.parametrize("m", [2, 3, 5, 10, 17, 40, 100])
    def test_monomial_exactness(self, m):
        rule = gauss_legendre(m)
        for deg in range(0, 2 * m):
            exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
            num = float(np.dot(rule.weights, rule.nodes**deg))
            assert abs(num - exact) <= 1e-10 * max(1.0, abs(exact))

    def test_weight_sum_and_ordering(self):
        for m in (7, 64, 501):
            rule = gauss_legendre(m)
            assert abs(rule.weights.sum() - 2.0) < 1e-12
            assert np.all(np.diff(rule.nodes) > 0)
            assert np.all(rule.weights > 0)

    def test_large_rule(self):
        rule = gauss_legendre(5000)
        assert abs(rule.weights.sum() - 2.0) < 1e-11

    def test_out_of_range(self):
        with pytest.raises(ConfigError):
            gauss_legendre(0)
        with pytest.raises(ConfigError):
            gauss_legendre(10001)
