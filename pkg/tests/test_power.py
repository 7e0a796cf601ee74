import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ORACLE
from wfmarl.power import (CoefficientModel, PowerModel, power_coefficient, tilt_coefficient,
                          turbine_power, yaw_coefficient)
from wfmarl.wake import DomainError, Setpoint, TurbineSpec

SPEC = TurbineSpec()
COS = CoefficientModel("cosine")
FIT_YAW = CoefficientModel("fitted", fit="yaw")
FIT_TILT = CoefficientModel("fitted", fit="tilt")


def test_power_coefficient_examples():
    assert power_coefficient(0.0) == 0.0
    assert power_coefficient(1 / 3) == pytest.approx(16 / 27, abs=1e-15)
    with pytest.raises(DomainError):
        power_coefficient(0.5)


def test_betz_grid_scan():
    grid = np.arange(0.0, 1 / 3 + 1e-12, 1e-4)
    grid[-1] = min(grid[-1], 1 / 3)
    values = [power_coefficient(a) for a in grid]
    assert abs(grid[int(np.argmax(values))] - 1 / 3) <= 1e-4


class TestCoefficients:
    def test_zero_misalignment_is_one(self):
        for model in (COS, FIT_YAW, FIT_TILT):
            assert model(0.0) == pytest.approx(1.0, abs=1e-15)

    def test_cosine_yaw(self):
        g = math.radians(30)
        assert yaw_coefficient(COS, g) == pytest.approx(math.cos(g) ** 3, rel=1e-15)
        assert yaw_coefficient(COS, g) == pytest.approx(0.6495, abs=1e-4)
        assert yaw_coefficient(COS, -g) == yaw_coefficient(COS, g)

    def test_custom_exponent(self):
        m = CoefficientModel("cosine", exponent=1.88)
        assert m(0.5) == pytest.approx(math.cos(0.5) ** 1.88, rel=1e-15)

    def test_fitted_tilt_raw_is_zero_at_origin(self):
        assert FIT_TILT._raw(0.0) == pytest.approx(0.0, abs=1e-15)
        assert FIT_TILT.normalization_offset == pytest.approx(1.0, abs=1e-15)

    def test_fitted_tilt_ten_degrees(self):
        assert tilt_coefficient(FIT_TILT, math.radians(10)) == pytest.approx(
            ORACLE["c_beta_10deg_shifted"], rel=1e-13)

    def test_fitted_yaw_clamped(self):
        # the printed linear term dominates, so the shifted curve sits above 1 for positive yaw
        assert yaw_coefficient(FIT_YAW, math.radians(20)) == 1.0
        assert 0.0 <= yaw_coefficient(FIT_YAW, math.radians(-45)) <= 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            yaw_coefficient(COS, math.radians(50))
        with pytest.raises(DomainError):
            tilt_coefficient(COS, math.radians(20))
        with pytest.raises(ValueError):
            CoefficientModel("spline")
        with pytest.raises(ValueError):
            PowerModel.named("bogus")


@settings(max_examples=200, deadline=None)
@given(st.floats(-math.radians(45), math.radians(45)), st.sampled_from([COS, FIT_YAW, FIT_TILT]))
def test_coefficients_in_unit_interval(angle, model):
    assert 0.0 <= model(angle) <= 1.0


class TestTurbinePower:
    def test_single_turbine_reference(self):
        p = turbine_power(SPEC, Setpoint(), 8.0)
        expected = 0.5 * 16 / 27 * 1.225 * math.pi * 126 ** 2 / 4 * 512
        assert p == pytest.approx(expected, rel=1e-14)
        assert p == pytest.approx(ORACLE["p_single_u8"], rel=1e-14)

    def test_zero_wind(self):
        assert turbine_power(SPEC, Setpoint(), 0.0) == 0.0

    def test_cubic_scaling(self):
        sp = Setpoint.from_degrees(0.25, 10.0, 5.0)
        assert turbine_power(SPEC, sp, 6.0) == pytest.approx(8 * turbine_power(SPEC, sp, 3.0), rel=1e-14)

    def test_rated_cap(self):
        assert turbine_power(SPEC, Setpoint(), 20.0) == SPEC.rated_power

    def test_air_density_override(self):
        sp = Setpoint()
        p = turbine_power(SPEC, sp, 7.0, air_density=1.0)
        assert p == pytest.approx(turbine_power(SPEC, sp, 7.0) / 1.225, rel=1e-14)
        assert turbine_power(SPEC, sp, 7.0, model=PowerModel(air_density=1.0)) == p

    def test_negative_velocity(self):
        with pytest.raises(DomainError):
            turbine_power(SPEC, Setpoint(), -1.0)

    def test_fitted_model(self):
        m = PowerModel.named("fitted")
        p = turbine_power(SPEC, Setpoint.from_degrees(1 / 3, 10.0, 10.0), 8.0, model=m)
        assert p == pytest.approx(ORACLE["p_single_u8"] * ORACLE["c_beta_10deg_shifted"], rel=1e-13)
        # linear-term dominance of the printed yaw fit zeroes power for negative yaw
        assert turbine_power(SPEC, Setpoint.from_degrees(1 / 3, -20.0), 8.0, model=m) == 0.0


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1 / 3), st.floats(-45, 45), st.floats(-15, 15), st.floats(0, 25), st.floats(0, 25))
def test_power_monotone_in_velocity(alpha, g, b, u1, u2):
    sp = Setpoint.from_degrees(alpha, g, b)
    lo, hi = sorted((u1, u2))
    assert 0.0 <= turbine_power(SPEC, sp, lo) <= turbine_power(SPEC, sp, hi)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1 / 3), st.floats(0, 45), st.floats(0, 45), st.floats(0, 12))
def test_cosine_power_even_and_decreasing_in_yaw(alpha, g1, g2, u):
    lo, hi = sorted((g1, g2))
    p = lambda g: turbine_power(SPEC, Setpoint.from_degrees(alpha, g), u)  # noqa: E731
    assert p(lo) == p(-lo)
    assert p(hi) <= p(lo)
