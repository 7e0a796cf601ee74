import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ORACLE
from wfmarl import wake
from wfmarl.wake import (Ambient, DomainError, Setpoint, TurbineSpec, core_velocity,
                         deficit_amplitude, far_wake_deflection, initial_wake_widths,
                         local_turbulence, near_wake_skew, potential_core_length, rotor_velocity,
                         thrust_coefficient, turbulence_intensity, wake_geometry, wake_velocity_at,
                         wake_widths)

SPEC = TurbineSpec()
AMB = Ambient(u_inf=8.0, I0=0.1)
D = SPEC.rotor_diameter

alphas = st.floats(0.0, 1.0 / 3.0)
gammas = st.floats(-math.radians(45), math.radians(45))
betas = st.floats(-math.radians(15), math.radians(15))


def _hub(x, y=0.0):
    return (x, y, SPEC.hub_height)


class TestThrustAndCore:
    def test_thrust_examples(self):
        assert thrust_coefficient(0.0) == 0.0
        assert thrust_coefficient(1 / 3) == pytest.approx(8 / 9, rel=1e-15)
        assert thrust_coefficient(0.2) == pytest.approx(0.64, rel=1e-15)

    @pytest.mark.parametrize("alpha", [-0.01, 0.34, 1.0])
    def test_thrust_domain(self, alpha):
        with pytest.raises(DomainError):
            thrust_coefficient(alpha)

    def test_core_velocity(self):
        assert core_velocity(AMB, 8 / 9) == pytest.approx(8 / 3, rel=1e-14)
        assert core_velocity(AMB, 0.0) == 8.0
        assert core_velocity(Ambient(u_inf=0.0), 0.5) == 0.0
        with pytest.raises(DomainError):
            core_velocity(AMB, 1.0)


class TestTurbulence:
    def test_zero_induction_adds_nothing(self):
        assert turbulence_intensity(AMB, 0.0, 3 * D, SPEC) == AMB.I0

    def test_five_diameters_matches_oracle(self):
        assert turbulence_intensity(AMB, 1 / 3, 5 * D, SPEC) == pytest.approx(ORACLE["ti_5d"], rel=1e-13)

    def test_far_field_decays_to_ambient(self):
        far = turbulence_intensity(AMB, 1 / 3, 1e9 * D, SPEC)
        assert far == pytest.approx(AMB.I0, rel=1e-3)
        assert far > AMB.I0

    def test_clamped_near_rotor(self):
        at0 = turbulence_intensity(AMB, 1 / 3, 0.0, SPEC)
        assert math.isfinite(at0)
        assert at0 == turbulence_intensity(AMB, 1 / 3, 0.1 * D, SPEC)

    def test_negative_distance_rejected(self):
        with pytest.raises(DomainError):
            turbulence_intensity(AMB, 1 / 3, -1.0, SPEC)


class TestNearWake:
    def test_core_length_oracle(self):
        x0 = potential_core_length(SPEC, 0.0, 8 / 9, 0.1)
        assert x0 == pytest.approx(ORACLE["x0_greedy"], rel=1e-13)
        assert x0 == pytest.approx(168 / (math.sqrt(2) * (0.232 + 2 * 0.077 / 3)), rel=1e-12)

    def test_core_length_zero_thrust_limit(self):
        x0 = potential_core_length(SPEC, 0.0, 0.0, 0.1)
        assert x0 == pytest.approx(2 * D / (math.sqrt(2) * (4 * 0.58 * 0.1 + 2 * 0.077)), rel=1e-14)

    def test_core_length_decreases_with_ambient_ti(self):
        vals = [potential_core_length(SPEC, 0.0, 8 / 9, i) for i in (0.02, 0.05, 0.1, 0.2)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_core_length_domain(self):
        with pytest.raises(DomainError):
            potential_core_length(SPEC, 0.0, 1.0, 0.1)

    def test_skew(self):
        assert near_wake_skew(0.0, 8 / 9) == 0.0
        g = math.radians(20)
        assert near_wake_skew(g, 8 / 9) == pytest.approx(ORACLE["theta_c0_20deg"], rel=1e-13)
        assert near_wake_skew(-g, 8 / 9) == -near_wake_skew(g, 8 / 9)

    def test_rotor_velocity_and_widths(self):
        assert rotor_velocity(8.0, 8 / 9, 0.0, 0.0) == pytest.approx(16 / 3, rel=1e-14)
        sy0, sz0 = initial_wake_widths(SPEC, AMB, 0.0, 0.0, 1 / 3, 8 / 9)
        assert sz0 == pytest.approx(63 * math.sqrt(0.5), rel=1e-14)
        assert sy0 == pytest.approx(sz0 * math.cos(1 / 3), rel=1e-14)

    def test_rotor_velocity_zero_thrust_limit(self):
        assert rotor_velocity(8.0, 0.0, 0.0, 0.0) == 8.0
        # series of x / (2(1 - sqrt(1-x))) is 1 - x/4 - x^2/16
        x = 1e-6
        assert rotor_velocity(8.0, x, 0.0, 0.0) == pytest.approx(8.0 * (1 - x / 4 - x * x / 16), rel=1e-15)

    @pytest.mark.parametrize("ct,g,b", [(8 / 9, 0.0, 0.0), (0.64, 0.3, -0.2), (0.3, -0.7, 0.26)])
    def test_rotor_velocity_matches_printed_form(self, ct, g, b):
        x = ct * math.cos(g) * math.cos(b)
        assert rotor_velocity(8.0, ct, g, b) == pytest.approx(8.0 * x / (2 * (1 - math.sqrt(1 - x))),
                                                              rel=1e-14)

    def test_widths_equal_at_vanishing_induction(self):
        sy0, sz0 = initial_wake_widths(SPEC, AMB, 0.0, 0.0, 0.0, 0.0)
        assert sy0 == sz0


class TestFarWake:
    geo = wake_geometry(SPEC, Setpoint(), AMB)

    def test_growth_rate(self):
        assert wake.growth_rate(0.1) == pytest.approx(0.042, rel=1e-14)

    def test_widths_anchor_and_growth(self):
        g = self.geo
        assert wake_widths(g, g.x0, 0.1) == (g.sigma_y0, g.sigma_z0)
        assert wake_widths(g, 0.5 * g.x0, 0.1) == (g.sigma_y0, g.sigma_z0)
        s1, s2 = wake_widths(g, g.x0 + 100, 0.1), wake_widths(g, g.x0 + 200, 0.1)
        assert s2[0] > s1[0] > g.sigma_y0 and s2[1] > s1[1] > g.sigma_z0

    def test_no_deflection_without_yaw(self):
        for x in np.linspace(1.0, 15 * D, 40):
            sy, sz = wake_widths(self.geo, x, local_turbulence(self.geo, x))
            assert far_wake_deflection(self.geo, x, sy, sz) == 0.0

    def test_deflection_seven_diameters_oracle(self):
        geo = wake_geometry(SPEC, Setpoint.from_degrees(1 / 3, 20.0), AMB)
        x = 7 * D
        sy, sz = wake_widths(geo, x, local_turbulence(geo, x))
        assert far_wake_deflection(geo, x, sy, sz) == pytest.approx(ORACLE["delta_7d_20deg"], rel=1e-12)

    def test_velocity_seven_diameters_oracle(self):
        u, _ = wake_velocity_at((0.0, 0.0), SPEC, Setpoint(), AMB, _hub(7 * D))
        assert u == pytest.approx(ORACLE["u_7d_greedy"], rel=1e-13)

    def test_zero_thrust_no_deflection(self):
        geo = wake_geometry(SPEC, Setpoint.from_degrees(0.0, 30.0), AMB)
        x = 5 * D
        assert far_wake_deflection(geo, x, *wake_widths(geo, x, 0.1)) == 0.0


class TestWakeVelocity:
    def test_upstream_and_outside_window(self):
        sp = Setpoint()
        assert wake_velocity_at((0.0, 0.0), SPEC, sp, AMB, _hub(-1.0)) == (8.0, 0.0)
        assert wake_velocity_at((0.0, 0.0), SPEC, sp, AMB, _hub(0.0)) == (8.0, 0.0)
        assert wake_velocity_at((0.0, 0.0), SPEC, sp, AMB, _hub(15 * D + 1e-6)) == (8.0, 0.0)
        assert wake_velocity_at((0.0, 0.0), SPEC, sp, AMB, _hub(15 * D))[0] < 8.0

    def test_recovers_toward_free_stream(self):
        us = [wake_velocity_at((0, 0), SPEC, Setpoint(), AMB, _hub(k * D))[0] for k in (5, 8, 11, 15)]
        assert all(a < b for a, b in zip(us, us[1:]))
        assert us[-1] < 8.0

    def test_near_wake_core_floor(self):
        geo = wake_geometry(SPEC, Setpoint(), AMB)
        u, _ = wake_velocity_at((0, 0), SPEC, Setpoint(), AMB, _hub(0.5 * geo.x0))
        assert u == pytest.approx(geo.u0, rel=1e-12)

    def test_null_wake(self):
        sp = Setpoint.from_degrees(0.0, 25.0, 10.0)
        for x in (10.0, 3 * D, 9 * D):
            for y in (-100.0, 0.0, 50.0):
                assert wake_velocity_at((0, 0), SPEC, sp, AMB, (x, y, 80.0))[0] == 8.0

    def test_skew_sign_and_peak(self):
        sp = Setpoint.from_degrees(1 / 3, 20.0)
        geo = wake_geometry(SPEC, sp, AMB)
        x = 6 * D
        sy, sz = wake_widths(geo, x, local_turbulence(geo, x))
        delta = far_wake_deflection(geo, x, sy, sz)
        # the skew profile peaks one width to the negative side of the wake centre
        peak = wake_velocity_at((0, 0), SPEC, sp, AMB, _hub(x, delta - sy))[1]
        assert peak == pytest.approx(geo.theta_c0, rel=1e-12)
        for off in (-60.0, 0.0, 40.0):
            assert 0 < wake_velocity_at((0, 0), SPEC, sp, AMB, _hub(x, delta - sy + off))[1] < peak + 1e-15
        neg = wake_velocity_at((0, 0), SPEC, Setpoint.from_degrees(1 / 3, -20.0), AMB, _hub(x, 0.0))[1]
        assert neg < 0


def _geometry(alpha, gamma, beta, i0=0.1):
    return wake_geometry(SPEC, Setpoint(alpha, gamma, beta), Ambient(I0=i0))


@settings(max_examples=200, deadline=None)
@given(alphas, gammas, betas, st.floats(0.0, 15.0), st.floats(-400, 400), st.floats(0.0, 200.0),
       st.floats(0.02, 0.3))
def test_velocity_bounded(alpha, gamma, beta, xd, y, z, i0):
    u, th = wake_velocity_at((0, 0), SPEC, Setpoint(alpha, gamma, beta), Ambient(I0=i0), (xd * D, y, z))
    assert 0.0 <= u <= 8.0
    assert math.isfinite(th)


@settings(max_examples=200, deadline=None)
@given(alphas, gammas, betas, st.floats(0.01, 15.0))
def test_deflection_odd_in_yaw(alpha, gamma, beta, xd):
    x = xd * D
    pos = _geometry(alpha, gamma, beta)
    neg = _geometry(alpha, -gamma, beta)
    dp = far_wake_deflection(pos, x, *wake_widths(pos, x, local_turbulence(pos, x)))
    dn = far_wake_deflection(neg, x, *wake_widths(neg, x, local_turbulence(neg, x)))
    assert dp == pytest.approx(-dn, rel=1e-12, abs=1e-300)


@settings(max_examples=150, deadline=None)
@given(st.floats(0.01, 1.0 / 3.0), gammas, betas, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_deficit_non_increasing_beyond_core(alpha, gamma, beta, f1, f2):
    geo = _geometry(alpha, gamma, beta)
    lo, hi = sorted((f1, f2))
    span = 15 * D - geo.x0
    if span <= 0:
        return
    x1, x2 = geo.x0 + lo * span, geo.x0 + hi * span
    c1 = deficit_amplitude(geo, *wake_widths(geo, x1, local_turbulence(geo, x1)))
    c2 = deficit_amplitude(geo, *wake_widths(geo, x2, local_turbulence(geo, x2)))
    assert c2 <= c1 + 1e-15


@settings(max_examples=150, deadline=None)
@given(st.floats(0.01, 1.0 / 3.0), gammas, betas, st.floats(0.02, 0.3))
def test_branch_continuity_at_core_end(alpha, gamma, beta, i0):
    geo = _geometry(alpha, gamma, beta, i0)
    x0 = geo.x0
    k = wake.growth_rate(local_turbulence(geo, x0))
    eps = x0 * 1e-12
    near = far_wake_deflection(geo, x0, geo.sigma_y0, geo.sigma_z0, k)
    sy, sz = geo.sigma_y0 + k * eps, geo.sigma_z0 + k * eps
    far = far_wake_deflection(geo, x0 + eps, sy, sz, k)
    assert far == pytest.approx(near, rel=1e-9, abs=1e-12)
    c_near = deficit_amplitude(geo, geo.sigma_y0, geo.sigma_z0)
    c_far = deficit_amplitude(geo, sy, sz)
    assert c_far == pytest.approx(c_near, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(alphas, gammas, betas, st.floats(0.5, 14.0), st.floats(0.0, 150.0))
def test_symmetric_about_deflected_centre(alpha, gamma, beta, xd, off):
    geo = _geometry(alpha, gamma, beta)
    x = xd * D
    delta = far_wake_deflection(geo, x, *wake_widths(geo, x, local_turbulence(geo, x)))
    sp = Setpoint(alpha, gamma, beta)
    up, _ = wake_velocity_at((0, 0), SPEC, sp, AMB, _hub(x, delta + off))
    down, _ = wake_velocity_at((0, 0), SPEC, sp, AMB, _hub(x, delta - off))
    assert up == pytest.approx(down, rel=1e-12)


def test_setpoint_validation():
    with pytest.raises(DomainError):
        Setpoint.from_degrees(1 / 3, 46.0)
    with pytest.raises(DomainError):
        Setpoint.from_degrees(1 / 3, 0.0, -16.0)
    with pytest.raises(DomainError):
        Setpoint(0.4)
    with pytest.raises(DomainError):
        Ambient(I0=0.0)
    Setpoint.from_degrees(1 / 3, 45.0, 15.0)
