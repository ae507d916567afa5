#!/usr/bin/env python3
"""
Tests for PID synthesis at the gain crossover and the digital controller.
"""

import math

import numpy as np
import pytest
from scipy.signal import lfilter

from conftest import DESIGNED_KD, DESIGNED_KI, DESIGNED_KP
from exceptions.control_exceptions import (
    NonpositiveRiseTime, NonpositiveSampleTime, PlantZeroGain, ThetaOutOfRange,
)
from lti_core import c2d_tustin, c2d_zoh, freq_response, tf_new, w_transform
from pid_design import (
    DesignSpec, DigitalPid, PidGains, crossover_from_rise_time, default_ki, design_from_spec,
    design_pid, discretize_pid, pid_step, verify_design,
)


class TestDesign:

    def test_rise_time_rule(self):
        assert crossover_from_rise_time(0.5) == pytest.approx(3.6)
        with pytest.raises(NonpositiveRiseTime):
            crossover_from_rise_time(0.0)

    def test_reference_design_gains(self, reference_plant, theta_5deg):
        result = design_from_spec(reference_plant, DesignSpec(0.5, theta_5deg))
        assert result.omega_w1 == pytest.approx(3.6)
        assert result.plant_gain == pytest.approx(0.204101525233, rel=1e-10)
        assert result.gains.kp == pytest.approx(DESIGNED_KP, rel=1e-10)
        assert result.gains.ki == pytest.approx(DESIGNED_KI, rel=1e-10)
        assert result.gains.kd == pytest.approx(DESIGNED_KD, rel=1e-10)

    def test_default_ki_rule(self):
        assert default_ki(4.0, 3.0) == pytest.approx(0.6)

    def test_unity_plant_gives_unity_kp(self):
        gains = design_pid(tf_new([1.0, 1.0], [1.0, 1.0]), 2.0, 0.0, 0.0)
        assert gains.kp == pytest.approx(1.0)
        assert gains.kd == pytest.approx(0.0)

    def test_crossover_identities_hold_for_random_designs(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            poles = -rng.uniform(0.1, 10.0, int(rng.integers(1, 4)))
            plant = tf_new([rng.uniform(0.2, 5.0)], np.poly(poles), rng.uniform(0.0, 0.5))
            omega = rng.uniform(0.1, 20.0)
            theta = rng.uniform(-1.5, 1.5)
            gains = design_pid(plant, omega, theta, rng.uniform(0.0, 5.0))
            report = verify_design(plant, gains, omega, theta)
            assert report.matches
            assert abs(report.loop_gain - 1.0) <= 1e-8
            assert abs(report.controller_phase - theta) <= 1e-8

    def test_phase_margin_follows_plant_phase(self, reference_plant, designed_gains, theta_5deg):
        report = verify_design(reference_plant, designed_gains, 3.6, theta_5deg)
        plant_phase = freq_response(reference_plant, 3.6).phase_unwrapped
        assert report.phase_margin == pytest.approx(math.pi + theta_5deg + plant_phase, abs=1e-9)

    @pytest.mark.parametrize("theta", [math.pi / 2.0, -math.pi / 2.0, 2.0])
    def test_theta_out_of_range(self, reference_plant, theta):
        with pytest.raises(ThetaOutOfRange):
            design_pid(reference_plant, 3.6, theta, 0.1)

    def test_zero_gain_plant(self):
        with pytest.raises(PlantZeroGain):
            design_pid(tf_new([0.0], [1.0, 1.0]), 1.0, 0.0, 0.0)

    def test_invalid_design_requests(self):
        with pytest.raises(NonpositiveRiseTime):
            DesignSpec(-0.5, 0.0)
        with pytest.raises(ThetaOutOfRange):
            DesignSpec(0.5, math.pi)

    def test_w_plane_design_meets_identities_on_w_plant(self, reference_plant, theta_5deg):
        result = design_from_spec(reference_plant, DesignSpec(0.5, theta_5deg), sample_time=0.05, domain="w")
        w_plant = w_transform(c2d_zoh(reference_plant, 0.05))
        assert result.domain == "w"
        assert result.omega_w1 == pytest.approx(2.0 / 0.05 * math.tan(3.6 * 0.05 / 2.0))
        assert verify_design(w_plant, result.gains, result.omega_w1, theta_5deg).matches


class TestDigitalPid:

    def test_first_sample_of_designed_controller(self, designed_gains):
        ctrl = discretize_pid(designed_gains, 0.05)
        assert pid_step(ctrl, 1.0) == pytest.approx(8.63098349, abs=1e-8)

    def test_step_sequence_matches_transfer_function(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            gains = PidGains(*rng.uniform(0.0, 5.0, 3))
            T = float(rng.uniform(0.001, 0.2))
            errors = rng.normal(size=200)
            ctrl = DigitalPid(gains, T)
            outputs = np.array([pid_step(ctrl, e) for e in errors])
            b, a = ctrl.transfer_function().filter_coefficients()
            np.testing.assert_allclose(outputs, lfilter(b, a, errors), atol=1e-9, rtol=1e-9)

    def test_reset_restores_zero_history(self, designed_gains):
        ctrl = DigitalPid(designed_gains, 0.05)
        first = ctrl.run([1.0, 0.5, -0.2])
        ctrl.reset()
        assert np.array_equal(ctrl.run([1.0, 0.5, -0.2]), first)

    def test_integrator_freezes_while_clamped(self):
        ctrl = DigitalPid(PidGains(0.0, 1.0, 0.0), 0.1, output_limits=(-1.0, 1.0))
        ctrl.run(np.ones(100))
        assert ctrl.integral <= 1.0
        assert ctrl.step(-1.0) < 1.0

    def test_integrator_unwinds_while_clamped(self):
        ctrl = DigitalPid(PidGains(10.0, 1.0, 0.0), 0.1, output_limits=(-1.0, 1.0))
        ctrl.run(np.ones(5))
        before = ctrl.integral
        output = ctrl.step(-0.5)
        assert ctrl.saturated
        assert output == -1.0
        assert ctrl.integral == pytest.approx(before + 0.025)

    def test_integral_term(self):
        term = DigitalPid(PidGains(0.0, 2.0, 0.0), 0.1).integral_term()
        assert term.num == pytest.approx((0.1, 0.1))
        assert term.den == pytest.approx((1.0, -1.0))

    @pytest.mark.parametrize("ki,T", [(2.0, 0.1), (DESIGNED_KI, 0.05), (0.3, 0.001)])
    def test_integral_term_is_tustin_of_integrator(self, ki, T):
        term = DigitalPid(PidGains(0.0, ki, 0.0), T).integral_term()
        tustin = c2d_tustin(tf_new([ki], [1.0, 0.0]), T)
        np.testing.assert_allclose(term.num, tustin.num, rtol=1e-12)
        np.testing.assert_allclose(term.den, tustin.den, rtol=1e-12)

    def test_nonpositive_sample_time(self, designed_gains):
        with pytest.raises(NonpositiveSampleTime):
            DigitalPid(designed_gains, 0.0)
