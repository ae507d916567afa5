#!/usr/bin/env python3
"""
Tests for the BLDC map, the closed loops and the open-loop experiments.
"""

from dataclasses import replace

import numpy as np
import pytest
from scipy.signal import lfilter

from config_manager import RunConfig
from exceptions.control_exceptions import (
    ConfigMismatch, DegenerateSpeed, DutyOutOfRange, NegativeVoltage, SimulationError,
)
from lti_core import c2d_zoh, step_metrics, tf_new
from pid_design import DigitalPid, PidGains
from robot_sim import (
    BldcMap, Scenario, SignalSpec, SteeringPlant, bldc_plant_system, bldc_static, calibrate_gain,
    compare_response, duty_to_voltage, open_loop_experiment, run_open_loop, run_steering_loop,
    run_trajectory_loop, run_velocity_loop,
)
from sysid import linearity_scan

AMPLITUDES = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0]


def _velocity_scenario(plant, controller, **kwargs):
    return Scenario("velocity", plant, controller, 0.05, kwargs.pop("duration", 40.0), SignalSpec("step", 1.0),
                    **kwargs)


def _padded_sum(first, second):
    total = np.zeros(max(len(first), len(second)))
    total[:len(first)] += first
    total[:len(second)] += second
    return total


class TestBldc:

    def test_map_values(self):
        bldc = BldcMap()
        assert bldc.speed(11.0) == pytest.approx(1.0)
        assert bldc.speed(19.5) == pytest.approx(2.5)
        assert bldc.speed(40.0) == pytest.approx(4.0)
        assert bldc.slope_at(11.0) == pytest.approx(3.0 / 17.0)
        assert bldc.slope_at(5.0) == pytest.approx(3.0 / 17.0)
        assert bldc.slope_at(30.0) == 0.0

    def test_static_speed_has_zero_floor(self):
        assert bldc_static(BldcMap(), 0.0) == 0.0
        assert bldc_static(BldcMap(), 19.5) == pytest.approx(2.5)
        with pytest.raises(NegativeVoltage):
            bldc_static(BldcMap(), -1.0)

    def test_equivalent_voltage(self):
        bldc = BldcMap()
        assert bldc.equivalent_voltage(20.0, 11.0) == pytest.approx(20.0)
        assert bldc.equivalent_voltage(40.0, 11.0) == pytest.approx(28.0)
        with pytest.raises(ConfigMismatch):
            bldc.equivalent_voltage(30.0, 30.0)

    def test_duty_to_voltage(self):
        assert duty_to_voltage(0.5) == 24.0
        assert duty_to_voltage(1.0, 36.0) == 36.0
        with pytest.raises(DutyOutOfRange):
            duty_to_voltage(1.2)

    @pytest.mark.parametrize("knees", [((11.0, 1.0),), ((11.0, 1.0), (10.0, 2.0)), ((11.0, 2.0), (28.0, 1.0))])
    def test_invalid_maps(self, knees):
        with pytest.raises(SimulationError):
            BldcMap(knees)

    def test_linear_range_of_map_and_plant(self, reference_plant):
        system = bldc_plant_system(BldcMap(), reference_plant, 11.0)
        report = linearity_scan(system, 0.125, AMPLITUDES, 0.05, max_distortion=0.002)
        assert report.linear_range == 16.0
        distortions = [row.distortion for row in report.rows]
        assert max(distortions[:8]) < 1e-4
        assert distortions[8] > 0.002
        assert distortions[9] > distortions[8]


class TestVelocityLoop:

    def test_reference_step_response(self):
        cfg = RunConfig()
        result = run_velocity_loop(cfg.scenario())
        metrics = step_metrics(result.series)
        assert result.saturated_share == 0.0
        assert metrics.steady_state == pytest.approx(0.999868625, rel=1e-6)
        assert metrics.rise_time_10_90 == pytest.approx(0.180347953, rel=1e-6)
        assert metrics.overshoot == pytest.approx(0.352134592, rel=1e-6)
        assert metrics.time_to_90 == pytest.approx(0.49, abs=0.03)

    def test_first_duty_matches_first_control_sample(self):
        result = run_velocity_loop(RunConfig().scenario())
        assert result.series.u[0] == pytest.approx(8.63098349 / 48.0, abs=1e-8)

    def test_reruns_are_identical(self):
        scenario = RunConfig().scenario()
        assert np.array_equal(run_velocity_loop(scenario).series.y, run_velocity_loop(scenario).series.y)

    def test_noise_is_seeded(self, reference_plant, designed_gains):
        controller = DigitalPid(designed_gains, 0.05)
        first = run_velocity_loop(_velocity_scenario(reference_plant, controller, noise_std=0.01, seed=3))
        again = run_velocity_loop(_velocity_scenario(reference_plant, controller, noise_std=0.01, seed=3))
        other = run_velocity_loop(_velocity_scenario(reference_plant, controller, noise_std=0.01, seed=4))
        assert np.array_equal(first.series.y, again.series.y)
        assert not np.array_equal(first.series.y, other.series.y)

    def test_saturation_is_reported(self, reference_plant):
        controller = DigitalPid(PidGains(200.0, 0.0, 0.0), 0.05)
        result = run_velocity_loop(_velocity_scenario(reference_plant, controller, duration=5.0))
        assert result.saturated_share > 0.0
        assert np.all(result.series.u <= 1.0 - 11.0 / 48.0 + 1e-12)

    def test_starved_actuator_does_not_wind_up(self, reference_plant, designed_gains):
        controller = DigitalPid(designed_gains, 0.05)
        scenario = Scenario("velocity", reference_plant, controller, 0.05, 20.0, SignalSpec("pulse", 4.0, width=10.0),
                            actuator_limits=(0.0, 0.05), operating_point=(0.0, 0.0), use_bldc_map=False)
        result = run_velocity_loop(scenario)
        t, u, y = result.series.t, result.series.u, result.series.y
        during, after = t < 10.0 - 1e-9, t > 10.0 - 1e-9
        assert result.saturated_share == 1.0
        assert controller.integral == 0.0
        assert controller.output_limits is None
        np.testing.assert_allclose(u[during], 0.05, atol=1e-12)
        assert np.all(u[after] == 0.0)
        assert y[-1] < 0.06

    def test_controller_limits_must_overlap_actuator_range(self, reference_plant, designed_gains):
        controller = DigitalPid(designed_gains, 0.05, output_limits=(20.0, 30.0))
        scenario = _velocity_scenario(reference_plant, controller, actuator_limits=(0.0, 0.5))
        with pytest.raises(ConfigMismatch):
            run_velocity_loop(scenario)
        assert controller.output_limits == (20.0, 30.0)

    def test_matches_algebraic_closed_loop(self, reference_plant, designed_gains):
        controller = DigitalPid(designed_gains, 0.05)
        scenario = _velocity_scenario(reference_plant, controller, duration=20.0, actuator_limits=None,
                                      use_bldc_map=False)
        result = run_velocity_loop(scenario)
        bg, ag = c2d_zoh(reference_plant, 0.05).filter_coefficients()
        bd, ad = controller.transfer_function().filter_coefficients()
        forward = np.convolve(bg, bd)
        closed = _padded_sum(np.convolve(ag, ad), forward)
        np.testing.assert_allclose(result.series.y, lfilter(forward, closed, result.reference), atol=1e-9)

    def test_bldc_map_is_transparent_for_small_steps(self):
        scenario = replace(RunConfig().scenario(), reference=SignalSpec("step", 0.1))
        mapped = run_velocity_loop(scenario)
        linear = run_velocity_loop(replace(scenario, use_bldc_map=False))
        np.testing.assert_allclose(mapped.series.y, linear.series.y, atol=1e-12)

    def test_algebraic_loop_is_rejected(self, designed_gains):
        plant = tf_new([1.0, 1.0], [1.0, 2.0])
        with pytest.raises(ConfigMismatch):
            run_velocity_loop(_velocity_scenario(plant, DigitalPid(designed_gains, 0.05)))

    def test_wrong_loop_kind(self):
        with pytest.raises(ConfigMismatch):
            run_velocity_loop(RunConfig().scenario("steering"))


class TestSteeringLoop:

    def test_proportional_servo(self, reference_plant):
        controller = DigitalPid(PidGains(5.0, 0.0, 0.0), 0.001)
        scenario = Scenario("steering", reference_plant, controller, 0.001, 2.0, SignalSpec("step", 0.2))
        result = run_steering_loop(scenario, SteeringPlant(time_constant=0.2))
        final = 0.2 * 5.0 / 6.0
        assert result.series.y[-1] == pytest.approx(final, rel=1e-9)
        assert result.series.y[100] / final == pytest.approx(0.952, abs=1e-3)
        assert np.array_equal(result.series.u, result.reference)

    def test_angle_respects_mechanical_limit(self, reference_plant):
        controller = DigitalPid(PidGains(50.0, 0.0, 0.0), 0.01)
        scenario = Scenario("steering", reference_plant, controller, 0.01, 2.0, SignalSpec("step", 2.0))
        result = run_steering_loop(scenario, SteeringPlant(steer_limit=0.4))
        assert np.max(np.abs(result.series.y)) <= 0.4


class TestTrajectoryLoop:

    def test_constant_curvature_gives_circle(self):
        cfg = RunConfig()
        result = run_trajectory_loop(cfg.scenario("trajectory"), cfg.trajectory(), cfg.steering())
        settled = result.frame[result.frame["t"] >= 10.0]["kappa"]
        assert settled.min() >= 0.4998
        assert settled.max() <= 0.5 + 1e-6
        assert result.summary["circle_radius"] == pytest.approx(2.0, rel=1e-3)
        assert list(result.frame.columns) == ["t", "x", "y", "heading", "vx", "omega", "kappa", "steer"]

    def test_straight_path_does_not_drift(self):
        cfg = RunConfig()
        cfg.set("trajectory.reference_path.amplitude", 0.0)
        cfg.set("scenario.duration", 60.0)
        result = run_trajectory_loop(cfg.scenario("trajectory"), cfg.trajectory(), cfg.steering())
        assert result.frame["t"].iloc[-1] == pytest.approx(60.0 - 0.05)
        assert result.frame["y"].abs().max() < 1e-6

    def test_zero_speed_is_degenerate(self):
        cfg = RunConfig()
        cfg.set("trajectory.speed", 0.0)
        with pytest.raises(DegenerateSpeed):
            run_trajectory_loop(cfg.scenario("trajectory"), cfg.trajectory(), cfg.steering())

    def test_straight_path_reports_cross_track(self):
        cfg = RunConfig()
        cfg.set("trajectory.reference_path.amplitude", 0.0)
        result = run_trajectory_loop(cfg.scenario("trajectory"), cfg.trajectory(), cfg.steering())
        assert result.summary["max_cross_track"] == pytest.approx(0.0, abs=1e-12)
        assert result.summary["final_x"] == pytest.approx(40.0 - 0.05, rel=1e-9)


class TestOpenLoop:

    def test_step_experiment(self, reference_plant):
        data = open_loop_experiment(reference_plant, "step", 1.0, 0.05, 30.0)
        assert np.all(data.y[:7] == 0.0)
        assert data.y[-1] == pytest.approx(2.8 / 2.2, rel=1e-4)

    def test_model_matches_its_own_data(self, reference_plant):
        report = compare_response(reference_plant, open_loop_experiment(reference_plant, "sine", 2.0, 0.05, 20.0))
        assert report.fit == pytest.approx(1.0, abs=1e-12)
        assert report.max_abs_error == pytest.approx(0.0, abs=1e-12)

    def test_open_loop_scenario_adds_noise(self, reference_plant):
        scenario = Scenario("open_loop", reference_plant, None, 0.05, 20.0, SignalSpec("step", 1.0, start=1.0),
                            noise_std=0.05, seed=2)
        clean = open_loop_experiment(reference_plant, "step", 1.0, 0.05, 20.0, start=1.0)
        noisy = run_open_loop(scenario)
        assert np.std(noisy.y - clean.y) == pytest.approx(0.05, rel=0.2)

    def test_calibrated_gain(self, rational_plant):
        assert calibrate_gain(rational_plant, 3.0 / 17.0) == pytest.approx(0.138655, abs=1e-6)
        with pytest.raises(SimulationError):
            calibrate_gain(tf_new([0.0], [1.0, 1.0]), 0.2)


class TestScenario:

    @pytest.mark.parametrize("kwargs", [
        {"loop": "bogus"},
        {"controller": None},
        {"duration": 0.1},
        {"actuator_limits": (0.6, 0.2)},
        {"noise_std": -1.0},
        {"sample_time": 0.1},
    ])
    def test_invalid_scenarios(self, reference_plant, designed_gains, kwargs):
        arguments = {
            "loop": "velocity", "plant": reference_plant, "controller": DigitalPid(designed_gains, 0.05),
            "sample_time": 0.05, "duration": 10.0, "reference": SignalSpec(),
        }
        arguments.update(kwargs)
        with pytest.raises(ConfigMismatch):
            Scenario(**arguments)

    def test_signal_shapes(self):
        t = 0.5 * np.arange(8)
        assert list(SignalSpec("step", 2.0, start=1.0).evaluate(t)) == [0, 0, 2, 2, 2, 2, 2, 2]
        assert list(SignalSpec("ramp", 2.0, start=1.0).evaluate(t)) == [0, 0, 0, 1, 2, 3, 4, 5]
        assert list(SignalSpec("pulse", 1.0, start=1.0, width=1.0).evaluate(t)) == [0, 0, 1, 1, 0, 0, 0, 0]
        assert SignalSpec("sine", 1.0, frequency=0.5).evaluate(t)[1] == pytest.approx(1.0)
        assert not SignalSpec("zero").evaluate(t).any()

    def test_prbs_signal_is_seeded(self):
        t = 0.05 * np.arange(200)
        assert np.array_equal(SignalSpec("prbs", seed=1).evaluate(t), SignalSpec("prbs", seed=1).evaluate(t))

    def test_unknown_signal_kind(self):
        with pytest.raises(ConfigMismatch):
            SignalSpec("square")
