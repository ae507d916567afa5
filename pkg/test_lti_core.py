#!/usr/bin/env python3
"""
Tests for the LTI core: model construction, frequency response,
discretization, simulation and step metrics.
"""

import math

import numpy as np
import pytest

from exceptions.control_exceptions import (
    BilinearSingularity, FractionalDelay, ImproperSystem, NegativeDeadTime, NonpositiveSampleTime,
    NotSettled, PoleOnAxis, SampleTimeMismatch, UnsupportedOrder, ZeroDenominator,
)
from lti_core import (
    DiscreteTransferFunction, TimeSeries, bode, c2d_tustin, c2d_zoh, dc_gain, delay_samples,
    discrete_freq_response, freq_response, series, simulate, step_metrics, tf_new, to_state_space,
    w_frequency, w_transform, wrap_angle,
)


def _random_stable_plant(rng, max_order=3):
    order = int(rng.integers(1, max_order + 1))
    den = np.poly(-rng.uniform(0.5, 10.0, order))
    num = rng.uniform(-3.0, 3.0, int(rng.integers(1, order + 1)))
    num[-1] = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 3.0)
    return tf_new(num, den)



def _random_stable_poles(rng, order):
    poles = []
    while len(poles) < order:
        if order - len(poles) >= 2 and rng.random() < 0.5:
            re, im = -rng.uniform(0.05, 10.0), rng.uniform(0.1, 20.0)
            poles.extend([complex(re, im), complex(re, -im)])
        else:
            poles.append(complex(-rng.uniform(0.05, 50.0), 0.0))
    return poles


class TestTransferFunction:

    def test_denominator_is_made_monic(self):
        sys = tf_new([2.0, 4.0], [2.0, 2.0, 8.0])
        assert sys.den == (1.0, 1.0, 4.0)
        assert sys.num == (1.0, 2.0)

    def test_leading_numerator_zeros_are_dropped(self):
        assert tf_new([0.0, 0.0, 3.0], [1.0, 1.0]).num == (3.0,)

    @pytest.mark.parametrize("num,den,error", [
        ([1.0, 0.0, 0.0], [1.0, 1.0], ImproperSystem),
        ([1.0], [0.0], ZeroDenominator),
        ([1.0], [], ZeroDenominator),
        ([1.0], list(np.poly(-np.arange(1.0, 13.0))), UnsupportedOrder),
    ])
    def test_invalid_models_are_rejected(self, num, den, error):
        with pytest.raises(error):
            tf_new(num, den)

    def test_negative_dead_time(self):
        with pytest.raises(NegativeDeadTime):
            tf_new([1.0], [1.0, 1.0], -0.1)

    def test_equal_values_give_equal_systems(self):
        assert tf_new([2.0], [2.0, 4.0]) == tf_new([1.0], [1.0, 2.0])

    def test_state_space_matches_transfer_function(self, rational_plant):
        ss = to_state_space(rational_plant)
        for s in (0.3j, 1.0 + 2.0j, -0.2 + 7.0j):
            assert ss.transfer_at(s) == pytest.approx(rational_plant.evaluate(s), rel=1e-12)

    def test_biproper_state_space_keeps_feedthrough(self):
        ss = to_state_space(tf_new([2.0, 1.0], [1.0, 3.0]))
        assert ss.D[0, 0] == 2.0
        assert ss.transfer_at(1j) == pytest.approx((2j + 1.0) / (1j + 3.0))


class TestFrequencyResponse:

    def test_reference_plant_dc_gain(self, reference_plant):
        point = freq_response(reference_plant, 0.0)
        assert point.magnitude == pytest.approx(2.8 / 2.2, rel=1e-9)
        assert dc_gain(reference_plant) == pytest.approx(1.272727272727, rel=1e-9)

    def test_magnitude_at_design_crossover(self, reference_plant):
        assert freq_response(reference_plant, 3.6).magnitude == pytest.approx(0.204101525233, rel=1e-10)

    def test_dead_time_only_shifts_phase(self, reference_plant, rational_plant):
        with_delay = freq_response(reference_plant, 2.0)
        without = freq_response(rational_plant, 2.0)
        assert with_delay.magnitude == pytest.approx(without.magnitude, rel=1e-12)
        assert with_delay.phase_unwrapped == pytest.approx(without.phase_unwrapped - 2.0 * 0.3, abs=1e-12)
        assert -math.pi < with_delay.phase <= math.pi

    def test_pole_on_axis(self):
        with pytest.raises(PoleOnAxis):
            freq_response(tf_new([1.0], [1.0, 0.0]), 0.0)
        with pytest.raises(PoleOnAxis):
            freq_response(tf_new([1.0], [1.0, 0.0, 4.0]), 2.0)
        with pytest.raises(PoleOnAxis):
            dc_gain(tf_new([1.0], [1.0, 0.0]))

    def test_series_multiplies_responses(self, reference_plant):
        other = tf_new([3.0], [1.0, 1.0], 0.1)
        combined = series(reference_plant, other)
        assert combined.dead_time == pytest.approx(0.4)
        for omega in (0.1, 1.0, 10.0):
            expected = freq_response(reference_plant, omega).value * freq_response(other, omega).value
            assert freq_response(combined, omega).value == pytest.approx(expected, rel=1e-10)

    def test_bode_table(self, reference_plant):
        table = bode(reference_plant, [0.1, 1.0, 10.0, 100.0])
        assert list(table.columns) == ["omega", "magnitude", "phase", "phase_unwrapped"]
        assert table["phase_unwrapped"].is_monotonic_decreasing
        assert table["phase"].between(-math.pi, math.pi).all()

    @pytest.mark.parametrize("angle,expected", [
        (math.pi, math.pi), (-math.pi, math.pi), (2.5 * math.pi, 0.5 * math.pi), (0.5, 0.5), (-7.0, -7.0 + 2.0 * math.pi),
    ])
    def test_wrap_angle(self, angle, expected):
        assert wrap_angle(angle) == pytest.approx(expected, abs=1e-12)


class TestDiscretize:

    def test_zoh_first_order_pole(self):
        dsys = c2d_zoh(tf_new([1.0], [1.0, 1.0]), 0.1)
        assert dsys.poles()[0] == pytest.approx(math.exp(-0.1), abs=1e-12)
        assert dsys.dc_gain() == pytest.approx(1.0, rel=1e-12)

    def test_zoh_dead_time_becomes_samples(self, reference_plant):
        dsys = c2d_zoh(reference_plant, 0.05)
        assert dsys.pure_delay_samples == 6
        assert dsys.dc_gain() == pytest.approx(2.8 / 2.2, rel=1e-10)
        np.testing.assert_allclose(sorted(np.abs(dsys.poles())), sorted(np.exp([-5 * 0.05, -0.44 * 0.05])),
                                   atol=1e-12)

    def test_fractional_delay(self):
        with pytest.raises(FractionalDelay):
            delay_samples(0.33, 0.05)
        assert delay_samples(0.3, 0.05) == 6

    def test_nonpositive_sample_time(self, reference_plant):
        with pytest.raises(NonpositiveSampleTime):
            c2d_zoh(reference_plant, 0.0)

    def test_tustin_preserves_dc_gain(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            plant = _random_stable_plant(rng)
            dsys = c2d_tustin(plant, float(rng.uniform(0.05, 0.2)))
            assert dsys.dc_gain() == pytest.approx(dc_gain(plant), rel=1e-10, abs=1e-12)

    def test_tustin_keeps_stable_poles_inside_unit_circle(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            order = int(rng.integers(1, 5))
            den = np.real(np.poly(_random_stable_poles(rng, order)))
            plant = tf_new(rng.uniform(0.5, 2.0, int(rng.integers(1, order + 1))), den)
            dsys = c2d_tustin(plant, float(rng.uniform(0.01, 0.5)))
            assert np.max(np.abs(dsys.poles())) < 1.0

    def test_tustin_singularity(self):
        with pytest.raises(BilinearSingularity):
            c2d_tustin(tf_new([1.0], [1.0, -20.0]), 0.1)

    def test_w_transform_reproduces_discrete_magnitude(self, reference_plant):
        T = 0.05
        dsys = c2d_zoh(reference_plant, T)
        wsys = w_transform(dsys)
        assert wsys.dead_time == pytest.approx(0.3)
        for omega in (0.2, 1.0, 3.6, 20.0):
            discrete = discrete_freq_response(dsys, omega)
            continuous = freq_response(wsys, w_frequency(omega, T))
            assert continuous.magnitude == pytest.approx(discrete.magnitude, rel=1e-9)

    def test_w_transform_inverts_tustin(self, rational_plant):
        recovered = w_transform(c2d_tustin(rational_plant, 0.05))
        np.testing.assert_allclose(recovered.den, rational_plant.den, rtol=1e-9)
        np.testing.assert_allclose(recovered.num, rational_plant.num, rtol=1e-9)


class TestSimulation:

    def test_first_order_step_is_exact_at_samples(self):
        T = 0.1
        result = simulate(tf_new([1.0], [1.0, 1.0]), np.ones(50), T)
        expected = 1.0 - np.exp(-T * np.arange(50))
        np.testing.assert_allclose(result.y, expected, atol=1e-12)

    def test_continuous_and_discrete_paths_agree(self, reference_plant):
        u = np.sin(0.7 * np.arange(400) * 0.05) + 0.3
        continuous = simulate(reference_plant, u, 0.05)
        discrete = simulate(c2d_zoh(reference_plant, 0.05), u, 0.05)
        np.testing.assert_allclose(continuous.y, discrete.y, atol=1e-9)

    def test_superposition(self, reference_plant):
        rng = np.random.default_rng(12)
        for plant in (reference_plant, _random_stable_plant(rng), c2d_zoh(reference_plant, 0.05)):
            u1, u2 = rng.normal(size=(2, 300))
            a, b = rng.uniform(-3.0, 3.0, 2)
            combined = simulate(plant, a * u1 + b * u2, 0.05).y
            expected = a * simulate(plant, u1, 0.05).y + b * simulate(plant, u2, 0.05).y
            np.testing.assert_allclose(combined, expected, rtol=1e-9, atol=1e-9 * np.max(np.abs(expected)))

    def test_dead_time_delays_output(self, reference_plant, rational_plant):
        u = np.ones(100)
        delayed = simulate(reference_plant, u, 0.05).y
        plain = simulate(rational_plant, u, 0.05).y
        assert np.all(delayed[:7] == 0.0)
        np.testing.assert_allclose(delayed[6:], plain[:-6], atol=1e-12)

    def test_sample_time_mismatch(self, reference_plant):
        series_ = TimeSeries.from_input(np.ones(10), 0.1)
        with pytest.raises(SampleTimeMismatch):
            simulate(reference_plant, series_, 0.05)
        with pytest.raises(SampleTimeMismatch):
            simulate(DiscreteTransferFunction((1.0,), (1.0, -0.5), 0.1), np.ones(10), 0.05)

    def test_simulation_is_deterministic(self, reference_plant):
        u = np.random.default_rng(3).normal(size=300)
        first = simulate(reference_plant, u, 0.05).y
        second = simulate(reference_plant, u, 0.05).y
        assert np.array_equal(first, second)


class TestStepMetrics:

    def test_first_order_metrics(self):
        T = 0.001
        response = simulate(tf_new([1.0], [1.0, 1.0]), np.ones(12000), T)
        metrics = step_metrics(response)
        assert metrics.rise_time_10_90 == pytest.approx(math.log(9.0), abs=2e-3)
        assert metrics.overshoot == 0.0
        assert metrics.settling_time_2pct == pytest.approx(math.log(50.0), abs=5e-3)
        assert metrics.time_to_90 == pytest.approx(math.log(10.0), abs=2e-3)

    def test_flat_response_reports_zeros(self):
        metrics = step_metrics(TimeSeries.from_input(np.zeros(20), 0.1, np.full(20, 2.0)))
        assert metrics.rise_time_10_90 == 0.0
        assert metrics.overshoot == 0.0
        assert metrics.steady_state == 2.0

    def test_unsettled_response(self):
        ramp = TimeSeries.from_input(np.ones(100), 0.1, np.arange(100.0))
        with pytest.raises(NotSettled):
            step_metrics(ramp)

    def test_second_order_overshoot(self):
        zeta = 0.3
        response = simulate(tf_new([1.0], [1.0, 2.0 * zeta, 1.0]), np.ones(40000), 0.001)
        expected = math.exp(-zeta * math.pi / math.sqrt(1.0 - zeta ** 2))
        assert step_metrics(response).overshoot == pytest.approx(expected, rel=1e-3)
