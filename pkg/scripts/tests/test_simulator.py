"""
Tests for the stick-slip simulator.
"""
import math
from unittest import TestCase

import numpy as np
import pandas as pd

from scripts.contact_model import ContactParams, PlanarTwist, UniformDisc
from scripts.exceptions import ConfigurationError
from scripts.simulator import (
    EventKind,
    FrictionModel,
    ScenarioSegment,
    SimConfig,
    make_heuristic_batch_config,
    make_heuristic_batch_scenario,
    make_paper_like_scenario,
    run_scenario,
    segment_from_mapping,
    sim_config_from_mapping,
)

STILL = PlanarTwist(0.0, 0.0, 0.0)


def _stick_segment(duration=2.0, **kwargs):
    truth = ContactParams(mu_s=0.8, mu_c=0.6, r=0.01)
    return ScenarioSegment(duration, STILL, truth, fn_knots=((0.0, 2.0),), load_rate=1.0, **kwargs)


class TestSlipSegments(TestCase):
    """Test the slip-phase wrench streams."""

    def test_pure_linear_slide_has_constant_force(self):
        truth = ContactParams(mu_s=0.6, mu_c=0.5, r=0.01)
        for model in FrictionModel:
            segment = ScenarioSegment(1.0, PlanarTwist(0.01, 0.0, 0.0), truth, UniformDisc(0.015))
            trace = run_scenario([segment], SimConfig(friction_model=model))
            f_t = np.hypot(trace.force["fx"], trace.force["fy"])
            np.testing.assert_allclose(f_t, 1.0, atol=1e-12)
            np.testing.assert_allclose(trace.force["tau"], 0.0, atol=1e-12)
            self.assertTrue((trace.force["fx"] < 0).all())

    def test_ellipsoid_model_stays_on_the_ellipsoid(self):
        truth = ContactParams(mu_s=0.65, mu_c=0.45, r=0.012)
        segment = ScenarioSegment(1.0, PlanarTwist(0.01, 0.005, 0.8), truth, fn_knots=((0.0, 1.0), (1.0, 4.0)))
        trace = run_scenario([segment], SimConfig(friction_model=FrictionModel.ELLIPSOID))
        scale = truth.mu_c * trace.force["fn"].to_numpy()
        f_t = np.hypot(trace.force["fx"], trace.force["fy"]).to_numpy()
        tau = trace.force["tau"].to_numpy()
        np.testing.assert_allclose((f_t / scale) ** 2 + (tau / (scale * truth.r)) ** 2, 1.0, atol=1e-9)

    def test_sample_counts_and_timestamps(self):
        segment = make_heuristic_batch_scenario(duration=10.0)
        trace = run_scenario(segment, SimConfig())
        self.assertEqual(len(trace.force), 10000)
        self.assertEqual(len(trace.velocity), 1200)
        self.assertEqual(len(trace.truth), 1200)
        self.assertTrue((np.diff(trace.force["t"]) > 0).all())
        self.assertAlmostEqual(trace.velocity["t"].iloc[1], 1.0 / 120.0, places=12)

    def test_radius_step_between_segments(self):
        first = ContactParams(mu_s=0.6, mu_c=0.4, r=0.010)
        second = ContactParams(mu_s=0.6, mu_c=0.4, r=0.020)
        segments = [
            ScenarioSegment(1.0, PlanarTwist(0.0, 0.0, 1.0), first, UniformDisc(0.015)),
            ScenarioSegment(1.0, PlanarTwist(0.0, 0.0, 1.0), second, UniformDisc(0.030)),
        ]
        trace = run_scenario(segments, SimConfig())
        truth = trace.truth.set_index("t")["r"]
        self.assertAlmostEqual(truth[truth.index < 1.0].max(), 0.010, places=9)
        self.assertAlmostEqual(truth[truth.index >= 1.0].min(), 0.020, places=9)
        tau = trace.force["tau"].abs()
        self.assertAlmostEqual(tau[trace.force["t"] >= 1.0].mean() / tau[trace.force["t"] < 1.0].mean(), 2.0, delta=0.01)


class TestStickSegments(TestCase):
    """Test the stick-phase load ramp and break-away."""

    def test_breakaway_time(self):
        trace = run_scenario([_stick_segment()], SimConfig())
        self.assertEqual([e.kind for e in trace.events], [EventKind.SLIP_ONSET, EventKind.STICK_ONSET])
        self.assertAlmostEqual(trace.events[0].t, 1.6, delta=1.5e-3)
        self.assertAlmostEqual(trace.events[0].f_t, 1.6, delta=1.5e-3)
        self.assertAlmostEqual(trace.events[1].f_t, 1.2, places=12)

    def test_load_drops_to_kinetic_level_after_breakaway(self):
        trace = run_scenario([_stick_segment()], SimConfig())
        force = -trace.force.set_index("t")["fx"]
        self.assertAlmostEqual(force[force.index < 1.6].max(), 1.6, delta=2e-3)
        after = force[force.index > 1.61]
        self.assertLess(after.max(), 1.6)
        self.assertGreaterEqual(after.min(), 1.2)

    def test_zero_velocity_except_breakaway_pulse(self):
        config = SimConfig(noise_vel_std=1e-3, seed=4)
        trace = run_scenario([_stick_segment()], config)
        moving = trace.velocity[(trace.velocity[["vx", "vy", "omega"]] != 0.0).any(axis=1)]
        self.assertEqual(len(moving), 1)
        self.assertAlmostEqual(moving["t"].iloc[0], 193 / 120.0, places=12)
        self.assertAlmostEqual(moving["vx"].iloc[0], 2 * config.eps_v, delta=5e-3)

    def test_pulse_follows_load_angle(self):
        trace = run_scenario([_stick_segment(load_angle=math.pi / 2)], SimConfig())
        moving = trace.velocity[(trace.velocity[["vx", "vy", "omega"]] != 0.0).any(axis=1)]
        self.assertAlmostEqual(moving["vy"].iloc[0], 2 * SimConfig().eps_v, places=12)
        self.assertAlmostEqual(moving["vx"].iloc[0], 0.0, places=12)

    def test_stick_force_opposes_the_pulse(self):
        for angle in (None, 0.0, math.pi / 2, -2.0):
            trace = run_scenario([_stick_segment(load_angle=angle)], SimConfig())
            merged = pd.merge_asof(trace.velocity, trace.force, on="t")
            pulses = merged[(merged[["vx", "vy"]] != 0.0).any(axis=1)]
            self.assertEqual(len(pulses), 1, msg=angle)
            power = pulses["fx"] * pulses["vx"] + pulses["fy"] * pulses["vy"]
            self.assertTrue((power < 0).all(), msg=angle)

    def test_load_direction_follows_previous_slip(self):
        truth = ContactParams(mu_s=0.6, mu_c=0.4, r=0.01)
        segments = [
            ScenarioSegment(1.0, PlanarTwist(0.0, 0.01, 0.0), truth),
            ScenarioSegment(2.0, STILL, truth, load_rate=1.0),
        ]
        trace = run_scenario(segments, SimConfig(friction_model=FrictionModel.ELLIPSOID))
        stick = trace.force[trace.force["t"] >= 1.0]
        np.testing.assert_allclose(stick["fx"], 0.0, atol=1e-12)
        self.assertTrue((stick["fy"] < 0).all())
        moving = trace.velocity[(trace.velocity[["vx", "vy"]] != 0.0).any(axis=1) & (trace.velocity["t"] >= 1.0)]
        self.assertGreater(len(moving), 0)
        np.testing.assert_allclose(moving["vy"], 2 * SimConfig().eps_v, rtol=1e-12)
        np.testing.assert_allclose(moving["vx"], 0.0, atol=1e-12)

    def test_breakaway_on_last_stick_sample(self):
        truth = ContactParams(mu_s=0.8, mu_c=0.6, r=0.01)
        breaking = ScenarioSegment(0.002, STILL, truth, initial_tangential=1.5995)
        for follower, expected in (
            (ScenarioSegment(0.5, PlanarTwist(0.01, 0.0, 0.0), truth), [EventKind.SLIP_ONSET]),
            (ScenarioSegment(0.5, STILL, truth, load_rate=0.1), [EventKind.SLIP_ONSET, EventKind.STICK_ONSET]),
        ):
            trace = run_scenario([breaking, follower], SimConfig())
            kinds = [e.kind for e in trace.events]
            self.assertEqual(kinds, expected)
            self.assertAlmostEqual(trace.events[0].t, 0.001, places=9)
            self.assertAlmostEqual(trace.events[0].f_t, 1.6005, places=9)
            follow = trace.force[trace.force["t"] >= 0.002]
            self.assertAlmostEqual(-follow["fx"].iloc[0], 1.2, places=9)

    def test_stick_starts_from_previous_slip_force(self):
        truth = ContactParams(mu_s=0.6, mu_c=0.4, r=0.01)
        segments = [
            ScenarioSegment(1.0, PlanarTwist(0.01, 0.0, 0.0), truth),
            ScenarioSegment(1.0, STILL, truth, load_rate=0.1),
        ]
        trace = run_scenario(segments, SimConfig(friction_model=FrictionModel.ELLIPSOID))
        stick = trace.force[trace.force["t"] >= 1.0]
        self.assertAlmostEqual(stick["fx"].abs().iloc[0], 0.8, places=9)
        self.assertEqual([e.kind for e in trace.events], [EventKind.SLIP_ONSET, EventKind.STICK_ONSET])


class TestDeterminism(TestCase):
    """Test seeding and noise injection."""

    def test_same_seed_same_trace(self):
        segments = make_paper_like_scenario()
        config = make_heuristic_batch_config(seed=11)
        self.assertTrue(run_scenario(segments, config).equals(run_scenario(segments, make_heuristic_batch_config(seed=11))))

    def test_different_seed_different_trace(self):
        segments = make_heuristic_batch_scenario(duration=2.0)
        first = run_scenario(segments, make_heuristic_batch_config(seed=1))
        second = run_scenario(segments, make_heuristic_batch_config(seed=2))
        self.assertFalse(first.equals(second))

    def test_spikes_raise_normal_force(self):
        trace = run_scenario(make_heuristic_batch_scenario(), make_heuristic_batch_config(seed=3))
        fn = trace.force["fn"]
        self.assertGreater(fn.max(), 5.0)
        self.assertAlmostEqual(fn.median(), 2.0, delta=0.05)


class TestPaperLikeScenario(TestCase):
    """Test the built-in five-segment scenario."""

    def setUp(self):
        self.trace = run_scenario(make_paper_like_scenario(), SimConfig())

    def test_duration_and_truth_steps(self):
        self.assertEqual(len(self.trace.velocity), int(10.5 * 120))
        radii = sorted(set(np.round(self.trace.truth["r"], 9)))
        self.assertEqual(radii, [0.010, 0.012, 0.015])

    def test_event_sequence(self):
        kinds = [e.kind for e in self.trace.events]
        self.assertEqual(kinds[0], EventKind.SLIP_ONSET)
        self.assertEqual(self.trace.events[0].t, 0.0)
        self.assertIn(EventKind.STICK_ONSET, kinds)
        for a, b in zip(kinds, kinds[1:]):
            self.assertNotEqual(a, b)
        starts = [e.t for e in self.trace.events if e.kind is EventKind.SLIP_ONSET]
        self.assertTrue(any(abs(t - 4.0) < 1e-9 for t in starts))
        self.assertTrue(any(abs(t - 7.5) < 1e-9 for t in starts))

    def test_tangential_force_continuous_into_stick(self):
        force = self.trace.force.set_index("t")
        before = force[force.index < 2.0].iloc[-1]
        after = force[force.index >= 2.0].iloc[0]
        self.assertAlmostEqual(before["fx"], -0.8, places=9)
        np.testing.assert_allclose(after[["fx", "fy"]], before[["fx", "fy"]], atol=1e-9)

    def test_pulses_do_negative_work(self):
        merged = pd.merge_asof(self.trace.velocity, self.trace.force, on="t")
        in_stick = merged["t"].between(2.0, 4.0, inclusive="left") | merged["t"].between(6.0, 7.5, inclusive="left")
        pulses = merged[in_stick & (merged[["vx", "vy"]] != 0.0).any(axis=1)]
        self.assertGreater(len(pulses), 1)
        power = pulses["fx"] * pulses["vx"] + pulses["fy"] * pulses["vy"]
        self.assertTrue((power < 0).all())


class TestScenarioConfig(TestCase):
    """Test scenario and config validation."""

    def test_sim_config_errors(self):
        cases = [
            ({"force_rate": 100.0, "velocity_rate": 120.0}, "force_rate"),
            ({"friction_model": "viscous"}, "friction_model"),
            ({"noise_force_std": -1.0}, "noise_force_std"),
            ({"dt_sim": 0.01}, "dt_sim"),
        ]
        for kwargs, key in cases:
            with self.assertRaises(ConfigurationError) as ctx:
                SimConfig(**kwargs)
            self.assertEqual(ctx.exception.key, key)

    def test_sim_config_from_mapping_coerces_strings(self):
        config = sim_config_from_mapping({"seed": "5", "friction_model": "ellipsoid", "noise_vel_std": "1e-4"})
        self.assertEqual(config.seed, 5)
        self.assertIs(config.friction_model, FrictionModel.ELLIPSOID)
        self.assertEqual(config.to_dict()["friction_model"], "ellipsoid")

    def test_segment_from_mapping(self):
        segment = segment_from_mapping(
            {"duration": 2, "twist": [0.01, 0, 0], "mu_s": 0.6, "mu_c": 0.4, "r": 0.01,
             "dist": "uniform:0.015", "fn": [[0, 1], [2, 3]]},
            0,
        )
        self.assertFalse(segment.is_stick)
        self.assertEqual(segment.dist, UniformDisc(0.015))
        np.testing.assert_allclose(segment.fn_at(np.array([0.0, 1.0, 5.0])), [1.0, 2.0, 3.0])

    def test_segment_errors_name_the_key(self):
        base = {"duration": 1.0, "mu_s": 0.6, "mu_c": 0.4, "r": 0.01}
        cases = [
            ({k: v for k, v in base.items() if k != "mu_c"}, "segments[2].mu_c"),
            (dict(base, colour="red"), "segments[2].colour"),
            (dict(base, duration=-1.0), "segments[2].duration"),
            (dict(base, mu_s=0.3), "segments[2].mu_s"),
            (dict(base, fn="heavy"), "segments[2].fn"),
            (dict(base, dist="cone:1"), "segments[2].dist"),
        ]
        for raw, key in cases:
            with self.assertRaises(ConfigurationError, msg=key) as ctx:
                segment_from_mapping(raw, 2)
            self.assertEqual(ctx.exception.key, key)

    def test_empty_scenario(self):
        with self.assertRaises(ConfigurationError):
            run_scenario([], SimConfig())
