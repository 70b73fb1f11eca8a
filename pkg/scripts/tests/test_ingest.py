"""
Tests for trace file I/O and stream alignment.
"""
import tempfile
from pathlib import Path
from unittest import TestCase

import numpy as np
import pandas as pd

from scripts.exceptions import (
    AlignmentError,
    ConfigurationError,
    TraceOrderingError,
    TraceSchemaError,
    TraceValueError,
)
from scripts.ingest import (
    RawStreams,
    align,
    load_trace,
    parse_trace,
    read_events,
    read_truth,
    trace_paths,
    write_trace,
)
from scripts.simulator import SimConfig, SimTrace, make_paper_like_scenario, run_scenario

VELOCITY_HEADER = "t,vx,vy,omega\n"
FORCE_HEADER = "t,fx,fy,fn,tau\n"


class IngestTestCase(TestCase):
    """Temporary directory with helpers for writing small trace files."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, name, text):
        path = self.dir / name
        path.write_text(text)
        return path

    def valid_velocity(self):
        return self.write("ok_vel.csv", VELOCITY_HEADER + "0,0.01,0,0\n0.1,0.01,0,0\n")

    def valid_force(self):
        return self.write("ok_force.csv", FORCE_HEADER + "0,-1,0,2,0\n0.1,-1,0,2,0\n")


class TestTraceFiles(IngestTestCase):
    """Test reading and writing trace sets."""

    def test_simulated_trace_round_trips(self):
        trace = run_scenario(make_paper_like_scenario(), SimConfig(noise_force_std=0.01, noise_vel_std=1e-4, seed=3))
        first = write_trace(trace, self.dir / "a")

        raw = load_trace(self.dir / "a")
        reread = SimTrace(
            force=raw.force,
            velocity=raw.velocity,
            events=read_events(first["events"]),
            truth=read_truth(first["truth"]),
        )
        second = write_trace(reread, self.dir / "b")
        for name in first:
            self.assertEqual(first[name].read_bytes(), second[name].read_bytes(), name)

    def test_trace_paths(self):
        paths = trace_paths("out/trial_000")
        self.assertEqual(paths["force"], Path("out/trial_000_force.csv"))
        self.assertEqual(paths["velocity"], Path("out/trial_000_vel.csv"))

    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            parse_trace(self.dir / "nope_force.csv", self.valid_velocity())

    def test_shuffled_rows(self):
        force = self.write("f.csv", FORCE_HEADER + "0,0,0,2,0\n0.002,0,0,2,0\n0.001,0,0,2,0\n0.003,0,0,2,0\n")
        with self.assertRaises(TraceOrderingError) as ctx:
            parse_trace(force, self.valid_velocity())
        self.assertEqual(ctx.exception.row, 2)
        self.assertEqual(ctx.exception.path, str(force))

    def test_empty_velocity_file(self):
        with self.assertRaises(TraceSchemaError):
            parse_trace(self.valid_force(), self.write("v.csv", ""))
        with self.assertRaises(TraceSchemaError):
            parse_trace(self.valid_force(), self.write("v2.csv", VELOCITY_HEADER))

    def test_missing_column(self):
        velocity = self.write("v.csv", "t,vx,vy\n0,0,0\n")
        with self.assertRaises(TraceSchemaError) as ctx:
            parse_trace(self.valid_force(), velocity)
        self.assertEqual(ctx.exception.column, "omega")

    def test_invalid_values_are_located(self):
        for text, row, column in [
            (FORCE_HEADER + "0,0,0,2,0\n0.001,0,0,nan,0\n", 1, "fn"),
            (FORCE_HEADER + "0,0,0,2,0\n0.001,0,0,2,0\n0.002,abc,0,2,0\n", 2, "fx"),
            (FORCE_HEADER + "0,0,0,2,inf\n", 0, "tau"),
        ]:
            with self.assertRaises(TraceValueError) as ctx:
                parse_trace(self.write("f.csv", text), self.valid_velocity())
            self.assertEqual((ctx.exception.row, ctx.exception.column), (row, column))

    def test_invalid_event_kind(self):
        events = self.write("e.csv", "t,kind\n0.1,SlipOnset\n0.2,Slide\n")
        with self.assertRaises(TraceValueError) as ctx:
            read_events(events)
        self.assertEqual(ctx.exception.row, 1)


class TestAlign(TestCase):
    """Test force/velocity alignment."""

    def streams(self, force_t, velocity_t, fx=None):
        force_t = np.asarray(force_t, dtype=float)
        velocity_t = np.asarray(velocity_t, dtype=float)
        force = pd.DataFrame({
            "t": force_t,
            "fx": np.arange(force_t.size, dtype=float) if fx is None else fx,
            "fy": 0.0, "fn": 2.0, "tau": 0.0,
        })
        velocity = pd.DataFrame({"t": velocity_t, "vx": 0.01, "vy": 0.0, "omega": 0.0})
        return RawStreams(force=force, velocity=velocity)

    def test_nearest_past_force_sample(self):
        raw = self.streams([0.0995, 0.1002], [0.100], fx=[7.0, 9.0])
        (meas,) = align(raw)
        self.assertEqual(meas.t, 0.100)
        self.assertEqual(meas.f_x, 7.0)

    def test_identical_timestamps_pair_up(self):
        t = [0.0, 0.1, 0.2]
        measurements = align(self.streams(t, t), delta_t=0.1)
        self.assertEqual([m.f_x for m in measurements], [0.0, 1.0, 2.0])
        self.assertEqual([m.t for m in measurements], t)

    def test_late_force_stream_drops_velocity_ticks(self):
        velocity_t = np.arange(240) / 120.0
        force_t = 0.5 + np.arange(2000) / 1000.0
        with self.assertLogs("scripts.ingest", level="INFO") as logs:
            measurements = align(self.streams(force_t, velocity_t))
        self.assertEqual(len(measurements), 240 - 60)
        self.assertEqual(measurements[0].t, 0.5)
        self.assertTrue(any("Dropped 60" in line for line in logs.output))

    def test_no_overlap(self):
        with self.assertRaises(AlignmentError):
            align(self.streams([0.0, 0.1], [0.5, 0.6]))

    def test_linear_interpolation(self):
        raw = self.streams([0.0, 0.01], [0.005], fx=[0.0, 1.0])
        self.assertAlmostEqual(align(raw, method="linear")[0].f_x, 0.5, places=12)
        self.assertEqual(align(raw, method="zoh")[0].f_x, 0.0)
        with self.assertRaises(ConfigurationError):
            align(raw, method="cubic")

    def test_spacing_mismatch_warns(self):
        with self.assertLogs("scripts.ingest", level="WARNING"):
            align(self.streams(np.arange(200) / 1000.0, np.arange(20) / 100.0))
