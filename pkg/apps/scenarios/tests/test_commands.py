"""
Tests for the forward, gradcheck and optimize management commands.

Tests the files each command writes on small generated scenarios and the
reporting of invalid scenarios.
"""

import json
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from apps.mesh_core.mesh_io import load_msh
from apps.optimizer.history import HISTORY_COLUMNS, HISTORY_HEADER
from apps.scenarios.config import parse_config
from apps.scenarios.runners import (
    CHECK_NAME,
    CONFIG_NAME,
    DIAGNOSTICS_NAME,
    FINAL_MESH_NAME,
    HISTORY_NAME,
)
from apps.shape_gradient.checks import CHECK_HEADER

HALF_DISK = {"generator": "half_disk", "params": {"h": 0.5, "n_obstacle": 16}}
WAVE = {"kind": "gaussian", "params": {"amplitude": 0.05}}
PENALTIES_ONLY = {
    "mesh": HALF_DISK,
    "initial_condition": WAVE,
    "swe": {"c_f": 0.0},
    "objective": {"C": [0.0, 0.0, 0.0]},
    "penalties": {"nu1": 1.0, "nu2": 1.0, "nu3": 0.0},
    "time": {"T": 0.01},
}


class CommandTestCase(SimpleTestCase):
    """Temporary scenario and output directories for a command."""

    def setUp(self):
        """Set up a temporary working directory."""
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.root = Path(directory.name)
        self.out = self.root / "out"

    def scenario(self, data):
        path = self.root / "scenario.json"
        path.write_text(json.dumps(data))
        return path

    def call(self, name, data, *args):
        stdout = StringIO()
        call_command(
            name, *args, config=str(self.scenario(data)), out=str(self.out), stdout=stdout
        )
        return stdout.getvalue()


class ForwardCommandTest(CommandTestCase):
    """Test cases for the forward command."""

    def test_lake_at_rest(self):
        """Test the written files of a lake at rest in a closed basin."""
        data = {
            "mesh": {"generator": "rectangle", "params": {"nx": 4, "ny": 2, "width": 2.0}},
            "initial_condition": {"kind": "lake_at_rest"},
            "time": {"T": 0.02},
        }
        message = self.call("forward", data, "--snapshot-stride", "2")

        self.assertIn("Forward run finished", message)
        self.assertEqual(parse_config(self.out / CONFIG_NAME).output.snapshot_stride, 2)
        table = np.loadtxt(self.out / DIAGNOSTICS_NAME, delimiter=",", ndmin=2)
        self.assertGreaterEqual(len(table), 5)
        self.assertEqual(table[0, 0], 0)
        self.assertAlmostEqual(table[-1, 1], 0.02)
        self.assertLess(float(np.abs(table[:, 3]).max()), 1e-10)
        snapshots = sorted(path.name for path in self.out.glob("state_*.vtk"))
        self.assertEqual(snapshots[0], "state_00000.vtk")
        self.assertGreaterEqual(len(snapshots), 2)

    def test_no_snapshots(self):
        """Test that a zero stride writes no state files."""
        data = {"mesh": HALF_DISK, "initial_condition": WAVE, "time": {"T": 0.005}}
        self.call("forward", data, "--snapshot-stride", "0")

        self.assertTrue((self.out / DIAGNOSTICS_NAME).is_file())
        self.assertEqual(list(self.out.glob("state_*.vtk")), [])


class GradcheckCommandTest(CommandTestCase):
    """Test cases for the gradcheck command."""

    def test_penalty_terms(self):
        """Test the rows of a scenario with the mismatch switched off."""
        data = {**PENALTIES_ONLY, "gradcheck": {"count": 1}}
        message = self.call("gradcheck", data, "--seed", "3", "--threads", "2")

        self.assertIn("Gradient check finished: 4 rows", message)
        lines = (self.out / CHECK_NAME).read_text().splitlines()
        self.assertEqual(lines[0], f"# {CHECK_HEADER}")
        rows = {line.split(",")[1]: line.split(",") for line in lines[2:]}
        self.assertEqual(set(rows), {"J1", "J2", "J3", "J4"})
        self.assertEqual(float(rows["J1"][2]), 0.0)
        self.assertLess(float(rows["J2"][4]), 1e-8)
        self.assertLess(float(rows["J3"][4]), 1e-3)
        self.assertEqual(parse_config(self.out / CONFIG_NAME).seed, 3)


class OptimizeCommandTest(CommandTestCase):
    """Test cases for the optimize command."""

    def test_one_iteration(self):
        """Test the history, snapshots and final mesh of a single iteration."""
        data = {**PENALTIES_ONLY, "optimizer": {"eps_stop": 0.0}}
        message = self.call("optimize", data, "--max-iters", "1", "--snapshot-stride", "1")

        self.assertIn("after 1 iterations", message)
        lines = (self.out / HISTORY_NAME).read_text().splitlines()
        self.assertEqual(lines[0], f"# {HISTORY_HEADER}")
        self.assertEqual(lines[1], "# " + ",".join(HISTORY_COLUMNS))
        history = np.loadtxt(self.out / HISTORY_NAME, delimiter=",", ndmin=2)
        self.assertEqual(history[:, 0].tolist(), [0.0, 1.0])
        self.assertLess(history[1, 1], history[0, 1])
        self.assertTrue((self.out / "iteration_0000.vtk").is_file())

        final = load_msh(self.out / FINAL_MESH_NAME)
        start = parse_config(self.out / CONFIG_NAME).mesh.load()
        self.assertEqual(final.n_vertices, start.n_vertices)
        self.assertFalse(np.allclose(final.vertices, start.vertices))

    def test_reference_target_is_stationary(self):
        """Test that a scenario aiming at its own shore trace converges at once."""
        data = {
            **PENALTIES_ONLY,
            "objective": {"C": [1.0, 1.0, 1.0], "target": "reference"},
            "penalties": {"nu1": 0.0, "nu2": 0.0, "nu3": 0.0},
        }
        message = self.call("optimize", data)

        self.assertIn("converged after 0 iterations", message)
        history = np.loadtxt(self.out / HISTORY_NAME, delimiter=",", ndmin=2)
        self.assertEqual(history.shape, (1, len(HISTORY_COLUMNS)))
        self.assertEqual(history[0, 1], 0.0)


class CommandErrorTest(CommandTestCase):
    """Test cases for invalid scenarios."""

    def test_invalid_scenario(self):
        """Test that every problem of a scenario is reported in one error."""
        with self.assertRaises(CommandError) as context:
            self.call("forward", {"swe": {"cfl": 2.0}, "extra": 1})

        message = str(context.exception)
        for key in ("mesh", "swe.cfl", "extra"):
            self.assertIn(key, message)
        self.assertFalse(self.out.exists())

    def test_missing_scenario(self):
        """Test that an unreadable scenario file is reported."""
        with self.assertRaises(CommandError):
            call_command("optimize", config=str(self.root / "absent.json"), stdout=StringIO())

    def test_bad_override(self):
        """Test that an invalid command-line value is reported."""
        with self.assertRaises(CommandError) as context:
            self.call("gradcheck", PENALTIES_ONLY, "--threads", "0")
        self.assertIn("threads", str(context.exception))
