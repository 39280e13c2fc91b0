"""Test CSV tables, manifests and figures."""

import math
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np
import yaml

from toricqfi import __version__
from toricqfi.formatting import format_display, format_value, parse_value
from toricqfi.output import (
    MANIFEST_NAME,
    RunHeader,
    build_manifest,
    manifest_digest,
    read_table,
    write_line_plot,
    write_manifest,
    write_table,
)


class TestFormatting(unittest.TestCase):
    """Test cell formatting."""

    def test_format_value(self):
        """Floats keep 17 digits, ints and bools are plain."""
        self.assertEqual(format_value(0.1), "0.10000000000000001")
        self.assertEqual(format_value(np.int64(3)), "3")
        self.assertEqual(format_value(True), "true")
        self.assertEqual(format_value(math.nan), "nan")
        self.assertEqual(format_value("saturated"), "saturated")

    def test_integral_floats_keep_decimal_point(self):
        """1.0 is written as 1.0, not 1."""
        self.assertEqual(format_value(1.0), "1.0")
        self.assertEqual(format_value(np.float64(-40.0)), "-40.0")
        self.assertEqual(format_value(1e20), "1e+20")
        self.assertEqual(format_value(math.inf), "inf")
        self.assertIsInstance(parse_value(format_value(2.0)), float)

    def test_parse_value(self):
        """Numbers parse back to int or float, anything else stays text."""
        self.assertEqual(parse_value("3"), 3)
        self.assertEqual(parse_value(format_value(1 / 3)), 1 / 3)
        self.assertEqual(parse_value("power-law"), "power-law")

    def test_format_display(self):
        """nan and None show as a dash."""
        self.assertEqual(format_display(math.nan), "-")
        self.assertEqual(format_display(None), "-")
        self.assertEqual(format_display(0.123456789), "0.123457")


class TestTables(unittest.TestCase):
    """Test writing and reading run tables."""

    def setUp(self):
        """Create a temporary output directory."""
        self.temp_dir = Path(tempfile.mkdtemp())
        self.manifest = build_manifest({"experiment": "ground", "seed": 3}, {"n_sites": 40})
        self.header = write_manifest(self.temp_dir, self.manifest)

    def tearDown(self):
        """Remove the temporary output directory."""
        shutil.rmtree(self.temp_dir)

    def test_manifest(self):
        """The manifest holds version, configuration and extras."""
        with open(self.temp_dir / MANIFEST_NAME) as f:
            stored = yaml.safe_load(f)
        self.assertEqual(stored, {"version": __version__, "experiment": "ground", "seed": 3, "n_sites": 40})
        self.assertEqual(self.header.manifest_sha256, manifest_digest(stored))

    def test_digest_ignores_key_order(self):
        """Digests use the canonical key order."""
        self.assertEqual(manifest_digest({"a": 1, "b": 2}), manifest_digest({"b": 2, "a": 1}))
        self.assertNotEqual(manifest_digest({"a": 1}), manifest_digest({"a": 2}))

    def test_header_lines(self):
        """Three provenance lines."""
        lines = RunHeader("ground", "abc", "9.9").lines()
        self.assertEqual(lines, ["# toricqfi 9.9", "# experiment: ground", "# manifest_sha256: abc"])

    def test_values_survive_exactly(self):
        """Written floats read back bit for bit."""
        values = [1 / 3, 0.7577923643, 1e-300, 2.0**-40]
        path = write_table(
            self.temp_dir / "wd.csv", self.header, ["D", "w_D"], [[d, v] for d, v in enumerate(values, 1)]
        )
        header, columns = read_table(path)
        self.assertEqual(header["version"], __version__)
        self.assertEqual(header["experiment"], "ground")
        self.assertEqual(header["manifest_sha256"], self.header.manifest_sha256)
        np.testing.assert_array_equal(columns["D"], [1, 2, 3, 4])
        np.testing.assert_array_equal(columns["w_D"], values)

    def test_text_columns(self):
        """Status markers stay text."""
        path = write_table(self.temp_dir / "fit.csv", self.header, ["beta", "status"], [[0.0, "saturated"]])
        _, columns = read_table(path)
        self.assertEqual(columns["status"].tolist(), ["saturated"])

    def test_float_columns_stay_float(self):
        """A column of integral floats reads back as a float array."""
        path = write_table(self.temp_dir / "fq.csv", self.header, ["L", "f_Q"], [[1, 1.0], [2, 2.0]])
        _, columns = read_table(path)
        self.assertEqual(columns["f_Q"].dtype.kind, "f")
        self.assertEqual(columns["L"].dtype.kind, "i")

    def test_row_width_checked(self):
        """Rows must match the column count."""
        with self.assertRaises(ValueError):
            write_table(self.temp_dir / "bad.csv", self.header, ["a", "b"], [[1]])

    def test_rewrite_is_identical(self):
        """Same rows give the same bytes."""
        rows = [[0.5, 1, 0.1], [1.5, 2, 0.2]]
        first = write_table(self.temp_dir / "a.csv", self.header, ["x", "y", "z"], rows).read_bytes()
        second = write_table(self.temp_dir / "b.csv", self.header, ["x", "y", "z"], rows).read_bytes()
        self.assertEqual(first, second)


class TestPlots(unittest.TestCase):
    """Test SVG figures."""

    def setUp(self):
        """Create a temporary output directory."""
        self.temp_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        """Remove the temporary output directory."""
        shutil.rmtree(self.temp_dir)

    def test_svg_is_reproducible(self):
        """Two renders of one chart are byte-identical SVG."""
        series = [("a", [1, 2, 3], [1.0, 0.5, 0.25]), ("b", [1, 2, 3], [1.0, 0.9, 0.8])]
        first = write_line_plot(self.temp_dir / "a.svg", series, "D", "w_D", log_y=True)
        second = write_line_plot(self.temp_dir / "b.svg", series, "D", "w_D", log_y=True)
        self.assertTrue(first.read_text().lstrip().startswith("<?xml"))
        self.assertEqual(first.read_bytes(), second.read_bytes())
