import json
import os
import tempfile
import unittest
from unittest.mock import patch
import pandas as pd
from data.defs import CACHE_DIR_ENV, CACHE_FILE_NAME, SCENARIO_DIR
from gasmix.cli.app import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, MANIFEST_FILE, main
from gasmix.core.models.sweep_point import STATUS_OK, SweepPoint

PIPE_DOC = """
nodes:
  - {{id: inlet, role: slack}}
  - {{id: outlet, role: withdrawal}}
pipes:
  - {{id: pipe, from: inlet, to: outlet, length_km: 50, diameter_m: 0.5, friction: 0.11}}
boundaries:
  inlet: {{pressure_mpa: 7.0, h2_fraction: 0.02}}
  outlet: {{outflow_flux_kg_m2_s: {flux}}}
simulation:
  horizon_hr: 1
  samples: 4
  refinement_km: 5.0
"""


def pi_point(template, config, omega, kappa, scenario_hash):
    return SweepPoint(config.kind, scenario_hash, omega, kappa, STATUS_OK, kappa * 10.0)


class TestCommandLine(unittest.TestCase):
    """
    A class containing unit tests for the gasmix command.

    Methods
    -------
    test_malformed_scenario()
        Input errors exit with code 2 and write nothing.
    test_steady()
        The steady command writes its table and a manifest.
    test_simulate()
        The simulate command writes the requested columns.
    test_spectral_network()
        Asking for the spectral solver on a network is an input error.
    test_infeasible_demand()
        Numerical failures exit with code 1.
    test_interface()
        The interface command writes the curve, the points and fills the cache; --config is an alias of --scenario.
    test_usage_errors()
        Argument errors exit with code 2 instead of raising.
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = os.path.join(self.tmp.name, "out")

    def tearDown(self):
        self.tmp.cleanup()

    def _scenario(self, flux=120.0):
        path = os.path.join(self.tmp.name, "pipe.yaml")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(PIPE_DOC.format(flux=flux))
        return path

    def _manifest(self):
        with open(os.path.join(self.out, MANIFEST_FILE), "r", encoding="utf-8") as handle:
            return json.load(handle)

    def test_malformed_scenario(self):
        path = os.path.join(self.tmp.name, "broken.yaml")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("nodes: [")
        self.assertEqual(main(["steady", "--scenario", path, "--out", self.out]), EXIT_INPUT)
        self.assertEqual(main(["steady", "--out", self.out]), EXIT_INPUT)
        self.assertEqual(main(["pair", "--scenario", self._scenario(), "--out", self.out]), EXIT_INPUT)
        self.assertFalse(os.path.exists(os.path.join(self.out, MANIFEST_FILE)))

    def test_steady(self):
        self.assertEqual(main(["steady", "--scenario", self._scenario(), "--out", self.out]), EXIT_OK)
        table = pd.read_csv(os.path.join(self.out, "steady.csv"))
        self.assertEqual(list(table["node"]), ["inlet", "outlet"])
        manifest = self._manifest()
        self.assertEqual(manifest["command"], "steady")
        self.assertEqual(len(manifest["scenario_hash"]), 64)
        self.assertEqual(manifest["solver_settings"]["solver"], "fv")
        self.assertEqual([os.path.basename(p) for p in manifest["outputs"]], ["steady.csv"])

    def test_simulate(self):
        code = main(["simulate", "--scenario", self._scenario(), "--out", self.out,
                     "--quantities", "p_mpa,eta2", "--nodes", "outlet"])
        self.assertEqual(code, EXIT_OK)
        series = pd.read_csv(os.path.join(self.out, "series.csv"))
        self.assertEqual(list(series.columns), ["t_hr", "outlet.p_mpa", "outlet.eta2"])
        self.assertEqual(len(series), 5)
        self.assertIn("max_density_jump", self._manifest()["diagnostics"])

    def test_spectral_network(self):
        network = os.path.join(SCENARIO_DIR, "blended_5mpa_a.yaml")
        code = main(["steady", "--scenario", network, "--solver", "spectral", "--out", self.out])
        self.assertEqual(code, EXIT_INPUT)

    def test_infeasible_demand(self):
        code = main(["steady", "--scenario", self._scenario(flux=400.0), "--out", self.out])
        self.assertEqual(code, EXIT_NUMERICAL)

    def test_interface(self):
        sweep = os.path.join(self.tmp.name, "pi.yaml")
        with open(sweep, "w", encoding="utf-8") as handle:
            handle.write("kind: pi\ntemplate: pipe.yaml\noutflow_fluxes_kg_m2_s: [75.0]\n"
                         "grid: {omega: [0.0, 1.0, 3], kappa: [0.0, 1.0, 5]}\nthreshold: 3.0\n")
        self._scenario()
        cache = os.path.join(self.tmp.name, "cache")
        with patch.dict(os.environ, {CACHE_DIR_ENV: cache}), \
                patch("gasmix.core.analysis.interfaces.evaluate_point", side_effect=pi_point):
            code = main(["interface", "--scenario", sweep, "--out", self.out])
            alias = main(["interface", "--config", sweep, "--out", os.path.join(self.tmp.name, "alias")])
        self.assertEqual(alias, EXIT_OK)
        self.assertEqual(code, EXIT_OK)
        curve = pd.read_csv(os.path.join(self.out, "interface_pi.csv"))
        self.assertEqual(list(curve["kappa_star"]), [0.5, 0.5, 0.5])
        self.assertTrue(os.path.isfile(os.path.join(self.out, "points_pi.csv")))
        self.assertTrue(os.path.isfile(os.path.join(cache, CACHE_FILE_NAME)))
        self.assertEqual(self._manifest()["diagnostics"], {"points": 9, "invalid_points": 0})
        self.assertEqual(main(["interface", "--out", self.out]), EXIT_INPUT)

    def test_usage_errors(self):
        with patch("sys.stderr"), patch("sys.stdout"):
            self.assertEqual(main(["bogus"]), EXIT_INPUT)
            self.assertEqual(main(["steady", "--unknown", "1"]), EXIT_INPUT)
            self.assertEqual(main(["--help"]), EXIT_OK)


if __name__ == "__main__":
    unittest.main()
