import math
import os
import unittest
import numpy as np
import yaml
from data.defs import SCENARIO_DIR, pipe_area
from gasmix.core.analysis.interfaces import load_sweep_config
from gasmix.core.error_handler import (
    ErrorHandler, HorizonError, MissingBoundaryError, MixtureFractionError, ScenarioSchemaError, UnknownNodeError,
)
from gasmix.core.models.profile import Constant, PiecewiseLinear, Sinusoid
from gasmix.core.scenario.boundary import BoundarySampler
from gasmix.core.scenario.parser import ScenarioParser

PIPE_DOC = """
name: test pipe
nodes:
  - {id: inlet, role: slack}
  - {id: outlet, role: withdrawal}
pipes:
  - {id: pipe, from: inlet, to: outlet, length_km: 50, diameter_m: 0.5, friction: 0.11}
boundaries:
  inlet:
    pressure_mpa: 7.0
    h2_fraction: {sinusoid: {mean: 0.02, amplitude_factor: 0.5, frequency_cyc_hr: 0.25}}
  outlet:
    outflow_flux_kg_m2_s: 120.0
controls:
  pipe: {compressor_ratio: {piecewise_linear: [[0, 1.0], [10, 1.2]]}}
simulation:
  horizon_hr: 10
  samples: 20
"""


class TestScenario(unittest.TestCase):
    """
    A class containing unit tests for scenario documents and boundary sampling.

    Methods
    -------
    test_parse_pipe_document()
        Profiles, defaults and settings are read from YAML.
    test_schema_errors()
        Malformed documents raise the matching input error.
    test_sample_boundary()
        Boundary values are sampled in SI units in graph order.
    test_sample_outside_horizon()
        Sampling outside [0, T] is rejected.
    test_serialize_round_trip()
        A serialized scenario parses back to the same hash.
    test_variants()
        Boundary and settings variants leave the original untouched.
    test_shipped_documents_parse()
        Every shipped scenario and sweep document is valid.
    """

    def setUp(self):
        self.error_handler = ErrorHandler()
        self.parser = ScenarioParser(error_handler=self.error_handler)
        self.scenario = self.parser.parse_scenario(PIPE_DOC)

    def test_parse_pipe_document(self):
        scenario = self.scenario
        self.assertEqual(scenario.name, "test pipe")
        self.assertTrue(scenario.graph.is_single_pipe)
        self.assertEqual(scenario.boundaries["inlet"].pressure_mpa, Constant(7.0))
        self.assertEqual(scenario.boundaries["inlet"].h2_fraction, Sinusoid(0.02, 0.5, 0.25))
        self.assertIsInstance(scenario.controls["pipe"].compressor_ratio, PiecewiseLinear)
        self.assertEqual(scenario.settings.solver, "fv")
        self.assertEqual(scenario.settings.samples, 20)
        self.assertAlmostEqual(scenario.gas.sigma2 / scenario.gas.sigma1, 2.8)

    def test_schema_errors(self):
        broken = {
            "unknown top-level key": (PIPE_DOC + "extra: 1\n", ScenarioSchemaError),
            "malformed yaml": ("nodes: [", ScenarioSchemaError),
            "missing section": (PIPE_DOC.replace("simulation:\n  horizon_hr: 10\n  samples: 20\n", ""),
                                ScenarioSchemaError),
            "nonpositive horizon": (PIPE_DOC.replace("horizon_hr: 10", "horizon_hr: 0"), HorizonError),
            "missing slack pressure": (PIPE_DOC.replace("    pressure_mpa: 7.0\n", ""), MissingBoundaryError),
            "unknown node": (PIPE_DOC.replace("  outlet:\n    outflow", "  ghost:\n    outflow"), UnknownNodeError),
            "fraction above one": (PIPE_DOC.replace("mean: 0.02", "mean: 0.9"), MixtureFractionError),
            "unknown solver": (PIPE_DOC.replace("samples: 20", "samples: 20\n  solver: dg"), ScenarioSchemaError),
            "role mismatch": (PIPE_DOC.replace("outflow_flux_kg_m2_s", "inflow_kg_s"), ScenarioSchemaError),
        }
        for name, (text, error) in broken.items():
            with self.subTest(name):
                with self.assertRaises(error):
                    self.parser.parse_scenario(text)
        with self.assertRaises(ScenarioSchemaError):
            self.parser.load("does/not/exist.yaml")

    def test_sample_boundary(self):
        sampler = BoundarySampler(self.scenario, error_handler=self.error_handler)
        b = sampler.sample_boundary(1.0)
        np.testing.assert_allclose(b.pressure, [7.0e6])
        np.testing.assert_allclose(b.alpha, [0.02 * (1.0 + 0.5 * math.sin(2.0 * math.pi * 0.25))])
        np.testing.assert_allclose(b.outflow, [120.0 * pipe_area(0.5)])
        self.assertEqual(b.inflow.size, 0)
        self.assertAlmostEqual(b.compressor["pipe"], 1.02)
        self.assertEqual(b.regulator, {})

    def test_sample_outside_horizon(self):
        sampler = BoundarySampler(self.scenario, error_handler=self.error_handler)
        with self.assertRaises(HorizonError):
            sampler.sample_boundary(10.5)
        with self.assertRaises(HorizonError):
            sampler.sample_boundary(-1.0)
        self.assertEqual(sampler.sample_boundary(10.0).t_hr, 10.0)

    def test_serialize_round_trip(self):
        reparsed = self.parser.parse_scenario(self.parser.serialize(self.scenario))
        self.assertEqual(self.parser.scenario_hash(reparsed), self.parser.scenario_hash(self.scenario))
        self.assertNotEqual(self.parser.scenario_hash(self.scenario),
                            self.parser.scenario_hash(self.scenario, {"sweep": "mi"}))

    def test_variants(self):
        variant = self.parser.with_boundary(self.scenario, "outlet", outflow_flux_kg_m2_s=Constant(140.0))
        variant = self.parser.with_settings(variant, horizon_hr=5.0)
        self.assertEqual(variant.boundaries["outlet"].outflow_flux_kg_m2_s, Constant(140.0))
        self.assertEqual(self.scenario.boundaries["outlet"].outflow_flux_kg_m2_s, Constant(120.0))
        self.assertEqual(variant.horizon_hr, 5.0)
        with self.assertRaises(UnknownNodeError):
            self.parser.with_boundary(self.scenario, "ghost", inflow_kg_s=Constant(1.0))

    def test_shipped_documents_parse(self):
        names = sorted(name for name in os.listdir(SCENARIO_DIR) if name.endswith(".yaml"))
        self.assertEqual(len(names), 18)
        sweeps = []
        for name in names:
            path = os.path.join(SCENARIO_DIR, name)
            with open(path, "r", encoding="utf-8") as handle:
                is_sweep = "kind" in yaml.safe_load(handle)
            with self.subTest(name):
                if is_sweep:
                    config = load_sweep_config(path)
                    self.assertTrue(os.path.isfile(config.template_path))
                    sweeps.append(config.kind)
                else:
                    self.assertGreater(self.parser.load(path).horizon_hr, 0)
        self.assertEqual(sorted(sweeps), ["ci", "mi", "mi", "pi"])


if __name__ == "__main__":
    unittest.main()
