import os
import unittest
import networkx as nx
import numpy as np
from data.defs import SCENARIO_DIR, SLOW_TESTS_ENV
from gasmix.core.error_handler import (
    ErrorHandler, IntegrationError, NonPositiveDensityError, SolverSelectionError, UnknownNodeError, ValidationError,
)
from gasmix.core.scenario.parser import ScenarioParser
from gasmix.core.timeint.integrator import Integrator, IntegratorConfig
from gasmix.core.timeint.simulation import STEADY_COLUMNS, Simulator, simulate_pair

PIPE_DOC = """
nodes:
  - {{id: inlet, role: slack}}
  - {{id: outlet, role: withdrawal}}
pipes:
  - {{id: pipe, from: inlet, to: outlet, length_km: 50, diameter_m: 0.5, friction: 0.11}}
boundaries:
  inlet: {{pressure_mpa: 7.0, h2_fraction: 0.02}}
  outlet: {{outflow_flux_kg_m2_s: 120.0}}
simulation:
  horizon_hr: 2
  samples: 4
  solver: {solver}
  refinement_km: 5.0
  spectral_order: 16
"""

SINE_DOC = """
nodes:
  - {{id: inlet, role: slack}}
  - {{id: outlet, role: withdrawal}}
pipes:
  - {{id: pipe, from: inlet, to: outlet, length_km: 50, diameter_m: 0.5, friction: 0.11}}
boundaries:
  inlet:
    pressure_mpa: 7.0
    h2_fraction: {{sinusoid: {{mean: 0.2, amplitude_factor: 0.3, frequency_cyc_hr: 0.05}}}}
  outlet: {{outflow_flux_kg_m2_s: 75.0}}
simulation:
  horizon_hr: {horizon}
  samples: {samples}
  solver: {solver}
  refinement_km: 0.25
  spectral_order: {order}
  rtol: {rtol}
  atol: 1.0e-9
"""


class TestIntegrator(unittest.TestCase):
    """
    A class containing unit tests for the time integrator.

    Methods
    -------
    test_exponential_decay()
        Adaptive and fixed-step methods reproduce exp(-t).
    test_output_grid()
        The grid has N + 1 samples and ends exactly at T.
    test_unknown_method()
        Unknown methods and empty grids are rejected.
    test_failure_reports_time()
        A failing right-hand side is reported with the time it failed at.
    """

    @staticmethod
    def decay(t, y):
        # one e-folding per hour, t in seconds
        return -y / 3600.0

    def test_exponential_decay(self):
        configs = [
            IntegratorConfig(method="BDF", samples=10, rtol=1e-9, atol=1e-12),
            IntegratorConfig(method="LSODA", samples=10, rtol=1e-9, atol=1e-12),
            IntegratorConfig(method="RK4", samples=100),
        ]
        for config in configs:
            with self.subTest(config.method):
                t_hr, y = Integrator(config).integrate(self.decay, np.array([1.0, 2.0]), 2.0)
                np.testing.assert_allclose(y[:, 0], np.exp(-t_hr), rtol=1e-6)
                np.testing.assert_allclose(y[:, 1], 2.0 * np.exp(-t_hr), rtol=1e-6)

    def test_output_grid(self):
        integrator = Integrator(IntegratorConfig(samples=7))
        t_hr = integrator.output_grid_hr(3.3)
        self.assertEqual(t_hr.size, 8)
        self.assertEqual(t_hr[0], 0.0)
        self.assertEqual(t_hr[-1], 3.3)
        with self.assertRaises(ValidationError):
            integrator.integrate(self.decay, np.ones(1), 0.0)

    def test_unknown_method(self):
        with self.assertRaises(SolverSelectionError):
            Integrator(IntegratorConfig(method="Euler"))
        with self.assertRaises(ValidationError):
            Integrator(IntegratorConfig(samples=0))

    def test_failure_reports_time(self):
        def failing(t, y):
            if t >= 1800.0:
                raise NonPositiveDensityError("density vanished", index=0)
            return -y

        with self.assertRaises(IntegrationError) as caught:
            Integrator(IntegratorConfig(method="RK4", samples=4)).integrate(failing, np.ones(1), 1.0)
        self.assertAlmostEqual(caught.exception.t_hr, 0.5)


class TestSimulator(unittest.TestCase):
    """
    A class containing unit tests for scenario simulation.

    Methods
    -------
    test_constant_boundaries_stay_steady()
        Both solvers keep a steady pipe at rest for 100 hours.
    test_solvers_agree()
        Finite-volume and spectral steady outlets agree for a fine refinement.
    test_spectral_convergence()
        Outlet pressures converge rapidly as the collocation order doubles.
    test_solvers_agree_in_transient()
        Finite-volume and spectral outlets agree under slow concentration forcing (slow).
    test_requested_columns()
        Requested nodes and quantities become columns; unknown ones are rejected.
    test_steady_table()
        The steady table has one row per physical node.
    test_spectral_needs_single_pipe()
        The spectral solver refuses networks.
    test_case_study_pairs()
        Case-study pairs keep pressure and energy ordered while composition and density cross (slow).
    """

    def setUp(self):
        self.error_handler = ErrorHandler()
        self.parser = ScenarioParser(error_handler=self.error_handler)

    def _scenario(self, solver="fv"):
        return self.parser.parse_scenario(PIPE_DOC.format(solver=solver))

    def _sine(self, solver="fv", order=60, horizon=20.0, samples=20, rtol=1e-6):
        return self.parser.parse_scenario(SINE_DOC.format(solver=solver, order=order, horizon=horizon,
                                                          samples=samples, rtol=f"{rtol:.1e}"))

    def _outlet_pressure(self, scenario):
        return Simulator(scenario, error_handler=self.error_handler).run(["p_mpa"], ["outlet"]).column("outlet", "p_mpa")

    def test_constant_boundaries_stay_steady(self):
        for solver in ("fv", "spectral"):
            with self.subTest(solver):
                scenario = self.parser.with_settings(self._scenario(solver), horizon_hr=100.0)
                series = Simulator(scenario, error_handler=self.error_handler).run(["p_mpa", "eta2"])
                self.assertEqual(series.t_hr.size, 5)
                self.assertAlmostEqual(series.t_hr[-1], 100.0)
                p = series.column("outlet", "p_mpa")
                np.testing.assert_allclose(p, p[0], rtol=1e-5)
                np.testing.assert_allclose(series.column("outlet", "eta2"), 0.02, rtol=1e-5)

    def test_spectral_convergence(self):
        reference = self._outlet_pressure(self._sine("spectral", order=48, rtol=1e-9))
        errors = [np.max(np.abs(self._outlet_pressure(self._sine("spectral", order=order, rtol=1e-9)) - reference))
                  / np.mean(reference) for order in (8, 16, 32)]
        floor = 1e-6
        for coarse, fine in zip(errors, errors[1:]):
            self.assertLess(fine, max(coarse / 10.0, floor))

    def test_solvers_agree(self):
        fv = self.parser.with_settings(self._scenario("fv"), refinement_km=0.25)
        fv_table = Simulator(fv, error_handler=self.error_handler).steady_table()
        spectral_table = Simulator(self._scenario("spectral"), error_handler=self.error_handler).steady_table()
        self.assertAlmostEqual(fv_table["p_mpa"].iloc[1], spectral_table["p_mpa"].iloc[1],
                               delta=2e-3 * spectral_table["p_mpa"].iloc[1])

    def test_requested_columns(self):
        simulator = Simulator(self._scenario(), error_handler=self.error_handler)
        series = simulator.run(["rho2", "energy_gj_s"], ["inlet", "outlet"])
        self.assertEqual(series.columns, ["inlet.rho2", "inlet.energy_gj_s", "outlet.rho2", "outlet.energy_gj_s"])
        self.assertTrue(np.all(np.isnan(series.column("inlet", "energy_gj_s"))))
        self.assertIn("max_density_jump", series.diagnostics)
        self.assertEqual(simulator.default_nodes(), ["outlet"])
        with self.assertRaises(ValidationError):
            simulator.run(["temperature"])
        with self.assertRaises(UnknownNodeError):
            simulator.run(["p_mpa"], ["ghost"])

    def test_steady_table(self):
        table = Simulator(self._scenario(), error_handler=self.error_handler).steady_table()
        self.assertEqual(list(table.columns), STEADY_COLUMNS)
        self.assertEqual(list(table["node"]), ["inlet", "outlet"])
        self.assertAlmostEqual(table["p_mpa"].iloc[0], 7.0)
        self.assertLess(table["p_mpa"].iloc[1], 7.0)

    def test_spectral_needs_single_pipe(self):
        network = self.parser.load(os.path.join(SCENARIO_DIR, "blended_5mpa_a.yaml"))
        with self.assertRaises(SolverSelectionError):
            Simulator(self.parser.with_settings(network, solver="spectral"), error_handler=self.error_handler)

    @unittest.skipUnless(os.environ.get(SLOW_TESTS_ENV) == "1", f"set {SLOW_TESTS_ENV}=1 to run")
    def test_solvers_agree_in_transient(self):
        fv = self._outlet_pressure(self._sine("fv", horizon=100.0, samples=200))
        spectral = self._outlet_pressure(self._sine("spectral", horizon=100.0, samples=200))
        self.assertLessEqual(np.max(np.abs(fv - spectral)) / np.max(np.abs(spectral)), 5e-3)

    @unittest.skipUnless(os.environ.get(SLOW_TESTS_ENV) == "1", f"set {SLOW_TESTS_ENV}=1 to run")
    def test_case_study_pairs(self):
        reports = {}
        for name in ("blended_5mpa", "blended_10mpa"):
            with self.subTest(name):
                a = self.parser.load(os.path.join(SCENARIO_DIR, f"{name}_a.yaml"))
                b = self.parser.load(os.path.join(SCENARIO_DIR, f"{name}_b.yaml"))
                series_a, series_b, report = simulate_pair(a, b, error_handler=self.error_handler)
                self.assertEqual(series_a.t_hr.size, a.settings.samples + 1)
                self.assertEqual(set(report.tolerances), set(series_a.columns))
                # the larger withdrawal starts from the lower pressure
                self.assertGreater(series_a.column("cyan", "p_mpa")[0], series_b.column("cyan", "p_mpa")[0])
                # pressure and energy keep the input order at both slack pressures
                self.assertFalse(report.quantity_crossed("p_mpa"))
                self.assertFalse(report.quantity_crossed("energy_gj_s"))
                reports[name] = (report, Simulator(a, error_handler=self.error_handler).default_nodes())

        low, _ = reports["blended_5mpa"]
        self.assertTrue(low.quantity_crossed("eta2"))
        self.assertTrue(low.quantity_crossed("nu2"))
        self.assertFalse(low.quantity_crossed("rho"))
        high, nodes = reports["blended_10mpa"]
        self.assertEqual(high.nodes_crossing("rho"), set(nodes))

def ordered_tree_pair(seed, nodes=8):
    """
    Two homogeneous scenarios on one random tree whose inputs are ordered.

    The second scenario has the higher slack pressure, the larger injection
    and the smaller withdrawals at every instant, so its pressures should
    stay above those of the first.
    """
    rng = np.random.default_rng(seed)
    tree = nx.from_prufer_sequence(rng.integers(0, nodes, nodes - 2).tolist())
    ids = [f"n{i}" for i in range(nodes)]
    # an inner node so its subtree withdrawals keep the feeding pipe forward
    inner = [i for i in range(1, nodes) if tree.degree(i) > 1]
    injection = int(rng.choice(inner)) if inner else None
    pipes = [{"id": f"{ids[u]}-{ids[v]}", "from": ids[u], "to": ids[v], "length_km": float(rng.uniform(2.0, 6.0)),
              "diameter_m": 0.9, "friction": 0.01} for u, v in nx.bfs_edges(tree, 0)]
    roles = ["slack"] + ["injection" if i == injection else "withdrawal" for i in range(1, nodes)]

    pressure = rng.uniform(4.0, 6.0)
    gaps = {"pressure": rng.uniform(0.05, 0.5), "inflow": rng.uniform(0.02, 0.1),
            "outflow": rng.uniform(0.5, 0.9, nodes)}
    frequency = rng.uniform(0.1, 1.0)
    outflows = rng.uniform(2.0, 10.0, nodes)
    inflow = rng.uniform(0.05, 0.1)

    def wave(mean, factor):
        return {"sinusoid": {"mean": float(mean), "amplitude_factor": factor, "frequency_cyc_hr": float(frequency)}}

    documents = []
    for second in (False, True):
        boundaries = {ids[0]: {"pressure_mpa": wave(pressure + second * gaps["pressure"], 0.02), "h2_fraction": 0.05}}
        for i in range(1, nodes):
            if i == injection:
                boundaries[ids[i]] = {"inflow_kg_s": wave(inflow + second * gaps["inflow"], 0.5), "h2_fraction": 0.05}
            else:
                scale = gaps["outflow"][i] if second else 1.0
                boundaries[ids[i]] = {"outflow_kg_s": wave(outflows[i] * scale, 0.5)}
        documents.append({
            "nodes": [{"id": ids[i], "role": roles[i]} for i in range(nodes)],
            "pipes": pipes,
            "boundaries": boundaries,
            "simulation": {"horizon_hr": 6.0, "samples": 24, "refinement_km": 2.0, "rtol": 1.0e-8, "atol": 1.0e-10},
        })
    return documents


class TestOrderedInputs(unittest.TestCase):
    """
    A class containing property tests for homogeneous mixtures on trees.

    Methods
    -------
    test_ordered_inputs_give_ordered_pressures()
        Ordered boundary inputs keep every nodal pressure ordered.
    test_ordered_inputs_on_many_trees()
        The same property on fifty random trees (slow).
    """

    def setUp(self):
        self.error_handler = ErrorHandler()
        self.parser = ScenarioParser(error_handler=self.error_handler)

    def _check_ordered(self, seed):
        low, high = (self.parser.from_dict(document) for document in ordered_tree_pair(seed))
        p_low = Simulator(low, error_handler=self.error_handler).run(["p_mpa"]).frame.to_numpy(dtype=float)
        p_high = Simulator(high, error_handler=self.error_handler).run(["p_mpa"]).frame.to_numpy(dtype=float)
        self.assertEqual(p_low.shape, p_high.shape)
        self.assertTrue(np.all(p_low <= p_high + 1e-6 * np.max(p_high)), f"order lost for seed {seed}")

    def test_ordered_inputs_give_ordered_pressures(self):
        for seed in range(3):
            with self.subTest(seed=seed):
                self._check_ordered(seed)

    @unittest.skipUnless(os.environ.get(SLOW_TESTS_ENV) == "1", f"set {SLOW_TESTS_ENV}=1 to run")
    def test_ordered_inputs_on_many_trees(self):
        for seed in range(50):
            with self.subTest(seed=seed):
                self._check_ordered(seed)



if __name__ == "__main__":
    unittest.main()
