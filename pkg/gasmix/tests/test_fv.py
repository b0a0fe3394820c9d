import math
import os
import unittest
import numpy as np
from data.defs import SCENARIO_DIR
from gasmix.core.analysis.jacobian import JacobianInspector
from gasmix.core.error_handler import (
    ErrorHandler, HeterogeneousMixtureError, InfeasibleDemandError, NonPositiveDensityError,
)
from gasmix.core.fv.steady_state import SteadyStateSolver
from gasmix.core.fv.system import FiniteVolumeSystem
from gasmix.core.network.builder import NetworkBuilder
from gasmix.core.scenario.boundary import BoundarySampler
from gasmix.core.scenario.parser import ScenarioParser

PIPE_DOC = """
nodes:
  - {{id: inlet, role: slack}}
  - {{id: outlet, role: withdrawal}}
pipes:
  - {{id: pipe, from: inlet, to: outlet, length_km: 50, diameter_m: 0.5, friction: 0.11}}
boundaries:
  inlet: {{pressure_mpa: 7.0, h2_fraction: {alpha}}}
  outlet: {{outflow_flux_kg_m2_s: {flux}}}
simulation:
  horizon_hr: 1
  refinement_km: {refinement}
"""

TREE_DOC = """
nodes:
  - {id: s, role: slack}
  - {id: a, role: withdrawal}
  - {id: q, role: injection}
  - {id: b, role: withdrawal}
  - {id: c, role: withdrawal}
pipes:
  - {id: s-a, from: s, to: a, length_km: 4, diameter_m: 0.6, friction: 0.01, compressor_ratio: 1.1}
  - {id: a-q, from: a, to: q, length_km: 3, diameter_m: 0.5, friction: 0.012}
  - {id: q-b, from: q, to: b, length_km: 5, diameter_m: 0.5, friction: 0.012, regulator_ratio: 1.05}
  - {id: a-c, from: a, to: c, length_km: 2, diameter_m: 0.4, friction: 0.015}
boundaries:
  s: {pressure_mpa: 6.0, h2_fraction: 0.05}
  a: {outflow_kg_s: 20.0}
  q: {inflow_kg_s: 5.0, h2_fraction: 0.5}
  b: {outflow_kg_s: 30.0}
  c: {outflow_kg_s: 15.0}
simulation:
  horizon_hr: 1
  refinement_km: 1.0
"""


class TestFiniteVolume(unittest.TestCase):
    """
    A class containing unit tests for the finite-volume network system and its steady state.

    Methods
    -------
    test_flux_closure()
        The flux follows the signed square-root law and rejects empty edges.
    test_single_pipe_steady_state()
        The steady state satisfies the per-segment law and approaches the pipe law.
    test_tree_steady_state()
        The graph-walk guess is the steady state of a tree with injection and controls.
    test_looped_steady_state()
        The case-study network reaches a steady state with balanced nodes.
    test_equivalent_forms()
        Partial-density, pressure-density and isolated-pressure forms agree.
    test_isolated_pressure_needs_homogeneous_mixture()
        Varying compositions are rejected for the isolated-pressure form.
    test_isolated_pressure_jacobian_is_metzler()
        The homogeneous pressure Jacobian has nonnegative off-diagonal entries.
    test_pressure_density_jacobian_is_not_metzler()
        Pressure rates fall with upstream density in the mixed system.
    test_infeasible_demand()
        A withdrawal beyond the pipe capacity is reported.
    test_jacobian_sparsity()
        The sparsity pattern covers the finite-difference Jacobian.
    """

    def setUp(self):
        self.error_handler = ErrorHandler()
        self.builder = NetworkBuilder(self.error_handler)
        self.parser = ScenarioParser(self.builder, self.error_handler)

    def _system(self, scenario):
        graph = self.builder.refine(scenario.graph, scenario.settings.refinement_km)
        system = FiniteVolumeSystem(graph, scenario.gas, self.builder, self.error_handler)
        sampler = BoundarySampler(scenario, graph, self.error_handler)
        return system, sampler

    def _pipe(self, alpha=0.02, flux=120.0, refinement=1.0):
        return self.parser.parse_scenario(PIPE_DOC.format(alpha=alpha, flux=flux, refinement=refinement))

    def test_flux_closure(self):
        F = FiniteVolumeSystem.flux_closure(np.array([4.0, 9.0]), np.array([-1.0, 4.0]), np.array([2.0, 1.0]))
        np.testing.assert_allclose(F, [4.0, -6.0])
        with self.assertRaises(NonPositiveDensityError):
            FiniteVolumeSystem.flux_closure(np.array([0.0]), np.array([-1.0]), np.array([1.0]))

    def test_single_pipe_steady_state(self):
        scenario = self._pipe(refinement=0.25)
        system, sampler = self._system(scenario)
        x = SteadyStateSolver(system, sampler).steady_state()
        b = sampler.sample_boundary(0.0)
        self.assertLessEqual(np.max(np.abs(system.rhs_partial_density(x, b))), 1e-9)

        # every segment carries the withdrawal
        inc = system.incidence(b)
        F = system.edge_flux(x, b, inc)
        np.testing.assert_allclose(F, 120.0, rtol=1e-6)
        values = system.nodal_quantities(x, b, inc)
        np.testing.assert_allclose(values["eta2"], 0.02, rtol=1e-9)

        # continuous law p(l)^2 = p0^2 - lambda c^2 phi^2 l / D
        c2 = system.mixture.wave_speed_squared(0.02)
        exact = math.sqrt(7.0e6 ** 2 - 0.11 * c2 * 120.0 ** 2 * 50.0e3 / 0.5) / 1e6
        outlet = scenario.graph.withdrawal_ids[0]
        p_out = values["p_mpa"][system.graph.nonslack_ids.index(outlet)]
        self.assertAlmostEqual(p_out, exact, delta=1e-3 * exact)

    def test_tree_steady_state(self):
        scenario = self.parser.parse_scenario(TREE_DOC)
        system, sampler = self._system(scenario)
        solver = SteadyStateSolver(system, sampler)
        b = sampler.sample_boundary(0.0)
        guess = solver.initial_guess(b)
        self.assertLessEqual(np.max(np.abs(system.rhs_partial_density(guess, b))), 1e-9)
        np.testing.assert_allclose(system.mass_balance(guess, b), 0.0, atol=1e-6)

        values = system.nodal_quantities(guess, b)
        eta = dict(zip(system.graph.nonslack_ids, values["eta2"]))
        self.assertAlmostEqual(eta["c"], 0.05)
        # 25 kg/s from upstream meet 5 kg/s injected at q
        self.assertAlmostEqual(eta["q"], (25.0 * 0.05 + 5.0 * 0.5) / 30.0)
        self.assertAlmostEqual(eta["b"], eta["q"])

    def test_looped_steady_state(self):
        scenario = self.parser.load(os.path.join(SCENARIO_DIR, "blended_5mpa_a.yaml"))
        scenario = self.parser.with_settings(scenario, refinement_km=10.0)
        system, sampler = self._system(scenario)
        x = SteadyStateSolver(system, sampler).steady_state()
        b = sampler.sample_boundary(0.0)
        self.assertLessEqual(np.max(np.abs(system.rhs_partial_density(x, b))), 1e-9)
        balance = system.mass_balance(x, b)
        self.assertLess(np.max(np.abs(balance)), 1e-9 * np.max(system.incidence(b).r) * 10.0)
        self.assertTrue(np.all(system.edge_flux(x, b) > 0))

    def test_equivalent_forms(self):
        scenario = self.parser.parse_scenario(TREE_DOC)
        system, sampler = self._system(scenario)
        b = sampler.sample_boundary(0.0)
        x = SteadyStateSolver(system, sampler).initial_guess(b)
        rng = np.random.default_rng(3)
        x = x * rng.uniform(0.97, 1.03, x.size)

        dx = system.rhs_partial_density(x, b)
        dy = system.rhs_pressure_density(system.to_pressure_density(x), b)
        n = system.n_nodes
        gas = system.gas
        np.testing.assert_allclose(dy[:n], dx[:n] + dx[n:], rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(dy[n:], gas.sigma1_sq * dx[:n] + gas.sigma2_sq * dx[n:], rtol=1e-9, atol=1e-6)
        np.testing.assert_allclose(system.from_pressure_density(system.to_pressure_density(x)), x, rtol=1e-12)

        homogeneous = self.parser.parse_scenario(TREE_DOC.replace("h2_fraction: 0.5", "h2_fraction: 0.05"))
        system, sampler = self._system(homogeneous)
        b = sampler.sample_boundary(0.0)
        rho1, rho2 = system.split(SteadyStateSolver(system, sampler).initial_guess(b))
        rho = (rho1 + rho2) * rng.uniform(0.97, 1.03, system.n_nodes)
        x = np.concatenate([0.95 * rho, 0.05 * rho])
        c2 = system.homogeneous_wave_speeds(homogeneous)
        p = system.to_pressure_density(x)[n:]
        np.testing.assert_allclose(system.rhs_isolated_pressure(p, b, c2),
                                   system.rhs_pressure_density(system.to_pressure_density(x), b)[n:], rtol=1e-9)

    def test_isolated_pressure_needs_homogeneous_mixture(self):
        scenario = self.parser.parse_scenario(TREE_DOC)
        system, _ = self._system(scenario)
        with self.assertRaises(HeterogeneousMixtureError):
            system.homogeneous_wave_speeds(scenario)
        varying = self._pipe(alpha="{sinusoid: {mean: 0.1, amplitude_factor: 0.5, frequency_cyc_hr: 1.0}}")
        system, _ = self._system(varying)
        with self.assertRaises(HeterogeneousMixtureError):
            system.homogeneous_wave_speeds(varying)

    def test_isolated_pressure_jacobian_is_metzler(self):
        scenario = self.parser.parse_scenario(TREE_DOC.replace("h2_fraction: 0.5", "h2_fraction: 0.05"))
        system, sampler = self._system(scenario)
        b = sampler.sample_boundary(0.0)
        c2 = system.homogeneous_wave_speeds(scenario)
        inspector = JacobianInspector(system)
        inc = system.incidence(b)
        rng = np.random.default_rng(11)
        steady = system.to_pressure_density(SteadyStateSolver(system, sampler).initial_guess(b))[system.n_nodes:]
        for _ in range(100):
            p = rng.uniform(0.95, 1.0) * steady
            # node shifts below a quarter of the smallest edge difference keep every flow direction
            smallest = np.min(np.abs(inc.M_s @ b.pressure + inc.M_d @ p))
            p = p + rng.uniform(-0.25, 0.25, p.size) * smallest
            J = inspector.isolated_pressure_jacobian(p, b, c2)
            self.assertTrue(JacobianInspector.is_metzler(J, tol=1e-7 * np.max(np.abs(J))))

    def test_pressure_density_jacobian_is_not_metzler(self):
        scenario = self._pipe(alpha=0.1, refinement=10.0)
        system, sampler = self._system(scenario)
        b = sampler.sample_boundary(0.0)
        y = system.to_pressure_density(SteadyStateSolver(system, sampler).initial_guess(b))
        J = JacobianInspector(system).pressure_density_jacobian(y, b)
        n = system.n_nodes
        # a denser upstream node at fixed pressure carries less hydrogen downstream
        negative = JacobianInspector.negative_off_diagonals(J, tol=1e-6 * np.max(np.abs(J[n:, :n])))
        self.assertTrue(any(i >= n and j < n and i - n != j for i, j in negative))

    def test_infeasible_demand(self):
        scenario = self._pipe(flux=400.0, refinement=5.0)
        system, sampler = self._system(scenario)
        with self.assertRaises(InfeasibleDemandError):
            SteadyStateSolver(system, sampler).steady_state()

    def test_jacobian_sparsity(self):
        scenario = self.parser.parse_scenario(TREE_DOC)
        system, sampler = self._system(scenario)
        b = sampler.sample_boundary(0.0)
        x = SteadyStateSolver(system, sampler).initial_guess(b)
        J = JacobianInspector(system).partial_density_jacobian(x, b)
        pattern = system.jacobian_sparsity().toarray() > 0
        self.assertEqual(pattern.shape, J.shape)
        self.assertFalse(np.any((np.abs(J) > 1e-9 * np.max(np.abs(J))) & ~pattern))


if __name__ == "__main__":
    unittest.main()
