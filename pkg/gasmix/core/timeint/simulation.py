from typing import Dict, List, Optional, Sequence, Tuple
import numpy as np
import pandas as pd
from data.defs import DEFAULT_EPSILON_THRESHOLD, QUANTITIES, S_PER_HR
from gasmix.core.analysis.crossings import CrossingDetector
from gasmix.core.error_handler import (
    ErrorHandler, FlowReversalError, SolverSelectionError, UnknownNodeError, ValidationError,
)
from gasmix.core.fv.steady_state import SteadyStateSolver
from gasmix.core.fv.system import FiniteVolumeSystem
from gasmix.core.models.reports import CrossingReport
from gasmix.core.models.scenario import Scenario
from gasmix.core.models.time_series import TimeSeries
from gasmix.core.network.builder import NetworkBuilder
from gasmix.core.scenario.boundary import BoundarySampler
from gasmix.core.spectral.pipe_system import SpectralPipeSystem
from gasmix.core.timeint.integrator import Integrator, IntegratorConfig

STEADY_COLUMNS = ["node", "p_mpa", "rho", "rho1", "rho2", "eta2"]


class Simulator:
    """
    A class used to run one scenario from its steady state over its horizon.

    The simulator picks the discretization named in the scenario settings,
    builds it once, and turns integrated states into nodal trajectories on the
    uniform output grid. Along the way it enforces the positive-flow
    assumption and tracks the largest relative density jump across refined
    edges.

    Attributes
    ----------
    scenario : Scenario
        Scenario being simulated.
    integrator : Integrator
        Time integrator configured from the scenario settings.
    system : Optional[FiniteVolumeSystem]
        Finite-volume system, for the 'fv' solver.
    spectral : Optional[SpectralPipeSystem]
        Collocation system, for the 'spectral' solver.
    sampler : BoundarySampler
        Boundary sampler laid out for the system's graph.

    Methods
    -------
    steady_state()
        Returns the initial state.
    run(quantities, nodes, initial_state)
        Integrates and returns the sampled nodal trajectories.
    steady_table()
        Returns the steady nodal values at t = 0 as a DataFrame.
    """

    def __init__(self,
                 scenario: Scenario,
                 builder: NetworkBuilder = None,
                 error_handler: ErrorHandler = None,
                 epsilon_threshold: float = DEFAULT_EPSILON_THRESHOLD):
        """
        Initialize the simulator.

        Args:
            scenario: Scenario to simulate
            builder: NetworkBuilder instance
            error_handler: ErrorHandler instance
            epsilon_threshold: Density jump above which a refinement warning is logged

        Raises:
            SolverSelectionError: If the solver is unknown or spectral is requested for a network
        """
        self.scenario = scenario
        self.error_handler = error_handler or ErrorHandler()
        self.builder = builder or NetworkBuilder(self.error_handler)
        self.epsilon_threshold = epsilon_threshold
        settings = scenario.settings
        self.integrator = Integrator(IntegratorConfig.from_settings(settings), self.error_handler)
        self.system: Optional[FiniteVolumeSystem] = None
        self.spectral: Optional[SpectralPipeSystem] = None

        if settings.solver == "fv":
            self.graph = self.builder.refine(scenario.graph, settings.refinement_km)
            self.system = FiniteVolumeSystem(self.graph, scenario.gas, self.builder, self.error_handler)
        elif settings.solver == "spectral":
            self.graph = scenario.graph
            self.spectral = SpectralPipeSystem(scenario, error_handler=self.error_handler)
        else:
            self.error_handler.log_error(
                SolverSelectionError(f"unknown solver '{settings.solver}'"), "Simulator", raise_exception=True)
        self.sampler = BoundarySampler(scenario, self.graph, self.error_handler)

    def steady_state(self) -> np.ndarray:
        """Steady state for the boundary values at t = 0."""
        if self.spectral is not None:
            return self.spectral.steady_state(self.sampler.sample_boundary(0.0))
        return SteadyStateSolver(self.system, self.sampler, error_handler=self.error_handler).steady_state()

    def rhs(self, t_s: float, x: np.ndarray) -> np.ndarray:
        b = self.sampler.sample_boundary(t_s / S_PER_HR)
        if self.spectral is not None:
            return self.spectral.rhs_spectral(x, b)
        return self.system.rhs_partial_density(x, b)

    def default_nodes(self) -> List[str]:
        slack = set(self.scenario.graph.slack_ids)
        return [node_id for node_id in self.scenario.graph.physical_ids if node_id not in slack]

    def all_nodes(self) -> List[str]:
        """Every non-slack node of the solver graph, auxiliary nodes included."""
        if self.spectral is not None:
            return [self.spectral.outlet_id]
        return list(self.graph.nonslack_ids)

    def _check_request(self, quantities: Sequence[str], nodes: Sequence[str]) -> None:
        unknown = [q for q in quantities if q not in QUANTITIES]
        if unknown:
            raise ValidationError(f"unknown quantities {unknown}; expected a subset of {list(QUANTITIES)}")
        known = set(self.graph.node_ids)
        for node_id in nodes:
            if node_id not in known:
                raise UnknownNodeError(f"unknown node '{node_id}'")

    def run(self,
            quantities: Optional[Sequence[str]] = None,
            nodes: Optional[Sequence[str]] = None,
            initial_state: Optional[np.ndarray] = None) -> TimeSeries:
        """
        Integrate the scenario and sample the requested nodal quantities.

        Args:
            quantities: Quantity names; all of them when omitted
            nodes: Physical node ids; every non-slack node when omitted
            initial_state: Starting state; the t = 0 steady state when omitted

        Returns:
            TimeSeries: Columns '<node>.<quantity>' on the uniform hour grid

        Raises:
            IntegrationError: If integration fails or a density turns nonpositive
            FlowReversalError: If any flux turns negative on the output grid
        """
        quantities = list(quantities or QUANTITIES)
        nodes = list(nodes or self.default_nodes())
        try:
            self._check_request(quantities, nodes)
        except (ValidationError, UnknownNodeError) as e:
            self.error_handler.log_error(e, "run", raise_exception=True)

        x0 = self.steady_state() if initial_state is None else np.asarray(initial_state, dtype=float)
        self.error_handler.log_info(
            f"Simulating '{self.scenario.name}' over {self.scenario.horizon_hr} hr "
            f"({self.scenario.settings.solver}, {self.integrator.config.method}, {x0.size} states)", "run")
        jac_sparsity = self.system.jacobian_sparsity() if self.system is not None else None
        t_hr, states = self.integrator.integrate(self.rhs, x0, self.scenario.horizon_hr, jac_sparsity)
        states = self._clip_roundoff(states)

        if self.spectral is not None:
            columns, diagnostics = self._sample_spectral(t_hr, states, quantities, nodes)
        else:
            columns, diagnostics = self._sample_fv(t_hr, states, quantities, nodes)
        self.error_handler.log_info(f"Finished '{self.scenario.name}'", "run")
        series = TimeSeries.from_arrays(t_hr, columns)
        series.diagnostics.update(diagnostics)
        return series

    def _clip_roundoff(self, states: np.ndarray) -> np.ndarray:
        """Set partial densities within atol below zero to zero."""
        atol = self.integrator.config.atol
        return np.where((states < 0) & (states > -atol), 0.0, states)

    def _empty_columns(self, size: int, quantities: Sequence[str], nodes: Sequence[str]) -> Dict[str, np.ndarray]:
        return {TimeSeries.column_name(n, q): np.empty(size) for n in nodes for q in quantities}

    def _sample_fv(self, t_hr: np.ndarray, states: np.ndarray, quantities: Sequence[str],
                   nodes: Sequence[str]) -> Tuple[Dict[str, np.ndarray], Dict[str, float]]:
        system, graph = self.system, self.graph
        nonslack = {node_id: i for i, node_id in enumerate(graph.nonslack_ids)}
        slack = {node_id: i for i, node_id in enumerate(graph.slack_ids)}
        columns = self._empty_columns(t_hr.size, quantities, nodes)
        max_jump, max_jump_t = 0.0, 0.0

        for n, (t, x) in enumerate(zip(t_hr, states)):
            b = self.sampler.sample_boundary(t)
            inc = system.incidence(b)
            values = system.nodal_quantities(x, b, inc)
            flux = system.workspace.flux
            reversed_edges = np.flatnonzero(flux < 0)
            if reversed_edges.size:
                edge = graph.pipes[reversed_edges[0]].id
                self.error_handler.log_error(
                    FlowReversalError(f"flow reversal on edge '{edge}' at t = {t:.6g} hr", t_hr=t, edge=edge),
                    "run", raise_exception=True)
            jump = float(np.max(system.density_jump(x, b, inc)))
            if jump > max_jump:
                max_jump, max_jump_t = jump, t

            slack_values = system.slack_quantities(b) if slack else {}
            for node_id in nodes:
                for q in quantities:
                    if node_id in nonslack:
                        value = values[q][nonslack[node_id]]
                    else:
                        value = slack_values[q][slack[node_id]]
                    columns[TimeSeries.column_name(node_id, q)][n] = value

        if max_jump > self.epsilon_threshold:
            self.error_handler.log_warning(
                f"relative density jump {max_jump:.3g} at t = {max_jump_t:.4g} hr exceeds "
                f"{self.epsilon_threshold}; refine below {graph.refinement_limit_km} km", "run")
        return columns, {"max_density_jump": max_jump, "max_density_jump_t_hr": max_jump_t}

    def _sample_spectral(self, t_hr: np.ndarray, states: np.ndarray, quantities: Sequence[str],
                         nodes: Sequence[str]) -> Tuple[Dict[str, np.ndarray], Dict[str, float]]:
        spectral = self.spectral
        columns = self._empty_columns(t_hr.size, quantities, nodes)
        min_flux = np.inf
        for n, (t, x) in enumerate(zip(t_hr, states)):
            b = self.sampler.sample_boundary(t)
            phi = spectral.flux_profile(x, b)
            if np.any(phi < 0):
                point = int(np.flatnonzero(phi < 0)[0])
                self.error_handler.log_error(
                    FlowReversalError(f"flow reversal at grid point {point} at t = {t:.6g} hr",
                                      t_hr=t, edge=spectral.pipe.id),
                    "run", raise_exception=True)
            min_flux = min(min_flux, float(np.min(phi)))
            values = {spectral.outlet_id: spectral.outlet_quantities(x, b),
                      spectral.inlet_id: spectral.inlet_quantities(b)}
            for node_id in nodes:
                for q in quantities:
                    columns[TimeSeries.column_name(node_id, q)][n] = values[node_id][q]
        return columns, {"min_flux_kg_m2_s": min_flux}

    def steady_table(self) -> pd.DataFrame:
        """Steady nodal values at t = 0 for every physical node, slack nodes included."""
        x = self.steady_state()
        b = self.sampler.sample_boundary(0.0)
        rows = []
        if self.spectral is not None:
            values = {self.spectral.inlet_id: self.spectral.inlet_quantities(b),
                      self.spectral.outlet_id: self.spectral.outlet_quantities(x, b)}
            for node_id in self.scenario.graph.physical_ids:
                rows.append({"node": node_id, **{k: values[node_id][k] for k in STEADY_COLUMNS[1:]}})
            return pd.DataFrame(rows, columns=STEADY_COLUMNS)

        nonslack = self.system.nodal_quantities(x, b)
        slack = self.system.slack_quantities(b)
        index = {node_id: ("d", i) for i, node_id in enumerate(self.graph.nonslack_ids)}
        index.update({node_id: ("s", i) for i, node_id in enumerate(self.graph.slack_ids)})
        for node_id in self.scenario.graph.physical_ids:
            block, i = index[node_id]
            source = nonslack if block == "d" else slack
            rows.append({"node": node_id, **{k: float(source[k][i]) for k in STEADY_COLUMNS[1:]}})
        return pd.DataFrame(rows, columns=STEADY_COLUMNS)


def simulate_pair(scenario_a: Scenario,
                  scenario_b: Scenario,
                  quantities: Optional[Sequence[str]] = None,
                  nodes: Optional[Sequence[str]] = None,
                  error_handler: ErrorHandler = None) -> Tuple[TimeSeries, TimeSeries, CrossingReport]:
    """
    Simulate two scenarios with ordered inputs and report where their solutions cross.

    Raises:
        GridMismatchError: If the two scenarios sample different time grids
    """
    error_handler = error_handler or ErrorHandler()
    series_a = Simulator(scenario_a, error_handler=error_handler).run(quantities, nodes)
    series_b = Simulator(scenario_b, error_handler=error_handler).run(quantities, nodes)
    report = CrossingDetector(error_handler=error_handler).detect_crossings(series_a, series_b)
    return series_a, series_b, report
