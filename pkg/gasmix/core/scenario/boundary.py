from typing import Dict, Optional
import numpy as np
from data.defs import HORIZON_SLACK_HR, PA_PER_MPA
from gasmix.core.error_handler import ErrorHandler, HorizonError
from gasmix.core.models.network_graph import NetworkGraph
from gasmix.core.models.profile import Constant, Profile
from gasmix.core.models.scenario import BoundaryValues, Scenario


class BoundarySampler:
    """
    A class used to evaluate the boundary and control profiles of a scenario at a given time.

    The sampler is bound to the graph the solver works on, which may be a
    refined version of the scenario graph: vectors are laid out in that graph's
    canonical node order and auxiliary nodes receive zero outflow.

    Attributes
    ----------
    scenario : Scenario
        Scenario whose profiles are sampled.
    graph : NetworkGraph
        Graph defining the vector layout.
    error_handler : ErrorHandler
        An instance of the `ErrorHandler` for logging sampling problems.

    Methods
    -------
    sample_boundary(t_hr)
        Returns all boundary values at time t_hr.
    withdrawal_rate(node_id, t_hr)
        Mass outflow of one physical withdrawal node, kg/s.
    """

    def __init__(self, scenario: Scenario, graph: Optional[NetworkGraph] = None, error_handler: ErrorHandler = None):
        self.scenario = scenario
        self.graph = graph or scenario.graph
        self.error_handler = error_handler or ErrorHandler()
        self._incoming_area = self._incoming_areas(scenario.graph)

    @staticmethod
    def _incoming_areas(graph: NetworkGraph) -> Dict[str, float]:
        areas: Dict[str, float] = {}
        for pipe in graph.pipes:
            areas[pipe.to_node] = areas.get(pipe.to_node, 0.0) + pipe.area
        return areas

    def withdrawal_rate(self, node_id: str, t_hr: float) -> float:
        boundary = self.scenario.boundaries.get(node_id)
        if boundary is None:
            return 0.0
        if boundary.outflow_kg_s is not None:
            return float(boundary.outflow_kg_s.at(t_hr))
        return float(boundary.outflow_flux_kg_m2_s.at(t_hr)) * self._incoming_area[node_id]

    def sample_boundary(self, t_hr: float) -> BoundaryValues:
        """
        Sample every profile at time t_hr.

        Args:
            t_hr: Time in hours, within [0, T]

        Returns:
            BoundaryValues: Pressures in Pa, flows in kg/s, fractions and control ratios

        Raises:
            HorizonError: If t_hr lies outside the scenario horizon
        """
        horizon = self.scenario.horizon_hr
        if t_hr < -HORIZON_SLACK_HR or t_hr > horizon * (1.0 + HORIZON_SLACK_HR) + HORIZON_SLACK_HR:
            self.error_handler.log_error(
                HorizonError(f"t = {t_hr} hr outside [0, {horizon}]"), "sample_boundary", raise_exception=True)
        t_hr = min(max(t_hr, 0.0), horizon)
        boundaries = self.scenario.boundaries

        def profile(node_id: str, name: str) -> float:
            value: Optional[Profile] = getattr(boundaries[node_id], name)
            return float((value or Constant(0.0)).at(t_hr))

        compressor, regulator = {}, {}
        for pipe_id, control in self.scenario.controls.items():
            if control.compressor_ratio is not None:
                compressor[pipe_id] = float(control.compressor_ratio.at(t_hr))
            if control.regulator_ratio is not None:
                regulator[pipe_id] = float(control.regulator_ratio.at(t_hr))

        graph = self.graph
        return BoundaryValues(
            t_hr=t_hr,
            pressure=np.array([profile(n, "pressure_mpa") * PA_PER_MPA for n in graph.slack_ids]),
            alpha=np.clip([profile(n, "h2_fraction") for n in graph.slack_ids], 0.0, 1.0),
            beta=np.clip([profile(n, "h2_fraction") for n in graph.injection_ids], 0.0, 1.0),
            inflow=np.array([profile(n, "inflow_kg_s") for n in graph.injection_ids]),
            outflow=np.array([self.withdrawal_rate(n, t_hr) for n in graph.withdrawal_ids]),
            compressor=compressor,
            regulator=regulator,
        )
