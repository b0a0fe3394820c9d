from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple
import numpy as np
from data.defs import (
    DEFAULT_ATOL, DEFAULT_METHOD, DEFAULT_REFINEMENT_KM, DEFAULT_RTOL,
    DEFAULT_SAMPLES, DEFAULT_SPECTRAL_ORDER,
)
from gasmix.core.models.gas_pair import GasPair
from gasmix.core.models.network_graph import NetworkGraph
from gasmix.core.models.profile import Profile


@dataclass(frozen=True)
class NodeBoundary:
    """
    A class used to represent the boundary profiles attached to one node.

    Only the fields that match the node's role are set. Withdrawal may be given
    either as a mass rate or as a mass flux, which is multiplied by the total
    area of the pipes entering the node.

    Attributes
    ----------
    pressure_mpa : Optional[Profile]
        Slack pressure, MPa.
    h2_fraction : Optional[Profile]
        Hydrogen mass fraction of gas supplied at slack or injection nodes.
    inflow_kg_s : Optional[Profile]
        Injection mass inflow, kg/s.
    outflow_kg_s : Optional[Profile]
        Withdrawal mass outflow, kg/s.
    outflow_flux_kg_m2_s : Optional[Profile]
        Withdrawal mass flux, kg/m^2 s.
    """
    pressure_mpa: Optional[Profile] = None
    h2_fraction: Optional[Profile] = None
    inflow_kg_s: Optional[Profile] = None
    outflow_kg_s: Optional[Profile] = None
    outflow_flux_kg_m2_s: Optional[Profile] = None


@dataclass(frozen=True)
class PipeControl:
    """Time-dependent compressor (inlet) and regulator (outlet) ratios of a physical pipe."""
    compressor_ratio: Optional[Profile] = None
    regulator_ratio: Optional[Profile] = None


@dataclass(frozen=True)
class SimulationSettings:
    """
    A class used to represent the integration window and solver selection.

    Attributes
    ----------
    horizon_hr : float
        Simulated horizon T in hours.
    samples : int
        Number of output intervals N; the output grid has N + 1 points.
    solver : str
        'fv' for the finite-volume network system, 'spectral' for the
        single-pipe Chebyshev system.
    refinement_km : float
        Maximum refined edge length for the finite-volume solver.
    method : str
        Integrator: BDF, Radau, LSODA or RK4.
    rtol, atol : float
        Integrator tolerances.
    max_step_hr : Optional[float]
        Upper bound on the adaptive step.
    fixed_step_s : Optional[float]
        Step of the fixed-step explicit integrator.
    spectral_order : int
        Chebyshev polynomial order N.
    """
    horizon_hr: float
    samples: int = DEFAULT_SAMPLES
    solver: str = "fv"
    refinement_km: float = DEFAULT_REFINEMENT_KM
    method: str = DEFAULT_METHOD
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    max_step_hr: Optional[float] = None
    fixed_step_s: Optional[float] = None
    spectral_order: int = DEFAULT_SPECTRAL_ORDER


@dataclass(frozen=True)
class Scenario:
    """
    A class used to represent a complete simulation description.

    Attributes
    ----------
    name : str
        Free-form scenario name.
    graph : NetworkGraph
        Unrefined network graph.
    gas : GasPair
        Gas constants.
    boundaries : Dict[str, NodeBoundary]
        Boundary profiles per physical node id.
    controls : Dict[str, PipeControl]
        Control profiles per physical pipe id. Pipes without an entry use their
        nominal ratios.
    settings : SimulationSettings
        Horizon, sampling and solver settings.
    """
    name: str
    graph: NetworkGraph
    gas: GasPair
    boundaries: Dict[str, NodeBoundary] = field(default_factory=dict)
    controls: Dict[str, PipeControl] = field(default_factory=dict)
    settings: SimulationSettings = field(default_factory=lambda: SimulationSettings(horizon_hr=1.0))

    @property
    def horizon_hr(self) -> float:
        return self.settings.horizon_hr


@dataclass
class BoundaryValues:
    """
    A class used to hold every boundary quantity sampled at one instant.

    Vectors follow the canonical node order of the graph they were sampled for
    (refined graphs included, with zero outflow at auxiliary nodes). SI units.

    Attributes
    ----------
    t_hr : float
        Sample time, hours.
    pressure : np.ndarray
        Slack pressures, Pa.
    alpha : np.ndarray
        Slack hydrogen mass fractions.
    beta : np.ndarray
        Injection hydrogen mass fractions.
    inflow : np.ndarray
        Injection mass inflows, kg/s.
    outflow : np.ndarray
        Withdrawal mass outflows, kg/s.
    compressor : Dict[str, float]
        Inlet ratio per physical pipe id.
    regulator : Dict[str, float]
        Outlet ratio per physical pipe id.
    """
    t_hr: float
    pressure: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    inflow: np.ndarray
    outflow: np.ndarray
    compressor: Dict[str, float]
    regulator: Dict[str, float]

    def controls_key(self) -> Tuple:
        return (tuple(sorted(self.compressor.items())), tuple(sorted(self.regulator.items())))
