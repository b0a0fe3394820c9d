import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional
from data.defs import M_PER_KM, pipe_area


class RoleKind(str, Enum):
    """Boundary role of a network node; the value is the schema spelling."""
    SLACK = "slack"
    INJECTION = "injection"
    WITHDRAWAL = "withdrawal"


ROLE_ORDER = {RoleKind.SLACK: 0, RoleKind.INJECTION: 1, RoleKind.WITHDRAWAL: 2}


@dataclass(frozen=True)
class NodeRole:
    """
    A class used to represent the boundary role of one network node.

    Attributes
    ----------
    node_id : str
        Identifier of the node.
    kind : RoleKind
        Slack nodes carry prescribed pressure and composition, injection nodes a
        prescribed inflow and composition, withdrawal nodes a prescribed outflow.
    auxiliary : bool
        True for nodes created by refinement. Auxiliary nodes are withdrawal
        nodes with zero outflow and no boundary profiles of their own.
    """
    node_id: str
    kind: RoleKind
    auxiliary: bool = False


@dataclass(frozen=True)
class Pipe:
    """
    A class used to represent a pipeline segment between two nodes.

    Geometry is stored in the units of the scenario schema (km, m). The nominal
    compressor and regulator ratios are used whenever a scenario supplies no
    time-dependent control profile for the pipe.

    Attributes
    ----------
    id : str
        Edge identifier.
    from_node : str
        Inlet node id.
    to_node : str
        Outlet node id.
    length_km : float
        Pipe length in km.
    diameter_m : float
        Pipe diameter in m.
    friction : float
        Dimensionless friction factor.
    compressor_ratio : float
        Nominal inlet boost ratio, at least one.
    regulator_ratio : float
        Nominal outlet reduction ratio, at least one.
    parent_id : Optional[str]
        Id of the physical pipe this edge was cut from; None for unrefined pipes.
    inlet_actuated : bool
        Whether the inlet of this edge is the inlet of the physical pipe, so the
        compressor acts here.
    outlet_actuated : bool
        Whether the outlet of this edge is the outlet of the physical pipe, so the
        regulator acts here.
    """
    id: str
    from_node: str
    to_node: str
    length_km: float
    diameter_m: float
    friction: float
    compressor_ratio: float = 1.0
    regulator_ratio: float = 1.0
    parent_id: Optional[str] = None
    inlet_actuated: bool = True
    outlet_actuated: bool = True

    @property
    def source_id(self) -> str:
        """Id of the physical pipe, used to look up control profiles."""
        return self.parent_id or self.id

    @property
    def length_m(self) -> float:
        return self.length_km * M_PER_KM

    @property
    def area(self) -> float:
        """Cross-sectional area in m^2."""
        return pipe_area(self.diameter_m)

    @property
    def volume(self) -> float:
        return self.area * self.length_m

    @property
    def friction_coefficient(self) -> float:
        """sqrt(2 D / (lambda l)) with l in metres."""
        return math.sqrt(2.0 * self.diameter_m / (self.friction * self.length_m))
