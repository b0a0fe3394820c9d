from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Tuple
from gasmix.core.models.pipe import NodeRole, Pipe, RoleKind


@dataclass(frozen=True)
class NetworkGraph:
    """
    A class used to represent a validated, directed pipeline network.

    Node roles are stored in the canonical order: slack nodes first, then
    injection nodes, then withdrawal nodes. Instances are immutable and can be
    shared by concurrent sweep workers.

    Attributes
    ----------
    pipes : Tuple[Pipe, ...]
        Edges in their input order.
    node_roles : Tuple[NodeRole, ...]
        Nodes in canonical order.
    refinement_limit_km : Optional[float]
        Maximum edge length after refinement, or None for an unrefined graph.
    permutation : Tuple[int, ...]
        permutation[i] is the input position of the i-th node in canonical order.
    """
    pipes: Tuple[Pipe, ...]
    node_roles: Tuple[NodeRole, ...]
    refinement_limit_km: Optional[float] = None
    permutation: Tuple[int, ...] = ()

    @cached_property
    def node_ids(self) -> List[str]:
        return [role.node_id for role in self.node_roles]

    @cached_property
    def node_index(self) -> Dict[str, int]:
        return {node_id: i for i, node_id in enumerate(self.node_ids)}

    @cached_property
    def roles_by_id(self) -> Dict[str, NodeRole]:
        return {role.node_id: role for role in self.node_roles}

    def _ids_of(self, kind: RoleKind) -> List[str]:
        return [role.node_id for role in self.node_roles if role.kind == kind]

    @cached_property
    def slack_ids(self) -> List[str]:
        return self._ids_of(RoleKind.SLACK)

    @cached_property
    def injection_ids(self) -> List[str]:
        return self._ids_of(RoleKind.INJECTION)

    @cached_property
    def withdrawal_ids(self) -> List[str]:
        return self._ids_of(RoleKind.WITHDRAWAL)

    @cached_property
    def nonslack_ids(self) -> List[str]:
        return self.injection_ids + self.withdrawal_ids

    @cached_property
    def physical_ids(self) -> List[str]:
        """Nodes that were not created by refinement."""
        return [role.node_id for role in self.node_roles if not role.auxiliary]

    @cached_property
    def pipe_ids(self) -> List[str]:
        return [pipe.id for pipe in self.pipes]

    @property
    def edge_count(self) -> int:
        return len(self.pipes)

    @property
    def node_count(self) -> int:
        return len(self.node_roles)

    def incoming(self, node_id: str) -> List[Pipe]:
        return [pipe for pipe in self.pipes if pipe.to_node == node_id]

    def outgoing(self, node_id: str) -> List[Pipe]:
        return [pipe for pipe in self.pipes if pipe.from_node == node_id]

    @property
    def is_single_pipe(self) -> bool:
        """One physical pipe from a slack node to a withdrawal node."""
        sources = {pipe.source_id for pipe in self.pipes}
        return (len(sources) == 1 and len(self.slack_ids) == 1
                and len(self.physical_ids) == 2 and not self.injection_ids)

    @property
    def total_length_km(self) -> float:
        return sum(pipe.length_km for pipe in self.pipes)

    @property
    def total_volume(self) -> float:
        return sum(pipe.volume for pipe in self.pipes)
