import math
from dataclasses import replace
from typing import Dict, List, Mapping, Optional, Sequence
import networkx as nx
import numpy as np
from data.defs import AUXILIARY_NODE_SEPARATOR, SUB_EDGE_SEPARATOR
from gasmix.core.error_handler import (
    ControlRatioError, ErrorHandler, UnknownNodeError, ValidationError,
)
from gasmix.core.models.incidence_set import IncidenceSet
from gasmix.core.models.network_graph import NetworkGraph
from gasmix.core.models.pipe import ROLE_ORDER, NodeRole, Pipe, RoleKind


class NetworkBuilder:
    """
    A class used to validate pipeline networks, refine them and assemble their incidence matrices.

    The builder is stateless apart from its logger: graphs it returns are
    immutable, so a single builder can serve any number of simulations.

    Attributes
    ----------
    error_handler : ErrorHandler
        An instance of the `ErrorHandler` for logging validation problems.

    Methods
    -------
    build_graph(pipes, roles)
        Validates pipes and roles and returns a graph in canonical node order.
    refine(graph, max_length_km)
        Splits every pipe into equal sub-edges no longer than the limit.
    incidence_matrices(graph, compressor, regulator)
        Assembles the weighted and signed incidence matrices for given control ratios.
    to_networkx(graph)
        Returns the graph as a networkx MultiDiGraph.
    """

    def __init__(self, error_handler: ErrorHandler = None):
        """
        Initialize the network builder.

        Args:
            error_handler: ErrorHandler instance
        """
        self.error_handler = error_handler or ErrorHandler()

    def build_graph(self, pipes: Sequence[Pipe], roles: Sequence[NodeRole]) -> NetworkGraph:
        """
        Validate a network and put its nodes in canonical order.

        Args:
            pipes: Pipes of the network
            roles: Boundary role of every node

        Returns:
            NetworkGraph: Validated graph with slack, injection and withdrawal nodes in that order

        Raises:
            ValidationError: On duplicate ids, self-loops, bad geometry, a missing
                slack node, edges entering a slack node, non-slack nodes without an
                incoming edge, or a disconnected graph
            UnknownNodeError: If a pipe references an undeclared node
        """
        try:
            self._check_ids(pipes, roles)
            role_by_id = {role.node_id: role for role in roles}
            for pipe in pipes:
                self._check_pipe(pipe, role_by_id)

            if not any(role.kind == RoleKind.SLACK for role in roles):
                raise ValidationError("network has no slack node")

            inlets = {pipe.to_node for pipe in pipes}
            for role in roles:
                if role.kind != RoleKind.SLACK and role.node_id not in inlets:
                    raise ValidationError(f"non-slack node '{role.node_id}' has no incoming pipe")

            order = sorted(range(len(roles)), key=lambda i: (ROLE_ORDER[roles[i].kind], i))
            if order != list(range(len(roles))):
                self.error_handler.log_info("Reordered nodes to slack/injection/withdrawal order", "build_graph")
            graph = NetworkGraph(
                pipes=tuple(pipes),
                node_roles=tuple(roles[i] for i in order),
                permutation=tuple(order),
            )

            if not nx.is_weakly_connected(self.to_networkx(graph)):
                raise ValidationError("network graph is disconnected")
            return graph
        except (ValidationError, UnknownNodeError) as e:
            self.error_handler.log_error(e, "build_graph", raise_exception=True)

    def _check_ids(self, pipes: Sequence[Pipe], roles: Sequence[NodeRole]) -> None:
        node_ids = [role.node_id for role in roles]
        if len(set(node_ids)) != len(node_ids):
            raise ValidationError("duplicate node ids")
        pipe_ids = [pipe.id for pipe in pipes]
        if len(set(pipe_ids)) != len(pipe_ids):
            raise ValidationError("duplicate pipe ids")
        if not pipes:
            raise ValidationError("network has no pipes")

    def _check_pipe(self, pipe: Pipe, role_by_id: Mapping[str, NodeRole]) -> None:
        for node_id in (pipe.from_node, pipe.to_node):
            if node_id not in role_by_id:
                raise UnknownNodeError(f"pipe '{pipe.id}' references unknown node '{node_id}'")
        if pipe.from_node == pipe.to_node:
            raise ValidationError(f"pipe '{pipe.id}' is a self-loop")
        if not (pipe.length_km > 0 and pipe.diameter_m > 0 and pipe.friction > 0):
            raise ValidationError(f"pipe '{pipe.id}' needs positive length, diameter and friction")
        if pipe.compressor_ratio < 1 or pipe.regulator_ratio < 1:
            raise ControlRatioError(f"pipe '{pipe.id}' has a control ratio below one")
        if role_by_id[pipe.to_node].kind == RoleKind.SLACK:
            raise ValidationError(f"pipe '{pipe.id}' enters slack node '{pipe.to_node}'")

    def refine(self, graph: NetworkGraph, max_length_km: float) -> NetworkGraph:
        """
        Split each pipe into ceil(length / max_length_km) equal sub-edges.

        Auxiliary nodes are withdrawal nodes with zero outflow. The compressor
        stays on the first sub-edge and the regulator on the last; interior
        sub-edges get ratio one. Pipes already short enough are kept as they are.

        Args:
            graph: Graph to refine
            max_length_km: Largest allowed sub-edge length in km

        Returns:
            NetworkGraph: Refined graph
        """
        if max_length_km <= 0:
            raise ValidationError("refinement length must be positive")

        pipes: List[Pipe] = []
        auxiliary: List[NodeRole] = []
        for pipe in graph.pipes:
            # tolerance keeps 50 / (50 / 50) from becoming 51 pieces
            count = max(1, math.ceil(pipe.length_km / max_length_km - 1e-9))
            if count == 1:
                pipes.append(pipe)
                continue
            sub_length = pipe.length_km / count
            ends = ([pipe.from_node]
                    + [f"{pipe.id}{AUXILIARY_NODE_SEPARATOR}{i}" for i in range(1, count)]
                    + [pipe.to_node])
            for i in range(count):
                first, last = i == 0, i == count - 1
                pipes.append(replace(
                    pipe,
                    id=f"{pipe.id}{SUB_EDGE_SEPARATOR}{i}",
                    from_node=ends[i],
                    to_node=ends[i + 1],
                    length_km=sub_length,
                    compressor_ratio=pipe.compressor_ratio if first else 1.0,
                    regulator_ratio=pipe.regulator_ratio if last else 1.0,
                    parent_id=pipe.source_id,
                    inlet_actuated=pipe.inlet_actuated and first,
                    outlet_actuated=pipe.outlet_actuated and last,
                ))
            auxiliary.extend(NodeRole(node_id, RoleKind.WITHDRAWAL, auxiliary=True) for node_id in ends[1:-1])

        limit = max_length_km if graph.refinement_limit_km is None else min(max_length_km, graph.refinement_limit_km)
        if not auxiliary:
            return replace(graph, refinement_limit_km=limit)
        self.error_handler.log_debug(
            f"{graph.edge_count} pipes refined into {len(pipes)} edges at {max_length_km} km", "refine")
        return NetworkGraph(
            pipes=tuple(pipes),
            node_roles=graph.node_roles + tuple(auxiliary),
            refinement_limit_km=limit,
            permutation=graph.permutation + tuple(range(graph.node_count, graph.node_count + len(auxiliary))),
        )

    def incidence_matrices(self,
                           graph: NetworkGraph,
                           compressor: Optional[Mapping[str, float]] = None,
                           regulator: Optional[Mapping[str, float]] = None) -> IncidenceSet:
        """
        Assemble the incidence matrices for the given control ratios.

        Args:
            graph: Refined graph
            compressor: Inlet ratio per physical pipe id; missing ids use the nominal ratio
            regulator: Outlet ratio per physical pipe id; missing ids use the nominal ratio

        Returns:
            IncidenceSet: Dense matrices and diagonal vectors

        Raises:
            ControlRatioError: If any ratio is below one
        """
        compressor = compressor or {}
        regulator = regulator or {}
        index = graph.node_index
        n_slack = len(graph.slack_ids)
        n_edges, n_nodes = graph.edge_count, graph.node_count

        M = np.zeros((n_edges, n_nodes))
        for k, pipe in enumerate(graph.pipes):
            mu_in = compressor.get(pipe.source_id, pipe.compressor_ratio) if pipe.inlet_actuated else pipe.compressor_ratio
            mu_out = regulator.get(pipe.source_id, pipe.regulator_ratio) if pipe.outlet_actuated else pipe.regulator_ratio
            if mu_in < 1 or mu_out < 1:
                self.error_handler.log_error(
                    ControlRatioError(f"pipe '{pipe.source_id}' control ratio below one ({mu_in}, {mu_out})"),
                    "incidence_matrices", raise_exception=True)
            M[k, index[pipe.from_node]] = -mu_in
            M[k, index[pipe.to_node]] = mu_out

        M_s, M_d = M[:, :n_slack], M[:, n_slack:]
        M_d_pos, M_d_neg = np.maximum(M_d, 0.0), np.minimum(M_d, 0.0)
        areas = np.array([pipe.area for pipe in graph.pipes])
        lengths = np.array([pipe.length_m for pipe in graph.pipes])
        return IncidenceSet(
            M=M,
            M_s=M_s,
            M_d=M_d,
            M_d_pos=M_d_pos,
            M_d_neg=M_d_neg,
            Q_d=np.sign(M_d),
            Q_d_pos=np.sign(M_d_pos),
            Q_d_neg=np.sign(M_d_neg),
            Q_s=np.sign(M_s),
            Q_s_neg=np.sign(np.minimum(M_s, 0.0)),
            areas=areas,
            lengths=lengths,
            r=M_d_pos.T @ (areas * lengths),
            friction_coefficients=np.array([pipe.friction_coefficient for pipe in graph.pipes]),
        )

    def to_networkx(self, graph: NetworkGraph) -> nx.MultiDiGraph:
        """Directed multigraph with node roles and pipe objects as attributes."""
        g = nx.MultiDiGraph()
        for role in graph.node_roles:
            g.add_node(role.node_id, role=role)
        for pipe in graph.pipes:
            g.add_edge(pipe.from_node, pipe.to_node, key=pipe.id, pipe=pipe)
        return g

    def adjacency(self, graph: NetworkGraph) -> Dict[str, List[str]]:
        """Neighbour lists ignoring direction."""
        neighbours: Dict[str, List[str]] = {node_id: [] for node_id in graph.node_ids}
        for pipe in graph.pipes:
            neighbours[pipe.from_node].append(pipe.to_node)
            neighbours[pipe.to_node].append(pipe.from_node)
        return neighbours
