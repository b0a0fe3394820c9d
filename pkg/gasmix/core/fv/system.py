from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple
import numpy as np
import scipy.sparse as sp
from data.defs import PA_PER_MPA
from gasmix.core.error_handler import (
    DimensionMismatchError, ErrorHandler, HeterogeneousMixtureError, NonPositiveDensityError, NumericalError,
)
from gasmix.core.gas.mixture import GasMixture
from gasmix.core.models.gas_pair import GasPair
from gasmix.core.models.incidence_set import IncidenceSet
from gasmix.core.models.network_graph import NetworkGraph
from gasmix.core.models.scenario import BoundaryValues, Scenario
from gasmix.core.network.builder import NetworkBuilder


@dataclass
class FvWorkspace:
    """
    A class used to cache per-integration intermediate results of the finite-volume system.

    A workspace belongs to one system instance and is never shared between
    integrations.

    Attributes
    ----------
    incidence : Dict[tuple, IncidenceSet]
        Incidence sets keyed by the control ratios they were assembled for.
    flux : Optional[np.ndarray]
        Last evaluated per-edge inlet flux, kg/m^2 s.
    inlet_fraction : Optional[np.ndarray]
        Last hydrogen mass fraction entering each edge.
    outlet_fraction : Optional[np.ndarray]
        Last hydrogen mass fraction at each edge outlet node.
    balance : Optional[Tuple[np.ndarray, np.ndarray]]
        Last boundary terms gamma^(m) * d per constituent, kg/s.
    """
    incidence: Dict[tuple, IncidenceSet] = field(default_factory=dict)
    flux: Optional[np.ndarray] = None
    inlet_fraction: Optional[np.ndarray] = None
    outlet_fraction: Optional[np.ndarray] = None
    balance: Optional[Tuple[np.ndarray, np.ndarray]] = None


class FiniteVolumeSystem:
    """
    A class used to evaluate the finite-volume ODE system of a refined pipeline network.

    The state is the stacked vector (rho1, rho2) of partial densities at the
    non-slack nodes of the refined graph. Each refined edge carries one flux,
    computed from its outlet density and its end pressures; each non-slack node
    balances the constituent mass carried by its edges against its own
    injection or withdrawal. The pressure-density and isolated-pressure forms
    are algebraically equivalent rewrites used for analysis.

    Attributes
    ----------
    graph : NetworkGraph
        Refined network graph.
    mixture : GasMixture
        Mixture algebra for the gas pair.
    builder : NetworkBuilder
        Builder used to assemble incidence matrices.
    workspace : FvWorkspace
        Cache of incidence sets and last fluxes.
    error_handler : ErrorHandler
        An instance of the `ErrorHandler` for logging numerical problems.

    Methods
    -------
    flux_closure(y, z, coefficients)
        Signed square-root flux law per edge.
    rhs_partial_density(x, b, inc)
        Time derivative of the partial densities.
    rhs_pressure_density(y, b, inc)
        Time derivative of total density and pressure.
    rhs_isolated_pressure(p, b, c2, inc)
        Time derivative of pressure for a homogeneous mixture.
    nodal_quantities(x, b, inc)
        Equivalent nodal quantities (pressure, fractions, energy) of a state.
    """

    def __init__(self,
                 graph: NetworkGraph,
                 gas: GasPair,
                 builder: NetworkBuilder = None,
                 error_handler: ErrorHandler = None):
        """
        Initialize the finite-volume system.

        Args:
            graph: Refined network graph
            gas: Gas constants
            builder: NetworkBuilder instance
            error_handler: ErrorHandler instance
        """
        self.graph = graph
        self.error_handler = error_handler or ErrorHandler()
        self.mixture = GasMixture(gas, self.error_handler)
        self.builder = builder or NetworkBuilder(self.error_handler)
        self.workspace = FvWorkspace()
        self.n_slack = len(graph.slack_ids)
        self.n_injection = len(graph.injection_ids)
        self.n_nodes = len(graph.nonslack_ids)

    @property
    def gas(self) -> GasPair:
        return self.mixture.gas

    @property
    def state_size(self) -> int:
        return 2 * self.n_nodes

    def incidence(self, b: BoundaryValues) -> IncidenceSet:
        """Incidence set for the control ratios in b, assembled once per distinct ratio set."""
        key = b.controls_key()
        inc = self.workspace.incidence.get(key)
        if inc is None:
            inc = self.builder.incidence_matrices(self.graph, b.compressor, b.regulator)
            self.workspace.incidence[key] = inc
        return inc

    # ---------------------------------------------
    # BUILDING BLOCKS
    # ---------------------------------------------
    @staticmethod
    def flux_closure(y: np.ndarray, z: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
        """
        Flux law F_k = -sign(z_k) Lambda_k sqrt(|y_k z_k|).

        Args:
            y: Per-edge outlet density, kg/m^3
            z: Per-edge outlet-minus-inlet pressure difference, Pa
            coefficients: Per-edge sqrt(2 D / (lambda l))

        Returns:
            np.ndarray: Per-edge inlet mass flux, kg/m^2 s

        Raises:
            NonPositiveDensityError: If any y is not positive
        """
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        bad = np.flatnonzero(~(y > 0))
        if bad.size:
            raise NonPositiveDensityError(f"nonpositive outlet density on edge {bad[0]}", index=int(bad[0]))
        return -np.sign(z) * coefficients * np.sqrt(np.abs(y * z))

    def split(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.state_size:
            raise DimensionMismatchError(f"state has {x.shape[0]} entries, expected {self.state_size}")
        return x[:self.n_nodes], x[self.n_nodes:]

    def slack_partials(self, b: BoundaryValues) -> Tuple[np.ndarray, np.ndarray]:
        """Slack partial densities from slack pressure and hydrogen fraction."""
        rho = b.pressure / self.mixture.wave_speed_squared(b.alpha)
        return (1.0 - b.alpha) * rho, b.alpha * rho

    @staticmethod
    def demand(b: BoundaryValues) -> np.ndarray:
        """Withdrawal is positive, injection negative, in non-slack node order."""
        return np.concatenate([-b.inflow, b.outflow])

    def _check_density(self, rho: np.ndarray) -> None:
        bad = np.flatnonzero(~(rho > 0))
        if bad.size:
            node_id = self.graph.nonslack_ids[bad[0]]
            raise NonPositiveDensityError(f"nonpositive total density at node '{node_id}'", index=int(bad[0]))

    def _checked_flux(self, y: np.ndarray, z: np.ndarray, inc: IncidenceSet) -> np.ndarray:
        F = self.flux_closure(y, z, inc.friction_coefficients)
        bad = np.flatnonzero(~np.isfinite(F))
        if bad.size:
            raise NumericalError(f"non-finite flux on edge '{self.graph.pipes[bad[0]].id}'")
        self.workspace.flux = F
        return F

    def edge_flux(self, x: np.ndarray, b: BoundaryValues, inc: Optional[IncidenceSet] = None) -> np.ndarray:
        """Per-edge inlet flux of a partial-density state."""
        inc = inc or self.incidence(b)
        rho1, rho2 = self.split(x)
        p = self.gas.sigma1_sq * rho1 + self.gas.sigma2_sq * rho2
        return self._checked_flux(inc.M_d_pos @ (rho1 + rho2), inc.M_s @ b.pressure + inc.M_d @ p, inc)

    # ---------------------------------------------
    # RIGHT-HAND SIDES
    # ---------------------------------------------
    def rhs_partial_density(self, x: np.ndarray, b: BoundaryValues, inc: Optional[IncidenceSet] = None) -> np.ndarray:
        """
        Time derivative of the partial densities at the non-slack nodes.

        Each constituent leaves an edge inlet with the concentration of the
        edge's tail node (slack composition for slack tails) and leaves a
        withdrawal node with that node's own concentration. Injection nodes add
        gas at the prescribed composition.

        Args:
            x: Stacked partial densities (rho1, rho2), kg/m^3
            b: Boundary values at the current time
            inc: Incidence set; assembled from b when omitted

        Returns:
            np.ndarray: Stacked time derivatives, kg/m^3 s

        Raises:
            NonPositiveDensityError: If a total density is not positive
        """
        inc = inc or self.incidence(b)
        rho1, rho2 = self.split(x)
        rho = rho1 + rho2
        self._check_density(rho)
        p = self.gas.sigma1_sq * rho1 + self.gas.sigma2_sq * rho2
        F = self._checked_flux(inc.M_d_pos @ rho, inc.M_s @ b.pressure + inc.M_d @ p, inc)

        eta2 = rho2 / rho
        tail_s, tail_d = np.abs(inc.Q_s_neg), np.abs(inc.Q_d_neg)
        inlet2 = tail_s @ b.alpha + tail_d @ eta2
        d = self.demand(b)
        n_q = self.n_injection

        derivatives, balance = [], []
        for inlet, eta, beta in ((1.0 - inlet2, 1.0 - eta2, 1.0 - b.beta), (inlet2, eta2, b.beta)):
            gamma_d = np.concatenate([beta, eta[n_q:]]) * d
            balance.append(gamma_d)
            derivatives.append((inc.Q_d.T @ (inc.areas * inlet * F) - gamma_d) / inc.r)

        self.workspace.inlet_fraction = inlet2
        self.workspace.outlet_fraction = np.abs(inc.Q_d_pos) @ eta2
        self.workspace.balance = (balance[0], balance[1])
        return np.concatenate(derivatives)

    def rhs_pressure_density(self, y: np.ndarray, b: BoundaryValues, inc: Optional[IncidenceSet] = None) -> np.ndarray:
        """
        Time derivative of the stacked (total density, pressure) state.

        Args:
            y: Stacked (rho, p) at the non-slack nodes, kg/m^3 and Pa
            b: Boundary values at the current time
            inc: Incidence set; assembled from b when omitted

        Returns:
            np.ndarray: Stacked (d rho/dt, d p/dt)
        """
        inc = inc or self.incidence(b)
        rho, p = self.split(y)
        self._check_density(rho)
        F = self._checked_flux(inc.M_d_pos @ rho, inc.M_s @ b.pressure + inc.M_d @ p, inc)

        a2 = self.mixture.wave_speed_squared(b.alpha)
        b2 = self.mixture.wave_speed_squared(b.beta)
        local = p / rho
        d = self.demand(b)
        n_q = self.n_injection

        rho_dot = (inc.Q_d.T @ (inc.areas * F) - d) / inc.r
        inlet = np.abs(inc.Q_s_neg) @ a2 + np.abs(inc.Q_d_neg) @ local
        p_dot = (inc.Q_d.T @ (inc.areas * inlet * F) - np.concatenate([b2, local[n_q:]]) * d) / inc.r
        return np.concatenate([rho_dot, p_dot])

    def rhs_isolated_pressure(self,
                              p: np.ndarray,
                              b: BoundaryValues,
                              c2: np.ndarray,
                              inc: Optional[IncidenceSet] = None) -> np.ndarray:
        """
        Time derivative of pressure when every node keeps a fixed wave speed.

        Args:
            p: Pressure at the non-slack nodes, Pa
            b: Boundary values at the current time
            c2: Squared wave speed per non-slack node, (m/s)^2
            inc: Incidence set; assembled from b when omitted

        Returns:
            np.ndarray: d p/dt, Pa/s
        """
        inc = inc or self.incidence(b)
        p = np.asarray(p, dtype=float)
        c2 = np.broadcast_to(np.asarray(c2, dtype=float), p.shape)
        if p.shape[0] != self.n_nodes:
            raise DimensionMismatchError(f"pressure has {p.shape[0]} entries, expected {self.n_nodes}")
        F = self._checked_flux(inc.M_d_pos @ (p / c2), inc.M_s @ b.pressure + inc.M_d @ p, inc)

        a2 = self.mixture.wave_speed_squared(b.alpha)
        b2 = self.mixture.wave_speed_squared(b.beta)
        inlet = np.abs(inc.Q_s_neg) @ a2 + np.abs(inc.Q_d_neg) @ c2
        gamma = np.concatenate([b2, c2[self.n_injection:]])
        return (inc.Q_d.T @ (inc.areas * inlet * F) - gamma * self.demand(b)) / inc.r

    def homogeneous_wave_speeds(self, scenario: Scenario) -> np.ndarray:
        """
        Squared wave speed per non-slack node for a scenario with one fixed composition.

        Raises:
            HeterogeneousMixtureError: If any supplied composition varies in time or
                the supplied compositions differ from each other
        """
        fractions = set()
        for node_id in scenario.graph.slack_ids + scenario.graph.injection_ids:
            profile = scenario.boundaries[node_id].h2_fraction
            if not profile.is_constant:
                raise HeterogeneousMixtureError(f"composition at '{node_id}' varies in time")
            fractions.add(float(profile.at(0.0)))
        if len(fractions) != 1:
            raise HeterogeneousMixtureError(f"supplied compositions differ: {sorted(fractions)}")
        return np.full(self.n_nodes, self.mixture.wave_speed_squared(fractions.pop()))

    # ---------------------------------------------
    # TRANSFORMS AND DIAGNOSTICS
    # ---------------------------------------------
    def to_pressure_density(self, x: np.ndarray) -> np.ndarray:
        rho1, rho2 = self.split(x)
        return np.concatenate([rho1 + rho2, self.gas.sigma1_sq * rho1 + self.gas.sigma2_sq * rho2])

    def from_pressure_density(self, y: np.ndarray) -> np.ndarray:
        rho, p = self.split(y)
        rho2 = (p - self.gas.sigma1_sq * rho) / (self.gas.sigma2_sq - self.gas.sigma1_sq)
        return np.concatenate([rho - rho2, rho2])

    def mass_balance(self, x: np.ndarray, b: BoundaryValues, inc: Optional[IncidenceSet] = None) -> np.ndarray:
        """Net total mass inflow per non-slack node, kg/s."""
        inc = inc or self.incidence(b)
        F = self.edge_flux(x, b, inc)
        return inc.Q_d.T @ (inc.areas * F) - self.demand(b)

    def density_jump(self, x: np.ndarray, b: BoundaryValues, inc: Optional[IncidenceSet] = None) -> np.ndarray:
        """Relative difference between the end densities of every refined edge."""
        inc = inc or self.incidence(b)
        rho1, rho2 = self.split(x)
        s1, s2 = self.slack_partials(b)
        rho_all = np.concatenate([s1 + s2, rho1 + rho2])
        outlet = np.maximum(inc.M, 0.0) @ rho_all
        inlet = -np.minimum(inc.M, 0.0) @ rho_all
        return np.abs(outlet - inlet) / np.minimum(outlet, inlet)

    def nodal_quantities(self,
                         x: np.ndarray,
                         b: BoundaryValues,
                         inc: Optional[IncidenceSet] = None) -> Dict[str, np.ndarray]:
        """
        Equivalent quantities at the non-slack nodes.

        Returns:
            Dict[str, np.ndarray]: p_mpa, rho, rho1, rho2, eta2, nu2 and energy_gj_s per node
        """
        inc = inc or self.incidence(b)
        rho1, rho2 = self.split(x)
        sample = self.mixture.partials_to_equivalents(rho1, rho2)
        F = self.edge_flux(x, b, inc)
        energy = self.mixture.nodal_energy(F, inc.areas, inc.Q_d_pos, sample.eta1, sample.eta2)
        return {
            "p_mpa": sample.p / PA_PER_MPA,
            "rho": sample.rho,
            "rho1": sample.rho1,
            "rho2": sample.rho2,
            "eta2": sample.eta2,
            "nu2": sample.nu2,
            "energy_gj_s": energy,
        }

    def slack_quantities(self, b: BoundaryValues) -> Dict[str, np.ndarray]:
        """Equivalent quantities at the slack nodes; energy is not defined there."""
        s1, s2 = self.slack_partials(b)
        sample = self.mixture.partials_to_equivalents(s1, s2)
        return {
            "p_mpa": sample.p / PA_PER_MPA,
            "rho": sample.rho,
            "rho1": sample.rho1,
            "rho2": sample.rho2,
            "eta2": sample.eta2,
            "nu2": sample.nu2,
            "energy_gj_s": np.full(self.n_slack, np.nan),
        }

    def jacobian_sparsity(self) -> sp.csr_matrix:
        """Sparsity pattern of the partial-density Jacobian from the graph adjacency."""
        index = {node_id: i for i, node_id in enumerate(self.graph.nonslack_ids)}
        rows, cols = list(range(self.n_nodes)), list(range(self.n_nodes))
        for pipe in self.graph.pipes:
            i, j = index.get(pipe.from_node), index.get(pipe.to_node)
            if i is not None and j is not None:
                rows += [i, j]
                cols += [j, i]
        block = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n_nodes, self.n_nodes))
        block.data[:] = 1.0
        return sp.bmat([[block, block], [block, block]], format="csr")
