from typing import Callable, Dict, List, Optional
import networkx as nx
import numpy as np
from scipy import optimize
from data.defs import STEADY_RELAXATION_HR, STEADY_TOLERANCE
from gasmix.core.error_handler import (
    ErrorHandler, InfeasibleDemandError, NonPositiveDensityError, NumericalError, SteadyStateError,
)
from gasmix.core.fv.system import FiniteVolumeSystem
from gasmix.core.models.incidence_set import IncidenceSet
from gasmix.core.models.scenario import BoundaryValues
from gasmix.core.scenario.boundary import BoundarySampler
from gasmix.core.timeint.integrator import Integrator, IntegratorConfig

# penalty residual returned to the root finder for states with nonpositive density
INADMISSIBLE_RESIDUAL = 1.0e6


class SteadyStateSolver:
    """
    A class used to find the time-zero steady state of a finite-volume system.

    The initial guess is built by walking the graph: demands are pushed
    upstream in reverse topological order (split evenly over parallel incoming
    edges), compositions are mixed downstream, and each edge's pressure drop is
    taken from the discrete flux law. On trees this guess already is the
    discrete steady state. The guess is then polished with scipy's root finder
    on variables scaled by the guess; if that stalls, a Levenberg-Marquardt
    attempt and a pseudo-transient relaxation with frozen boundaries follow.

    Attributes
    ----------
    system : FiniteVolumeSystem
        System whose right-hand side is driven to zero.
    sampler : BoundarySampler
        Sampler providing the time-zero boundary values.
    tolerance : float
        Largest accepted |d rho / dt|, kg/m^3 s.

    Methods
    -------
    steady_state()
        Returns the steady partial-density state at t = 0.
    initial_guess(b, inc)
        Returns the graph-walk estimate of the steady state.
    """

    def __init__(self,
                 system: FiniteVolumeSystem,
                 sampler: BoundarySampler,
                 tolerance: float = STEADY_TOLERANCE,
                 error_handler: ErrorHandler = None):
        self.system = system
        self.sampler = sampler
        self.tolerance = tolerance
        self.error_handler = error_handler or system.error_handler

    def steady_state(self) -> np.ndarray:
        """
        Solve rhs_partial_density(x, b(0)) = 0 for positive partial densities.

        Returns:
            np.ndarray: Stacked steady partial densities (rho1, rho2)

        Raises:
            InfeasibleDemandError: If the demand cannot be carried at positive pressure
            SteadyStateError: If no attempt reaches the tolerance
        """
        b = self.sampler.sample_boundary(0.0)
        inc = self.system.incidence(b)
        guess = self.initial_guess(b, inc)

        def residual(x: np.ndarray) -> np.ndarray:
            return self.system.rhs_partial_density(x, b, inc)

        best = guess
        best_residual = self._residual_norm(residual, guess)
        if best_residual <= self.tolerance:
            return guess

        attempts: List[Callable[[], Optional[np.ndarray]]] = [
            lambda: self._root(residual, guess, "hybr"),
            lambda: self._root(residual, guess, "lm"),
            lambda: self._root(residual, self._relax(b, inc, guess), "hybr"),
        ]
        for attempt in attempts:
            candidate = attempt()
            if candidate is None:
                continue
            value = self._residual_norm(residual, candidate)
            if value < best_residual:
                best, best_residual = candidate, value
            if best_residual <= self.tolerance:
                self.error_handler.log_debug(f"steady state residual {best_residual:.3e}", "steady_state")
                return best

        error = SteadyStateError(f"steady state residual {best_residual:.3e} above {self.tolerance:.1e}",
                                 residual=best_residual)
        self.error_handler.log_error(error, "steady_state", raise_exception=True)

    @staticmethod
    def _residual_norm(residual: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> float:
        if np.any(x <= 0):
            return np.inf
        try:
            return float(np.max(np.abs(residual(x))))
        except NonPositiveDensityError:
            return np.inf

    def _root(self, residual: Callable[[np.ndarray], np.ndarray], x0: np.ndarray, method: str) -> Optional[np.ndarray]:
        scale = np.where(x0 > 0, x0, 1.0)

        def scaled(u: np.ndarray) -> np.ndarray:
            try:
                return residual(u * scale)
            except NonPositiveDensityError:
                return np.full(u.shape, INADMISSIBLE_RESIDUAL)

        options = {"xtol": 1e-14}
        if method == "lm":
            options["ftol"] = 1e-15
        try:
            sol = optimize.root(scaled, np.ones_like(x0), method=method, options=options)
        except (ValueError, FloatingPointError) as e:
            self.error_handler.log_warning(f"root ({method}) failed: {e}", "steady_state")
            return None
        self.error_handler.log_debug(f"root ({method}): {sol.message}", "steady_state")
        return sol.x * scale

    def _relax(self, b: BoundaryValues, inc: IncidenceSet, x0: np.ndarray) -> np.ndarray:
        """Integrate with the time-zero boundary frozen and return the final state."""
        integrator = Integrator(IntegratorConfig(method="BDF", samples=1), self.error_handler)
        try:
            _, samples = integrator.integrate(
                lambda t, x: self.system.rhs_partial_density(x, b, inc),
                x0,
                STEADY_RELAXATION_HR,
                jac_sparsity=self.system.jacobian_sparsity(),
            )
        except NumericalError as e:
            self.error_handler.log_warning(f"relaxation failed: {e}", "steady_state")
            return x0
        return samples[-1]

    def initial_guess(self, b: BoundaryValues, inc: Optional[IncidenceSet] = None) -> np.ndarray:
        """
        Estimate the steady state by walking the graph.

        Args:
            b: Boundary values at t = 0
            inc: Incidence set for b

        Returns:
            np.ndarray: Stacked partial densities (rho1, rho2)

        Raises:
            InfeasibleDemandError: If an edge cannot carry its share of the demand
        """
        system = self.system
        graph = system.graph
        inc = inc or system.incidence(b)
        index = graph.node_index
        edge_index = {pipe.id: k for k, pipe in enumerate(graph.pipes)}
        demand = dict(zip(graph.nonslack_ids, system.demand(b)))
        inflow = dict(zip(graph.injection_ids, b.inflow))
        beta = dict(zip(graph.injection_ids, b.beta))

        g = system.builder.to_networkx(graph)
        try:
            order = list(nx.topological_sort(g))
        except nx.NetworkXUnfeasible:
            reached = [v for s in graph.slack_ids for v in nx.bfs_tree(g, s)]
            order = list(dict.fromkeys(graph.slack_ids + reached + graph.node_ids))
            self.error_handler.log_debug("cyclic network: using breadth-first order for the guess", "initial_guess")

        flow: Dict[str, float] = {}
        for node_id in reversed(order):
            if node_id in graph.slack_ids:
                continue
            downstream = sum(flow.get(pipe.id, 0.0) for pipe in graph.outgoing(node_id))
            incoming = graph.incoming(node_id)
            share = max(demand[node_id] + downstream, 0.0) / len(incoming)
            for pipe in incoming:
                flow[pipe.id] = share

        p = {node_id: b.pressure[i] for i, node_id in enumerate(graph.slack_ids)}
        eta = {node_id: b.alpha[i] for i, node_id in enumerate(graph.slack_ids)}
        fallback_eta = float(np.mean(b.alpha))
        for node_id in order:
            if node_id in p:
                continue
            incoming = [pipe for pipe in graph.incoming(node_id) if pipe.from_node in p]
            mass = sum(flow[pipe.id] for pipe in incoming) + inflow.get(node_id, 0.0)
            h2 = sum(flow[pipe.id] * eta[pipe.from_node] for pipe in incoming) + inflow.get(node_id, 0.0) * beta.get(node_id, 0.0)
            eta[node_id] = h2 / mass if mass > 0 else fallback_eta
            c2 = system.mixture.wave_speed_squared(eta[node_id])

            candidates = []
            for pipe in incoming:
                try:
                    candidates.append(self._outlet_pressure(
                        inc, edge_index[pipe.id], index[pipe.from_node], index[node_id],
                        p[pipe.from_node], flow[pipe.id], c2))
                except InfeasibleDemandError as e:
                    self.error_handler.log_error(
                        InfeasibleDemandError(f"{e} ('{pipe.id}')"), "initial_guess", raise_exception=True)
            p[node_id] = min(candidates) if candidates else float(np.mean(b.pressure))

        pressures = np.array([p[node_id] for node_id in graph.nonslack_ids])
        fractions = np.array([eta[node_id] for node_id in graph.nonslack_ids])
        rho1, rho2 = system.mixture.partials_from_pressure_fraction(pressures, fractions)
        return np.concatenate([rho1, rho2])

    @staticmethod
    def _outlet_pressure(inc: IncidenceSet, k: int, tail: int, head: int, p_tail: float, mass_flow: float,
                         c2: float) -> float:
        """Larger root of mu_out^2 p^2 - mu_out mu_in p_tail p + (F c / Lambda)^2 = 0."""
        mu_in, mu_out = -inc.M[k, tail], inc.M[k, head]
        flux = mass_flow / inc.areas[k]
        drop = (flux / inc.friction_coefficients[k]) ** 2 * c2
        boosted = mu_out * mu_in * p_tail
        discriminant = boosted ** 2 - 4.0 * mu_out ** 2 * drop
        if discriminant < 0:
            raise InfeasibleDemandError(f"demand of {mass_flow:.4g} kg/s exceeds the edge capacity")
        return (boosted + np.sqrt(discriminant)) / (2.0 * mu_out ** 2)
