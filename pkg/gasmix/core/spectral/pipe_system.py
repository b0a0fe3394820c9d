from typing import Dict, Tuple
import numpy as np
from data.defs import GJ_PER_MJ, PA_PER_MPA
from gasmix.core.error_handler import (
    DimensionMismatchError, ErrorHandler, InfeasibleDemandError, NonPositiveDensityError, SolverSelectionError,
)
from gasmix.core.gas.mixture import GasMixture
from gasmix.core.models.pipe import Pipe
from gasmix.core.models.scenario import BoundaryValues, Scenario
from gasmix.core.spectral.chebyshev import ChebGrid, cheb_diff_matrix


class SpectralPipeSystem:
    """
    A class used to evaluate the Chebyshev collocation system of a single pipe.

    The state holds both partial densities at grid points 1..N; the inlet point
    is pinned to the (compressed) slack composition and the outlet flux to the
    withdrawal. The momentum balance is pointwise in the flux and is solved in
    closed form at every evaluation.

    Attributes
    ----------
    pipe : Pipe
        The pipe being discretized.
    grid : ChebGrid
        Collocation grid and differentiation matrix.
    mixture : GasMixture
        Mixture algebra for the gas pair.

    Methods
    -------
    rhs_spectral(x, b)
        Time derivative of the interior partial densities.
    flux_profile(x, b)
        Mass flux at every grid point.
    steady_state(b)
        Steady state with uniform composition for the boundary values b.
    """

    def __init__(self, scenario: Scenario, order: int = None, error_handler: ErrorHandler = None):
        """
        Initialize the spectral system.

        Args:
            scenario: Single-pipe scenario
            order: Chebyshev order; the scenario setting when omitted
            error_handler: ErrorHandler instance

        Raises:
            SolverSelectionError: If the scenario is not a single pipe from a slack node to a withdrawal node
        """
        self.error_handler = error_handler or ErrorHandler()
        graph = scenario.graph
        if not graph.is_single_pipe:
            self.error_handler.log_error(
                SolverSelectionError("the spectral solver handles a single pipe from a slack to a withdrawal node"),
                "SpectralPipeSystem", raise_exception=True)
        self.pipe: Pipe = graph.pipes[0]
        self.inlet_id = self.pipe.from_node
        self.outlet_id = self.pipe.to_node
        self.mixture = GasMixture(scenario.gas, self.error_handler)
        self.grid: ChebGrid = cheb_diff_matrix(order or scenario.settings.spectral_order, self.pipe.length_km)
        self.momentum = 2.0 * self.pipe.diameter_m / self.pipe.friction

    @property
    def state_size(self) -> int:
        return 2 * self.grid.order

    def _ratios(self, b: BoundaryValues) -> Tuple[float, float]:
        return (b.compressor.get(self.pipe.id, self.pipe.compressor_ratio),
                b.regulator.get(self.pipe.id, self.pipe.regulator_ratio))

    def inlet_partials(self, b: BoundaryValues) -> Tuple[float, float]:
        """Pinned partial densities at x = 0 after the inlet compressor."""
        mu_in, _ = self._ratios(b)
        alpha = float(b.alpha[0])
        rho = mu_in * float(b.pressure[0]) / self.mixture.wave_speed_squared(alpha)
        return (1.0 - alpha) * rho, alpha * rho

    def outlet_flux(self, b: BoundaryValues) -> float:
        return float(b.outflow[0]) / self.pipe.area

    def full_partials(self, x: np.ndarray, b: BoundaryValues) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.state_size:
            raise DimensionMismatchError(f"state has {x.shape[0]} entries, expected {self.state_size}")
        s1, s2 = self.inlet_partials(b)
        N = self.grid.order
        return np.concatenate([[s1], x[:N]]), np.concatenate([[s2], x[N:]])

    def flux_profile(self, x: np.ndarray, b: BoundaryValues) -> np.ndarray:
        """
        Mass flux at every grid point, kg/m^2 s.

        phi_i = -sign(g_i) sqrt((2 D / lambda) rho_i |g_i|) with g = D p; the
        outlet value is the prescribed withdrawal flux.

        Raises:
            NonPositiveDensityError: If a total density is not positive
        """
        rho1, rho2 = self.full_partials(x, b)
        return self._flux(rho1, rho2, b)

    def _flux(self, rho1: np.ndarray, rho2: np.ndarray, b: BoundaryValues) -> np.ndarray:
        rho = rho1 + rho2
        bad = np.flatnonzero(~(rho > 0))
        if bad.size:
            raise NonPositiveDensityError(f"nonpositive density at grid point {bad[0]}", index=int(bad[0]))
        gas = self.mixture.gas
        g = self.grid.D @ (gas.sigma1_sq * rho1 + gas.sigma2_sq * rho2)
        phi = -np.sign(g) * np.sqrt(self.momentum * rho * np.abs(g))
        phi[-1] = self.outlet_flux(b)
        return phi

    def rhs_spectral(self, x: np.ndarray, b: BoundaryValues) -> np.ndarray:
        """
        Time derivative of the partial densities at grid points 1..N.

        Args:
            x: Stacked interior partial densities (rho1, rho2), kg/m^3
            b: Boundary values at the current time

        Returns:
            np.ndarray: Stacked time derivatives, kg/m^3 s
        """
        rho1, rho2 = self.full_partials(x, b)
        phi = self._flux(rho1, rho2, b)
        rho = rho1 + rho2
        D = self.grid.D
        return np.concatenate([
            -(D @ (rho1 / rho * phi))[1:],
            -(D @ (rho2 / rho * phi))[1:],
        ])

    def steady_state(self, b: BoundaryValues) -> np.ndarray:
        """
        Steady state for constant boundary values b with the inlet composition everywhere.

        Uses p(x)^2 = p_0^2 - lambda c^2 phi^2 x / D.

        Raises:
            InfeasibleDemandError: If the pressure would vanish inside the pipe
        """
        s1, s2 = self.inlet_partials(b)
        alpha = float(b.alpha[0])
        c2 = self.mixture.wave_speed_squared(alpha)
        p0 = (s1 + s2) * c2
        phi = self.outlet_flux(b)
        squared = p0 ** 2 - (self.pipe.friction * c2 * phi ** 2 / self.pipe.diameter_m) * self.grid.nodes[1:]
        if np.any(squared <= 0):
            self.error_handler.log_error(
                InfeasibleDemandError(f"outflow flux {phi:.4g} kg/m^2 s exceeds the pipe capacity"),
                "steady_state", raise_exception=True)
        rho = np.sqrt(squared) / c2
        return np.concatenate([(1.0 - alpha) * rho, alpha * rho])

    def outlet_quantities(self, x: np.ndarray, b: BoundaryValues) -> Dict[str, float]:
        """Equivalent quantities at the outlet node, after the outlet regulator."""
        _, mu_out = self._ratios(b)
        rho1, rho2 = self.full_partials(x, b)
        sample = self.mixture.partials_to_equivalents(rho1[-1] / mu_out, rho2[-1] / mu_out)
        gas = self.mixture.gas
        energy = float(b.outflow[0]) * (gas.r1 * sample.eta1 + gas.r2 * sample.eta2) * GJ_PER_MJ
        return {
            "p_mpa": float(sample.p) / PA_PER_MPA,
            "rho": float(sample.rho),
            "rho1": float(sample.rho1),
            "rho2": float(sample.rho2),
            "eta2": float(sample.eta2),
            "nu2": float(sample.nu2),
            "energy_gj_s": float(energy),
        }

    def inlet_quantities(self, b: BoundaryValues) -> Dict[str, float]:
        """Equivalent quantities at the slack node, before the inlet compressor."""
        mu_in, _ = self._ratios(b)
        s1, s2 = self.inlet_partials(b)
        sample = self.mixture.partials_to_equivalents(s1 / mu_in, s2 / mu_in)
        return {
            "p_mpa": float(sample.p) / PA_PER_MPA,
            "rho": float(sample.rho),
            "rho1": float(sample.rho1),
            "rho2": float(sample.rho2),
            "eta2": float(sample.eta2),
            "nu2": float(sample.nu2),
            "energy_gj_s": float("nan"),
        }
