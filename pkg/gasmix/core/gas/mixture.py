from typing import Tuple, Union
import numpy as np
from data.defs import GJ_PER_MJ
from gasmix.core.error_handler import (
    DegenerateMixtureError, DimensionMismatchError, ErrorHandler, MixtureFractionError,
)
from gasmix.core.models.gas_pair import GasPair, MixtureSample

ArrayLike = Union[float, np.ndarray]


class GasMixture:
    """
    A class used to convert between the equivalent descriptions of a two-gas mixture.

    Partial densities are the fundamental state. Every other nodal quantity
    (total density, pressure, mass and volumetric fraction, wave speed, energy
    flow) is derived here from the ideal-gas relation p = sigma1^2 rho1 + sigma2^2 rho2.
    All methods work elementwise on scalars or numpy arrays and keep no state.

    Attributes
    ----------
    gas : GasPair
        Wave speeds and heating values of the two constituents.
    error_handler : ErrorHandler
        An instance of the `ErrorHandler` for logging conversion failures.

    Methods
    -------
    partials_to_equivalents(rho1, rho2)
        Derives density, pressure, fractions and wave speed from partial densities.
    partials_from_pressure_fraction(p, eta2)
        Recovers partial densities from pressure and hydrogen mass fraction.
    partials_from_density_volumetric(rho, nu2)
        Recovers partial densities from total density and hydrogen volumetric fraction.
    mixture_wave_speed(eta2)
        Wave speed of a mixture with the given hydrogen mass fraction.
    volumetric_fraction(eta2)
        Hydrogen volumetric fraction for a given mass fraction.
    nodal_energy(inlet_flux, areas, Q_d_pos, eta1, eta2)
        Energy flow into each non-slack node in GJ/s.
    """

    def __init__(self, gas: GasPair = None, error_handler: ErrorHandler = None):
        """
        Initialize the mixture algebra.

        Args:
            gas: GasPair with wave speeds and heating values
            error_handler: ErrorHandler instance

        Raises:
            MixtureFractionError: If the wave speeds or heating values are not ordered and positive
        """
        self.gas = gas or GasPair()
        self.error_handler = error_handler or ErrorHandler()
        if not (self.gas.sigma2 > self.gas.sigma1 > 0):
            raise MixtureFractionError("wave speeds must satisfy sigma2 > sigma1 > 0")
        if not (self.gas.r1 > 0 and self.gas.r2 > 0):
            raise MixtureFractionError("heating values must be positive")

    def partials_to_equivalents(self, rho1: ArrayLike, rho2: ArrayLike) -> MixtureSample:
        """
        Derive every equivalent quantity from partial densities.

        Args:
            rho1: Natural gas partial density, kg/m^3
            rho2: Hydrogen partial density, kg/m^3

        Returns:
            MixtureSample: Derived nodal values

        Raises:
            DegenerateMixtureError: If a partial density is negative or both vanish
        """
        rho1 = np.asarray(rho1, dtype=float)
        rho2 = np.asarray(rho2, dtype=float)
        rho = rho1 + rho2
        if np.any(rho1 < 0) or np.any(rho2 < 0) or np.any(rho <= 0):
            self.error_handler.log_error(
                DegenerateMixtureError("partial densities must be nonnegative and not both zero"),
                "partials_to_equivalents", raise_exception=True)
        p = self.gas.sigma1_sq * rho1 + self.gas.sigma2_sq * rho2
        eta2 = rho2 / rho
        return MixtureSample(
            rho1=rho1,
            rho2=rho2,
            rho=rho,
            p=p,
            eta2=eta2,
            nu2=self.gas.sigma2_sq * rho2 / p,
            sigma=np.sqrt(p / rho),
        )

    def partials_from_pressure_fraction(self, p: ArrayLike, eta2: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        """Partial densities for pressure p (Pa) and hydrogen mass fraction eta2."""
        self._check_fraction(eta2, "partials_from_pressure_fraction")
        rho = np.asarray(p, dtype=float) / self.wave_speed_squared(eta2)
        eta2 = np.asarray(eta2, dtype=float)
        return (1.0 - eta2) * rho, eta2 * rho

    def partials_from_density_volumetric(self, rho: ArrayLike, nu2: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        """Partial densities for total density rho (kg/m^3) and hydrogen volumetric fraction nu2."""
        self._check_fraction(nu2, "partials_from_density_volumetric")
        nu2 = np.asarray(nu2, dtype=float)
        # rho2 sigma2^2 / (rho1 sigma1^2 + rho2 sigma2^2) = nu2 solved with rho1 + rho2 = rho
        weight2 = nu2 * self.gas.sigma1_sq
        weight1 = (1.0 - nu2) * self.gas.sigma2_sq
        eta2 = weight2 / (weight1 + weight2)
        rho = np.asarray(rho, dtype=float)
        return (1.0 - eta2) * rho, eta2 * rho

    def wave_speed_squared(self, eta2: ArrayLike) -> ArrayLike:
        eta2 = np.asarray(eta2, dtype=float)
        return self.gas.sigma1_sq * (1.0 - eta2) + self.gas.sigma2_sq * eta2

    def mixture_wave_speed(self, eta2: ArrayLike) -> ArrayLike:
        """
        Wave speed sqrt(sigma1^2 eta1 + sigma2^2 eta2) of the mixture.

        Raises:
            MixtureFractionError: If eta2 is outside [0, 1]
        """
        self._check_fraction(eta2, "mixture_wave_speed")
        return np.sqrt(self.wave_speed_squared(eta2))

    def volumetric_fraction(self, eta2: ArrayLike) -> ArrayLike:
        self._check_fraction(eta2, "volumetric_fraction")
        return self.gas.sigma2_sq * np.asarray(eta2, dtype=float) / self.wave_speed_squared(eta2)

    def nodal_energy(self,
                     inlet_flux: np.ndarray,
                     areas: np.ndarray,
                     Q_d_pos: np.ndarray,
                     eta1: np.ndarray,
                     eta2: np.ndarray) -> np.ndarray:
        """
        Energy carried into each non-slack node by its incoming pipes.

        Args:
            inlet_flux: Per-edge inlet mass flux, kg/m^2 s
            areas: Per-edge cross-sectional areas, m^2
            Q_d_pos: Signed outlet incidence of the non-slack block (E x Vd)
            eta1: Natural gas mass fraction per non-slack node
            eta2: Hydrogen mass fraction per non-slack node

        Returns:
            np.ndarray: Energy flow per non-slack node, GJ/s

        Raises:
            DimensionMismatchError: If vector lengths disagree with the incidence matrix
        """
        inlet_flux = np.asarray(inlet_flux, dtype=float)
        eta1 = np.asarray(eta1, dtype=float)
        eta2 = np.asarray(eta2, dtype=float)
        n_edges, n_nodes = Q_d_pos.shape
        if inlet_flux.shape[0] != n_edges or np.shape(areas)[0] != n_edges:
            raise DimensionMismatchError(f"expected {n_edges} edge values, got {inlet_flux.shape[0]}")
        if eta1.shape[0] != n_nodes or eta2.shape[0] != n_nodes:
            raise DimensionMismatchError(f"expected {n_nodes} nodal fractions")
        mass_in = np.abs(Q_d_pos).T @ (np.asarray(areas) * inlet_flux)
        return mass_in * (self.gas.r1 * eta1 + self.gas.r2 * eta2) * GJ_PER_MJ

    def _check_fraction(self, fraction: ArrayLike, context: str) -> None:
        fraction = np.asarray(fraction, dtype=float)
        if np.any(fraction < 0.0) or np.any(fraction > 1.0) or np.any(np.isnan(fraction)):
            self.error_handler.log_error(
                MixtureFractionError(f"fraction outside [0, 1]: {fraction}"), context, raise_exception=True)
