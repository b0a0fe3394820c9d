from dataclasses import dataclass
from typing import Union
import numpy as np
from data.defs import DEFAULT_R1, DEFAULT_R2, DEFAULT_SIGMA1, DEFAULT_SIGMA2_RATIO

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class GasPair:
    """
    A class used to represent the two constituents of the transported mixture.

    Constituent 1 is natural gas and constituent 2 is hydrogen. Both are ideal
    gases at a common temperature, so each is described by its isothermal wave
    speed, and each carries a heating value for energy-flow reporting.

    Attributes
    ----------
    sigma1 : float
        Natural gas wave speed, m/s.
    sigma2 : float
        Hydrogen wave speed, m/s. Must exceed sigma1.
    r1 : float
        Natural gas heating value, MJ/kg.
    r2 : float
        Hydrogen heating value, MJ/kg.
    """
    sigma1: float = DEFAULT_SIGMA1
    sigma2: float = DEFAULT_SIGMA1 * DEFAULT_SIGMA2_RATIO
    r1: float = DEFAULT_R1
    r2: float = DEFAULT_R2

    @property
    def sigma1_sq(self) -> float:
        return self.sigma1 ** 2

    @property
    def sigma2_sq(self) -> float:
        return self.sigma2 ** 2


@dataclass
class MixtureSample:
    """
    A class used to represent nodal mixture values derived from partial densities.

    Arrays are used elementwise, so a sample may describe one node or a whole
    vector of nodes.

    Attributes
    ----------
    rho1, rho2 : ArrayLike
        Partial densities, kg/m^3.
    rho : ArrayLike
        Total density, kg/m^3.
    p : ArrayLike
        Pressure, Pa.
    eta2 : ArrayLike
        Hydrogen mass fraction.
    nu2 : ArrayLike
        Hydrogen volumetric fraction.
    sigma : ArrayLike
        Local mixture wave speed, m/s.
    """
    rho1: ArrayLike
    rho2: ArrayLike
    rho: ArrayLike
    p: ArrayLike
    eta2: ArrayLike
    nu2: ArrayLike
    sigma: ArrayLike

    @property
    def eta1(self) -> ArrayLike:
        return 1.0 - self.eta2

    @property
    def p_mpa(self) -> ArrayLike:
        return self.p / 1.0e6
