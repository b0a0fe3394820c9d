from typing import Callable, List, Tuple
import numpy as np
from gasmix.core.error_handler import ErrorHandler
from gasmix.core.fv.system import FiniteVolumeSystem
from gasmix.core.models.scenario import BoundaryValues

JACOBIAN_STEP = 1.0e-6


class JacobianInspector:
    """
    A class used to inspect the sign structure of the finite-volume Jacobians.

    Jacobians are taken by central differences with step 1e-6 (1 + |x_i|).
    The isolated pressure system of a homogeneous mixture has a Metzler
    Jacobian (nonnegative off-diagonal entries), which makes it monotone;
    the total density and pressure system of a heterogeneous mixture in
    general does not.

    Methods
    -------
    jacobian(fun, x)
        Central-difference Jacobian of any vector function.
    is_metzler(J, tol)
        Whether all off-diagonal entries are at least -tol.
    negative_off_diagonals(J, tol)
        Positions of off-diagonal entries below -tol.
    """

    def __init__(self, system: FiniteVolumeSystem, error_handler: ErrorHandler = None):
        self.system = system
        self.error_handler = error_handler or system.error_handler

    @staticmethod
    def jacobian(fun: Callable[[np.ndarray], np.ndarray], x: np.ndarray, step: float = JACOBIAN_STEP) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        columns = []
        for i in range(x.size):
            h = step * (1.0 + abs(x[i]))
            forward, backward = x.copy(), x.copy()
            forward[i] += h
            backward[i] -= h
            columns.append((fun(forward) - fun(backward)) / (2.0 * h))
        return np.column_stack(columns)

    def isolated_pressure_jacobian(self, p: np.ndarray, b: BoundaryValues, c2: np.ndarray) -> np.ndarray:
        inc = self.system.incidence(b)
        return self.jacobian(lambda v: self.system.rhs_isolated_pressure(v, b, c2, inc), p)

    def pressure_density_jacobian(self, y: np.ndarray, b: BoundaryValues) -> np.ndarray:
        inc = self.system.incidence(b)
        return self.jacobian(lambda v: self.system.rhs_pressure_density(v, b, inc), y)

    def partial_density_jacobian(self, x: np.ndarray, b: BoundaryValues) -> np.ndarray:
        inc = self.system.incidence(b)
        return self.jacobian(lambda v: self.system.rhs_partial_density(v, b, inc), x)

    @staticmethod
    def negative_off_diagonals(J: np.ndarray, tol: float = 0.0) -> List[Tuple[int, int]]:
        off = J - np.diag(np.diag(J))
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(off < -tol))]

    @classmethod
    def is_metzler(cls, J: np.ndarray, tol: float = 0.0) -> bool:
        return not cls.negative_off_diagonals(J, tol)
