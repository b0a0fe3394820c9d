from dataclasses import dataclass
import numpy as np
from data.defs import M_PER_KM
from gasmix.core.error_handler import ValidationError


@dataclass(frozen=True)
class ChebGrid:
    """
    A class used to represent Chebyshev collocation points on a pipe and their differentiation matrix.

    Attributes
    ----------
    order : int
        Polynomial order N; the grid has N + 1 points.
    length_m : float
        Pipe length in m.
    nodes : np.ndarray
        Points x_i = (l/2)(1 - cos(i pi / N)), from inlet (x_0 = 0) to outlet (x_N = l), m.
    D : np.ndarray
        (N + 1) x (N + 1) matrix mapping nodal values to nodal x-derivatives, 1/m.
    """
    order: int
    length_m: float
    nodes: np.ndarray
    D: np.ndarray

    @property
    def size(self) -> int:
        return self.order + 1


def cheb_diff_matrix(order: int, length_km: float) -> ChebGrid:
    """
    Build the Chebyshev-Gauss-Lobatto grid of a pipe and its differentiation matrix.

    Args:
        order: Polynomial order N, at least 2
        length_km: Pipe length in km

    Returns:
        ChebGrid: Nodes in metres and the matrix D

    Raises:
        ValidationError: If the order is below 2 or the length is not positive
    """
    if order < 2:
        raise ValidationError(f"Chebyshev order must be at least 2, got {order}")
    if length_km <= 0:
        raise ValidationError("pipe length must be positive")

    n = np.arange(order + 1)
    t = np.cos(np.pi * n / order)
    c = np.hstack((2.0, np.ones(order - 1), 2.0)) * (-1.0) ** n
    T = np.tile(t, (order + 1, 1)).T
    dT = T - T.T
    D = np.outer(c, 1.0 / c) / (dT + np.eye(order + 1))
    # diagonal from row sums so that constants are annihilated
    D = D - np.diag(D.sum(axis=1))

    length_m = length_km * M_PER_KM
    # x = (l/2)(1 - t) reverses the orientation, so d/dx = -(2/l) d/dt
    return ChebGrid(
        order=order,
        length_m=length_m,
        nodes=0.5 * length_m * (1.0 - t),
        D=-(2.0 / length_m) * D,
    )
