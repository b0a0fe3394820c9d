import math
from dataclasses import dataclass
from typing import Tuple, Union
import numpy as np

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class Constant:
    """Time-invariant boundary value."""
    value: float

    def at(self, t_hr: ArrayLike) -> ArrayLike:
        if np.ndim(t_hr) == 0:
            return float(self.value)
        return np.full(np.shape(t_hr), float(self.value))

    @property
    def bounds(self) -> Tuple[float, float]:
        return (self.value, self.value)

    @property
    def mean_value(self) -> float:
        return self.value

    @property
    def is_constant(self) -> bool:
        return True


@dataclass(frozen=True)
class Sinusoid:
    """
    A class used to represent a sinusoidal boundary profile.

    The value at time t (hours) is mean * (1 + amplitude_factor * sin(2 pi frequency t + phase)).
    With a nonnegative mean and an amplitude factor in [0, 1] the profile never
    goes negative. A phase of pi expresses the 1 - sin(...) profiles of the
    case-study network.

    Attributes
    ----------
    mean : float
        Mean value of the profile.
    amplitude_factor : float
        Relative amplitude.
    frequency_cyc_hr : float
        Frequency in cycles per hour.
    phase_rad : float
        Phase offset in radians.
    """
    mean: float
    amplitude_factor: float
    frequency_cyc_hr: float
    phase_rad: float = 0.0

    def at(self, t_hr: ArrayLike) -> ArrayLike:
        return self.mean * (1.0 + self.amplitude_factor
                            * np.sin(2.0 * math.pi * self.frequency_cyc_hr * np.asarray(t_hr) + self.phase_rad))

    @property
    def bounds(self) -> Tuple[float, float]:
        swing = abs(self.mean * self.amplitude_factor)
        if self.frequency_cyc_hr == 0.0:
            value = float(self.at(0.0))
            return (value, value)
        return (self.mean - swing, self.mean + swing)

    @property
    def mean_value(self) -> float:
        return self.mean

    @property
    def is_constant(self) -> bool:
        return self.amplitude_factor == 0.0 or self.frequency_cyc_hr == 0.0


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear interpolation between (t_hr, value) knots, held constant outside them."""
    knots: Tuple[Tuple[float, float], ...]

    def at(self, t_hr: ArrayLike) -> ArrayLike:
        times = [knot[0] for knot in self.knots]
        values = [knot[1] for knot in self.knots]
        result = np.interp(t_hr, times, values)
        return float(result) if np.ndim(t_hr) == 0 else result

    @property
    def bounds(self) -> Tuple[float, float]:
        values = [knot[1] for knot in self.knots]
        return (min(values), max(values))

    @property
    def mean_value(self) -> float:
        return float(np.mean([knot[1] for knot in self.knots]))

    @property
    def is_constant(self) -> bool:
        return len({knot[1] for knot in self.knots}) == 1


Profile = Union[Constant, Sinusoid, PiecewiseLinear]
