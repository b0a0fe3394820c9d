from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple
import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline


@dataclass
class InterfaceCurve:
    """
    A class used to represent a response interface in the (omega*, kappa) plane.

    For every forcing frequency of the sweep grid the curve stores the critical
    amplitude factor kappa*. Classification always uses these raw grid values;
    ``smoothed`` only exists for plotting.

    Attributes
    ----------
    kind : str
        'mi:<quantity>', 'pi' or 'ci'.
    omega : Tuple[float, ...]
        Forcing frequencies of the grid, cyc/hr.
    kappa_star : Tuple[float, ...]
        Critical amplitude factor per frequency, in [0, 1].
    kappa_grid : Tuple[float, ...]
        Amplitude factors of the grid.
    threshold : Optional[float]
        Classification threshold (periodicity measure for 'pi', zero for 'ci').
    point_values : Dict[Tuple[float, float], object]
        Per-point metric, keyed by (omega, kappa).
    invalid_points : Tuple[Tuple[float, float, str], ...]
        Grid points whose simulation failed, with the failure message.
    """
    kind: str
    omega: Tuple[float, ...]
    kappa_star: Tuple[float, ...]
    kappa_grid: Tuple[float, ...]
    threshold: Optional[float] = None
    point_values: Dict[Tuple[float, float], object] = field(default_factory=dict)
    invalid_points: Tuple[Tuple[float, float, str], ...] = ()

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "omega_star": list(self.omega),
            "kappa_star": list(self.kappa_star),
            "kind": [self.kind] * len(self.omega),
            "threshold": [np.nan if self.threshold is None else self.threshold] * len(self.omega),
        })

    def smoothed(self, num: int = 201) -> pd.DataFrame:
        """Cubic-spline interpolation of the curve, clipped to [0, 1]."""
        omega = np.asarray(self.omega, dtype=float)
        fine = np.linspace(omega[0], omega[-1], num)
        if len(omega) < 2:
            return pd.DataFrame({"omega_star": omega, "kappa_star": list(self.kappa_star)})
        spline = CubicSpline(omega, np.asarray(self.kappa_star, dtype=float))
        return pd.DataFrame({"omega_star": fine, "kappa_star": np.clip(spline(fine), 0.0, 1.0)})
