from typing import List, Optional
import numpy as np
from data.defs import DEFAULT_TOL_CROSS_FACTOR
from gasmix.core.error_handler import ErrorHandler, GridMismatchError
from gasmix.core.models.reports import CrossingReport
from gasmix.core.models.time_series import TimeSeries


class CrossingDetector:
    """
    A class used to detect sign changes between two sampled solutions.

    A crossing is recorded when the difference a - b leaves the band
    [-tol, tol] on one side and next leaves it on the other side. Touching
    the band and returning does not count. The crossing time is the linearly
    interpolated zero of the difference between the two excursions.

    Attributes
    ----------
    tol_factor : float
        Band half-width as a fraction of the larger trajectory range of a column.
    error_handler : ErrorHandler
        An instance of the `ErrorHandler` for logging grid problems.

    Methods
    -------
    detect_crossings(a, b, tol_cross)
        Returns the crossing times of every shared column.
    crossing_times(t, diff, tol)
        Returns the crossing times of one difference signal.
    """

    def __init__(self, tol_factor: float = DEFAULT_TOL_CROSS_FACTOR, error_handler: ErrorHandler = None):
        self.tol_factor = tol_factor
        self.error_handler = error_handler or ErrorHandler()

    def detect_crossings(self, a: TimeSeries, b: TimeSeries, tol_cross: Optional[float] = None) -> CrossingReport:
        """
        Compare two solutions column by column.

        Args:
            a: First solution
            b: Second solution, on the same grid and with the same columns
            tol_cross: Absolute band half-width; relative to each column's range when omitted

        Returns:
            CrossingReport: Crossing times and the tolerance used per column

        Raises:
            GridMismatchError: If the time grids or the columns differ
        """
        if not a.same_grid(b):
            self.error_handler.log_error(GridMismatchError("solutions are sampled on different grids"),
                                         "detect_crossings", raise_exception=True)
        if set(a.columns) != set(b.columns):
            self.error_handler.log_error(GridMismatchError("solutions carry different columns"),
                                         "detect_crossings", raise_exception=True)

        report = CrossingReport()
        t = a.t_hr
        for column in a.columns:
            va = a.frame[column].to_numpy(dtype=float)
            vb = b.frame[column].to_numpy(dtype=float)
            if tol_cross is None:
                spread = max(np.nanmax(va) - np.nanmin(va), np.nanmax(vb) - np.nanmin(vb))
                tol = self.tol_factor * spread
            else:
                tol = tol_cross
            report.tolerances[column] = float(tol)
            report.crossings[column] = self.crossing_times(t, va - vb, tol)
        return report

    @staticmethod
    def crossing_times(t: np.ndarray, diff: np.ndarray, tol: float) -> List[float]:
        if np.all(np.isnan(diff)):
            return []
        state = np.where(diff > tol, 1, np.where(diff < -tol, -1, 0))
        excursions = np.flatnonzero(state)
        if excursions.size < 2:
            return []
        signs = state[excursions]
        times = []
        for i in np.flatnonzero(signs[1:] != signs[:-1]):
            start, stop = excursions[i], excursions[i + 1]
            segment = diff[start:stop + 1]
            # first sample pair in the gap that brackets zero
            k = int(np.flatnonzero(segment[:-1] * segment[1:] <= 0)[0])
            d0, d1 = segment[k], segment[k + 1]
            t0, t1 = t[start + k], t[start + k + 1]
            times.append(float(t0 if d0 == d1 else t0 + (t1 - t0) * d0 / (d0 - d1)))
        return times
