from typing import Tuple
import numpy as np
from data.defs import DEFAULT_CHAOS_FINAL_INTERVAL, DEFAULT_CHAOS_INITIAL_INTERVAL
from gasmix.core.error_handler import (
    ErrorHandler, GridMismatchError, IdenticalInitialSamplesError, NumericalError, ValidationError,
)
from gasmix.core.models.reports import DivergenceReport

Interval = Tuple[float, float]


class ChaosAnalyzer:
    """
    A class used to measure the divergence of two trajectories started close together.

    Psi[n] = log |d[n] / d[0]| with d = psi2 - psi1. The measure is the growth
    of the mean of Psi from an early interval to a late one, divided by the
    sample distance between the end of the early interval and the start of
    the late one. Positive values mean the trajectories separate on average.

    Attributes
    ----------
    initial_interval : Tuple[float, float]
        Early interval as fractions of N.
    final_interval : Tuple[float, float]
        Late interval as fractions of N.
    error_handler : ErrorHandler
        An instance of the `ErrorHandler` for logging degenerate inputs.
    """

    def __init__(self,
                 initial_interval: Interval = DEFAULT_CHAOS_INITIAL_INTERVAL,
                 final_interval: Interval = DEFAULT_CHAOS_FINAL_INTERVAL,
                 error_handler: ErrorHandler = None):
        self.initial_interval = tuple(initial_interval)
        self.final_interval = tuple(final_interval)
        self.error_handler = error_handler or ErrorHandler()

    def intervals(self, samples: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        """Inclusive index intervals for a grid with N = samples - 1."""
        N = samples - 1
        n0, n1 = (int(round(f * N)) for f in self.initial_interval)
        n2, n3 = (int(round(f * N)) for f in self.final_interval)
        if not (0 <= n0 < n1 < n2 < n3 <= N):
            raise ValidationError(f"intervals must satisfy 0 <= n0 < n1 < n2 < n3 <= N, got {(n0, n1, n2, n3)}")
        return (n0, n1), (n2, n3)

    def chaos_measure(self, psi1: np.ndarray, psi2: np.ndarray) -> DivergenceReport:
        """
        Chaos measure of two trajectories on the same grid.

        Samples inside the intervals where the trajectories coincide are
        dropped from the interval means and counted in ``excluded``.

        Raises:
            GridMismatchError: If the trajectories have different lengths
            IdenticalInitialSamplesError: If the trajectories start at the same value
        """
        psi1 = np.asarray(psi1, dtype=float)
        psi2 = np.asarray(psi2, dtype=float)
        if psi1.shape != psi2.shape:
            self.error_handler.log_error(GridMismatchError("trajectories have different lengths"),
                                         "chaos_measure", raise_exception=True)
        (n0, n1), (n2, n3) = self.intervals(psi1.size)
        diff = psi2 - psi1
        if diff[0] == 0:
            self.error_handler.log_error(IdenticalInitialSamplesError("trajectories start at the same value"),
                                         "chaos_measure", raise_exception=True)

        psi = np.full(diff.shape, np.nan)
        nonzero = diff != 0
        psi[nonzero] = np.log(np.abs(diff[nonzero] / diff[0]))

        early, late = psi[n0:n1 + 1], psi[n2:n3 + 1]
        excluded = int(np.count_nonzero(np.isnan(early)) + np.count_nonzero(np.isnan(late)))
        if np.all(np.isnan(early)) or np.all(np.isnan(late)):
            self.error_handler.log_error(NumericalError("trajectories coincide over a whole interval"),
                                         "chaos_measure", raise_exception=True)
        if excluded:
            self.error_handler.log_warning(f"{excluded} coinciding samples dropped", "chaos_measure")

        value = (np.nanmean(late) - np.nanmean(early)) / (n2 - n1)
        return DivergenceReport(
            psi=psi,
            initial_interval=(n0, n1),
            final_interval=(n2, n3),
            value=float(value),
            excluded=excluded,
        )
