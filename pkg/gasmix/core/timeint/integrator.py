import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple
import numpy as np
from scipy import integrate
from data.defs import (
    DEFAULT_ATOL, DEFAULT_METHOD, DEFAULT_RTOL, DEFAULT_SAMPLES, EXPLICIT_METHODS, IMPLICIT_METHODS, S_PER_HR,
)
from gasmix.core.error_handler import (
    ErrorHandler, IntegrationError, NumericalError, SolverSelectionError, ValidationError,
)
from gasmix.core.models.scenario import SimulationSettings

Rhs = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IntegratorConfig:
    """
    A class used to represent the integrator choice and its tolerances.

    Attributes
    ----------
    method : str
        BDF, Radau, LSODA (adaptive, through scipy) or RK4 (fixed step).
    rtol, atol : float
        Adaptive tolerances.
    samples : int
        Number of output intervals N.
    max_step_s : float
        Upper bound on the adaptive step, seconds.
    fixed_step_s : Optional[float]
        Largest RK4 step; defaults to one output interval.
    """
    method: str = DEFAULT_METHOD
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    samples: int = DEFAULT_SAMPLES
    max_step_s: float = np.inf
    fixed_step_s: Optional[float] = None

    @classmethod
    def from_settings(cls, settings: SimulationSettings) -> "IntegratorConfig":
        return cls(
            method=settings.method,
            rtol=settings.rtol,
            atol=settings.atol,
            samples=settings.samples,
            max_step_s=np.inf if settings.max_step_hr is None else settings.max_step_hr * S_PER_HR,
            fixed_step_s=settings.fixed_step_s,
        )


class Integrator:
    """
    A class used to integrate a right-hand side over [0, T] onto a uniform output grid.

    Time is handled in seconds internally and reported in hours. The output
    grid has N + 1 samples with the last one exactly at T. Any failure of the
    right-hand side is reported with the time at which it happened.

    Methods
    -------
    integrate(rhs, y0, horizon_hr, jac_sparsity)
        Integrates and returns the output grid (hours) and samples.
    """

    def __init__(self, config: IntegratorConfig = None, error_handler: ErrorHandler = None):
        self.config = config or IntegratorConfig()
        self.error_handler = error_handler or ErrorHandler()
        if self.config.method not in IMPLICIT_METHODS + EXPLICIT_METHODS:
            raise SolverSelectionError(f"unknown integration method '{self.config.method}'")
        if self.config.samples < 1:
            raise ValidationError("samples must be at least one")

    def output_grid_hr(self, horizon_hr: float) -> np.ndarray:
        grid = np.linspace(0.0, horizon_hr, self.config.samples + 1)
        grid[-1] = horizon_hr
        return grid

    def integrate(self,
                  rhs: Rhs,
                  y0: np.ndarray,
                  horizon_hr: float,
                  jac_sparsity=None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Integrate dy/dt = rhs(t, y) with t in seconds.

        Args:
            rhs: Right-hand side taking time in seconds
            y0: Initial state
            horizon_hr: Horizon T in hours
            jac_sparsity: Optional Jacobian sparsity pattern for the implicit methods

        Returns:
            Tuple[np.ndarray, np.ndarray]: Output times in hours (N + 1) and samples (N + 1 x n)

        Raises:
            IntegrationError: If the integrator fails or the right-hand side raises
        """
        if horizon_hr <= 0:
            raise ValidationError("horizon must be positive")
        t_hr = self.output_grid_hr(horizon_hr)
        y0 = np.asarray(y0, dtype=float)
        last_t = [0.0]

        def tracked(t: float, y: np.ndarray) -> np.ndarray:
            last_t[0] = t
            return rhs(t, y)

        try:
            if self.config.method in EXPLICIT_METHODS:
                samples = self._rk4(tracked, y0, t_hr * S_PER_HR)
            else:
                samples = self._adaptive(tracked, y0, t_hr * S_PER_HR, jac_sparsity)
        except IntegrationError as e:
            self.error_handler.log_error(e, "integrate")
            raise
        except NumericalError as e:
            error = IntegrationError(f"{e} at t = {last_t[0] / S_PER_HR:.6g} hr", t_hr=last_t[0] / S_PER_HR)
            self.error_handler.log_error(error, "integrate")
            raise error from e

        bad_rows = np.flatnonzero(~np.all(np.isfinite(samples), axis=1))
        if bad_rows.size:
            error = IntegrationError(f"non-finite state at t = {t_hr[bad_rows[0]]:.6g} hr", t_hr=t_hr[bad_rows[0]])
            self.error_handler.log_error(error, "integrate", raise_exception=True)
        return t_hr, samples

    def _adaptive(self, rhs: Rhs, y0: np.ndarray, t_eval_s: np.ndarray, jac_sparsity) -> np.ndarray:
        options = {}
        if jac_sparsity is not None and self.config.method in ("BDF", "Radau"):
            options["jac_sparsity"] = jac_sparsity
        sol = integrate.solve_ivp(
            rhs,
            (0.0, t_eval_s[-1]),
            y0,
            method=self.config.method,
            t_eval=t_eval_s,
            rtol=self.config.rtol,
            atol=self.config.atol,
            max_step=self.config.max_step_s,
            **options,
        )
        if not sol.success:
            t_fail = sol.t[-1] / S_PER_HR if sol.t.size else 0.0
            raise IntegrationError(f"{self.config.method} failed at t = {t_fail:.6g} hr: {sol.message}", t_hr=t_fail)
        self.error_handler.log_debug(f"{self.config.method}: {sol.nfev} rhs evaluations", "integrate")
        return sol.y.T

    def _rk4(self, rhs: Rhs, y0: np.ndarray, t_eval_s: np.ndarray) -> np.ndarray:
        interval = t_eval_s[1] - t_eval_s[0]
        step = self.config.fixed_step_s or interval
        substeps = max(1, math.ceil(interval / step - 1e-12))

        samples = np.empty((t_eval_s.size, y0.size))
        samples[0] = y0
        y = y0.copy()
        for n in range(1, t_eval_s.size):
            t = t_eval_s[n - 1]
            h = (t_eval_s[n] - t) / substeps
            for _ in range(substeps):
                k1 = rhs(t, y)
                k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
                k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
                k4 = rhs(t + h, y + h * k3)
                y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                t += h
            samples[n] = y
        return samples
