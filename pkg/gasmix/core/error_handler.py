import logging
from typing import Optional


class GasMixError(Exception):
    """Base class for every failure raised by the simulator."""


class InputError(GasMixError):
    """Invalid user input: scenario documents, graphs, grids or CLI arguments."""


class ValidationError(InputError):
    """Structural problem with a network graph."""


class ScenarioSchemaError(InputError):
    """Scenario or sweep document does not follow the published schema."""


class MissingBoundaryError(InputError):
    """A node lacks the boundary profiles its role requires."""


class UnknownNodeError(InputError):
    """A document references a node or pipe id that does not exist."""


class HorizonError(InputError):
    """Nonpositive horizon, or a sample time outside [0, T]."""


class ControlRatioError(InputError):
    """Compressor or regulator ratio below one."""


class DimensionMismatchError(InputError):
    """Vector lengths disagree with the graph they describe."""


class GridMismatchError(InputError):
    """Two time series are not sampled on the same grid."""


class MixtureFractionError(InputError):
    """Concentration outside [0, 1]."""


class SolverSelectionError(InputError):
    """Requested solver cannot handle the scenario."""


class HeterogeneousMixtureError(InputError):
    """The isolated pressure system was requested for a varying mixture."""


class NumericalError(GasMixError):
    """A solver failed on otherwise valid input."""


class DegenerateMixtureError(NumericalError):
    """Both partial densities vanish, so fractions are undefined."""


class NonPositiveDensityError(NumericalError):
    """Total density reached zero or below."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class FlowReversalError(NumericalError):
    """An edge flux became nonpositive along a trajectory."""

    def __init__(self, message: str, t_hr: Optional[float] = None, edge: Optional[str] = None):
        super().__init__(message)
        self.t_hr = t_hr
        self.edge = edge


class SteadyStateError(NumericalError):
    """Steady-state solve did not reach tolerance."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class InfeasibleDemandError(NumericalError):
    """Demands would drive a nodal pressure to zero."""


class IntegrationError(NumericalError):
    """Time integration aborted."""

    def __init__(self, message: str, t_hr: Optional[float] = None):
        super().__init__(message)
        self.t_hr = t_hr


class UndefinedNormalizationError(NumericalError):
    """DFT of an all-zero signal cannot be normalized."""


class IdenticalInitialSamplesError(NumericalError):
    """Two trajectories start from the same sample, so the log ratio is undefined."""


class ErrorHandler:
    """
    A class used to centralize error handling and logging across the simulator.

    Every solver, sweep and command receives one of these so that progress,
    diagnostics and failures end up in a single named logger with a common
    format, whichever component produced them.

    Attributes
    ----------
    logger : logging.Logger
        A configured Python logging.Logger instance used for recording errors,
        warnings, progress and debug messages.

    Methods
    -------
    log_error(error: Exception, context: str, raise_exception: bool) -> None

        Logs an error message with context and optionally re-raises the exception.

    log_warning(message: str, context: str) -> None

        Logs a warning message with optional context information.

    log_info(message: str, context: str) -> None

        Logs an informational message with optional context.

    log_debug(message: str, context: str) -> None

        Logs a debug message with optional context.
    """

    def __init__(self, name: str = "gasmix", level: int = logging.INFO):
        """
        Initialize the error handler with a named logger.

        Args:
            name: Name for the logger instance
            level: Logging level applied to the logger
        """
        self.logger = logging.getLogger(name)
        self._configure_logger(level)

    def _configure_logger(self, level: int) -> None:
        """Configure the logger with formatting and a single console handler."""
        if not self.logger.handlers:
            formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

            console_handler = logging.StreamHandler()
            console_handler.setFormatter(formatter)

            self.logger.addHandler(console_handler)
        self.logger.setLevel(level)

    def log_error(self, error: Exception, context: str = "", raise_exception: bool = False) -> None:
        """
        Log an error with context and optionally raise it.

        Args:
            error: Exception to log
            context: Additional context about where the error occurred
            raise_exception: Whether to re-raise the exception after logging

        Raises:
            The original error if raise_exception is True
        """
        self.logger.error(f"Error in {context}: {str(error)}", exc_info=not isinstance(error, GasMixError))
        if raise_exception:
            raise error

    def log_warning(self, message: str, context: str = "") -> None:
        """
        Log a warning message with context.

        Args:
            message: Warning message
            context: Additional context about the warning
        """
        self.logger.warning(f"Warning in {context}: {message}")

    def log_info(self, message: str, context: str = "") -> None:
        """
        Log an informational message with context.

        Args:
            message: Info message
            context: Additional context about the information
        """
        self.logger.info(f"Info in {context}: {message}")

    def log_debug(self, message: str, context: str = "") -> None:
        """Log a debug message with context."""
        self.logger.debug(f"Debug in {context}: {message}")
