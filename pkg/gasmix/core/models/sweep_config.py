from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple
from data.defs import (
    DEFAULT_CHAOS_FINAL_INTERVAL, DEFAULT_CHAOS_INITIAL_INTERVAL, DEFAULT_PERIODICITY_THRESHOLD,
    DEFAULT_TAIL_START, MI_QUANTITIES,
)

SWEEP_KINDS = ("mi", "pi", "ci")
CROSSING_NODE_MODES = ("outlet", "all")


@dataclass(frozen=True)
class SweepConfig:
    """
    A class used to represent an interface sweep over the (omega*, kappa) plane.

    The template is a single-pipe scenario. At every grid point the slack
    hydrogen fraction becomes mean * (1 + kappa sin(2 pi omega* t)) and the
    outlet withdrawal a constant flux taken from ``outflow_fluxes``.

    Attributes
    ----------
    kind : str
        'mi', 'pi' or 'ci'.
    template_path : str
        Scenario file of the pipe.
    omega : Tuple[float, ...]
        Forcing frequencies, cyc/hr.
    kappa : Tuple[float, ...]
        Amplitude factors, ascending.
    outflow_fluxes : Tuple[float, ...]
        Withdrawal fluxes in kg/m^2 s: three ordered values for 'mi', one for
        'pi', and (boundary, perturbed initial) for 'ci'.
    quantities : Tuple[str, ...]
        Quantities checked for crossings ('mi').
    crossing_nodes : str
        'outlet' or 'all' physical non-slack nodes ('mi').
    threshold : float
        Periodicity measure threshold ('pi').
    tail_start : float
        Start of the spectral tail as a fraction of the horizon ('pi').
    initial_interval, final_interval : Tuple[float, float]
        Chaos measure intervals as fractions of N ('ci').
    horizon_hr, samples : Optional
        Overrides of the template simulation settings.
    solver : Optional[str]
        Override of the template solver.
    """
    kind: str
    template_path: str
    omega: Tuple[float, ...]
    kappa: Tuple[float, ...]
    outflow_fluxes: Tuple[float, ...]
    quantities: Tuple[str, ...] = MI_QUANTITIES
    crossing_nodes: str = "outlet"
    threshold: float = DEFAULT_PERIODICITY_THRESHOLD
    tail_start: float = DEFAULT_TAIL_START
    initial_interval: Tuple[float, float] = DEFAULT_CHAOS_INITIAL_INTERVAL
    final_interval: Tuple[float, float] = DEFAULT_CHAOS_FINAL_INTERVAL
    horizon_hr: Optional[float] = None
    samples: Optional[int] = None
    solver: Optional[str] = None

    def hash_fields(self) -> Dict[str, Any]:
        """Settings that change per-point results; the grid, paths and threshold are excluded."""
        fields = asdict(self)
        for key in ("template_path", "omega", "kappa", "threshold"):
            fields.pop(key)
        return {key: list(value) if isinstance(value, tuple) else value for key, value in fields.items()}
