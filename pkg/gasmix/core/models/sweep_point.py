from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Optional

STATUS_OK = "ok"
STATUS_INVALID = "invalid"

# rounding applied to grid coordinates before they are used as cache keys
KEY_DECIMALS = 9


@dataclass
class SweepPoint:
    """
    A class used to represent the outcome of one (omega*, kappa) grid point of an interface sweep.

    Attributes
    ----------
    kind : str
        Sweep kind: 'mi', 'pi' or 'ci'.
    scenario_hash : str
        Hash of the sweep template and parameters the point belongs to.
    omega : float
        Forcing frequency, cyc/hr.
    kappa : float
        Amplitude factor.
    status : str
        'ok' or 'invalid'.
    value : Any
        Per-point metric: crossing flags per quantity for 'mi', the periodicity
        measure for 'pi', the chaos measure for 'ci'.
    message : Optional[str]
        Failure message for invalid points.
    created : datetime
        When the point was computed.
    """
    kind: str
    scenario_hash: str
    omega: float
    kappa: float
    status: str = STATUS_OK
    value: Any = None
    message: Optional[str] = None
    created: datetime = field(default_factory=datetime.now)

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    @property
    def key(self):
        return (self.kind, self.scenario_hash, round(self.omega, KEY_DECIMALS), round(self.kappa, KEY_DECIMALS))
