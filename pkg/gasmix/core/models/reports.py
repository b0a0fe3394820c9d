from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple
import numpy as np
import pandas as pd


@dataclass
class CrossingReport:
    """
    A class used to represent sign changes between two ordered solutions.

    Attributes
    ----------
    crossings : Dict[str, List[float]]
        Crossing times (hours) per ``<node>.<quantity>`` column.
    tolerances : Dict[str, float]
        Excursion tolerance used for each column.
    """
    crossings: Dict[str, List[float]] = field(default_factory=dict)
    tolerances: Dict[str, float] = field(default_factory=dict)

    @property
    def any_crossing(self) -> bool:
        return any(times for times in self.crossings.values())

    def crossed(self, node_id: str, quantity: str) -> bool:
        return bool(self.crossings.get(f"{node_id}.{quantity}"))

    def nodes_crossing(self, quantity: str) -> Set[str]:
        nodes = set()
        for column, times in self.crossings.items():
            node_id, _, name = column.rpartition(".")
            if name == quantity and times:
                nodes.add(node_id)
        return nodes

    def quantity_crossed(self, quantity: str) -> bool:
        return bool(self.nodes_crossing(quantity))

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for column in sorted(self.crossings):
            node_id, _, quantity = column.rpartition(".")
            for t_hr in self.crossings[column]:
                rows.append({"node": node_id, "quantity": quantity, "t_hr": t_hr})
        return pd.DataFrame(rows, columns=["node", "quantity", "t_hr"])


@dataclass
class Spectrum:
    """
    A class used to represent a normalized discrete Fourier transform of a tail signal.

    Attributes
    ----------
    frequencies : np.ndarray
        Sampling frequencies n / (tail duration), cyc/hr.
    values : np.ndarray
        Complex DFT values scaled so the largest modulus is one.
    measure : Optional[float]
        Mean squared modulus times 100, when computed.
    """
    frequencies: np.ndarray
    values: np.ndarray
    measure: Optional[float] = None

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "omega_cyc_hr": self.frequencies,
            "re": self.values.real,
            "im": self.values.imag,
            "modulus": self.modulus,
        })


@dataclass
class DivergenceReport:
    """
    A class used to represent the log divergence of two nearby trajectories.

    Attributes
    ----------
    psi : np.ndarray
        log |difference[n] / difference[0]|; NaN where the difference vanishes.
    initial_interval : Tuple[int, int]
        Inclusive sample indices (n0, n1).
    final_interval : Tuple[int, int]
        Inclusive sample indices (n2, n3).
    value : float
        The chaos measure: mean growth of psi between the intervals per sample.
    excluded : int
        Samples inside the intervals dropped because the difference was zero.
    """
    psi: np.ndarray
    initial_interval: Tuple[int, int]
    final_interval: Tuple[int, int]
    value: float
    excluded: int = 0
