from dataclasses import dataclass, field
from typing import Dict, List
import numpy as np
import pandas as pd

CSV_FLOAT_FORMAT = "%.10g"


@dataclass
class TimeSeries:
    """
    A class used to represent sampled nodal trajectories on a uniform hour grid.

    The frame is indexed by ``t_hr`` and has one column per nodal quantity,
    named ``<node>.<quantity>``.

    Attributes
    ----------
    frame : pd.DataFrame
        Sampled values.
    diagnostics : Dict[str, float]
        Run diagnostics such as the largest refined-edge density jump.
    """
    frame: pd.DataFrame
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @staticmethod
    def column_name(node_id: str, quantity: str) -> str:
        return f"{node_id}.{quantity}"

    @property
    def t_hr(self) -> np.ndarray:
        return self.frame.index.to_numpy(dtype=float)

    @property
    def columns(self) -> List[str]:
        return list(self.frame.columns)

    def column(self, node_id: str, quantity: str) -> np.ndarray:
        return self.frame[self.column_name(node_id, quantity)].to_numpy(dtype=float)

    def same_grid(self, other: "TimeSeries") -> bool:
        return len(self.frame.index) == len(other.frame.index) and np.array_equal(self.t_hr, other.t_hr)

    def to_csv(self, path: str) -> None:
        self.frame.to_csv(path, index=True, index_label="t_hr", float_format=CSV_FLOAT_FORMAT)

    @classmethod
    def from_arrays(cls, t_hr: np.ndarray, columns: Dict[str, np.ndarray]) -> "TimeSeries":
        index = pd.Index(np.asarray(t_hr, dtype=float), name="t_hr")
        return cls(frame=pd.DataFrame(columns, index=index))
