import json
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List


@dataclass
class RunManifest:
    """
    A class used to record how a command produced its output files.

    Attributes
    ----------
    command : str
        Subcommand that ran.
    scenario_hash : str
        sha256 of the canonical scenario (or sweep) document.
    solver_settings : Dict[str, Any]
        Settings the solver actually used.
    code_version : str
        Package version.
    wall_time_s : float
        Elapsed wall time in seconds.
    outputs : List[str]
        Output file paths.
    diagnostics : Dict[str, Any]
        Run diagnostics (density jump monitor, invalid sweep points, ...).
    """
    command: str
    scenario_hash: str
    solver_settings: Dict[str, Any]
    code_version: str
    wall_time_s: float = 0.0
    outputs: List[str] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def missing_outputs(self) -> List[str]:
        """Listed outputs that do not exist or are empty."""
        return [path for path in self.outputs if not os.path.isfile(path) or os.path.getsize(path) == 0]

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(asdict(self), handle, indent=2, sort_keys=True, default=str)
