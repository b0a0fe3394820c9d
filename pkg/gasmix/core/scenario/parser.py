import hashlib
from dataclasses import fields, replace
from typing import Any, Dict, List, Mapping, Optional
import yaml
from data.defs import DEFAULT_R1, DEFAULT_R2, DEFAULT_SIGMA1, DEFAULT_SIGMA2_RATIO, EXPLICIT_METHODS, IMPLICIT_METHODS
from gasmix.core.error_handler import (
    ControlRatioError, ErrorHandler, GasMixError, HorizonError, MissingBoundaryError,
    MixtureFractionError, ScenarioSchemaError, UnknownNodeError,
)
from gasmix.core.models.gas_pair import GasPair
from gasmix.core.models.network_graph import NetworkGraph
from gasmix.core.models.pipe import NodeRole, Pipe, RoleKind
from gasmix.core.models.profile import Constant, PiecewiseLinear, Profile, Sinusoid
from gasmix.core.models.scenario import NodeBoundary, PipeControl, Scenario, SimulationSettings
from gasmix.core.network.builder import NetworkBuilder

TOP_LEVEL_KEYS = {"name", "gas", "nodes", "pipes", "boundaries", "controls", "simulation"}
GAS_KEYS = {"sigma1_m_s", "sigma2_m_s", "sigma2_ratio", "r1_mj_kg", "r2_mj_kg"}
PIPE_KEYS = {"id", "from", "to", "length_km", "diameter_m", "friction", "compressor_ratio", "regulator_ratio"}
BOUNDARY_KEYS = {f.name for f in fields(NodeBoundary)}
CONTROL_KEYS = {f.name for f in fields(PipeControl)}
SETTINGS_KEYS = {f.name for f in fields(SimulationSettings)}
SINUSOID_KEYS = {"mean", "amplitude_factor", "frequency_cyc_hr", "phase_rad"}

ROLE_FIELDS = {
    RoleKind.SLACK: {"pressure_mpa", "h2_fraction"},
    RoleKind.INJECTION: {"inflow_kg_s", "h2_fraction"},
    RoleKind.WITHDRAWAL: {"outflow_kg_s", "outflow_flux_kg_m2_s"},
}


class ScenarioParser:
    """
    A class used to read, validate and write scenario documents.

    Scenario documents are YAML trees with the sections gas, nodes, pipes,
    boundaries, controls and simulation (see docs/scenario_schema.md). Profiles
    are written as a bare number (constant) or as a one-key mapping
    ``constant``, ``sinusoid`` or ``piecewise_linear``.

    Attributes
    ----------
    builder : NetworkBuilder
        Builder used to validate the network section.
    error_handler : ErrorHandler
        An instance of the `ErrorHandler` for logging schema problems.

    Methods
    -------
    parse_scenario(text)
        Parses and validates a YAML scenario document.
    load(path)
        Reads and parses a scenario file.
    serialize(scenario)
        Writes a scenario back to canonical YAML.
    scenario_hash(scenario)
        sha256 of the canonical document.
    """

    def __init__(self, builder: NetworkBuilder = None, error_handler: ErrorHandler = None):
        """
        Initialize the scenario parser.

        Args:
            builder: NetworkBuilder instance
            error_handler: ErrorHandler instance
        """
        self.error_handler = error_handler or ErrorHandler()
        self.builder = builder or NetworkBuilder(self.error_handler)

    def load(self, path: str) -> Scenario:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                return self.parse_scenario(handle.read())
        except OSError as e:
            raise ScenarioSchemaError(f"cannot read scenario file '{path}': {e}") from e

    def parse_scenario(self, text: str) -> Scenario:
        """
        Parse a scenario document.

        Args:
            text: YAML document

        Returns:
            Scenario: Validated scenario

        Raises:
            ScenarioSchemaError: If the document does not follow the schema
            UnknownNodeError: If a boundary or control references an unknown id
            MissingBoundaryError: If a node lacks the profiles its role requires
            HorizonError: If the horizon is not positive
        """
        try:
            document = yaml.safe_load(text)
        except yaml.YAMLError as e:
            self.error_handler.log_error(ScenarioSchemaError(f"malformed YAML: {e}"), "parse_scenario",
                                         raise_exception=True)
        try:
            return self.from_dict(document)
        except GasMixError as e:
            self.error_handler.log_error(e, "parse_scenario", raise_exception=True)

    def from_dict(self, document: Any) -> Scenario:
        section = self._mapping(document, "document", TOP_LEVEL_KEYS)
        for key in ("nodes", "pipes", "boundaries", "simulation"):
            if key not in section:
                raise ScenarioSchemaError(f"missing section '{key}'")

        gas = self._parse_gas(section.get("gas") or {})
        roles = [self._parse_node(entry) for entry in self._sequence(section["nodes"], "nodes")]
        pipes = [self._parse_pipe(entry) for entry in self._sequence(section["pipes"], "pipes")]
        graph = self.builder.build_graph(pipes, roles)

        boundaries = self._parse_boundaries(section["boundaries"], graph)
        controls = self._parse_controls(section.get("controls") or {}, graph)
        settings = self._parse_settings(section["simulation"])
        return Scenario(
            name=str(section.get("name", "scenario")),
            graph=graph,
            gas=gas,
            boundaries=boundaries,
            controls=controls,
            settings=settings,
        )

    # ---------------------------------------------
    # SECTIONS
    # ---------------------------------------------
    def _parse_gas(self, raw: Any) -> GasPair:
        section = self._mapping(raw, "gas", GAS_KEYS)
        sigma1 = self._number(section.get("sigma1_m_s", DEFAULT_SIGMA1), "gas.sigma1_m_s")
        if "sigma2_m_s" in section and "sigma2_ratio" in section:
            raise ScenarioSchemaError("give either gas.sigma2_m_s or gas.sigma2_ratio, not both")
        if "sigma2_m_s" in section:
            sigma2 = self._number(section["sigma2_m_s"], "gas.sigma2_m_s")
        else:
            sigma2 = sigma1 * self._number(section.get("sigma2_ratio", DEFAULT_SIGMA2_RATIO), "gas.sigma2_ratio")
        gas = GasPair(
            sigma1=sigma1,
            sigma2=sigma2,
            r1=self._number(section.get("r1_mj_kg", DEFAULT_R1), "gas.r1_mj_kg"),
            r2=self._number(section.get("r2_mj_kg", DEFAULT_R2), "gas.r2_mj_kg"),
        )
        if not (gas.sigma2 > gas.sigma1 > 0) or gas.r1 <= 0 or gas.r2 <= 0:
            raise ScenarioSchemaError("gas constants need sigma2 > sigma1 > 0 and positive heating values")
        return gas

    def _parse_node(self, raw: Any) -> NodeRole:
        entry = self._mapping(raw, "nodes[]", {"id", "role"})
        if "id" not in entry or "role" not in entry:
            raise ScenarioSchemaError("every node needs 'id' and 'role'")
        try:
            kind = RoleKind(str(entry["role"]).lower())
        except ValueError:
            raise ScenarioSchemaError(f"unknown role '{entry['role']}' for node '{entry['id']}'")
        return NodeRole(node_id=str(entry["id"]), kind=kind)

    def _parse_pipe(self, raw: Any) -> Pipe:
        entry = self._mapping(raw, "pipes[]", PIPE_KEYS)
        missing = {"id", "from", "to", "length_km", "diameter_m", "friction"} - set(entry)
        if missing:
            raise ScenarioSchemaError(f"pipe entry missing {sorted(missing)}")
        return Pipe(
            id=str(entry["id"]),
            from_node=str(entry["from"]),
            to_node=str(entry["to"]),
            length_km=self._number(entry["length_km"], "length_km"),
            diameter_m=self._number(entry["diameter_m"], "diameter_m"),
            friction=self._number(entry["friction"], "friction"),
            compressor_ratio=self._number(entry.get("compressor_ratio", 1.0), "compressor_ratio"),
            regulator_ratio=self._number(entry.get("regulator_ratio", 1.0), "regulator_ratio"),
        )

    def _parse_boundaries(self, raw: Any, graph: NetworkGraph) -> Dict[str, NodeBoundary]:
        section = self._mapping(raw, "boundaries", None)
        for node_id in section:
            if str(node_id) not in graph.roles_by_id:
                raise UnknownNodeError(f"boundary given for unknown node '{node_id}'")

        boundaries: Dict[str, NodeBoundary] = {}
        for role in graph.node_roles:
            entry = self._mapping(section.get(role.node_id) or {}, f"boundaries.{role.node_id}", BOUNDARY_KEYS)
            allowed = ROLE_FIELDS[role.kind]
            extra = set(entry) - allowed
            if extra:
                raise ScenarioSchemaError(f"node '{role.node_id}' ({role.kind.value}) cannot carry {sorted(extra)}")
            profiles = {key: self.parse_profile(value, f"boundaries.{role.node_id}.{key}")
                        for key, value in entry.items()}
            boundaries[role.node_id] = self._complete_boundary(role, profiles)
        return boundaries

    def _complete_boundary(self, role: NodeRole, profiles: Dict[str, Profile]) -> NodeBoundary:
        node_id = role.node_id
        if role.kind == RoleKind.SLACK:
            if "pressure_mpa" not in profiles:
                raise MissingBoundaryError(f"slack node '{node_id}' has no pressure_mpa")
            profiles.setdefault("h2_fraction", Constant(0.0))
            if profiles["pressure_mpa"].bounds[0] <= 0:
                raise ScenarioSchemaError(f"slack pressure at '{node_id}' must stay positive")
        elif role.kind == RoleKind.INJECTION:
            if "inflow_kg_s" not in profiles:
                raise MissingBoundaryError(f"injection node '{node_id}' has no inflow_kg_s")
            profiles.setdefault("h2_fraction", Constant(0.0))
        else:
            given = [key for key in ("outflow_kg_s", "outflow_flux_kg_m2_s") if key in profiles]
            if len(given) != 1:
                raise MissingBoundaryError(
                    f"withdrawal node '{node_id}' needs exactly one of outflow_kg_s, outflow_flux_kg_m2_s")

        for key, profile in profiles.items():
            low, high = profile.bounds
            if key == "h2_fraction" and (low < 0 or high > 1):
                raise MixtureFractionError(f"h2_fraction at '{node_id}' leaves [0, 1]")
            if low < 0:
                raise ScenarioSchemaError(f"{key} at '{node_id}' goes negative (amplitude factor above one?)")
        return NodeBoundary(**profiles)

    def _parse_controls(self, raw: Any, graph: NetworkGraph) -> Dict[str, PipeControl]:
        section = self._mapping(raw, "controls", None)
        controls: Dict[str, PipeControl] = {}
        for pipe_id, value in section.items():
            if str(pipe_id) not in graph.pipe_ids:
                raise UnknownNodeError(f"control given for unknown pipe '{pipe_id}'")
            entry = self._mapping(value, f"controls.{pipe_id}", CONTROL_KEYS)
            profiles = {key: self.parse_profile(item, f"controls.{pipe_id}.{key}") for key, item in entry.items()}
            for key, profile in profiles.items():
                if profile.bounds[0] < 1:
                    raise ControlRatioError(f"{key} of pipe '{pipe_id}' drops below one")
            controls[str(pipe_id)] = PipeControl(**profiles)
        return controls

    def _parse_settings(self, raw: Any) -> SimulationSettings:
        section = self._mapping(raw, "simulation", SETTINGS_KEYS)
        if "horizon_hr" not in section:
            raise ScenarioSchemaError("simulation.horizon_hr is required")
        values = dict(section)
        for key in ("horizon_hr", "refinement_km", "rtol", "atol", "max_step_hr", "fixed_step_s"):
            if values.get(key) is not None:
                values[key] = self._number(values[key], f"simulation.{key}")
        for key in ("samples", "spectral_order"):
            if key in values:
                values[key] = int(values[key])
        settings = SimulationSettings(**values)

        if settings.horizon_hr <= 0:
            raise HorizonError("simulation.horizon_hr must be positive")
        if settings.samples < 1:
            raise ScenarioSchemaError("simulation.samples must be at least 1")
        if settings.solver not in ("fv", "spectral"):
            raise ScenarioSchemaError(f"unknown solver '{settings.solver}'")
        if settings.method not in IMPLICIT_METHODS + EXPLICIT_METHODS:
            raise ScenarioSchemaError(f"unknown integration method '{settings.method}'")
        if settings.rtol <= 0 or settings.atol <= 0 or settings.refinement_km <= 0:
            raise ScenarioSchemaError("tolerances and refinement length must be positive")
        if settings.spectral_order < 2:
            raise ScenarioSchemaError("simulation.spectral_order must be at least 2")
        return settings

    # ---------------------------------------------
    # PROFILES
    # ---------------------------------------------
    def parse_profile(self, raw: Any, context: str) -> Profile:
        """Parse a bare number or a one-key profile mapping."""
        if isinstance(raw, bool):
            raise ScenarioSchemaError(f"{context}: expected a number or profile mapping")
        if isinstance(raw, (int, float)):
            return Constant(float(raw))
        entry = self._mapping(raw, context, {"constant", "sinusoid", "piecewise_linear"})
        if len(entry) != 1:
            raise ScenarioSchemaError(f"{context}: a profile has exactly one kind")
        kind, body = next(iter(entry.items()))
        if kind == "constant":
            return Constant(self._number(body, context))
        if kind == "sinusoid":
            params = self._mapping(body, context, SINUSOID_KEYS)
            missing = {"mean", "amplitude_factor", "frequency_cyc_hr"} - set(params)
            if missing:
                raise ScenarioSchemaError(f"{context}: sinusoid missing {sorted(missing)}")
            profile = Sinusoid(
                mean=self._number(params["mean"], context),
                amplitude_factor=self._number(params["amplitude_factor"], context),
                frequency_cyc_hr=self._number(params["frequency_cyc_hr"], context),
                phase_rad=self._number(params.get("phase_rad", 0.0), context),
            )
            if profile.mean >= 0 and profile.amplitude_factor > 1:
                raise ScenarioSchemaError(f"{context}: amplitude factor above one makes the profile negative")
            return profile
        knots = self._sequence(body, context)
        parsed = []
        for knot in knots:
            if not isinstance(knot, (list, tuple)) or len(knot) != 2:
                raise ScenarioSchemaError(f"{context}: knots are [t_hr, value] pairs")
            parsed.append((self._number(knot[0], context), self._number(knot[1], context)))
        if not parsed or any(b[0] <= a[0] for a, b in zip(parsed, parsed[1:])):
            raise ScenarioSchemaError(f"{context}: knot times must be strictly increasing")
        return PiecewiseLinear(tuple(parsed))

    @staticmethod
    def profile_to_dict(profile: Profile) -> Dict[str, Any]:
        if isinstance(profile, Constant):
            return {"constant": profile.value}
        if isinstance(profile, Sinusoid):
            return {"sinusoid": {
                "mean": profile.mean,
                "amplitude_factor": profile.amplitude_factor,
                "frequency_cyc_hr": profile.frequency_cyc_hr,
                "phase_rad": profile.phase_rad,
            }}
        return {"piecewise_linear": [[t, v] for t, v in profile.knots]}

    # ---------------------------------------------
    # SERIALIZATION
    # ---------------------------------------------
    def to_dict(self, scenario: Scenario) -> Dict[str, Any]:
        graph = scenario.graph
        # nodes go back in input order so a re-parse records the same permutation
        input_order = sorted(range(graph.node_count), key=lambda i: graph.permutation[i]) \
            if graph.permutation else list(range(graph.node_count))
        physical = [graph.node_roles[i] for i in input_order if not graph.node_roles[i].auxiliary]
        return {
            "name": scenario.name,
            "gas": {
                "sigma1_m_s": scenario.gas.sigma1,
                "sigma2_m_s": scenario.gas.sigma2,
                "r1_mj_kg": scenario.gas.r1,
                "r2_mj_kg": scenario.gas.r2,
            },
            "nodes": [{"id": role.node_id, "role": role.kind.value} for role in physical],
            "pipes": [{
                "id": pipe.id,
                "from": pipe.from_node,
                "to": pipe.to_node,
                "length_km": pipe.length_km,
                "diameter_m": pipe.diameter_m,
                "friction": pipe.friction,
                "compressor_ratio": pipe.compressor_ratio,
                "regulator_ratio": pipe.regulator_ratio,
            } for pipe in graph.pipes],
            "boundaries": {
                node_id: {f.name: self.profile_to_dict(getattr(boundary, f.name))
                          for f in fields(NodeBoundary) if getattr(boundary, f.name) is not None}
                for node_id, boundary in scenario.boundaries.items()
            },
            "controls": {
                pipe_id: {f.name: self.profile_to_dict(getattr(control, f.name))
                          for f in fields(PipeControl) if getattr(control, f.name) is not None}
                for pipe_id, control in scenario.controls.items()
            },
            "simulation": {f.name: getattr(scenario.settings, f.name) for f in fields(SimulationSettings)},
        }

    def serialize(self, scenario: Scenario) -> str:
        """Canonical YAML text of a scenario."""
        return yaml.safe_dump(self.to_dict(scenario), sort_keys=True, default_flow_style=False)

    def scenario_hash(self, scenario: Scenario, extra: Optional[Mapping[str, Any]] = None) -> str:
        """sha256 of the canonical document, optionally salted with extra settings."""
        payload = self.serialize(scenario)
        if extra:
            payload += yaml.safe_dump(dict(extra), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    # ---------------------------------------------
    # VARIANTS
    # ---------------------------------------------
    def with_boundary(self, scenario: Scenario, node_id: str, **profiles: Optional[Profile]) -> Scenario:
        """Copy of the scenario with some boundary profiles of one node replaced."""
        if node_id not in scenario.boundaries:
            raise UnknownNodeError(f"unknown node '{node_id}'")
        boundaries = dict(scenario.boundaries)
        boundaries[node_id] = replace(boundaries[node_id], **profiles)
        return replace(scenario, boundaries=boundaries)

    def with_settings(self, scenario: Scenario, **settings: Any) -> Scenario:
        return replace(scenario, settings=replace(scenario.settings, **settings))

    # ---------------------------------------------
    # HELPERS
    # ---------------------------------------------
    @staticmethod
    def _mapping(raw: Any, context: str, allowed: Optional[set]) -> Dict[str, Any]:
        if not isinstance(raw, dict):
            raise ScenarioSchemaError(f"{context}: expected a mapping")
        if allowed is not None:
            unknown = set(raw) - allowed
            if unknown:
                raise ScenarioSchemaError(f"{context}: unknown keys {sorted(map(str, unknown))}")
        return {str(key): value for key, value in raw.items()}

    @staticmethod
    def _sequence(raw: Any, context: str) -> List[Any]:
        if not isinstance(raw, list):
            raise ScenarioSchemaError(f"{context}: expected a list")
        return raw

    @staticmethod
    def _number(raw: Any, context: str) -> float:
        if isinstance(raw, bool):
            raise ScenarioSchemaError(f"{context}: expected a number")
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ScenarioSchemaError(f"{context}: expected a number, got {raw!r}")
