import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import replace
from itertools import combinations
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
import numpy as np
import pandas as pd
import yaml
from data.defs import MI_QUANTITIES
from gasmix.core.analysis.chaos import ChaosAnalyzer
from gasmix.core.analysis.crossings import CrossingDetector
from gasmix.core.analysis.spectrum import SpectrumAnalyzer
from gasmix.core.database_handler import DatabaseHandler
from gasmix.core.error_handler import ErrorHandler, GasMixError, ScenarioSchemaError, ValidationError
from gasmix.core.models.interface_curve import InterfaceCurve
from gasmix.core.models.profile import Constant, Sinusoid
from gasmix.core.models.scenario import Scenario
from gasmix.core.models.sweep_config import CROSSING_NODE_MODES, SWEEP_KINDS, SweepConfig
from gasmix.core.models.sweep_point import KEY_DECIMALS, STATUS_INVALID, STATUS_OK, SweepPoint
from gasmix.core.scenario.parser import ScenarioParser
from gasmix.core.timeint.simulation import Simulator

SWEEP_KEYS = {
    "kind", "template", "grid", "outflow_fluxes_kg_m2_s", "quantities", "crossing_nodes", "threshold",
    "tail_start", "initial_interval", "final_interval", "horizon_hr", "samples", "solver",
}
GRID_AXES = ("omega", "kappa")
POINT_COLUMNS = ["omega_star", "kappa", "status", "value", "message"]


# ---------------------------------------------
# CONFIGURATION
# ---------------------------------------------
def grid_axis(start: float, stop: float, count: int) -> Tuple[float, ...]:
    if count < 1:
        raise ValidationError("a grid axis needs at least one point")
    return tuple(float(round(v, KEY_DECIMALS)) for v in np.linspace(start, stop, int(count)))


def parse_grid_spec(text: str) -> Dict[str, Tuple[float, ...]]:
    """
    Parse a grid override such as 'omega=0:2:21;kappa=0:1:41'.

    Raises:
        ValidationError: If an axis is unknown or malformed
    """
    axes = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        name, _, axis_range = part.partition("=")
        name = name.strip()
        if name not in GRID_AXES:
            raise ValidationError(f"unknown grid axis '{name}'")
        try:
            start, stop, count = axis_range.split(":")
            axes[name] = grid_axis(float(start), float(stop), int(count))
        except ValueError:
            raise ValidationError(f"grid axis '{name}' must be start:stop:count, got '{axis_range}'")
    return axes


def load_sweep_config(path: str, grid_override: Optional[str] = None,
                      threshold: Optional[float] = None) -> SweepConfig:
    """
    Read a sweep document.

    The template path is resolved relative to the sweep document.

    Raises:
        ScenarioSchemaError: If the document does not follow the sweep schema
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = yaml.safe_load(handle.read())
    except (OSError, yaml.YAMLError) as e:
        raise ScenarioSchemaError(f"cannot read sweep file '{path}': {e}") from e
    if not isinstance(raw, dict):
        raise ScenarioSchemaError("sweep document must be a mapping")
    unknown = set(raw) - SWEEP_KEYS
    if unknown:
        raise ScenarioSchemaError(f"sweep: unknown keys {sorted(unknown)}")
    for key in ("kind", "template", "grid", "outflow_fluxes_kg_m2_s"):
        if key not in raw:
            raise ScenarioSchemaError(f"sweep: missing '{key}'")
    kind = str(raw["kind"])
    if kind not in SWEEP_KINDS:
        raise ScenarioSchemaError(f"sweep: unknown kind '{kind}'")

    grid = raw["grid"]
    if not isinstance(grid, dict) or set(grid) != set(GRID_AXES):
        raise ScenarioSchemaError("sweep.grid needs exactly 'omega' and 'kappa' as [start, stop, count]")
    axes = {}
    for name in GRID_AXES:
        values = grid[name]
        if not isinstance(values, list) or len(values) != 3:
            raise ScenarioSchemaError(f"sweep.grid.{name} must be [start, stop, count]")
        axes[name] = grid_axis(float(values[0]), float(values[1]), int(values[2]))
    if grid_override:
        axes.update(parse_grid_spec(grid_override))

    fluxes = tuple(float(v) for v in raw["outflow_fluxes_kg_m2_s"])
    expected = {"mi": 3, "pi": 1, "ci": 2}[kind]
    if len(fluxes) != expected:
        raise ScenarioSchemaError(f"sweep: '{kind}' needs {expected} outflow fluxes, got {len(fluxes)}")

    options: Dict[str, Any] = {}
    for key in ("threshold", "tail_start", "horizon_hr"):
        if raw.get(key) is not None:
            options[key] = float(raw[key])
    for key in ("initial_interval", "final_interval"):
        if raw.get(key) is not None:
            options[key] = tuple(float(v) for v in raw[key])
    if raw.get("samples") is not None:
        options["samples"] = int(raw["samples"])
    if raw.get("solver") is not None:
        options["solver"] = str(raw["solver"])
    if raw.get("quantities") is not None:
        options["quantities"] = tuple(str(q) for q in raw["quantities"])
    if raw.get("crossing_nodes") is not None:
        options["crossing_nodes"] = str(raw["crossing_nodes"])
    if threshold is not None:
        options["threshold"] = float(threshold)

    template = os.path.join(os.path.dirname(os.path.abspath(path)), str(raw["template"]))
    config = SweepConfig(kind=kind, template_path=template, omega=axes["omega"], kappa=axes["kappa"],
                         outflow_fluxes=fluxes, **options)
    validate_sweep_config(config)
    return config


def validate_sweep_config(config: SweepConfig) -> None:
    if list(config.kappa) != sorted(config.kappa):
        raise ValidationError("kappa grid must be ascending")
    fluxes = list(config.outflow_fluxes)
    if config.kind == "mi" and (fluxes != sorted(fluxes) or len(set(fluxes)) != len(fluxes)):
        raise ValidationError("outflows must be strictly ordered")
    if config.crossing_nodes not in CROSSING_NODE_MODES:
        raise ValidationError(f"crossing_nodes must be one of {CROSSING_NODE_MODES}")
    unknown = set(config.quantities) - set(MI_QUANTITIES) - {"eta2", "nu2"}
    if unknown:
        raise ValidationError(f"unknown quantities {sorted(unknown)}")


# ---------------------------------------------
# GRID POINT EVALUATION
# ---------------------------------------------
def pipe_variant(template: Scenario, omega: float, kappa: float, flux: float,
                 config: Optional[SweepConfig] = None, parser: ScenarioParser = None) -> Scenario:
    """Template with the sinusoidal slack composition of (omega, kappa) and a constant outlet flux."""
    parser = parser or ScenarioParser()
    slack_id = template.graph.slack_ids[0]
    outlet_id = template.graph.withdrawal_ids[0]
    mean = template.boundaries[slack_id].h2_fraction.mean_value
    variant = parser.with_boundary(template, slack_id,
                                   h2_fraction=Sinusoid(mean=mean, amplitude_factor=kappa, frequency_cyc_hr=omega))
    variant = parser.with_boundary(variant, outlet_id, outflow_kg_s=None, outflow_flux_kg_m2_s=Constant(flux))
    if config is not None:
        overrides = {key: value for key, value in (("horizon_hr", config.horizon_hr), ("samples", config.samples),
                                                   ("solver", config.solver)) if value is not None}
        variant = parser.with_settings(variant, **overrides)
    return replace(variant, name=f"{template.name} omega={omega} kappa={kappa} flux={flux}")


def _evaluate_mi(template: Scenario, config: SweepConfig, omega: float, kappa: float,
                 error_handler: ErrorHandler) -> Dict[str, bool]:
    runs = []
    nodes = None
    for flux in config.outflow_fluxes:
        simulator = Simulator(pipe_variant(template, omega, kappa, flux, config), error_handler=error_handler)
        if nodes is None:
            outlet = template.graph.withdrawal_ids[0]
            nodes = [outlet] if config.crossing_nodes == "outlet" else simulator.all_nodes()
        runs.append(simulator.run(config.quantities, nodes))
    detector = CrossingDetector(error_handler=error_handler)
    crossed = {q: False for q in config.quantities}
    for a, b in combinations(runs, 2):
        report = detector.detect_crossings(a, b)
        for q in config.quantities:
            crossed[q] = crossed[q] or report.quantity_crossed(q)
    return crossed


def _evaluate_pi(template: Scenario, config: SweepConfig, omega: float, kappa: float,
                 error_handler: ErrorHandler) -> float:
    scenario = pipe_variant(template, omega, kappa, config.outflow_fluxes[0], config)
    outlet = scenario.graph.withdrawal_ids[0]
    series = Simulator(scenario, error_handler=error_handler).run(["p_mpa"], [outlet])
    pressure = series.column(outlet, "p_mpa")
    analyzer = SpectrumAnalyzer(config.tail_start, error_handler)
    return analyzer.power_spectrum_measure(series.t_hr, pressure, pressure[0]).measure


def _evaluate_ci(template: Scenario, config: SweepConfig, omega: float, kappa: float,
                 error_handler: ErrorHandler) -> float:
    boundary_flux, perturbed_flux = config.outflow_fluxes
    scenario = pipe_variant(template, omega, kappa, boundary_flux, config)
    outlet = scenario.graph.withdrawal_ids[0]
    perturbed_start = Simulator(pipe_variant(template, omega, kappa, perturbed_flux, config),
                                error_handler=error_handler).steady_state()
    simulator = Simulator(scenario, error_handler=error_handler)
    first = simulator.run(["p_mpa"], [outlet])
    second = simulator.run(["p_mpa"], [outlet], initial_state=perturbed_start)
    analyzer = ChaosAnalyzer(config.initial_interval, config.final_interval, error_handler)
    return analyzer.chaos_measure(first.column(outlet, "p_mpa"), second.column(outlet, "p_mpa")).value


EVALUATORS: Dict[str, Callable[..., Any]] = {"mi": _evaluate_mi, "pi": _evaluate_pi, "ci": _evaluate_ci}


def evaluate_point(template: Scenario, config: SweepConfig, omega: float, kappa: float,
                   scenario_hash: str) -> SweepPoint:
    """
    Simulate one grid point. Runs in worker processes, so failures are returned, not raised.
    """
    error_handler = ErrorHandler()
    try:
        value = EVALUATORS[config.kind](template, config, omega, kappa, error_handler)
        return SweepPoint(config.kind, scenario_hash, omega, kappa, STATUS_OK, value)
    except GasMixError as e:
        return SweepPoint(config.kind, scenario_hash, omega, kappa, STATUS_INVALID, None, f"{type(e).__name__}: {e}")


# ---------------------------------------------
# SWEEPS
# ---------------------------------------------
class InterfaceSweeper:
    """
    A class used to compute monotonic, periodic and chaotic interfaces over a (omega*, kappa) grid.

    Grid points are evaluated in waves of ascending kappa, each wave running
    in parallel over the frequencies that still need it. For the monotonic and
    periodic interfaces a frequency drops out once its critical kappa is
    known; the chaotic interface needs every point. Points are cached per
    sweep hash, so a repeated or interrupted sweep only simulates what is
    missing. Only this process writes to the cache.

    Attributes
    ----------
    template : Scenario
        Single-pipe scenario the variants are built from.
    config : SweepConfig
        Grid, fluxes and measure settings.
    database : Optional[DatabaseHandler]
        Sweep point cache.
    workers : int
        Worker processes; 1 evaluates in this process.

    Methods
    -------
    monotonic_interface(quantity)
        Monotonic interface for one quantity.
    monotonic_interfaces()
        Monotonic interfaces for every configured quantity.
    periodic_interface(threshold)
        Periodic interface.
    chaotic_interface()
        Chaotic interface.
    points_frame()
        Per-point diagnostics.
    """

    def __init__(self,
                 template: Scenario,
                 config: SweepConfig,
                 database: Optional[DatabaseHandler] = None,
                 workers: int = 1,
                 parser: ScenarioParser = None,
                 error_handler: ErrorHandler = None):
        self.error_handler = error_handler or ErrorHandler()
        if not template.graph.is_single_pipe:
            raise ValidationError("interface sweeps need a single-pipe template")
        validate_sweep_config(config)
        self.template = template
        self.config = config
        self.database = database
        self.workers = max(1, int(workers))
        self.parser = parser or ScenarioParser(error_handler=self.error_handler)
        self.scenario_hash = self.parser.scenario_hash(template, {"sweep": config.hash_fields()})
        self.points: Dict[Tuple[float, float], SweepPoint] = {}

    @staticmethod
    def _key(omega: float, kappa: float) -> Tuple[float, float]:
        return round(omega, KEY_DECIMALS), round(kappa, KEY_DECIMALS)

    def _done(self, omega: float, kappa: float) -> bool:
        """Whether the critical kappa of omega is already settled at or below kappa."""
        point = self.points.get(self._key(omega, kappa))
        if point is None or not point.ok:
            return False
        if self.config.kind == "mi":
            return all(point.value.get(q, False) for q in self.config.quantities)
        if self.config.kind == "pi":
            return point.value >= self.config.threshold
        return False

    def evaluate_grid(self) -> Dict[Tuple[float, float], SweepPoint]:
        """Evaluate (or load from the cache) every grid point the interface needs."""
        kind = self.config.kind
        if self.database is not None:
            cached = self.database.get_cached_points(kind, self.scenario_hash)
            self.points.update(cached)
            if cached:
                self.error_handler.log_info(f"{len(cached)} cached {kind} points loaded", "evaluate_grid")

        active = list(self.config.omega)
        for kappa in self.config.kappa:
            wave = [omega for omega in active if self._key(omega, kappa) not in self.points]
            for point in self._run_wave(wave, kappa):
                self.points[self._key(point.omega, point.kappa)] = point
                if self.database is not None:
                    self.database.cache_point(point)
            active = [omega for omega in active if not self._done(omega, kappa)]
            if not active:
                break
        return self.points

    def _run_wave(self, omegas: Sequence[float], kappa: float) -> List[SweepPoint]:
        if not omegas:
            return []
        tasks = [(self.template, self.config, omega, kappa, self.scenario_hash) for omega in omegas]
        results: List[SweepPoint] = []
        if self.workers == 1 or len(tasks) == 1:
            results = [evaluate_point(*task) for task in tasks]
        else:
            with ProcessPoolExecutor(max_workers=min(self.workers, len(tasks))) as pool:
                futures = {pool.submit(evaluate_point, *task): task[2] for task in tasks}
                for future in as_completed(futures):
                    results.append(future.result())
        for point in sorted(results, key=lambda p: p.omega):
            if point.ok:
                self.error_handler.log_info(
                    f"{point.kind} (omega={point.omega}, kappa={point.kappa}): {point.value}", "sweep")
            else:
                self.error_handler.log_warning(
                    f"{point.kind} (omega={point.omega}, kappa={point.kappa}) invalid: {point.message}", "sweep")
        return results

    def _point_value(self, omega: float, kappa: float) -> Optional[SweepPoint]:
        point = self.points.get(self._key(omega, kappa))
        return point if point is not None and point.ok else None

    def _invalid(self) -> Tuple[Tuple[float, float, str], ...]:
        return tuple((p.omega, p.kappa, p.message or "") for _, p in sorted(self.points.items()) if not p.ok)

    def _first_kappa(self, omega: float, predicate: Callable[[Any], bool]) -> float:
        for kappa in self.config.kappa:
            point = self._point_value(omega, kappa)
            if point is not None and predicate(point.value):
                return kappa
        return 1.0

    def _curve(self, kind: str, kappa_star: List[float], threshold: Optional[float], value) -> InterfaceCurve:
        return InterfaceCurve(
            kind=kind,
            omega=tuple(self.config.omega),
            kappa_star=tuple(kappa_star),
            kappa_grid=tuple(self.config.kappa),
            threshold=threshold,
            point_values={key: value(p.value) for key, p in sorted(self.points.items()) if p.ok},
            invalid_points=self._invalid(),
        )

    def _require(self, kind: str) -> None:
        if self.config.kind != kind:
            raise ValidationError(f"sweep is configured for '{self.config.kind}', not '{kind}'")

    def monotonic_interface(self, quantity: str) -> InterfaceCurve:
        """
        Critical kappa per frequency: the first grid kappa at which some pair of
        the ordered solutions crosses in ``quantity``; 1 if none does.
        """
        self._require("mi")
        if quantity not in self.config.quantities:
            raise ValidationError(f"quantity '{quantity}' is not part of the sweep")
        if not self.points:
            self.evaluate_grid()
        kappa_star = [self._first_kappa(omega, lambda v: bool(v.get(quantity))) for omega in self.config.omega]
        return self._curve(f"mi:{quantity}", kappa_star, None, lambda v: bool(v.get(quantity)))

    def monotonic_interfaces(self) -> Dict[str, InterfaceCurve]:
        self.evaluate_grid()
        return {q: self.monotonic_interface(q) for q in self.config.quantities}

    def periodic_interface(self, threshold: Optional[float] = None) -> InterfaceCurve:
        """
        Critical kappa per frequency: the first grid kappa whose periodicity
        measure reaches the threshold; 1 if none does.
        """
        self._require("pi")
        if threshold is not None:
            self.config = replace(self.config, threshold=threshold)
        self.evaluate_grid()
        threshold = self.config.threshold
        kappa_star = [self._first_kappa(omega, lambda v: v >= threshold) for omega in self.config.omega]
        return self._curve("pi", kappa_star, threshold, float)

    def chaotic_interface(self) -> InterfaceCurve:
        """
        Critical kappa per frequency: the largest grid kappa with a nonpositive
        chaos measure, so every larger kappa is chaotic; the lowest grid kappa
        when all are chaotic and 1 when the largest kappa is not chaotic.
        """
        self._require("ci")
        self.evaluate_grid()
        kappa_star = []
        for omega in self.config.omega:
            valid = [(kappa, p.value) for kappa in self.config.kappa
                     for p in [self._point_value(omega, kappa)] if p is not None]
            calm = [kappa for kappa, value in valid if value <= 0.0]
            if not valid or (calm and max(calm) == self.config.kappa[-1]):
                kappa_star.append(1.0)
            elif not calm:
                kappa_star.append(self.config.kappa[0])
            else:
                kappa_star.append(max(calm))
        return self._curve("ci", kappa_star, 0.0, float)

    def points_frame(self) -> pd.DataFrame:
        rows = []
        for _, point in sorted(self.points.items()):
            value = point.value
            if isinstance(value, dict):
                value = ";".join(f"{q}={int(bool(v))}" for q, v in sorted(value.items()))
            rows.append({"omega_star": point.omega, "kappa": point.kappa, "status": point.status,
                         "value": value, "message": point.message or ""})
        return pd.DataFrame(rows, columns=POINT_COLUMNS)
