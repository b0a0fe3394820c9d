import argparse
import os
import sys
import time
from dataclasses import asdict
from typing import Any, Dict, List, Optional, Sequence
from data.defs import DEFAULT_PI_FLUX, DEFAULT_TAIL_START, QUANTITIES
from gasmix import __version__
from gasmix.core.analysis.interfaces import InterfaceSweeper, load_sweep_config, pipe_variant
from gasmix.core.analysis.spectrum import SpectrumAnalyzer
from gasmix.core.database_handler import DatabaseHandler
from gasmix.core.error_handler import ErrorHandler, GasMixError, InputError
from gasmix.core.models.run_manifest import RunManifest
from gasmix.core.models.scenario import Scenario
from gasmix.core.models.time_series import CSV_FLOAT_FORMAT
from gasmix.core.scenario.parser import ScenarioParser
from gasmix.core.timeint.simulation import Simulator, simulate_pair

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INPUT = 2
MANIFEST_FILE = "manifest.json"


class CommandLine:
    """
    A class used to run the subcommands of the ``gasmix`` command.

    Every subcommand reads its inputs, writes CSV files into the output
    directory and finishes with a ``manifest.json`` listing them.

    Methods
    -------
    cmd_steady(args)
        Steady nodal state at t = 0.
    cmd_simulate(args)
        Nodal trajectories of one scenario.
    cmd_pair(args)
        Trajectories of two ordered scenarios and their crossings.
    cmd_spectrum(args)
        Tail spectrum and periodicity measure of one pipe forcing point.
    cmd_interface(args)
        Monotonic, periodic or chaotic interface sweep.
    """

    def __init__(self, error_handler: ErrorHandler = None):
        self.error_handler = error_handler or ErrorHandler()
        self.parser = ScenarioParser(error_handler=self.error_handler)

    # ---------------------------------------------
    # HELPERS
    # ---------------------------------------------
    def _load(self, path: str, solver: Optional[str]) -> Scenario:
        scenario = self.parser.load(path)
        if solver:
            scenario = self.parser.with_settings(scenario, solver=solver)
        return scenario

    @staticmethod
    def _split(text: Optional[str]) -> Optional[List[str]]:
        if not text:
            return None
        return [item.strip() for item in text.split(",") if item.strip()]

    @staticmethod
    def _output_dir(path: str) -> str:
        os.makedirs(path, exist_ok=True)
        return path

    def _finish(self, command: str, scenario_hash: str, settings: Dict[str, Any], started: float,
                out_dir: str, outputs: List[str], diagnostics: Dict[str, Any]) -> RunManifest:
        manifest = RunManifest(
            command=command,
            scenario_hash=scenario_hash,
            solver_settings=settings,
            code_version=__version__,
            wall_time_s=time.perf_counter() - started,
            outputs=outputs,
            diagnostics=diagnostics,
        )
        missing = manifest.missing_outputs()
        if missing:
            self.error_handler.log_warning(f"outputs missing or empty: {missing}", command)
        manifest.write(os.path.join(out_dir, MANIFEST_FILE))
        self.error_handler.log_info(f"{len(outputs)} files written to {out_dir}", command)
        return manifest

    # ---------------------------------------------
    # SUBCOMMANDS
    # ---------------------------------------------
    def cmd_steady(self, args: argparse.Namespace) -> RunManifest:
        started = time.perf_counter()
        scenario = self._load(args.scenario, args.solver)
        out_dir = self._output_dir(args.out)
        table = Simulator(scenario, error_handler=self.error_handler).steady_table()
        path = os.path.join(out_dir, "steady.csv")
        table.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        return self._finish("steady", self.parser.scenario_hash(scenario), asdict(scenario.settings),
                            started, out_dir, [path], {})

    def cmd_simulate(self, args: argparse.Namespace) -> RunManifest:
        started = time.perf_counter()
        scenario = self._load(args.scenario, args.solver)
        out_dir = self._output_dir(args.out)
        series = Simulator(scenario, error_handler=self.error_handler).run(
            self._split(args.quantities), self._split(args.nodes))
        path = os.path.join(out_dir, "series.csv")
        series.to_csv(path)
        return self._finish("simulate", self.parser.scenario_hash(scenario), asdict(scenario.settings),
                            started, out_dir, [path], dict(series.diagnostics))

    def cmd_pair(self, args: argparse.Namespace) -> RunManifest:
        if not args.other:
            raise InputError("pair needs --other")
        started = time.perf_counter()
        first = self._load(args.scenario, args.solver)
        second = self._load(args.other, args.solver)
        out_dir = self._output_dir(args.out)
        series_a, series_b, report = simulate_pair(
            first, second, self._split(args.quantities), self._split(args.nodes), self.error_handler)
        outputs = [os.path.join(out_dir, name) for name in ("series_a.csv", "series_b.csv", "crossings.csv")]
        series_a.to_csv(outputs[0])
        series_b.to_csv(outputs[1])
        report.to_frame().to_csv(outputs[2], index=False, float_format=CSV_FLOAT_FORMAT)
        diagnostics = {"a": dict(series_a.diagnostics), "b": dict(series_b.diagnostics),
                       "crossed_columns": sorted(c for c, times in report.crossings.items() if times)}
        pair_hash = self.parser.scenario_hash(first, {"other": self.parser.scenario_hash(second)})
        return self._finish("pair", pair_hash, asdict(first.settings), started, out_dir, outputs, diagnostics)

    def cmd_spectrum(self, args: argparse.Namespace) -> RunManifest:
        started = time.perf_counter()
        template = self._load(args.scenario, args.solver)
        if args.omega is None or args.kappa is None:
            raise InputError("spectrum needs --omega and --kappa")
        scenario = pipe_variant(template, args.omega, args.kappa, args.flux, parser=self.parser)
        out_dir = self._output_dir(args.out)
        outlet = scenario.graph.withdrawal_ids[0]
        series = Simulator(scenario, error_handler=self.error_handler).run(["p_mpa"], [outlet])
        pressure = series.column(outlet, "p_mpa")
        analyzer = SpectrumAnalyzer(args.tail_start, self.error_handler)
        spectrum = analyzer.power_spectrum_measure(series.t_hr, pressure, pressure[0])
        path = os.path.join(out_dir, "spectrum.csv")
        spectrum.to_frame().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        self.error_handler.log_info(f"periodicity measure {spectrum.measure:.4f}", "spectrum")
        diagnostics = {"measure": spectrum.measure,
                       "peaks_cyc_hr": [float(f) for f in analyzer.peak_frequencies(spectrum)],
                       "bins_above": analyzer.bins_above(spectrum), **series.diagnostics}
        return self._finish("spectrum", self.parser.scenario_hash(scenario), asdict(scenario.settings),
                            started, out_dir, [path], diagnostics)

    def cmd_interface(self, args: argparse.Namespace) -> RunManifest:
        sweep_path = args.scenario or args.config
        if not sweep_path:
            raise InputError("interface needs --scenario")
        started = time.perf_counter()
        config = load_sweep_config(sweep_path, grid_override=args.grid, threshold=args.threshold)
        template = self._load(config.template_path, args.solver)
        out_dir = self._output_dir(args.out)
        sweeper = InterfaceSweeper(template, config, DatabaseHandler(error_handler=self.error_handler),
                                   workers=args.workers, parser=self.parser, error_handler=self.error_handler)
        if config.kind == "mi":
            curves = {f"interface_mi_{q}.csv": curve for q, curve in sweeper.monotonic_interfaces().items()}
        elif config.kind == "pi":
            curves = {"interface_pi.csv": sweeper.periodic_interface()}
        else:
            curves = {"interface_ci.csv": sweeper.chaotic_interface()}

        outputs = []
        for name, curve in curves.items():
            path = os.path.join(out_dir, name)
            curve.to_frame().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
            outputs.append(path)
        points = os.path.join(out_dir, f"points_{config.kind}.csv")
        sweeper.points_frame().to_csv(points, index=False, float_format=CSV_FLOAT_FORMAT)
        outputs.append(points)
        invalid = [p for p in sweeper.points.values() if not p.ok]
        diagnostics = {"points": len(sweeper.points), "invalid_points": len(invalid)}
        settings = {**asdict(template.settings), "sweep": config.hash_fields()}
        return self._finish("interface", sweeper.scenario_hash, settings, started, out_dir, outputs, diagnostics)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gasmix", description="Transient simulation of natural gas and hydrogen "
                                                                "mixtures in pipeline networks.")
    parser.add_argument("command", choices=["steady", "simulate", "pair", "spectrum", "interface"])
    parser.add_argument("--scenario", help="Scenario YAML file; the sweep YAML file for interface.")
    parser.add_argument("--other", help="Second scenario of a pair.")
    parser.add_argument("--config", help="Alias of --scenario for interface.")
    parser.add_argument("--out", default="out", help="Output directory (default: out).")
    parser.add_argument("--solver", choices=["fv", "spectral"], help="Override the scenario solver.")
    parser.add_argument("--workers", type=int, default=1, help="Worker processes for sweeps.")
    parser.add_argument("--threshold", type=float, help="Periodicity measure threshold (pi).")
    parser.add_argument("--grid", help="Grid override, e.g. 'omega=0:2:21;kappa=0:1:41'.")
    parser.add_argument("--quantities", help=f"Comma-separated subset of {','.join(QUANTITIES)}.")
    parser.add_argument("--nodes", help="Comma-separated node ids.")
    parser.add_argument("--omega", type=float, help="Forcing frequency in cyc/hr (spectrum).")
    parser.add_argument("--kappa", type=float, help="Amplitude factor (spectrum).")
    parser.add_argument("--flux", type=float, default=DEFAULT_PI_FLUX,
                        help=f"Outlet mass flux in kg/m^2 s (spectrum, default: {DEFAULT_PI_FLUX}).")
    parser.add_argument("--tail-start", type=float, default=DEFAULT_TAIL_START,
                        help=f"Spectral tail start as a fraction of the horizon (default: {DEFAULT_TAIL_START}).")
    return parser


# ---------------------------------------------
# MAIN ENTRY POINT
# ---------------------------------------------
def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; returns 0 on success, 1 on numerical failure, 2 on input errors."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # --help exits with 0, usage errors with 2
        return EXIT_OK if e.code == 0 else EXIT_INPUT
    if args.command != "interface" and not args.scenario:
        print(f"gasmix {args.command}: --scenario is required", file=sys.stderr)
        return EXIT_INPUT

    error_handler = ErrorHandler()
    cli = CommandLine(error_handler)
    try:
        getattr(cli, f"cmd_{args.command}")(args)
    except InputError as e:
        error_handler.log_error(e, args.command)
        return EXIT_INPUT
    except GasMixError as e:
        error_handler.log_error(e, args.command)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
