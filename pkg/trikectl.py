#!/usr/bin/env python3
"""
trikectl - command-line front end of the trike control toolkit
Simulates the wheel-speed, steering and trajectory loops, designs PID gains,
identifies plant models from t,u,y traces, runs linearity scans and emits
plot-ready CSV.
"""

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from tqdm import tqdm

from config import AppConfig, configure_logging
from config_manager import RunConfig, gains_to_dict, load_run_config, plant_to_dict
from exceptions.control_exceptions import ConfigValidationError, NotSettled
from lti_core import TimeSeries, c2d_zoh, step_metrics, w_transform
from pid_design import DigitalPid, verify_design
from robot_sim import (
    bldc_plant_system, calibrate_gain, compare_response, run_open_loop, run_steering_loop,
    run_trajectory_loop, run_velocity_loop,
)
from sysid import IdExperiment, identify_iv, linearity_scan
from utils.error.error_handler import EXIT_OK, exit_code_for, exit_on_error
from utils.file.file_handler import FileHandler
from utils.text.text_processor import TextProcessor

logger = logging.getLogger("trikectl")


def _parse_pair(text: str, name: str) -> Tuple[float, float]:
    try:
        first, second = (float(part) for part in text.split(","))
    except ValueError as e:
        raise ConfigValidationError(f"expected two comma-separated numbers, got {text!r}", key=name) from e
    return first, second


def _parse_list(text: str, name: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigValidationError(f"expected comma-separated numbers, got {text!r}", key=name) from e


class TrikeTool:
    """Runs one trikectl command against a loaded configuration"""

    def __init__(self, config_file: Optional[str] = None, out_dir: Optional[str] = None,
                 seed: Optional[int] = None, overrides: Sequence[str] = (), quiet: bool = False):
        """
        Initialize the tool

        Args:
            config_file: Run configuration JSON; built-in defaults when None
            out_dir: Output directory; TRIKECTL_OUT_DIR or ./out when None
            seed: Overrides the configured seed
            overrides: key=value strings applied after the file
            quiet: Suppress the key=value report (batch workers)
        """
        self.config_file = config_file
        self.overrides = list(overrides)
        if seed is not None:
            self.overrides.append(f"seed={seed}")
        self.out_dir = out_dir or AppConfig.get_out_dir()
        self._config: Optional[RunConfig] = None
        self.quiet = quiet

    def load(self) -> RunConfig:
        """Load and validate the configuration once."""
        if self._config is None:
            self._config = load_run_config(self.config_file, self.overrides)
        return self._config

    @property
    def config(self) -> RunConfig:
        return self.load()

    def _path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _report(self, items) -> None:
        if self.quiet:
            return
        sys.stdout.write(TextProcessor.key_value_lines(items))
        sys.stdout.flush()

    # -- commands -----------------------------------------------------------

    def simulate(self, loop: Optional[str] = None, name: Optional[str] = None) -> int:
        """Run the configured loop and write its trace."""
        cfg = self.config
        scenario = cfg.scenario(loop)
        FileHandler.ensure_directory(self.out_dir)
        stem = name or scenario.loop
        logger.info(f"Simulating {scenario.loop} loop for {scenario.duration:g} s at T={scenario.sample_time:g} s")

        if scenario.loop == "trajectory":
            result = run_trajectory_loop(scenario, cfg.trajectory(), cfg.steering())
            path = FileHandler.safe_write_csv(result.frame, self._path(f"{stem}.csv"))
            self._report([("loop", scenario.loop), ("samples", len(result.frame)), ("trace", path)]
                         + sorted(result.summary.items()))
            return EXIT_OK

        saturated = None
        if scenario.loop == "velocity":
            outcome = run_velocity_loop(scenario)
            series, saturated = outcome.series, outcome.saturated_share
        elif scenario.loop == "steering":
            series = run_steering_loop(scenario, cfg.steering()).series
        else:
            series = run_open_loop(scenario)
        path = FileHandler.write_timeseries_csv(series, self._path(f"{stem}.csv"))

        items: List[Tuple[str, Any]] = [("loop", scenario.loop), ("samples", len(series)), ("trace", path)]
        if saturated is not None:
            items.append(("saturated_share", saturated))
        try:
            metrics = step_metrics(series)
            items.append(("settled", True))
            items.extend(metrics.as_dict().items())
        except NotSettled as e:
            logger.warning(f"Step metrics unavailable: {e}")
            items.append(("settled", False))
        self._report(items)
        return EXIT_OK

    def design(self, write_config: Optional[str] = None) -> int:
        """Design the PID at the crossover and print gains and D(z)."""
        cfg = self.config
        result = cfg.design()
        plant = cfg.plant()
        if result.domain == "w":
            plant = w_transform(c2d_zoh(plant, cfg.sample_time))
        report = verify_design(plant, result.gains, result.omega_w1, cfg.design_spec().theta)
        dz = DigitalPid(result.gains, cfg.sample_time).transfer_function()
        self._report([
            ("domain", result.domain),
            ("omega_w1", result.omega_w1),
            ("plant_gain", result.plant_gain),
            ("plant_phase_deg", math.degrees(result.plant_phase)),
            ("kp", result.gains.kp),
            ("ki", result.gains.ki),
            ("kd", result.gains.kd),
            ("loop_gain", report.loop_gain),
            ("phase_margin_deg", math.degrees(report.phase_margin)),
            ("dz_num", list(dz.num)),
            ("dz_den", list(dz.den)),
        ])
        if write_config:
            cfg.set("gains", gains_to_dict(result.gains))
            cfg.save_to_file(write_config)
            logger.info(f"Wrote designed gains into {write_config}")
        return EXIT_OK

    def identify(self, data_file: str, nz: Optional[int] = None, np_: Optional[int] = None,
                 operating_point: Optional[str] = None, dead_time: Optional[float] = None,
                 iv_iterations: Optional[int] = None, write_config: Optional[str] = None) -> int:
        """Identify a continuous model from a t,u,y trace."""
        cfg = self.config
        settings = cfg.identification()
        data = FileHandler.read_timeseries_csv(data_file)
        op = _parse_pair(operating_point, "operating_point") if operating_point else settings["operating_point"]
        nz = settings["nz"] if nz is None else nz
        np_ = settings["np"] if np_ is None else np_
        dead_time = settings["dead_time"] if dead_time is None else dead_time
        iterations = settings["iv_iterations"] if iv_iterations is None else iv_iterations

        identified = identify_iv(IdExperiment(data, op), nz, np_, dead_time, iterations,
                                 prefilter=settings["prefilter"])
        model = identified.model
        logger.info(f"G(s) = ({TextProcessor.format_polynomial(model.num)}) / "
                    f"({TextProcessor.format_polynomial(model.den)}) · exp(-{model.dead_time:.6g}s)")
        self._report([
            ("num", list(model.num)),
            ("den", list(model.den)),
            ("dead_time", model.dead_time),
            ("poles_real", sorted(p.real for p in model.poles())),
            ("zeros_real", sorted(z.real for z in model.zeros())),
            ("fit", identified.fit),
            ("residual_white", identified.residual_whiteness.is_white),
            ("unstable", identified.unstable),
            ("iterations", identified.iterations),
        ])
        target = write_config or self._path("identified.json")
        cfg.set("plant", plant_to_dict(model))
        cfg.set("sample_time", data.sample_time)
        cfg.save_to_file(target)
        return EXIT_OK

    def linearity(self, amplitudes: Optional[str] = None, f0: Optional[float] = None,
                  cycles: Optional[int] = None) -> int:
        """Sinusoidal linearity scan of the actuator and plant chain."""
        cfg = self.config
        settings = cfg.linearity()
        amplitude_list = _parse_list(amplitudes, "linearity.amplitudes") if amplitudes else settings["amplitudes"]
        f0 = settings["f0"] if f0 is None else f0
        cycles = settings["cycles"] if cycles is None else cycles
        plant = cfg.plant()
        operating_voltage = cfg.get("scenario.operating_point")[0]
        system = bldc_plant_system(cfg.bldc(), plant, operating_voltage) if settings["use_bldc_map"] else plant

        FileHandler.ensure_directory(self.out_dir)
        report = linearity_scan(system, f0, amplitude_list, cfg.sample_time, cycles=cycles,
                                threshold=settings["threshold"], max_distortion=settings["max_distortion"],
                                max_workers=AppConfig.get_max_workers())
        path = FileHandler.safe_write_csv(report.to_frame(), self._path("linearity.csv"))
        self._report([
            ("f0", f0),
            ("amplitudes", len(amplitude_list)),
            ("threshold", report.threshold),
            ("linear_range", report.linear_range),
            ("report", path),
        ])
        return EXIT_OK

    def trajectory(self, name: Optional[str] = None) -> int:
        return self.simulate("trajectory", name)

    def calibrate_k(self, slope: Optional[float] = None, write_config: Optional[str] = None) -> int:
        """Plant gain K matching the static speed/voltage slope at the operating point."""
        cfg = self.config
        operating_voltage = cfg.get("scenario.operating_point")[0]
        if slope is None:
            slope = cfg.bldc().slope_at(operating_voltage)
        gain = calibrate_gain(cfg.base_plant(), slope)
        self._report([("operating_voltage", operating_voltage), ("dc_slope", slope), ("k", gain)])
        if write_config:
            cfg.set("plant.gain", gain)
            cfg.save_to_file(write_config)
        return EXIT_OK

    def validate(self, data_file: str, operating_point: Optional[str] = None) -> int:
        """Score the configured plant against a recorded trace."""
        cfg = self.config
        data = FileHandler.read_timeseries_csv(data_file)
        op = _parse_pair(operating_point, "operating_point") if operating_point else cfg.identification()[
            "operating_point"]
        u, y = IdExperiment(data, op).deviations()
        report = compare_response(cfg.plant(), TimeSeries(data.t, u, y))
        self._report([("fit", report.fit), ("max_abs_error", report.max_abs_error), ("rms_error", report.rms_error)])
        return EXIT_OK

    def plot_script(self, csv_files: Sequence[str] = (), output: Optional[str] = None) -> int:
        """Write a gnuplot script plotting the given (or all emitted) CSVs."""
        files = list(csv_files)
        if not files:
            if not os.path.isdir(self.out_dir):
                raise ConfigValidationError(f"output directory {self.out_dir} does not exist", key="out")
            files = sorted(os.path.join(self.out_dir, f) for f in os.listdir(self.out_dir) if f.endswith(".csv"))
        lines = ["set datafile separator ','", "set key autotitle columnhead", "set grid",
                 "set terminal pngcairo size 900,600"]
        for path in files:
            columns = list(pd.read_csv(path, nrows=0).columns)
            stem = os.path.splitext(os.path.basename(path))[0]
            lines.append(f"set output '{stem}.png'")
            lines.append(_plot_line(path, stem, columns))
        target = output or self._path("plot.gp")
        FileHandler.write_text_atomic("\n".join(lines) + "\n", target)
        self._report([("files", len(files)), ("script", target)])
        return EXIT_OK

    def batch(self, config_files: Sequence[str]) -> int:
        """Simulate several configurations concurrently, one output directory each."""
        jobs = []
        for config_file in config_files:
            stem = os.path.splitext(os.path.basename(config_file))[0]
            tool = TrikeTool(config_file, os.path.join(self.out_dir, stem), None, self.overrides, quiet=True)
            jobs.append((stem, tool))
        for _, tool in jobs:
            tool.load()
        workers = min(AppConfig.get_max_workers(), max(1, len(jobs)))
        codes: Dict[str, int] = {}
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {stem: executor.submit(_quiet_simulate, tool) for stem, tool in jobs}
            for stem in tqdm(futures, desc="Scenarios", disable=not sys.stderr.isatty(), file=sys.stderr):
                codes[stem] = futures[stem].result()
        self._report([(f"{stem}", code) for stem, code in codes.items()])
        return max(codes.values(), default=EXIT_OK)

    def run_command(self, command: str, args: argparse.Namespace) -> int:
        """Dispatch a parsed command"""
        if command == "simulate":
            return self.simulate(args.loop, args.name)
        if command == "design":
            return self.design(args.write_config)
        if command == "identify":
            return self.identify(args.data, args.nz, args.np, args.op, args.dead_time, args.iv_iterations,
                                 args.write_config)
        if command == "linearity":
            return self.linearity(args.amplitudes, args.f0, args.cycles)
        if command == "trajectory":
            return self.trajectory(args.name)
        if command == "calibrate-k":
            return self.calibrate_k(args.slope, args.write_config)
        if command == "validate":
            return self.validate(args.data, args.op)
        if command == "plot-script":
            return self.plot_script(args.csv, args.output)
        if command == "batch":
            return self.batch(args.configs)
        raise ConfigValidationError(f"unknown command {command!r}")


def _plot_line(path: str, title: str, columns: List[str]) -> str:
    if "x" in columns and "y" in columns and "heading" in columns:
        x, y = columns.index("x") + 1, columns.index("y") + 1
        return f"set size ratio -1; plot '{path}' using {x}:{y} with lines title '{title}'; set size noratio"
    if columns and columns[0] == "t":
        series = ", ".join(f"'{path}' using 1:{i + 1} with lines" for i in range(1, len(columns)))
        return f"plot {series}"
    series = ", ".join(f"'{path}' using 1:{i + 1} with linespoints" for i in range(1, len(columns)))
    return f"plot {series}"


def _quiet_simulate(tool: TrikeTool) -> int:
    try:
        return tool.simulate()
    except Exception as e:
        logger.error(f"Scenario in {tool.out_dir} failed: {e}")
        return exit_code_for(e)


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse command line arguments"""
    parser = argparse.ArgumentParser(prog="trikectl", description="Trike control design and simulation toolkit")
    parser.add_argument("--config", help="Run configuration JSON (built-in defaults when omitted)")
    parser.add_argument("--out", help="Output directory (default: TRIKECTL_OUT_DIR or ./out)")
    parser.add_argument("--seed", type=int, help="Random seed for noise and PRBS signals")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="Dotted-path configuration override, repeatable")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")

    simulate = subparsers.add_parser("simulate", help="Run the configured loop and write its trace CSV")
    simulate.add_argument("--loop", choices=("velocity", "steering", "trajectory", "open_loop"),
                          help="Override scenario.loop")
    simulate.add_argument("--name", help="Output file stem (default: the loop name)")

    design = subparsers.add_parser("design", help="Design PID gains from the rise-time spec")
    design.add_argument("--write-config", help="Write a config copy with the gains filled in")

    identify = subparsers.add_parser("identify", help="Identify a model from a t,u,y CSV")
    identify.add_argument("data", help="Trace CSV with header t,u,y")
    identify.add_argument("--nz", type=int, help="Number of zeros")
    identify.add_argument("--np", type=int, help="Number of poles")
    identify.add_argument("--op", help="Operating point as VOLTAGE,SPEED")
    identify.add_argument("--dead-time", type=float, help="Known dead time in seconds")
    identify.add_argument("--iv-iterations", type=int, help="Refined IV passes (0 = least squares)")
    identify.add_argument("--write-config", help="Config copy with the identified plant")

    linearity = subparsers.add_parser("linearity", help="Sinusoidal linearity scan")
    linearity.add_argument("--amplitudes", help="Comma-separated amplitudes in volts")
    linearity.add_argument("--f0", type=float, help="Excitation frequency in Hz")
    linearity.add_argument("--cycles", type=int, help="Periods per record")

    trajectory = subparsers.add_parser("trajectory", help="Simulate the curvature loop (simulate --loop trajectory)")
    trajectory.add_argument("--name", help="Output file stem")

    calibrate = subparsers.add_parser("calibrate-k", help="Plant gain K from the static speed/voltage slope")
    calibrate.add_argument("--slope", type=float, help="Measured slope (default: BLDC map at the operating point)")
    calibrate.add_argument("--write-config", help="Config copy with plant.gain set")

    validate = subparsers.add_parser("validate", help="Compare the configured plant with a recorded trace")
    validate.add_argument("data", help="Trace CSV with header t,u,y")
    validate.add_argument("--op", help="Operating point as VOLTAGE,SPEED")

    plot = subparsers.add_parser("plot-script", help="Write a gnuplot script for emitted CSVs")
    plot.add_argument("csv", nargs="*", help="CSV files (default: every CSV in the output directory)")
    plot.add_argument("--output", help="Script path (default: <out>/plot.gp)")

    batch = subparsers.add_parser("batch", help="Simulate several configurations concurrently")
    batch.add_argument("configs", nargs="+", help="Configuration files")

    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    args = parse_args(argv)
    configure_logging(args.verbose)
    if not args.command:
        print("No command specified. Run with --help for usage information.", file=sys.stderr)
        return 2

    @exit_on_error()
    def run() -> int:
        tool = TrikeTool(args.config, args.out, args.seed, args.overrides)
        return tool.run_command(args.command, args)

    return run()


if __name__ == "__main__":
    sys.exit(main())
