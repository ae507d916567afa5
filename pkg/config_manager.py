#!/usr/bin/env python3
"""
Configuration Manager for the trike control toolkit.
Loads a run configuration document, applies dotted-path overrides, rejects
unknown keys and builds the validated domain objects a run needs.
"""

import copy
import json
import logging
import math
from typing import Any, Dict, List, Optional, Sequence

from drive_kinematics import WheelGeometry
from exceptions.control_exceptions import ConfigValidationError, ControlError, ImproperSystem
from lti_core import TransferFunction, tf_new
from pid_design import DesignResult, DesignSpec, DigitalPid, PidGains, design_from_spec
from robot_sim import BldcMap, Scenario, SignalSpec, SteeringPlant, TrajectoryConfig
from utils.file.file_handler import FileHandler

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

SIGNAL_TEMPLATE = {
    "kind": "step",
    "amplitude": 1.0,
    "start": 0.0,
    "frequency": 0.125,
    "width": 1.0,
    "hold": 5,
    "seed": 0,
}
GAINS_TEMPLATE = {"kp": 0.0, "ki": 0.0, "kd": 0.0}

DEFAULT_CONFIG: Dict[str, Any] = {
    "schema": SCHEMA_VERSION,
    "plant": {"num": [1.0, 2.8], "den": [1.0, 5.44, 2.2], "gain": 1.0, "dead_time": 0.3},
    "sample_time": 0.05,
    "design": {"rise_time": 0.5, "theta_deg": 5.0, "omega_w1": None, "ki": None, "domain": "s"},
    "gains": None,
    "controller": {"output_limits": None},
    "scenario": {
        "loop": "velocity",
        "duration": 40.0,
        "reference": dict(SIGNAL_TEMPLATE),
        "disturbance": None,
        "actuator_limits": [0.0, 1.0],
        "noise_std": 0.0,
        "operating_point": [11.0, 1.0],
        "use_bldc_map": True,
    },
    "bldc": {"knee_points": [[11.0, 1.0], [28.0, 4.0]], "source_voltage": 48.0},
    "geometry": {"wheel_radius": 0.1, "track_width": 0.4},
    "steering": {
        "time_constant": 0.2,
        "gain": 1.0,
        "steer_limit": 0.5,
        "gains": {"kp": 2.0, "ki": 5.0, "kd": 0.0},
    },
    "trajectory": {
        "horizon": 1.0,
        "speed": 1.0,
        "curvature_gains": {"kp": 0.5, "ki": 1.0, "kd": 0.0},
        "reference_path": dict(SIGNAL_TEMPLATE, amplitude=0.5),
    },
    "identification": {
        "nz": 1, "np": 2, "dead_time": None, "iv_iterations": 5, "prefilter": True, "operating_point": [0.0, 0.0],
    },
    "linearity": {
        "f0": 0.125,
        "amplitudes": [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0],
        "cycles": 10,
        "threshold": 0.95,
        "max_distortion": 0.002,
        "use_bldc_map": True,
    },
    "seed": 0,
}

# Keys whose default is null but which accept a sub-document of this shape
NULLABLE_SECTIONS = {
    "gains": GAINS_TEMPLATE,
    "scenario.disturbance": SIGNAL_TEMPLATE,
}


def convert_value(value: str) -> Any:
    """
    Convert a --set string to a typed value

    Tries int, float, bool words, JSON (for lists, objects and null), then
    falls back to the raw string.
    """
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        pass
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "y"):
        return True
    if lowered in ("false", "no", "n"):
        return False
    if lowered in ("null", "none"):
        return None
    if value.strip().startswith(("{", "[")):
        try:
            return json.loads(value)
        except json.JSONDecodeError as e:
            raise ConfigValidationError(f"Invalid JSON value {value!r}: {e.msg}") from e
    return value


def _template_for(path: str, template_value: Any) -> Any:
    return NULLABLE_SECTIONS.get(path, template_value)


def check_keys(document: Dict[str, Any], template: Dict[str, Any], prefix: str = "") -> None:
    """
    Reject keys that the template does not know, naming the dotted path

    Raises:
        ConfigValidationError: unknown key or a section that is not an object
    """
    for key, value in document.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in template:
            raise ConfigValidationError("unknown key", key=path)
        expected = _template_for(path, template[key])
        if isinstance(expected, dict):
            if value is None and path in NULLABLE_SECTIONS:
                continue
            if not isinstance(value, dict):
                raise ConfigValidationError("expected an object", key=path)
            check_keys(value, expected, path)


def deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively overlay update onto a copy of base."""
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


class _Section:
    """Typed reads from one part of the document, errors carry the dotted key."""

    def __init__(self, data: Dict[str, Any], prefix: str):
        self.data = data
        self.prefix = prefix

    def key(self, name: str) -> str:
        return f"{self.prefix}.{name}" if self.prefix else name

    def number(self, name: str, positive: bool = False, nonnegative: bool = False,
               optional: bool = False) -> Optional[float]:
        value = self.data.get(name)
        if value is None and optional:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigValidationError(f"expected a finite number, got {value!r}", key=self.key(name))
        if positive and not value > 0:
            raise ConfigValidationError(f"must be positive, got {value}", key=self.key(name))
        if nonnegative and value < 0:
            raise ConfigValidationError(f"must be non-negative, got {value}", key=self.key(name))
        return float(value)

    def integer(self, name: str, minimum: Optional[int] = None) -> int:
        value = self.data.get(name)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigValidationError(f"expected an integer, got {value!r}", key=self.key(name))
        if minimum is not None and value < minimum:
            raise ConfigValidationError(f"must be at least {minimum}, got {value}", key=self.key(name))
        return value

    def flag(self, name: str) -> bool:
        value = self.data.get(name)
        if not isinstance(value, bool):
            raise ConfigValidationError(f"expected true or false, got {value!r}", key=self.key(name))
        return value

    def text(self, name: str, choices: Sequence[str]) -> str:
        value = self.data.get(name)
        if value not in choices:
            raise ConfigValidationError(f"expected one of {', '.join(choices)}, got {value!r}", key=self.key(name))
        return value

    def vector(self, name: str, length: Optional[int] = None, optional: bool = False) -> Optional[List[float]]:
        value = self.data.get(name)
        if value is None and optional:
            return None
        if not isinstance(value, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in value):
            raise ConfigValidationError(f"expected a list of finite numbers, got {value!r}", key=self.key(name))
        if length is not None and len(value) != length:
            raise ConfigValidationError(f"expected {length} numbers, got {len(value)}", key=self.key(name))
        return [float(v) for v in value]

    def sub(self, name: str) -> "_Section":
        return _Section(self.data[name], self.key(name))


def _build(key: str, factory, *args, **kwargs):
    """Construct a domain object, reporting its validation failure against key."""
    try:
        return factory(*args, **kwargs)
    except ControlError as e:
        if isinstance(e, ConfigValidationError):
            raise
        raise ConfigValidationError(str(e), key=key) from e


class RunConfig:
    """
    Validated run configuration

    Holds the merged document (defaults, file, overrides) and builds the
    domain objects from it. Every builder runs once in validate(), so a bad
    document fails before any simulation starts.
    """

    def __init__(self, document: Optional[Dict[str, Any]] = None):
        document = {"schema": SCHEMA_VERSION} if document is None else document
        if "schema" not in document:
            raise ConfigValidationError("missing schema version", key="schema")
        self.config = deep_merge(DEFAULT_CONFIG, document)
        check_keys(self.config, DEFAULT_CONFIG)
        self.source: Optional[str] = None

    @classmethod
    def from_file(cls, config_file: str) -> "RunConfig":
        """Load a document from JSON; keys it omits take their defaults."""
        run_config = cls(FileHandler.load_json(config_file))
        run_config.source = config_file
        logger.info(f"Loaded configuration from {config_file}")
        return run_config

    def get(self, key: str, default: Any = None) -> Any:
        """Read a dotted key."""
        node: Any = self.config
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def set(self, key: str, value: Any) -> None:
        """
        Set a dotted key that the schema knows

        Raises:
            ConfigValidationError: unknown key
        """
        parts = key.split(".")
        template: Any = DEFAULT_CONFIG
        node = self.config
        for depth, part in enumerate(parts):
            path = ".".join(parts[:depth + 1])
            if not isinstance(template, dict) or part not in template:
                raise ConfigValidationError("unknown key", key=path)
            template = _template_for(path, template[part])
            if depth == len(parts) - 1:
                node[part] = value
            else:
                if node.get(part) is None:
                    node[part] = copy.deepcopy(template) if isinstance(template, dict) else {}
                node = node[part]
        check_keys(self.config, DEFAULT_CONFIG)
        logger.debug(f"Set {key}={value!r}")

    def apply_overrides(self, overrides: Sequence[str]) -> None:
        """Apply key=value strings from --set."""
        for item in overrides or []:
            if "=" not in item:
                raise ConfigValidationError(f"override {item!r} is not of the form key=value")
            key, raw = item.split("=", 1)
            self.set(key.strip(), convert_value(raw))

    def save_to_file(self, file_path: str) -> str:
        """Write the full document as JSON."""
        return FileHandler.save_json(self.config, file_path)

    # -- builders -----------------------------------------------------------

    @property
    def sample_time(self) -> float:
        return _Section(self.config, "").number("sample_time", positive=True)

    @property
    def seed(self) -> int:
        return _Section(self.config, "").integer("seed", minimum=0)

    def plant(self) -> TransferFunction:
        """Configured plant, gain applied."""
        return self.base_plant().scaled(_Section(self.config, "").sub("plant").number("gain"))

    def base_plant(self) -> TransferFunction:
        """Configured plant before the gain K."""
        section = _Section(self.config, "").sub("plant")
        num = section.vector("num")
        den = section.vector("den")
        dead_time = section.number("dead_time")
        if not den or all(c == 0.0 for c in den):
            raise ConfigValidationError("denominator must have a non-zero coefficient", key="plant.den")
        if not num:
            raise ConfigValidationError("numerator must not be empty", key="plant.num")
        if dead_time < 0.0:
            raise ConfigValidationError(f"must be non-negative, got {dead_time}", key="plant.dead_time")
        try:
            base = tf_new(num, den, dead_time)
        except ImproperSystem as e:
            raise ConfigValidationError(str(e), key="plant.num") from e
        except ControlError as e:
            raise ConfigValidationError(str(e), key="plant.den") from e
        return base

    def design_spec(self) -> DesignSpec:
        section = _Section(self.config, "").sub("design")
        rise_time = section.number("rise_time")
        theta = math.radians(section.number("theta_deg"))
        omega_w1 = section.number("omega_w1", optional=True)
        ki = section.number("ki", optional=True)
        try:
            return DesignSpec(rise_time, theta, omega_w1, ki)
        except ControlError as e:
            field_name = {"NonpositiveRiseTime": "rise_time", "ThetaOutOfRange": "theta_deg"}.get(
                type(e).__name__, "omega_w1" if omega_w1 is not None and not omega_w1 > 0 else "ki")
            raise ConfigValidationError(str(e), key=f"design.{field_name}") from e

    def design(self) -> DesignResult:
        """Gains designed from the plant and the design section."""
        domain = _Section(self.config, "").sub("design").text("domain", ("s", "w"))
        return _build("design", design_from_spec, self.plant(), self.design_spec(), self.sample_time, domain)

    def explicit_gains(self, key: str = "gains") -> Optional[PidGains]:
        raw = self.get(key)
        if raw is None:
            return None
        section = _Section(self.config, "")
        for part in key.split("."):
            section = section.sub(part)
        return _build(key, PidGains, section.number("kp"), section.number("ki"), section.number("kd"))

    def gains(self) -> PidGains:
        """Explicit gains when given, otherwise the designed ones."""
        explicit = self.explicit_gains()
        return explicit if explicit is not None else self.design().gains

    def controller(self, gains: Optional[PidGains] = None) -> DigitalPid:
        limits = _Section(self.config, "").sub("controller").vector("output_limits", length=2, optional=True)
        return _build("controller.output_limits", DigitalPid, gains or self.gains(), self.sample_time,
                      tuple(limits) if limits else None)

    def bldc(self) -> BldcMap:
        section = _Section(self.config, "").sub("bldc")
        knees = self.get("bldc.knee_points")
        if not isinstance(knees, list) or not all(isinstance(k, list) and len(k) == 2 for k in knees):
            raise ConfigValidationError("expected a list of [voltage, speed] pairs", key="bldc.knee_points")
        for index in range(len(knees)):
            _Section({"knee": knees[index]}, "bldc.knee_points").vector("knee", length=2)
        source = section.number("source_voltage", positive=True)
        return _build("bldc.knee_points", BldcMap, tuple(tuple(k) for k in knees), source)

    def geometry(self) -> WheelGeometry:
        section = _Section(self.config, "").sub("geometry")
        return _build("geometry", WheelGeometry, section.number("wheel_radius", positive=True),
                      section.number("track_width", positive=True))

    def signal(self, key: str) -> Optional[SignalSpec]:
        if self.get(key) is None:
            return None
        section = _Section(self.config, "")
        for part in key.split("."):
            section = section.sub(part)
        kind = section.text("kind", ("zero", "step", "ramp", "sine", "pulse", "prbs"))
        return _build(key, SignalSpec, kind, section.number("amplitude"), section.number("start", nonnegative=True),
                      section.number("frequency"), section.number("width"), section.integer("hold", minimum=1),
                      section.integer("seed", minimum=0))

    def steering(self) -> SteeringPlant:
        section = _Section(self.config, "").sub("steering")
        return _build("steering", SteeringPlant, section.number("time_constant", positive=True),
                      section.number("gain"), section.number("steer_limit", positive=True))

    def steering_controller(self) -> DigitalPid:
        return DigitalPid(self.explicit_gains("steering.gains"), self.sample_time)

    def trajectory(self) -> TrajectoryConfig:
        section = _Section(self.config, "").sub("trajectory")
        curvature_pid = DigitalPid(self.explicit_gains("trajectory.curvature_gains"), self.sample_time)
        return _build("trajectory", TrajectoryConfig, curvature_pid, self.steering_controller(),
                      section.number("horizon", positive=True), self.signal("trajectory.reference_path"),
                      self.geometry())

    def scenario(self, loop: Optional[str] = None) -> Scenario:
        """
        Scenario for the configured (or given) loop

        Trajectory runs track the trajectory speed as their reference and use
        the curvature PID as the scenario controller; steering runs use the
        steering PID; velocity runs use the designed or explicit gains.
        """
        section = _Section(self.config, "").sub("scenario")
        loop = loop or section.text("loop", ("velocity", "steering", "trajectory", "open_loop"))
        reference = self.signal("scenario.reference")
        if loop == "trajectory":
            speed = _Section(self.config, "").sub("trajectory").number("speed")
            reference = SignalSpec("step", speed)
            controller = DigitalPid(self.explicit_gains("trajectory.curvature_gains"), self.sample_time)
        elif loop == "steering":
            controller = self.steering_controller()
        elif loop == "velocity":
            controller = self.controller()
        else:
            controller = None
        limits = section.vector("actuator_limits", length=2, optional=True)
        operating_point = section.vector("operating_point", length=2)
        return _build(
            "scenario", Scenario, loop, self.plant(), controller, self.sample_time,
            section.number("duration", positive=True), reference,
            disturbance=self.signal("scenario.disturbance"),
            actuator_limits=tuple(limits) if limits else None,
            seed=self.seed,
            noise_std=section.number("noise_std", nonnegative=True),
            operating_point=tuple(operating_point),
            bldc=self.bldc(),
            use_bldc_map=section.flag("use_bldc_map"),
        )

    def identification(self) -> Dict[str, Any]:
        section = _Section(self.config, "").sub("identification")
        nz = section.integer("nz", minimum=0)
        np_ = section.integer("np", minimum=1)
        if nz > np_:
            raise ConfigValidationError(f"must not exceed identification.np ({np_})", key="identification.nz")
        return {
            "nz": nz,
            "np": np_,
            "dead_time": section.number("dead_time", nonnegative=True, optional=True),
            "iv_iterations": section.integer("iv_iterations", minimum=0),
            "prefilter": section.flag("prefilter"),
            "operating_point": tuple(section.vector("operating_point", length=2)),
        }

    def linearity(self) -> Dict[str, Any]:
        section = _Section(self.config, "").sub("linearity")
        amplitudes = section.vector("amplitudes")
        if not amplitudes or any(a <= 0 for a in amplitudes) or any(b <= a for a, b in zip(amplitudes, amplitudes[1:])):
            raise ConfigValidationError("must be positive and strictly ascending", key="linearity.amplitudes")
        threshold = section.number("threshold", positive=True)
        if threshold > 1.0:
            raise ConfigValidationError(f"must not exceed 1, got {threshold}", key="linearity.threshold")
        return {
            "f0": section.number("f0", positive=True),
            "amplitudes": amplitudes,
            "cycles": section.integer("cycles", minimum=2),
            "threshold": threshold,
            "max_distortion": section.number("max_distortion", positive=True, optional=True),
            "use_bldc_map": section.flag("use_bldc_map"),
        }

    def validate(self) -> "RunConfig":
        """
        Build every section once

        Raises:
            ConfigValidationError: naming the first offending key
        """
        schema = self.config.get("schema")
        if schema != SCHEMA_VERSION:
            raise ConfigValidationError(f"unsupported schema {schema!r}, expected {SCHEMA_VERSION}", key="schema")
        self.scenario()
        self.steering()
        self.trajectory()
        self.identification()
        self.linearity()
        logger.debug("Configuration validated")
        return self


def load_run_config(config_file: Optional[str] = None, overrides: Sequence[str] = ()) -> RunConfig:
    """
    Load, override and validate a run configuration

    Args:
        config_file: JSON document; the built-in defaults when None
        overrides: key=value strings

    Returns:
        Validated RunConfig
    """
    run_config = RunConfig.from_file(config_file) if config_file else RunConfig({"schema": SCHEMA_VERSION})
    run_config.apply_overrides(overrides)
    return run_config.validate()


def gains_to_dict(gains: PidGains) -> Dict[str, float]:
    return {"kp": gains.kp, "ki": gains.ki, "kd": gains.kd}


def plant_to_dict(model: TransferFunction) -> Dict[str, Any]:
    return {"num": list(model.num), "den": list(model.den), "gain": 1.0, "dead_time": model.dead_time}
