"""
Scenario files.

A scenario is a JSON object whose sections mirror the parameter objects of
the solver apps. Missing keys take their defaults, unknown keys and invalid
values are reported together in one ValidationError keyed by dotted path.
"""

import json
import logging
from dataclasses import MISSING, asdict, dataclass, field, fields, replace
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError

from apps.geometry_reg.penalties import PenaltyParams
from apps.mesh_core.generators import disk_mesh, half_disk_mesh, rectangle_mesh
from apps.mesh_core.mesh import BoundaryTag
from apps.mesh_core.mesh_io import load_msh
from apps.optimizer.params import LineSearchParams, OptimizerParams
from apps.optimizer.problem import DistanceOracle, ShapeProblem
from apps.scenarios.catalog import (
    BED_DEFAULTS,
    INITIAL_DEFAULTS,
    BedKind,
    BedSpec,
    InitialKind,
    InitialSpec,
)
from apps.scenarios.exceptions import ScenarioError
from apps.scenarios.scatter import BathymetryScatter
from apps.shape_gradient.elasticity import ElasticityParams
from apps.shape_gradient.objective import TimeRule
from apps.swe_adjoint.weights import ObjectiveWeights
from apps.swe_forward.params import ShockSensor, SWEParams, TimeScheme

logger = logging.getLogger(__name__)

SECTIONS = (
    "mesh",
    "bathymetry",
    "initial_condition",
    "swe",
    "objective",
    "penalties",
    "elasticity",
    "line_search",
    "optimizer",
    "time",
    "output",
    "gradcheck",
    "seed",
    "threads",
)
# Objective target that records the shore trace of the starting mesh.
REFERENCE_TARGET = "reference"

GENERATORS = {
    "half_disk": half_disk_mesh,
    "disk": disk_mesh,
    "rectangle": rectangle_mesh,
}
GENERATOR_DEFAULTS = {
    "half_disk": {
        "radius": 2.5,
        "h": 0.2,
        "obstacle_center": (0.0, 0.5),
        "obstacle_radius": 0.25,
        "n_obstacle": 64,
    },
    "disk": {
        "radius": 1.0,
        "h": 0.1,
        "center": (0.0, 0.0),
        "hole_center": None,
        "hole_radius": None,
        "n_hole": 64,
        "outer_tag": int(BoundaryTag.OPEN_SEA),
    },
    "rectangle": {
        "nx": 8,
        "ny": 8,
        "width": 1.0,
        "height": 1.0,
        "origin": (0.0, 0.0),
        "tags": None,
    },
}
# Types of the keys whose default is null.
NULLABLE = {
    "mesh.params.hole_center": tuple,
    "mesh.params.hole_radius": float,
    "mesh.params.tags": dict,
    "output.directory": str,
    "gradcheck.step": float,
}


@dataclass(frozen=True)
class MeshSpec:
    path: str = None
    tag_map: dict = None
    generator: str = None
    params: dict = field(default_factory=dict)

    def load(self):
        if self.path is not None:
            tag_map = None
            if self.tag_map is not None:
                tag_map = {int(k): BoundaryTag(int(v)) for k, v in self.tag_map.items()}
            return load_msh(self.path, tag_map)
        params = dict(self.params)
        if params.get("outer_tag") is not None:
            params["outer_tag"] = BoundaryTag(params["outer_tag"])
        if params.get("tags") is not None:
            params["tags"] = {side: BoundaryTag(tag) for side, tag in params["tags"].items()}
        return GENERATORS[self.generator](**params)

    def to_dict(self):
        if self.path is not None:
            return {"path": self.path, "tag_map": self.tag_map}
        return {"generator": self.generator, "params": dict(self.params)}


@dataclass(frozen=True)
class ObjectiveSpec:
    C: tuple = (1.0, 1.0, 1.0)
    target: object = (1.0, 0.0, 0.0)
    rule: str = TimeRule.TRAPEZOID
    spatial_data: bool = True

    @property
    def uses_reference(self):
        return self.target == REFERENCE_TARGET

    def weights(self, reference=None):
        """ObjectiveWeights, with ``reference`` standing in for a recorded target."""
        if self.uses_reference:
            if reference is None:
                raise ScenarioError("the reference target needs a recorded trajectory")
            return ObjectiveWeights(C=self.C, target=reference)
        return ObjectiveWeights(C=self.C, target=self.target)


@dataclass(frozen=True)
class OutputSpec:
    directory: str = None
    snapshot_stride: int = 0


@dataclass(frozen=True)
class GradcheckSpec:
    count: int = 3
    step: float = None
    pinned_times: bool = True


@dataclass(frozen=True)
class ScenarioConfig:
    mesh: MeshSpec
    bathymetry: BedSpec = field(default_factory=BedSpec)
    initial_condition: InitialSpec = field(default_factory=InitialSpec)
    swe: SWEParams = field(default_factory=SWEParams)
    objective: ObjectiveSpec = field(default_factory=ObjectiveSpec)
    penalties: PenaltyParams = field(default_factory=PenaltyParams)
    distance: str = DistanceOracle.POLYLINE
    elasticity: ElasticityParams = field(default_factory=ElasticityParams)
    line_search: LineSearchParams = field(default_factory=LineSearchParams)
    optimizer: OptimizerParams = field(default_factory=OptimizerParams)
    T: float = 2.5
    scheme: str = TimeScheme.SSPRK2
    output: OutputSpec = field(default_factory=OutputSpec)
    gradcheck: GradcheckSpec = field(default_factory=GradcheckSpec)
    seed: int = 0
    threads: int = 1

    def problem(self, reference=None, times=None):
        """ShapeProblem of this scenario."""
        return ShapeProblem(
            swe=self.swe,
            T=self.T,
            bathymetry=self.bathymetry,
            initial_condition=self.initial_condition,
            weights=self.objective.weights(reference),
            penalty_params=self.penalties,
            elasticity=self.elasticity,
            scheme=self.scheme,
            rule=self.objective.rule,
            spatial_data=self.objective.spatial_data,
            distance=self.distance,
            times=None if times is None else tuple(times),
        )

    def with_overrides(
        self, directory=None, threads=None, snapshot_stride=None, seed=None, max_iterations=None
    ):
        """Copy with command-line flags applied; None leaves a value unchanged."""
        config = self
        output = config.output
        if directory is not None:
            output = replace(output, directory=str(directory))
        if snapshot_stride is not None:
            output = replace(output, snapshot_stride=int(snapshot_stride))
        config = replace(config, output=output)
        if threads is not None:
            config = replace(config, threads=int(threads))
        if seed is not None:
            config = replace(config, seed=int(seed))
        if max_iterations is not None:
            config = replace(
                config, optimizer=replace(config.optimizer, max_iterations=int(max_iterations))
            )
        errors = {}
        _check_runtime(config, errors)
        if errors:
            raise ValidationError(errors)
        return config

    def to_dict(self):
        """Effective scenario as a JSON-ready object that parses back to an equal config."""
        penalties = asdict(self.penalties)
        penalties["distance"] = str(self.distance)
        swe = asdict(self.swe)
        swe["flux_kind"] = str(self.swe.flux_kind)
        return {
            "mesh": self.mesh.to_dict(),
            "bathymetry": {"kind": str(self.bathymetry.kind), "params": self.bathymetry.params},
            "initial_condition": {
                "kind": str(self.initial_condition.kind),
                "params": self.initial_condition.params,
            },
            "swe": swe,
            "objective": {
                "C": list(self.objective.C),
                "target": (
                    REFERENCE_TARGET
                    if self.objective.uses_reference
                    else list(self.objective.target)
                ),
                "rule": str(self.objective.rule),
                "spatial_data": self.objective.spatial_data,
            },
            "penalties": penalties,
            "elasticity": asdict(self.elasticity),
            "line_search": asdict(self.line_search),
            "optimizer": asdict(self.optimizer),
            "time": {"T": self.T, "scheme": str(self.scheme)},
            "output": asdict(self.output),
            "gradcheck": asdict(self.gradcheck),
            "seed": self.seed,
            "threads": self.threads,
        }

    def write(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_value(value, default, key, errors):
    """``value`` converted to the type of ``default``; mismatches are recorded in ``errors``."""
    expected = NULLABLE.get(key) if default is None else type(default)
    if value is None:
        if default is None:
            return None
        errors[key] = "must not be null"
        return default
    if isinstance(default, bool) or expected is bool:
        if not isinstance(value, bool):
            errors[key] = "must be true or false"
        return value
    if isinstance(default, str) or expected is str:
        if not isinstance(value, str):
            errors[key] = "must be a string"
        return value
    if expected is float:
        if not _is_number(value):
            errors[key] = "must be a number"
            return default
        return float(value)
    if isinstance(default, int) or expected is int:
        if not isinstance(value, int) or isinstance(value, bool):
            errors[key] = "must be an integer"
            return default
        return value
    if expected is dict:
        if not isinstance(value, dict):
            errors[key] = "must be an object"
            return default
        return dict(value)
    if isinstance(default, tuple) or expected is tuple:
        length = len(default) if default is not None else 2
        if not isinstance(value, (list, tuple)) or len(value) != length:
            errors[key] = f"must be a list of {length} numbers"
            return default
        if not all(_is_number(v) for v in value):
            errors[key] = f"must be a list of {length} numbers"
            return default
        return tuple(float(v) for v in value)
    return value


def _section(data, name, defaults, errors):
    values = dict(defaults)
    if data is None:
        return values
    if not isinstance(data, dict):
        errors[name] = "must be an object"
        return values
    for key, value in data.items():
        dotted = f"{name}.{key}"
        if key not in defaults:
            errors[dotted] = "unknown key"
            continue
        values[key] = _check_value(value, defaults[key], dotted, errors)
    return values


def _defaults(cls):
    return {
        f.name: f.default_factory() if f.default is MISSING else f.default for f in fields(cls)
    }


def _build(cls, values, prefix, errors):
    """Construct a parameter object, prefixing its own validation errors."""
    try:
        return cls(**values)
    except ValidationError as error:
        for key, messages in error.message_dict.items():
            errors[f"{prefix}.{key}"] = messages
        return None


def _choice(choices, value, key, errors):
    try:
        return choices(value)
    except ValueError:
        errors[key] = f"must be one of {', '.join(choices.values)}"
        return None


def _resolve(path, base_dir):
    path = Path(path).expanduser()
    if not path.is_absolute():
        path = Path(base_dir) / path
    return path.resolve()


def _parse_mesh(data, base_dir, errors):
    if data is None:
        errors["mesh"] = "a mesh path or generator is required"
        return None
    if isinstance(data, str):
        data = {"path": data}
    if not isinstance(data, dict):
        errors["mesh"] = "must be a path or an object"
        return None
    unknown = set(data) - {"path", "tag_map", "generator", "params"}
    for key in sorted(unknown):
        errors[f"mesh.{key}"] = "unknown key"
    if ("path" in data) == ("generator" in data):
        errors["mesh"] = "give exactly one of path and generator"
        return None

    if "path" in data:
        if not isinstance(data["path"], str):
            errors["mesh.path"] = "must be a string"
            return None
        path = _resolve(data["path"], base_dir)
        if not path.is_file():
            errors["mesh.path"] = f"file not found: {path}"
        tag_map = data.get("tag_map")
        if tag_map is not None:
            if not isinstance(tag_map, dict):
                errors["mesh.tag_map"] = "must be an object"
                tag_map = None
            else:
                try:
                    tag_map = {str(int(k)): int(BoundaryTag(int(v))) for k, v in tag_map.items()}
                except (TypeError, ValueError):
                    errors["mesh.tag_map"] = "must map physical tags to boundary tags 1, 2 or 3"
                    tag_map = None
        return MeshSpec(path=str(path), tag_map=tag_map)

    generator = data["generator"]
    if generator not in GENERATORS:
        errors["mesh.generator"] = f"must be one of {', '.join(GENERATORS)}"
        return None
    params = _section(data.get("params"), "mesh.params", GENERATOR_DEFAULTS[generator], errors)
    return MeshSpec(generator=generator, params=params)


def _parse_bathymetry(data, base_dir, errors):
    data = {} if data is None else data
    if not isinstance(data, dict):
        errors["bathymetry"] = "must be an object"
        return None
    for key in sorted(set(data) - {"kind", "params"}):
        errors[f"bathymetry.{key}"] = "unknown key"
    kind = _choice(BedKind, data.get("kind", BedKind.LINEAR), "bathymetry.kind", errors)
    if kind is None:
        return None
    params = _section(data.get("params"), "bathymetry.params", BED_DEFAULTS[kind], errors)
    if kind != BedKind.SCATTER:
        return BedSpec(kind=kind, params=params)

    if not params["path"]:
        errors["bathymetry.params.path"] = "a CSV file is required"
        return None
    path = _resolve(params["path"], base_dir)
    try:
        scatter = BathymetryScatter.from_csv(path)
    except ScenarioError as error:
        errors["bathymetry.params.path"] = str(error)
        return None
    return BedSpec(kind=kind, params={"path": str(path)}, scatter=scatter)


def _parse_initial(data, errors):
    data = {} if data is None else data
    if not isinstance(data, dict):
        errors["initial_condition"] = "must be an object"
        return None
    for key in sorted(set(data) - {"kind", "params"}):
        errors[f"initial_condition.{key}"] = "unknown key"
    default = InitialKind.GAUSSIAN
    kind = _choice(InitialKind, data.get("kind", default), "initial_condition.kind", errors)
    if kind is None:
        return None
    params = _section(
        data.get("params"), "initial_condition.params", INITIAL_DEFAULTS[kind], errors
    )
    return InitialSpec(kind=kind, params=params)


def _parse_swe(data, errors):
    defaults = _defaults(SWEParams)
    defaults["sensor"] = None
    defaults["flux_kind"] = str(defaults["flux_kind"])
    sensor = data.get("sensor") if isinstance(data, dict) else None
    if isinstance(data, dict):
        data = {key: value for key, value in data.items() if key != "sensor"}
    values = _section(data, "swe", defaults, errors)
    sensor_values = _section(sensor, "swe.sensor", _defaults(ShockSensor), errors)
    values["sensor"] = _build(ShockSensor, sensor_values, "swe.sensor", errors)
    if values["sensor"] is None:
        return None
    try:
        return SWEParams(**values)
    except ValidationError as error:
        for key, messages in error.message_dict.items():
            errors[f"swe.{key}"] = messages
    except ValueError:
        errors["swe.flux_kind"] = "unknown numerical flux"
    return None


def _parse_objective(data, errors):
    defaults = _defaults(ObjectiveSpec)
    target = None
    if isinstance(data, dict) and "target" in data:
        data = dict(data)
        target = data.pop("target")
    values = _section(data, "objective", defaults, errors)
    if target == REFERENCE_TARGET:
        values["target"] = REFERENCE_TARGET
    elif target is not None:
        values["target"] = _check_value(target, defaults["target"], "objective.target", errors)
    values["rule"] = _choice(TimeRule, values["rule"], "objective.rule", errors)
    spec = ObjectiveSpec(**values)
    if values["rule"] is not None and not spec.uses_reference:
        try:
            spec.weights()
        except ValidationError as error:
            for key, messages in error.message_dict.items():
                errors[f"objective.{key}"] = messages
    return spec


def _check_runtime(config, errors):
    if not config.T > 0:
        errors["time.T"] = "must be positive"
    if config.output.snapshot_stride < 0:
        errors["output.snapshot_stride"] = "must be non-negative"
    if config.gradcheck.count < 1:
        errors["gradcheck.count"] = "must be at least 1"
    if config.gradcheck.step is not None and not config.gradcheck.step > 0:
        errors["gradcheck.step"] = "must be positive"
    if config.seed < 0:
        errors["seed"] = "must be non-negative"
    if config.threads < 1:
        errors["threads"] = "must be at least 1"


def parse_config(source, base_dir=None):
    """
    Parse a scenario from a JSON file path or an already loaded object.

    Relative file names resolve against ``base_dir``, by default the directory
    of the scenario file.
    """
    if isinstance(source, dict):
        data = source
        base_dir = Path.cwd() if base_dir is None else Path(base_dir)
    else:
        path = Path(source)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ScenarioError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path} is not valid JSON: {exc}") from exc
        base_dir = path.parent if base_dir is None else Path(base_dir)
    if not isinstance(data, dict):
        raise ScenarioError("a scenario must be a JSON object")

    errors = {}
    for key in sorted(set(data) - set(SECTIONS)):
        errors[key] = "unknown key"

    values = {
        "mesh": _parse_mesh(data.get("mesh"), base_dir, errors),
        "bathymetry": _parse_bathymetry(data.get("bathymetry"), base_dir, errors),
        "initial_condition": _parse_initial(data.get("initial_condition"), errors),
        "swe": _parse_swe(data.get("swe"), errors),
        "objective": _parse_objective(data.get("objective"), errors),
    }
    penalties = _section(
        data.get("penalties"),
        "penalties",
        {**_defaults(PenaltyParams), "distance": str(DistanceOracle.POLYLINE)},
        errors,
    )
    values["distance"] = _choice(
        DistanceOracle, penalties.pop("distance"), "penalties.distance", errors
    )
    values["penalties"] = _build(PenaltyParams, penalties, "penalties", errors)
    for name, cls in (
        ("elasticity", ElasticityParams),
        ("line_search", LineSearchParams),
        ("optimizer", OptimizerParams),
    ):
        section = _section(data.get(name), name, _defaults(cls), errors)
        values[name] = _build(cls, section, name, errors)

    time = _section(
        data.get("time"), "time", {"T": 2.5, "scheme": str(TimeScheme.SSPRK2)}, errors
    )
    values["T"] = time["T"]
    values["scheme"] = _choice(TimeScheme, time["scheme"], "time.scheme", errors)
    output_defaults = {
        "directory": None,
        "snapshot_stride": int(settings.SHOREOPT["SNAPSHOT_STRIDE"]),
    }
    values["output"] = OutputSpec(**_section(data.get("output"), "output", output_defaults, errors))
    values["gradcheck"] = GradcheckSpec(
        **_section(data.get("gradcheck"), "gradcheck", _defaults(GradcheckSpec), errors)
    )
    values["seed"] = _check_value(data.get("seed", 0), 0, "seed", errors)
    threads = int(settings.SHOREOPT["THREADS"])
    values["threads"] = _check_value(data.get("threads", threads), threads, "threads", errors)

    if errors:
        raise ValidationError(errors)
    config = ScenarioConfig(**values)
    _check_runtime(config, errors)
    if errors:
        raise ValidationError(errors)
    logger.debug("Parsed scenario with mesh %s", config.mesh)
    return config
