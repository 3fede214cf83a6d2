"""Experiment configuration: strict JSON in, validated dataclasses out."""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, field

import jsonschema
import numpy as np

from .errors import ConfigError
from .lindblad import bloch_state, product_state
from .meanfield import MeanFieldConfig, tilted_state
from .model import DEFAULT_G_RATIO, DEFAULT_N_B, ChainModel
from .spin import axis_eigenstate

KINDS = ("dynamics", "hysteresis", "compare", "correlations", "spectrum")
SOLVERS = ("rk4", "spectral", "auto")
SWEEP_PARAMS = ("n_sites", "v_x", "v_z", "delta", "gamma")

_VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_RATES = {
    "type": "array",
    "items": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2, "maxItems": 2},
    "minItems": 3,
    "maxItems": 3,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "openheis experiment",
    "type": "object",
    "additionalProperties": False,
    "required": ["kind", "model"],
    "properties": {
        "kind": {"enum": list(KINDS)},
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n_sites"],
            "properties": {
                "n_sites": {"type": "integer", "minimum": 1},
                "b_field": _VEC3,
                "couplings": _VEC3,
                "gamma": {"type": ["number", "null"], "minimum": 0},
                "on_site_rates": {"oneOf": [_RATES, {"type": "null"}]},
                "neighbour_rates": {"oneOf": [_RATES, {"type": "null"}]},
                "n_b": {"type": "number", "minimum": 0},
                "g_ratio": {"type": "number", "minimum": 0},
                "g_axes": {"enum": ["z", "all"]},
            },
        },
        "meanfield": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "damping_mode": {"enum": ["fixed_d", "ll_alpha"]},
                "alpha": {"type": "number", "minimum": 0},
                "d_vector": {"oneOf": [_VEC3, {"type": "null"}]},
                "mf_mode": {"enum": ["collective", "per_site"]},
            },
        },
        "solver": {"enum": list(SOLVERS)},
        "t_end": {"type": "number", "exclusiveMinimum": 0},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "sample_every": {"type": "integer", "minimum": 1},
        "bz_grid": {"type": "array", "items": {"type": "number"}},
        "initial_state": {"type": "string"},
        "observables": {"type": "array", "items": {"type": "string"}},
        "sweep": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["param", "values"],
                    "properties": {
                        "param": {"enum": list(SWEEP_PARAMS)},
                        "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    },
                },
            ]
        },
        "window": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "output_path": {"type": "string"},
        "seed": {"type": "integer"},
    },
}

_TILTED = re.compile(r"^tilted\(\s*([^,\s]+)\s*,\s*([^,\s)]+)\s*\)$")
_OBSERVABLE = re.compile(r"^C(?:([xyz])([xyz]))?([1-9])([1-9])$")


class UnknownKeyError(ConfigError):
    pass


class ConfigSyntaxError(ConfigError):
    pass


@dataclass
class ModelSpec:
    """On-disk model section; rates are explicit or derived from ``gamma``."""

    n_sites: int
    b_field: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    couplings: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    gamma: float | None = None
    on_site_rates: list | None = None
    neighbour_rates: list | None = None
    n_b: float = DEFAULT_N_B
    g_ratio: float = DEFAULT_G_RATIO
    g_axes: str = "z"

    def build(self) -> ChainModel:
        explicit = self.on_site_rates is not None or self.neighbour_rates is not None
        if explicit and self.gamma is not None:
            raise ConfigError("give either gamma or explicit rate arrays, not both", field="model.gamma")
        if explicit:
            zeros = [[0.0, 0.0]] * 3
            return ChainModel(
                self.n_sites,
                self.b_field,
                self.couplings,
                self.on_site_rates if self.on_site_rates is not None else zeros,
                self.neighbour_rates if self.neighbour_rates is not None else zeros,
                self.n_b,
            )
        return ChainModel.thermal(
            self.n_sites, self.b_field, self.couplings, self.gamma or 0.0, self.n_b, self.g_ratio, self.g_axes
        )


@dataclass
class MeanFieldSpec:
    damping_mode: str = "fixed_d"
    alpha: float = 0.0
    d_vector: list | None = None
    mf_mode: str = "collective"

    def build(self, model: ChainModel) -> MeanFieldConfig:
        return MeanFieldConfig(model, self.damping_mode, self.alpha, self.d_vector, self.mf_mode)


@dataclass
class ExperimentConfig:
    kind: str
    model: ModelSpec
    meanfield: MeanFieldSpec = field(default_factory=MeanFieldSpec)
    solver: str = "auto"
    t_end: float = 100.0
    dt: float = 1e-3
    sample_every: int = 100
    bz_grid: list = field(default_factory=list)
    initial_state: str = "all_up_x"
    observables: list = field(default_factory=lambda: ["Cxx12", "C12"])
    sweep: dict | None = None
    window: list = field(default_factory=lambda: [0.0, 1e3])
    output_path: str = "out/experiment"
    seed: int = 0  # reserved; every run is deterministic

    def __post_init__(self):
        self.validate()

    def validate(self):
        self.chain_model()
        self.meanfield_config()
        self.initial_angles()
        for name in self.observables:
            parse_observable(name)
        if self.kind == "hysteresis" and len(self.bz_grid) < 2:
            raise ConfigError("hysteresis needs at least two grid points", field="bz_grid")
        if self.bz_grid:
            steps = np.diff(self.bz_grid)
            if not (np.all(steps > 0) or np.all(steps < 0)):
                raise ConfigError("grid must be strictly monotone", field="bz_grid")
        if not self.window[0] < self.window[1]:
            raise ConfigError("window must be increasing", field="window")
        n_steps = self.t_end / self.dt
        if abs(n_steps - round(n_steps)) > 1e-6 * max(1.0, n_steps):
            raise ConfigError("t_end must be a multiple of dt", field="t_end")

    # --- derived objects ----------------------------------------------------

    def chain_model(self, **overrides) -> ChainModel:
        spec = ModelSpec(**{**asdict(self.model), **overrides})
        return spec.build()

    def meanfield_config(self, model: ChainModel | None = None) -> MeanFieldConfig:
        return self.meanfield.build(model if model is not None else self.chain_model())

    def initial_angles(self) -> tuple[float, float]:
        """Polar and azimuthal angle of the initial single-spin direction."""
        name = self.initial_state
        if name == "all_up_x":
            return math.pi / 2, 0.0
        if name == "all_up_z":
            return 0.0, 0.0
        m = _TILTED.match(name)
        if m is None:
            raise ConfigError(
                "expected all_up_x, all_up_z or tilted(theta,phi)", field="initial_state"
            )
        try:
            return float(m.group(1)), float(m.group(2))
        except ValueError:
            raise ConfigError("tilted angles must be numbers", field="initial_state") from None

    def initial_vector(self) -> np.ndarray:
        if self.initial_state == "all_up_x":
            return np.array([1.0, 0.0, 0.0])
        if self.initial_state == "all_up_z":
            return np.array([0.0, 0.0, 1.0])
        return tilted_state(*self.initial_angles())

    def initial_mf_state(self, mf: MeanFieldConfig) -> np.ndarray:
        vec = self.initial_vector()
        return vec if mf.mf_mode == "collective" else np.tile(vec, (mf.model.n_sites, 1))

    def initial_density_matrix(self, n_sites: int) -> np.ndarray:
        if self.initial_state == "all_up_x":
            return product_state(axis_eigenstate("x", "up"), n_sites)
        if self.initial_state == "all_up_z":
            return product_state(axis_eigenstate("z", "up"), n_sites)
        return product_state(bloch_state(self.initial_vector()), n_sites)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def parse_observable(name: str) -> tuple:
    """``"Cxx12"`` -> ``("corr", 1, 2, "x", "x")``; ``"C12"`` -> ``("conc", 1, 2)``."""
    m = _OBSERVABLE.match(name)
    if m is None or m.group(3) == m.group(4):
        raise ConfigError(f"unknown observable {name!r}", field="observables")
    i, j = int(m.group(3)), int(m.group(4))
    if m.group(1) is None:
        return ("conc", i, j)
    return ("corr", i, j, m.group(1), m.group(2))


def _line_of(text: str, key: str) -> int | None:
    for lineno, line in enumerate(text.splitlines(), start=1):
        if f'"{key}"' in line:
            return lineno
    return None


def from_dict(data: dict, text: str | None = None) -> ExperimentConfig:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = ".".join(str(p) for p in err.absolute_path) or "<root>"
        if err.validator == "additionalProperties":
            extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
            key = extra[0] if extra else None
            line = _line_of(text, key) if (text and key) else None
            raise UnknownKeyError(f"unknown key {key!r} in {path}", field=path, line=line)
        last = err.absolute_path[-1] if err.absolute_path else None
        line = _line_of(text, str(last)) if (text and isinstance(last, str)) else None
        raise ConfigError(err.message, field=path, line=line)
    data = dict(data)
    model = ModelSpec(**data.pop("model"))
    meanfield = MeanFieldSpec(**data.pop("meanfield", {}))
    return ExperimentConfig(model=model, meanfield=meanfield, **data)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON experiment description."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigSyntaxError(exc.msg, line=exc.lineno) from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object")
    return from_dict(data, text)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
