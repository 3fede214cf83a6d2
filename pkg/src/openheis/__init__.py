"""Open Heisenberg spin chains: exact Lindblad dynamics and their mean-field reduction."""

from .config import ExperimentConfig, load_config, parse_config
from .experiments import run_experiment
from .lindblad import (
    build_liouvillian,
    evolve_rk4,
    evolve_spectral,
    spectral_decompose,
    steady_state_exact,
)
from .meanfield import MeanFieldConfig, hysteresis_sweep, integrate, ll_rhs, mf_rhs, steady_state
from .model import ChainModel
from .observables import concurrence, magnetization, partial_trace, two_point_correlation
from .presets import PRESETS, get_preset, list_presets

__version__ = "0.1.0"
