"""Physical configuration of an open Heisenberg chain.

Natural units throughout: the gyromagnetic ratio and hbar are 1, so fields,
couplings and rates all share one energy/time scale.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

AXES = ("x", "y", "z")
SIGNS = ("+", "-")

# Defaults of the thermal rate parameterization.
DEFAULT_N_B = 0.08
DEFAULT_G_RATIO = 0.1


def axis_index(axis: str) -> int:
    try:
        return AXES.index(axis)
    except ValueError:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}") from None


def sign_index(sign: str | int) -> int:
    if sign in ("+", 1, +1):
        return 0
    if sign in ("-", -1):
        return 1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def _frozen_array(values, shape, name) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != shape:
        raise ConfigError(f"expected shape {shape}, got {arr.shape}", field=name)
    if not np.all(np.isfinite(arr)):
        raise ConfigError("values must be finite", field=name)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ChainModel:
    """Open Heisenberg chain with on-site and nearest-neighbour dissipation.

    Rate arrays have shape ``(3, 2)``: rows are the axes ``x, y, z`` and
    columns the signs ``+`` (absorption) and ``-`` (emission).
    """

    n_sites: int
    b_field: np.ndarray = field(default_factory=lambda: np.zeros(3))
    couplings: np.ndarray = field(default_factory=lambda: np.zeros(3))
    on_site_rates: np.ndarray = field(default_factory=lambda: np.zeros((3, 2)))
    neighbour_rates: np.ndarray = field(default_factory=lambda: np.zeros((3, 2)))
    n_b: float = DEFAULT_N_B

    def __post_init__(self):
        if isinstance(self.n_sites, bool) or int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ConfigError("must be an integer >= 1", field="n_sites")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        object.__setattr__(self, "b_field", _frozen_array(self.b_field, (3,), "b_field"))
        object.__setattr__(self, "couplings", _frozen_array(self.couplings, (3,), "couplings"))
        for name in ("on_site_rates", "neighbour_rates"):
            arr = _frozen_array(getattr(self, name), (3, 2), name)
            if np.any(arr < 0):
                raise ConfigError("rates must be nonnegative", field=name)
            object.__setattr__(self, name, arr)
        if not np.isfinite(self.n_b) or self.n_b < 0:
            raise ConfigError("mean boson number must be nonnegative", field="n_b")
        object.__setattr__(self, "n_b", float(self.n_b))

    @classmethod
    def thermal(
        cls,
        n_sites: int,
        b_field=(0.0, 0.0, 0.0),
        couplings=(0.0, 0.0, 0.0),
        gamma: float = 0.0,
        n_b: float = DEFAULT_N_B,
        g_ratio: float = DEFAULT_G_RATIO,
        g_axes: str = "z",
    ) -> "ChainModel":
        """Build a model from the total on-site damping ``gamma``.

        ``gamma_{z,+} = gamma0 * n_b`` and ``gamma_{z,-} = gamma0 * (n_b + 1)``
        with ``gamma0 = gamma / (2 n_b + 1)``. Neighbour rates copy the z
        rates scaled by ``g_ratio``, on the z axis only (``g_axes="z"``) or on
        all three axes (``g_axes="all"``).
        """
        if gamma < 0:
            raise ConfigError("total damping must be nonnegative", field="gamma")
        if g_ratio < 0:
            raise ConfigError("must be nonnegative", field="g_ratio")
        if n_b < 0:
            raise ConfigError("mean boson number must be nonnegative", field="n_b")
        gamma0 = gamma / (2.0 * n_b + 1.0)
        on_site = np.zeros((3, 2))
        on_site[2] = (gamma0 * n_b, gamma0 * (n_b + 1.0))
        neighbour = np.zeros((3, 2))
        if g_axes == "z":
            neighbour[2] = g_ratio * on_site[2]
        elif g_axes == "all":
            neighbour[:] = g_ratio * on_site[2]
        else:
            raise ConfigError("must be 'z' or 'all'", field="g_axes")
        return cls(n_sites, b_field, couplings, on_site, neighbour, n_b)

    @property
    def total_damping(self) -> float:
        """Gamma = gamma_{z,-} + gamma_{z,+}."""
        return float(self.on_site_rates[2, 0] + self.on_site_rates[2, 1])

    @property
    def neighbour_damping(self) -> np.ndarray:
        """Net neighbour rates g_alpha = g_{alpha,-} - g_{alpha,+}."""
        return self.neighbour_rates[:, 1] - self.neighbour_rates[:, 0]

    @property
    def hilbert_dim(self) -> int:
        return 2**self.n_sites

    def replace(self, **changes) -> "ChainModel":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "b_field": self.b_field.tolist(),
            "couplings": self.couplings.tolist(),
            "on_site_rates": self.on_site_rates.tolist(),
            "neighbour_rates": self.neighbour_rates.tolist(),
            "n_b": self.n_b,
        }

    def __eq__(self, other):
        if not isinstance(other, ChainModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return (
            f"ChainModel(n_sites={self.n_sites}, b_field={self.b_field.tolist()}, "
            f"couplings={self.couplings.tolist()}, on_site_rates={self.on_site_rates.tolist()}, "
            f"neighbour_rates={self.neighbour_rates.tolist()}, n_b={self.n_b})"
        )
