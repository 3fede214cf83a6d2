"""Mean-field magnetization dynamics and the generalized Landau-Lifshitz equation.

A magnetization state is a float array: shape ``(3,)`` in collective mode
(one representative vector) or ``(N, 3)`` in per-site mode. Per-site mode
couples each site to the mean direction of its neighbours, so the chain ends
see half the exchange field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    ConfigError,
    IntegrationDivergedError,
    NonConvergedError,
    UnsupportedConfigurationError,
)
from .model import ChainModel

DAMPING_MODES = ("fixed_d", "ll_alpha")
MF_MODES = ("collective", "per_site")

DEFAULT_DT = 1e-3
SS_TOL = 1e-9
SS_CONSECUTIVE = 10
SS_CHECK_INTERVAL = 0.1
SS_T_MAX = 1e4
NORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MeanFieldConfig:
    """Model plus the choice of damping vector and mean-field resolution.

    ``fixed_d`` uses ``D = g / 2`` built from the model's net neighbour rates
    unless ``d_vector`` is given; ``ll_alpha`` ties ``D = alpha * B_eff`` at
    every instant.
    """

    model: ChainModel
    damping_mode: str = "fixed_d"
    alpha: float = 0.0
    d_vector: np.ndarray | None = None
    mf_mode: str = "collective"

    def __post_init__(self):
        if self.damping_mode not in DAMPING_MODES:
            raise ConfigError(f"must be one of {DAMPING_MODES}", field="damping_mode")
        if self.mf_mode not in MF_MODES:
            raise ConfigError(f"must be one of {MF_MODES}", field="mf_mode")
        if not np.isfinite(self.alpha) or self.alpha < 0:
            raise ConfigError("must be a nonnegative real", field="alpha")
        if self.d_vector is None:
            d = 0.5 * self.model.neighbour_damping
        else:
            d = np.array(self.d_vector, dtype=float)
            if d.shape != (3,) or not np.all(np.isfinite(d)):
                raise ConfigError("must be a finite 3-vector", field="d_vector")
        d = np.array(d, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "d_vector", d)

    @property
    def n_vectors(self) -> int:
        return 1 if self.mf_mode == "collective" else self.model.n_sites

    def with_model(self, model: ChainModel) -> "MeanFieldConfig":
        d = None if self.damping_mode == "ll_alpha" else self.d_vector
        return MeanFieldConfig(model, self.damping_mode, self.alpha, d, self.mf_mode)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (T, n, 3)
    mode: str = "collective"

    @property
    def magnetization(self) -> np.ndarray:
        """Chain-averaged magnetization, shape ``(T, 3)``."""
        return self.states.mean(axis=1)

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.magnetization, axis=1)


@dataclass
class HysteresisCurve:
    """Steady states along a descending and an ascending field sweep.

    Rows of each branch are ``(B_z, M_z, M_x, M_y)`` in traversal order.
    """

    branch_down: np.ndarray
    branch_up: np.ndarray
    coercive_field: float
    switching_fields: tuple = field(default=(None, None))


# --- vector algebra ---------------------------------------------------------


def effective_field(m_unit, model: ChainModel) -> np.ndarray:
    """External field plus the anisotropy field ``m_alpha V_alpha``."""
    m = np.asarray(m_unit, dtype=float)
    r = np.linalg.norm(m)
    if r == 0.0:
        raise ValueError("magnetization direction undefined for |M| = 0")
    if r > 1.0 + NORM_TOL:
        raise ValueError(f"expected a unit direction, got |m| = {r}")
    return model.b_field + m * model.couplings


def damping_terms(M, g) -> np.ndarray:
    """Neighbour damping components ``(L_x, L_y, L_z)`` for net rates ``g``."""
    mx, my, mz = M
    gx, gy, gz = g
    return np.array(
        [
            -gz * mx * mz - gy * mx * my + gx * (my**2 + mz**2),
            -gz * my * mz - gx * mx * my + gy * (mx**2 + mz**2),
            -gy * my * mz - gx * mx * mz + gz * (mx**2 + my**2),
        ]
    )


def landau_lifshitz_rhs(M, b_eff, alpha: float) -> np.ndarray:
    """Classic LL form: ``-M x B_eff - (alpha/|M|) M x (M x B_eff)``."""
    M = np.asarray(M, dtype=float)
    return -np.cross(M, b_eff) - alpha / np.linalg.norm(M) * np.cross(M, np.cross(M, b_eff))


def relaxation_tensor(gamma: float) -> np.ndarray:
    return np.diag([gamma / 2.0, gamma / 2.0, gamma])


def noise_vector(gamma: float) -> np.ndarray:
    return np.array([0.0, 0.0, gamma])


# --- right-hand sides -------------------------------------------------------


def _check_supported(model: ChainModel):
    if np.any(model.on_site_rates[:2] != 0.0):
        raise UnsupportedConfigurationError(
            "mean-field equations require gamma_{x,±} = gamma_{y,±} = 0", field="on_site_rates"
        )


def _kernel_args(config: MeanFieldConfig):
    model = config.model
    _check_supported(model)
    ll_mode = config.damping_mode == "ll_alpha"
    return (
        np.ascontiguousarray(model.b_field, dtype=float),
        np.ascontiguousarray(model.couplings, dtype=float),
        np.ascontiguousarray(2.0 * config.d_vector, dtype=float),
        model.total_damping,
        float(config.alpha),
        ll_mode,
        config.mf_mode == "per_site",
    )


def _as_state(state, config: MeanFieldConfig) -> np.ndarray:
    arr = np.array(state, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"state must have shape (3,) or (n, 3), got {np.shape(state)}")
    if arr.shape[0] != config.n_vectors:
        raise ValueError(
            f"{config.mf_mode} mode expects {config.n_vectors} vector(s), got {arr.shape[0]}"
        )
    return np.ascontiguousarray(arr)


def mf_rhs(state, config: MeanFieldConfig) -> np.ndarray:
    """Component form of the coupled mean-field equations, dM/dt."""
    arr = _as_state(state, config)
    out = np.empty_like(arr)
    status = _kernels.rhs(arr, *_kernel_args(config), out)
    if status == _kernels.ZERO_NORM:
        raise ValueError("magnetization direction undefined for |M| = 0")
    return out.reshape(np.shape(state))


def ll_rhs(M, config: MeanFieldConfig, noise: bool = True) -> np.ndarray:
    """Vector form of the generalized LL equation for a collective magnetization.

    ``dM/dt = -M x B_eff - (1/|M|) M x (M x D) - R M - R0``. With
    ``noise=False`` the constant term ``R0`` is dropped (Callen form).
    """
    M = np.asarray(M, dtype=float)
    r = np.linalg.norm(M)
    if r == 0.0:
        raise ValueError("magnetization direction undefined for |M| = 0")
    model = config.model
    _check_supported(model)
    b_eff = effective_field(M / r, model)
    d = config.alpha * b_eff if config.damping_mode == "ll_alpha" else config.d_vector
    gamma = model.total_damping
    out = -np.cross(M, b_eff) - np.cross(M, np.cross(M, d)) / r - relaxation_tensor(gamma) @ M
    if noise:
        out = out - noise_vector(gamma)
    return out


# --- time integration -------------------------------------------------------


def _n_steps(t_end: float, dt: float) -> int:
    if not dt > 0 or not t_end > 0:
        raise ValueError("dt and t_end must be positive")
    n = int(round(t_end / dt))
    if n < 1 or not math.isclose(n * dt, t_end, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"t_end={t_end} is not a multiple of dt={dt}")
    return n


def _raise_for(status: int, t: float):
    if status == _kernels.ZERO_NORM:
        raise IntegrationDivergedError(f"magnetization collapsed to zero at t={t:g}")
    if status == _kernels.NON_FINITE:
        raise IntegrationDivergedError(f"non-finite state encountered at t={t:g}")


def integrate(config: MeanFieldConfig, M0, t_end: float, dt: float = DEFAULT_DT, sample_every: int = 1) -> Trajectory:
    """Classical fixed-step RK4; samples every ``sample_every`` steps, including t=0."""
    n_steps = _n_steps(t_end, dt)
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    M = _as_state(M0, config)
    n_samples = n_steps // sample_every + 1
    samples = np.empty((n_samples, M.shape[0], 3))
    status, written = _kernels.integrate(M, dt, n_steps, sample_every, *_kernel_args(config), samples)
    times = dt * sample_every * np.arange(n_samples)
    if status != _kernels.OK:
        _raise_for(status, times[written - 1])
    return Trajectory(times, samples, config.mf_mode)


def step_halving_error(config: MeanFieldConfig, M0, t_end: float, dt: float = DEFAULT_DT) -> float:
    """Max difference of the final state between step ``dt`` and ``dt/2``."""
    coarse = integrate(config, M0, t_end, dt, sample_every=_n_steps(t_end, dt))
    fine = integrate(config, M0, t_end, dt / 2, sample_every=_n_steps(t_end, dt / 2))
    return float(np.max(np.abs(coarse.states[-1] - fine.states[-1])))


def steady_state(
    config: MeanFieldConfig,
    M0,
    dt: float = DEFAULT_DT,
    tol: float = SS_TOL,
    t_max: float = SS_T_MAX,
    consecutive: int = SS_CONSECUTIVE,
    check_interval: float = SS_CHECK_INTERVAL,
) -> np.ndarray:
    """Integrate from ``M0`` until the max-norm of dM/dt stays below ``tol``.

    The residual is checked every ``check_interval`` time units and must hold
    for ``consecutive`` checks in a row. Returns the state in the shape of ``M0``.

    Raises
    ------
    NonConvergedError
        If ``t_max`` is reached first; the exception carries the last state.
    """
    M = _as_state(M0, config)
    check_every = max(1, int(round(check_interval / dt)))
    max_steps = int(math.ceil(t_max / dt))
    status, steps, residual = _kernels.run_to_steady(
        M, dt, max_steps, check_every, tol, consecutive, *_kernel_args(config)
    )
    _raise_for(status, steps * dt)
    out = M.reshape(np.shape(M0))
    if status == _kernels.BUDGET:
        raise NonConvergedError(
            f"no steady state within t_max={t_max:g} (residual {residual:.3e})",
            last_state=out,
            residual=float(residual),
        )
    return out


# --- hysteresis -------------------------------------------------------------


def tilted_state(theta: float, phi: float, norm: float = 1.0) -> np.ndarray:
    return norm * np.array(
        [math.cos(phi) * math.sin(theta), math.sin(phi) * math.sin(theta), math.cos(theta)]
    )


def _retilt(M: np.ndarray, theta0: float, phi0: float) -> np.ndarray:
    """Push each vector ``theta0`` further from its nearest pole, keeping its azimuth."""
    out = np.empty_like(M)
    for j, vec in enumerate(M):
        r = np.linalg.norm(vec)
        theta = math.acos(max(-1.0, min(1.0, vec[2] / r)))
        rho = math.hypot(vec[0], vec[1])
        phi = math.atan2(vec[1], vec[0]) if rho > 1e-12 * r else phi0
        theta = theta + theta0 if theta <= math.pi / 2 else theta - theta0
        out[j] = tilted_state(theta, phi, r)
    return out


def _first_sign_change(branch: np.ndarray):
    mz = branch[:, 1]
    start = np.sign(mz[0])
    for bz, val in zip(branch[:, 0], mz):
        if np.sign(val) != start and val != 0.0:
            return float(bz)
    return None


def coercive_field(branch_down: np.ndarray, branch_up: np.ndarray, agree_tol: float = 1e-3) -> tuple:
    """Half the separation of the two switching fields, or 0 without a loop.

    Returns ``(coercive_field, (switch_down, switch_up))``.
    """
    sw_down = _first_sign_change(branch_down)
    sw_up = _first_sign_change(branch_up)
    aligned = branch_up[np.argsort(branch_up[:, 0])]
    ref = branch_down[np.argsort(branch_down[:, 0])]
    if np.max(np.abs(aligned[:, 1:] - ref[:, 1:])) < agree_tol:
        return 0.0, (sw_down, sw_up)
    if sw_down is None or sw_up is None:
        return 0.0, (sw_down, sw_up)
    return abs(sw_up - sw_down) / 2.0, (sw_down, sw_up)


def hysteresis_sweep(
    config: MeanFieldConfig,
    bz_grid,
    theta0: float = math.pi / 40,
    phi0: float = 0.0,
    dt: float = DEFAULT_DT,
    **ss_kwargs,
) -> HysteresisCurve:
    """Quasi-static B_z sweep in both directions with continuation.

    The descending branch starts tilted ``theta0`` off +z, the ascending
    branch ``theta0`` off -z. Every later field step starts from the previous
    steady state pushed ``theta0`` away from its pole; without that
    misalignment an exactly converged pole feels no torque and never switches.
    """
    grid = np.asarray(bz_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("bz_grid needs at least two points")
    steps = np.diff(grid)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("bz_grid must be strictly monotone")
    if config.model.total_damping != 0.0 or config.damping_mode != "ll_alpha":
        raise UnsupportedConfigurationError(
            "hysteresis sweeps run with Gamma = 0 in ll_alpha damping mode", field="meanfield"
        )
    ascending = np.sort(grid)
    branches = []
    for order, pole_theta in ((ascending[::-1], 0.0), (ascending, math.pi)):
        seed = tilted_state(pole_theta + (theta0 if pole_theta == 0.0 else -theta0), phi0)
        state = np.tile(seed, (config.n_vectors, 1))
        rows = []
        for k, bz in enumerate(order):
            b = config.model.b_field.copy()
            b[2] = bz
            cfg = config.with_model(config.model.replace(b_field=b))
            start = state if k == 0 else _retilt(state, theta0, phi0)
            state = np.asarray(steady_state(cfg, start, dt=dt, **ss_kwargs)).reshape(-1, 3)
            m = state.mean(axis=0)
            rows.append((bz, m[2], m[0], m[1]))
        branches.append(np.array(rows))
    down, up = branches
    hc, switches = coercive_field(down, up)
    return HysteresisCurve(down, up, hc, switches)
