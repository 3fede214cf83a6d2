"""Run an ExperimentConfig end to end and write CSV plus a JSON summary.

Column schemas by kind:

- dynamics: ``t,Mx,My,Mz,Mnorm``
- hysteresis: ``branch,Bz,Mx,My,Mz`` (branch is ``down`` or ``up``, rows in traversal order)
- compare over time: ``t,Mx_mf,My_mf,Mz_mf,Mx_exact,My_exact,Mz_exact,dev``
- compare over ``bz_grid``: ``Bz,Mx_mf,Mz_mf,Mx_exact,Mz_exact``
- correlations: ``t`` followed by one column per requested observable
- spectrum: ``k,re,im``

A sweep writes one CSV per value plus ``<stem>_sweep.csv``. Floats are
written with 17 significant digits so output is byte-stable.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import lindblad, meanfield, observables
from .config import ExperimentConfig, parse_observable
from .errors import SpectralUnreliableError
from .lindblad import build_liouvillian, check_complete_positivity
from .model import ChainModel


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass
class _Outputs:
    """Tracks written files so a failed run can remove its partial output."""

    written: list = field(default_factory=list)

    def csv(self, path: Path, header, rows):
        path.parent.mkdir(parents=True, exist_ok=True)
        self.written.append(path)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(x) for x in row])

    def json(self, path: Path, payload):
        path.parent.mkdir(parents=True, exist_ok=True)
        self.written.append(path)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
            fh.write("\n")

    def remove(self):
        for path in self.written:
            try:
                os.remove(path)
            except FileNotFoundError:
                pass


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def sweep_overrides(config: ExperimentConfig, param: str, value) -> dict:
    """Model-section overrides for one sweep value."""
    couplings = list(config.model.couplings)
    if param == "n_sites":
        return {"n_sites": int(value)}
    if param == "v_x":
        couplings[0] = float(value)
        return {"couplings": couplings}
    if param == "v_z":
        couplings[2] = float(value)
        return {"couplings": couplings}
    if param == "delta":
        couplings[0] += float(value)
        return {"couplings": couplings}
    if param == "gamma":
        return {"gamma": float(value)}
    raise ValueError(f"unknown sweep parameter {param!r}")


def sample_times(config: ExperimentConfig) -> np.ndarray:
    n_steps = int(round(config.t_end / config.dt))
    return config.dt * config.sample_every * np.arange(n_steps // config.sample_every + 1)


# --- exact solver selection -------------------------------------------------


def exact_trajectory(config: ExperimentConfig, model: ChainModel, rho0: np.ndarray):
    """Exact ``rho(t)`` on the config's sample grid; returns ``(trajectory, solver_path)``."""
    liouvillian = build_liouvillian(model)
    if config.solver in ("spectral", "auto"):
        try:
            spectrum = lindblad.spectral_decompose(liouvillian)
        except SpectralUnreliableError:
            if config.solver == "spectral":
                raise
        else:
            return lindblad.evolve_spectral(spectrum, rho0, sample_times(config)), "spectral"
    traj = lindblad.evolve_rk4(liouvillian, rho0, config.t_end, config.dt, config.sample_every)
    return traj, "rk4" if config.solver == "rk4" else "rk4 (spectral unreliable)"


def exact_steady_state(config: ExperimentConfig, model: ChainModel, rho0: np.ndarray):
    liouvillian = build_liouvillian(model)
    if config.solver in ("spectral", "auto"):
        try:
            spectrum = lindblad.spectral_decompose(liouvillian)
        except SpectralUnreliableError:
            if config.solver == "spectral":
                raise
        else:
            rho = lindblad.steady_state_exact(spectrum)
            return rho, "spectral", lindblad.steady_state_residual(liouvillian, rho)
    rho = lindblad.relax_to_steady_state(liouvillian, rho0)
    path = "rk4" if config.solver == "rk4" else "rk4 (spectral unreliable)"
    return rho, path, lindblad.steady_state_residual(liouvillian, rho)


def _quality(traj) -> dict:
    return {
        "trace_deviation": traj.trace_deviation,
        "hermiticity_deviation": traj.hermiticity_deviation,
        "min_eigenvalue": traj.min_eigenvalue,
        "flagged": traj.flagged,
    }


# --- one run per kind -------------------------------------------------------


def _run_dynamics(config, model, out, path):
    mf = config.meanfield_config(model)
    traj = meanfield.integrate(mf, config.initial_mf_state(mf), config.t_end, config.dt, config.sample_every)
    m = traj.magnetization
    norms = traj.norms
    out.csv(path, ["t", "Mx", "My", "Mz", "Mnorm"], (
        (t, *row, nrm) for t, row, nrm in zip(traj.times, m, norms)
    ))
    final = traj.states[-1] if mf.mf_mode == "per_site" else traj.states[-1, 0]
    residual = float(np.max(np.abs(meanfield.mf_rhs(final, mf))))
    return {
        "terminal_state": m[-1],
        "steady_state_residual": residual,
        "norm_drift": float(np.max(np.abs(norms - norms[0]))),
        "solver_path": "meanfield-rk4",
    }


def _run_hysteresis(config, model, out, path):
    mf = config.meanfield_config(model)
    curve = meanfield.hysteresis_sweep(mf, config.bz_grid, dt=config.dt)
    rows = [("down", bz, mx, my, mz) for bz, mz, mx, my in curve.branch_down]
    rows += [("up", bz, mx, my, mz) for bz, mz, mx, my in curve.branch_up]
    out.csv(path, ["branch", "Bz", "Mx", "My", "Mz"], rows)
    return {
        "coercive_field": curve.coercive_field,
        "switching_fields": list(curve.switching_fields),
        "grid_spacing": float(abs(config.bz_grid[1] - config.bz_grid[0])),
        "terminal_state": {"down": curve.branch_down[-1], "up": curve.branch_up[-1]},
        "solver_path": "meanfield-rk4",
    }


def _run_compare_time(config, model, out, path):
    mf = config.meanfield_config(model)
    traj = meanfield.integrate(mf, config.initial_mf_state(mf), config.t_end, config.dt, config.sample_every)
    exact, solver_path = exact_trajectory(config, model, config.initial_density_matrix(model.n_sites))
    m_mf = traj.magnetization
    m_ex = observables.magnetization_series(exact.states)
    dev = observables.deviation_series(traj.times, m_mf, exact.times, m_ex, tuple(config.window))
    out.csv(
        path,
        ["t", "Mx_mf", "My_mf", "Mz_mf", "Mx_exact", "My_exact", "Mz_exact", "dev"],
        ((t, *a, *b, d) for t, a, b, d in zip(traj.times, m_mf, m_ex, dev.values)),
    )
    return {
        "terminal_state": {"meanfield": m_mf[-1], "exact": m_ex[-1]},
        "time_average_deviation": dev.time_average,
        "max_deviation": dev.maximum,
        "window": list(dev.window),
        "solver_path": solver_path,
        "exact_quality": _quality(exact),
    }


def _run_compare_steady(config, model, out, path):
    mf_rows, ex_rows, residuals, paths = [], [], [], set()
    rho0 = config.initial_density_matrix(model.n_sites)
    for bz in config.bz_grid:
        b = model.b_field.copy()
        b[2] = bz
        m_bz = model.replace(b_field=b)
        mf = config.meanfield_config(m_bz)
        state = np.asarray(meanfield.steady_state(mf, config.initial_mf_state(mf), dt=config.dt)).reshape(-1, 3)
        mf_rows.append(state.mean(axis=0))
        rho, solver_path, residual = exact_steady_state(config, m_bz, rho0)
        ex_rows.append(observables.magnetization(rho, model.n_sites))
        residuals.append(residual)
        paths.add(solver_path)
    out.csv(
        path,
        ["Bz", "Mx_mf", "Mz_mf", "Mx_exact", "Mz_exact"],
        ((bz, a[0], a[2], b[0], b[2]) for bz, a, b in zip(config.bz_grid, mf_rows, ex_rows)),
    )
    return {
        "max_steady_state_residual": float(max(residuals)),
        "solver_path": ", ".join(sorted(paths)),
    }


def _observable_series(states, names):
    columns = []
    for name in names:
        parsed = parse_observable(name)
        if parsed[0] == "conc":
            _, i, j = parsed
            columns.append([observables.concurrence(rho, i, j) for rho in states])
        else:
            _, i, j, a, b = parsed
            columns.append([observables.two_point_correlation(rho, i, j, a, b, imag_tol=1e-8) for rho in states])
    return np.array(columns).T


def _run_correlations(config, model, out, path):
    exact, solver_path = exact_trajectory(config, model, config.initial_density_matrix(model.n_sites))
    values = _observable_series(exact.states, config.observables)
    out.csv(path, ["t", *config.observables], ((t, *row) for t, row in zip(exact.times, values)))
    stats = {
        name: {
            "initial": float(values[0, k]),
            "max": float(values[:, k].max()),
            "t_at_max": float(exact.times[int(np.argmax(values[:, k]))]),
            "final": float(values[-1, k]),
        }
        for k, name in enumerate(config.observables)
    }
    return {
        "observables": stats,
        "complete_positivity": check_complete_positivity(model),
        "g_axes": config.model.g_axes,
        "solver_path": solver_path,
        "exact_quality": _quality(exact),
    }


def _run_spectrum(config, model, out, path):
    liouvillian = build_liouvillian(model)
    spectrum = lindblad.spectral_decompose(liouvillian)
    lam = spectrum.eigenvalues
    out.csv(path, ["k", "re", "im"], ((k + 1, z.real, z.imag) for k, z in enumerate(lam)))
    summary = {
        "n_eigenvalues": len(lam),
        "condition_number": spectrum.condition_number,
        "biorthonormality_residual": spectrum.biorthonormality_residual(),
        "max_real_part": float(lam.real.max()),
        "n_zero_modes": int(np.sum(np.abs(lam) < lindblad.ZERO_TOL)),
        "spectral_gap": float(-lam[1:].real.max()) if len(lam) > 1 else None,
        "solver_path": "spectral",
    }
    if summary["n_zero_modes"] == 1:
        rho = lindblad.steady_state_exact(spectrum)
        summary["steady_state_magnetization"] = observables.magnetization(rho, model.n_sites)
        summary["steady_state_residual"] = lindblad.steady_state_residual(liouvillian, rho)
    return summary


_RUNNERS = {
    "dynamics": _run_dynamics,
    "hysteresis": _run_hysteresis,
    "correlations": _run_correlations,
    "spectrum": _run_spectrum,
}


def _run_one(config, model, out, path):
    if config.kind == "compare":
        runner = _run_compare_steady if config.bz_grid else _run_compare_time
    else:
        runner = _RUNNERS[config.kind]
    return runner(config, model, out, path)


_SWEEP_COLUMNS = {
    "hysteresis": ("coercive_field",),
    "compare": ("time_average_deviation", "max_deviation"),
}


def _sweep_row(kind, config, result):
    if kind == "correlations":
        return [v for name in config.observables for v in (result["observables"][name]["max"], result["observables"][name]["final"])]
    keys = _SWEEP_COLUMNS.get(kind, ())
    return [result.get(k, float("nan")) for k in keys]


def _sweep_header(kind, config):
    if kind == "correlations":
        return [f"{name}_{s}" for name in config.observables for s in ("max", "final")]
    return list(_SWEEP_COLUMNS.get(kind, ()))


def run_experiment(config: ExperimentConfig, output_path: str | os.PathLike | None = None) -> dict:
    """Run ``config``, write its files and return the summary dictionary.

    On any exception every file written so far is removed before re-raising.
    """
    stem = Path(output_path if output_path is not None else config.output_path)
    out = _Outputs()
    start = time.perf_counter()
    try:
        if config.sweep is None:
            model = config.chain_model()
            path = stem.with_name(stem.name + ".csv")
            result = _run_one(config, model, out, path)
            result["csv"] = path.name
            runs = [result]
        else:
            param, values = config.sweep["param"], config.sweep["values"]
            runs, rows = [], []
            for value in values:
                model = config.chain_model(**sweep_overrides(config, param, value))
                path = stem.with_name(f"{stem.name}_{param}_{value:g}.csv")
                result = _run_one(config, model, out, path)
                result.update({"csv": path.name, param: value})
                runs.append(result)
                rows.append([value, *_sweep_row(config.kind, config, result)])
            if config.kind != "spectrum" and not (config.kind == "compare" and config.bz_grid):
                header = [param, *_sweep_header(config.kind, config)]
                out.csv(stem.with_name(stem.name + "_sweep.csv"), header, rows)
        summary = {
            "kind": config.kind,
            "config": config.to_dict(),
            "runs": runs,
            "wall_time_s": time.perf_counter() - start,
        }
        out.json(stem.with_name(stem.name + ".summary.json"), summary)
    except BaseException:
        out.remove()
        raise
    return summary
