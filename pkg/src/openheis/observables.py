"""Reduced states, magnetization, correlations and entanglement of chain states.

Sites are 1-based. Single-site expectations always come from the reduced
state of the full (nonequilibrium) density matrix.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PositivityViolationWarning
from .model import AXES
from .spin import embed_site, pauli

PAULI_YY = np.kron(pauli("y"), pauli("y"))


def _n_sites(rho: np.ndarray) -> int:
    dim = rho.shape[0]
    n = int(round(math.log2(dim)))
    if 2**n != dim or rho.shape != (dim, dim):
        raise ValueError(f"shape {rho.shape} is not a spin-1/2 chain density matrix")
    return n


def partial_trace(rho: np.ndarray, keep) -> np.ndarray:
    """Trace out every site not in ``keep``; kept sites stay in chain order."""
    rho = np.asarray(rho)
    n = _n_sites(rho)
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep must name at least one site")
    if keep[0] < 1 or keep[-1] > n:
        raise IndexError(f"sites {keep} out of range 1..{n}")
    kept = [k - 1 for k in keep]
    traced = [k for k in range(n) if k not in kept]
    t = rho.reshape([2] * (2 * n))
    # bra axes are offset by n; pair each traced ket axis with its bra axis
    perm = kept + traced + [n + k for k in kept] + [n + k for k in traced]
    t = t.transpose(perm)
    dk, dt = 2 ** len(kept), 2 ** len(traced)
    t = t.reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def expectation(rho: np.ndarray, op: np.ndarray) -> complex:
    return complex(np.trace(rho @ op))


def magnetization(rho: np.ndarray, n_sites: int | None = None) -> np.ndarray:
    """``M_alpha = (1/N) sum_j <sigma_alpha^(j)>``."""
    rho = np.asarray(rho)
    n = _n_sites(rho) if n_sites is None else n_sites
    out = np.zeros(3)
    for a, axis in enumerate(AXES):
        s = pauli(axis)
        for j in range(1, n + 1):
            out[a] += np.trace(partial_trace(rho, [j]) @ s).real
    return out / n


def magnetization_series(states: np.ndarray) -> np.ndarray:
    """Magnetization for a stack of density matrices, shape ``(T, 3)``."""
    states = np.asarray(states)
    n = _n_sites(states[0])
    ops = [sum(embed_site(pauli(a), j, n) for j in range(1, n + 1)) / n for a in AXES]
    return np.stack([np.einsum("tab,ba->t", states, op).real for op in ops], axis=1)


@dataclass(frozen=True)
class CorrelationRecord:
    site_i: int
    site_j: int
    axis_a: str
    axis_b: str
    value: float
    time: float = 0.0


def two_point_correlation(rho: np.ndarray, i: int, j: int, axis_a: str, axis_b: str, imag_tol: float = 1e-10) -> float:
    """``<s_a^(i) s_b^(j)> - <s_a^(i)><s_b^(j)>`` on the two-site reduced state."""
    if i == j:
        raise ValueError("two-point correlation needs two distinct sites")
    rho_ij = partial_trace(rho, [i, j])
    sa, sb = pauli(axis_a), pauli(axis_b)
    # partial_trace keeps sites in chain order
    first, second = (sa, sb) if i < j else (sb, sa)
    joint = np.trace(rho_ij @ np.kron(first, second))
    mean_i = np.trace(partial_trace(rho, [i]) @ sa)
    mean_j = np.trace(partial_trace(rho, [j]) @ sb)
    value = joint - mean_i * mean_j
    if abs(value.imag) > imag_tol:
        raise ValueError(f"correlation has imaginary part {value.imag:.3e}; is rho Hermitian?")
    return float(value.real)


def concurrence(rho: np.ndarray, i: int | None = None, j: int | None = None, clamp_tol: float = 1e-10) -> float:
    """Wootters concurrence of the pair ``(i, j)``; a 4x4 input is used as is."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape == (4, 4) and i is None and j is None:
        rho_ij = rho
    else:
        if i is None or j is None or i == j:
            raise ValueError("concurrence needs two distinct sites")
        rho_ij = partial_trace(rho, [i, j])
    flipped = PAULI_YY @ rho_ij.conj() @ PAULI_YY
    ev = np.linalg.eigvals(rho_ij @ flipped).real
    if ev.min() < -clamp_tol:
        warnings.warn(
            f"rho * rho_tilde has eigenvalue {ev.min():.2e} < 0; input is not a valid state",
            PositivityViolationWarning,
            stacklevel=2,
        )
    roots = np.sort(np.sqrt(np.clip(ev, 0.0, None)))[::-1]
    return float(max(0.0, roots[0] - roots[1:].sum()))


@dataclass
class DeviationSeries:
    times: np.ndarray
    values: np.ndarray
    time_average: float
    window: tuple

    @property
    def maximum(self) -> float:
        return float(self.values.max())


def time_average(times: np.ndarray, values: np.ndarray, window=None) -> float:
    """Trapezoidal mean of ``values`` over the samples inside ``window``."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        mask = (times >= window[0]) & (times <= window[1])
        times, values = times[mask], values[mask]
    if times.size == 1:
        return float(values[0])
    if times.size == 0:
        raise ValueError("no samples inside the averaging window")
    return float(np.trapezoid(values, times) / (times[-1] - times[0]))


def deviation_series(mf_times, mf_m, exact_times, exact_m, window=(0.0, 1e3)) -> DeviationSeries:
    """Pointwise ``|M_mf - M_exact|^2`` and its time average over ``window``."""
    mf_times = np.asarray(mf_times, dtype=float)
    exact_times = np.asarray(exact_times, dtype=float)
    if mf_times.shape != exact_times.shape or not np.allclose(mf_times, exact_times, rtol=0, atol=1e-9):
        raise ValueError("mean-field and exact series must share sample times")
    diff = np.asarray(mf_m, dtype=float) - np.asarray(exact_m, dtype=float)
    values = np.sum(diff**2, axis=1)
    return DeviationSeries(mf_times, values, time_average(mf_times, values, window), tuple(window))
