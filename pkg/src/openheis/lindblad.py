"""Exact master-equation dynamics in Liouville space.

Density matrices are vectorized row-major, ``|k, l>> = |k> (x) |l>``, so
``vec(A rho B) = (A (x) B^T) vec(rho)``. No normalization is applied to the
vectorized state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    CapacityError,
    CompletePositivityWarning,
    IntegrationDivergedError,
    NonConvergedError,
    NonUniqueSteadyStateError,
    PositivityViolationWarning,
    SpectralUnreliableError,
)
from .model import AXES, SIGNS, ChainModel, axis_index, sign_index
from .spin import build_hamiltonian, embed_site, jump_operator

MAX_SITES = 6
COND_LIMIT = 1e10
ZERO_TOL = 1e-10
CLUSTER_TOL = 1e-9
TRACE_TOL = 1e-8
POSITIVITY_TOL = -1e-6


def vectorize(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    return rho.reshape(-1).copy()


def devectorize(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec)
    dim = math.isqrt(vec.size)
    if vec.ndim != 1 or dim * dim != vec.size:
        raise ValueError(f"vector of length {vec.size} is not a vectorized square matrix")
    return vec.reshape(dim, dim).copy()


def dissipator_superop(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> A rho B^dag - 1/2 {B^dag A, rho}``."""
    eye = np.eye(a.shape[0])
    bda = b.conj().T @ a
    return np.kron(a, b.conj()) - 0.5 * (np.kron(bda, eye) + np.kron(eye, bda.T))


def hamiltonian_superop(h: np.ndarray) -> np.ndarray:
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


# --- complete positivity ----------------------------------------------------


def dissipator_rate_matrix(model: ChainModel, axis: str, sign: str) -> np.ndarray:
    """Tridiagonal Kossakowski block for one (axis, sign) jump channel."""
    a, s = axis_index(axis), sign_index(sign)
    n = model.n_sites
    mat = np.diag(np.full(n, model.on_site_rates[a, s]))
    g = model.neighbour_rates[a, s]
    idx = np.arange(n - 1)
    mat[idx, idx + 1] = g
    mat[idx + 1, idx] = g
    return mat


def is_rate_matrix_psd(rates: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.linalg.eigvalsh(rates).min() >= -tol)


def check_complete_positivity(model: ChainModel, tol: float = 1e-12) -> bool:
    """True if every channel's rate matrix is PSD; warns about each one that is not."""
    ok = True
    for axis in AXES:
        for sign in SIGNS:
            rates = dissipator_rate_matrix(model, axis, sign)
            lam = np.linalg.eigvalsh(rates).min()
            if lam < -tol:
                ok = False
                warnings.warn(
                    f"rate matrix ({axis},{sign}) has eigenvalue {lam:.3e} < 0; "
                    "the generator is not completely positive",
                    CompletePositivityWarning,
                    stacklevel=2,
                )
    return ok


# --- Liouvillian ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Liouvillian:
    matrix: np.ndarray
    model: ChainModel

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def hilbert_dim(self) -> int:
        return math.isqrt(self.dim)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return devectorize(self.matrix @ vectorize(rho))


def build_liouvillian(model: ChainModel, max_sites: int = MAX_SITES) -> Liouvillian:
    """Vectorized generator with Hamiltonian, on-site and neighbour dissipators.

    Neighbour terms run over both orderings of every adjacent pair.
    """
    n = model.n_sites
    if n > max_sites:
        raise CapacityError(f"N={n} exceeds the dense Liouvillian cap of {max_sites} sites")
    check_complete_positivity(model)
    L = hamiltonian_superop(build_hamiltonian(model))
    for a, axis in enumerate(AXES):
        for s, sign in enumerate(SIGNS):
            gamma = model.on_site_rates[a, s]
            g = model.neighbour_rates[a, s]
            if gamma == 0.0 and (g == 0.0 or n == 1):
                continue
            ops = [embed_site(jump_operator(axis, sign), j, n) for j in range(1, n + 1)]
            if gamma != 0.0:
                for op in ops:
                    L += gamma * dissipator_superop(op, op)
            if g != 0.0:
                for j in range(n - 1):
                    L += g * (dissipator_superop(ops[j + 1], ops[j]) + dissipator_superop(ops[j], ops[j + 1]))
    return Liouvillian(L, model)


# --- time stepping ----------------------------------------------------------


@dataclass
class DensityTrajectory:
    times: np.ndarray
    states: np.ndarray  # (T, d, d)
    solver: str
    trace_deviation: float
    hermiticity_deviation: float
    min_eigenvalue: float

    @property
    def flagged(self) -> bool:
        return self.trace_deviation >= TRACE_TOL or self.min_eigenvalue < POSITIVITY_TOL


def _quality(times, states, solver) -> DensityTrajectory:
    traces = np.trace(states, axis1=1, axis2=2)
    herm = np.max(np.abs(states - np.conj(np.swapaxes(states, 1, 2))))
    hermitian_part = 0.5 * (states + np.conj(np.swapaxes(states, 1, 2)))
    min_eig = float(np.linalg.eigvalsh(hermitian_part).min())
    traj = DensityTrajectory(
        times, states, solver, float(np.max(np.abs(traces - 1.0))), float(herm), min_eig
    )
    if traj.flagged:
        warnings.warn(
            f"{solver}: trace deviation {traj.trace_deviation:.2e}, min eigenvalue {min_eig:.2e}",
            PositivityViolationWarning,
            stacklevel=3,
        )
    return traj


def rk4_step_matrix(liouvillian: Liouvillian, dt: float) -> np.ndarray:
    """One classical RK4 step for the linear system, as a single matrix.

    For ``y' = L y`` the four-stage update equals the degree-4 Taylor
    polynomial of ``exp(dt L)``.
    """
    hl = dt * liouvillian.matrix
    step = np.eye(liouvillian.dim, dtype=complex)
    term = np.eye(liouvillian.dim, dtype=complex)
    for k in range(1, 5):
        term = term @ hl / k
        step = step + term
    return step


def evolve_rk4(
    liouvillian: Liouvillian, rho0: np.ndarray, t_end: float, dt: float = 1e-3, sample_every: int = 1
) -> DensityTrajectory:
    if not dt > 0 or not t_end > 0:
        raise ValueError("dt and t_end must be positive")
    n_steps = int(round(t_end / dt))
    if not math.isclose(n_steps * dt, t_end, rel_tol=1e-9):
        raise ValueError(f"t_end={t_end} is not a multiple of dt={dt}")
    step = rk4_step_matrix(liouvillian, dt)
    # advance sample_every steps per matrix-vector product
    stride = np.linalg.matrix_power(step, sample_every)
    y = vectorize(np.asarray(rho0, dtype=complex))
    d = liouvillian.hilbert_dim
    n_samples = n_steps // sample_every + 1
    states = np.empty((n_samples, d, d), dtype=complex)
    states[0] = rho0
    for k in range(1, n_samples):
        y = stride @ y
        if not np.all(np.isfinite(y)):
            raise IntegrationDivergedError(f"non-finite density matrix at t={k * sample_every * dt:g}")
        states[k] = y.reshape(d, d)
    times = dt * sample_every * np.arange(n_samples)
    return _quality(times, states, "rk4")


# --- spectral solution ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LiouvillianSpectrum:
    """Biorthonormal eigen-decomposition ``L(R_k) = l_k R_k``, ``Tr(R_k L_k') = delta``.

    Ordering: the eigenvalue closest to zero first, then descending real part.
    """

    eigenvalues: np.ndarray
    right: np.ndarray  # (K, d, d)
    left: np.ndarray  # (K, d, d)
    condition_number: float
    liouvillian: Liouvillian

    def coefficients(self, rho0: np.ndarray) -> np.ndarray:
        """``c_k = Tr(rho0 L_k)``."""
        return np.einsum("ab,kba->k", rho0, self.left)

    def biorthonormality_residual(self) -> float:
        d = self.right.shape[1]
        r = self.right.reshape(len(self.eigenvalues), d * d)
        lt = np.swapaxes(self.left, 1, 2).reshape(len(self.eigenvalues), d * d)
        gram = lt @ r.T
        return float(np.max(np.abs(gram - np.eye(len(self.eigenvalues)))))


def spectral_decompose(liouvillian: Liouvillian, cond_limit: float = COND_LIMIT) -> LiouvillianSpectrum:
    """Diagonalize the generator; left eigenmatrices come from the inverse eigenvector matrix.

    Raises
    ------
    SpectralUnreliableError
        When the eigenvector matrix condition number exceeds ``cond_limit``.
    """
    w, vr = scipy.linalg.eig(liouvillian.matrix)
    order = sorted(range(len(w)), key=lambda k: (-w[k].real, w[k].imag))
    stationary = int(np.argmin(np.abs(w)))
    order.remove(stationary)
    order.insert(0, stationary)
    w = w[order]
    vr = vr[:, order]
    cond = float(np.linalg.cond(vr))
    if not np.isfinite(cond) or cond > cond_limit:
        raise SpectralUnreliableError(
            f"eigenvector matrix condition number {cond:.2e} exceeds {cond_limit:.0e}; use evolve_rk4"
        )
    # rows of inv(vr) are the dual basis; this also biorthonormalizes degenerate clusters
    wl = np.linalg.inv(vr)
    d = liouvillian.hilbert_dim
    right = vr.T.reshape(-1, d, d)
    left = np.swapaxes(wl.reshape(-1, d, d), 1, 2)
    return LiouvillianSpectrum(w, right, left, cond, liouvillian)


def evolve_spectral(spectrum: LiouvillianSpectrum, rho0: np.ndarray, times) -> DensityTrajectory:
    """``rho(t) = sum_k c_k exp(l_k t) R_k``, Hermitian part only; trace left as computed."""
    times = np.asarray(times, dtype=float)
    c = spectrum.coefficients(np.asarray(rho0, dtype=complex))
    weights = c[None, :] * np.exp(np.outer(times, spectrum.eigenvalues))
    states = np.einsum("tk,kab->tab", weights, spectrum.right)
    states = 0.5 * (states + np.conj(np.swapaxes(states, 1, 2)))
    return _quality(times, states, "spectral")


def steady_state_exact(spectrum: LiouvillianSpectrum, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Stationary state from the zero mode, rescaled to unit trace."""
    n_zero = int(np.sum(np.abs(spectrum.eigenvalues) < zero_tol))
    if n_zero != 1:
        raise NonUniqueSteadyStateError(f"{n_zero} eigenvalues within {zero_tol:g} of zero")
    r = spectrum.right[0]
    rho = r / np.trace(r)
    return 0.5 * (rho + rho.conj().T)


def steady_state_residual(liouvillian: Liouvillian, rho: np.ndarray) -> float:
    return float(np.max(np.abs(liouvillian.apply(rho))))


def relax_to_steady_state(
    liouvillian: Liouvillian,
    rho0: np.ndarray,
    dt: float = 0.01,
    tol: float = 1e-10,
    t_max: float = 1e5,
    chunk: int = 1000,
) -> np.ndarray:
    """Long-time limit of RK4 stepping, stopped once ``max|L(rho)| < tol``.

    A stationary state of the generator is an exact fixed point of the RK4
    step matrix, so the limit does not depend on ``dt`` while the step is stable.
    """
    step = np.linalg.matrix_power(rk4_step_matrix(liouvillian, dt), chunk)
    y = vectorize(np.asarray(rho0, dtype=complex))
    t = 0.0
    while True:
        residual = float(np.max(np.abs(liouvillian.matrix @ y)))
        if residual < tol:
            break
        if t >= t_max:
            raise NonConvergedError(
                f"RK4 relaxation did not reach residual {tol:g} by t={t_max:g} (residual {residual:.3e})",
                last_state=devectorize(y),
                residual=residual,
            )
        y = step @ y
        if not np.all(np.isfinite(y)):
            raise IntegrationDivergedError(f"non-finite density matrix at t={t:g}")
        t += chunk * dt
    rho = devectorize(y)
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


# --- states ----------------------------------------------------------------


def product_state(single_site: np.ndarray, n_sites: int) -> np.ndarray:
    """``rho_1 (x) ... (x) rho_1`` from a single-site ket or density matrix."""
    s = np.asarray(single_site, dtype=complex)
    rho1 = np.outer(s, s.conj()) if s.ndim == 1 else s
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n_sites):
        out = np.kron(out, rho1)
    return out


def bloch_state(vector) -> np.ndarray:
    """Single-qubit density matrix ``(1 + f . sigma) / 2``."""
    fx, fy, fz = vector
    return 0.5 * np.array([[1 + fz, fx - 1j * fy], [fx + 1j * fy, 1 - fz]], dtype=complex)
