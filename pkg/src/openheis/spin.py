"""Spin-1/2 operators, axis eigenstates and the chain Hamiltonian.

Conventions: canonical sigma_z basis with ``|up>_z = (1, 0)``; in a tensor
product site 1 is the leftmost factor. Spin operators are ``S = sigma / 2``.
Sites are numbered 1..N in the public API.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from .model import AXES, ChainModel, axis_index, sign_index

SQRT2 = np.sqrt(2.0)

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
IDENTITY2 = np.eye(2, dtype=complex)


def pauli(axis: str) -> np.ndarray:
    axis_index(axis)
    return _PAULI[axis].copy()


def spin(axis: str) -> np.ndarray:
    return 0.5 * pauli(axis)


# Global phases follow the basis-state table of the source derivation
# verbatim, including the leading minus signs of the "down" states.
_EIGENSTATES = {
    ("x", "up"): np.array([1, 1], dtype=complex) / SQRT2,
    ("x", "down"): np.array([-1, 1], dtype=complex) / SQRT2,
    ("y", "up"): np.array([1, 1j], dtype=complex) / SQRT2,
    ("y", "down"): np.array([-1, 1j], dtype=complex) / SQRT2,
    ("z", "up"): np.array([1, 0], dtype=complex),
    ("z", "down"): np.array([0, 1], dtype=complex),
}


def axis_eigenstate(axis: str, orientation: str) -> np.ndarray:
    """Eigenvector of ``sigma_axis`` with eigenvalue +1 (``"up"``) or -1 (``"down"``)."""
    try:
        return _EIGENSTATES[(axis, orientation)].copy()
    except KeyError:
        raise ValueError(f"invalid axis/orientation: {axis!r}, {orientation!r}") from None


def jump_operator(axis: str, sign: str | int) -> np.ndarray:
    """Raising (``+``) or lowering (``-``) operator between the eigenstates of ``sigma_axis``.

    ``S_{x,±} = -S_z ± i S_y``, ``S_{y,±} = S_z ± i S_x``, ``S_{z,±} = S_x ± i S_y``.
    """
    axis_index(axis)
    s = 1.0 if sign_index(sign) == 0 else -1.0
    sx, sy, sz = spin("x"), spin("y"), spin("z")
    if axis == "x":
        return -sz + s * 1j * sy
    if axis == "y":
        return sz + s * 1j * sx
    return sx + s * 1j * sy


def kron_all(ops) -> np.ndarray:
    return reduce(np.kron, ops)


def embed_site(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Place a single-site operator at ``site`` (1-based) of an ``n_sites`` chain."""
    if not 1 <= site <= n_sites:
        raise IndexError(f"site {site} out of range 1..{n_sites}")
    op = np.asarray(op, dtype=complex)
    left = np.eye(2 ** (site - 1), dtype=complex)
    right = np.eye(2 ** (n_sites - site), dtype=complex)
    return np.kron(np.kron(left, op), right)


def total_spin(axis: str, n_sites: int) -> np.ndarray:
    s = spin(axis)
    return sum(embed_site(s, j, n_sites) for j in range(1, n_sites + 1))


def build_hamiltonian(model: ChainModel) -> np.ndarray:
    """Zeeman term on every site plus axis-diagonal nearest-neighbour exchange.

    ``H = sum_j B . S^(j) + sum_alpha sum_{j<N} V_alpha S_alpha^(j) S_alpha^(j+1)``
    """
    n = model.n_sites
    dim = 2**n
    H = np.zeros((dim, dim), dtype=complex)
    site_ops = {a: [embed_site(spin(a), j, n) for j in range(1, n + 1)] for a in AXES}
    for a, b in zip(AXES, model.b_field):
        if b != 0.0:
            for op in site_ops[a]:
                H += b * op
    for a, v in zip(AXES, model.couplings):
        if v != 0.0:
            for j in range(n - 1):
                H += v * (site_ops[a][j] @ site_ops[a][j + 1])
    # exact Hermitian symmetrisation removes round-off asymmetry
    return 0.5 * (H + H.conj().T)


def is_hermitian(mat: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(mat - mat.conj().T), initial=0.0) < tol)


def is_unitary(mat: np.ndarray, tol: float = 1e-12) -> bool:
    eye = np.eye(mat.shape[0])
    return bool(np.max(np.abs(mat @ mat.conj().T - eye)) < tol)
