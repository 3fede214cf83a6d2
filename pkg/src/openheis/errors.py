"""Exception types shared across the solvers and the CLI.

Each error class carries the process exit code the CLI maps it to.
"""

from __future__ import annotations


class SimulationError(Exception):
    exit_code = 1


class ConfigError(SimulationError, ValueError):
    """Malformed, unknown or out-of-range configuration."""

    exit_code = 2

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class UnsupportedConfigurationError(ConfigError):
    pass


class NonConvergedError(SimulationError):
    """Steady-state search hit ``t_max``; ``last_state`` holds where it stopped."""

    exit_code = 3

    def __init__(self, message: str, last_state=None, residual: float | None = None):
        super().__init__(message)
        self.last_state = last_state
        self.residual = residual


class IntegrationDivergedError(SimulationError):
    exit_code = 3


class NonUniqueSteadyStateError(SimulationError):
    exit_code = 3


class CapacityError(SimulationError):
    exit_code = 4


class SpectralUnreliableError(SimulationError):
    """Eigenvector matrix too ill-conditioned; use ``evolve_rk4`` instead."""

    exit_code = 5


class CompletePositivityWarning(UserWarning):
    """A neighbour/on-site rate matrix is not positive semidefinite."""


class PositivityViolationWarning(UserWarning):
    """A propagated density matrix left the physical state space."""
