"""Exception types shared across the package."""

from __future__ import annotations


class ModelValidationError(ValueError):
    """A network model, reaction or noise spec violates a standing assumption.

    ``errors`` holds ``(location, message)`` pairs so callers (the model-file
    parser in particular) can report every problem at once.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [("", errors)]
        self.errors = list(errors)
        lines = [f"{loc}: {msg}" if loc else msg for loc, msg in self.errors]
        super().__init__("; ".join(lines))


class ConfigurationError(ValueError):
    """Invalid discretization or solver configuration."""


class ContractViolation(ValueError):
    """An operation was called outside its precondition (shape, sign, ...)."""


class NumericalError(RuntimeError):
    """A numerical routine failed (eigensolver residual, estimation failure)."""


class SimulationBlowUp(RuntimeError):
    """The state became non-finite during time stepping."""

    def __init__(self, time, step=None):
        self.time = float(time)
        self.step = step
        where = f"t={self.time:.6g}" if step is None else f"step {step} (t={self.time:.6g})"
        super().__init__(f"non-finite state at {where}")
