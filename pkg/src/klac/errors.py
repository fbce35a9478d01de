"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-range input (CLI exit code 2)."""


class CompletionRejected(InputError):
    """A completion of the fitting matrix produced duplicate rows."""


class Infeasible(RuntimeError):
    """No result within the configured caps or budgets (CLI exit code 3)."""


class SimulationFailure(RuntimeError):
    """A client could not decode its requested message."""

    def __init__(self, client: int, reason: str):
        super().__init__(f"client {client + 1}: {reason}")
        self.client = client
        self.reason = reason
