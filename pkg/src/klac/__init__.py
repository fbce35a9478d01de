"""k-limited-access schemes for linear index codes over GF(2)."""

from .errors import CompletionRejected, Infeasible, InputError, SimulationFailure
from .gf2 import BitMatrix, rank, solve_row, find_circuit
from .universal import build_scheme, lower_bound_Tk

__all__ = [
    "BitMatrix", "rank", "solve_row", "find_circuit",
    "build_scheme", "lower_bound_Tk",
    "InputError", "CompletionRejected", "Infeasible", "SimulationFailure",
]
__version__ = "0.1.0"
