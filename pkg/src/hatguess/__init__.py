"""Hat guessing strategies on graphs: exact solving, constructions and adversaries."""

from . import book, clique, core, linear, planar  # noqa: F401  (registers structured guessers)
from .core import Coloring, Graph, StrategyProfile, evaluate, solve_hg, verify
from .errors import BudgetExceeded, ContractError, HatGuessError, InvalidInput, NotFound

__all__ = [
    "BudgetExceeded",
    "Coloring",
    "ContractError",
    "Graph",
    "HatGuessError",
    "InvalidInput",
    "NotFound",
    "StrategyProfile",
    "evaluate",
    "solve_hg",
    "verify",
]
__version__ = "0.1.0"
