from .cnf import Cnf, DimacsError, from_dimacs, to_dimacs
from .solver import Solver, SolverConfig, SolverError, SolveOutcome, Status, dpll_solve, luby

__all__ = ["Cnf", "DimacsError", "from_dimacs", "to_dimacs", "Solver", "SolverConfig",
           "SolverError", "SolveOutcome", "Status", "dpll_solve", "luby"]
