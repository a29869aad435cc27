"""
Word Equation RMC - A word equation solver built on regular model checking.
"""

__version__ = "0.1.0"
__author__ = "Your Name"
__email__ = "your.email@example.com"

from .config import Mode, SolverSettings
from .engine import solve_formula, solve_problem
from .models import EquationSystem, Problem, SolveResult, Verdict, WordEquation
from .oracle import brute_force
from .parsing import parse_file, parse_native, parse_smtlib

__all__ = [
    "Mode",
    "SolverSettings",
    "EquationSystem",
    "Problem",
    "SolveResult",
    "Verdict",
    "WordEquation",
    "solve_problem",
    "solve_formula",
    "brute_force",
    "parse_file",
    "parse_native",
    "parse_smtlib",
]
