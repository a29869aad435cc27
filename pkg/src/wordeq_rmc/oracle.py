"""
Bounded brute-force search for models, used as an independent check of the solver.
"""
import logging
from itertools import product
from typing import Iterator, List, Sequence, Tuple

try:
    from .engine import verify_model
    from .models import EqLit, OracleOutcome, OracleResult, Problem, iter_literals
except ImportError:
    from engine import verify_model
    from models import EqLit, OracleOutcome, OracleResult, Problem, iter_literals

logger = logging.getLogger(__name__)


def words_up_to(alphabet: Sequence[str], max_len: int) -> List[str]:
    """All strings over ``alphabet`` of length at most ``max_len``, shortest first."""
    letters = sorted(set(alphabet))
    found = [""]
    level = [""]
    for _ in range(max_len):
        level = [w + c for w in level for c in letters]
        found.extend(level)
    return found


def iter_assignments(count: int, alphabet: Sequence[str], max_len: int) -> Iterator[Tuple[str, ...]]:
    """Assignments grouped by their longest value, product order inside each group.

    Raising the bound only appends groups, so the first hit never changes.
    """
    letters = sorted(set(alphabet))
    if count == 0:
        yield ()
        return
    shorter: List[str] = []
    for m in range(max_len + 1):
        exact = [w for w in words_up_to(letters, m) if len(w) == m]
        pool = sorted(shorter + exact, key=lambda w: (len(w), w))
        for values in product(pool, repeat=count):
            if any(len(v) == m for v in values):
                yield values
        shorter = pool
        if not letters:
            break


def brute_force(problem: Problem, max_len: int, node_limit: int = 2_000_000) -> OracleResult:
    """First model (in canonical order) with every value of length at most ``max_len``."""
    variables = problem.all_variables()
    alphabet = set(problem.alphabet)
    for lit in iter_literals(problem.formula):
        if isinstance(lit, EqLit):
            alphabet.update(s.name for s in lit.equation.constants())
    nodes = 0
    for values in iter_assignments(len(variables), sorted(alphabet), max_len):
        if nodes >= node_limit:
            logger.warning(f"Oracle stopped at the node limit of {node_limit}")
            return OracleResult(outcome=OracleOutcome.CAP, max_len=max_len, nodes=nodes)
        nodes += 1
        model = dict(zip(variables, values))
        if verify_model(problem.formula, model):
            logger.info(f"Oracle found a model after {nodes} assignments")
            return OracleResult(outcome=OracleOutcome.SAT, max_len=max_len, model=model, nodes=nodes)
    return OracleResult(outcome=OracleOutcome.NO_MODEL, max_len=max_len, nodes=nodes)
