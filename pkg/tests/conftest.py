import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from deltalogic.formula import And, Atom, Delta, Formula, Not
from deltalogic.model import make_model


@pytest.fixture
def two_state_model():
    # S={0,1}, N(0)={{0}}, N(1)={}, V(p)={0}
    return make_model(2, [[[0]], []], {"p": [0]})


def random_core_formula(rng: random.Random, depth: int, atoms=("p", "q", "r")) -> Formula:
    """Seeded random core formula of at most the given operator depth."""
    if depth == 0 or rng.random() < 0.2:
        return Atom(rng.choice(atoms))
    kind = rng.choice(("not", "and", "delta"))
    if kind == "not":
        return Not(random_core_formula(rng, depth - 1, atoms))
    if kind == "delta":
        return Delta(random_core_formula(rng, depth - 1, atoms))
    return And(random_core_formula(rng, depth - 1, atoms),
               random_core_formula(rng, depth - 1, atoms))


def naive_truth_value(f: Formula, assignment: dict) -> bool:
    """Independent propositional evaluator used as the tautology oracle."""
    if isinstance(f, Atom):
        return assignment[f.name]
    if isinstance(f, Not):
        return not naive_truth_value(f.child, assignment)
    if isinstance(f, And):
        return naive_truth_value(f.left, assignment) and naive_truth_value(f.right, assignment)
    raise TypeError(f"not propositional: {f!r}")


def naive_tautology(f: Formula) -> bool:
    """Exhaustive truth-table check by explicit assignment enumeration."""
    from itertools import product

    from deltalogic.formula import atoms_of

    names = sorted(atoms_of(f))
    for values in product((False, True), repeat=len(names)):
        if not naive_truth_value(f, dict(zip(names, values))):
            return False
    return True
