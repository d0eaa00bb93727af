"""Truth evaluation of formulas on neighborhood models.

Truth sets are int bitmasks over the model's states.  The clauses:

    atom p      the valuation mask of p
    !a          complement
    a & b       intersection
    D a         true at s iff the truth set of a, or its complement,
                belongs to the state's neighborhood collection
    [] a        true at s iff the truth set of a belongs to the collection
                (extended mode only; an experimental necessity reading)

The reserved atom "_t" evaluates to the empty set; it only ever occurs
inside the desugared forms of top and bot, where its value cancels out.
All functions here are pure and safe to call from parallel workers.
"""

from __future__ import annotations

from .formula import (
    And,
    Atom,
    Box,
    BoxNotAllowedError,
    Delta,
    Formula,
    Not,
    RESERVED_ATOM,
)
from .model import NeighborhoodModel


class UnknownAtomError(Exception):
    def __init__(self, name: str):
        super().__init__(f"atom {name!r} has no valuation in this model")
        self.name = name


def delta_state_mask(model: NeighborhoodModel, child_mask: int) -> int:
    """States where a proposition with the given truth set is noncontingent."""
    full = model.full_mask
    comp = full ^ child_mask
    result = 0
    bit = 1
    for coll in model.neighborhoods:
        if child_mask in coll or comp in coll:
            result |= bit
        bit <<= 1
    return result


def box_state_mask(model: NeighborhoodModel, child_mask: int) -> int:
    """States whose collection contains the given truth set."""
    result = 0
    bit = 1
    for coll in model.neighborhoods:
        if child_mask in coll:
            result |= bit
        bit <<= 1
    return result


def truth_set(model: NeighborhoodModel, f: Formula, extended: bool = False,
              memo: dict[Formula, int] | None = None) -> int:
    """The bitmask of states where f holds.

    Results are memoized per distinct subformula, so shared subterms are
    evaluated once; the outcome does not depend on sharing.  Callers
    evaluating many formulas on one model may pass a shared memo dict.
    """
    full = model.full_mask
    valuation = model.valuation
    if memo is None:
        memo = {}

    def walk(g: Formula) -> int:
        cached = memo.get(g)
        if cached is not None:
            return cached
        match g:
            case Atom(name):
                if name == RESERVED_ATOM:
                    value = 0
                elif name in valuation:
                    value = valuation[name]
                else:
                    raise UnknownAtomError(name)
            case Not(child):
                value = full ^ walk(child)
            case And(left, right):
                value = walk(left) & walk(right)
            case Delta(child):
                value = delta_state_mask(model, walk(child))
            case Box(child):
                if not extended:
                    raise BoxNotAllowedError(
                        "box evaluation requires extended mode")
                value = box_state_mask(model, walk(child))
            case _:
                raise TypeError(f"not a formula: {g!r}")
        memo[g] = value
        return value

    return walk(f)


def holds_at(model: NeighborhoodModel, state: int, f: Formula,
             extended: bool = False) -> bool:
    if not 0 <= state < model.state_count:
        raise ValueError(f"state {state} out of range")
    return bool(truth_set(model, f, extended) >> state & 1)


def valid_in_model(model: NeighborhoodModel, f: Formula,
                   extended: bool = False) -> bool:
    return truth_set(model, f, extended) == model.full_mask
