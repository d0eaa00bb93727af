"""deltalogic: a workbench for noncontingency logic over neighborhood models.

Parse and print formulas of the language with the noncontingency operator,
evaluate them on finite neighborhood models, check frame properties, verify
Hilbert-style derivations in the eight standard systems, search frame
classes for validity witnesses and countermodels, and compare the two
classical canonical selection functions on bounded universes.
"""

from .formula import (
    And,
    Atom,
    Box,
    BoxNotAllowedError,
    Delta,
    Formula,
    Not,
    ParseError,
    PropSkeleton,
    TooManyAtomsError,
    and_,
    atom,
    atoms_of,
    bot,
    box,
    delta,
    iff,
    implies,
    is_tautology,
    nabla,
    not_,
    or_,
    parse,
    render,
    skeleton,
    top,
)
from .model import (
    ALL_FRAMES,
    BoundExceededError,
    FILTERS,
    FrameClassSpec,
    NeighborhoodModel,
    QUASI_FILTERS,
    enumerate_models,
    has_property,
    make_model,
    model_from_json,
    model_to_json,
    random_model,
    satisfies_class,
    supplementation,
)
from .semantics import UnknownAtomError, holds_at, truth_set, valid_in_model
from .proofs import (
    CheckResult,
    Derivation,
    check_derivation,
    fixture_names,
    load_fixture,
    match_schema,
    parse_derivation,
    system_class,
    system_spec,
)
from .search import (
    Countermodel,
    DEFAULT_POOL,
    SearchConfig,
    Valid,
    WitnessNotFoundError,
    axiom_soundness_report,
    almost_monotonicity_experiment,
    check_validity,
    cube_strictness,
    schema_soundness,
    schema_validity_experiment,
)
from .lambdas import (
    TheorySet,
    Universe,
    build_theory,
    close_universe,
    compare_lambdas,
    derives,
    lambda_humberstone,
    lambda_kuhn,
)

__version__ = "0.1.0"
