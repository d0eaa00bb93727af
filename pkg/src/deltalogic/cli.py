"""Command-line front door.

One subcommand per claim family:

    check          evaluate a formula at a state of a model
    validity       search a frame class for a countermodel
    props          report the frame properties of a model
    supplement     superset-close a model, or sweep-check the closure laws
    prove          check a derivation file or the shipped fixtures
    soundness      scan axiom instance pools over a system's class
    cube           produce the 12 separation witnesses between the systems
    lambda-eq      compare the two canonical selection functions
    schema-exp     evidence run for the almost-definability schema
    monotone-exp   hunt monotonicity failures of its selection function
    enumerate      stream or count the models of a class

Exit codes: 0 for success, valid, accepted or equal; 1 when a countermodel,
rejection, difference or missing witness is found; 2 for usage or input
errors.  Default seeds are fixed so default runs are reproducible.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import Sequence

from . import lambdas, model, proofs, search, semantics
from .formula import FormulaError, Formula, atoms_of, parse, render
from .model import (
    BoundExceededError,
    FrameClassSpec,
    NeighborhoodModel,
    enumerate_models,
    model_from_json,
    model_to_dict,
    model_to_json,
    random_model,
    supplementation,
)

DEFAULT_SEED = search.DEFAULT_SEED

_INPUT_ERRORS = (FormulaError, BoundExceededError, ValueError, OSError,
                 proofs.DerivationFormatError, semantics.UnknownAtomError)


def _emit(data: dict, as_json: bool, text: str) -> None:
    if as_json:
        print(json.dumps(data, sort_keys=True))
    else:
        print(text)


def _load_model(path: str) -> NeighborhoodModel:
    with open(path, "r", encoding="utf-8") as handle:
        return model_from_json(handle.read())


def _parse_class(text: str) -> FrameClassSpec:
    return FrameClassSpec.parse(text)


def _parse_pool(text: str | None) -> tuple[Formula, ...]:
    if text is None:
        return search.DEFAULT_POOL
    pool = tuple(parse(part.strip()) for part in text.split(",") if part.strip())
    if not pool:
        raise ValueError("empty instance pool")
    return pool


def _pool_atoms(pool: Sequence[Formula], base: tuple[str, ...]) -> tuple[str, ...]:
    names = set(base)
    for f in pool:
        names |= atoms_of(f)
    names.discard("_t")
    return tuple(sorted(names))


def _search_config(args, atoms: tuple[str, ...]) -> search.SearchConfig:
    return search.SearchConfig(
        mode=args.mode, max_states=args.max_states, trials=args.trials,
        seed=args.seed, atoms=atoms, extended=getattr(args, "extended", False))


def _verdict_data(formula: Formula, spec: FrameClassSpec,
                  verdict) -> dict:
    data = {
        "query": render(formula),
        "class": spec.name(),
        "verdict": "valid" if isinstance(verdict, search.Valid) else "countermodel",
        "witness": None,
        "state": None,
        "scope": None,
    }
    if isinstance(verdict, search.Valid):
        data["scope"] = verdict.scope
    else:
        data["witness"] = model_to_dict(verdict.model)
        data["state"] = verdict.state
    return data


# ---------------------------------------------------------------------------
# Subcommand handlers.  Each returns the process exit code.

def _cmd_check(args) -> int:
    m = _load_model(args.model)
    f = parse(args.formula, "extended" if args.extended else "core")
    value = semantics.holds_at(m, args.state, f, extended=args.extended)
    _emit({"formula": render(f), "state": args.state, "holds": value},
          args.json, "true" if value else "false")
    return 0


def _cmd_validity(args) -> int:
    spec = _parse_class(args.cls)
    f = parse(args.formula, "extended" if args.extended else "core")
    names = _pool_atoms((f,), tuple(args.atoms.split(",")) if args.atoms else ())
    verdict = search.check_validity(f, spec, _search_config(args, names))
    data = _verdict_data(f, spec, verdict)
    if isinstance(verdict, search.Valid):
        _emit(data, args.json, f"valid ({verdict.scope}, {verdict.models_checked} models)")
        return 0
    _emit(data, args.json,
          "countermodel at state "
          f"{verdict.state}: {model_to_json(verdict.model)}")
    return 1


def _cmd_props(args) -> int:
    m = _load_model(args.model)
    flags = {p: model.has_property(m, p) for p in model.PROPERTY_LETTERS}
    names = [alias for alias in ("all", "quasi-filter", "filter")
             if FrameClassSpec.parse(alias).matches(m)]
    text = " ".join(f"{p}={str(v).lower()}" for p, v in flags.items())
    _emit({"properties": flags, "classes": names}, args.json,
          f"{text}  classes: {', '.join(names)}")
    return 0


def _cmd_supplement(args) -> int:
    if args.check:
        return _supplement_sweep(args)
    m = _load_model(args.model)
    print(model_to_json(supplementation(m)))
    return 0


def _supplement_sweep(args) -> int:
    # Closure-law sweep: supplemented result, growth, idempotence, and
    # preservation of i and n, over exhaustive |S|=2 plus random models.
    import random as _random

    failures = 0
    checked = 0

    def examine(m: NeighborhoodModel) -> None:
        nonlocal failures, checked
        checked += 1
        plus = supplementation(m)
        ok = model.has_property(plus, "s")
        ok = ok and all(a <= b for a, b in zip(m.neighborhoods, plus.neighborhoods))
        ok = ok and supplementation(plus) == plus
        for prop in "in":
            if model.has_property(m, prop) and not model.has_property(plus, prop):
                ok = False
        if not ok:
            failures += 1
            print(f"violation: {model_to_json(m)}", file=sys.stderr)

    for m in enumerate_models(2, ()):
        examine(m)
    rng = _random.Random(args.seed)
    for size in (3, 4):
        for _ in range(args.trials):
            examine(random_model(size, (), seed=rng.getrandbits(48)))
    _emit({"models_checked": checked, "violations": failures},
          args.json, f"checked {checked} models, violations: {failures}")
    return 0 if failures == 0 else 1


def _cmd_prove(args) -> int:
    if args.all_fixtures:
        failed = 0
        for name in proofs.fixture_names():
            system, derivation = proofs.load_fixture(name)
            result = proofs.check_derivation(system, derivation)
            status = "accepted" if result.accepted else (
                f"rejected at line {result.line} ({result.reason})")
            print(f"{name} [{system}]: {status}")
            failed += 0 if result.accepted else 1
        return 0 if failed == 0 else 1
    if args.fixture:
        system, derivation = proofs.load_fixture(args.fixture)
        if args.system:
            system = args.system
    else:
        if not args.derivation or not args.system:
            raise ValueError("prove needs --derivation and --system, or --fixture")
        with open(args.derivation, "r", encoding="utf-8") as handle:
            derivation = proofs.parse_derivation(handle.read())
        system = args.system
    result = proofs.check_derivation(system, derivation)
    data = {"system": system, "accepted": result.accepted,
            "line": result.line, "reason": result.reason, "detail": result.detail}
    if result.accepted:
        _emit(data, args.json, f"accepted in {system}")
        return 0
    _emit(data, args.json,
          f"rejected at line {result.line}: {result.reason} ({result.detail})")
    return 1


def _cmd_soundness(args) -> int:
    pool = _parse_pool(args.pool)
    names = _pool_atoms(pool, ())
    cfg = _search_config(args, names)
    if args.schema:
        spec = _parse_class(args.cls if args.cls else "all")
        report = search.schema_soundness(args.schema, spec, pool, cfg)
    elif args.system:
        report = search.axiom_soundness_report(args.system, pool, cfg)
    else:
        raise ValueError("soundness needs --system or --schema")
    lines = []
    data_entries = []
    for entry in report.per_schema:
        status = "ok" if not entry.countermodels else (
            f"{len(entry.countermodels)} countermodels")
        lines.append(f"{entry.schema}: {entry.instance_count} instances, {status}")
        data_entries.append({
            "schema": entry.schema,
            "instances": entry.instance_count,
            "countermodels": [
                {"instance": render(instance), "state": cm.state,
                 "witness": model_to_dict(cm.model)}
                for instance, cm in entry.countermodels
            ],
        })
    header = (f"system {report.system}" if report.system else "schema run") + (
        f" on class {report.class_name} ({report.scope})")
    _emit({"system": report.system, "class": report.class_name,
           "scope": report.scope, "schemas": data_entries},
          args.json, header + "\n" + "\n".join(lines))
    return 0 if report.ok else 1


def _cmd_cube(args) -> int:
    pool = _parse_pool(args.pool)
    names = _pool_atoms(pool, ())
    try:
        witnesses = search.cube_strictness(
            pool=pool, max_states=args.max_states, trials=args.trials,
            random_max_states=args.random_max_states, seed=args.seed, atoms=names)
    except search.WitnessNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    data = []
    for w in witnesses:
        data.append({
            "source": w.source, "target": w.target, "axiom": w.axiom,
            "instance": render(w.instance), "state": w.state,
            "states": w.model.state_count, "phase": w.phase,
            "inclusion_ok": w.inclusion_ok,
            "witness": model_to_dict(w.model),
        })
        if not args.json:
            print(f"{w.source} -> {w.target} (adds {w.axiom}): falsifies "
                  f"{render(w.instance)} at state {w.state} of a "
                  f"{w.model.state_count}-state model [{w.phase}]")
    if args.json:
        print(json.dumps({"arrows": data}, sort_keys=True))
    return 0


def _cmd_lambda_eq(args) -> int:
    base = tuple(parse(part.strip()) for part in args.base.split(",") if part.strip())
    if args.model:
        m = _load_model(args.model)
        comparison = lambdas.compare_lambdas(m, base, args.depth)
        payload = [
            {
                "model": model_to_dict(m),
                "state": s.state,
                "universe_size": s.universe_size,
                "lambda_k": [render(f) for f in s.lambda_k],
                "lambda_h": [render(f) for f in s.lambda_h_original],
                "equal": s.equal,
            }
            for s in comparison.states
        ]
        if args.json:
            print(json.dumps(payload, sort_keys=True))
        else:
            for item in payload:
                print(f"state {item['state']}: equal={item['equal']} "
                      f"lambda_k={item['lambda_k']}")
        return 0 if comparison.equal else 1
    report = lambdas.lambda_equality_scan(
        base, args.depth, exhaustive_states=args.exhaustive_states,
        random_trials=args.trials, random_states=args.max_states, seed=args.seed)
    _emit({"scope": report.scope, "models_checked": report.models_checked,
           "differences": len(report.differences)},
          args.json,
          f"{report.scope}: {report.models_checked} models, "
          f"differences: {len(report.differences)}")
    return 0 if report.ok else 1


def _cmd_schema_exp(args) -> int:
    pool = _parse_pool(args.pool)
    names = _pool_atoms(pool, ())
    spec = _parse_class(args.cls)
    cfg = replace(_search_config(args, names), extended=True)
    report = search.schema_validity_experiment(spec, cfg, pool)
    items = []
    for item in report.items:
        verdict = ("valid" if isinstance(item.verdict, search.Valid)
                   else "countermodel")
        items.append({"phi": render(item.phi), "chi": render(item.chi),
                      "verdict": verdict})
    _emit({"class": report.class_name, "scope": report.scope,
           "note": report.note, "items": items},
          args.json,
          f"class {report.class_name} ({report.scope}): "
          f"{len(items) - report.countermodel_count} valid in scope, "
          f"{report.countermodel_count} countermodels\nnote: {report.note}")
    return 0


def _cmd_monotone_exp(args) -> int:
    base = tuple(parse(part.strip()) for part in args.base.split(",") if part.strip())
    universe = lambdas.close_universe(base, args.depth)
    names = _pool_atoms(universe.members, ())
    cfg = search.SearchConfig(mode="random", max_states=args.max_states,
                              trials=args.trials, seed=args.seed, atoms=names)
    report = search.almost_monotonicity_experiment(universe, cfg)
    status = "inconclusive" if report.inconclusive else (
        f"{len(report.violations)} re-verified violations")
    _emit({"models_checked": report.models_checked,
           "violations": len(report.violations),
           "inconclusive": report.inconclusive},
          args.json, f"checked {report.models_checked} models: {status}")
    return 0


def _cmd_enumerate(args) -> int:
    spec = _parse_class(args.cls)
    names = tuple(part.strip() for part in args.atoms.split(",") if part.strip()) \
        if args.atoms else ()
    count = 0
    for m in enumerate_models(args.states, names, spec):
        count += 1
        if not args.count:
            if args.limit and count > args.limit:
                count -= 1
                break
            print(model_to_json(m))
    if args.count:
        print(count)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing.

def _add_search_options(sub, default_mode="exhaustive", default_max=2):
    sub.add_argument("--mode", choices=("exhaustive", "random"),
                     default=default_mode)
    sub.add_argument("--max-states", type=int, default=default_max)
    sub.add_argument("--trials", type=int, default=1000)
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--json", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deltalogic",
        description="Workbench for noncontingency logic over neighborhood models.")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("check", help="evaluate a formula at a state")
    sub.add_argument("--model", required=True)
    sub.add_argument("--formula", required=True)
    sub.add_argument("--state", type=int, default=0)
    sub.add_argument("--extended", action="store_true")
    sub.add_argument("--json", action="store_true")
    sub.set_defaults(handler=_cmd_check)

    sub = commands.add_parser("validity", help="search a class for a countermodel")
    sub.add_argument("--formula", required=True)
    sub.add_argument("--class", dest="cls", default="all")
    sub.add_argument("--atoms", default=None)
    sub.add_argument("--extended", action="store_true")
    _add_search_options(sub)
    sub.set_defaults(handler=_cmd_validity)

    sub = commands.add_parser("props", help="frame properties of a model")
    sub.add_argument("--model", required=True)
    sub.add_argument("--json", action="store_true")
    sub.set_defaults(handler=_cmd_props)

    sub = commands.add_parser("supplement",
                              help="superset-close a model or sweep the closure laws")
    sub.add_argument("--model")
    sub.add_argument("--check", action="store_true",
                     help="run the closure-law sweep instead of transforming")
    sub.add_argument("--trials", type=int, default=1000)
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--json", action="store_true")
    sub.set_defaults(handler=_cmd_supplement)

    sub = commands.add_parser("prove", help="check a derivation")
    sub.add_argument("--derivation")
    sub.add_argument("--system", choices=proofs.SYSTEM_IDS)
    sub.add_argument("--fixture")
    sub.add_argument("--all-fixtures", action="store_true")
    sub.add_argument("--json", action="store_true")
    sub.set_defaults(handler=_cmd_prove)

    sub = commands.add_parser("soundness", help="axiom instance pools vs a class")
    sub.add_argument("--system", choices=proofs.SYSTEM_IDS)
    sub.add_argument("--schema", choices=("EQU", "M", "C", "N", "M'", "C'"))
    sub.add_argument("--class", dest="cls", default=None)
    sub.add_argument("--pool", default=None,
                     help="comma-separated formulas (default pool: p, q, !p, !q, p & q, p | q)")
    _add_search_options(sub)
    sub.set_defaults(handler=_cmd_soundness)

    sub = commands.add_parser("cube", help="separation witnesses between systems")
    sub.add_argument("--pool", default=None)
    sub.add_argument("--max-states", type=int, default=2)
    sub.add_argument("--trials", type=int, default=2000)
    sub.add_argument("--random-max-states", type=int, default=4)
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--json", action="store_true")
    sub.set_defaults(handler=_cmd_cube)

    sub = commands.add_parser("lambda-eq", help="compare the selection functions")
    sub.add_argument("--model")
    sub.add_argument("--base", default="p,q")
    sub.add_argument("--depth", type=int, default=1)
    sub.add_argument("--exhaustive-states", type=int, default=0)
    _add_search_options(sub, default_mode="random", default_max=3)
    sub.set_defaults(handler=_cmd_lambda_eq)

    sub = commands.add_parser("schema-exp",
                              help="almost-definability schema evidence run")
    sub.add_argument("--class", dest="cls", default="all")
    sub.add_argument("--pool", default=None)
    _add_search_options(sub)
    sub.set_defaults(handler=_cmd_schema_exp)

    sub = commands.add_parser("monotone-exp",
                              help="monotonicity failures of the schema selection")
    sub.add_argument("--base", default="p,q")
    sub.add_argument("--depth", type=int, default=1)
    sub.add_argument("--max-states", type=int, default=3)
    sub.add_argument("--trials", type=int, default=1000)
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--json", action="store_true")
    sub.set_defaults(handler=_cmd_monotone_exp)

    sub = commands.add_parser("enumerate", help="stream or count models of a class")
    sub.add_argument("--states", type=int, required=True)
    sub.add_argument("--atoms", default=None)
    sub.add_argument("--class", dest="cls", default="all")
    sub.add_argument("--count", action="store_true")
    sub.add_argument("--limit", type=int, default=0)
    sub.add_argument("--json", action="store_true")
    sub.set_defaults(handler=_cmd_enumerate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.handler(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
