"""Command-line front end.

Exit codes: 0 success or pass, 1 property false or counterexample,
2 usage or input error, 3 resource cap reached.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import FmtkitError, InputError, NotExtensional, NotWellFounded, ResourceCapExceeded
from .formula import analyze, parse, to_text
from .hf import mostowski_collapse, to_text as hf_text
from .parallel import default_workers
from .projection import ProjectionSpec, in_sigma_projection
from .semantics import evaluate, find_models, upward_extension_probe
from .structures import Structure, Vocabulary

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _read_text(value: str, what: str) -> str:
    if value.startswith("@"):
        try:
            return Path(value[1:]).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {what}: {exc}") from None
    return value


def _load_json(value: str, what: str):
    path = Path(value)
    if path.exists():
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {what}: {exc}") from None
    elif value.lstrip().startswith("{"):
        text = value
    else:
        raise InputError(f"{what} file {value!r} does not exist")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} is not valid JSON: {exc}") from None


def _load_structure(value: str) -> Structure:
    return Structure.from_dict(_load_json(value, "structure"))


def _emit(args, doc: dict, human: str):
    if args.format == "json":
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        print(human)


def _atom_lookup(A: Structure, text: str):
    for a in A.atoms():
        if str(a) == text:
            return a
    raise InputError(f"no atom named {text!r}")


# -- subcommands ------------------------------------------------------------------

def cmd_eval(args) -> int:
    A = _load_structure(args.structure)
    phi = parse(_read_text(args.formula, "formula"), A.vocabulary, free=_free_sorts(args.assign, A))
    assignment = {}
    for item in args.assign:
        var, _, value = item.partition("=")
        assignment[var] = _atom_lookup(A, value)
    value = evaluate(phi, A, assignment)
    _emit(args, {"formula": to_text(phi), "value": value}, "true" if value else "false")
    return EXIT_OK if value else EXIT_FALSE


def _free_sorts(items, A: Structure) -> dict:
    out = {}
    for item in items:
        var, sep, value = item.partition("=")
        if not sep or not var:
            raise InputError(f"assignment {item!r} must look like NAME=ATOM")
        out[var] = A.sort_of(_atom_lookup(A, value))
    return out


def cmd_search(args) -> int:
    voc = Vocabulary.from_dict(_load_json(args.vocab, "vocabulary"))
    phi = parse(_read_text(args.formula, "formula"), voc)
    sizes = {s: range(args.min_size, args.max_size + 1) for s in voc.sorts}
    models = []
    for B in find_models(phi, voc, sizes, up_to_iso=args.up_to_iso):
        models.append(B)
        if args.limit and len(models) >= args.limit:
            break
    doc = {"formula": to_text(phi), "count": len(models), "models": [B.to_dict() for B in models]}
    lines = [f"{len(models)} model(s)"] + [B.to_json() for B in models]
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK if models else EXIT_FALSE


def cmd_project(args) -> int:
    spec = ProjectionSpec.load(args.spec) if Path(args.spec).exists() else \
        ProjectionSpec.from_dict(_load_json(args.spec, "projection spec"))
    doc = _load_json(args.structure, "structure")
    A = Structure.from_dict(doc, None if "vocabulary" in doc else spec.base)
    B = in_sigma_projection(A, spec)
    doc = {"spec": spec.name, "witness": None if B is None else B.to_dict(), "limit": spec.limit(A.size)}
    human = "no witness within the bound" if B is None else "witness:\n" + B.to_json()
    _emit(args, doc, human)
    return EXIT_OK if B is not None else EXIT_FALSE


def cmd_verify(args) -> int:
    from .constructions import verify

    report = verify(args.name, args.max_size, args.workers)
    if args.format == "json":
        print(report.to_json())
    else:
        status = "pass" if report.passed else "FAIL"
        print(f"{report.name}: {status}")
        for n, count in sorted(report.per_size.items()):
            print(f"  size {n}: checked {count}")
        print(f"  checked {report.checked} in total ({report.classes} classes), {status}")
        for key, value in sorted(report.observations.items()):
            print(f"  {key}: {json.dumps(value, sort_keys=True)}")
        if report.counterexample is not None:
            print("  counterexample: " + json.dumps(report.counterexample, sort_keys=True))
    return EXIT_OK if report.passed else EXIT_FALSE


def cmd_collapse(args) -> int:
    A = _load_structure(args.structure)
    voc = A.vocabulary
    if len(voc.sorts) != 1 or voc.relation(args.relation) is None or len(voc.relation(args.relation)) != 2:
        raise InputError(f"collapse needs a single-sorted structure with binary relation {args.relation!r}")
    try:
        image = mostowski_collapse(A.domains[voc.sorts[0]], A.relations[args.relation])
    except NotWellFounded as exc:
        _emit(args, {"collapsed": False, "reason": "not well-founded", "cycle": [str(a) for a in exc.cycle]},
              f"not well-founded: cycle {exc.cycle}")
        return EXIT_FALSE
    except NotExtensional as exc:
        _emit(args, {"collapsed": False, "reason": "not extensional", "pair": [str(a) for a in exc.pair]},
              f"not extensional: {exc.pair[0]} and {exc.pair[1]} have the same members")
        return EXIT_FALSE
    doc = {"collapsed": True, "image": {str(a): hf_text(x) for a, x in image.items()}}
    _emit(args, doc, "\n".join(f"{a} -> {hf_text(x)}" for a, x in image.items()))
    return EXIT_OK


def cmd_probe(args) -> int:
    A = _load_structure(args.structure)
    phi = parse(_read_text(args.formula, "formula"), A.vocabulary)
    B = upward_extension_probe(phi, A, args.target)
    doc = {"target": args.target, "witness": None if B is None else B.to_dict()}
    human = f"no superstructure of size {args.target}" if B is None else B.to_json()
    _emit(args, doc, human)
    return EXIT_OK if B is not None else EXIT_FALSE


def cmd_catalog(args) -> int:
    from .constructions import list_constructions

    rows = list_constructions()
    lines = []
    for r in rows:
        status = r["status"] if r["verified_scale"] is None else f"{r['status']}@{r['verified_scale']}"
        lines.append(f"{r['name']:<18} scale {r['default_scale']:<2} {status:<10} {r['anchor']}")
    _emit(args, {"constructions": rows}, "\n".join(lines))
    return EXIT_OK


def cmd_analyze(args) -> int:
    voc = Vocabulary.from_dict(_load_json(args.vocab, "vocabulary"))
    a = analyze(parse(_read_text(args.formula, "formula"), voc), voc)
    doc = a.to_dict()
    _emit(args, doc, json.dumps(doc, sort_keys=True))
    return EXIT_OK


# -- entry point ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "json"), default="human")
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: available CPUs)")
    common.add_argument("--cap", type=int, default=None, help="resource cap (default: $FMTKIT_CAP or 10^6)")

    p = _Parser(prog="fmtkit", description="finite model theory toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", parents=[common], help="evaluate a formula in a structure")
    e.add_argument("--structure", required=True, help="structure JSON file")
    e.add_argument("--formula", required=True, help="formula text, or @file")
    e.add_argument("--assign", action="append", default=[], metavar="VAR=ATOM")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("search", parents=[common], help="find models of a sentence")
    s.add_argument("--formula", required=True)
    s.add_argument("--vocab", required=True, help="vocabulary JSON file or inline JSON")
    s.add_argument("--max-size", type=int, required=True)
    s.add_argument("--min-size", type=int, default=0)
    s.add_argument("--up-to-iso", action="store_true")
    s.add_argument("--limit", type=int, default=0, help="stop after this many models (0: all)")
    s.set_defaults(func=cmd_search)

    pr = sub.add_parser("project", parents=[common], help="search a projection witness")
    pr.add_argument("--spec", required=True)
    pr.add_argument("--structure", required=True)
    pr.set_defaults(func=cmd_project)

    v = sub.add_parser("verify", parents=[common], help="verify a registered construction")
    v.add_argument("name")
    v.add_argument("--max-size", type=int, default=None)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("collapse", parents=[common], help="Mostowski collapse of a structure")
    c.add_argument("--structure", required=True)
    c.add_argument("--relation", default="E")
    c.set_defaults(func=cmd_collapse)

    u = sub.add_parser("probe-ulst", parents=[common], help="look for a superstructure of a given size")
    u.add_argument("--formula", required=True)
    u.add_argument("--structure", required=True)
    u.add_argument("--target", type=int, required=True)
    u.set_defaults(func=cmd_probe)

    k = sub.add_parser("catalog", parents=[common], help="list registered constructions")
    k.set_defaults(func=cmd_catalog)

    a = sub.add_parser("analyze", parents=[common], help="symbols, sorts, rank and degree of a formula")
    a.add_argument("--formula", required=True)
    a.add_argument("--vocab", required=True)
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    if args.cap is not None and args.cap <= 0:
        print("fmtkit: error: --cap must be positive", file=sys.stderr)
        return EXIT_INPUT
    if args.workers is None:
        args.workers = default_workers()
    elif args.workers < 1:
        print("fmtkit: error: --workers must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    for name in ("max_size", "min_size", "target"):
        value = getattr(args, name, None)
        if value is not None and value < 0:
            print(f"fmtkit: error: --{name.replace('_', '-')} must be non-negative", file=sys.stderr)
            return EXIT_INPUT
    saved_cap = os.environ.get("FMTKIT_CAP")
    if args.cap is not None:
        # worker processes read the cap from the environment
        os.environ["FMTKIT_CAP"] = str(args.cap)
    try:
        return args.func(args)
    except ResourceCapExceeded as exc:
        print(f"fmtkit: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InputError as exc:
        print(f"fmtkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FmtkitError as exc:
        print(f"fmtkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FALSE
    except ValueError as exc:
        # e.g. a malformed FMTKIT_CAP
        print(f"fmtkit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        if saved_cap is None:
            os.environ.pop("FMTKIT_CAP", None)
        else:
            os.environ["FMTKIT_CAP"] = saved_cap


if __name__ == "__main__":
    sys.exit(main())
