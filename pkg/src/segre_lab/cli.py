"""``segre-lab``: analyze, generate, verify and search point sets (JSON in, JSON out).

Exit codes: 0 success, 2 counterexample found, 3 budget refusal, 64 usage
or input error.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .constructions import (
    gen_example_k2,
    gen_example_k3,
    gen_example_k4,
    gen_example_z1,
    match_family,
)
from .dependence import DEFAULT_BUDGET, analyze, classify
from .errors import BudgetExceeded, SegreLabError
from .exact_linalg import FieldSpec
from .multiproj import MultiprojectiveSpace, PointSet, pointset_from_json

EXIT_OK = 0
EXIT_COUNTEREXAMPLE = 2
EXIT_BUDGET = 3
EXIT_USAGE = 64

STATEMENT_IDS = ("a1", "a2", "x1", "x1.1", "o4.1", "z3", "f1", "f2", "cp1", "is1", "o8")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _field(text: str) -> FieldSpec:
    try:
        return FieldSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _dims(text: str) -> tuple:
    try:
        dims = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad space {text!r}: expected e.g. 1,1,2") from exc
    if not dims or any(n < 0 for n in dims):
        raise argparse.ArgumentTypeError(f"bad space {text!r}")
    return dims


def _count(text: str) -> int:
    try:
        return int(float(text)) if any(c in text for c in ".eE") else int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a count: {text!r}") from exc


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _provenance(args, argv: Sequence[str]) -> dict:
    return {"tool": "segre-lab", "version": __version__, "seed": getattr(args, "seed", None),
            "command": shlex.join(["segre-lab", *argv])}


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def read_point_set(path: str) -> PointSet:
    """Read a point set; an ``analyze`` report (which embeds its set) is accepted too."""
    try:
        if path == "-":
            obj = json.load(sys.stdin)
        else:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if isinstance(obj, dict) and "set" in obj and "points" not in obj:
        obj = obj["set"]
    try:
        return pointset_from_json(obj)
    except (SegreLabError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid point-set JSON: {exc}") from exc


def cmd_analyze(args, argv) -> int:
    S = read_point_set(args.input)
    rep = analyze(S, profile=None if not args.no_profile else False)
    out = rep.to_json()
    out["family"] = match_family(S).to_json(S.field) if len(S) == 6 else {"family": "none"}
    out["set"] = S.to_json()
    out["provenance"] = _provenance(args, argv)
    _emit(out, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def cmd_gen(args, argv) -> int:
    f = args.field
    if args.family == "k2":
        _, S = gen_example_k2(args.k, args.n1, args.n2, f, args.seed)
    elif args.family == "k3":
        _, S = gen_example_k3(args.k, args.n, f, args.seed)
    elif args.family == "k4":
        _, S = gen_example_k4(args.k, args.n, args.s, f, args.seed)
    else:
        _, S = gen_example_z1(f, args.seed)
    out = S.to_json()
    out["provenance"] = _provenance(args, argv)
    _emit(out, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def run_verification(args):
    """Dispatch a verification to its runner; returns a ``VerificationReport``."""
    from .theorems.cp1 import verify_cp1
    from .theorems.finders import verify_injective_deletions
    from .theorems.jobs import VerificationJob, run_job
    from .theorems.verifiers import STATEMENTS

    st = args.statement
    f = args.field
    if st in ("a1", "a2"):
        return verify_injective_deletions(st, f, args.count or 10**4, args.seed)
    if st == "cp1":
        if args.mode == "sampled":
            return verify_cp1(f, args.k, "sampled", args.count or 10**4, args.seed, args.budget)
        return verify_cp1(f, args.k, "exhaustive", budget=args.budget)
    statement = STATEMENTS[st]
    sizes = tuple(args.size) if args.size else statement.sizes
    if args.max_size is not None:
        sizes = tuple(s for s in sizes if s <= args.max_size)
    spaces = tuple(args.space or ())
    max_prod = args.max_prod if not spaces else None
    if not spaces and max_prod is None:
        max_prod = 32
    job = VerificationJob(
        statement=st,
        field=f,
        spaces=spaces,
        max_prod=max_prod,
        sizes=sizes,
        mode=args.mode,
        reduction=args.reduction,
        count=args.count,
        min_hits=args.min_hits,
        seed=args.seed,
        budget=args.budget,
        high_budget=args.high_budget,
        sampler=args.sampler,
    )
    return run_job(job, statement)


def cmd_verify(args, argv) -> int:
    if not args.field.is_finite:
        raise UsageError("verification domains need a finite field")
    try:
        rep = run_verification(args)
    except BudgetExceeded as exc:
        _emit({"statement": args.statement, "verdict": "refused", "reason": str(exc),
               "required": exc.required, "budget": exc.budget,
               "provenance": _provenance(args, argv)}, args.out)
        return EXIT_BUDGET
    out = rep.to_json(timing=args.timing)
    out["provenance"] = _provenance(args, argv)
    _emit(out, args.out)
    return EXIT_COUNTEREXAMPLE if rep.violations else EXIT_OK


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


def _search_batches(args, Y: MultiprojectiveSpace, s: int):
    from .theorems.domain import CHUNK, enumerate_full, enumerate_naive, naive_cost, plant_circuits, sample_batch

    if args.mode == "sampled":
        draw = plant_circuits if args.sampler == "circuits" else sample_batch
        for chunk in range(-(-args.count // CHUNK)):
            rng = np.random.default_rng([args.seed, s, *Y.dims, 1000003, chunk])
            yield draw(Y, s, min(CHUNK, args.count - chunk * CHUNK), rng)
        return
    if args.reduction == "full":
        yield from enumerate_full(Y.field, Y.dims, s)
        return
    cost = naive_cost(Y.field, [Y.dims], s)
    if cost > args.budget and not args.high_budget:
        raise BudgetExceeded(f"{cost:.3g} rank computations exceed the budget {args.budget:.3g}", cost, args.budget)
    yield from enumerate_naive(Y, s, args.reduction)


def _class_matches(wanted: str, label: str) -> bool:
    return label == wanted or (wanted == "e-circuit" and label.startswith("e-circuit"))


def cmd_search(args, argv) -> int:
    from .theorems.domain import batch_invariants

    if not args.field.is_finite:
        raise UsageError("search domains need a finite field")
    spaces = args.space or [(1, 1)]
    emitted = 0
    prov = _provenance(args, argv)
    for dims in spaces:
        Y = MultiprojectiveSpace(dims, args.field)
        for batch in _search_batches(args, Y, args.size):
            if not batch.size:
                continue
            inv = batch_invariants(batch)
            keep = np.ones(batch.size, dtype=bool)
            if args.defect is not None:
                keep &= inv.defect == args.defect
            if args.width is not None:
                keep &= inv.width == args.width
            if args.concise:
                keep &= inv.concise
            if args.cls == "independent":
                keep &= inv.defect == 0
            elif args.cls == "circuit":
                keep &= inv.equally_dependent & (inv.defect == 1)
            elif args.cls is not None:
                keep &= inv.defect > 0
            for b in np.nonzero(keep)[0]:
                S = batch.point_set(int(b))
                if args.cls not in (None, "independent", "circuit"):
                    if not _class_matches(args.cls, classify(S)[0]):
                        continue
                rec = S.to_json()
                rec["provenance"] = prov
                sys.stdout.write(json.dumps(rec) + "\n")
                emitted += 1
                if args.limit and emitted >= args.limit:
                    return EXIT_OK
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _domain_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--field", type=_field, default=FieldSpec.gf(3), help="gf2, gf3, ... (default gf3)")
    p.add_argument("--space", type=_dims, action="append", help="factor dims, e.g. 1,1,2 (repeatable)")
    p.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    p.add_argument("--reduction", choices=("full", "factors", "none"), default="full",
                   help="exhaustive mode: projective classes (full), factor swaps only, or every subset")
    p.add_argument("--count", type=_count, default=0, help="sampled mode: number of draws")
    p.add_argument("--sampler", choices=("mixture", "circuits"), default="mixture",
                   help="sampled mode: generic mixture or planted circuits")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=_count, default=DEFAULT_BUDGET, help="max rank computations")
    p.add_argument("--high-budget", action="store_true", help="allow runs above the budget")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="segre-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"segre-lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="invariants of a point set")
    a.add_argument("input", help="point-set JSON file, or - for stdin")
    a.add_argument("--no-profile", action="store_true", help="skip the subset-defect profile")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("gen", help="build an example family member")
    g.add_argument("family", choices=("k2", "k3", "k4", "z1"))
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--n", type=int, default=1)
    g.add_argument("--n1", type=int, default=1)
    g.add_argument("--n2", type=int, default=1)
    g.add_argument("--s", type=int, default=6)
    g.add_argument("--field", type=_field, default=FieldSpec.gf(3))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="check a statement over a domain")
    v.add_argument("statement", choices=STATEMENT_IDS)
    _domain_flags(v)
    v.add_argument("--max-prod", type=int, help="all shapes with prod(n_i+1) <= N (default 32)")
    v.add_argument("--size", type=int, action="append", help="set sizes (repeatable)")
    v.add_argument("--max-size", type=int)
    v.add_argument("--min-hits", type=_count, default=0,
                   help="sampled mode: keep drawing until this many sets meet the hypothesis")
    v.add_argument("--k", type=int, default=2, help="cp1: number of P^1 factors")
    v.add_argument("--timing", action="store_true", help="add wall-clock seconds to the report")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("search", help="stream sets with prescribed invariants (JSON lines)")
    _domain_flags(s)
    s.add_argument("--class", dest="cls",
                   choices=("independent", "circuit", "uniformly-dependent", "e-circuit",
                            "equally-dependent", "dependent-other"))
    s.add_argument("--defect", type=int)
    s.add_argument("--width", type=int)
    s.add_argument("--size", type=int, required=True)
    s.add_argument("--concise", action="store_true", help="only sets concise for the space")
    s.add_argument("--limit", type=int, default=0, help="stop after this many matches")
    s.set_defaults(func=cmd_search, reduction="none")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except UsageError as exc:
        print(f"segre-lab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"segre-lab: budget refusal: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except SegreLabError as exc:
        print(f"segre-lab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
