"""Command-line front end: ``cakediv <subcommand> ...``.

Each subcommand builds one JSON document.  The document goes to ``--output``
(or ``$CAKEDIV_OUTPUT_DIR/<subcommand>.json``) and a table goes to stdout;
``--json`` prints the document to stdout instead of the table.

Exit status: 0 accepted or valid, 1 rejected or invalid, 2 fault or bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from importlib import resources
from pathlib import Path

from . import arena
from .adversary import SigmaAdversary
from .deficiency import DEFAULT_BUDGET as ENUMERATION_BUDGET
from .deficiency import is_deficient, min_deficit
from .errors import CakeError, EnumerationBudgetExceeded
from .exact import Scalar
from .indices import (INFINITY, EntitlementProfile, cf2_lower, cf_upper,
                      compute_indices, prop1, theorem1)
from .kitchen import KitchenMeasure, Query
from .protocols import MEDIATORS, make_mediator
from .records import PartitionRecord, validate_ultraresponse

OUTPUT_ENV = "CAKEDIV_OUTPUT_DIR"
SCHEMAS = ("indices", "bounds", "deficiency", "validate", "transcript")


def load_schema(name: str) -> dict:
    """The JSON schema for a document kind, shipped in ``cakediv/schemas``."""
    if name not in SCHEMAS:
        raise KeyError(f"no schema {name!r}")
    return json.loads(resources.files("cakediv").joinpath(f"schemas/{name}.json").read_text(
        encoding="utf-8"))


# ------------------------------------------------------------ output

def _table(rows: list[tuple[str, object]]) -> str:
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _emit(args, doc: dict, rows: list[tuple[str, object]]) -> None:
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    path = args.output
    if path is None and os.environ.get(OUTPUT_ENV):
        path = Path(os.environ[OUTPUT_ENV]) / f"{args.command}.json"
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    if args.json:
        sys.stdout.write(text)
    else:
        print(_table(rows))


def _profile(args) -> EntitlementProfile:
    return EntitlementProfile.parse(args.entitlements, args.radicand)


def _fmt_index(x) -> str:
    return "∞" if x == INFINITY else str(x)


# ------------------------------------------------------------ subcommands

def cmd_indices(args) -> int:
    e = _profile(args)
    report = compute_indices(e)
    doc = {"schema": "cakediv.indices/1", "entitlements": e.to_json(), **report.to_json()}
    _emit(args, doc, [("entitlements", ", ".join(e.to_json())),
                      ("clonage", _fmt_index(report.clonage)),
                      ("precision", _fmt_index(report.precision)),
                      ("fineness", report.fineness)])
    return 0


def bounds_document(e: EntitlementProfile) -> dict:
    report = compute_indices(e)
    n = e.n
    finite = report.clonage != INFINITY
    rows = {
        "cloned_ds_cost": (report.clonage ** 2 + report.clonage) // 2 if finite else None,
        "theorem1_lower": theorem1(report.clonage, n) if finite and n >= 2 else None,
        "cf_upper": cf_upper(report.clonage, n) if finite and n >= 2 else None,
        "prop1_lower": prop1(report.precision) if finite else None,
        "cf2_lower": cf2_lower(report.fineness, n).to_json(),
    }
    return {"schema": "cakediv.bounds/1", "entitlements": e.to_json(), **report.to_json(),
            "bounded": finite,
            "bounds": {k: ("unbounded" if v is None else v) for k, v in rows.items()}}


def cmd_bounds(args) -> int:
    e = _profile(args)
    doc = bounds_document(e)
    b = doc["bounds"]
    report = compute_indices(e)
    rows = [("entitlements", ", ".join(e.to_json())),
            ("clonage / precision / fineness",
             " / ".join(_fmt_index(x) for x in (report.clonage, report.precision,
                                                 report.fineness))),
            ("cloned Dubins-Spanier cost", b["cloned_ds_cost"]),
            ("upper bound from clonage", b["cf_upper"]),
            ("lower bound from clonage", b["theorem1_lower"]),
            ("lower bound from precision", b["prop1_lower"]),
            ("lower bound from fineness", f"{b['cf2_lower']['factor']}·log3 "
                                          f"{b['cf2_lower']['log3_of']} "
                                          f"≈ {b['cf2_lower']['approx']:.3f}")]
    _emit(args, doc, rows)
    return 0


def _transcript_rows(t: arena.Transcript) -> list[tuple[str, object]]:
    rows = [("mode", t.mode), ("mediator", json.dumps(t.mediator)),
            ("opponent", t.opponent.get("name")), ("cost", t.cost), ("verdict", t.verdict)]
    if t.final is not None:
        for a in range(1, t.entitlements.n + 1):
            rows.append((f"agent {a} serving", str(t.final[a])))
    for s in t.detail.get("shortfalls", []):
        rows.append((f"agent {s['agent']} deficit", s["deficit"]))
    if "reason" in t.detail:
        rows.append(("reason", t.detail["reason"]))
    return rows


def _finish_transcript(args, t: arena.Transcript, extra: dict | None = None) -> int:
    rows = _transcript_rows(t)
    rows += [(k.replace("_", " "), v) for k, v in {**t.summary, **(extra or {})}.items()]
    _emit(args, t.to_json(), rows)
    return arena.EXIT_CODES[t.verdict]


def _budget(args):
    return None if args.unbounded else args.budget


def cmd_simulate(args) -> int:
    e = _profile(args)
    rng = random.Random(args.seed)
    if args.measures == "uniform":
        profile = [KitchenMeasure.uniform() for _ in range(e.n)]
    else:
        profile = [KitchenMeasure.random(rng, args.pieces) for _ in range(e.n)]
    mediator = make_mediator(args.mediator, e, args.seed, args.max_queries)
    t = arena.run_division_game(mediator, e, profile, _budget(args), radicand=args.radicand)
    return _finish_transcript(args, t)


def cmd_duel(args) -> int:
    e = _profile(args)
    mediator = make_mediator(args.mediator, e, args.seed, args.max_queries)
    adversary = SigmaAdversary(e, args.cstar, args.schedule, checked=args.checked)
    t = arena.run_adversary_game(mediator, adversary, e, _budget(args),
                                 permissive=args.permissive, radicand=args.radicand)
    return _finish_transcript(args, t)


def _load(path: str):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def cmd_deficiency(args) -> int:
    P = PartitionRecord.from_json(_load(args.record), args.radicand)
    P.require_valid()
    e1 = Scalar.parse(args.threshold, args.radicand)
    doc = {"schema": "cakediv.deficiency/1", "threshold": str(e1), "level": args.level}
    try:
        verdict = is_deficient(P, e1, args.level, args.enum_budget, args.method)
    except EnumerationBudgetExceeded as exc:
        doc.update(deficient=None, counterexample=None, min_deficit=None, detail=str(exc))
        _emit(args, doc, [("deficient", "unknown"), ("reason", str(exc))])
        return 2
    doc.update(verdict.to_json())
    doc["min_deficit"] = str(min_deficit(P, e1, args.level, args.enum_budget)) \
        if verdict and args.level >= 1 else None
    rows = [("threshold", e1), ("level", args.level), ("deficient", verdict.deficient)]
    if verdict.counterexample:
        rows.append(("acceptable hyperallocation", verdict.counterexample.to_json()))
    if doc["min_deficit"] is not None:
        rows.append(("smallest deficit", doc["min_deficit"]))
    _emit(args, doc, rows)
    return 0


def _validate_transcript(t: arena.Transcript) -> list[str]:
    problems = []
    record = PartitionRecord.trivial(t.entitlements.n)
    for k, step in enumerate(t.steps, start=1):
        check = validate_ultraresponse(record, step.query, step.record)
        if not check:
            problems.append(f"step {k}: {check.clause}: {check.detail}")
        record = step.record
    if t.final is not None and t.verdict in (arena.ACCEPTED, arena.REJECTED) \
            and t.mode == "adversary":
        judged = arena.judge_allocation(record, t.entitlements, t.final)
        if (t.verdict == arena.ACCEPTED) != judged.accepted:
            problems.append(f"recorded verdict {t.verdict} disagrees with the judge")
    return problems


def cmd_validate(args) -> int:
    data = _load(args.file)
    if "steps" in data:
        t = arena.Transcript.from_json(data)
        problems = _validate_transcript(t)
    else:
        d = args.radicand
        check = validate_ultraresponse(PartitionRecord.from_json(data["record"], d),
                                       Query.from_json(data["query"], d),
                                       PartitionRecord.from_json(data["response"], d))
        problems = [] if check else [f"{check.clause}: {check.detail}"]
    doc = {"schema": "cakediv.validate/1", "valid": not problems, "problems": problems}
    _emit(args, doc, [("valid", not problems)] + [("problem", p) for p in problems])
    return 0 if not problems else 1


def cmd_replay(args) -> int:
    original = arena.Transcript.from_json(_load(args.file))
    t = arena.replay(original)
    identical = t.dumps() == original.dumps()
    code = _finish_transcript(args, t, {"identical to the input": identical})
    return code if identical else 2


# ------------------------------------------------------------ parser

def _positive(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--radicand", type=int, default=5,
                        help="d for exact values in Q(sqrt d) (default 5)")
    common.add_argument("--output", "-o", help="write the JSON document here")
    common.add_argument("--json", action="store_true", help="print JSON instead of a table")

    ents = argparse.ArgumentParser(add_help=False)
    ents.add_argument("-e", "--entitlements", required=True,
                      help="comma-separated values such as 1/3,2/3, or 'golden'")

    game = argparse.ArgumentParser(add_help=False)
    game.add_argument("--mediator", choices=MEDIATORS, default="cloned-ds")
    game.add_argument("--seed", type=int, default=0)
    game.add_argument("--max-queries", type=_positive, default=None,
                      help="query cap for mediators that take one")
    game.add_argument("--budget", type=_positive, default=arena.DEFAULT_BUDGET,
                      help=f"query budget (default {arena.DEFAULT_BUDGET})")
    game.add_argument("--unbounded", action="store_true", help="run without a query budget")

    parser = argparse.ArgumentParser(prog="cakediv",
                                     description="Exact cake-cutting games and bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("indices", parents=[common, ents], help="clonage, precision, fineness")
    p.set_defaults(run=cmd_indices)
    p = sub.add_parser("bounds", parents=[common, ents], help="query-count bounds")
    p.set_defaults(run=cmd_bounds)

    p = sub.add_parser("simulate", parents=[common, ents, game],
                       help="division game against fixed measures")
    p.add_argument("--measures", choices=("uniform", "random"), default="random")
    p.add_argument("--pieces", type=int, default=4, help="density pieces per random measure")
    p.set_defaults(run=cmd_simulate)

    p = sub.add_parser("duel", parents=[common, ents, game],
                       help="adversary game against the deficiency-keeping adversary")
    p.add_argument("--cstar", type=_positive, default=2, help="queries the adversary forces")
    p.add_argument("--schedule", choices=("paper", "minimal"), default="paper")
    p.add_argument("--checked", action="store_true",
                   help="assert deficiency of every adversary record")
    p.add_argument("--permissive", action="store_true",
                   help="accept adversary records that fail validation")
    p.set_defaults(run=cmd_duel)

    p = sub.add_parser("deficiency", parents=[common], help="decide level-deficiency")
    p.add_argument("record", help="partition record JSON file (two agents)")
    p.add_argument("-t", "--threshold", required=True, help="agent 1's entitlement")
    p.add_argument("-l", "--level", type=_positive, required=True)
    p.add_argument("--method", choices=("pareto", "exhaustive"), default="pareto")
    p.add_argument("--enum-budget", type=_positive, default=ENUMERATION_BUDGET)
    p.set_defaults(run=cmd_deficiency)

    p = sub.add_parser("validate", parents=[common],
                       help="check a transcript, or a {record, query, response} document")
    p.add_argument("file")
    p.set_defaults(run=cmd_validate)

    p = sub.add_parser("replay", parents=[common], help="re-run a transcript")
    p.add_argument("file")
    p.set_defaults(run=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (CakeError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"cakediv {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
