"""``talforge`` command line.

Exit status: 0 on success (``check``: equal), 1 when ``check`` finds the
systems unequal, 2 when a result is inconclusive or an enumeration was
truncated, 3 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .budget import StepBudget, default_budget
from .cf import Cfg, Pda, cfg_normal_form, enumerate_system, pda_normal_form, trees_for
from .control import LdCfg, LdPda, TwoLevel, ld_normal_form, normalize_two_level
from .convert import TARGETS, convert
from .equiv import check_d_strong, check_d_weak, word_text
from .symbols import TalforgeError
from .tal import TAL_TYPES, tal_normal_form
from .textfmt import load_file, render_system
from .trees import tree_to_dot, tree_to_json

ERROR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors must not look like "inconclusive"
        self.print_usage(sys.stderr)
        self.exit(ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="talforge", description="Two-level grammars and tree-adjoining formalisms.")
    sub = ap.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="parse and validate a .tal file")
    p.add_argument("file")

    p = sub.add_parser("normalize", help="print a system in normal form")
    p.add_argument("file")
    p.add_argument("name")

    p = sub.add_parser("convert", help="convert a system to another formalism")
    p.add_argument("file")
    p.add_argument("name")
    p.add_argument("--to", required=True, choices=TARGETS)
    p.add_argument("--as", dest="out_name", help="name for the converted system")
    p.add_argument("--report", metavar="PATH", help="write the conversion report as JSON")

    p = sub.add_parser("enumerate", help="derivation counts per string")
    p.add_argument("file")
    p.add_argument("name")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--budget", help="max_nodes or max_nodes,max_sentential_length")

    p = sub.add_parser("trees", help="derivation trees of one string")
    p.add_argument("file")
    p.add_argument("name")
    p.add_argument("--string", required=True,
                   help="characters are symbols; separate symbols with spaces for longer ones")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("--budget")

    p = sub.add_parser("check", help="bounded equivalence check of two systems")
    p.add_argument("file")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--mode", choices=("dweak", "dstrong"), required=True)
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--budget")
    p.add_argument("--explain", action="store_true", help="print the full verdict as JSON")
    return ap


def _budget(raw: Optional[str]) -> StepBudget:
    return StepBudget.parse(raw) if raw else default_budget()


def _word(text: str) -> tuple:
    return tuple(text.split()) if " " in text.strip() else tuple(text.strip())


def _normalize(system):
    if isinstance(system, Cfg):
        return cfg_normal_form(system)
    if isinstance(system, Pda):
        return pda_normal_form(system)
    if isinstance(system, (LdCfg, LdPda)):
        out, words = ld_normal_form(system)
        for w in words:
            print(f"# a controller must also accept the label {w}", file=sys.stderr)
        return out
    if isinstance(system, TwoLevel):
        return normalize_two_level(system)
    if isinstance(system, TAL_TYPES):
        return tal_normal_form(system)
    raise TalforgeError(f"cannot normalize a {type(system).__name__}")


def _cmd_validate(args) -> int:
    load_file(args.file)
    return 0


def _cmd_normalize(args) -> int:
    system = load_file(args.file)[args.name]
    sys.stdout.write(render_system(args.name, _normalize(system)))
    return 0


def _cmd_convert(args) -> int:
    system = load_file(args.file)[args.name]
    out, report = convert(system, args.to)
    name = args.out_name or f"{args.name}_{args.to.replace('-', '_')}"
    sys.stdout.write(render_system(name, out))
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
    return 0


def _cmd_enumerate(args) -> int:
    system = load_file(args.file)[args.name]
    result = enumerate_system(system, args.max_len, _budget(args.budget))
    for y, n in sorted(result.counts().items(), key=lambda kv: (len(kv[0]), kv[0])):
        print(f"{n}\t{word_text(y) if y else 'eps'}")
    if result.truncated:
        print("talforge: budget exhausted; counts are lower bounds", file=sys.stderr)
        return 2
    return 0


def _cmd_trees(args) -> int:
    system = load_file(args.file)[args.name]
    found = trees_for(system, _word(args.string), _budget(args.budget))
    if args.format == "json":
        docs = sorted(json.dumps(tree_to_json(t), sort_keys=True, ensure_ascii=False) for t in found)
        for d in docs:
            print(d)
    else:
        docs = sorted(tree_to_dot(t) for t in found)
        for i, d in enumerate(docs):
            sys.stdout.write(d.replace('digraph "derivation"', f'digraph "derivation_{i + 1}"', 1))
    if found.truncated:
        print("talforge: budget exhausted; some trees may be missing", file=sys.stderr)
        return 2
    return 0


def _cmd_check(args) -> int:
    wb = load_file(args.file)
    fn = check_d_weak if args.mode == "dweak" else check_d_strong
    v = fn(wb[args.a], wb[args.b], args.max_len, _budget(args.budget))
    if args.explain:
        print(v.to_json())
    else:
        line = v.verdict
        if v.witness is not None:
            line += f"\twitness={word_text(v.witness) if v.witness else 'eps'}\tcounts={v.counts[0]},{v.counts[1]}"
        if any(v.truncated):
            line += "\ttruncated"
        print(line)
    return v.exit_code


_COMMANDS = {"validate": _cmd_validate, "normalize": _cmd_normalize, "convert": _cmd_convert,
             "enumerate": _cmd_enumerate, "trees": _cmd_trees, "check": _cmd_check}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except (TalforgeError, OSError) as exc:
        print(f"talforge: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
