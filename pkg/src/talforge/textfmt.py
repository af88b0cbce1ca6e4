"""Reading and writing the line-based ``.tal`` workbench format.

A file is a sequence of blocks::

    # comment
    import "other.tal" ;
    system ldcfg G1 {
      l1: S -> A ^S D ;
      l4: A -> "a" ;
      l3: S -> eps ;
      start S ;
    }
    system twolevel W { controller G2 ; controllee G1 ; }

Terminal symbols (and controller labels, which are the controller's
terminals) are double-quoted; every other symbol is a bare name.  Alphabets
are inferred from the rules; declarations such as ``terminals "a" "b" ;``
add symbols that no rule mentions.  :func:`render` always writes the full
declarations, so reading its output back gives the same systems.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Optional

from .cf import Cfg, Pda, PdaTransition, Production
from .control import LdCfg, LdPda, LdPdaTransition, LdProduction, TwoLevel, ld_validate
from .epda import Epda, EpdaTransition
from .lig import Lig, LigNt, LigProduction
from .paa import Paa, PaaNode, PaaTransition
from .symbols import EPS, TalforgeError, ValidationError
from .tag import FOOT, SUBST, Tag, TagProduction, TagTree

KINDS = ("cfg", "pda", "ldcfg", "ldpda", "tag", "lig", "epda", "paa", "twolevel")
ELLIPSIS = ".."


class FormatError(TalforgeError):
    """A syntax or validation error tied to a place in the input."""

    def __init__(self, message: str, line: int, col: int, source: str = "<text>"):
        self.line, self.col, self.source = line, col, source
        super().__init__(f"{source}:{line}:{col}: {message}")


# ===================================================================== tokens

@dataclass(frozen=True)
class Token:
    kind: str  # "name", "string", "punct" or "end"
    value: str
    line: int
    col: int


_NAME = r"(?:[^\s;,()\[\]{}@\"^*!:#\-]|-(?!>))+"
_TOKEN = re.compile(rf"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*|//[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>->|[;,()\[\]{{}}@^*!:])
  | (?P<name>{_NAME})
""", re.VERBOSE)


def tokenize(text: str, source: str = "<text>") -> tuple[list[Token], list[tuple[int, str]]]:
    """Tokens plus the comments (line, text) found along the way."""
    tokens: list[Token] = []
    comments: list[tuple[int, str]] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise FormatError(f"unexpected character {text[pos]!r}", line, col, source)
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "comment":
            comments.append((line, value))
        elif kind == "string":
            tokens.append(Token("string", _unquote(value), line, col))
        elif kind != "ws":
            tokens.append(Token(kind, value, line, col))
        pos = m.end()
    tokens.append(Token("end", "", line, pos - line_start + 1))
    return tokens, comments


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


_NAME_RE = re.compile(_NAME)
_RESERVED = {"eps", ELLIPSIS}


def _name(s: str) -> str:
    if not _NAME_RE.fullmatch(s) or s in _RESERVED:
        raise TalforgeError(f"symbol {s!r} cannot be written as a bare name")
    return s


# ===================================================================== file model

@dataclass
class WorkbenchFile:
    """Named systems in declaration order."""

    systems: dict = field(default_factory=dict)  # name -> system
    kinds: dict = field(default_factory=dict)  # name -> kind keyword
    links: dict = field(default_factory=dict)  # two-level name -> (controller name, controllee name)
    imports: list = field(default_factory=list)
    comments: list = field(default_factory=list, compare=False)

    def __getitem__(self, name: str):
        try:
            return self.systems[name]
        except KeyError:
            raise TalforgeError(f"no system named {name!r}") from None

    def names(self) -> list[str]:
        return list(self.systems)


# ===================================================================== parser

_DECLS = {"nonterminals", "terminals", "labels", "states", "stack", "variables", "constants"}
_HEADS = {"start", "initial", "final", "controller", "controllee"} | _DECLS


class _Parser:
    def __init__(self, text: str, source: str, base_dir: Optional[str], seen: frozenset):
        self.tokens, comments = tokenize(text, source)
        self.i = 0
        self.source = source
        self.base_dir = base_dir
        self.seen = seen
        self.out = WorkbenchFile(comments=comments)

    # ---------------------------------------------------------------- helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def fail(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise FormatError(msg, tok.line, tok.col, self.source)

    def at(self, value: str) -> bool:
        return self.tok.kind == "punct" and self.tok.value == value

    def expect(self, value: str) -> Token:
        if not self.at(value):
            self.fail(f"expected {value!r}, found {self.tok.value or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def name(self, what: str = "a name") -> str:
        t = self.tok
        if t.kind != "name" or t.value in _RESERVED:
            self.fail(f"expected {what}, found {t.value or 'end of input'!r}")
        self.i += 1
        return t.value

    def string(self) -> str:
        if self.tok.kind != "string":
            self.fail(f"expected a quoted symbol, found {self.tok.value or 'end of input'!r}")
        v = self.tok.value
        self.i += 1
        return v

    def is_eps(self) -> bool:
        return self.tok.kind == "name" and self.tok.value == "eps"

    def scan(self) -> str:
        """``"a"`` or ``eps`` after an ``@``."""
        if self.is_eps():
            self.i += 1
            return EPS
        return self.string()

    def stack(self) -> tuple[tuple[str, ...], bool]:
        """``[ A B .. ]``: symbols and whether the ellipsis closes it."""
        self.expect("[")
        syms: list[str] = []
        dots = False
        while not self.at("]"):
            if self.tok.kind == "name" and self.tok.value == ELLIPSIS:
                if dots:
                    self.fail("'..' twice in one stack")
                dots = True
                self.i += 1
                continue
            if dots:
                self.fail("'..' must close the stack")
            syms.append(self.name("a stack symbol"))
        self.expect("]")
        return tuple(syms), dots

    # ---------------------------------------------------------------- file level
    def parse(self) -> WorkbenchFile:
        while self.tok.kind != "end":
            t = self.tok
            if t.kind == "name" and t.value == "import":
                self.i += 1
                path = self.string()
                self.expect(";")
                self.do_import(path, t)
            elif t.kind == "name" and t.value == "system":
                self.i += 1
                self.system(t)
            else:
                self.fail(f"expected 'system' or 'import', found {t.value!r}")
        return self.out

    def do_import(self, path: str, tok: Token) -> None:
        self.out.imports.append(path)
        if self.base_dir is None:
            self.fail("imports need a file on disk to resolve against", tok)
        full = os.path.normpath(os.path.join(self.base_dir, path))
        if full in self.seen:
            self.fail(f"import cycle through {path!r}", tok)
        try:
            with open(full, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            self.fail(f"cannot read {path!r}: {exc.strerror}", tok)
        sub = _Parser(text, full, os.path.dirname(full), self.seen | {full}).parse()
        for name, sys in sub.systems.items():
            self.add(name, sub.kinds[name], sys, tok)
        self.out.links.update(sub.links)

    def add(self, name: str, kind: str, sys, tok: Token) -> None:
        if name in self.out.systems:
            self.fail(f"duplicate system name {name!r}", tok)
        self.out.systems[name] = sys
        self.out.kinds[name] = kind

    def system(self, head: Token) -> None:
        kind_tok = self.tok
        kind = self.name("a system kind")
        if kind not in KINDS:
            self.fail(f"unknown system kind {kind!r}; expected one of {', '.join(KINDS)}", kind_tok)
        name_tok = self.tok
        name = self.name("a system name")
        self.expect("{")
        block = _Block(kind)
        while not self.at("}"):
            if self.tok.kind == "end":
                self.fail(f"system {name!r} is not closed")
            self.statement(block)
        self.expect("}")
        try:
            sys = self.build(block, name_tok)
        except ValidationError as exc:
            tok = name_tok
            # point at the first rule a problem names, if any
            for msg in exc.violations:
                m = re.search(r"(?:production|transition|rules?) (\d+)", msg)
                if m and int(m.group(1)) < len(block.rules):
                    tok = block.rules[int(m.group(1))][1]
                    break
            raise FormatError(f"system {name!r} is invalid: {exc}", tok.line, tok.col, self.source) from exc
        except FormatError:
            raise
        except TalforgeError as exc:
            raise FormatError(f"system {name!r}: {exc}", name_tok.line, name_tok.col, self.source) from exc
        self.add(name, kind, sys, name_tok)

    # ---------------------------------------------------------------- statements
    def statement(self, b: "_Block") -> None:
        t = self.tok
        nxt = self.peek()
        if t.kind == "name" and t.value in _HEADS and (nxt.kind in ("name", "string") or
                                                         (nxt.kind == "punct" and nxt.value == ";")):
            self.i += 1
            self.head_statement(t, b)
            return
        start = self.tok
        label = None
        if b.kind in ("ldcfg", "ldpda"):
            label = self.name("a rule label")
            self.expect(":")
        rule = getattr(self, "rule_" + b.kind, None)
        if rule is None:
            self.fail(f"a {b.kind} block holds only 'controller' and 'controllee' lines")
        item = rule(label)
        self.expect(";")
        b.rules.append((item, start))

    def head_statement(self, t: Token, b: "_Block") -> None:
        key = t.value
        if key in _DECLS:
            while not self.at(";"):
                if self.tok.kind == "string":
                    b.decl.setdefault(key, []).append(self.string())
                else:
                    b.decl.setdefault(key, []).append(self.name())
            self.expect(";")
            return
        if key in b.heads:
            self.fail(f"{key!r} given twice", t)
        if key in ("controller", "controllee"):
            b.heads[key] = (self.name("a system name"), t)
        elif key == "start":
            sym = self.name("a start symbol")
            if b.kind == "lig":
                st, dots = self.stack()
                if dots or len(st) != 1:
                    self.fail("a LIG start is written 'start S [ Z ] ;'", t)
                b.heads[key] = ((sym, st[0]), t)
            else:
                b.heads[key] = (sym, t)
        else:
            state = self.name("a state")
            st, dots = self.stack()
            if dots:
                self.fail("'..' is not allowed here", t)
            if key == "initial" and len(st) != 1:
                self.fail("the initial stack holds exactly one symbol", t)
            if key == "final" and st:
                self.fail("acceptance is by empty stack: write 'final q [] ;'", t)
            b.heads[key] = ((state, st[0] if st else None), t)
        self.expect(";")

    def symbols(self, allow_marks: bool) -> tuple[list, list[int], list[bool]]:
        """Right-hand side items up to ``;``/``@``: names, quoted terminals, ``^`` marks, ``eps``."""
        items: list = []
        marks: list[int] = []
        quoted: list[bool] = []
        if self.is_eps():
            self.i += 1
            return items, marks, quoted
        while not (self.at(";") or self.at("@")):
            if self.at("^"):
                caret = self.expect("^")
                if not allow_marks:
                    self.fail("distinguished symbols only appear in ldcfg and ldpda rules", caret)
                if marks:
                    self.fail("at most one distinguished symbol per rule", caret)
                marks.append(len(items))
            if self.tok.kind == "string":
                items.append(self.string())
                quoted.append(True)
            else:
                items.append(self.name("a symbol"))
                quoted.append(False)
        return items, marks, quoted

    def rule_cfg(self, _label):
        lhs = self.name("a nonterminal")
        self.expect("->")
        items, _, quoted = self.symbols(False)
        return lhs, tuple(items), quoted

    def rule_ldcfg(self, label):
        lhs = self.name("a nonterminal")
        self.expect("->")
        items, marks, quoted = self.symbols(True)
        return label, lhs, tuple(items), tuple(marks), quoted

    def _pda_core(self, allow_marks: bool):
        src = self.name("a state")
        self.expect(",")
        pop = self.name("a stack symbol")
        self.expect("->")
        tgt = self.name("a state")
        self.expect(",")
        at = self.tok
        items, marks, quoted = self.symbols(allow_marks)
        if any(quoted):
            self.fail("pushed stack symbols are bare names", at)
        self.expect("@")
        scan = self.scan()
        return src, pop, tgt, tuple(items), tuple(marks), scan

    def rule_pda(self, _label):
        src, pop, tgt, push, _, scan = self._pda_core(False)
        return src, pop, scan, tgt, push

    def rule_ldpda(self, label):
        src, pop, tgt, push, marks, scan = self._pda_core(True)
        return label, src, pop, scan, tgt, push, marks

    def rule_lig(self, _label):
        lhs = self.name("a nonterminal")
        at = self.tok
        pop, dots = self.stack()
        if len(pop) != 1:
            self.fail("the left side pops exactly one stack symbol", at)
        self.expect("->")
        rhs: list = []
        heir = None
        if self.is_eps():
            self.i += 1
        else:
            while not self.at(";"):
                if self.tok.kind == "string":
                    rhs.append(self.string())
                    continue
                sym_tok = self.tok
                sym = self.name("a nonterminal")
                st, d = self.stack()
                if d:
                    if heir is not None:
                        self.fail("only one nonterminal inherits the stack", sym_tok)
                    heir = len(rhs)
                rhs.append(LigNt(sym, st))
        if dots and heir is None:
            self.fail("a production popping 'A ..' needs a stack-inheriting nonterminal 'Y [ .. ]'", at)
        if not dots and heir is not None:
            self.fail("a lexical production pops a whole one-symbol stack '[ A ]'", at)
        return LigProduction(lhs, pop[0], tuple(rhs), heir)

    def rule_epda(self, _label):
        src = self.name("a state")
        self.expect(",")
        at = self.tok
        pop, dots = self.stack()
        if len(pop) != 1:
            self.fail("the left side pops exactly one stack symbol", at)
        self.expect("->")
        tgt = self.name("a state")
        self.expect(",")
        if self.is_eps():
            self.i += 1
            if dots:
                self.fail("only '[ A ]' can be popped as a whole stack", at)
            self.expect("@")
            return EpdaTransition(src, pop[0], self.scan(), tgt, None)
        if not dots:
            self.fail("a transition keeping the inner stack pops '[ A .. ]'", at)
        above: list = []
        below: list = []
        push = None
        while self.at("["):
            st_tok = self.tok
            st, d = self.stack()
            if d:
                if push is not None:
                    self.fail("only one inner stack continues the popped one", st_tok)
                push = st
            elif push is None:
                above.append(st)
            else:
                below.append(st)
        if push is None:
            self.fail("one inserted stack must end in '..'")
        self.expect("@")
        return EpdaTransition(src, pop[0], self.scan(), tgt, push, tuple(above), tuple(below))

    def tag_tree(self) -> TagTree:
        if self.tok.kind == "string":
            return TagTree(self.string())
        if self.is_eps():
            self.i += 1
            return TagTree(EPS)
        sym = self.name("a tree node")
        if self.at("*"):
            self.i += 1
            return TagTree(sym, (), FOOT)
        if self.at("!"):
            self.i += 1
            return TagTree(sym, (), SUBST)
        if not self.at("("):
            self.fail("a leaf must be a terminal, eps, a foot 'X*' or a substitution leaf 'Y!'")
        self.expect("(")
        kids = [self.tag_tree()]
        while self.at(","):
            self.i += 1
            kids.append(self.tag_tree())
        self.expect(")")
        return TagTree(sym, tuple(kids))

    def rule_tag(self, _label):
        lhs = self.name("a variable")
        self.expect("->")
        return TagProduction(lhs, self.tag_tree())

    def paa_nodes(self, closer: str) -> tuple:
        if self.is_eps():
            self.i += 1
            return ()
        nodes = [self.paa_node()]
        while self.at(","):
            self.i += 1
            nodes.append(self.paa_node())
        if not self.at(closer):
            self.fail(f"expected ',' or {closer!r}")
        return tuple(nodes)

    def paa_node(self) -> PaaNode:
        sym = self.name("a stack symbol")
        if self.at("*"):
            self.i += 1
            return PaaNode(sym, (), True)
        if self.at("("):
            self.i += 1
            kids = self.paa_nodes(")")
            self.expect(")")
            return PaaNode(sym, kids)
        return PaaNode(sym)

    def rule_paa(self, _label):
        lhs = self.name("a variable")
        self.expect("->")
        rho = self.paa_nodes("@")
        self.expect("@")
        return PaaTransition(lhs, self.scan(), rho)

    # ---------------------------------------------------------------- building
    def build(self, b: "_Block", name_tok: Token):
        return getattr(self, "build_" + b.kind)(b, name_tok)

    def need(self, b: "_Block", key: str, name_tok: Token):
        if key not in b.heads:
            self.fail(f"missing '{key}' line", name_tok)
        return b.heads[key][0]

    def _start_or_first(self, b: "_Block", name_tok: Token, first_lhs):
        if "start" in b.heads:
            return b.heads["start"][0]
        if first_lhs is None:
            self.fail("missing 'start' line", name_tok)
        return first_lhs

    def build_cfg(self, b, name_tok):
        nts = set(b.decl.get("nonterminals", ()))
        terms = set(b.decl.get("terminals", ()))
        prods = []
        for (lhs, rhs, quoted), _ in b.rules:
            nts.add(lhs)
            for s, q in zip(rhs, quoted):
                (terms if q else nts).add(s)
            prods.append(Production(lhs, rhs))
        start = self._start_or_first(b, name_tok, prods[0].lhs if prods else None)
        nts.add(start)
        return Cfg(nts, terms, tuple(prods), start)

    def build_ldcfg(self, b, name_tok):
        nts = set(b.decl.get("nonterminals", ()))
        terms = set(b.decl.get("terminals", ()))
        labels = set(b.decl.get("labels", ()))
        prods = []
        for (label, lhs, rhs, marks, quoted), tok in b.rules:
            nts.add(lhs)
            labels.add(label)
            for s, q in zip(rhs, quoted):
                (terms if q else nts).add(s)
            prods.append(LdProduction(label, lhs, rhs, marks))
        start = self._start_or_first(b, name_tok, prods[0].lhs if prods else None)
        nts.add(start)
        return self._ld_checked(LdCfg(nts, terms, labels, tuple(prods), start), b)

    def _automaton_heads(self, b, name_tok):
        q0, start_sym = self.need(b, "initial", name_tok)
        qf, _ = self.need(b, "final", name_tok)
        states = set(b.decl.get("states", ())) | {q0, qf}
        stack = set(b.decl.get("stack", ())) | {start_sym}
        terms = set(b.decl.get("terminals", ()))
        return q0, start_sym, qf, states, stack, terms

    def build_pda(self, b, name_tok):
        q0, start_sym, qf, states, stack, terms = self._automaton_heads(b, name_tok)
        trans = []
        for (src, pop, scan, tgt, push), _ in b.rules:
            states |= {src, tgt}
            stack |= {pop, *push}
            if scan:
                terms.add(scan)
            trans.append(PdaTransition(src, pop, scan, tgt, push))
        return Pda(states, terms, stack, tuple(trans), q0, start_sym, qf)

    def build_ldpda(self, b, name_tok):
        q0, start_sym, qf, states, stack, terms = self._automaton_heads(b, name_tok)
        labels = set(b.decl.get("labels", ()))
        trans = []
        for (label, src, pop, scan, tgt, push, marks), _ in b.rules:
            states |= {src, tgt}
            stack |= {pop, *push}
            labels.add(label)
            if scan:
                terms.add(scan)
            trans.append(LdPdaTransition(label, src, pop, scan, tgt, push, marks))
        return self._ld_checked(LdPda(states, terms, stack, labels, tuple(trans), q0, start_sym, qf), b)

    def _ld_checked(self, sys, b):
        return ld_validate(sys)

    def build_lig(self, b, name_tok):
        start, bottom_sym = self.need(b, "start", name_tok)
        nts = set(b.decl.get("nonterminals", ())) | {start}
        terms = set(b.decl.get("terminals", ()))
        stack = set(b.decl.get("stack", ())) | {bottom_sym}
        prods = []
        for p, _ in b.rules:
            nts.add(p.lhs)
            stack.add(p.pop)
            for item in p.rhs:
                if isinstance(item, str):
                    terms.add(item)
                else:
                    nts.add(item.symbol)
                    stack.update(item.stack)
            prods.append(p)
        return Lig(nts, terms, stack, tuple(prods), start, bottom_sym)

    def build_epda(self, b, name_tok):
        q0, start_sym, qf, states, stack, terms = self._automaton_heads(b, name_tok)
        trans = []
        for t, _ in b.rules:
            states |= {t.source, t.target}
            stack |= {t.pop, *(t.push or ())}
            for st in t.above + t.below:
                stack.update(st)
            if t.scan:
                terms.add(t.scan)
            trans.append(t)
        return Epda(states, terms, stack, tuple(trans), q0, start_sym, qf)

    def build_tag(self, b, name_tok):
        consts = set(b.decl.get("constants", ()))
        variables = set(b.decl.get("variables", ()))
        terms = set(b.decl.get("terminals", ()))
        prods = []
        for p, _ in b.rules:
            variables.add(p.lhs)
            for n in p.rhs.preorder():
                if n.children or n.mark:
                    if n.symbol not in consts:
                        variables.add(n.symbol)
                elif n.symbol:
                    terms.add(n.symbol)
            prods.append(p)
        start = self._start_or_first(b, name_tok, prods[0].lhs if prods else None)
        variables.add(start)
        return Tag(variables, consts, terms, tuple(prods), start)

    def build_paa(self, b, name_tok):
        consts = set(b.decl.get("constants", ()))
        variables = set(b.decl.get("variables", ()))
        terms = set(b.decl.get("terminals", ()))
        trans = []
        for t, _ in b.rules:
            variables.add(t.lhs)
            stack = list(t.rho)
            while stack:
                n = stack.pop()
                if n.symbol not in consts:
                    variables.add(n.symbol)
                stack.extend(n.children)
            if t.scan:
                terms.add(t.scan)
            trans.append(t)
        start = self._start_or_first(b, name_tok, trans[0].lhs if trans else None)
        variables.add(start)
        return Paa(variables, consts, terms, tuple(trans), start)

    def build_twolevel(self, b, name_tok):
        refs = []
        for key in ("controller", "controllee"):
            ref, tok = b.heads.get(key, (None, name_tok))
            if ref is None:
                self.fail(f"missing '{key}' line", name_tok)
            if ref not in self.out.systems:
                self.fail(f"{key} {ref!r} is not declared before this system", tok)
            refs.append(ref)
        sys = TwoLevel(self.out.systems[refs[0]], self.out.systems[refs[1]])
        self.out.links[name_tok.value] = tuple(refs)
        return sys


@dataclass
class _Block:
    kind: str
    decl: dict = field(default_factory=dict)
    heads: dict = field(default_factory=dict)
    rules: list = field(default_factory=list)


def parse_file(text: str, source: str = "<text>", base_dir: Optional[str] = None) -> WorkbenchFile:
    """Parse workbench text.  ``import`` lines resolve against ``base_dir``."""
    return _Parser(text, source, base_dir, frozenset()).parse()


def load_file(path: str) -> WorkbenchFile:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    full = os.path.abspath(path)
    return _Parser(text, path, os.path.dirname(full), frozenset({os.path.normpath(full)})).parse()


# ===================================================================== rendering

def _decl(key: str, syms, quoted: bool = False) -> list[str]:
    if not syms:
        return []
    body = " ".join(_quote(s) if quoted else _name(s) for s in sorted(syms))
    return [f"  {key} {body} ;"]


def _rhs(items, marks=(), quoted=None) -> str:
    if not items:
        return "eps"
    out = []
    for i, s in enumerate(items):
        text = _quote(s) if quoted is not None and quoted(s) else _name(s)
        out.append(("^" if i in marks else "") + text)
    return " ".join(out)


def _scan(s: str) -> str:
    return _quote(s) if s else "eps"


def _stack(syms, dots: bool = False) -> str:
    body = [_name(s) for s in syms] + ([ELLIPSIS] if dots else [])
    return "[ " + " ".join(body) + " ]" if body else "[ ]"


def _tag_tree(t: TagTree) -> str:
    if t.mark == FOOT:
        return _name(t.symbol) + "*"
    if t.mark == SUBST:
        return _name(t.symbol) + "!"
    if not t.children:
        return _scan(t.symbol)
    return f"{_name(t.symbol)}( {' , '.join(_tag_tree(c) for c in t.children)} )"


def _paa_node(n: PaaNode) -> str:
    if n.foot:
        return _name(n.symbol) + "*"
    if n.children:
        return f"{_name(n.symbol)}( {' , '.join(_paa_node(c) for c in n.children)} )"
    return _name(n.symbol)


def _paa_rho(rho) -> str:
    return " , ".join(_paa_node(n) for n in rho) if rho else "eps"


def kind_name(sys) -> str:
    for kind, cls in (("cfg", Cfg), ("pda", Pda), ("ldcfg", LdCfg), ("ldpda", LdPda), ("tag", Tag),
                      ("lig", Lig), ("epda", Epda), ("paa", Paa), ("twolevel", TwoLevel)):
        if isinstance(sys, cls):
            return kind
    raise TalforgeError(f"cannot render a {type(sys).__name__}")


def render_system(name: str, sys, links: Optional[tuple] = None) -> str:
    """Text of one system block.

    A two-level system needs the names of its parts; without ``links`` the
    parts are written first as ``<name>_controller`` and ``<name>_controllee``.
    """
    kind = kind_name(sys)
    if kind == "twolevel":
        if links is None:
            links = (f"{name}_controller", f"{name}_controllee")
            head = render_system(links[0], sys.controller) + "\n" + render_system(links[1], sys.controllee) + "\n"
        else:
            head = ""
        return (head + f"system twolevel {_name(name)} {{\n  controller {_name(links[0])} ;\n"
                f"  controllee {_name(links[1])} ;\n}}\n")
    lines = [f"system {kind} {_name(name)} {{"]
    lines += _BODY[kind](sys)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _body_cfg(g: Cfg) -> list[str]:
    lines = _decl("nonterminals", g.nonterminals) + _decl("terminals", g.terminals, True)
    lines.append(f"  start {_name(g.start)} ;")
    lines += [f"  {_name(p.lhs)} -> {_rhs(p.rhs, (), lambda s: s in g.terminals)} ;" for p in g.productions]
    return lines


def _body_ldcfg(g: LdCfg) -> list[str]:
    lines = (_decl("nonterminals", g.nonterminals) + _decl("terminals", g.terminals, True)
             + _decl("labels", g.labels))
    lines.append(f"  start {_name(g.start)} ;")
    lines += [f"  {_name(p.label)}: {_name(p.lhs)} -> {_rhs(p.rhs, p.marks, lambda s: s in g.terminals)} ;"
              for p in g.productions]
    return lines


def _automaton_head(m, labels=None) -> list[str]:
    lines = (_decl("states", m.states) + _decl("stack", m.stack_alphabet)
             + _decl("terminals", m.input_alphabet, True))
    if labels is not None:
        lines += _decl("labels", labels)
    lines.append(f"  initial {_name(m.initial_state)} {_stack([m.start_symbol])} ;")
    lines.append(f"  final {_name(m.final_state)} [ ] ;")
    return lines


def _body_pda(p: Pda) -> list[str]:
    return _automaton_head(p) + [
        f"  {_name(t.source)} , {_name(t.pop)} -> {_name(t.target)} , {_rhs(t.push)} @ {_scan(t.scan)} ;"
        for t in p.transitions]


def _body_ldpda(p: LdPda) -> list[str]:
    return _automaton_head(p, p.labels) + [
        f"  {_name(t.label)}: {_name(t.source)} , {_name(t.pop)} -> {_name(t.target)} , "
        f"{_rhs(t.push, t.marks)} @ {_scan(t.scan)} ;" for t in p.transitions]


def _body_lig(g: Lig) -> list[str]:
    lines = (_decl("nonterminals", g.nonterminals) + _decl("terminals", g.terminals, True)
             + _decl("stack", g.stack_alphabet))
    lines.append(f"  start {_name(g.start)} {_stack([g.start_stack])} ;")
    for p in g.productions:
        parts = []
        for i, item in enumerate(p.rhs):
            if isinstance(item, str):
                parts.append(_quote(item))
            else:
                parts.append(f"{_name(item.symbol)} {_stack(item.stack, i == p.heir)}")
        lines.append(f"  {_name(p.lhs)} {_stack([p.pop], not p.lexical)} -> {' '.join(parts) or 'eps'} ;")
    return lines


def _body_epda(e: Epda) -> list[str]:
    lines = _automaton_head(e)
    for t in e.transitions:
        if t.push is None:
            lines.append(f"  {_name(t.source)} , {_stack([t.pop])} -> {_name(t.target)} , eps @ {_scan(t.scan)} ;")
            continue
        stacks = [_stack(s) for s in t.above] + [_stack(t.push, True)] + [_stack(s) for s in t.below]
        lines.append(f"  {_name(t.source)} , {_stack([t.pop], True)} -> {_name(t.target)} , "
                     f"{' '.join(stacks)} @ {_scan(t.scan)} ;")
    return lines


def _body_tag(g: Tag) -> list[str]:
    lines = (_decl("variables", g.variables) + _decl("constants", g.constants)
             + _decl("terminals", g.terminals, True))
    lines.append(f"  start {_name(g.start)} ;")
    lines += [f"  {_name(p.lhs)} -> {_tag_tree(p.rhs)} ;" for p in g.productions]
    return lines


def _body_paa(m: Paa) -> list[str]:
    lines = (_decl("variables", m.variables) + _decl("constants", m.constants)
             + _decl("terminals", m.terminals, True))
    lines.append(f"  start {_name(m.start)} ;")
    lines += [f"  {_name(t.lhs)} -> {_paa_rho(t.rho)} @ {_scan(t.scan)} ;" for t in m.transitions]
    return lines


_BODY = {"cfg": _body_cfg, "ldcfg": _body_ldcfg, "pda": _body_pda, "ldpda": _body_ldpda,
         "lig": _body_lig, "epda": _body_epda, "tag": _body_tag, "paa": _body_paa}


def render(wb: WorkbenchFile) -> str:
    """Text for every system in ``wb``; imported systems are written inline."""
    blocks = []
    for name, sys in wb.systems.items():
        blocks.append(render_system(name, sys, wb.links.get(name)))
    return "\n".join(blocks)
