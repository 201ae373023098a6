"""Formula language for the choice-connective fragment.

Atoms come in two sorts, elementary (lowercase letters) and general
(uppercase letters), applied to terms.  Negation is only ever attached to
atoms.  Above the literals sit the parallel connectives /\\ and \\/, the
choice connectives cand and cor, and the choice quantifiers call x: and
cex x:.  A subformula occurrence is "surface" when the path to it passes
through parallel connectives only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union


class FormulaError(Exception):
    """Malformed formula (bad letter, arity clash, variable misuse...)."""


class ParseError(FormulaError):
    """Syntax error; message carries a character position."""


class PathError(FormulaError):
    """A path does not address a node of the required kind."""


class SubstitutionError(FormulaError):
    """Substitution would touch or capture a bound variable."""


ELEMENTARY = "elementary"
GENERAL = "general"

Path = tuple[int, ...]

_VAR_RE = re.compile(r"[xyzuvw][0-9]*\Z")
_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_KEYWORDS = frozenset({"call", "cex", "cand", "cor", "T", "F"})


def is_variable_name(name: str) -> bool:
    return bool(_VAR_RE.match(name))


def is_letter_name(name: str) -> bool:
    """Valid predicate-letter name: identifier, not a variable, not reserved."""
    return bool(_NAME_RE.match(name)) and not is_variable_name(name) and name not in _KEYWORDS


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Constant:
    value: int

    def __str__(self) -> str:
        return str(self.value)


Term = Union[Variable, Constant]


@dataclass(frozen=True, slots=True)
class LetterId:
    sort: str  # ELEMENTARY or GENERAL
    name: str
    arity: int

    @staticmethod
    def from_name(name: str, arity: int) -> "LetterId":
        sort = GENERAL if name[:1].isupper() else ELEMENTARY
        return LetterId(sort, name, arity)


class Formula:
    """Base class; all nodes are immutable and compare structurally."""

    __slots__ = ()

    def __str__(self) -> str:
        return render_formula(self)

    def __repr__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True, slots=True, repr=False)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True, repr=False)
class Bot(Formula):
    pass


@dataclass(frozen=True, slots=True, repr=False)
class Atom(Formula):
    letter: LetterId
    args: tuple[Term, ...] = ()
    negated: bool = False


@dataclass(frozen=True, slots=True, repr=False)
class ParAnd(Formula):
    operands: tuple[Formula, ...]


@dataclass(frozen=True, slots=True, repr=False)
class ParOr(Formula):
    operands: tuple[Formula, ...]


@dataclass(frozen=True, slots=True, repr=False)
class ChoAnd(Formula):
    operands: tuple[Formula, ...]


@dataclass(frozen=True, slots=True, repr=False)
class ChoOr(Formula):
    operands: tuple[Formula, ...]


@dataclass(frozen=True, slots=True, repr=False)
class ChoAll(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, slots=True, repr=False)
class ChoEx(Formula):
    var: str
    body: Formula


TOP = Top()
BOT = Bot()

_NARY = (ParAnd, ParOr, ChoAnd, ChoOr)
_QUANT = (ChoAll, ChoEx)
_PARALLEL = (ParAnd, ParOr)
_CHOICE = (ChoAnd, ChoOr, ChoAll, ChoEx)


# ---------------------------------------------------------------------------
# structure walking

def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, _NARY):
        return f.operands
    if isinstance(f, _QUANT):
        return (f.body,)
    return ()


def with_children(f: Formula, new: tuple[Formula, ...]) -> Formula:
    if isinstance(f, _NARY):
        return type(f)(new)
    if isinstance(f, _QUANT):
        (body,) = new
        return type(f)(f.var, body)
    if new:
        raise PathError("leaf node has no children")
    return f


def subformulas(f: Formula) -> Iterator[tuple[Path, Formula]]:
    """All subformula occurrences, pre-order, with their paths."""
    stack = [((), f)]
    while stack:
        path, node = stack.pop()
        yield path, node
        kids = children(node)
        for i in range(len(kids) - 1, -1, -1):
            stack.append((path + (i,), kids[i]))


def resolve_path(f: Formula, path: Path) -> Formula:
    node = f
    for i in path:
        kids = children(node)
        if not 0 <= i < len(kids):
            raise PathError(f"path {list(path)} does not address a subformula")
        node = kids[i]
    return node


def replace_at(f: Formula, path: Path, sub: Formula) -> Formula:
    if not path:
        return sub
    kids = children(f)
    i = path[0]
    if not 0 <= i < len(kids):
        raise PathError(f"path {list(path)} does not address a subformula")
    new = kids[:i] + (replace_at(kids[i], path[1:], sub),) + kids[i + 1:]
    return with_children(f, new)


def surface_occurrences(f: Formula, types=None) -> list[tuple[Path, Formula]]:
    """Surface occurrences, pre-order.

    types, when given, is a class or tuple of classes to filter by.  Only
    parallel connectives are descended through: anything under a choice
    operator is not surface.
    """
    out = []

    def walk(node, path):
        if types is None or isinstance(node, types):
            out.append((path, node))
        if isinstance(node, _PARALLEL):
            for i, kid in enumerate(node.operands):
                walk(kid, path + (i,))

    walk(f, ())
    return out


def surface_general_atoms(f: Formula) -> list[tuple[Path, Atom]]:
    return [(p, n) for p, n in surface_occurrences(f, Atom)
            if n.letter.sort == GENERAL]


# ---------------------------------------------------------------------------
# queries

def free_variables(f: Formula) -> set[str]:
    free: set[str] = set()

    def walk(node, bound):
        if isinstance(node, Atom):
            for t in node.args:
                if isinstance(t, Variable) and t.name not in bound:
                    free.add(t.name)
        elif isinstance(node, _QUANT):
            walk(node.body, bound | {node.var})
        else:
            for kid in children(node):
                walk(kid, bound)

    walk(f, frozenset())
    return free


def bound_variables(f: Formula) -> set[str]:
    return {n.var for _, n in subformulas(f) if isinstance(n, _QUANT)}


def constants(f: Formula) -> set[int]:
    out: set[int] = set()
    for _, n in subformulas(f):
        if isinstance(n, Atom):
            out.update(t.value for t in n.args if isinstance(t, Constant))
    return out


def letter_table(f: Formula) -> dict[tuple[str, str], int]:
    """Map (sort, name) -> arity for every letter occurring in f."""
    table: dict[tuple[str, str], int] = {}
    for _, n in subformulas(f):
        if isinstance(n, Atom):
            key = (n.letter.sort, n.letter.name)
            prev = table.setdefault(key, n.letter.arity)
            if prev != n.letter.arity:
                raise FormulaError(
                    f"letter {n.letter.name} used with arities {prev} and {n.letter.arity}")
    return table


def letter_names(f: Formula) -> set[str]:
    return {name for _, name in letter_table(f)}


def has_choice(f: Formula) -> bool:
    return any(isinstance(n, _CHOICE) for _, n in subformulas(f))


def has_general(f: Formula) -> bool:
    return any(isinstance(n, Atom) and n.letter.sort == GENERAL
               for _, n in subformulas(f))


def is_elementary(f: Formula) -> bool:
    """No choice operators and no general letters anywhere."""
    return not has_choice(f) and not has_general(f)


# ---------------------------------------------------------------------------
# substitution

def substitute_var(f: Formula, var: str, term: Term) -> Formula:
    """Replace every free occurrence of var by term.

    Raises SubstitutionError if var is bound somewhere in f, or if term is a
    variable that is bound somewhere in f (which would capture it).
    """
    bound = bound_variables(f)
    if var in bound:
        raise SubstitutionError(f"variable {var} is bound in the formula")
    if isinstance(term, Variable) and term.name in bound:
        raise SubstitutionError(f"term variable {term.name} is bound in the formula")

    def walk(node):
        if isinstance(node, Atom):
            if not any(isinstance(t, Variable) and t.name == var for t in node.args):
                return node
            args = tuple(term if isinstance(t, Variable) and t.name == var else t
                         for t in node.args)
            return Atom(node.letter, args, node.negated)
        kids = children(node)
        if not kids:
            return node
        return with_children(node, tuple(walk(k) for k in kids))

    return walk(f)


# ---------------------------------------------------------------------------
# validation

def validate_formula(f: Formula) -> None:
    """Check the structural invariants; raise FormulaError on the first hit.

    Letters must have well-formed names whose case agrees with their sort and
    a consistent arity.  Constants are naturals.  N-ary connectives have at
    least two operands.  No variable is bound twice or both free and bound.
    """
    binders: list[str] = []

    def walk(node, bound):
        if isinstance(node, (Top, Bot)):
            return
        if isinstance(node, Atom):
            lid = node.letter
            if not is_letter_name(lid.name):
                raise FormulaError(f"invalid letter name {lid.name!r}")
            expected = GENERAL if lid.name[:1].isupper() else ELEMENTARY
            if lid.sort != expected:
                raise FormulaError(f"letter {lid.name} has sort {lid.sort}")
            if lid.arity != len(node.args):
                raise FormulaError(f"letter {lid.name} arity {lid.arity} != {len(node.args)} args")
            for t in node.args:
                if isinstance(t, Constant):
                    if t.value < 0:
                        raise FormulaError(f"constant {t.value} is not a natural number")
                elif isinstance(t, Variable):
                    if not is_variable_name(t.name):
                        raise FormulaError(f"invalid variable name {t.name!r}")
                else:
                    raise FormulaError(f"bad term {t!r}")
            return
        if isinstance(node, _NARY):
            if len(node.operands) < 2:
                raise FormulaError(f"{type(node).__name__} needs at least two operands")
            for kid in node.operands:
                walk(kid, bound)
            return
        if isinstance(node, _QUANT):
            if not is_variable_name(node.var):
                raise FormulaError(f"invalid variable name {node.var!r}")
            if node.var in binders:
                raise FormulaError(f"variable {node.var} is bound twice")
            binders.append(node.var)
            walk(node.body, bound | {node.var})
            return
        raise FormulaError(f"not a formula node: {node!r}")

    walk(f, frozenset())
    letter_table(f)  # arity consistency across occurrences
    clash = free_variables(f) & bound_variables(f)
    if clash:
        raise FormulaError(f"variable {sorted(clash)[0]} is both free and bound")


# ---------------------------------------------------------------------------
# rendering

_PAR_SEPS = {ParAnd: " /\\ ", ParOr: " \\/ ", ChoAnd: " cand ", ChoOr: " cor "}
_QUANT_KW = {ChoAll: "call", ChoEx: "cex"}


def render_formula(f: Formula) -> str:
    """Canonical ASCII text; parse_formula is its inverse."""
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Bot):
        return "F"
    if isinstance(f, Atom):
        s = f.letter.name
        if f.args:
            s += "(" + ", ".join(str(t) for t in f.args) + ")"
        return ("~" if f.negated else "") + s
    if isinstance(f, _NARY):
        sep = _PAR_SEPS[type(f)]
        return sep.join(_render_operand(o) for o in f.operands)
    if isinstance(f, _QUANT):
        return f"{_QUANT_KW[type(f)]} {f.var}: {render_formula(f.body)}"
    raise FormulaError(f"not a formula node: {f!r}")


def _render_operand(f: Formula) -> str:
    # compound operands are parenthesized so chains never re-associate and a
    # quantifier body never swallows the rest of the chain
    if isinstance(f, _NARY + _QUANT):
        return "(" + render_formula(f) + ")"
    return render_formula(f)


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<paror>\\/|∨)
      | (?P<parand>/\\|∧)
      | (?P<choor>⊔)
      | (?P<choand>⊓)
      | (?P<top>⊤)
      | (?P<bot>⊥)
      | (?P<tilde>~|¬)
      | (?P<lpar>\()
      | (?P<rpar>\))
      | (?P<colon>:)
      | (?P<comma>,)
      | (?P<nat>[0-9]+)
      | (?P<word>[A-Za-z][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

_WORD_TOKENS = {"cand": "choand", "cor": "choor", "call": "call", "cex": "cex",
                "T": "top", "F": "bot"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} at position {pos}")
        kind = m.lastgroup
        value = m.group()
        if kind == "word":
            kind = _WORD_TOKENS.get(value, "var" if is_variable_name(value) else "letter")
        if kind != "ws":
            tokens.append((kind, value, pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0) -> tuple[str, str, int]:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def take(self, kind: str) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        if tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1] or 'end of input'!r} "
                             f"at position {tok[2]}")
        self.i += 1
        return tok

    def formula(self) -> Formula:
        return self.disjunction()

    def disjunction(self) -> Formula:
        first = self.conjunction()
        kind = self.peek()[0]
        if kind not in ("paror", "choor"):
            return first
        ops = [first]
        while True:
            nxt = self.peek()[0]
            if nxt == kind:
                self.i += 1
                ops.append(self.conjunction())
            elif nxt in ("paror", "choor"):
                tok = self.peek()
                raise ParseError(f"cannot mix {tok[1]!r} into this chain without "
                                 f"parentheses at position {tok[2]}")
            else:
                break
        cls = ParOr if kind == "paror" else ChoOr
        return cls(tuple(ops))

    def conjunction(self) -> Formula:
        first = self.unit()
        kind = self.peek()[0]
        if kind not in ("parand", "choand"):
            return first
        ops = [first]
        while True:
            nxt = self.peek()[0]
            if nxt == kind:
                self.i += 1
                ops.append(self.unit())
            elif nxt in ("parand", "choand"):
                tok = self.peek()
                raise ParseError(f"cannot mix {tok[1]!r} into this chain without "
                                 f"parentheses at position {tok[2]}")
            else:
                break
        cls = ParAnd if kind == "parand" else ChoAnd
        return cls(tuple(ops))

    def unit(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "top":
            self.i += 1
            return TOP
        if kind == "bot":
            self.i += 1
            return BOT
        if kind == "tilde":
            self.i += 1
            k2, v2, p2 = self.peek()
            if k2 != "letter":
                raise ParseError(f"negation applies only to atoms at position {p2}")
            return self.atom(negated=True)
        if kind == "lpar":
            self.i += 1
            f = self.formula()
            self.take("rpar")
            return f
        if kind in ("call", "cex"):
            self.i += 1
            return self.quantifier_tail(ChoAll if kind == "call" else ChoEx)
        if kind in ("choand", "choor") and self.peek(1)[0] == "var" \
                and self.peek(2)[0] == "colon":
            self.i += 1
            return self.quantifier_tail(ChoAll if kind == "choand" else ChoEx)
        if kind == "letter":
            return self.atom(negated=False)
        if kind == "var":
            raise ParseError(f"variable {value!r} cannot be used as an atom "
                             f"at position {pos}")
        raise ParseError(f"expected a formula, found {value or 'end of input'!r} "
                         f"at position {pos}")

    def quantifier_tail(self, cls) -> Formula:
        var = self.take("var")[1]
        self.take("colon")
        body = self.formula()  # extends as far right as possible
        return cls(var, body)

    def atom(self, negated: bool) -> Formula:
        name = self.take("letter")[1]
        args: list[Term] = []
        if self.peek()[0] == "lpar":
            self.i += 1
            args.append(self.term())
            while self.peek()[0] == "comma":
                self.i += 1
                args.append(self.term())
            self.take("rpar")
        return Atom(LetterId.from_name(name, len(args)), tuple(args), negated)

    def term(self) -> Term:
        kind, value, pos = self.peek()
        if kind == "var":
            self.i += 1
            return Variable(value)
        if kind == "nat":
            if len(value) > 1 and value[0] == "0":
                raise ParseError(f"leading zero in constant at position {pos}")
            self.i += 1
            return Constant(int(value))
        raise ParseError(f"expected a term, found {value or 'end of input'!r} "
                         f"at position {pos}")


def parse_formula(text: str) -> Formula:
    """Parse the ASCII/Unicode surface syntax into a validated formula."""
    p = _Parser(text)
    f = p.formula()
    p.take("eof")
    validate_formula(f)
    return f
