"""Proof search and proof checking.

Four rules.  Wait: from a stable formula, with one premise for every operand
of every surface choice conjunction and one premise per surface choice-all
quantifier (its body on a fresh variable).  Choose-disjunct: replace a
surface choice disjunction by one operand.  Choose-term: replace a surface
choice-ex quantifier by its body on a chosen term.  Match: replace one
positive and one negative surface occurrence of a general letter by a fresh
elementary letter.  The cl3 logic drops match and requires general-free
goals.

Search runs in two passes over the same rule order: a memoized verdict pass,
then proof construction that takes the first rule the verdict pass accepts.
The proof that comes out is exactly the one a naive first-success
depth-first search over the rule order would find.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .elementary import is_stable
from .formula import (
    Atom, ChoAll, ChoAnd, ChoEx, ChoOr, Constant, Formula, FormulaError,
    GENERAL, ELEMENTARY, LetterId, ParAnd, ParOr, Path, Term, Variable,
    bound_variables, constants, free_variables, has_choice, has_general,
    is_letter_name, is_variable_name, letter_names, parse_formula,
    render_formula, replace_at, resolve_path, subformulas, substitute_var,
    surface_general_atoms, surface_occurrences, validate_formula,
)


class ProverError(Exception):
    pass


class MoveError(ProverError):
    """A rule application that the current formula does not admit."""


class GoalError(ProverError):
    """Goal outside the logic (cl3 with general letters)."""


class DepthLimitError(ProverError):
    pass


class ProofFormatError(ProverError):
    """Proof JSON that does not follow the documented shape."""


class Logic(str, Enum):
    CL4 = "cl4"
    CL3 = "cl3"


class TermPool(str, Enum):
    OCCURRING = "occurring"
    OCCURRING_PLUS_FRESH = "occurring-plus-fresh"
    OCCURRING_PLUS_TWO_FRESH = "occurring-plus-two-fresh"


@dataclass(frozen=True, slots=True)
class Wait:
    pass


WAIT = Wait()


@dataclass(frozen=True, slots=True)
class ChooseDisjunct:
    path: Path
    index: int


@dataclass(frozen=True, slots=True)
class ChooseTerm:
    path: Path
    term: Term


@dataclass(frozen=True, slots=True)
class MatchPair:
    pos_path: Path
    neg_path: Path
    fresh: LetterId


Move = Union[ChooseDisjunct, ChooseTerm, MatchPair]


@dataclass(frozen=True)
class ProofNode:
    conclusion: Formula
    rule: Union[Wait, Move]
    premises: tuple["ProofNode", ...] = ()


@dataclass(frozen=True)
class ProverConfig:
    logic: Logic = Logic.CL4
    term_pool: TermPool = TermPool.OCCURRING_PLUS_FRESH
    memoization: bool = True
    depth_limit: Optional[int] = None


@dataclass
class SearchStats:
    states: int = 0
    shortcut_states: int = 0
    max_depth: int = 0


# ---------------------------------------------------------------------------
# measure and fresh names

def measure(f: Formula) -> int:
    """Choice operators plus general-atom occurrences; every rule strictly
    lowers it, so it bounds the proof height."""
    n = 0
    for _, node in subformulas(f):
        if isinstance(node, (ChoAnd, ChoOr, ChoAll, ChoEx)):
            n += 1
        elif isinstance(node, Atom) and node.letter.sort == GENERAL:
            n += 1
    return n


def fresh_wait_variable(f: Formula) -> str:
    used = free_variables(f) | bound_variables(f)
    k = 0
    while f"w{k}" in used:
        k += 1
    return f"w{k}"


def fresh_match_letter(f: Formula, letter: LetterId) -> LetterId:
    """Deterministic fresh elementary letter for matching `letter`: the
    lowercased name (guarded against the variable lexeme class and reserved
    words) with the first unused numeric suffix."""
    base = letter.name.lower()
    if not is_letter_name(base):
        base += "q"
    used = letter_names(f)
    k = 0
    while f"{base}{k}" in used:
        k += 1
    return LetterId(ELEMENTARY, f"{base}{k}", letter.arity)


# ---------------------------------------------------------------------------
# rule machinery

def wait_premises(f: Formula) -> list[Formula]:
    """Premises the wait rule requires for f, deduplicated, in pre-order of
    the surface choice occurrences they resolve."""
    prems: list[Formula] = []
    seen: set[str] = set()

    def add(g: Formula) -> None:
        key = render_formula(g)
        if key not in seen:
            seen.add(key)
            prems.append(g)

    for path, node in surface_occurrences(f, (ChoAnd, ChoAll)):
        if isinstance(node, ChoAnd):
            for op in node.operands:
                add(replace_at(f, path, op))
        else:
            w = Variable(fresh_wait_variable(f))
            add(replace_at(f, path, substitute_var(node.body, node.var, w)))
    return prems


def _resolve_surface(f: Formula, path: Path) -> Formula:
    node = f
    for i in path:
        if not isinstance(node, (ParAnd, ParOr)):
            raise MoveError(f"path {list(path)} is not a surface occurrence")
        if not 0 <= i < len(node.operands):
            raise MoveError(f"path {list(path)} does not address a subformula")
        node = node.operands[i]
    return node


def apply_move(f: Formula, move: Move) -> Formula:
    """Result of a single move on f; raises MoveError when inapplicable."""
    if isinstance(move, ChooseDisjunct):
        node = _resolve_surface(f, move.path)
        if not isinstance(node, ChoOr):
            raise MoveError(f"no surface choice disjunction at path {list(move.path)}")
        if not 0 <= move.index < len(node.operands):
            raise MoveError(f"disjunct index {move.index} out of range")
        return replace_at(f, move.path, node.operands[move.index])

    if isinstance(move, ChooseTerm):
        node = _resolve_surface(f, move.path)
        if not isinstance(node, ChoEx):
            raise MoveError(f"no surface choice-ex quantifier at path {list(move.path)}")
        t = move.term
        if isinstance(t, Constant):
            if t.value < 0:
                raise MoveError(f"term {t.value} is not a natural number")
        elif isinstance(t, Variable):
            if t.name in bound_variables(f):
                raise MoveError(f"term variable {t.name} occurs bound in the formula")
        else:
            raise MoveError(f"bad term {t!r}")
        return replace_at(f, move.path, substitute_var(node.body, node.var, t))

    if isinstance(move, MatchPair):
        pos = _resolve_surface(f, move.pos_path)
        neg = _resolve_surface(f, move.neg_path)
        for occ, want_neg, which in ((pos, False, "positive"), (neg, True, "negative")):
            if not isinstance(occ, Atom) or occ.letter.sort != GENERAL:
                raise MoveError(f"{which} path does not address a general atom")
            if occ.negated != want_neg:
                raise MoveError(f"{which} occurrence has the wrong polarity")
        if pos.letter.name != neg.letter.name or pos.letter.arity != neg.letter.arity:
            raise MoveError("matched occurrences use different letters")
        fresh = move.fresh
        if fresh.sort != ELEMENTARY or not is_letter_name(fresh.name) \
                or fresh.name[:1].isupper():
            raise MoveError(f"fresh letter {fresh.name!r} is not elementary")
        if fresh.arity != pos.letter.arity:
            raise MoveError(f"fresh letter arity {fresh.arity} does not fit")
        if fresh.name in letter_names(f):
            raise MoveError(f"fresh letter {fresh.name} already occurs")
        g = replace_at(f, move.pos_path, Atom(fresh, pos.args, False))
        return replace_at(g, move.neg_path, Atom(fresh, neg.args, True))

    raise MoveError(f"not a move: {move!r}")


def term_pool(f: Formula, pool: TermPool) -> list[Term]:
    """Candidate terms for choose-term: occurring constants in ascending
    order, then free variables, then the configured fresh constants."""
    consts = sorted(constants(f))
    out: list[Term] = [Constant(c) for c in consts]
    out.extend(Variable(v) for v in sorted(free_variables(f), key=_var_key))
    extra = 0
    if pool == TermPool.OCCURRING_PLUS_FRESH:
        extra = 1
    elif pool == TermPool.OCCURRING_PLUS_TWO_FRESH:
        extra = 2
    have = set(consts)
    c = 0
    while extra:
        if c not in have:
            out.append(Constant(c))
            have.add(c)
            extra -= 1
        c += 1
    return out


def _var_key(name: str) -> tuple[str, int]:
    head = name[0]
    return (head, int(name[1:]) if len(name) > 1 else -1)


def enumerate_moves(f: Formula, config: ProverConfig) -> list[Move]:
    """All applicable moves in the search order: choose-disjunct by
    occurrence then index, choose-term by occurrence then pool order, then
    (cl4 only) match by letter first-occurrence order and occurrence pairs."""
    moves: list[Move] = []
    for path, node in surface_occurrences(f, ChoOr):
        moves.extend(ChooseDisjunct(path, i) for i in range(len(node.operands)))
    exs = surface_occurrences(f, ChoEx)
    if exs:
        pool = term_pool(f, config.term_pool)
        for path, _ in exs:
            moves.extend(ChooseTerm(path, t) for t in pool)
    if config.logic is Logic.CL4:
        pos: dict[str, list[Path]] = {}
        neg: dict[str, list[Path]] = {}
        order: list[LetterId] = []
        seen: set[str] = set()
        for path, a in surface_general_atoms(f):
            if a.letter.name not in seen:
                seen.add(a.letter.name)
                order.append(a.letter)
            (neg if a.negated else pos).setdefault(a.letter.name, []).append(path)
        for letter in order:
            pp = pos.get(letter.name, [])
            np = neg.get(letter.name, [])
            if pp and np:
                fresh = fresh_match_letter(f, letter)
                moves.extend(MatchPair(p, n, fresh) for p in pp for n in np)
    return moves


# ---------------------------------------------------------------------------
# search

def first_match_move(f: Formula) -> Optional[MatchPair]:
    """The canonical next match: the first letter (in surface occurrence
    order) with both polarities present, pairing its first positive and
    first negative occurrence.  None when nothing is matchable."""
    pos: dict[str, Path] = {}
    neg: dict[str, Path] = {}
    order: list[LetterId] = []
    for path, a in surface_general_atoms(f):
        if a.letter.name not in pos and a.letter.name not in neg:
            order.append(a.letter)
        (neg if a.negated else pos).setdefault(a.letter.name, path)
    target = next((L for L in order if L.name in pos and L.name in neg), None)
    if target is None:
        return None
    return MatchPair(pos[target.name], neg[target.name],
                     fresh_match_letter(f, target))


def _match_all(f: Formula) -> Formula:
    move = first_match_move(f)
    while move is not None:
        f = apply_move(f, move)
        move = first_match_move(f)
    return f


def _forced_match_move(f: Formula) -> Optional[MatchPair]:
    """A match both of whose atoms are their letter's only occurrences in f.

    Matching such a pair right away never loses a proof: the two atoms sit
    outside every choice scope, so waiting and choosing leave them alone and
    commute with the match, no other partner for either atom can ever
    appear, and the elementarization only gains truth at the two spots.
    Taking the step eagerly collapses the exponential family of match
    orderings the plain search would wade through.
    """
    total: dict[str, int] = {}
    for _, node in subformulas(f):
        if isinstance(node, Atom) and node.letter.sort == GENERAL:
            total[node.letter.name] = total.get(node.letter.name, 0) + 1
    pos: dict[str, Path] = {}
    neg: dict[str, Path] = {}
    order: list[LetterId] = []
    seen: set[str] = set()
    for path, a in surface_general_atoms(f):
        if a.letter.name not in seen:
            seen.add(a.letter.name)
            order.append(a.letter)
        (neg if a.negated else pos).setdefault(a.letter.name, path)
    for letter in order:
        if total[letter.name] == 2 and letter.name in pos and letter.name in neg:
            return MatchPair(pos[letter.name], neg[letter.name],
                             fresh_match_letter(f, letter))
    return None


class _Search:
    def __init__(self, goal: Formula, config: ProverConfig):
        self.config = config
        self.limit = config.depth_limit if config.depth_limit is not None \
            else measure(goal) + 1
        self.memo: dict[str, bool] = {}
        self.stable_memo: dict[str, bool] = {}
        self.stats = SearchStats()

    def _stable(self, f: Formula, key: str) -> bool:
        v = self.stable_memo.get(key)
        if v is None:
            v = is_stable(f)
            self.stable_memo[key] = v
        return v

    def decide(self, f: Formula, depth: int) -> bool:
        if depth > self.limit:
            raise DepthLimitError(f"proof search exceeded depth limit {self.limit}")
        if depth > self.stats.max_depth:
            self.stats.max_depth = depth
        key = render_formula(f)
        if self.config.memoization and key in self.memo:
            return self.memo[key]
        verdict = self._decide_state(f, key, depth)
        if self.config.memoization:
            self.memo[key] = verdict
        return verdict

    def _decide_state(self, f: Formula, key: str, depth: int) -> bool:
        self.stats.states += 1
        if not has_choice(f):
            known, verdict = self._choiceless_verdict(f, key)
            if known:
                self.stats.shortcut_states += 1
                return verdict
        if self.config.logic is Logic.CL4:
            forced = _forced_match_move(f)
            if forced is not None:
                return self.decide(apply_move(f, forced), depth + 1)
        if self._stable(f, key) and \
                all(self.decide(p, depth + 1) for p in wait_premises(f)):
            return True
        return any(self.decide(apply_move(f, m), depth + 1)
                   for m in enumerate_moves(f, self.config))

    def _choiceless_verdict(self, f: Formula, key: str) -> tuple[bool, bool]:
        # A choiceless formula whose general letters each have at most one
        # occurrence per polarity is provable exactly when matching every
        # positive/negative pair leaves a stable formula: every position is
        # monotone, so skipping or reordering matches can only lose.  Without
        # the match rule the verdict is plain stability.
        if self.config.logic is Logic.CL3:
            return True, self._stable(f, key)
        counts: dict[tuple[str, bool], int] = {}
        for _, a in surface_general_atoms(f):
            k = (a.letter.name, a.negated)
            counts[k] = counts.get(k, 0) + 1
            if counts[k] > 1:
                return False, False
        return True, is_stable(_match_all(f))

    def build(self, f: Formula, depth: int) -> ProofNode:
        key = render_formula(f)
        if self._stable(f, key):
            prems = wait_premises(f)
            if all(self.decide(p, depth + 1) for p in prems):
                return ProofNode(f, WAIT,
                                 tuple(self.build(p, depth + 1) for p in prems))
        for m in enumerate_moves(f, self.config):
            g = apply_move(f, m)
            if self.decide(g, depth + 1):
                return ProofNode(f, m, (self.build(g, depth + 1),))
        raise ProverError("build reached a state the verdict pass rejected")


def prove_with_stats(f: Formula, config: Optional[ProverConfig] = None
                     ) -> tuple[Optional[ProofNode], SearchStats]:
    config = config or ProverConfig()
    validate_formula(f)
    if config.logic is Logic.CL3 and has_general(f):
        raise GoalError("cl3 goals must not contain general letters")
    search = _Search(f, config)
    if not search.decide(f, 1):
        return None, search.stats
    proof = search.build(f, 1)
    return proof, search.stats


def prove(f: Formula, config: Optional[ProverConfig] = None) -> Optional[ProofNode]:
    return prove_with_stats(f, config)[0]


# ---------------------------------------------------------------------------
# proof checking

@dataclass
class CheckResult:
    ok: bool
    diagnostics: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def check_proof(root: ProofNode, config: Optional[ProverConfig] = None) -> CheckResult:
    """Re-derive every node of the proof; diagnostics name each violation by
    its position in the proof tree."""
    config = config or ProverConfig()
    diags: list[str] = []

    def visit(node: ProofNode, where: str) -> None:
        f = node.conclusion
        try:
            validate_formula(f)
        except FormulaError as e:
            diags.append(f"{where}: bad conclusion: {e}")
            return
        if config.logic is Logic.CL3 and has_general(f):
            diags.append(f"{where}: general letter in a cl3 proof")
        rule = node.rule
        if isinstance(rule, Wait):
            if not is_stable(f):
                diags.append(f"{where}: wait rule on an unstable conclusion")
            want = sorted(render_formula(p) for p in wait_premises(f))
            got = sorted(render_formula(p.conclusion) for p in node.premises)
            if want != got:
                diags.append(f"{where}: wait premises do not match the required set")
        elif isinstance(rule, (ChooseDisjunct, ChooseTerm, MatchPair)):
            if isinstance(rule, MatchPair) and config.logic is Logic.CL3:
                diags.append(f"{where}: match rule is not available in cl3")
            if len(node.premises) != 1:
                diags.append(f"{where}: a move rule takes exactly one premise")
            else:
                try:
                    g = apply_move(f, rule)
                    if g != node.premises[0].conclusion:
                        diags.append(f"{where}: premise differs from the move result")
                except (MoveError, FormulaError) as e:
                    diags.append(f"{where}: {e}")
        else:
            diags.append(f"{where}: unknown rule {rule!r}")
        for i, p in enumerate(node.premises):
            visit(p, f"{where}.{i}")

    visit(root, "root")
    return CheckResult(not diags, diags)


# ---------------------------------------------------------------------------
# proof JSON

def _term_to_json(t: Term):
    return t.value if isinstance(t, Constant) else t.name


def _term_from_json(v) -> Term:
    if isinstance(v, bool):
        raise ProofFormatError(f"bad term {v!r}")
    if isinstance(v, int):
        if v < 0:
            raise ProofFormatError(f"bad term {v!r}")
        return Constant(v)
    if isinstance(v, str) and is_variable_name(v):
        return Variable(v)
    raise ProofFormatError(f"bad term {v!r}")


def _path_from_json(v, field_name: str) -> Path:
    if not isinstance(v, list) or \
            not all(isinstance(i, int) and not isinstance(i, bool) and i >= 0 for i in v):
        raise ProofFormatError(f"{field_name} must be a list of child indices")
    return tuple(v)


def proof_to_dict(node: ProofNode) -> dict:
    d: dict = {"formula": render_formula(node.conclusion)}
    rule = node.rule
    if isinstance(rule, Wait):
        d["rule"] = "wait"
    elif isinstance(rule, ChooseDisjunct):
        d["rule"] = "choose-disjunct"
        d["path"] = list(rule.path)
        d["index"] = rule.index
    elif isinstance(rule, ChooseTerm):
        d["rule"] = "choose-term"
        d["path"] = list(rule.path)
        d["term"] = _term_to_json(rule.term)
    elif isinstance(rule, MatchPair):
        d["rule"] = "match"
        d["posPath"] = list(rule.pos_path)
        d["negPath"] = list(rule.neg_path)
        d["fresh"] = {"name": rule.fresh.name, "arity": rule.fresh.arity}
    else:
        raise ProofFormatError(f"unknown rule {rule!r}")
    d["premises"] = [proof_to_dict(p) for p in node.premises]
    return d


_RULE_KEYS = {
    "wait": set(),
    "choose-disjunct": {"path", "index"},
    "choose-term": {"path", "term"},
    "match": {"posPath", "negPath", "fresh"},
}


def proof_from_dict(d) -> ProofNode:
    if not isinstance(d, dict):
        raise ProofFormatError("proof node must be an object")
    missing = {"formula", "rule", "premises"} - d.keys()
    if missing:
        raise ProofFormatError(f"proof node is missing {sorted(missing)}")
    rule_name = d["rule"]
    if rule_name not in _RULE_KEYS:
        raise ProofFormatError(f"unknown rule {rule_name!r}")
    allowed = {"formula", "rule", "premises"} | _RULE_KEYS[rule_name]
    extra = d.keys() - allowed
    if extra:
        raise ProofFormatError(f"unexpected keys {sorted(extra)} on a {rule_name} node")
    lost = _RULE_KEYS[rule_name] - d.keys()
    if lost:
        raise ProofFormatError(f"{rule_name} node is missing {sorted(lost)}")
    if not isinstance(d["formula"], str):
        raise ProofFormatError("formula must be a string")
    try:
        f = parse_formula(d["formula"])
    except FormulaError as e:
        raise ProofFormatError(f"bad formula: {e}") from None

    if rule_name == "wait":
        rule: Union[Wait, Move] = WAIT
    elif rule_name == "choose-disjunct":
        if not isinstance(d["index"], int) or isinstance(d["index"], bool):
            raise ProofFormatError("index must be an integer")
        rule = ChooseDisjunct(_path_from_json(d["path"], "path"), d["index"])
    elif rule_name == "choose-term":
        rule = ChooseTerm(_path_from_json(d["path"], "path"),
                          _term_from_json(d["term"]))
    else:
        fr = d["fresh"]
        if not isinstance(fr, dict) or set(fr) != {"name", "arity"} \
                or not isinstance(fr.get("name"), str) \
                or not isinstance(fr.get("arity"), int) or isinstance(fr.get("arity"), bool) \
                or fr["arity"] < 0:
            raise ProofFormatError("fresh must be {name, arity}")
        rule = MatchPair(_path_from_json(d["posPath"], "posPath"),
                         _path_from_json(d["negPath"], "negPath"),
                         LetterId(ELEMENTARY, fr["name"], fr["arity"]))
    if not isinstance(d["premises"], list):
        raise ProofFormatError("premises must be a list")
    return ProofNode(f, rule, tuple(proof_from_dict(p) for p in d["premises"]))


def proof_to_json(node: ProofNode) -> str:
    return json.dumps(proof_to_dict(node), ensure_ascii=False, indent=2)


def proof_from_json(text: str) -> ProofNode:
    try:
        data = json.loads(text)
    except ValueError as e:
        raise ProofFormatError(f"not valid JSON: {e}") from None
    return proof_from_dict(data)
