"""Bridging strategy trees and proofs of reduced sentences.

Every state a proof of a reduced sentence passes through has a rigid shape:
a stack of elementary wrappers  q(c) \\/ (~q(c) /\\ _)  left behind by
earlier matches, around a core that is either the next choice-ex
quantifier, a universal gadget before or after its wait split, a general
pair ready to match, or the quantifier-free endgame.  The converters walk
that shape.  Odd levels of a strategy tree line up with term choices, even
levels with a wait split followed by the committed term choice and the
gadget match; the endgame matches every surviving literal pair and waits.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .elementary import is_stable
from .formula import (
    Atom, ChoAnd, ChoEx, Constant, ELEMENTARY, Formula, GENERAL, LetterId,
    ParAnd, ParOr, Path, Variable, is_elementary, render_formula,
)
from .prover import (
    ChooseTerm, MatchPair, ProofNode, WAIT, Wait, apply_move, check_proof,
    first_match_move, fresh_match_letter, wait_premises,
)
from .qbf import Qbf, StrategyNode, check_strategy_tree
from .reduction import reduce_to_cl4


class BridgeError(Exception):
    pass


class ShapeClass(Enum):
    EXISTS_CHOICE = "exists-choice"
    FORALL_GADGET = "forall-gadget"
    PICKED_GADGET = "picked-gadget"
    MATCH_PENDING = "match-pending"
    ELEMENTARY_LEAF = "elementary-leaf"
    OTHER = "other"


@dataclass(frozen=True)
class LevelLabel:
    """A strategy-tree level, optionally tagged with the stage an even level
    is in: t after the wait split, m after the committed choice, b after the
    gadget match."""
    number: int
    sub: Optional[str] = None

    def __post_init__(self):
        if self.number < 1:
            raise ValueError("levels start at 1")
        if self.sub not in (None, "t", "m", "b"):
            raise ValueError(f"bad level stage {self.sub!r}")
        if self.sub is not None and self.number % 2 == 1:
            raise ValueError("staged labels belong to even levels")

    def __str__(self) -> str:
        return f"{self.number}{self.sub or ''}"


@dataclass(frozen=True)
class _Shape:
    cls: ShapeClass
    quant_path: Optional[Path] = None
    cho_path: Optional[Path] = None
    pos_path: Optional[Path] = None
    neg_path: Optional[Path] = None
    letter: Optional[LetterId] = None
    const: Optional[int] = None


def _wrapper_step(f: Formula, sort: str):
    """Match  X(c) \\/ (~X(c) /\\ theta)  with X of the given sort and c a
    binary constant; return (letter, c, theta) or None."""
    if not (isinstance(f, ParOr) and len(f.operands) == 2):
        return None
    head, rest = f.operands
    if not (isinstance(head, Atom) and not head.negated
            and head.letter.sort == sort and len(head.args) == 1
            and isinstance(head.args[0], Constant) and head.args[0].value in (0, 1)):
        return None
    if not (isinstance(rest, ParAnd) and len(rest.operands) == 2):
        return None
    dual, theta = rest.operands
    if not (isinstance(dual, Atom) and dual.negated
            and dual.letter == head.letter and dual.args == head.args):
        return None
    return head.letter, head.args[0].value, theta


def _quant_tail(f: Formula, letter: LetterId):
    """Match  cex y: (~G(y) /\\ theta)  for the given gadget letter."""
    if not isinstance(f, ChoEx):
        return None
    body = f.body
    if not (isinstance(body, ParAnd) and len(body.operands) == 2):
        return None
    dual, _ = body.operands
    if not (isinstance(dual, Atom) and dual.negated and dual.letter == letter
            and dual.args == (Variable(f.var),)):
        return None
    return f


def _gadget_step(f: Formula):
    if not (isinstance(f, ParOr) and len(f.operands) == 2):
        return None
    cho, tail = f.operands
    if not (isinstance(cho, ChoAnd) and len(cho.operands) == 2):
        return None
    lo, hi = cho.operands
    if not (isinstance(lo, Atom) and not lo.negated and lo.letter.sort == GENERAL
            and lo.args == (Constant(0),)):
        return None
    if not (isinstance(hi, Atom) and not hi.negated and hi.letter == lo.letter
            and hi.args == (Constant(1),)):
        return None
    if _quant_tail(tail, lo.letter) is None:
        return None
    return lo.letter


def _picked_step(f: Formula):
    if not (isinstance(f, ParOr) and len(f.operands) == 2):
        return None
    head, tail = f.operands
    if not (isinstance(head, Atom) and not head.negated
            and head.letter.sort == GENERAL and len(head.args) == 1
            and isinstance(head.args[0], Constant) and head.args[0].value in (0, 1)):
        return None
    if _quant_tail(tail, head.letter) is None:
        return None
    return head.letter, head.args[0].value


def _analyze(f: Formula) -> _Shape:
    path: Path = ()
    cur = f
    while True:
        step = _wrapper_step(cur, ELEMENTARY)
        if step is None:
            break
        path += (1, 1)
        cur = step[2]
    if isinstance(cur, ChoEx):
        return _Shape(ShapeClass.EXISTS_CHOICE, quant_path=path)
    pend = _wrapper_step(cur, GENERAL)
    if pend is not None:
        return _Shape(ShapeClass.MATCH_PENDING,
                      pos_path=path + (0,), neg_path=path + (1, 0),
                      letter=pend[0], const=pend[1])
    gad = _gadget_step(cur)
    if gad is not None:
        return _Shape(ShapeClass.FORALL_GADGET, quant_path=path + (1,),
                      cho_path=path + (0,), letter=gad)
    pick = _picked_step(cur)
    if pick is not None:
        return _Shape(ShapeClass.PICKED_GADGET, quant_path=path + (1,),
                      letter=pick[0], const=pick[1])
    if is_elementary(cur):
        return _Shape(ShapeClass.ELEMENTARY_LEAF)
    return _Shape(ShapeClass.OTHER)


def classify_shape(f: Formula) -> ShapeClass:
    return _analyze(f).cls


# ---------------------------------------------------------------------------
# strategy tree -> proof

def strategy_to_proof(q: Qbf, tree: StrategyNode) -> ProofNode:
    """Turn a winning strategy tree into a proof of the cl4 image."""
    f = reduce_to_cl4(q)
    res = check_strategy_tree(q, tree)
    if not res:
        raise BridgeError(f"strategy tree is not winning: {res.diagnostics[0]}")
    return _from_tree(f, tree, LevelLabel(1))


def _from_tree(f: Formula, dnode: StrategyNode, level: LevelLabel) -> ProofNode:
    shape = _analyze(f)
    if shape.cls is not ShapeClass.EXISTS_CHOICE:
        raise BridgeError(f"level {level}: expected a choice quantifier, "
                          f"found {shape.cls.value}")
    move = ChooseTerm(shape.quant_path, Constant(dnode.label))
    g = apply_move(f, move)
    if dnode.children:
        inner = _split_gadget(g, dnode, LevelLabel(level.number + 1, "t"))
    else:
        inner = _endgame(g)
    return ProofNode(f, move, (inner,))


def _split_gadget(f: Formula, dnode: StrategyNode, level: LevelLabel) -> ProofNode:
    shape = _analyze(f)
    if shape.cls is not ShapeClass.FORALL_GADGET:
        raise BridgeError(f"level {level}: expected a universal gadget, "
                          f"found {shape.cls.value}")
    if not is_stable(f):
        raise BridgeError(f"level {level}: gadget state is unstable")
    prems = wait_premises(f)
    kids = tuple(_commit_bit(prems[a], dnode.children[a], level)
                 for a in (0, 1))
    return ProofNode(f, WAIT, kids)


def _commit_bit(f: Formula, enode: StrategyNode, level: LevelLabel) -> ProofNode:
    shape = _analyze(f)
    if shape.cls is not ShapeClass.PICKED_GADGET or shape.const != enode.label:
        raise BridgeError(f"level {LevelLabel(level.number, 'm')}: branch does "
                          f"not commit the universal bit {enode.label}")
    move = ChooseTerm(shape.quant_path, Constant(shape.const))
    g = apply_move(f, move)
    mshape = _analyze(g)
    if mshape.cls is not ShapeClass.MATCH_PENDING:
        raise BridgeError(f"level {LevelLabel(level.number, 'b')}: committed "
                          f"gadget did not leave a matchable pair")
    mmove = MatchPair(mshape.pos_path, mshape.neg_path,
                      fresh_match_letter(g, mshape.letter))
    h = apply_move(g, mmove)
    inner = _from_tree(h, enode.children[0], LevelLabel(level.number + 1))
    return ProofNode(f, move, (ProofNode(g, mmove, (inner,)),))


def _endgame(f: Formula) -> ProofNode:
    move = first_match_move(f)
    if move is not None:
        return ProofNode(f, move, (_endgame(apply_move(f, move)),))
    if not is_stable(f):
        raise BridgeError(f"endgame state is unstable: {render_formula(f)}")
    return ProofNode(f, WAIT, ())


# ---------------------------------------------------------------------------
# proof -> strategy tree

def proof_to_strategy(q: Qbf, proof: ProofNode) -> StrategyNode:
    """Read the verifier's strategy off a canonical proof of the cl4 image."""
    f = reduce_to_cl4(q)
    if proof.conclusion != f:
        raise BridgeError("proof does not conclude the sentence's cl4 image")
    res = check_proof(proof)
    if not res:
        raise BridgeError(f"proof does not check: {res.diagnostics[0]}")
    return _read(proof, LevelLabel(1))


def _read(node: ProofNode, level: LevelLabel) -> StrategyNode:
    f = node.conclusion
    shape = _analyze(f)
    if shape.cls is not ShapeClass.EXISTS_CHOICE:
        raise BridgeError(f"level {level}: expected a choice quantifier, "
                          f"found {shape.cls.value}")
    rule = node.rule
    if not (isinstance(rule, ChooseTerm) and rule.path == shape.quant_path
            and isinstance(rule.term, Constant) and rule.term.value in (0, 1)):
        raise BridgeError(f"level {level}: proof is not canonical: expected a "
                          f"binary term choice")
    label = rule.term.value
    child = node.premises[0]
    cshape = _analyze(child.conclusion)
    if cshape.cls is ShapeClass.FORALL_GADGET:
        glevel = LevelLabel(level.number + 1, "t")
        if not isinstance(child.rule, Wait) or len(child.premises) != 2:
            raise BridgeError(f"level {glevel}: proof is not canonical: "
                              f"expected a two-premise wait")
        want = [render_formula(p) for p in wait_premises(child.conclusion)]
        got = [render_formula(p.conclusion) for p in child.premises]
        if want != got:
            raise BridgeError(f"level {glevel}: proof is not canonical: wait "
                              f"premises out of order")
        kids = tuple(
            StrategyNode(a, (_read_commit(child.premises[a], a, glevel),))
            for a in (0, 1))
        return StrategyNode(label, kids)
    # endgame: every surviving pair is matched in canonical order, then wait
    cur = child
    while isinstance(cur.rule, MatchPair):
        if cur.rule != first_match_move(cur.conclusion):
            raise BridgeError("endgame is not canonical: unexpected match")
        cur = cur.premises[0]
    if not isinstance(cur.rule, Wait) or cur.premises:
        raise BridgeError("endgame is not canonical: expected a closing wait")
    if first_match_move(cur.conclusion) is not None:
        raise BridgeError("endgame is not canonical: a matchable pair is left")
    return StrategyNode(label)


def _read_commit(node: ProofNode, bit: int, level: LevelLabel) -> StrategyNode:
    shape = _analyze(node.conclusion)
    if shape.cls is not ShapeClass.PICKED_GADGET or shape.const != bit:
        raise BridgeError(f"level {level}: wait premise is not the {bit} branch")
    mlevel = LevelLabel(level.number, "m")
    rule = node.rule
    if not (isinstance(rule, ChooseTerm) and rule.path == shape.quant_path
            and rule.term == Constant(bit)):
        raise BridgeError(f"level {mlevel}: proof is not canonical: the branch "
                          f"must commit the universal bit {bit}")
    mid = node.premises[0]
    mshape = _analyze(mid.conclusion)
    if mshape.cls is not ShapeClass.MATCH_PENDING:
        raise BridgeError(f"level {mlevel}: committed gadget did not leave a "
                          f"matchable pair")
    want = MatchPair(mshape.pos_path, mshape.neg_path,
                     fresh_match_letter(mid.conclusion, mshape.letter))
    if mid.rule != want:
        raise BridgeError(f"level {LevelLabel(level.number, 'b')}: proof is "
                          f"not canonical: expected the gadget match")
    return _read(mid.premises[0], LevelLabel(level.number + 1))


# ---------------------------------------------------------------------------
# canonicalization

@dataclass
class _Dec:
    choices: list[int]
    split: Optional[tuple["_Dec", "_Dec"]]


def _extract(node: ProofNode) -> _Dec:
    """Collect the term choices along each branch (they always fire outside
    in) and where the proof wait-splits.  Matches carry no information."""
    choices: list[int] = []
    cur = node
    while True:
        rule = cur.rule
        if isinstance(rule, Wait):
            if not cur.premises:
                return _Dec(choices, None)
            if len(cur.premises) != 2:
                raise BridgeError("proof is not over a reduced sentence: "
                                  "unexpected wait arity")
            want = [render_formula(p) for p in wait_premises(cur.conclusion)]
            got = [render_formula(p.conclusion) for p in cur.premises]
            if sorted(want) != sorted(got) or len(want) != 2:
                raise BridgeError("proof is not over a reduced sentence: "
                                  "unexpected wait premises")
            lo, hi = cur.premises
            if got[0] != want[0]:
                lo, hi = hi, lo
            return _Dec(choices, (_extract(lo), _extract(hi)))
        if isinstance(rule, ChooseTerm):
            if not isinstance(rule.term, Constant):
                raise BridgeError("proof is not over a reduced sentence: "
                                  "a term choice is not a constant")
            choices.append(rule.term.value)
            cur = cur.premises[0]
        elif isinstance(rule, MatchPair):
            cur = cur.premises[0]
        else:
            raise BridgeError("proof is not over a reduced sentence: "
                              "choose-disjunct cannot occur")


def _replay(f: Formula, dec: _Dec, i: int) -> ProofNode:
    shape = _analyze(f)
    if shape.cls is ShapeClass.EXISTS_CHOICE:
        if i >= len(dec.choices):
            raise BridgeError("proof is missing a term choice")
        c = dec.choices[i]
        if c not in (0, 1):
            c = 0  # the gadget letters only ever meet 0 and 1; anything else
            # left every literal over this variable unsatisfied, and 0 keeps
            # at least that much true
        move = ChooseTerm(shape.quant_path, Constant(c))
        return ProofNode(f, move, (_replay(apply_move(f, move), dec, i + 1),))
    if shape.cls is ShapeClass.FORALL_GADGET:
        if dec.split is None or i != len(dec.choices):
            raise BridgeError("proof does not branch where the sentence does")
        prems = wait_premises(f)
        kids = tuple(_replay_commit(prems[a], dec.split[a], a) for a in (0, 1))
        return ProofNode(f, WAIT, kids)
    if shape.cls in (ShapeClass.PICKED_GADGET, ShapeClass.MATCH_PENDING):
        raise BridgeError(f"unexpected {shape.cls.value} state during replay")
    if dec.split is not None or i != len(dec.choices):
        raise BridgeError("proof branches where the sentence does not")
    move = first_match_move(f)
    if move is not None:
        return ProofNode(f, move, (_replay(apply_move(f, move), dec, i),))
    if not is_stable(f):
        raise BridgeError("replayed branch does not close")
    return ProofNode(f, WAIT, ())


def _replay_commit(f: Formula, dec: _Dec, bit: int) -> ProofNode:
    shape = _analyze(f)
    if shape.cls is not ShapeClass.PICKED_GADGET or shape.const != bit:
        raise BridgeError("wait premise is not a committed gadget")
    if not dec.choices or dec.choices[0] != bit:
        raise BridgeError("branch does not commit the universal bit it waits on")
    move = ChooseTerm(shape.quant_path, Constant(bit))
    g = apply_move(f, move)
    mshape = _analyze(g)
    if mshape.cls is not ShapeClass.MATCH_PENDING:
        raise BridgeError("committed gadget did not leave a matchable pair")
    mmove = MatchPair(mshape.pos_path, mshape.neg_path,
                      fresh_match_letter(g, mshape.letter))
    return ProofNode(f, move,
                     (ProofNode(g, mmove, (_replay(apply_move(g, mmove), dec, 1),)),))


def canonicalize_proof(proof: ProofNode) -> ProofNode:
    """Rebuild a valid proof of a reduced sentence in the canonical order:
    matches happen as early as possible, wait premises keep their derivation
    order, the endgame matches every pair, and term choices are binary.
    Canonical proofs come back unchanged."""
    res = check_proof(proof)
    if not res:
        raise BridgeError(f"input proof does not check: {res.diagnostics[0]}")
    dec = _extract(proof)
    out = _replay(proof.conclusion, dec, 0)
    res = check_proof(out)
    if not res:
        raise BridgeError(f"canonical replay does not check: {res.diagnostics[0]}")
    return out
