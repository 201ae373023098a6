"""Elementarization and classical validity.

The elementarization of a formula forgets everything interactive about it:
surface choice conjunctions and choice-all quantifiers become T, surface
choice disjunctions and choice-ex quantifiers become F, and surface general
literals become F (a positive one is unresolved, a negated one is the
negation of something at least as strong as T).  What remains is a classical
formula over elementary literals, and a formula is stable when that remnant
is classically valid.
"""

from __future__ import annotations

from .formula import (
    Atom, Bot, ChoAll, ChoAnd, ChoEx, ChoOr, Formula, FormulaError,
    GENERAL, ParAnd, ParOr, Top, TOP, BOT, Variable, is_elementary,
)


class NotElementaryError(FormulaError):
    """Classical evaluation applied to a non-elementary formula."""


def elementarize(f: Formula) -> Formula:
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, Atom):
        return BOT if f.letter.sort == GENERAL else f
    if isinstance(f, ParAnd):
        return ParAnd(tuple(elementarize(o) for o in f.operands))
    if isinstance(f, ParOr):
        return ParOr(tuple(elementarize(o) for o in f.operands))
    if isinstance(f, (ChoAnd, ChoAll)):
        return TOP
    if isinstance(f, (ChoOr, ChoEx)):
        return BOT
    raise FormulaError(f"not a formula node: {f!r}")


def atom_key(a: Atom) -> tuple:
    """Propositional identity of an elementary atom: letter name plus the
    literal argument tuple.  Distinct terms give distinct keys."""
    return (a.letter.name,) + tuple(
        (t.name if isinstance(t, Variable) else t.value) for t in a.args)


def atom_keys(f: Formula) -> set[tuple]:
    keys = set()

    def walk(node):
        if isinstance(node, Atom):
            keys.add(atom_key(node))
        elif isinstance(node, (ParAnd, ParOr)):
            for o in node.operands:
                walk(o)

    walk(f)
    return keys


def evaluate(f: Formula, assignment: dict) -> bool:
    """Truth value of an elementary formula under a {atom_key: bool} map.
    Unassigned keys default to False."""
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Atom):
        v = assignment.get(atom_key(f), False)
        return not v if f.negated else v
    if isinstance(f, ParAnd):
        return all(evaluate(o, assignment) for o in f.operands)
    if isinstance(f, ParOr):
        return any(evaluate(o, assignment) for o in f.operands)
    raise NotElementaryError(f"not an elementary formula: {f!r}")


def _negate(f: Formula) -> Formula:
    # dual in negation normal form
    if isinstance(f, Top):
        return BOT
    if isinstance(f, Bot):
        return TOP
    if isinstance(f, Atom):
        return Atom(f.letter, f.args, not f.negated)
    if isinstance(f, ParAnd):
        return ParOr(tuple(_negate(o) for o in f.operands))
    if isinstance(f, ParOr):
        return ParAnd(tuple(_negate(o) for o in f.operands))
    raise NotElementaryError(f"not an elementary formula: {f!r}")


def _simplify(f: Formula, assignment: dict) -> Formula:
    if isinstance(f, Atom):
        key = atom_key(f)
        if key in assignment:
            v = assignment[key] != f.negated
            return TOP if v else BOT
        return f
    if isinstance(f, (ParAnd, ParOr)):
        is_and = isinstance(f, ParAnd)
        ops = []
        for o in f.operands:
            s = _simplify(o, assignment)
            if isinstance(s, Top):
                if not is_and:
                    return TOP
            elif isinstance(s, Bot):
                if is_and:
                    return BOT
            else:
                ops.append(s)
        if not ops:
            return TOP if is_and else BOT
        if len(ops) == 1:
            return ops[0]
        return (ParAnd if is_and else ParOr)(tuple(ops))
    return f


def _pick_atom(f: Formula):
    if isinstance(f, Atom):
        return atom_key(f)
    if isinstance(f, (ParAnd, ParOr)):
        for o in f.operands:
            k = _pick_atom(o)
            if k is not None:
                return k
    return None


def _satisfiable(f: Formula) -> bool:
    f = _simplify(f, {})
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    key = _pick_atom(f)
    return _satisfiable(_simplify(f, {key: True})) or \
        _satisfiable(_simplify(f, {key: False}))


def is_valid_classical(f: Formula) -> bool:
    """Classical validity of an elementary formula by refutation search."""
    if not is_elementary(f):
        raise NotElementaryError(f"not an elementary formula: {f!r}")
    return not _satisfiable(_negate(f))


def is_stable(f: Formula) -> bool:
    return is_valid_classical(elementarize(f))
