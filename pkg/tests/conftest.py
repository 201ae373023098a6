"""Shared oracles and generators.

Everything here recomputes its answer from first principles, so the library
never gets to certify itself: classical validity comes from a plain truth
table, provability from an unmemoized search that tries every applicable rule
and every candidate term, sentence values from folding a full assignment
table, and strategy-tree existence from enumerating all shaped trees.
"""

from __future__ import annotations

import itertools
import random

from clprover.formula import (
    Atom, Bot, ChoAll, ChoAnd, ChoEx, ChoOr, Constant, Formula, LetterId,
    ParAnd, ParOr, Top, Variable, BOT, ELEMENTARY, GENERAL, TOP,
    children, replace_at, substitute_var, surface_occurrences, validate_formula,
    with_children,
)
from clprover.prover import Logic
from clprover.qbf import EXISTS, Qbf, StrategyNode


# ---------------------------------------------------------------------------
# truth tables for elementary formulas

def tt_atom_keys(f: Formula) -> list[tuple]:
    keys: list[tuple] = []

    def walk(g: Formula) -> None:
        if isinstance(g, Atom):
            key = (g.letter.name,) + tuple(
                t.name if isinstance(t, Variable) else t.value for t in g.args)
            if key not in keys:
                keys.append(key)
        for kid in children(g):
            walk(kid)

    walk(f)
    return keys


def tt_value(f: Formula, assignment: dict) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, Atom):
        key = (f.letter.name,) + tuple(
            t.name if isinstance(t, Variable) else t.value for t in f.args)
        v = assignment[key]
        return not v if f.negated else v
    if isinstance(f, ParAnd):
        return all(tt_value(op, assignment) for op in f.operands)
    if isinstance(f, ParOr):
        return any(tt_value(op, assignment) for op in f.operands)
    raise ValueError(f"not elementary: {f!r}")


def tt_valid(f: Formula) -> bool:
    keys = tt_atom_keys(f)
    return all(tt_value(f, dict(zip(keys, bits)))
               for bits in itertools.product((False, True), repeat=len(keys)))


def oracle_elementarize(f: Formula) -> Formula:
    if isinstance(f, Atom):
        return BOT if f.letter.sort == GENERAL else f
    if isinstance(f, (ChoAnd, ChoAll)):
        return TOP
    if isinstance(f, (ChoOr, ChoEx)):
        return BOT
    if isinstance(f, (ParAnd, ParOr)):
        return with_children(f, tuple(oracle_elementarize(k) for k in f.operands))
    return f


def oracle_stable(f: Formula) -> bool:
    return tt_valid(oracle_elementarize(f))


# ---------------------------------------------------------------------------
# naive provability: every rule, every option, no memoization, no shortcuts

def _oracle_fresh_var(f: Formula) -> str:
    used = {t.name
            for _, g in _all_atoms(f)
            for t in g.args if isinstance(t, Variable)}
    used |= _binders(f)
    for i in itertools.count():
        name = f"w{i}"
        if name not in used:
            return name


def _all_atoms(f: Formula):
    out = []

    def walk(g, path):
        if isinstance(g, Atom):
            out.append((path, g))
        for i, kid in enumerate(children(g)):
            walk(kid, path + (i,))

    walk(f, ())
    return out


def _binders(f: Formula) -> set[str]:
    if isinstance(f, (ChoAll, ChoEx)):
        return {f.var} | _binders(f.body)
    return set().union(*(_binders(k) for k in children(f))) if children(f) else set()


def _oracle_fresh_letter(f: Formula, arity: int) -> LetterId:
    used = {g.letter.name for _, g in _all_atoms(f)}
    for i in itertools.count():
        name = f"m{i}"
        if name not in used:
            return LetterId(ELEMENTARY, name, arity)


def _oracle_wait_premises(f: Formula) -> list[Formula]:
    prems = []
    for path, occ in surface_occurrences(f, (ChoAnd, ChoAll)):
        if isinstance(occ, ChoAnd):
            prems.extend(replace_at(f, path, op) for op in occ.operands)
        else:
            body = substitute_var(occ.body, occ.var, Variable(_oracle_fresh_var(f)))
            prems.append(replace_at(f, path, body))
    return prems


def _oracle_term_choices(f: Formula) -> list:
    consts = {t.value
              for _, g in _all_atoms(f)
              for t in g.args if isinstance(t, Constant)}
    free = {t.name
            for _, g in _all_atoms(f)
            for t in g.args if isinstance(t, Variable)} - _binders(f)
    fresh = list(itertools.islice(
        (c for c in itertools.count() if c not in consts), 2))
    return ([Constant(c) for c in sorted(consts) + fresh]
            + [Variable(v) for v in sorted(free)])


def _oracle_moves(f: Formula, logic: Logic) -> list[Formula]:
    """Every conclusion-to-premise step other than the waiting one."""
    out = []
    for path, occ in surface_occurrences(f, (ChoOr,)):
        out.extend(replace_at(f, path, op) for op in occ.operands)
    for path, occ in surface_occurrences(f, (ChoEx,)):
        for t in _oracle_term_choices(f):
            out.append(replace_at(f, path, substitute_var(occ.body, occ.var, t)))
    if logic is Logic.CL4:
        gens = [(p, a) for p, a in surface_occurrences(f, (Atom,))
                if a.letter.sort == GENERAL]
        for (pp, pa), (np_, na) in itertools.product(gens, gens):
            if pa.negated or not na.negated or pa.letter != na.letter:
                continue
            fresh = _oracle_fresh_letter(f, pa.letter.arity)
            g = replace_at(f, pp, Atom(fresh, pa.args))
            g = replace_at(g, np_, Atom(fresh, na.args, negated=True))
            out.append(g)
    return out


def naive_provable(f: Formula, logic: Logic = Logic.CL4) -> bool:
    if oracle_stable(f) and all(naive_provable(p, logic)
                                for p in _oracle_wait_premises(f)):
        return True
    return any(naive_provable(g, logic) for g in _oracle_moves(f, logic))


# ---------------------------------------------------------------------------
# sentence values by folding a full assignment table

def table_qbf_value(q: Qbf) -> bool:
    names = [v for _, v in q.prefix]
    table = {}
    for bits in itertools.product((0, 1), repeat=len(names)):
        env = dict(zip(names, bits))
        table[bits] = all(
            any((env[lit.var] == 1) == lit.positive for lit in clause)
            for clause in q.matrix)

    def fold(prefix_bits: tuple) -> bool:
        i = len(prefix_bits)
        if i == len(names):
            return table[prefix_bits]
        a, b = fold(prefix_bits + (0,)), fold(prefix_bits + (1,))
        return (a or b) if q.prefix[i][0] is EXISTS else (a and b)

    return fold(())


def all_strategy_trees(n: int) -> list[StrategyNode]:
    """All Definition-shaped trees for an odd prefix length n (small n only)."""
    assert n % 2 == 1

    def at_level(level: int) -> list[StrategyNode]:
        if level == n:
            return [StrategyNode(0), StrategyNode(1)]
        out = []
        for label in (0, 1):
            for left in at_level(level + 2):
                for right in at_level(level + 2):
                    out.append(StrategyNode(label, (
                        StrategyNode(0, (left,)), StrategyNode(1, (right,)))))
        return out

    return at_level(1)


# ---------------------------------------------------------------------------
# random well-formed formulas

_ELEM_LETTERS = (("p", 0), ("q", 0), ("r", 1), ("s", 2), ("e", 1))
_GEN_LETTERS = (("P", 0), ("Q", 1), ("R", 1), ("S", 2))


def random_formula(rng: random.Random, budget: int = 6,
                   allow_general: bool = True) -> Formula:
    binder_names = (f"u{i}" for i in itertools.count())

    def term(scope):
        r = rng.random()
        if scope and r < 0.55:
            return Variable(rng.choice(scope))
        if r < 0.7:
            return Variable(rng.choice(("x", "y")))
        return Constant(rng.randint(0, 2))

    def atom(scope):
        pick_general = allow_general and rng.random() < 0.45
        name, arity = rng.choice(_GEN_LETTERS if pick_general else _ELEM_LETTERS)
        args = tuple(term(scope) for _ in range(arity))
        return Atom(LetterId.from_name(name, arity), args,
                    negated=rng.random() < 0.4)

    def build(b, scope):
        if b <= 1:
            r = rng.random()
            if r < 0.06:
                return TOP
            if r < 0.12:
                return BOT
            return atom(scope)
        kind = rng.choice(("par_and", "par_or", "par_or", "cho_and", "cho_or",
                           "cho_all", "cho_ex", "atom"))
        if kind == "atom":
            return atom(scope)
        if kind in ("cho_all", "cho_ex"):
            v = next(binder_names)
            node_cls = ChoAll if kind == "cho_all" else ChoEx
            return node_cls(v, build(b - 1, scope + (v,)))
        width = 2 if b < 5 else rng.choice((2, 2, 3))
        rem, parts = b - 1, []
        for i in range(width):
            share = max(1, rem // (width - i))
            parts.append(build(share, scope))
            rem -= share
        node_cls = {"par_and": ParAnd, "par_or": ParOr,
                    "cho_and": ChoAnd, "cho_or": ChoOr}[kind]
        return node_cls(tuple(parts))

    f = build(budget, ())
    validate_formula(f)
    return f


# ---------------------------------------------------------------------------
# structural comparison up to general-letter names and associativity

def flatten_parallel(f: Formula) -> Formula:
    if isinstance(f, (ParAnd, ParOr)):
        ops = []
        for op in f.operands:
            op = flatten_parallel(op)
            if type(op) is type(f):
                ops.extend(op.operands)
            else:
                ops.append(op)
        return with_children(f, tuple(ops))
    kids = children(f)
    return with_children(f, tuple(flatten_parallel(k) for k in kids)) if kids else f


def equal_mod_general_letters(f: Formula, g: Formula, _map=None) -> bool:
    if _map is None:
        _map = {}
    if type(f) is not type(g):
        return False
    if isinstance(f, Atom):
        if f.negated != g.negated or f.args != g.args:
            return False
        if f.letter.sort == GENERAL:
            if g.letter.sort != GENERAL or f.letter.arity != g.letter.arity:
                return False
            if f.letter.name not in _map:
                if g.letter.name in _map.values():
                    return False
                _map[f.letter.name] = g.letter.name
            return _map[f.letter.name] == g.letter.name
        return f.letter == g.letter
    if isinstance(f, (ChoAll, ChoEx)):
        return f.var == g.var and equal_mod_general_letters(f.body, g.body, _map)
    fk, gk = children(f), children(g)
    return len(fk) == len(gk) and all(
        equal_mod_general_letters(a, b, _map) for a, b in zip(fk, gk))
