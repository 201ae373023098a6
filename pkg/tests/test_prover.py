import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import naive_provable, random_formula
from clprover.formula import (
    Constant, ELEMENTARY, LetterId, Variable, children, has_general,
    parse_formula,
)
from clprover.prover import (
    ChooseDisjunct, ChooseTerm, DepthLimitError, GoalError, Logic, MatchPair,
    ProofFormatError, ProofNode, ProverConfig, TermPool, WAIT, apply_move,
    check_proof, enumerate_moves, measure, proof_from_json, proof_to_dict,
    proof_to_json, prove, prove_with_stats, term_pool, wait_premises,
)


CL3 = ProverConfig(logic=Logic.CL3)


def proof_nodes(node):
    yield node
    for p in node.premises:
        yield from proof_nodes(p)


# ---------------------------------------------------------------------------
# wait premises

def test_wait_premises_choice_conjunction():
    f = parse_formula("(p cand q) \\/ r")
    assert wait_premises(f) == [parse_formula("p \\/ r"), parse_formula("q \\/ r")]


def test_wait_premises_quantifier_uses_first_free_w():
    assert wait_premises(parse_formula("call x: p(x)")) == [parse_formula("p(w0)")]
    f = parse_formula("(call x: p(x)) \\/ q(w0)")
    assert wait_premises(f) == [parse_formula("p(w1) \\/ q(w0)")]


def test_wait_premises_empty_without_surface_occurrences():
    assert wait_premises(parse_formula("p \\/ q")) == []
    # inside a choice disjunction is not surface
    assert wait_premises(parse_formula("p cor (q cand r)")) == []


def test_wait_premises_deduplicates():
    f = parse_formula("(p cand p) \\/ (p cand p)")
    assert wait_premises(f) == [parse_formula("p \\/ (p cand p)"),
                                parse_formula("(p cand p) \\/ p")]


# ---------------------------------------------------------------------------
# move enumeration

def test_enumerate_choice_disjuncts():
    moves = enumerate_moves(parse_formula("p cor q"), ProverConfig())
    assert moves == [ChooseDisjunct((), 0), ChooseDisjunct((), 1)]


def test_enumerate_single_match_pair():
    moves = enumerate_moves(parse_formula("P(0) \\/ ~P(0)"), ProverConfig())
    assert moves == [MatchPair((0,), (1,), LetterId(ELEMENTARY, "p0", 1))]


def test_enumerate_terms_from_the_pool():
    f = parse_formula("cex x: p(x)")
    assert enumerate_moves(f, ProverConfig()) == [ChooseTerm((), Constant(0))]
    assert enumerate_moves(f, ProverConfig(term_pool=TermPool.OCCURRING)) == []
    two = enumerate_moves(f, ProverConfig(term_pool=TermPool.OCCURRING_PLUS_TWO_FRESH))
    assert two == [ChooseTerm((), Constant(0)), ChooseTerm((), Constant(1))]


def test_term_pool_order_constants_then_variables_then_fresh():
    f = parse_formula("cex x: s(x, 2) \\/ p(y)")
    assert term_pool(f, TermPool.OCCURRING_PLUS_FRESH) == \
        [Constant(2), Variable("y"), Constant(0)]


def test_enumerate_skips_match_without_both_polarities():
    moves = enumerate_moves(parse_formula("P(0) \\/ P(1)"), ProverConfig())
    assert moves == []
    # cl3 never matches even when a pair exists
    moves = enumerate_moves(parse_formula("P(0) \\/ ~P(0)"), CL3)
    assert moves == []


def test_apply_move_validates_everything():
    f = parse_formula("P(0) \\/ ~P(1)")
    from clprover.prover import MoveError
    with pytest.raises(MoveError):
        apply_move(f, ChooseDisjunct((), 0))  # root is not a choice disjunction
    with pytest.raises(MoveError):
        apply_move(f, MatchPair((1,), (0,), LetterId(ELEMENTARY, "p0", 1)))
    with pytest.raises(MoveError):
        apply_move(f, MatchPair((0,), (1,), LetterId(ELEMENTARY, "P0", 1)))
    g = parse_formula("cex x: p(x) \\/ q(y)")
    with pytest.raises(MoveError):
        apply_move(g, ChooseTerm((), Variable("x")))  # bound in the formula


# ---------------------------------------------------------------------------
# proving

def test_prove_top_is_a_wait_axiom():
    proof = prove(parse_formula("T"))
    assert proof is not None and proof.rule is WAIT and proof.premises == ()


def test_prove_excluded_middle_general():
    proof = prove(parse_formula("P \\/ ~P"))
    assert proof is not None
    assert isinstance(proof.rule, MatchPair)
    assert proof.premises[0].rule is WAIT
    assert proof.premises[0].conclusion == parse_formula("p0 \\/ ~p0")


def test_prove_choice_middle_fails():
    assert prove(parse_formula("call x: (p(x) cor ~p(x))")) is None


def test_prove_stable_elementary_is_single_wait():
    proof = prove(parse_formula("p \\/ ~p"))
    assert proof is not None and proof.rule is WAIT and proof.premises == ()


def test_cl3_rejects_general_goals():
    with pytest.raises(GoalError):
        prove(parse_formula("P \\/ ~P"), CL3)


def test_depth_limit():
    f = parse_formula("p cand q")
    with pytest.raises(DepthLimitError):
        prove(f, ProverConfig(depth_limit=1))
    assert prove(f) is None  # default limit suffices to settle it


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**9))
def test_prove_agrees_with_the_naive_search_cl4(seed):
    f = random_formula(random.Random(seed), budget=6)
    assert (prove(f) is not None) == naive_provable(f)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**9))
def test_prove_agrees_with_the_naive_search_cl3(seed):
    f = random_formula(random.Random(seed), budget=6, allow_general=False)
    assert not has_general(f)
    assert (prove(f, CL3) is not None) == naive_provable(f, Logic.CL3)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9))
def test_proofs_check_and_shrink_the_measure(seed):
    f = random_formula(random.Random(seed), budget=6)
    proof, stats = prove_with_stats(f)
    if proof is None:
        return
    assert check_proof(proof)
    for node in proof_nodes(proof):
        for p in node.premises:
            assert measure(p.conclusion) < measure(node.conclusion)
    assert stats.max_depth <= measure(f) + 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_memoization_never_changes_the_proof(seed):
    f = random_formula(random.Random(seed), budget=5)
    with_memo = prove(f, ProverConfig(memoization=True))
    without = prove(f, ProverConfig(memoization=False))
    assert with_memo == without


def test_determinism_on_repeat_runs():
    f = parse_formula("(P(0) cand P(1)) \\/ cex x: (~P(x) /\\ (p cor q))")
    assert prove(f) == prove(f)


# ---------------------------------------------------------------------------
# proof checking

def test_check_rejects_unstable_wait():
    bad = ProofNode(parse_formula("P \\/ ~P"), WAIT, ())
    res = check_proof(bad)
    assert not res.ok and any("unstable" in d for d in res.diagnostics)


def test_check_rejects_wrong_polarity_match():
    f = parse_formula("P(0) \\/ P(1)")
    fresh = LetterId(ELEMENTARY, "p0", 1)
    prem = ProofNode(parse_formula("p0(0) \\/ p0(1)"), WAIT, ())
    bad = ProofNode(f, MatchPair((0,), (1,), fresh), (prem,))
    res = check_proof(bad)
    assert not res.ok and any("polarity" in d for d in res.diagnostics)


def test_check_rejects_incomplete_wait_premises():
    f = parse_formula("p cand q")
    half = ProofNode(f, WAIT, (ProofNode(parse_formula("p"), WAIT, ()),))
    res = check_proof(half)
    assert not res.ok and any("premises" in d for d in res.diagnostics)


def test_check_rejects_match_in_cl3():
    proof = prove(parse_formula("P \\/ ~P"))
    res = check_proof(proof, CL3)
    assert not res.ok
    assert any("cl3" in d for d in res.diagnostics)


def test_check_rejects_tampered_premise():
    proof = prove(parse_formula("p cor T"))
    assert isinstance(proof.rule, ChooseDisjunct)
    swapped = ProofNode(proof.conclusion, ChooseDisjunct((), 0), proof.premises)
    res = check_proof(swapped)
    assert not res.ok and any("premise" in d for d in res.diagnostics)


def test_check_diagnostics_locate_the_node():
    f = parse_formula("p cand (q cand q)")
    good = prove(parse_formula("p cand (T cand T)"))
    assert good is None or check_proof(good)
    inner_bad = ProofNode(parse_formula("q cand q"), WAIT, (
        ProofNode(parse_formula("q"), WAIT, ()),
        ProofNode(parse_formula("q"), WAIT, ())))
    root = ProofNode(f, WAIT, (
        ProofNode(parse_formula("p"), WAIT, ()), inner_bad))
    res = check_proof(root)
    assert not res.ok
    assert any(d.startswith("root.1") for d in res.diagnostics)


# ---------------------------------------------------------------------------
# proof serialization

def test_proof_json_round_trip():
    for text in ("P \\/ ~P", "p cor T", "cex x: p(x) \\/ ~p(1)",
                 "(p cand q) \\/ (q cor p) \\/ ~q"):
        proof = prove(parse_formula(text))
        if proof is None:
            continue
        assert proof_from_json(proof_to_json(proof)) == proof


def test_proof_json_key_order():
    proof = prove(parse_formula("P \\/ ~P"))
    d = proof_to_dict(proof)
    assert list(d) == ["formula", "rule", "posPath", "negPath", "fresh", "premises"]
    assert list(d["premises"][0]) == ["formula", "rule", "premises"]


@pytest.mark.parametrize("doc", [
    '{"rule": "wait", "premises": []}',                      # missing formula
    '{"formula": "T", "rule": "hope", "premises": []}',      # unknown rule
    '{"formula": "T", "rule": "wait", "premises": [], "x": 1}',
    '{"formula": "T", "rule": "wait"}',
    '{"formula": "p cor q", "rule": "choose-disjunct", "path": [0], '
    '"premises": []}',                                       # index missing
    '{"formula": "cex x: p(x)", "rule": "choose-term", "path": [], '
    '"term": -1, "premises": []}',
    '{"formula": "cex x: p(x)", "rule": "choose-term", "path": [], '
    '"term": true, "premises": []}',
    '{"formula": "T", "rule": "wait", "premises": [], "path": []}',
    '{"formula": "P \\\\/ ~P", "rule": "match", "posPath": [0], '
    '"negPath": [1], "fresh": {"name": "p0"}, "premises": []}',
    'not json at all',
])
def test_proof_json_rejects_malformed_documents(doc):
    with pytest.raises(ProofFormatError):
        proof_from_json(doc)


def test_emitted_artifacts_revalidate():
    proof = prove(parse_formula(
        "(P(0) cand P(1)) \\/ cex x: (~P(x) /\\ (p \\/ ~p))"))
    assert proof is not None
    again = proof_from_json(proof_to_json(proof))
    assert check_proof(again)
