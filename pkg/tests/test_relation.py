import random
from dataclasses import replace

import pytest

import scenarios as sc
from irac import credential as cr
from irac import protocol as pr
from irac import relation as rl
from irac.field import P, SENTINEL
from irac.predicate import Compare, MemberOf, NotInSortedList, conj


@pytest.fixture(scope="module")
def world():
    params, u = sc.toy_params()
    rng = random.Random(7)
    a = pr.issuer_setup(params, u, ["age", "country"], rng)
    b = pr.issuer_setup(params, u, ["age"], rng)
    cred = pr.issue_cred(params, a, [30, 5], rng)
    return params, u, a, b, cred


def assemble(params, cred, phi, view):
    c, w = rl.witness_assemble(cred, phi, view, params.sizes)
    return rl.Statement(phi, c, b"ctx"), w


def test_honest_witness(world):
    params, _, a, b, cred = world
    phi = conj(Compare(1, ">", 18))
    stmt, w = assemble(params, cred, phi, [a.bundle(), b.bundle()])
    assert rl.relation_check(stmt, w, params.sizes)
    assert rl.circuit_accepts(stmt, w, params.sizes)


def test_fresh_credential_gap_is_first_slot(world):
    params, _, a, b, cred = world
    _, w = assemble(params, cred, conj(Compare(1, ">", 18)), [a.bundle()])
    assert (w.gap.i_l, w.gap.h_l, w.gap.h_r) == (0, 0, SENTINEL)


def test_gap_between_toy_neighbours():
    tree = cr.sorted_list_tree((5, 9), 8)
    g = rl.gap_witness(tree, 7)
    assert (g.h_l, g.h_r) == (5, 9)
    params = tree.params
    assert rl._gap_ok(params, tree.root, g, 7)
    assert not rl._gap_ok(params, tree.root, g, 9)
    skip = replace(g, h_r=tree.element(g.i_l + 2), proof_r=tree.open(g.i_l + 2))
    assert not rl._gap_ok(params, tree.root, skip, 7)


def test_revoked_witness_fails(world):
    params, _, a, b, cred = world
    phi = conj(Compare(1, ">", 18))
    stmt, w = assemble(params, cred, phi, [a.bundle(), b.bundle()])
    a2 = pr.revoke(params, a, cred)
    view = [a2.bundle(), b.bundle()]
    with pytest.raises(cr.Revoked):
        rl.witness_assemble(cred, phi, view, params.sizes)
    c2 = rl.issuer_set_commitment(view, params.sizes)
    assert not rl.relation_check(replace(stmt, c=c2), w, params.sizes)


def test_assembly_errors(world):
    params, _, a, b, cred = world
    with pytest.raises(rl.IssuerNotInSet):
        rl.witness_assemble(cred, conj(Compare(1, ">", 18)), [b.bundle()], params.sizes)
    with pytest.raises(rl.AttributeNotCovered):
        rl.witness_assemble(cred, conj(Compare(2, ">", 1)), [a.bundle(), b.bundle()],
                            params.sizes)
    with pytest.raises(rl.PredicateUnsatisfied):
        rl.witness_assemble(cred, conj(Compare(1, ">", 40)), [a.bundle()], params.sizes)


def test_list_clause_witness(world):
    params, _, a, _, cred = world
    phi = conj(NotInSortedList(2, (3, 4, 6)), MemberOf(1, (29, 30)))
    stmt, w = assemble(params, cred, phi, [a.bundle()])
    assert len(w.list_gaps) == 1
    assert (w.list_gaps[0].h_l, w.list_gaps[0].h_r) == (4, 6)
    assert rl.relation_check(stmt, w, params.sizes)
    assert rl.circuit_accepts(stmt, w, params.sizes)
    with pytest.raises(rl.PredicateUnsatisfied):
        assemble(params, cred, conj(NotInSortedList(2, (5,))), [a.bundle()])


def test_public_inputs_layout(world):
    params, _, a, _, cred = world
    phi = conj(Compare(1, ">", 18), MemberOf(2, (5, 6)), NotInSortedList(2, (9,)))
    stmt, _ = assemble(params, cred, phi, [a.bundle()])
    pub = rl.public_inputs(stmt)
    assert pub[:4] == [stmt.c, rl.ctx_field(b"ctx"), 1, 2]
    assert pub[4:7] == [18, 5, 6]
    assert pub[7] == rl.list_root(phi.clauses[2])


def test_witness_serialization(world):
    params, _, a, _, cred = world
    phi = conj(NotInSortedList(2, (3,)), Compare(1, "<", 99))
    _, w = assemble(params, cred, phi, [a.bundle()])
    assert rl.witness_from_bytes(rl.witness_to_bytes(w)) == w


def test_build_is_deterministic():
    sizes = rl.Sizes(8, 8, 8)
    desc = rl.RelationDescription.for_predicate(conj(Compare(1, ">", 18)), sizes)
    a, b = rl.relation_build(desc), rl.relation_build(desc)
    assert a.digest() == b.digest()
    other = rl.RelationDescription.for_predicate(conj(Compare(1, ">", 21)), sizes)
    assert rl.relation_build(other).digest() == a.digest()


def test_full_size_constraint_count():
    sizes = rl.Sizes(1 << 7, 1 << 15, 1 << 7)
    desc = rl.RelationDescription.for_predicate(conj(Compare(1, ">", 18)), sizes)
    n = len(rl.relation_build(desc))
    assert n < 1 << 15


def test_non_canonical_public_input_rejected(world):
    params, _, a, _, cred = world
    phi = conj(Compare(1, ">", 18))
    stmt, w = assemble(params, cred, phi, [a.bundle()])
    bad = replace(stmt, c=stmt.c + P)
    assert not rl.relation_check(bad, w, params.sizes)
    assert not rl.circuit_accepts(bad, w, params.sizes)


def test_mutations_agree():
    params, u = sc.toy_params()
    s = sc.scenario(11, params, u)
    c, w = rl.witness_assemble(s.cred, s.phi, s.view(), params.sizes)
    stmt = rl.Statement(s.phi, c, s.ctx)
    for name, (st2, w2) in sc.mutations(s, stmt, w).items():
        expect = name == "ctx"
        assert rl.relation_check(st2, w2, params.sizes) is expect, name
        assert rl.circuit_accepts(st2, w2, params.sizes) is expect, name


def test_opening_label_is_bound():
    # positions 2 and 3 are both sentinel with equal siblings; only the label differs
    params, u = sc.toy_params()
    s = sc.scenario(10044, params, u)
    c, w = rl.witness_assemble(s.cred, s.phi, s.view(), params.sizes)
    stmt = rl.Statement(s.phi, c, s.ctx)
    g = w.gap
    relabelled = replace(g.proof_r, index=g.proof_r.index + 1)
    bad = replace(w, gap=replace(g, proof_r=relabelled))
    assert rl.relation_check(stmt, w, params.sizes) and rl.circuit_accepts(stmt, w, params.sizes)
    assert not rl.relation_check(stmt, bad, params.sizes)
    assert not rl.circuit_accepts(stmt, bad, params.sizes)
