import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irac import credential as cr
from irac import poseidon, vc
from irac.field import P, Q, SENTINEL
from irac.signature import Signature, sig_keygen, sig_sign, sig_verify


def straight_line_root(leaves):
    """Plain level-by-level Merkle build, no padding shortcuts."""
    layer = list(leaves)
    while len(layer) > 1:
        layer = [poseidon.hash2(layer[i], layer[i + 1]) for i in range(0, len(layer), 2)]
    return layer[0]


@pytest.mark.parametrize("n,size,depth", [(3, 4, 2), (1, 2, 1), (2, 2, 1), (1 << 15, 1 << 15, 15)])
def test_setup_rounds_up(n, size, depth):
    p = vc.vc_setup(n)
    assert (p.n, p.depth) == (size, depth)


def test_setup_rejects():
    with pytest.raises(ValueError):
        vc.vc_setup(0)
    with pytest.raises(ValueError):
        vc.vc_setup(4, "bogus")


# computed once with straight_line_root
EMPTY_ATTR_8 = 0x2C583581004BE17AE5C42208320783C64C029F87F523BBC1BFE86489984D6C3F
EMPTY_REV_8 = 0x023CBD0FA69908C41CD036D0E18550114C7780B8EE862664ADE3E360A441BDDA
EMPTY_REV_2_15 = 0x07DDC31872EA6732195591AEBC2C1246444105B7706EFA494579B81C426BFC32


def test_empty_roots():
    attr_leaf = poseidon.hash2(0, 0, poseidon.DOMAIN_ATTR_LEAF)
    assert straight_line_root([attr_leaf] * 8) == EMPTY_ATTR_8
    assert straight_line_root([0] + [SENTINEL] * 7) == EMPTY_REV_8
    assert vc.vc_commit(vc.vc_setup(8, vc.ATTR), []) == EMPTY_ATTR_8
    assert cr.revocation_root((), 8) == EMPTY_REV_8
    assert cr.revocation_root((), 1 << 15) == EMPTY_REV_2_15


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_matches_straight_line(n):
    rng = random.Random(n)
    a = [rng.randrange(P) for _ in range(rng.randint(0, n))]
    params = vc.vc_setup(n, vc.REVOCATION)
    assert vc.vc_commit(params, a) == straight_line_root(a + [SENTINEL] * (n - len(a)))


def test_open_every_index_and_mismatch_sweep():
    rng = random.Random(0)
    params = vc.vc_setup(8, vc.ATTR)
    a = [(i + 1, rng.randrange(P)) for i in range(8)]
    tree = vc.MerkleTree(params, a)
    for i in range(8):
        proof = tree.open(i)
        assert vc.vc_verify(params, tree.root, i, a[i], proof)
        for j in range(8):
            if j != i:
                assert not vc.vc_verify(params, tree.root, j, a[i], proof)
                moved = vc.OpeningProof(j, proof.siblings)
                assert not vc.vc_verify(params, tree.root, j, a[i], moved)
        assert not vc.vc_verify(params, tree.root, i, (a[i][0], a[i][1] + 1), proof)
        assert not vc.vc_verify(params, tree.root, i, a[i], vc.OpeningProof(i, proof.siblings[:-1]))


def test_commit_changes_with_any_element():
    rng = random.Random(1)
    params = vc.vc_setup(16, vc.REVOCATION)
    a = [rng.randrange(1, P) for _ in range(16)]
    root = vc.vc_commit(params, a)
    assert vc.vc_commit(params, a) == root
    for i in range(16):
        b = list(a)
        b[i] = (b[i] + 1) % P
        assert vc.vc_commit(params, b) != root


def test_non_canonical_elements_rejected():
    params = vc.vc_setup(4, vc.REVOCATION)
    with pytest.raises(ValueError):
        vc.vc_commit(params, [P])
    tree = vc.MerkleTree(params, [5])
    assert not vc.vc_verify(params, tree.root, 0, 5 + P, tree.open(0))
    with pytest.raises(vc.VectorTooLong):
        vc.vc_commit(params, [1] * 5)
    with pytest.raises(vc.IndexOutOfRange):
        tree.open(4)


# -- sorted lists and gaps ---------------------------------------------------------


def test_sorted_layout_and_gaps():
    tree = cr.sorted_list_tree((9, 5), 8)
    assert tree.elements == [0, 5, 9]
    g = cr.find_gap(tree, 7)
    assert (tree.element(g), tree.element(g + 1)) == (5, 9)
    g = cr.find_gap(cr.sorted_list_tree((), 8), 123)
    assert g == 0
    assert cr.sorted_list_tree((), 8).element(1) == SENTINEL
    for h in (5, 9, 0, SENTINEL):
        with pytest.raises(cr.Revoked):
            cr.find_gap(tree, h)


def test_sorted_layout_capacity():
    with pytest.raises(vc.VectorTooLong):
        cr.sorted_list_tree(tuple(range(1, 8)), 8)
    assert len(cr.sorted_list_tree(tuple(range(1, 7)), 8).elements) == 7


# -- signatures ----------------------------------------------------------------------


def test_sign_verify_round_trip():
    rng = random.Random(2)
    sk, pk = sig_keygen(rng)
    _, pk2 = sig_keygen(rng)
    assert pk != pk2
    assert sk.verifying_key() == pk
    sig = sig_sign(sk, 42, rng)
    assert sig_verify(pk, 42, sig)
    assert not sig_verify(pk, 43, sig)
    assert not sig_verify(pk2, 42, sig)


def test_signature_bit_flips_rejected():
    rng = random.Random(3)
    sk, pk = sig_keygen(rng)
    sig = sig_sign(sk, 99, rng)
    raw = sig.to_bytes()
    assert Signature.from_bytes(raw) == sig
    for _ in range(100):
        b = bytearray(raw)
        b[rng.randrange(4, len(b))] ^= 1 << rng.randrange(8)
        try:
            bad = Signature.from_bytes(bytes(b))
        except ValueError:
            continue
        assert not sig_verify(pk, 99, bad)


def test_signature_scalar_range():
    rng = random.Random(4)
    sk, pk = sig_keygen(rng)
    sig = sig_sign(sk, 1, rng)
    assert not sig_verify(pk, 1, Signature(sig.rx, sig.ry, sig.s + Q))
    with pytest.raises(ValueError):
        sig_sign(sk, P)


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=P - 1))
def test_fresh_nonce_changes_credential_hash(m):
    rng = random.Random(m)
    sk, _ = sig_keygen(rng)
    s1, s2 = sig_sign(sk, m, rng), sig_sign(sk, m, rng)
    h1, h2 = cr.credential_hash(m, s1), cr.credential_hash(m, s2)
    assert h1 != h2
    assert 0 < h1 < SENTINEL
