import random
import threading
from dataclasses import replace

import pytest

import scenarios as sc
from irac import protocol as pr
from irac import zk
from irac.predicate import Compare, MemberOf, conj
from irac.relation import RelationDescription, Sizes, Statement, witness_assemble

SIZES = Sizes(8, 8, 8)
PHI = conj(Compare(1, ">", 18))


@pytest.fixture(scope="module")
def instance():
    params, u = sc.toy_params()
    rng = random.Random(5)
    issuers = [pr.issuer_setup(params, u, ["age", "country"], rng) for _ in range(2)]
    cred = pr.issue_cred(params, issuers[0], [33, 4], rng)
    view = [i.bundle() for i in issuers]
    c, w = witness_assemble(cred, PHI, view, SIZES)
    return Statement(PHI, c, b"session-1"), w


@pytest.fixture(scope="module")
def g16():
    pp = zk.zk_setup(1 << 14, b"zk-tests")
    return pp, zk.zk_keygen(pp, RelationDescription.for_predicate(PHI, SIZES))


def test_setup_validation():
    with pytest.raises(ValueError):
        zk.zk_setup(1000)
    with pytest.raises(ValueError):
        zk.zk_setup(1 << 10, backend="plonk")
    with pytest.raises(ValueError):
        zk.zk_setup(1 << 10, security=256)
    pp = zk.zk_setup(1 << 12, b"s", zk.TRANSPARENT)
    assert zk.ZkParams.from_bytes(pp.to_bytes()) == pp
    assert pp.to_bytes()[0] == zk.BACKEND_IDS[zk.TRANSPARENT]
    assert zk.zk_setup(1 << 12, b"s", zk.TRANSPARENT) == pp
    # unseeded setups draw a fresh trapdoor each time
    assert zk.zk_setup(1 << 12) != zk.zk_setup(1 << 12)


def test_capacity():
    pp = zk.zk_setup(1 << 10, backend=zk.TRANSPARENT)
    with pytest.raises(zk.CircuitTooLarge):
        zk.zk_keygen(pp, RelationDescription.for_predicate(PHI, SIZES))


def test_transparent_round_trip(instance):
    stmt, w = instance
    pp = zk.zk_setup(1 << 14, backend=zk.TRANSPARENT)
    pk, vk = zk.zk_keygen(pp, RelationDescription.for_predicate(PHI, SIZES))
    proof = zk.zk_prove(pk, stmt, w)
    assert zk.zk_verify(vk, stmt, proof)
    assert not zk.zk_verify(vk, replace(stmt, ctx=b"session-2"), proof)
    assert not zk.zk_verify(vk, stmt, b"\x01" + proof[1:])
    assert not zk.zk_verify(vk, stmt, proof[:-1])
    with pytest.raises(zk.UnsatisfiedWitness):
        zk.zk_prove(pk, replace(stmt, c=stmt.c ^ 1), w)
    with pytest.raises(ValueError):
        zk.zk_prove(pk, replace(stmt, predicate=conj(MemberOf(1, (33,)))), w)


def test_keys_are_deterministic(g16):
    pp, (pk, vk) = g16
    desc = RelationDescription.for_predicate(PHI, SIZES)
    zk._cache.clear()
    _, vk2 = zk.zk_keygen(pp, desc)
    assert vk2.to_bytes() == vk.to_bytes()
    # only the shape matters, not the constants
    zk._cache.clear()
    _, vk3 = zk.zk_keygen(pp, RelationDescription.for_predicate(conj(Compare(1, ">", 65)), SIZES))
    assert vk3.to_bytes() == vk.to_bytes()
    _, other = zk.zk_keygen(zk.zk_setup(1 << 14, b"other"), desc)
    assert other.to_bytes() != vk.to_bytes()


def test_trapdoor_stays_private(g16, instance):
    pp, (pk, vk) = g16
    assert pp.trapdoor not in pp.to_bytes()
    assert pp.trapdoor not in repr(pp).encode()
    public = zk.ZkParams.from_bytes(pp.to_bytes())
    assert public.trapdoor is None and public == pp
    with pytest.raises(ValueError):
        public.with_trapdoor(b"\x00" * 32)
    assert public.with_trapdoor(pp.trapdoor).trapdoor == pp.trapdoor

    desc = RelationDescription.for_predicate(PHI, SIZES)
    published = zk.export_keys(pp, desc)
    zk._cache.clear()
    with pytest.raises(zk.KeysUnavailable):
        zk.zk_keygen(public, desc)
    other = RelationDescription.for_predicate(conj(MemberOf(1, (1, 2))), SIZES)
    with pytest.raises(ValueError):
        zk.import_keys(public, other, published)
    with pytest.raises(ValueError):
        zk.import_keys(zk.zk_setup(1 << 14, b"elsewhere"), desc, published)
    zk.import_keys(public, desc, published)
    pk2, vk2 = zk.zk_keygen(public, desc)
    assert vk2.to_bytes() == vk.to_bytes()
    stmt, w = instance
    assert zk.zk_verify(vk, stmt, zk.zk_prove(pk2, stmt, w))


def test_groth16_prove_verify(g16, instance):
    stmt, w = instance
    _, (pk, vk) = g16
    rng = random.Random(1)
    p1 = zk.zk_prove(pk, stmt, w, rng)
    p2 = zk.zk_prove(pk, stmt, w)
    assert len(p1) == len(p2) == 129
    assert p1 != p2
    assert zk.zk_verify(vk, stmt, p1) and zk.zk_verify(vk, stmt, p2)
    assert zk.zk_prove(pk, stmt, w, random.Random(1)) == p1

    vk_copy = zk.VerifierKey.from_bytes(vk.to_bytes())
    assert zk.zk_verify(vk_copy, stmt, p1)

    assert not zk.zk_verify(vk, replace(stmt, ctx=b"session-2"), p1)
    assert not zk.zk_verify(vk, replace(stmt, c=stmt.c ^ 1), p1)
    assert not zk.zk_verify(vk, replace(stmt, predicate=conj(Compare(1, ">", 17))), p1)
    assert not zk.zk_verify(vk, stmt, b"")
    assert not zk.zk_verify(vk, stmt, b"\x7f" + p1[1:])
    for k in range(1, len(p1), 7):
        raw = bytearray(p1)
        raw[k] ^= 0x10
        assert not zk.zk_verify(vk, stmt, bytes(raw))


def test_backends_agree(g16, instance):
    stmt, w = instance
    _, (gpk, gvk) = g16
    pp = zk.zk_setup(1 << 14, backend=zk.TRANSPARENT)
    tpk, tvk = zk.zk_keygen(pp, RelationDescription.for_predicate(PHI, SIZES))
    corpus = [
        stmt,
        replace(stmt, ctx=b""),
        replace(stmt, c=(stmt.c + 1)),
        replace(stmt, predicate=conj(Compare(1, ">", 40))),
    ]
    gp, tp = zk.zk_prove(gpk, stmt, w), zk.zk_prove(tpk, stmt, w)
    for s in corpus:
        assert zk.zk_verify(gvk, s, gp) == zk.zk_verify(tvk, s, tp)
    assert [zk.zk_verify(tvk, s, tp) for s in corpus] == [True, False, False, False]


def test_concurrent_verification(g16, instance):
    stmt, w = instance
    _, (pk, vk) = g16
    proof = zk.zk_prove(pk, stmt, w)
    results = []

    def work():
        _, vk_again = zk.zk_keygen(g16[0], RelationDescription.for_predicate(PHI, SIZES))
        results.append(zk.zk_verify(vk_again, stmt, proof))

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results == [True] * 8
