"""The presentation relation: statement/witness model, a direct checker,
and the equivalent rank-1 constraint system.

A statement is ``(predicate, c, ctx)`` where ``c`` commits to the hiding
set. A witness holds one credential commitment and signature, the issuer's
key, revocation root and its opening in ``c``, one attribute opening per
required attribute, and a revocation gap ``(i_l, h_l, h_r)`` with openings
at ``i_l`` and ``i_l + 1``. :func:`relation_check` accepts exactly when

* every opened ``(idx, value)`` pair is in the credential commitment,
* the predicate holds on the opened values,
* the signature verifies on the credential commitment,
* ``(pk, c_r)`` is opened in ``c``,
* ``h_l`` and ``h_r`` are adjacent entries of ``c_r``, and
* ``h_l < credential_hash < h_r``.

``NotInSortedList`` clauses carry their own gap witness against the
committed list.
"""

from dataclasses import dataclass, field

from . import gadgets, poseidon, vc
from .credential import (
    attribute_tree,
    canonical_view,
    credential_hash,
    find_gap,
    is_field,
    issuer_set_tree,
    revocation_root,
    sorted_list_tree,
)
from .encoding import FIELD, decode, encode
from .field import FIELD_BITS, P, Q
from .predicate import (
    Compare,
    MemberOf,
    NotInSortedList,
    Predicate,
    pred_eval,
    pred_required_attrs,
    pred_shape_id,
    required_order,
)
from .r1cs import LC, ONE, Builder, ConstraintSystem
from .signature import Signature, VerifyingKey, sig_verify


class IssuerNotInSet(LookupError):
    pass


class AttributeNotCovered(LookupError):
    pass


class PredicateUnsatisfied(ValueError):
    pass


class UnsupportedShape(ValueError):
    pass


@dataclass(frozen=True)
class Sizes:
    n_a: int
    n_r: int
    n_i: int

    def __post_init__(self):
        for n in (self.n_a, self.n_r, self.n_i):
            if n < 2 or n & (n - 1):
                raise ValueError("vector sizes must be powers of two, at least 2")

    @property
    def attr(self):
        return vc.vc_setup(self.n_a, vc.ATTR)

    @property
    def rev(self):
        return vc.vc_setup(self.n_r, vc.REVOCATION)

    @property
    def issuer(self):
        return vc.vc_setup(self.n_i, vc.ISSUER)


@dataclass(frozen=True)
class Statement:
    predicate: Predicate
    c: int
    ctx: bytes


@dataclass(frozen=True)
class AttrOpening:
    position: int
    idx: int
    value: int
    proof: vc.OpeningProof


@dataclass(frozen=True)
class Gap:
    i_l: int
    h_l: int
    h_r: int
    proof_l: vc.OpeningProof
    proof_r: vc.OpeningProof


@dataclass(frozen=True)
class Witness:
    c_a: int
    sig: Signature
    issuer_index: int
    pk: VerifyingKey
    c_r: int
    issuer_proof: vc.OpeningProof
    attrs: tuple
    gap: Gap
    # one gap per NotInSortedList clause, in clause order
    list_gaps: tuple = field(default=())


@dataclass(frozen=True)
class RelationDescription:
    shape_id: bytes
    sizes: Sizes
    num_attrs: int
    bit_width: int
    # (kind, op-or-size, attribute position) per clause
    clauses: tuple

    @classmethod
    def for_predicate(cls, phi: Predicate, sizes: Sizes) -> "RelationDescription":
        order = required_order(phi)
        clauses = []
        for c in phi.clauses:
            pos = order.index(c.idx)
            if isinstance(c, Compare):
                clauses.append(("cmp", c.op, pos))
            elif isinstance(c, MemberOf):
                clauses.append(("in", len(c.values), pos))
            elif isinstance(c, NotInSortedList):
                clauses.append(("notin", c.depth, pos))
            else:
                raise UnsupportedShape(f"clause {c!r}")
        return cls(
            pred_shape_id(phi, sizes.n_a, sizes.n_r, sizes.n_i),
            sizes,
            len(order),
            phi.bit_width,
            tuple(clauses),
        )


def ctx_field(ctx: bytes) -> int:
    return poseidon.hash_to_field(ctx)


def list_root(clause: NotInSortedList) -> int:
    return sorted_list_tree(clause.values, 1 << clause.depth).root


def public_inputs(stmt: Statement) -> list[int]:
    """Fixed-order public inputs: ``c``, ``H(ctx)``, required indices, then
    clause constants (comparison constant, set members, or list root)."""
    phi = stmt.predicate
    out = [stmt.c, ctx_field(stmt.ctx)]
    out.extend(required_order(phi))
    for c in phi.clauses:
        if isinstance(c, Compare):
            out.append(c.const)
        elif isinstance(c, MemberOf):
            out.extend(c.values)
        else:
            out.append(list_root(c))
    return out


# -- direct check -------------------------------------------------------------


def relation_check(stmt: Statement, w: Witness, sizes: Sizes) -> bool:
    try:
        return _check(stmt, w, sizes)
    except (TypeError, ValueError, AttributeError, KeyError, IndexError):
        return False


def _check(stmt: Statement, w: Witness, sizes: Sizes) -> bool:
    phi = stmt.predicate
    if not (is_field(w.c_a) and is_field(w.c_r) and is_field(stmt.c)):
        return False
    # (a) one opening per required attribute, in ascending index order
    order = required_order(phi)
    if [a.idx for a in w.attrs] != order:
        return False
    assignment = {}
    for a in w.attrs:
        if not (is_field(a.idx) and is_field(a.value)):
            return False
        if not vc.vc_verify(sizes.attr, w.c_a, a.position, (a.idx, a.value), a.proof):
            return False
        assignment[a.idx] = a.value
    # (b) predicate; list clauses also need their gap openings
    if not pred_eval(phi, assignment):
        return False
    lists = [c for c in phi.clauses if isinstance(c, NotInSortedList)]
    if len(w.list_gaps) != len(lists):
        return False
    for clause, g in zip(lists, w.list_gaps):
        params = vc.vc_setup(1 << clause.depth, vc.REVOCATION)
        if not _gap_ok(params, list_root(clause), g, assignment[clause.idx]):
            return False
    # (c) signature on the attribute commitment
    if not sig_verify(w.pk, w.c_a, w.sig):
        return False
    # (d) issuer key and revocation root are committed in c
    leaf = (w.pk.digest(), w.c_r)
    if not vc.vc_verify(sizes.issuer, stmt.c, w.issuer_index, leaf, w.issuer_proof):
        return False
    # (e)-(g) adjacent revocation entries around the credential hash
    return _gap_ok(sizes.rev, w.c_r, w.gap, credential_hash(w.c_a, w.sig))


def _gap_ok(params, root: int, g: Gap, h: int) -> bool:
    if not (is_field(g.h_l) and is_field(g.h_r)):
        return False
    if not vc.vc_verify(params, root, g.i_l, g.h_l, g.proof_l):
        return False
    if not vc.vc_verify(params, root, g.i_l + 1, g.h_r, g.proof_r):
        return False
    return g.h_l < h < g.h_r


# -- witness assembly ------------------------------------------------------------


def gap_witness(tree: vc.MerkleTree, h: int) -> Gap:
    i = find_gap(tree, h)
    return Gap(i, tree.element(i), tree.element(i + 1), tree.open(i), tree.open(i + 1))


def issuer_entries(view, sizes: Sizes) -> list:
    """Canonically ordered ``(pk, recomputed c_r)`` pairs of a hiding set."""
    return [(b.pk, revocation_root(b.revoked, sizes.n_r)) for b in canonical_view(view)]


def issuer_set_commitment(view, sizes: Sizes) -> int:
    entries = issuer_entries(view, sizes)
    if len(entries) > sizes.n_i:
        raise vc.VectorTooLong(f"hiding set of {len(entries)} exceeds n_I={sizes.n_i}")
    return issuer_set_tree(entries, sizes.n_i).root


def check_coverage(phi: Predicate, view) -> None:
    need = pred_required_attrs(phi)
    for b in view:
        missing = need - set(b.attrs)
        if missing:
            raise AttributeNotCovered(
                f"issuer lacks attribute(s) {sorted(missing)} required by the predicate"
            )


def witness_assemble(cred, phi: Predicate, view, sizes: Sizes) -> tuple[int, Witness]:
    """Build the witness for presenting ``cred``; returns ``(c, witness)``."""
    view = canonical_view(view)
    if len(view) > sizes.n_i:
        raise vc.VectorTooLong(f"hiding set of {len(view)} exceeds n_I={sizes.n_i}")
    keys = [b.pk for b in view]
    if cred.issuer not in keys:
        raise IssuerNotInSet("credential issuer is not in the hiding set")
    check_coverage(phi, view)
    own = view[keys.index(cred.issuer)]
    if tuple(own.attrs) != tuple(cred.attrs):
        raise AttributeNotCovered("credential does not match its issuer's attribute list")

    pairs = cred.pairs()
    atree = attribute_tree(pairs, sizes.n_a)
    positions = {idx: p for p, idx in enumerate(cred.attrs)}
    attrs = []
    for idx in required_order(phi):
        if idx not in positions:
            raise AttributeNotCovered(f"credential has no attribute {idx}")
        p = positions[idx]
        attrs.append(AttrOpening(p, idx, cred.values[p], atree.open(p)))
    assignment = {a.idx: a.value for a in attrs}
    if not pred_eval(phi, assignment):
        raise PredicateUnsatisfied("credential attributes do not satisfy the predicate")
    list_gaps = []
    for clause in phi.clauses:
        if isinstance(clause, NotInSortedList):
            tree = sorted_list_tree(clause.values, 1 << clause.depth)
            list_gaps.append(gap_witness(tree, assignment[clause.idx]))

    entries = []
    rev_trees = {}
    for b in view:
        t = sorted_list_tree(b.revoked, sizes.n_r)
        rev_trees[b.pk] = t
        entries.append((b.pk, t.root))
    itree = issuer_set_tree(entries, sizes.n_i)
    i_i = keys.index(cred.issuer)
    rtree = rev_trees[cred.issuer]
    h = credential_hash(cred.c_a, cred.sig)
    gap = gap_witness(rtree, h)  # raises Revoked
    w = Witness(
        cred.c_a, cred.sig, i_i, cred.issuer, rtree.root, itree.open(i_i),
        tuple(attrs), gap, tuple(list_gaps),
    )
    return itree.root, w


# -- constraint system -------------------------------------------------------------


def _dummy_proof(index: int, depth: int) -> vc.OpeningProof:
    return vc.OpeningProof(index, (0,) * depth)


def placeholder(desc: RelationDescription) -> tuple[list, Witness]:
    """Public inputs and witness of the right shape with meaningless values."""
    s = desc.sizes
    gap_r = Gap(0, 0, 0, _dummy_proof(0, s.rev.depth), _dummy_proof(1, s.rev.depth))
    attrs = tuple(
        AttrOpening(0, 0, 0, _dummy_proof(0, s.attr.depth)) for _ in range(desc.num_attrs)
    )
    list_gaps = tuple(
        Gap(0, 0, 0, _dummy_proof(0, size), _dummy_proof(1, size))
        for kind, size, _ in desc.clauses if kind == "notin"
    )
    w = Witness(0, Signature(0, 0, 0), 0, VerifyingKey(0, 0), 0,
                _dummy_proof(0, s.issuer.depth), attrs, gap_r, list_gaps)
    n_pub = 2 + desc.num_attrs + sum(
        size if kind == "in" else 1 for kind, size, _ in desc.clauses
    )
    return [0] * n_pub, w


def _index_bits(cs: Builder, index: int, depth: int):
    var = _priv(cs, index)
    return var, gadgets.to_bits(cs, var, depth)


def _label(cs: Builder, proof: vc.OpeningProof, index: LC) -> None:
    # the opening names its own position; hold it to the one being proved
    cs.assert_equal(_priv(cs, proof.index), index)


def _path(cs: Builder, leaf: LC, index: int, proof: vc.OpeningProof, depth: int):
    var, bits = _index_bits(cs, index, depth)
    _label(cs, proof, var)
    sibs = [_priv(cs, s) for s in proof.siblings]
    return gadgets.merkle_root(cs, leaf, bits, sibs)


def _gap(cs: Builder, depth: int, root: LC, g: Gap, h_bits) -> None:
    i_l, bits_l = _index_bits(cs, g.i_l, depth)
    bits_r = gadgets.to_bits(cs, i_l + 1, depth)
    h_l = _priv(cs, g.h_l)
    h_r = _priv(cs, g.h_r)
    sib_l = [_priv(cs, s) for s in g.proof_l.siblings]
    sib_r = [_priv(cs, s) for s in g.proof_r.siblings]
    _label(cs, g.proof_l, i_l)
    _label(cs, g.proof_r, i_l + 1)
    cs.assert_equal(gadgets.merkle_root(cs, h_l, bits_l, sib_l), root)
    cs.assert_equal(gadgets.merkle_root(cs, h_r, bits_r, sib_r), root)
    lo_bits = gadgets.field_bits(cs, h_l)
    hi_bits = gadgets.field_bits(cs, h_r)
    cs.assert_equal(gadgets.less_than_wide(cs, lo_bits, h_bits), ONE)
    cs.assert_equal(gadgets.less_than_wide(cs, h_bits, hi_bits), ONE)


def _fits(proof: vc.OpeningProof, depth: int) -> vc.OpeningProof:
    if len(proof.siblings) != depth:
        raise ValueError("opening proof has the wrong depth")
    return proof


def _priv(cs: Builder, v: int) -> LC:
    if not isinstance(v, int) or not 0 <= v < P:
        raise ValueError("witness values must be canonical field elements")
    return cs.private(v)


def synthesize(desc: RelationDescription, pub: list, w: Witness) -> tuple[ConstraintSystem, list]:
    """Emit the constraint system and the assignment induced by ``(pub, w)``."""
    s = desc.sizes
    if any(not 0 <= x < P for x in pub):
        raise ValueError("public inputs must be canonical field elements")
    cs = Builder()
    pub_vars = [cs.public(x) for x in pub]
    c_pub, ctx_pub = pub_vars[0], pub_vars[1]
    idx_pub = pub_vars[2 : 2 + desc.num_attrs]
    consts = pub_vars[2 + desc.num_attrs :]
    # ctx is not otherwise used; squaring it keeps the input bound to the proof
    cs.mul(ctx_pub, ctx_pub)

    if len(w.attrs) != desc.num_attrs:
        raise UnsupportedShape("witness does not match the relation shape")

    c_a = _priv(cs, w.c_a)
    values = []
    for a, idx_var in zip(w.attrs, idx_pub):
        idx = _priv(cs, a.idx)
        cs.assert_equal(idx, idx_var)
        v = _priv(cs, a.value)
        values.append(v)
        leaf = gadgets.hash2(cs, idx, v, poseidon.DOMAIN_ATTR_LEAF)
        root = _path(cs, leaf, a.position, _fits(a.proof, s.attr.depth), s.attr.depth)
        cs.assert_equal(root, c_a)

    k = 0
    list_gaps = iter(w.list_gaps)
    for kind, size, pos in desc.clauses:
        v = values[pos]
        if kind == "cmp":
            _compare(cs, size, v, consts[k], desc.bit_width)
            k += 1
        elif kind == "in":
            members = consts[k : k + size]
            k += size
            prod = v - members[0]
            for m in members[1:-1]:
                prod = cs.mul(prod, v - m)
            if size > 1:
                cs.enforce(prod, v - members[-1], LC())
            else:
                cs.assert_equal(prod, LC())
        elif kind == "notin":
            root = consts[k]
            k += 1
            g = next(list_gaps)
            g = Gap(g.i_l, g.h_l, g.h_r, _fits(g.proof_l, size), _fits(g.proof_r, size))
            _gap(cs, size, root, g, gadgets.field_bits(cs, v))
        else:
            raise UnsupportedShape(kind)

    rx = _priv(cs, w.sig.rx)
    ry = _priv(cs, w.sig.ry)
    s_bits = gadgets.to_bits(cs, _priv(cs, w.sig.s), FIELD_BITS)
    cs.assert_equal(gadgets.less_than_wide(cs, s_bits, Q), ONE)
    pkx = _priv(cs, w.pk.x)
    pky = _priv(cs, w.pk.y)
    gadgets.schnorr_verify(cs, (pkx, pky), c_a, rx, ry, s_bits)

    c_r = _priv(cs, w.c_r)
    digest = gadgets.hash2(cs, pkx, pky, poseidon.DOMAIN_MISC)
    leaf = gadgets.hash2(cs, digest, c_r, poseidon.DOMAIN_ISSUER_LEAF)
    root = _path(cs, leaf, w.issuer_index, _fits(w.issuer_proof, s.issuer.depth), s.issuer.depth)
    cs.assert_equal(root, c_pub)

    s_lo = gadgets.from_bits(s_bits[:128])
    s_hi = gadgets.from_bits(s_bits[128:])
    h = gadgets.hash_fields(cs, [c_a, rx, ry, s_lo, s_hi], poseidon.DOMAIN_CREDENTIAL)
    g = w.gap
    g = Gap(g.i_l, g.h_l, g.h_r, _fits(g.proof_l, s.rev.depth), _fits(g.proof_r, s.rev.depth))
    _gap(cs, s.rev.depth, c_r, g, gadgets.field_bits(cs, h))
    return cs.finish()


def _compare(cs: Builder, op: str, v: LC, const: LC, width: int) -> None:
    if op == "==":
        cs.assert_equal(v, const)
    elif op == "!=":
        gadgets.assert_nonzero(cs, v - const)
    else:
        gadgets.to_bits(cs, v, width)
        diff = {
            "<": const - v - 1,
            "<=": const - v,
            ">": v - const - 1,
            ">=": v - const,
        }[op]
        gadgets.to_bits(cs, diff, width)


def relation_build(desc: RelationDescription) -> ConstraintSystem:
    pub, w = placeholder(desc)
    cs, _ = synthesize(desc, pub, w)
    return cs


def assign(stmt: Statement, w: Witness, sizes: Sizes) -> tuple[ConstraintSystem, list]:
    desc = RelationDescription.for_predicate(stmt.predicate, sizes)
    return synthesize(desc, public_inputs(stmt), w)


def circuit_accepts(stmt: Statement, w: Witness, sizes: Sizes) -> bool:
    try:
        cs, z = assign(stmt, w, sizes)
    except (UnsupportedShape, StopIteration, TypeError, AttributeError, ValueError):
        return False
    return cs.is_satisfied(z)


# -- witness serialization (used by the transparent backend) ----------------------

_PROOF = (FIELD, [FIELD])
_GAP = (FIELD, FIELD, FIELD, _PROOF, _PROOF)
WITNESS_SCHEMA = (
    FIELD, (FIELD, FIELD, FIELD), FIELD, (FIELD, FIELD), FIELD, _PROOF,
    [(FIELD, FIELD, FIELD, _PROOF)], _GAP, [_GAP],
)


def _p(proof):
    return (proof.index, list(proof.siblings))


def _g(g: Gap):
    return (g.i_l, g.h_l, g.h_r, _p(g.proof_l), _p(g.proof_r))


def witness_to_bytes(w: Witness) -> bytes:
    return encode((
        w.c_a, (w.sig.rx, w.sig.ry, w.sig.s), w.issuer_index, (w.pk.x, w.pk.y),
        w.c_r, _p(w.issuer_proof),
        [(a.position, a.idx, a.value, _p(a.proof)) for a in w.attrs],
        _g(w.gap), [_g(g) for g in w.list_gaps],
    ))


def witness_from_bytes(data: bytes) -> Witness:
    c_a, sig, i_i, pk, c_r, ip, attrs, gap, lgaps = decode(data, WITNESS_SCHEMA)

    def p(t):
        return vc.OpeningProof(t[0], tuple(t[1]))

    def g(t):
        return Gap(t[0], t[1], t[2], p(t[3]), p(t[4]))

    return Witness(
        c_a, Signature(*sig), i_i, VerifyingKey(*pk), c_r, p(ip),
        tuple(AttrOpening(a[0], a[1], a[2], p(a[3])) for a in attrs),
        g(gap), tuple(g(t) for t in lgaps),
    )
