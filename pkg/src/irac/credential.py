"""Credential and issuer-bundle records shared by the relation and protocol
layers, plus the commitment layouts they are hashed into."""

import bisect
import functools
from dataclasses import dataclass

from . import poseidon, vc
from .encoding import FIELD, decode, encode
from .field import P, SENTINEL
from .signature import Signature, VerifyingKey


class Revoked(Exception):
    """The credential hash is on its issuer's revocation list."""


@dataclass(frozen=True)
class Credential:
    """Attribute values aligned with the issuer's attribute indices."""

    issuer: VerifyingKey
    attrs: tuple
    values: tuple
    sig: Signature
    c_a: int

    def pairs(self) -> list:
        return list(zip(self.attrs, self.values))

    def to_bytes(self) -> bytes:
        return encode((
            self.issuer.to_bytes(),
            list(self.attrs),
            list(self.values),
            self.sig.to_bytes(),
            self.c_a,
        ))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Credential":
        pk, attrs, values, sig, c_a = decode(
            data, ("bytes", [FIELD], [FIELD], "bytes", FIELD)
        )
        return cls(VerifyingKey.from_bytes(pk), tuple(attrs), tuple(values),
                   Signature.from_bytes(sig), c_a)


@dataclass(frozen=True)
class IssuerBundle:
    """What an issuer publishes: key, attribute subset, revocation list.

    ``c_r`` is the issuer's claimed revocation root; verifiers recompute it
    from ``revoked`` instead of trusting it.
    """

    pk: VerifyingKey
    attrs: tuple
    revoked: tuple
    c_r: int

    def to_bytes(self) -> bytes:
        return encode((self.pk.to_bytes(), list(self.attrs), list(self.revoked), self.c_r))

    @classmethod
    def from_bytes(cls, data: bytes) -> "IssuerBundle":
        pk, attrs, revoked, c_r = decode(data, ("bytes", [FIELD], [FIELD], FIELD))
        return cls(VerifyingKey.from_bytes(pk), tuple(attrs), tuple(revoked), c_r)


def attribute_vector(pairs, n_a: int) -> list:
    """Index/value pairs padded with ``(0, 0)`` to length ``n_a``."""
    if len(pairs) > n_a:
        raise vc.VectorTooLong(f"{len(pairs)} attributes exceed n_a={n_a}")
    return list(pairs) + [(0, 0)] * (n_a - len(pairs))


def attribute_tree(pairs, n_a: int) -> vc.MerkleTree:
    return vc.MerkleTree(vc.vc_setup(n_a, vc.ATTR), pairs)


def attribute_commitment(pairs, n_a: int) -> int:
    return attribute_tree(pairs, n_a).root


def credential_hash(c_a: int, sig: Signature) -> int:
    """Hash of ``(c_a, sigma)`` in the open interval ``(0, P-1)``."""
    return poseidon.hash_fields_to_field([c_a, *sig.fields()], poseidon.DOMAIN_CREDENTIAL)


def sorted_layout(entries) -> list:
    """``[0, sorted entries...]``; the tree pads the tail with ``P - 1``."""
    entries = sorted(set(entries))
    if any(not 0 < e < SENTINEL for e in entries):
        raise ValueError("list entries must lie strictly inside (0, P-1)")
    return [0, *entries]


def sorted_list_tree(entries, n: int) -> vc.MerkleTree:
    return _sorted_list_tree(tuple(entries), n)


# verifiers recompute the same lists on every presentation
@functools.lru_cache(maxsize=64)
def _sorted_list_tree(entries: tuple, n: int) -> vc.MerkleTree:
    layout = sorted_layout(entries)
    if len(layout) > n - 1:
        raise vc.VectorTooLong(f"{len(entries)} entries need more than {n} slots")
    return vc.MerkleTree(vc.vc_setup(n, vc.REVOCATION), layout, fill=SENTINEL)


def revocation_root(revoked, n_r: int) -> int:
    return sorted_list_tree(revoked, n_r).root


def find_gap(tree: vc.MerkleTree, h: int) -> int:
    """Position ``i`` with ``layout[i] < h < layout[i+1]``.

    Raises :class:`Revoked` when ``h`` is itself an entry (or a reserved
    boundary value).
    """
    layout = tree.elements
    if not 0 < h < SENTINEL:
        raise Revoked(f"{h:#x} is a reserved boundary value")
    pos = bisect.bisect_left(layout, h)
    if pos < len(layout) and layout[pos] == h:
        raise Revoked(f"{h:#x} is on the list")
    i = pos - 1
    if i + 1 >= tree.params.n:
        raise Revoked(f"{h:#x} has no right neighbour")
    return i


def canonical_view(bundles) -> list:
    """De-duplicate by key and order by the key's canonical encoding."""
    seen = {}
    for b in bundles:
        seen.setdefault(b.pk.to_bytes(), b)
    return [seen[k] for k in sorted(seen)]


def issuer_set_tree(entries, n_i: int) -> vc.MerkleTree:
    """Commit to ``(pk digest, revocation root)`` pairs, already ordered."""
    leaves = [(pk.digest(), c_r) for pk, c_r in entries]
    return vc.MerkleTree(vc.vc_setup(n_i, vc.ISSUER), leaves)


def is_field(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool) and 0 <= x < P
