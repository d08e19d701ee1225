"""Issuer, holder and verifier operations.

State is immutable: every mutating operation returns a new snapshot, so
readers can keep using an old one while a single writer applies
revocations.
"""

import bisect
from dataclasses import dataclass, field, replace

from . import credential as cr
from . import zk
from .encoding import BYTES, decode, encode
from .field import SENTINEL
from .predicate import Predicate
from .relation import (
    AttributeNotCovered,
    IssuerNotInSet,
    PredicateUnsatisfied,
    RelationDescription,
    Sizes,
    Statement,
    check_coverage,
    issuer_set_commitment,
    witness_assemble,
)
from .signature import SigningKey, VerifyingKey, sig_keygen, sig_sign, sig_verify

Credential = cr.Credential
IssuerBundle = cr.IssuerBundle
Revoked = cr.Revoked

# Generous enough for the 2^7 / 2^15 / 2^10 configuration with a few clauses.
DEFAULT_MAX_CONSTRAINTS = 1 << 16


class DuplicateAttributeName(ValueError):
    pass


class UnknownAttribute(KeyError):
    pass


class TooManyAttributes(ValueError):
    pass


class ValueOutOfRange(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class RevocationCapacityExceeded(ValueError):
    pass


class HidingSetTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SystemParams:
    security: int
    sizes: Sizes
    zk: zk.ZkParams

    @property
    def n_a(self):
        return self.sizes.n_a

    @property
    def n_r(self):
        return self.sizes.n_r

    @property
    def n_i(self):
        return self.sizes.n_i

    def public(self) -> "SystemParams":
        """The parameters without the proving-system trapdoor."""
        return replace(self, zk=self.zk.public())

    def to_bytes(self) -> bytes:
        s = self.sizes
        return encode((self.security, (s.n_a, s.n_r, s.n_i), self.zk.to_bytes()))

    @classmethod
    def from_bytes(cls, data: bytes) -> "SystemParams":
        sec, sizes, zkp = decode(data, ("field", ("field",) * 3, BYTES))
        return cls(sec, Sizes(*sizes), zk.ZkParams.from_bytes(zkp))


@dataclass(frozen=True)
class AttributeUniverse:
    names: tuple = ()

    def index(self, name: str) -> int:
        try:
            return self.names.index(name) + 1
        except ValueError:
            raise UnknownAttribute(name) from None

    def name(self, idx: int) -> str:
        if not 1 <= idx <= len(self.names):
            raise UnknownAttribute(idx)
        return self.names[idx - 1]

    def __len__(self):
        return len(self.names)

    def to_bytes(self) -> bytes:
        return encode([n.encode() for n in self.names])

    @classmethod
    def from_bytes(cls, data: bytes) -> "AttributeUniverse":
        return cls(tuple(n.decode() for n in decode(data, [BYTES])))


@dataclass(frozen=True)
class IssuerState:
    sk: SigningKey
    pk: VerifyingKey
    attrs: tuple
    revoked: tuple = ()
    c_r: int = field(default=0)

    def bundle(self) -> IssuerBundle:
        """The public part: never contains the signing key."""
        return IssuerBundle(self.pk, self.attrs, self.revoked, self.c_r)

    def to_bytes(self) -> bytes:
        return encode((self.sk.to_bytes(), self.bundle().to_bytes()))

    @classmethod
    def from_bytes(cls, data: bytes) -> "IssuerState":
        sk, b = decode(data, (BYTES, BYTES))
        b = IssuerBundle.from_bytes(b)
        return cls(SigningKey(decode(sk, "field")), b.pk, b.attrs, b.revoked, b.c_r)


@dataclass(frozen=True)
class PresentationToken:
    shape_id: bytes
    proof: bytes

    def to_bytes(self) -> bytes:
        return encode((self.shape_id, self.proof))

    @classmethod
    def from_bytes(cls, data: bytes) -> "PresentationToken":
        return cls(*decode(data, (BYTES, BYTES)))


def _check_size(n):
    if n < 2 or n & (n - 1):
        raise ValueError(f"size {n} must be a power of two, at least 2")


def setup(security: int = 128, n_a: int = 1 << 7, n_r: int = 1 << 15, n_i: int = 1 << 10,
          backend: str = zk.GROTH16, seed: bytes = b"",
          max_constraints: int = DEFAULT_MAX_CONSTRAINTS):
    for n in (n_a, n_r, n_i):
        _check_size(n)
    pp_z = zk.zk_setup(max_constraints, seed, backend, security)
    return SystemParams(security, Sizes(n_a, n_r, n_i), pp_z), AttributeUniverse()


def add_attributes(universe: AttributeUniverse, names) -> AttributeUniverse:
    names = list(names)
    taken = set(universe.names)
    for n in names:
        if n in taken:
            raise DuplicateAttributeName(n)
        taken.add(n)
    return AttributeUniverse(universe.names + tuple(names))


def issuer_setup(params: SystemParams, universe: AttributeUniverse, chosen,
                 rng=None) -> IssuerState:
    """``chosen`` lists attribute names or 1-based indices."""
    idxs = []
    for a in chosen:
        idx = universe.index(a) if isinstance(a, str) else int(a)
        universe.name(idx)
        if idx not in idxs:
            idxs.append(idx)
    if len(idxs) > params.n_a:
        raise TooManyAttributes(f"{len(idxs)} attributes exceed n_a={params.n_a}")
    sk, pk = sig_keygen(rng)
    return IssuerState(sk, pk, tuple(idxs), (), cr.revocation_root((), params.n_r))


def issue_cred(params: SystemParams, issuer: IssuerState, values, rng=None) -> Credential:
    values = tuple(values)
    if len(values) != len(issuer.attrs):
        raise LengthMismatch(f"{len(values)} values for {len(issuer.attrs)} attributes")
    for v in values:
        if not cr.is_field(v):
            raise ValueOutOfRange(v)
    c_a = cr.attribute_commitment(list(zip(issuer.attrs, values)), params.n_a)
    sig = sig_sign(issuer.sk, c_a, rng)
    return Credential(issuer.pk, issuer.attrs, values, sig, c_a)


def verify_cred(params: SystemParams, cred: Credential, pk: VerifyingKey, attrs) -> bool:
    try:
        attrs = tuple(attrs)
        if tuple(cred.attrs) != attrs or len(cred.values) != len(attrs):
            return False
        if not all(cr.is_field(v) for v in cred.values):
            return False
        c_a = cr.attribute_commitment(list(zip(attrs, cred.values)), params.n_a)
        return sig_verify(pk, c_a, cred.sig)
    except (ValueError, TypeError):
        return False


def credential_hash(cred: Credential) -> int:
    return cr.credential_hash(cred.c_a, cred.sig)


def revoke(params: SystemParams, issuer: IssuerState, cred) -> IssuerState:
    """Insert the credential's hash (or a raw hash) into the sorted list."""
    h = cred if isinstance(cred, int) else credential_hash(cred)
    if not 0 < h < SENTINEL:
        raise ValueError("revocation entries must lie strictly inside (0, P-1)")
    rl = list(issuer.revoked)
    pos = bisect.bisect_left(rl, h)
    if pos < len(rl) and rl[pos] == h:
        return issuer
    if len(rl) >= params.n_r - 2:
        raise RevocationCapacityExceeded(f"revocation list is full ({len(rl)} entries)")
    rl.insert(pos, h)
    return replace(issuer, revoked=tuple(rl), c_r=cr.revocation_root(rl, params.n_r))


def _view(params: SystemParams, view) -> list:
    view = cr.canonical_view(view)
    if len(view) > params.n_i:
        raise HidingSetTooLarge(f"{len(view)} issuers exceed n_I={params.n_i}")
    return view


def present_cred(params: SystemParams, cred: Credential, phi: Predicate, ctx: bytes,
                 view, rng=None) -> PresentationToken:
    view = _view(params, view)
    c, w = witness_assemble(cred, phi, view, params.sizes)
    desc = RelationDescription.for_predicate(phi, params.sizes)
    pk, _ = zk.zk_keygen(params.zk, desc)
    proof = zk.zk_prove(pk, Statement(phi, c, bytes(ctx)), w, rng)
    return PresentationToken(desc.shape_id, proof)


def publish_keys(params: SystemParams, phi: Predicate) -> bytes:
    """Circuit keys for ``phi``'s shape; needs the parameters that hold the trapdoor."""
    return zk.export_keys(params.zk, RelationDescription.for_predicate(phi, params.sizes))


def load_keys(params: SystemParams, phi: Predicate, data: bytes) -> None:
    zk.import_keys(params.zk, RelationDescription.for_predicate(phi, params.sizes), data)


def verify_presentation(params: SystemParams, pt: PresentationToken, phi: Predicate,
                        ctx: bytes, view) -> bool:
    try:
        view = _view(params, view)
        check_coverage(phi, view)
        c = issuer_set_commitment(view, params.sizes)
        desc = RelationDescription.for_predicate(phi, params.sizes)
        if pt.shape_id != desc.shape_id:
            return False
        _, vk = zk.zk_keygen(params.zk, desc)
        return zk.zk_verify(vk, Statement(phi, c, bytes(ctx)), pt.proof)
    except (ValueError, TypeError, KeyError, AttributeNotCovered):
        return False


__all__ = [
    "AttributeNotCovered", "AttributeUniverse", "Credential", "DuplicateAttributeName",
    "HidingSetTooLarge", "IssuerBundle", "IssuerNotInSet", "IssuerState", "LengthMismatch",
    "PredicateUnsatisfied", "PresentationToken", "Revoked", "RevocationCapacityExceeded",
    "SystemParams", "TooManyAttributes", "UnknownAttribute", "ValueOutOfRange",
    "add_attributes", "credential_hash", "issue_cred", "issuer_setup", "load_keys",
    "present_cred", "publish_keys", "revoke", "setup", "verify_cred", "verify_presentation",
]
