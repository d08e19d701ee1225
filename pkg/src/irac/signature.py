"""Schnorr signatures over Grumpkin with a Poseidon challenge.

Messages are scalar-field elements (the protocol signs attribute-commitment
roots directly). A signature is ``(R, s)`` with ``R = k*G`` and
``s = k + e*sk mod Q`` where ``e = Poseidon(R.x, R.y, pk.x, pk.y, m)``.
Because ``e < P < Q`` the challenge is used as a scalar unchanged, and the
verification equation ``s*G == R + e*pk`` only needs arithmetic over ``P``
when checked inside the relation.
"""

import secrets
from dataclasses import dataclass

from . import grumpkin, poseidon
from .encoding import FIELD, decode, encode
from .field import P, Q

SIGNATURE_SCHEMA = (FIELD, FIELD, FIELD)
KEY_SCHEMA = (FIELD, FIELD)


@dataclass(frozen=True)
class VerifyingKey:
    x: int
    y: int

    @property
    def point(self):
        return (self.x, self.y)

    def to_bytes(self) -> bytes:
        return encode((self.x, self.y))

    @classmethod
    def from_bytes(cls, data: bytes) -> "VerifyingKey":
        return cls(*decode(data, KEY_SCHEMA))

    def digest(self) -> int:
        """Field digest used as the issuer-set leaf component."""
        return poseidon.hash2(self.x, self.y, poseidon.DOMAIN_MISC)


@dataclass(frozen=True)
class SigningKey:
    scalar: int

    def verifying_key(self) -> VerifyingKey:
        return VerifyingKey(*grumpkin.mul(self.scalar, grumpkin.G))

    def to_bytes(self) -> bytes:
        return encode(self.scalar)


@dataclass(frozen=True)
class Signature:
    rx: int
    ry: int
    s: int

    def to_bytes(self) -> bytes:
        return encode((self.rx, self.ry, self.s))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Signature":
        return cls(*decode(data, SIGNATURE_SCHEMA))

    def fields(self) -> tuple:
        """``(R.x, R.y, s_lo, s_hi)`` with ``s`` split into 128-bit limbs."""
        return (self.rx, self.ry, self.s & ((1 << 128) - 1), self.s >> 128)


def _scalar(rng) -> int:
    if rng is None:
        return 1 + secrets.randbelow(Q - 1)
    return rng.randrange(1, Q)


def challenge(rx: int, ry: int, pk: VerifyingKey, m: int) -> int:
    return poseidon.hash_fields([rx, ry, pk.x, pk.y, m], poseidon.DOMAIN_CHALLENGE)


def sig_keygen(rng=None) -> tuple[SigningKey, VerifyingKey]:
    sk = SigningKey(_scalar(rng))
    return sk, sk.verifying_key()


def sig_sign(sk: SigningKey, m: int, rng=None) -> Signature:
    if not 0 <= m < P:
        raise ValueError("message must be a canonical field element")
    pk = sk.verifying_key()
    k = _scalar(rng)
    rx, ry = grumpkin.mul(k, grumpkin.G)
    e = challenge(rx, ry, pk, m)
    return Signature(rx, ry, (k + e * sk.scalar) % Q)


def sig_verify(pk: VerifyingKey, m: int, sig: Signature) -> bool:
    try:
        if not (0 <= m < P and 0 <= sig.s < Q):
            return False
        r = (sig.rx, sig.ry)
        if not grumpkin.is_on_curve(r) or not grumpkin.is_on_curve(pk.point):
            return False
        e = challenge(sig.rx, sig.ry, pk, m)
        lhs = grumpkin.mul(sig.s, grumpkin.G)
        rhs = grumpkin.add(r, grumpkin.mul(e, pk.point))
        return lhs is not None and lhs == rhs
    except (TypeError, AttributeError, ValueError):
        return False
