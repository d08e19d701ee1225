"""Proving-system boundary: setup, deterministic key generation, prove, verify.

Two backends share one interface:

``groth16``
    Groth16 over BN254 through the ``irac_groth16`` native extension.
    Keys are circuit-specific. ``zk_setup`` draws a secret trapdoor and
    ``zk_keygen`` derives the keys for a relation shape deterministically
    from it, so repeated derivations are byte-identical. The trapdoor is
    the toxic waste of every derived key: its holder can forge proofs, so
    it is kept off the serialized parameters. Parties without it obtain
    keys through :func:`export_keys` / :func:`import_keys`.

``transparent``
    Carries the witness in the clear and replays :func:`relation_check`
    on verification. It is not zero-knowledge and exists for differential
    testing only. It needs no trapdoor.

Both bind the session context: ``hash_to_field(ctx)`` is a public input of
the constraint system, and the transparent proof carries a digest of the
full public-input vector.
"""

import hashlib
import secrets
import struct
import threading
from dataclasses import dataclass, field, replace

from .encoding import BYTES, FIELD, EncodingError, decode, encode
from .field import P
from .relation import (
    RelationDescription,
    Sizes,
    Statement,
    Witness,
    public_inputs,
    relation_build,
    relation_check,
    synthesize,
    witness_from_bytes,
    witness_to_bytes,
)

GROTH16 = "groth16"
TRANSPARENT = "transparent"
BACKEND_IDS = {GROTH16: 0x01, TRANSPARENT: 0x7F}
BACKEND_NAMES = {v: k for k, v in BACKEND_IDS.items()}


class CircuitTooLarge(ValueError):
    pass


class UnsatisfiedWitness(ValueError):
    pass


class BackendUnavailable(RuntimeError):
    pass


class KeysUnavailable(RuntimeError):
    """No keys for this relation shape, and no trapdoor to derive them."""


def native():
    try:
        import irac_groth16
    except ImportError as e:
        raise BackendUnavailable(
            "the groth16 backend needs the irac_groth16 extension (pip install ./native)"
        ) from e
    return irac_groth16


def _setup_id(trapdoor: bytes) -> bytes:
    return hashlib.sha256(b"irac/setup-id" + trapdoor).digest()


@dataclass(frozen=True)
class ZkParams:
    """Public parameters; ``trapdoor`` is only present at the setup holder."""

    backend: str
    max_constraints: int
    setup_id: bytes
    trapdoor: bytes | None = field(default=None, repr=False, compare=False)

    def to_bytes(self) -> bytes:
        return bytes([BACKEND_IDS[self.backend]]) + encode((self.max_constraints, self.setup_id))

    @classmethod
    def from_bytes(cls, data: bytes) -> "ZkParams":
        if not data or data[0] not in BACKEND_NAMES:
            raise EncodingError("unknown backend identifier")
        n, sid = decode(data[1:], (FIELD, BYTES))
        return cls(BACKEND_NAMES[data[0]], n, sid)

    def public(self) -> "ZkParams":
        return replace(self, trapdoor=None)

    def with_trapdoor(self, trapdoor: bytes) -> "ZkParams":
        if _setup_id(trapdoor) != self.setup_id:
            raise ValueError("trapdoor does not belong to these parameters")
        return replace(self, trapdoor=bytes(trapdoor))


@dataclass(frozen=True, eq=False)
class ProverKey:
    backend: str
    shape_id: bytes
    desc: RelationDescription
    native: object = None


@dataclass(frozen=True, eq=False)
class VerifierKey:
    backend: str
    shape_id: bytes
    sizes: Sizes
    native: object = None

    def to_bytes(self) -> bytes:
        body = self.native.to_bytes() if self.native is not None else b""
        s = self.sizes
        return bytes([BACKEND_IDS[self.backend]]) + encode(
            (self.shape_id, (s.n_a, s.n_r, s.n_i), body)
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "VerifierKey":
        if not data or data[0] not in BACKEND_NAMES:
            raise EncodingError("unknown backend identifier")
        backend = BACKEND_NAMES[data[0]]
        shape_id, sizes, body = decode(data[1:], (BYTES, (FIELD, FIELD, FIELD), BYTES))
        nvk = native().VerifierKey.from_bytes(body) if backend == GROTH16 else None
        return cls(backend, shape_id, Sizes(*sizes), nvk)


def zk_setup(max_constraints: int, seed: bytes = b"", backend: str = GROTH16,
             security: int = 128) -> ZkParams:
    if max_constraints < 1 or max_constraints & (max_constraints - 1):
        raise ValueError("max_constraints must be a power of two")
    if backend not in BACKEND_IDS:
        raise ValueError(f"unknown backend {backend!r}")
    if security > 128:
        raise ValueError("BN254 offers at most about 128-bit security")
    # a seeded setup is reproducible, and so is its trapdoor: tests and demos only
    if seed:
        trapdoor = hashlib.sha256(b"irac/trapdoor" + bytes(seed)).digest()
    else:
        trapdoor = secrets.token_bytes(32)
    return ZkParams(backend, max_constraints, _setup_id(trapdoor), trapdoor)


def constraint_bytes(cs) -> bytes:
    out = bytearray()
    for row in cs.constraints:
        for side in row:
            out += struct.pack("<I", len(side))
            for v, c in side:
                out += struct.pack("<I", v) + (c % P).to_bytes(32, "little")
    return bytes(out)


def field_bytes(values) -> bytes:
    return b"".join(x.to_bytes(32, "little") for x in values)


_cache = {}
_cache_lock = threading.Lock()


def _build(pp: ZkParams, desc: RelationDescription):
    cs = relation_build(desc)
    if len(cs) > pp.max_constraints:
        raise CircuitTooLarge(
            f"{len(cs)} constraints exceed the configured maximum {pp.max_constraints}"
        )
    return cs


def _store(pp: ZkParams, desc: RelationDescription, native_pk, native_vk, circuit):
    pk = ProverKey(pp.backend, desc.shape_id, desc, (native_pk, circuit))
    vk = VerifierKey(pp.backend, desc.shape_id, desc.sizes, native_vk)
    with _cache_lock:
        _cache.setdefault((pp.to_bytes(), desc.shape_id), (pk, vk))
        return _cache[pp.to_bytes(), desc.shape_id]


def zk_keygen(pp: ZkParams, desc: RelationDescription) -> tuple[ProverKey, VerifierKey]:
    """Deterministic in ``(pp, desc)``; results are cached per shape.

    Groth16 keys for a shape not seen before need the trapdoor; without it
    this raises :class:`KeysUnavailable` unless the keys were imported.
    """
    with _cache_lock:
        hit = _cache.get((pp.to_bytes(), desc.shape_id))
    if hit is not None:
        return hit
    if pp.backend == TRANSPARENT:
        _build(pp, desc)
        return _store(pp, desc, None, None, None)
    if pp.trapdoor is None:
        raise KeysUnavailable(
            "no keys for this predicate shape; the setup holder has to publish them"
        )
    cs = _build(pp, desc)
    g = native()
    circuit = g.Circuit(cs.num_public, cs.num_vars, constraint_bytes(cs))
    seed = hashlib.sha256(b"irac/keygen" + pp.trapdoor + desc.shape_id).digest()
    native_pk, native_vk = g.setup(circuit, seed)
    return _store(pp, desc, native_pk, native_vk, circuit)


def export_keys(pp: ZkParams, desc: RelationDescription) -> bytes:
    """Serialize the keys of one relation shape for distribution."""
    pk, vk = zk_keygen(pp, desc)
    body = pk.native[0].to_bytes() if pp.backend == GROTH16 else b""
    return bytes([BACKEND_IDS[pp.backend]]) + encode(
        (pp.setup_id, desc.shape_id, body, vk.to_bytes())
    )


def import_keys(pp: ZkParams, desc: RelationDescription, data: bytes):
    """Load keys made by :func:`export_keys`; later ``zk_keygen`` calls return them."""
    if not data or data[0] != BACKEND_IDS[pp.backend]:
        raise EncodingError("keys were made for another backend")
    sid, shape, body, vk_bytes = decode(data[1:], (BYTES, BYTES, BYTES, BYTES))
    if sid != pp.setup_id:
        raise ValueError("keys were made under other parameters")
    if shape != desc.shape_id:
        raise ValueError("keys were made for another predicate shape")
    vk = VerifierKey.from_bytes(vk_bytes)
    if vk.shape_id != shape or vk.sizes != desc.sizes:
        raise ValueError("verifier key does not match its envelope")
    if pp.backend == TRANSPARENT:
        return _store(pp, desc, None, None, None)
    cs = _build(pp, desc)
    g = native()
    if vk.native.num_public() != cs.num_public:
        raise ValueError("verifier key does not fit the relation")
    circuit = g.Circuit(cs.num_public, cs.num_vars, constraint_bytes(cs))
    return _store(pp, desc, g.ProverKey.from_bytes(body), vk.native, circuit)


def binding_tag(shape_id: bytes, pub) -> bytes:
    return hashlib.sha256(b"irac/transparent" + shape_id + encode(list(pub))).digest()


def zk_prove(pk: ProverKey, stmt: Statement, w: Witness, rng=None) -> bytes:
    """``rng`` (with ``randbytes``) pins the prover randomness for replayable runs."""
    desc = pk.desc
    if RelationDescription.for_predicate(stmt.predicate, desc.sizes).shape_id != pk.shape_id:
        raise ValueError("statement does not match the key's relation shape")
    if not relation_check(stmt, w, desc.sizes):
        raise UnsatisfiedWitness("relation check failed; refusing to prove")
    pub = public_inputs(stmt)
    header = bytes([BACKEND_IDS[pk.backend]])
    if pk.backend == TRANSPARENT:
        return header + encode((binding_tag(pk.shape_id, pub), witness_to_bytes(w)))
    native_pk, circuit = pk.native
    _, z = synthesize(desc, pub, w)
    entropy = rng.randbytes(32) if rng is not None else secrets.token_bytes(32)
    return header + native().prove(native_pk, circuit, field_bytes(z), entropy)


def zk_verify(vk: VerifierKey, stmt: Statement, proof: bytes) -> bool:
    try:
        return _verify(vk, stmt, proof)
    except (ValueError, TypeError, KeyError, IndexError, EncodingError):
        return False


def _verify(vk: VerifierKey, stmt: Statement, proof: bytes) -> bool:
    if not proof or proof[0] != BACKEND_IDS[vk.backend]:
        return False
    if RelationDescription.for_predicate(stmt.predicate, vk.sizes).shape_id != vk.shape_id:
        return False
    pub = public_inputs(stmt)
    if any(not 0 <= x < P for x in pub):
        return False
    if vk.backend == TRANSPARENT:
        tag, wbytes = decode(proof[1:], (BYTES, BYTES))
        if tag != binding_tag(vk.shape_id, pub):
            return False
        return relation_check(stmt, witness_from_bytes(wbytes), vk.sizes)
    return native().verify(vk.native, field_bytes(pub), bytes(proof[1:]))
