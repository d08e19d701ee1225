"""Poseidon over the BN254 scalar field (width 3, x^5 S-box, 8 full + 57
partial rounds).

Round constants and the Cauchy MDS matrix come from the Grain LFSR
procedure of the Poseidon reference implementation, so the permutation is
interoperable with circomlib-style ``Poseidon(2)``.
"""

from functools import cache

import gmpy2
from gmpy2 import mpz

from .field import FIELD_BITS, P

WIDTH = 3
FULL_ROUNDS = 8
PARTIAL_ROUNDS = 57
ALPHA = 5

# Capacity-word domain tags. hash2 uses the tag directly (< 2**64); the
# variable-length sponge puts the input length above bit 64 so the two
# families never share an initial state.
DOMAIN_NODE = 0
DOMAIN_ATTR_LEAF = 1
DOMAIN_ISSUER_LEAF = 2
DOMAIN_CREDENTIAL = 3
DOMAIN_CHALLENGE = 4
DOMAIN_BYTES = 5
DOMAIN_MISC = 6


def _grain_bits(field_bits, t, rf, rp):
    init = (
        [0, 1]  # prime field
        + [0, 0, 0, 0]  # x^alpha S-box
        + [int(b) for b in format(field_bits, "012b")]
        + [int(b) for b in format(t, "012b")]
        + [int(b) for b in format(rf, "010b")]
        + [int(b) for b in format(rp, "010b")]
        + [1] * 30
    )
    state = init[:]

    def step():
        new = state[62] ^ state[51] ^ state[38] ^ state[23] ^ state[13] ^ state[0]
        state.pop(0)
        state.append(new)
        return new

    for _ in range(160):
        step()
    while True:
        # self-shrinking: emit the second bit of a pair only if the first is 1
        first = step()
        while first == 0:
            step()
            first = step()
        yield step()


def _grain_int(gen, nbits):
    v = 0
    for _ in range(nbits):
        v = (v << 1) | next(gen)
    return v


@cache
def constants():
    """Return ``(round_constants, mds)``; round constants are per round."""
    gen = _grain_bits(FIELD_BITS, WIDTH, FULL_ROUNDS, PARTIAL_ROUNDS)
    flat = []
    for _ in range((FULL_ROUNDS + PARTIAL_ROUNDS) * WIDTH):
        v = _grain_int(gen, FIELD_BITS)
        while v >= P:
            v = _grain_int(gen, FIELD_BITS)
        flat.append(v)
    rc = [tuple(flat[i : i + WIDTH]) for i in range(0, len(flat), WIDTH)]
    while True:
        pts = [_grain_int(gen, FIELD_BITS) % P for _ in range(2 * WIDTH)]
        if len(set(pts)) != len(pts):
            continue
        xs, ys = pts[:WIDTH], pts[WIDTH:]
        if any((x + y) % P == 0 for x in xs for y in ys):
            continue
        mds = tuple(tuple(pow(x + y, P - 2, P) for y in ys) for x in xs)
        return tuple(rc), mds


def is_full_round(r: int) -> bool:
    half = FULL_ROUNDS // 2
    return r < half or r >= half + PARTIAL_ROUNDS


@cache
def _mpz_tables():
    rc, mds = constants()
    rcm = tuple(
        (mpz(c0), mpz(c1), mpz(c2), is_full_round(r)) for r, (c0, c1, c2) in enumerate(rc)
    )
    return rcm, tuple(tuple(mpz(m) for m in row) for row in mds), mpz(P)


def permute(state):
    rcm, mds, p = _mpz_tables()
    (m00, m01, m02), (m10, m11, m12), (m20, m21, m22) = mds
    powmod = gmpy2.powmod
    s0, s1, s2 = (mpz(x) for x in state)
    for c0, c1, c2, full in rcm:
        s0 = powmod(s0 + c0, 5, p)
        if full:
            s1 = powmod(s1 + c1, 5, p)
            s2 = powmod(s2 + c2, 5, p)
        else:
            s1 += c1
            s2 += c2
        s0, s1, s2 = (
            (m00 * s0 + m01 * s1 + m02 * s2) % p,
            (m10 * s0 + m11 * s1 + m12 * s2) % p,
            (m20 * s0 + m21 * s1 + m22 * s2) % p,
        )
    return [int(s0), int(s1), int(s2)]


def hash2(left: int, right: int, domain: int = DOMAIN_NODE) -> int:
    """Two-to-one compression: first word of ``permute([domain, l, r])``."""
    return permute([domain, left % P, right % P])[0]


def sponge_capacity(length: int, domain: int) -> int:
    return (length << 64) | domain


def hash_fields(elems, domain: int = DOMAIN_MISC) -> int:
    """Variable-length absorb of field elements, rate 2, zero-padded.

    The input length lives in the capacity word, so zero padding is
    unambiguous.
    """
    elems = [e % P for e in elems]
    if not elems:
        elems = [0]
        cap = sponge_capacity(0, domain)
    else:
        cap = sponge_capacity(len(elems), domain)
    if len(elems) % 2:
        elems.append(0)
    state = [cap, 0, 0]
    for i in range(0, len(elems), 2):
        state[1] = (state[1] + elems[i]) % P
        state[2] = (state[2] + elems[i + 1]) % P
        state = permute(state)
    return state[0]


def _reject(elems, domain):
    ctr = 0
    out = hash_fields(elems, domain)
    while out == 0 or out == P - 1:
        ctr += 1
        out = hash_fields(list(elems) + [ctr], domain)
    return out


def hash_fields_to_field(elems, domain: int = DOMAIN_MISC) -> int:
    """Like :func:`hash_fields`, but never returns 0 or P-1.

    On a hit the input is re-hashed with a counter appended.
    """
    return _reject(list(elems), domain)


def bytes_to_fields(data: bytes) -> list[int]:
    """Byte length followed by 31-byte little-endian chunks."""
    return [len(data)] + [
        int.from_bytes(data[i : i + 31], "little") for i in range(0, len(data), 31)
    ]


def hash_to_field(data: bytes) -> int:
    """Map bytes into the open interval (0, P-1)."""
    return _reject(bytes_to_fields(bytes(data)), DOMAIN_BYTES)
