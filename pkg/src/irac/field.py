"""Scalar-field arithmetic for the BN254 proving curve.

Field elements are plain Python ints kept in ``[0, P)``. The same prime is
the base field of the Grumpkin curve, whose group order is ``Q`` (the BN254
base-field prime), which is what lets issuer signatures be checked with
native arithmetic inside the relation.
"""

import gmpy2

P = 21888242871839275222246405745257275088548364400416034343698204186575808495617
Q = 21888242871839275222246405745257275088696311157297823662689037894645226208583

FIELD_BITS = 254
FIELD_BYTES = 32
SENTINEL = P - 1


def fe(x: int) -> int:
    return x % P


def is_canonical(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool) and 0 <= x < P


def inv(x: int) -> int:
    x %= P
    if x == 0:
        raise ZeroDivisionError("inverse of zero in the scalar field")
    return int(gmpy2.invert(x, P))


def neg(x: int) -> int:
    return (-x) % P


def sqrt(x: int, modulus: int = P):
    """Tonelli-Shanks square root; returns None for non-residues."""
    x %= modulus
    if x == 0:
        return 0
    if pow(x, (modulus - 1) // 2, modulus) != 1:
        return None
    s, q = 0, modulus - 1
    while q % 2 == 0:
        s += 1
        q //= 2
    z = 2
    while pow(z, (modulus - 1) // 2, modulus) != modulus - 1:
        z += 1
    m, c, t, r = s, pow(z, q, modulus), pow(x, q, modulus), pow(x, (q + 1) // 2, modulus)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % modulus
            i += 1
        b = pow(c, 1 << (m - i - 1), modulus)
        m, c = i, b * b % modulus
        t, r = t * c % modulus, r * b % modulus
    return r


def to_bits(x: int, n: int) -> list[int]:
    """Little-endian bit decomposition of a non-negative integer."""
    return [(x >> i) & 1 for i in range(n)]
