"""Grumpkin: y^2 = x^3 - 17 over the BN254 scalar field.

Grumpkin and BN254 form a 2-cycle: Grumpkin's base field is BN254's scalar
field and its prime group order is BN254's base-field prime ``Q``. Points
are affine ``(x, y)`` tuples; ``None`` is the point at infinity.
"""

import hashlib

import gmpy2
from gmpy2 import mpz

from .field import P, Q, inv, sqrt

B = P - 17
ORDER = Q

_Gy = sqrt(1 + B)
G = (1, min(_Gy, P - _Gy))


def is_on_curve(pt) -> bool:
    if pt is None:
        return True
    x, y = pt
    if not (0 <= x < P and 0 <= y < P):
        return False
    return (y * y - x * x * x - B) % P == 0


def neg(pt):
    if pt is None:
        return None
    return (pt[0], (-pt[1]) % P)


def add(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2:
        if (y1 + y2) % P == 0:
            return None
        lam = 3 * x1 * x1 * inv(2 * y1) % P
    else:
        lam = (y2 - y1) * inv(x2 - x1) % P
    x3 = (lam * lam - x1 - x2) % P
    return (x3, (lam * (x1 - x3) - y1) % P)


_P = mpz(P)


def _jac_double(X, Y, Z):
    if Z == 0 or Y == 0:
        return mpz(1), mpz(1), mpz(0)
    XX = X * X % _P
    YY = Y * Y % _P
    YYYY = YY * YY % _P
    S = 2 * ((X + YY) ** 2 - XX - YYYY) % _P
    M = 3 * XX % _P
    X3 = (M * M - 2 * S) % _P
    Y3 = (M * (S - X3) - 8 * YYYY) % _P
    Z3 = 2 * Y * Z % _P
    return X3, Y3, Z3


def _jac_add_affine(X1, Y1, Z1, x2, y2):
    if Z1 == 0:
        return x2, y2, mpz(1)
    Z1Z1 = Z1 * Z1 % _P
    U2 = x2 * Z1Z1 % _P
    S2 = y2 * Z1 * Z1Z1 % _P
    H = (U2 - X1) % _P
    r = (S2 - Y1) % _P
    if H == 0:
        if r == 0:
            return _jac_double(X1, Y1, Z1)
        return mpz(1), mpz(1), mpz(0)
    HH = H * H % _P
    HHH = H * HH % _P
    V = X1 * HH % _P
    X3 = (r * r - HHH - 2 * V) % _P
    Y3 = (r * (V - X3) - Y1 * HHH) % _P
    Z3 = Z1 * H % _P
    return X3, Y3, Z3


def mul(k: int, pt):
    """Scalar multiplication ``k * pt``."""
    k %= ORDER
    if pt is None or k == 0:
        return None
    x, y = mpz(pt[0]), mpz(pt[1])
    X, Y, Z = mpz(1), mpz(1), mpz(0)
    for bit in bin(k)[2:]:
        X, Y, Z = _jac_double(X, Y, Z)
        if bit == "1":
            X, Y, Z = _jac_add_affine(X, Y, Z, x, y)
    if Z == 0:
        return None
    zi = gmpy2.invert(Z, _P)
    zi2 = zi * zi % _P
    return (int(X * zi2 % _P), int(Y * zi2 * zi % _P))


def hash_to_curve(tag: bytes):
    """Try-and-increment map to a point with unknown discrete log."""
    ctr = 0
    while True:
        x = int.from_bytes(hashlib.sha256(tag + ctr.to_bytes(4, "little")).digest(), "little") % P
        y = sqrt((x * x * x + B) % P)
        if y is not None:
            return (x, min(y, P - y))
        ctr += 1
