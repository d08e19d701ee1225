"""R1CS gadgets: bits and comparisons, Poseidon, Merkle paths, Grumpkin
arithmetic, and Schnorr verification.

Every gadget takes and returns :class:`~irac.r1cs.LC` values and emits the
same constraints whatever the witness is. Hints (inverses, bit splits) fall
back to zero when the witness is inconsistent, which simply leaves the
affected constraint unsatisfied.
"""

from functools import cache

from . import grumpkin, poseidon
from .field import FIELD_BITS, P, Q, inv
from .r1cs import LC, ONE, Builder

LIMB = 127


def _inv_or_zero(x: int) -> int:
    return inv(x) if x % P else 0


def boolean(cs: Builder, b: LC) -> None:
    cs.enforce(b, b - ONE, LC())


def to_bits(cs: Builder, x, n: int) -> list[LC]:
    """Little-endian ``n``-bit decomposition; also a range check ``x < 2**n``."""
    x = x if isinstance(x, LC) else LC.const(x)
    val = cs.value(x)
    bits = []
    acc = LC()
    for i in range(n):
        b = cs.private((val >> i) & 1)
        boolean(cs, b)
        bits.append(b)
        acc = acc + b * (1 << i)
    cs.assert_equal(acc, x)
    return bits


def from_bits(bits) -> LC:
    acc = LC()
    for i, b in enumerate(bits):
        acc = acc + b * (1 << i)
    return acc


def is_zero(cs: Builder, x: LC) -> LC:
    inv = cs.private(_inv_or_zero(cs.value(x)))
    flag = cs.private(1 if cs.value(x) == 0 else 0)
    # flag = 1 - x*inv and x*flag = 0
    cs.enforce(x, inv, ONE - flag)
    cs.enforce(x, flag, LC())
    return flag


def assert_nonzero(cs: Builder, x: LC) -> None:
    inv = cs.private(_inv_or_zero(cs.value(x)))
    cs.enforce(x, inv, ONE)


def select(cs: Builder, bit: LC, if_one, if_zero) -> LC:
    if_one = if_one if isinstance(if_one, LC) else LC.const(if_one)
    if_zero = if_zero if isinstance(if_zero, LC) else LC.const(if_zero)
    return if_zero + cs.mul(bit, if_one - if_zero)


def less_than_small(cs: Builder, a: LC, b, n: int) -> LC:
    """``1`` iff ``a < b`` for operands already known to be below ``2**n``."""
    t = to_bits(cs, a - b + (1 << n), n + 1)
    return ONE - t[n]


def split_limbs(bits) -> tuple[LC, LC]:
    return from_bits(bits[LIMB:]), from_bits(bits[:LIMB])


def less_than_wide(cs: Builder, a_bits, b_bits) -> LC:
    """``1`` iff ``a < b`` for 254-bit decompositions (either may be constant ints)."""
    a_hi, a_lo = _limbs(a_bits)
    b_hi, b_lo = _limbs(b_bits)
    lt_hi = less_than_small(cs, a_hi, b_hi, LIMB)
    eq_hi = is_zero(cs, a_hi - b_hi)
    lt_lo = less_than_small(cs, a_lo, b_lo, LIMB)
    return lt_hi + cs.mul(eq_hi, lt_lo)


def _limbs(bits):
    if isinstance(bits, int):
        return LC.const(bits >> LIMB), LC.const(bits & ((1 << LIMB) - 1))
    return split_limbs(bits)


def field_bits(cs: Builder, x: LC) -> list[LC]:
    """Unique 254-bit decomposition of a field element (enforces ``< P``)."""
    bits = to_bits(cs, x, FIELD_BITS)
    cs.assert_equal(less_than_wide(cs, bits, P), ONE)
    return bits


# -- Poseidon ----------------------------------------------------------------

MAX_LC_TERMS = 6


def _sbox(cs: Builder, x: LC) -> LC:
    x2 = cs.mul(x, x)
    x4 = cs.mul(x2, x2)
    return cs.mul(x4, x)


def permute(cs: Builder, state):
    rc, mds = poseidon.constants()
    s = [st if isinstance(st, LC) else LC.const(st) for st in state]
    for r, consts in enumerate(rc):
        s = [s[k] + consts[k] for k in range(3)]
        if poseidon.is_full_round(r):
            s = [_sbox(cs, x) for x in s]
        else:
            s[0] = _sbox(cs, s[0])
        s = [
            s[0] * mds[k][0] + s[1] * mds[k][1] + s[2] * mds[k][2]
            for k in range(3)
        ]
        s = [cs.materialize(x) if len(x) > MAX_LC_TERMS else x for x in s]
    return s


def hash2(cs: Builder, left, right, domain: int = poseidon.DOMAIN_NODE) -> LC:
    return permute(cs, [LC.const(domain), left, right])[0]


def hash_fields(cs: Builder, elems, domain: int) -> LC:
    elems = list(elems)
    state = [LC.const(poseidon.sponge_capacity(len(elems), domain)), LC(), LC()]
    if len(elems) % 2:
        elems.append(LC())
    for i in range(0, len(elems), 2):
        state = permute(cs, [state[0], state[1] + elems[i], state[2] + elems[i + 1]])
    return state[0]


def merkle_root(cs: Builder, leaf: LC, index_bits, siblings) -> LC:
    node = leaf
    for bit, sib in zip(index_bits, siblings):
        left = select(cs, bit, sib, node)
        right = node + sib - left
        node = hash2(cs, left, right)
    return node


# -- Grumpkin ----------------------------------------------------------------


def on_curve(cs: Builder, x: LC, y: LC) -> None:
    x2 = cs.mul(x, x)
    x3 = cs.mul(x2, x)
    cs.enforce(y, y, x3 + grumpkin.B)


def point_add(cs: Builder, p1, p2):
    """Incomplete affine addition; requires distinct x-coordinates."""
    (x1, y1), (x2, y2) = p1, p2
    dx = x2 - x1
    dxv = cs.value(dx)
    lam = cs.private((cs.value(y2) - cs.value(y1)) * _inv_or_zero(dxv))
    assert_nonzero(cs, dx)
    cs.enforce(lam, dx, y2 - y1)
    lv = cs.value(lam)
    x3 = cs.private(lv * lv - cs.value(x1) - cs.value(x2))
    cs.enforce(lam, lam, x3 + x1 + x2)
    y3 = cs.private(lv * (cs.value(x1) - cs.value(x3)) - cs.value(y1))
    cs.enforce(lam, x1 - x3, y3 + y1)
    return x3, y3


def point_double(cs: Builder, pt):
    x, y = pt
    xv, yv = cs.value(x), cs.value(y)
    xx = cs.mul(x, x)
    lam = cs.private(3 * xv * xv * _inv_or_zero(2 * yv))
    cs.enforce(lam, y * 2, xx * 3)
    lv = cs.value(lam)
    x3 = cs.private(lv * lv - 2 * xv)
    cs.enforce(lam, lam, x3 + x * 2)
    y3 = cs.private(lv * (xv - cs.value(x3)) - yv)
    cs.enforce(lam, x - x3, y3 + y)
    return x3, y3


def _const_point(pt):
    return LC.const(pt[0]), LC.const(pt[1])


@cache
def offsets():
    """Fixed points with unknown discrete logs that keep accumulators away
    from the identity during scalar multiplication."""
    return (
        grumpkin.hash_to_curve(b"irac/offset/variable-base"),
        grumpkin.hash_to_curve(b"irac/offset/fixed-base"),
    )


@cache
def fixed_base_table(nbits: int):
    _, w = offsets()
    table = []
    g = grumpkin.G
    for _ in range(nbits):
        table.append((w, grumpkin.add(g, w)))
        g = grumpkin.add(g, g)
    return tuple(table)


def variable_base_mul(cs: Builder, bits, pt):
    """Return ``2**n * T + k*pt`` for the offset point ``T``; bits MSB last."""
    t, _ = offsets()
    acc = _const_point(t)
    for b in reversed(bits):
        acc = point_double(cs, acc)
        summed = point_add(cs, acc, pt)
        acc = (select(cs, b, summed[0], acc[0]), select(cs, b, summed[1], acc[1]))
    return acc


def fixed_base_mul(cs: Builder, bits):
    """Return ``n*W + k*G`` for the offset point ``W``."""
    _, w = offsets()
    start = grumpkin.hash_to_curve(b"irac/offset/fixed-start")
    acc = _const_point(start)
    for b, (p0, p1) in zip(bits, fixed_base_table(len(bits))):
        qx = LC.const(p0[0]) + b * ((p1[0] - p0[0]) % P)
        qy = LC.const(p0[1]) + b * ((p1[1] - p0[1]) % P)
        acc = point_add(cs, acc, (qx, qy))
    return acc


@cache
def _schnorr_correction(nbits: int):
    """Constant ``K`` with ``fixed_base_mul(s) == variable_base_mul(e) + R + K``
    exactly when ``s*G == R + e*pk``."""
    t, w = offsets()
    start = grumpkin.hash_to_curve(b"irac/offset/fixed-start")
    fixed = grumpkin.add(start, grumpkin.mul(nbits, w))
    var = grumpkin.mul(pow(2, nbits, Q), t)
    return grumpkin.add(fixed, grumpkin.neg(var))


def schnorr_verify(cs: Builder, pk, msg: LC, rx: LC, ry: LC, s_bits) -> None:
    """Enforce that ``(R, s)`` is a valid signature on ``msg`` under ``pk``.

    ``s_bits`` must be a 254-bit decomposition; the caller range-checks it
    against the group order.
    """
    on_curve(cs, rx, ry)
    on_curve(cs, *pk)
    e = hash_fields(cs, [rx, ry, pk[0], pk[1], msg], poseidon.DOMAIN_CHALLENGE)
    e_bits = field_bits(cs, e)
    lhs = fixed_base_mul(cs, s_bits)
    rhs = variable_base_mul(cs, e_bits, pk)
    rhs = point_add(cs, rhs, (rx, ry))
    rhs = point_add(cs, rhs, _const_point(_schnorr_correction(len(s_bits))))
    cs.assert_equal(lhs[0], rhs[0])
    cs.assert_equal(lhs[1], rhs[1])
