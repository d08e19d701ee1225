"""Rank-1 constraint systems over the BN254 scalar field.

Variable 0 is the constant one, variables ``1..num_public`` are the public
inputs, the rest are private. A constraint ``(A, B, C)`` asserts
``<A, z> * <B, z> == <C, z>`` where each side is a sparse linear
combination.

:class:`Builder` records constraints and, at the same time, the values of
every variable, so one gadget run yields both the system and an assignment.
Gadgets must never branch on values; building with placeholder witnesses
then gives exactly the same system.
"""

import hashlib
import struct

from .field import P


class LC:
    """Sparse linear combination ``sum(coeff * z[var])``."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms if terms is not None else {}

    @staticmethod
    def const(c: int) -> "LC":
        c %= P
        return LC({0: c} if c else {})

    def __add__(self, other):
        other = _lc(other)
        out = dict(self.terms)
        for v, c in other.terms.items():
            s = (out.get(v, 0) + c) % P
            if s:
                out[v] = s
            else:
                out.pop(v, None)
        return LC(out)

    __radd__ = __add__

    def __neg__(self):
        return LC({v: (-c) % P for v, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_lc(other))

    def __rsub__(self, other):
        return _lc(other) - self

    def __mul__(self, k):
        if isinstance(k, LC):
            raise TypeError("use Builder.mul for products of linear combinations")
        k %= P
        if k == 0:
            return LC()
        return LC({v: c * k % P for v, c in self.terms.items()})

    __rmul__ = __mul__

    def is_const(self) -> bool:
        return all(v == 0 for v in self.terms)

    def const_value(self) -> int:
        return self.terms.get(0, 0)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"LC({self.terms})"


def _lc(x) -> LC:
    if isinstance(x, LC):
        return x
    if isinstance(x, int):
        return LC.const(x)
    raise TypeError(f"not a linear combination: {x!r}")


ONE = LC({0: 1})


class UnsatisfiedConstraint(AssertionError):
    pass


class ConstraintSystem:
    def __init__(self, num_public: int, num_vars: int, constraints: list):
        self.num_public = num_public
        self.num_vars = num_vars
        self.constraints = constraints

    def __len__(self):
        return len(self.constraints)

    def nonzeros(self) -> int:
        return sum(len(a) + len(b) + len(c) for a, b, c in self.constraints)

    def first_violation(self, z) -> int | None:
        for k, (a, b, c) in enumerate(self.constraints):
            av = sum(coef * z[v] for v, coef in a) % P
            bv = sum(coef * z[v] for v, coef in b) % P
            cv = sum(coef * z[v] for v, coef in c) % P
            if av * bv % P != cv:
                return k
        return None

    def is_satisfied(self, z) -> bool:
        if len(z) != self.num_vars or z[0] != 1:
            return False
        if any(not 0 <= x < P for x in z):
            return False
        return self.first_violation(z) is None

    def digest(self) -> bytes:
        """Hash of the structure (not the assignment)."""
        h = hashlib.sha256()
        h.update(struct.pack("<III", self.num_public, self.num_vars, len(self.constraints)))
        for row in self.constraints:
            for side in row:
                h.update(struct.pack("<I", len(side)))
                for v, c in side:
                    h.update(struct.pack("<I", v))
                    h.update(c.to_bytes(32, "little"))
        return h.digest()


class Builder:
    def __init__(self):
        self.values = [1]
        self.num_public = 0
        self.constraints = []
        self._sealed_public = False

    # allocation ---------------------------------------------------------
    def public(self, value: int) -> LC:
        if self._sealed_public:
            raise RuntimeError("public inputs must be allocated before private ones")
        self.num_public += 1
        return self._alloc(value)

    def private(self, value: int) -> LC:
        self._sealed_public = True
        return self._alloc(value)

    def _alloc(self, value: int) -> LC:
        self.values.append(value % P)
        return LC({len(self.values) - 1: 1})

    # evaluation ---------------------------------------------------------
    def value(self, lc) -> int:
        lc = _lc(lc)
        vals = self.values
        return sum(c * vals[v] for v, c in lc.terms.items()) % P

    # constraints --------------------------------------------------------
    def enforce(self, a, b, c) -> None:
        a, b, c = _lc(a), _lc(b), _lc(c)
        self.constraints.append(
            (tuple(a.terms.items()), tuple(b.terms.items()), tuple(c.terms.items()))
        )

    def mul(self, a, b) -> LC:
        a, b = _lc(a), _lc(b)
        if a.is_const():
            return b * a.const_value()
        if b.is_const():
            return a * b.const_value()
        out = self.private(self.value(a) * self.value(b))
        self.enforce(a, b, out)
        return out

    def assert_equal(self, a, b) -> None:
        self.enforce(_lc(a) - _lc(b), ONE, LC())

    def materialize(self, a) -> LC:
        """Return a single-variable LC equal to ``a``."""
        a = _lc(a)
        if len(a.terms) == 1 and next(iter(a.terms.values())) == 1 and 0 not in a.terms:
            return a
        out = self.private(self.value(a))
        self.enforce(a, ONE, out)
        return out

    def finish(self) -> tuple[ConstraintSystem, list]:
        cs = ConstraintSystem(self.num_public, len(self.values), self.constraints)
        return cs, self.values
