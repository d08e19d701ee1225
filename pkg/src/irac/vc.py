"""Merkle-tree vector commitments.

Three instances are used by the protocol and differ only in how an element
becomes a leaf:

``ATTR``
    element ``(idx, value)``; leaf ``hash2(idx, value)`` under the
    attribute-leaf domain tag. Padding element ``(0, 0)``.
``ISSUER``
    element ``(pk_digest, revocation_root)``; leaf ``hash2`` under the
    issuer-leaf tag. Padding element ``(0, 0)``.
``REVOCATION``
    element is a field value used as the leaf directly. Padding is chosen
    by the caller (the protocol pads with ``P - 1``).

Trees are always full binary trees of power-of-two width. Long runs of
padding are handled with precomputed subtree roots, so committing to a
mostly-empty vector costs ``O(m log n)`` for ``m`` real elements.
"""

from dataclasses import dataclass
from functools import cache

from . import poseidon
from .field import P, SENTINEL

ATTR = "attr"
ISSUER = "issuer"
REVOCATION = "revocation"


class VectorTooLong(ValueError):
    pass


class IndexOutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class VcParams:
    n: int
    depth: int
    kind: str

    def leaf(self, element) -> int:
        parts = (element,) if self.kind == REVOCATION else tuple(element)
        if len(parts) != (1 if self.kind == REVOCATION else 2):
            raise ValueError(f"malformed {self.kind} element")
        if not all(isinstance(x, int) and 0 <= x < P for x in parts):
            raise ValueError("vector elements must be canonical field elements")
        if self.kind == ATTR:
            idx, value = element
            return poseidon.hash2(idx, value, poseidon.DOMAIN_ATTR_LEAF)
        if self.kind == ISSUER:
            digest, root = element
            return poseidon.hash2(digest, root, poseidon.DOMAIN_ISSUER_LEAF)
        return element

    def padding(self):
        if self.kind == REVOCATION:
            return SENTINEL
        return (0, 0)


@dataclass(frozen=True)
class OpeningProof:
    index: int
    siblings: tuple


def vc_setup(n: int, kind: str = REVOCATION, security: int = 128) -> VcParams:
    """Round ``n`` up to a power of two (minimum 2)."""
    if n < 1:
        raise ValueError("vector length must be positive")
    if kind not in (ATTR, ISSUER, REVOCATION):
        raise ValueError(f"unknown commitment kind {kind!r}")
    depth = max(1, (n - 1).bit_length())
    return VcParams(1 << depth, depth, kind)


@cache
def _fill_roots(fill_leaf: int, depth: int) -> tuple:
    roots = [fill_leaf]
    for _ in range(depth):
        roots.append(poseidon.hash2(roots[-1], roots[-1]))
    return tuple(roots)


class MerkleTree:
    """A committed vector, kept around to produce openings."""

    def __init__(self, params: VcParams, elements, fill=None):
        elements = list(elements)
        if len(elements) > params.n:
            raise VectorTooLong(f"{len(elements)} elements exceed capacity {params.n}")
        self.params = params
        self.elements = elements
        fill = params.padding() if fill is None else fill
        self.fill = fill
        fill_leaf = params.leaf(fill)
        self._fills = _fill_roots(fill_leaf, params.depth)
        layer = [params.leaf(e) for e in elements]
        self.layers = [layer]
        for level in range(params.depth):
            pad = self._fills[level]
            nxt = []
            for j in range(0, len(layer), 2):
                right = layer[j + 1] if j + 1 < len(layer) else pad
                nxt.append(poseidon.hash2(layer[j], right))
            layer = nxt
            self.layers.append(layer)

    def node(self, level: int, j: int) -> int:
        layer = self.layers[level]
        return layer[j] if j < len(layer) else self._fills[level]

    @property
    def root(self) -> int:
        return self.node(self.params.depth, 0)

    def element(self, i: int):
        return self.elements[i] if i < len(self.elements) else self.fill

    def open(self, i: int) -> OpeningProof:
        if not 0 <= i < self.params.n:
            raise IndexOutOfRange(f"index {i} outside [0, {self.params.n})")
        siblings = []
        j = i
        for level in range(self.params.depth):
            siblings.append(self.node(level, j ^ 1))
            j >>= 1
        return OpeningProof(i, tuple(siblings))


def vc_commit(params: VcParams, a, fill=None) -> int:
    return MerkleTree(params, a, fill).root


def vc_open(params: VcParams, a, i: int, fill=None) -> OpeningProof:
    return MerkleTree(params, a, fill).open(i)


def root_from_path(leaf: int, index: int, siblings) -> int:
    node = leaf
    for sib in siblings:
        if index & 1:
            node = poseidon.hash2(sib, node)
        else:
            node = poseidon.hash2(node, sib)
        index >>= 1
    return node


def vc_verify(params: VcParams, c: int, i: int, y, proof: OpeningProof) -> bool:
    """Accept iff the path from ``leaf(y)`` at position ``i`` reaches ``c``."""
    try:
        if not isinstance(proof, OpeningProof) or proof.index != i:
            return False
        if not 0 <= i < params.n or len(proof.siblings) != params.depth:
            return False
        if any(not (isinstance(s, int) and 0 <= s < P) for s in proof.siblings):
            return False
        return root_from_path(params.leaf(y), i, proof.siblings) == c
    except (TypeError, ValueError):
        return False
