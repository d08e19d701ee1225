"""Conjunctive predicates over global attribute indices.

A :class:`Predicate` is a conjunction of clauses:

* :class:`Compare` ``idx op const`` with ``op`` one of ``< <= == >= > !=``;
  ordering operators use unsigned ``bit_width``-bit integer semantics and
  are false for values outside ``[0, 2**bit_width)``;
* :class:`MemberOf` ``idx in {c1, ..., ck}``;
* :class:`NotInSortedList` ``idx not in [l1, ..., lk]``: shown in the
  relation with a gap between adjacent entries of a committed sorted list,
  so the reserved values ``0`` and ``P - 1`` never satisfy it.

Attribute indices and constants are public statement inputs; only the
clause kinds, operators, and sizes fix the circuit shape (see
:func:`pred_shape_id`).

Text grammar (one clause per line or joined with ``and``; ``//`` starts a
comment)::

    clause   := ref OP value | ref "in" "{" values "}"
              | ref "not" "in" ( "[" values "]" | "@" path )
    ref      := "#" INT | NAME
    value    := INT | '"' label '"'      # labels map through hash_to_field
    OP       := "<" | "<=" | "==" | ">=" | ">" | "!="
"""

import hashlib
import re
from dataclasses import dataclass
from pathlib import Path

from .encoding import encode
from .field import P, SENTINEL
from .poseidon import hash_to_field

OPS = ("<", "<=", "==", ">=", ">", "!=")
ORDERING = ("<", "<=", ">=", ">")
DEFAULT_BIT_WIDTH = 64
# capacity of a NotInSortedList commitment, as log2 of the padded layout
DEFAULT_LIST_DEPTH = 4


class MissingAttribute(KeyError):
    pass


class PredicateError(ValueError):
    pass


@dataclass(frozen=True)
class Compare:
    idx: int
    op: str
    const: int

    def __post_init__(self):
        if self.op not in OPS:
            raise PredicateError(f"unknown operator {self.op!r}")
        if self.idx < 1:
            raise PredicateError("attribute indices start at 1")
        if not 0 <= self.const < P:
            raise PredicateError("constant must be a field element")


@dataclass(frozen=True)
class MemberOf:
    idx: int
    values: tuple

    def __post_init__(self):
        if self.idx < 1:
            raise PredicateError("attribute indices start at 1")
        if not self.values:
            raise PredicateError("membership set must be non-empty")
        if any(not 0 <= v < P for v in self.values):
            raise PredicateError("set members must be field elements")


@dataclass(frozen=True)
class NotInSortedList:
    idx: int
    values: tuple
    depth: int = DEFAULT_LIST_DEPTH

    def __post_init__(self):
        if self.idx < 1:
            raise PredicateError("attribute indices start at 1")
        vals = tuple(sorted(set(self.values)))
        if any(not 0 < v < SENTINEL for v in vals):
            raise PredicateError("list entries must lie strictly inside (0, P-1)")
        object.__setattr__(self, "values", vals)
        # layout is [0, entries..., P-1 ...]; keep at least one sentinel
        need = max(1, (len(vals) + 1).bit_length())
        if self.depth < need:
            object.__setattr__(self, "depth", need)

    def layout(self) -> list[int]:
        return [0, *self.values]


@dataclass(frozen=True)
class Predicate:
    clauses: tuple
    bit_width: int = DEFAULT_BIT_WIDTH

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        if not self.clauses:
            raise PredicateError("a predicate needs at least one clause")
        if not 1 <= self.bit_width <= 128:
            raise PredicateError("bit width must be in [1, 128]")
        for c in self.clauses:
            if isinstance(c, Compare) and c.op in ORDERING and c.const >> self.bit_width:
                raise PredicateError(f"constant {c.const} exceeds {self.bit_width} bits")

    def __and__(self, other: "Predicate") -> "Predicate":
        return Predicate(self.clauses + other.clauses, max(self.bit_width, other.bit_width))


def conj(*clauses, bit_width: int = DEFAULT_BIT_WIDTH) -> Predicate:
    return Predicate(tuple(clauses), bit_width)


def pred_required_attrs(phi: Predicate) -> frozenset:
    return frozenset(c.idx for c in phi.clauses)


def required_order(phi: Predicate) -> list[int]:
    """Required indices in the order the relation opens them."""
    return sorted(pred_required_attrs(phi))


def clause_holds(clause, v: int, bit_width: int) -> bool:
    if isinstance(clause, Compare):
        if clause.op == "==":
            return v == clause.const
        if clause.op == "!=":
            return v != clause.const
        if v >> bit_width or v < 0:
            return False
        return {
            "<": v < clause.const,
            "<=": v <= clause.const,
            ">=": v >= clause.const,
            ">": v > clause.const,
        }[clause.op]
    if isinstance(clause, MemberOf):
        return v in clause.values
    if isinstance(clause, NotInSortedList):
        return 0 < v < SENTINEL and v not in clause.values
    raise PredicateError(f"unsupported clause {clause!r}")


def pred_eval(phi: Predicate, assignment: dict) -> bool:
    for c in phi.clauses:
        if c.idx not in assignment:
            raise MissingAttribute(c.idx)
    return all(clause_holds(c, assignment[c.idx], phi.bit_width) for c in phi.clauses)


def clause_shape(clause) -> tuple:
    if isinstance(clause, Compare):
        return (b"cmp", clause.op.encode())
    if isinstance(clause, MemberOf):
        return (b"in", len(clause.values))
    if isinstance(clause, NotInSortedList):
        return (b"notin", clause.depth)
    raise PredicateError(f"unsupported clause {clause!r}")


def pred_shape_id(phi: Predicate, n_a: int, n_r: int, n_i: int) -> bytes:
    """Identifier of the circuit shape; constants and indices do not enter."""
    order = required_order(phi)
    shape = (
        b"irac-shape-v1",
        phi.bit_width,
        len(order),
        n_a,
        n_r,
        n_i,
        tuple(clause_shape(c) + (order.index(c.idx),) for c in phi.clauses),
    )
    return hashlib.sha256(encode(shape)).digest()


# -- text format -------------------------------------------------------------

_CLAUSE = re.compile(
    r"""^\s*(?P<ref>\#\d+|[A-Za-z_][\w.-]*)\s*
        (?:(?P<op><=|>=|==|!=|<|>)\s*(?P<value>.+?)
          |in\s*\{(?P<set>[^}]*)\}
          |not\s+in\s*(?:\[(?P<list>[^\]]*)\]|@(?P<path>\S+))
        )\s*$""",
    re.VERBOSE,
)


def parse_value(tok: str) -> int:
    tok = tok.strip()
    if len(tok) >= 2 and tok[0] == tok[-1] == '"':
        return hash_to_field(tok[1:-1].encode())
    try:
        return int(tok, 0)
    except ValueError:
        raise PredicateError(f"bad constant {tok!r}") from None


def _values(body: str) -> tuple:
    return tuple(parse_value(t) for t in body.split(",") if t.strip())


def parse_predicate(text: str, names: dict | None = None, base_dir=None,
                    bit_width: int = DEFAULT_BIT_WIDTH) -> Predicate:
    """Parse the text grammar; ``names`` maps attribute names to indices."""
    names = names or {}
    clauses = []
    for line in text.splitlines():
        line = line.split("//", 1)[0]
        for part in re.split(r"\band\b", line):
            if not part.strip():
                continue
            m = _CLAUSE.match(part)
            if not m:
                raise PredicateError(f"cannot parse clause {part.strip()!r}")
            ref = m["ref"]
            if ref.startswith("#"):
                idx = int(ref[1:])
            elif ref in names:
                idx = names[ref]
            else:
                raise PredicateError(f"unknown attribute {ref!r}")
            if m["op"]:
                clauses.append(Compare(idx, m["op"], parse_value(m["value"])))
            elif m["set"] is not None:
                clauses.append(MemberOf(idx, _values(m["set"])))
            elif m["list"] is not None:
                clauses.append(NotInSortedList(idx, _values(m["list"])))
            else:
                path = Path(m["path"])
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                entries = _values(",".join(path.read_text().split()))
                clauses.append(NotInSortedList(idx, entries))
    return Predicate(tuple(clauses), bit_width)


def format_predicate(phi: Predicate) -> str:
    out = []
    for c in phi.clauses:
        if isinstance(c, Compare):
            out.append(f"#{c.idx} {c.op} {c.const}")
        elif isinstance(c, MemberOf):
            out.append(f"#{c.idx} in {{{', '.join(map(str, c.values))}}}")
        else:
            out.append(f"#{c.idx} not in [{', '.join(map(str, c.values))}]")
    return "\n".join(out) + "\n"
