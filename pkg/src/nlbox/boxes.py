"""Finite-alphabet bipartite boxes with exact conditional probability tables.

A box is the conditional distribution p(a,b|x,y) of a two-party device:
Alice feeds x and reads a, Bob feeds y and reads b.  Alphabets are index
sets 0..size-1.  Tables are immutable nested tuples of Fractions, so boxes
can be shared freely between workers.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path

from .rational import ONE, ZERO, coerce_rational, format_rational

ALICE = "alice"
BOB = "bob"

BOX_FORMAT = "nlbox/box"


class InvalidBoxError(ValueError):
    """A table failed validation: bad shape, negative entry, or bad row sum."""


@dataclass(frozen=True)
class BoxShape:
    """Alphabet sizes (|X|, |Y|, |A|, |B|) of a bipartite box."""

    x_size: int
    y_size: int
    a_size: int
    b_size: int

    def __post_init__(self) -> None:
        for name, size in self.as_dict().items():
            if not isinstance(size, int) or size < 1:
                raise InvalidBoxError(f"{name} must be a positive integer, got {size!r}")

    def as_dict(self) -> dict[str, int]:
        return {
            "x_size": self.x_size,
            "y_size": self.y_size,
            "a_size": self.a_size,
            "b_size": self.b_size,
        }

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x_size, self.y_size, self.a_size, self.b_size)

    def input_pairs(self):
        return product(range(self.x_size), range(self.y_size))

    def output_pairs(self):
        return product(range(self.a_size), range(self.b_size))


@dataclass(frozen=True)
class Box:
    """A validated bipartite box: ``table[x][y][a][b]`` is p(a,b|x,y)."""

    shape: BoxShape
    table: tuple

    def prob(self, x: int, y: int, a: int, b: int) -> Fraction:
        return self.table[x][y][a][b]


def make_box(shape: BoxShape, table) -> Box:
    """Build a box from a 4-deep nested array, checking both invariants.

    Entries may be Fractions, ints, or ``num/den`` strings.  Dimension
    mismatches, negative entries, and rows not summing to one are reported
    with the offending index.
    """
    if len(table) != shape.x_size:
        raise InvalidBoxError(f"table has {len(table)} x-slices, shape wants {shape.x_size}")
    rows = []
    for x in range(shape.x_size):
        if len(table[x]) != shape.y_size:
            raise InvalidBoxError(f"table[{x}] has {len(table[x])} y-slices, shape wants {shape.y_size}")
        yrows = []
        for y in range(shape.y_size):
            block = table[x][y]
            if len(block) != shape.a_size:
                raise InvalidBoxError(f"table[{x}][{y}] has {len(block)} a-rows, shape wants {shape.a_size}")
            total = ZERO
            arows = []
            for a in range(shape.a_size):
                if len(block[a]) != shape.b_size:
                    raise InvalidBoxError(
                        f"table[{x}][{y}][{a}] has {len(block[a])} entries, shape wants {shape.b_size}"
                    )
                entries = []
                for b in range(shape.b_size):
                    value = coerce_rational(block[a][b])
                    if value < 0:
                        raise InvalidBoxError(f"negative probability at (x={x}, y={y}, a={a}, b={b}): {value}")
                    total += value
                    entries.append(value)
                arows.append(tuple(entries))
            if total != ONE:
                raise InvalidBoxError(f"probabilities at (x={x}, y={y}) sum to {total}, expected 1")
            yrows.append(tuple(arows))
        rows.append(tuple(yrows))
    return Box(shape=shape, table=tuple(rows))


def modp_nlb(p: int) -> Box:
    """The mod-p nonlocal box: binary inputs, outputs in 0..p-1.

    Entry is 1/p exactly when (b - a) mod p equals x*y, else 0.  p need not
    be prime; composite moduli arise from composing coprime boxes.
    """
    if not isinstance(p, int) or p < 2:
        raise InvalidBoxError(f"mod-p box needs an integer p >= 2, got {p!r}")
    w = Fraction(1, p)
    shape = BoxShape(2, 2, p, p)
    table = tuple(
        tuple(
            tuple(tuple(w if (b - a) % p == x * y else ZERO for b in range(p)) for a in range(p))
            for y in range(2)
        )
        for x in range(2)
    )
    return Box(shape=shape, table=table)


def uniform_noise_box(shape: BoxShape) -> Box:
    """The maximally mixed box: every outcome pair equally likely for every input."""
    w = Fraction(1, shape.a_size * shape.b_size)
    table = tuple(
        tuple(
            tuple(tuple(w for _ in range(shape.b_size)) for _ in range(shape.a_size))
            for _ in range(shape.y_size)
        )
        for _ in range(shape.x_size)
    )
    return Box(shape=shape, table=table)


def boxes_equal(first: Box, second: Box) -> bool:
    """Exact equality: shapes match and every entry agrees as a canonical rational."""
    return first.shape == second.shape and first.table == second.table


def marginal(box: Box, side: str, own_input: int, other_input: int) -> tuple[Fraction, ...]:
    """One party's output distribution for fixed inputs on both sides."""
    s = box.shape
    if side == ALICE:
        if not (0 <= own_input < s.x_size and 0 <= other_input < s.y_size):
            raise IndexError(f"inputs ({own_input}, {other_input}) out of range for shape {s.as_tuple()}")
        block = box.table[own_input][other_input]
        return tuple(sum(block[a], ZERO) for a in range(s.a_size))
    if side == BOB:
        if not (0 <= own_input < s.y_size and 0 <= other_input < s.x_size):
            raise IndexError(f"inputs ({own_input}, {other_input}) out of range for shape {s.as_tuple()}")
        block = box.table[other_input][own_input]
        return tuple(sum((block[a][b] for a in range(s.a_size)), ZERO) for b in range(s.b_size))
    raise ValueError(f"side must be {ALICE!r} or {BOB!r}, got {side!r}")


@dataclass(frozen=True)
class SignallingWitness:
    """Where no-signalling breaks: this party's marginal at ``own_input`` differs
    between the other party's inputs ``other_first`` and ``other_second``."""

    side: str
    own_input: int
    other_first: int
    other_second: int
    output: int


def signalling_witness(box: Box) -> SignallingWitness | None:
    """Return a witness that the box signals, or None if it is no-signalling."""
    s = box.shape
    for x in range(s.x_size):
        reference = marginal(box, ALICE, x, 0)
        for y in range(1, s.y_size):
            candidate = marginal(box, ALICE, x, y)
            for a in range(s.a_size):
                if candidate[a] != reference[a]:
                    return SignallingWitness(ALICE, x, 0, y, a)
    for y in range(s.y_size):
        reference = marginal(box, BOB, y, 0)
        for x in range(1, s.x_size):
            candidate = marginal(box, BOB, y, x)
            for b in range(s.b_size):
                if candidate[b] != reference[b]:
                    return SignallingWitness(BOB, y, 0, x, b)
    return None


def is_no_signalling(box: Box) -> bool:
    """True iff each party's marginal is independent of the other party's input."""
    return signalling_witness(box) is None


@dataclass(frozen=True)
class MarginalFamily:
    """One party's output distribution per own input: ``dist[input][output]``."""

    side: str
    dist: tuple

    def __post_init__(self) -> None:
        for i, row in enumerate(self.dist):
            total = ZERO
            for value in row:
                if value < 0:
                    raise InvalidBoxError(f"negative marginal probability at input {i}")
                total += value
            if total != ONE:
                raise InvalidBoxError(f"marginal row {i} sums to {total}, expected 1")


def marginal_family(box: Box, side: str) -> MarginalFamily:
    """The input-indexed marginal table of a no-signalling box.

    Rejected for signalling boxes, where "the marginal at this input" is not
    a single distribution.
    """
    witness = signalling_witness(box)
    if witness is not None:
        raise InvalidBoxError(f"box signals ({witness}); marginals are not input-local")
    s = box.shape
    if side == ALICE:
        rows = tuple(marginal(box, ALICE, x, 0) for x in range(s.x_size))
    elif side == BOB:
        rows = tuple(marginal(box, BOB, y, 0) for y in range(s.y_size))
    else:
        raise ValueError(f"side must be {ALICE!r} or {BOB!r}, got {side!r}")
    return MarginalFamily(side=side, dist=rows)


def sample(box: Box, x: int, y: int, seed: int) -> tuple[int, int]:
    """Draw one outcome pair from p(.,.|x,y) with a seeded deterministic generator.

    The draw inverts the exact cumulative distribution at an integer picked
    uniformly below the common denominator, so no floating point is involved.
    Identical seeds give identical outcomes for this implementation; bit-level
    agreement across implementations is not promised.
    """
    s = box.shape
    if not (0 <= x < s.x_size and 0 <= y < s.y_size):
        raise IndexError(f"inputs ({x}, {y}) out of range for shape {s.as_tuple()}")
    block = box.table[x][y]
    denom = 1
    for a in range(s.a_size):
        for b in range(s.b_size):
            d = block[a][b].denominator
            denom = denom * d // math.gcd(denom, d)
    ticket = random.Random(seed).randrange(denom)
    acc = 0
    for a in range(s.a_size):
        for b in range(s.b_size):
            acc += int(block[a][b] * denom)
            if ticket < acc:
                return (a, b)
    raise AssertionError("cumulative probabilities did not reach 1")


def box_to_jsonable(box: Box) -> dict:
    return {
        "format": BOX_FORMAT,
        "shape": list(box.shape.as_tuple()),
        "table": [
            [[[format_rational(box.table[x][y][a][b]) for b in range(box.shape.b_size)]
              for a in range(box.shape.a_size)]
             for y in range(box.shape.y_size)]
            for x in range(box.shape.x_size)
        ],
    }


def box_from_jsonable(doc) -> Box:
    if not isinstance(doc, dict) or doc.get("format") != BOX_FORMAT:
        raise InvalidBoxError(f"not a box document (format field must be {BOX_FORMAT!r})")
    shape_field = doc.get("shape")
    if not (isinstance(shape_field, list) and len(shape_field) == 4):
        raise InvalidBoxError("box document needs a 4-element shape field")
    shape = BoxShape(*shape_field)
    return make_box(shape, doc.get("table"))


def write_box(box: Box, path) -> None:
    Path(path).write_text(json.dumps(box_to_jsonable(box), indent=2, sort_keys=True) + "\n")


def read_box(path) -> Box:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidBoxError(f"malformed box file {path}: {exc}") from exc
    return box_from_jsonable(doc)
