"""Deterministic wirings: communication-free protocols over resource boxes.

Both parties hold the same ordered list of N resource boxes.  A party's
strategy is a stack of lookup tables: the input fed to resource l may depend
on the party's own input and on the outputs it saw from resources 0..l-1
(one shared query order for both parties), and the final output may depend
on the own input and all N resource outputs.  Strategies are tables rather
than code so they can be serialized, enumerated, and counted.

Evaluating a wiring produces an exact box: the probability of (a, b) given
(x, y) is the total weight of resource-transcript pairs that the two output
maps send to (a, b), each transcript pair weighted by the product of the
resource probabilities along it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path

from .boxes import (
    Box,
    BoxShape,
    box_from_jsonable,
    box_to_jsonable,
    is_no_signalling,
    make_box,
    marginal,
    modp_nlb,
    read_box,
)
from .rational import ONE, ZERO

WIRING_FORMAT = "nlbox/wiring"

ALICE = "alice"
BOB = "bob"


class InvalidWiringError(ValueError):
    """A strategy table is not total, lands outside its codomain, or a
    resource box signals."""


def mixed_radix_index(digits, radices) -> int:
    """Index of a digit tuple in the lexicographic enumeration of its space."""
    idx = 0
    for d, r in zip(digits, radices):
        idx = idx * r + d
    return idx


@dataclass(frozen=True)
class PartyStrategy:
    """Lookup tables for one party.

    ``input_maps[l][own_input][prefix_index]`` is the value fed to resource
    l, where ``prefix_index`` enumerates the party's outputs from resources
    0..l-1 in lexicographic order.  ``output_map[own_input][transcript_index]``
    is the final output, with ``transcript_index`` ranging over all N
    resource outputs on this party's side.
    """

    input_maps: tuple
    output_map: tuple

    def flat_digits(self) -> tuple[int, ...]:
        """All table entries in lexicographic table order; used for ordering."""
        digits: list[int] = []
        for table in self.input_maps:
            for row in table:
                digits.extend(row)
        for row in self.output_map:
            digits.extend(row)
        return tuple(digits)


@dataclass(frozen=True)
class Wiring:
    resources: tuple
    alice: PartyStrategy
    bob: PartyStrategy
    target_shape: BoxShape

    def sort_key(self) -> tuple:
        return (self.alice.flat_digits(), self.bob.flat_digits())


class SideView:
    """One party's view of a wiring: alphabets, adaptive inputs, final output."""

    def __init__(self, wiring: Wiring, side: str) -> None:
        if side not in (ALICE, BOB):
            raise ValueError(f"side must be {ALICE!r} or {BOB!r}, got {side!r}")
        self.side = side
        self.strategy = wiring.alice if side == ALICE else wiring.bob
        if side == ALICE:
            self.final_input_size = wiring.target_shape.x_size
            self.final_output_size = wiring.target_shape.a_size
            self.resource_input_sizes = [r.shape.x_size for r in wiring.resources]
            self.resource_output_sizes = [r.shape.a_size for r in wiring.resources]
        else:
            self.final_input_size = wiring.target_shape.y_size
            self.final_output_size = wiring.target_shape.b_size
            self.resource_input_sizes = [r.shape.y_size for r in wiring.resources]
            self.resource_output_sizes = [r.shape.b_size for r in wiring.resources]

    def resource_input(self, l: int, own_input: int, prefix) -> int:
        idx = mixed_radix_index(prefix, self.resource_output_sizes[:l])
        return self.strategy.input_maps[l][own_input][idx]

    def final_output(self, own_input: int, transcript) -> int:
        idx = mixed_radix_index(transcript, self.resource_output_sizes)
        return self.strategy.output_map[own_input][idx]


def _validate_side(view: SideView, n_resources: int) -> None:
    strategy = view.strategy
    if len(strategy.input_maps) != n_resources:
        raise InvalidWiringError(
            f"{view.side} has {len(strategy.input_maps)} input maps for {n_resources} resources"
        )
    for l in range(n_resources):
        table = strategy.input_maps[l]
        prefix_space = math.prod(view.resource_output_sizes[:l])
        if len(table) != view.final_input_size:
            raise InvalidWiringError(
                f"{view.side} input map {l} has {len(table)} rows, needs one per input value "
                f"(0..{view.final_input_size - 1})"
            )
        for own in range(view.final_input_size):
            if len(table[own]) != prefix_space:
                raise InvalidWiringError(
                    f"{view.side} input map {l} row {own} covers {len(table[own])} prefixes, "
                    f"domain has {prefix_space}"
                )
            for idx, value in enumerate(table[own]):
                if not (0 <= value < view.resource_input_sizes[l]):
                    raise InvalidWiringError(
                        f"{view.side} input map {l} sends ({own}, prefix {idx}) to {value}, "
                        f"outside resource alphabet 0..{view.resource_input_sizes[l] - 1}"
                    )
    transcript_space = math.prod(view.resource_output_sizes)
    if len(strategy.output_map) != view.final_input_size:
        raise InvalidWiringError(
            f"{view.side} output map has {len(strategy.output_map)} rows, needs "
            f"{view.final_input_size}"
        )
    for own in range(view.final_input_size):
        row = strategy.output_map[own]
        if len(row) != transcript_space:
            raise InvalidWiringError(
                f"{view.side} output map row {own} covers {len(row)} transcripts, domain has {transcript_space}"
            )
        for idx, value in enumerate(row):
            if not (0 <= value < view.final_output_size):
                raise InvalidWiringError(
                    f"{view.side} output map sends ({own}, transcript {idx}) to {value}, "
                    f"outside output alphabet 0..{view.final_output_size - 1}"
                )


def validate_wiring(wiring: Wiring) -> None:
    """Check totality of every lookup table and no-signalling of every resource."""
    for l, resource in enumerate(wiring.resources):
        if not is_no_signalling(resource):
            raise InvalidWiringError(f"resource {l} signals; wirings require no-signalling resources")
    n = len(wiring.resources)
    _validate_side(SideView(wiring, ALICE), n)
    _validate_side(SideView(wiring, BOB), n)


def evaluate_wiring(wiring: Wiring) -> Box:
    """The exact box a wiring simulates.

    Transcript pairs are walked resource by resource so that zero-probability
    branches are pruned as soon as they appear.
    """
    validate_wiring(wiring)
    shape = wiring.target_shape
    alice = SideView(wiring, ALICE)
    bob = SideView(wiring, BOB)
    resources = wiring.resources
    n = len(resources)

    table = [
        [[[ZERO for _ in range(shape.b_size)] for _ in range(shape.a_size)] for _ in range(shape.y_size)]
        for _ in range(shape.x_size)
    ]
    for x in range(shape.x_size):
        for y in range(shape.y_size):
            acc = table[x][y]

            def walk(l: int, za: tuple, zb: tuple, weight: Fraction) -> None:
                if l == n:
                    acc[alice.final_output(x, za)][bob.final_output(y, zb)] += weight
                    return
                u = alice.resource_input(l, x, za)
                v = bob.resource_input(l, y, zb)
                block = resources[l].table[u][v]
                for al in range(resources[l].shape.a_size):
                    row = block[al]
                    for bl in range(resources[l].shape.b_size):
                        p = row[bl]
                        if p != 0:
                            walk(l + 1, za + (al,), zb + (bl,), weight * p)

            walk(0, (), (), ONE)
    return make_box(shape, table)


def wired_marginal(wiring: Wiring, side: str, own_input: int) -> tuple[Fraction, ...]:
    """One party's output distribution computed from that party's side alone.

    Uses only the party's strategy and the resources' own-side marginals,
    which are well-defined because resources are no-signalling.  Agrees with
    the corresponding marginal of ``evaluate_wiring``.
    """
    view = SideView(wiring, side)
    out = [ZERO for _ in range(view.final_output_size)]
    n = len(wiring.resources)

    def walk(l: int, prefix: tuple, weight: Fraction) -> None:
        if l == n:
            out[view.final_output(own_input, prefix)] += weight
            return
        u = view.resource_input(l, own_input, prefix)
        dist = marginal(wiring.resources[l], side, u, 0)
        for outcome, p in enumerate(dist):
            if p != 0:
                walk(l + 1, prefix + (outcome,), weight * p)

    walk(0, (), ONE)
    return tuple(out)


def identity_wiring(resource: Box) -> Wiring:
    """Feed both inputs straight through one resource and output its outputs."""
    shape = resource.shape
    alice = PartyStrategy(
        input_maps=(tuple((x,) for x in range(shape.x_size)),),
        output_map=tuple(tuple(range(shape.a_size)) for _ in range(shape.x_size)),
    )
    bob = PartyStrategy(
        input_maps=(tuple((y,) for y in range(shape.y_size)),),
        output_map=tuple(tuple(range(shape.b_size)) for _ in range(shape.y_size)),
    )
    return Wiring(resources=(resource,), alice=alice, bob=bob, target_shape=shape)


def crt_wiring(p: int, q: int) -> Wiring:
    """Compose a mod-p and a mod-q box into a mod-pq box (p, q coprime).

    Both parties feed their raw input to both resources; the final output is
    the unique residue mod p*q congruent to the first box's output mod p and
    the second's mod q.  Subtracting the recombined outputs recovers
    x*y mod p*q whenever the two boxes obey their defining relations, which
    is exactly the mod-pq relation.
    """
    if p < 2 or q < 2:
        raise InvalidWiringError(f"moduli must be at least 2, got ({p}, {q})")
    if math.gcd(p, q) != 1:
        raise InvalidWiringError(f"moduli must be coprime, gcd({p}, {q}) = {math.gcd(p, q)}")
    r = p * q
    q_inv = pow(q, -1, p)
    p_inv = pow(p, -1, q)

    def recombine(residue_p: int, residue_q: int) -> int:
        return (residue_p * q * q_inv + residue_q * p * p_inv) % r

    # Transcript index over (first box output, second box output), first major.
    output_row = tuple(recombine(t0, t1) for t0 in range(p) for t1 in range(q))
    strategy = PartyStrategy(
        input_maps=(
            tuple((z,) for z in range(2)),
            tuple(tuple(z for _ in range(p)) for z in range(2)),
        ),
        output_map=(output_row, output_row),
    )
    return Wiring(
        resources=(modp_nlb(p), modp_nlb(q)),
        alice=strategy,
        bob=strategy,
        target_shape=BoxShape(2, 2, r, r),
    )


def _party_to_jsonable(view: SideView) -> dict:
    strategy = view.strategy
    input_maps = []
    for l, table in enumerate(strategy.input_maps):
        radices = view.resource_output_sizes[:l]
        rows = []
        for own in range(len(table)):
            for idx, prefix in enumerate(_enumerate_tuples(radices)):
                rows.append([own, list(prefix), table[own][idx]])
        input_maps.append(rows)
    output_rows = []
    radices = view.resource_output_sizes
    for own in range(len(strategy.output_map)):
        for idx, transcript in enumerate(_enumerate_tuples(radices)):
            output_rows.append([own, list(transcript), strategy.output_map[own][idx]])
    return {"input_maps": input_maps, "output_map": output_rows}


def _enumerate_tuples(radices):
    if not radices:
        yield ()
        return
    yield from product(*(range(r) for r in radices))


def _party_from_jsonable(doc, side: str, n_resources: int) -> PartyStrategy:
    if not isinstance(doc, dict) or "input_maps" not in doc or "output_map" not in doc:
        raise InvalidWiringError(f"{side} strategy needs input_maps and output_map fields")
    raw_maps = doc["input_maps"]
    if len(raw_maps) != n_resources:
        raise InvalidWiringError(f"{side} has {len(raw_maps)} input maps for {n_resources} resources")

    def rows_to_table(rows, label):
        cells: dict[tuple[int, tuple], int] = {}
        for row in rows:
            if not (isinstance(row, list) and len(row) == 3):
                raise InvalidWiringError(f"{side} {label}: each row must be [input, [outputs...], value]")
            own, prefix, value = row[0], tuple(row[1]), row[2]
            key = (own, prefix)
            if key in cells:
                raise InvalidWiringError(f"{side} {label}: duplicate row for {key}")
            cells[key] = value
        inputs = sorted({own for own, _ in cells})
        if inputs != list(range(len(inputs))):
            raise InvalidWiringError(f"{side} {label}: input values must cover 0..k without gaps")
        tuples = sorted({prefix for _, prefix in cells})
        table = []
        for own in inputs:
            entries = []
            for t in tuples:
                if (own, t) not in cells:
                    raise InvalidWiringError(f"{side} {label}: missing row for input {own}, outputs {t}")
                entries.append(cells[(own, t)])
            table.append(tuple(entries))
        return tuple(table)

    input_maps = tuple(rows_to_table(raw_maps[l], f"input map {l}") for l in range(n_resources))
    output_map = rows_to_table(doc["output_map"], "output map")
    return PartyStrategy(input_maps=input_maps, output_map=output_map)


def wiring_to_jsonable(wiring: Wiring) -> dict:
    return {
        "format": WIRING_FORMAT,
        "target_shape": list(wiring.target_shape.as_tuple()),
        "resources": [box_to_jsonable(r) for r in wiring.resources],
        "alice": _party_to_jsonable(SideView(wiring, ALICE)),
        "bob": _party_to_jsonable(SideView(wiring, BOB)),
    }


def wiring_from_jsonable(doc, base_dir: Path | None = None) -> Wiring:
    if not isinstance(doc, dict) or doc.get("format") != WIRING_FORMAT:
        raise InvalidWiringError(f"not a wiring document (format field must be {WIRING_FORMAT!r})")
    shape_field = doc.get("target_shape")
    if not (isinstance(shape_field, list) and len(shape_field) == 4):
        raise InvalidWiringError("wiring document needs a 4-element target_shape")
    target_shape = BoxShape(*shape_field)
    resources = []
    for entry in doc.get("resources", []):
        if isinstance(entry, dict) and "ref" in entry:
            ref = Path(entry["ref"])
            if base_dir is not None and not ref.is_absolute():
                ref = base_dir / ref
            resources.append(read_box(ref))
        else:
            resources.append(box_from_jsonable(entry))
    n = len(resources)
    wiring = Wiring(
        resources=tuple(resources),
        alice=_party_from_jsonable(doc.get("alice"), ALICE, n),
        bob=_party_from_jsonable(doc.get("bob"), BOB, n),
        target_shape=target_shape,
    )
    validate_wiring(wiring)
    return wiring


def write_wiring(wiring: Wiring, path) -> None:
    Path(path).write_text(json.dumps(wiring_to_jsonable(wiring), indent=2, sort_keys=True) + "\n")


def read_wiring(path) -> Wiring:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidWiringError(f"malformed wiring file {path}: {exc}") from exc
    return wiring_from_jsonable(doc, base_dir=path.parent)
