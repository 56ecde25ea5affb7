"""Local-polytope membership, games, and classical bounds.

A box is local when it is a convex mixture of deterministic strategies
(Alice's output a function of x alone, Bob's of y alone).  Membership is
decided by an exact phase-1 simplex over the deterministic vertices; the
answer always comes with a checkable certificate: mixture weights when
local, a separating linear functional in success-game form when not.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path

from .boxes import Box, BoxShape, InvalidBoxError, boxes_equal, make_box
from .lp import solve_nonneg_equalities
from .rational import ONE, ZERO, coerce_rational, format_rational

GAME_FORMAT = "nlbox/game"

DEFAULT_VERTEX_CAP = 10**6


class VertexCapExceeded(ValueError):
    """The deterministic-strategy count is above the configured cap."""


class GameShapeMismatch(ValueError):
    """Box and game disagree on alphabet sizes."""


@dataclass(frozen=True)
class Game:
    """An input distribution plus a payoff table over (x, y, a, b)."""

    shape: BoxShape
    input_dist: tuple  # [x][y] -> Fraction, sums to 1
    payoff: tuple      # [x][y][a][b] -> Fraction


def make_game(shape: BoxShape, input_dist, payoff) -> Game:
    dist_rows = []
    total = ZERO
    for x in range(shape.x_size):
        row = []
        for y in range(shape.y_size):
            value = coerce_rational(input_dist[x][y])
            if value < 0:
                raise InvalidBoxError(f"negative input probability at (x={x}, y={y})")
            total += value
            row.append(value)
        dist_rows.append(tuple(row))
    if total != ONE:
        raise InvalidBoxError(f"input distribution sums to {total}, expected 1")
    payoff_rows = tuple(
        tuple(
            tuple(tuple(coerce_rational(payoff[x][y][a][b]) for b in range(shape.b_size))
                  for a in range(shape.a_size))
            for y in range(shape.y_size)
        )
        for x in range(shape.x_size)
    )
    return Game(shape=shape, input_dist=tuple(dist_rows), payoff=payoff_rows)


def chsh_game() -> Game:
    """Uniform inputs, payoff 1 iff a XOR b equals x AND y."""
    return modp_game(2)


def modp_game(p: int) -> Game:
    """Uniform binary inputs, payoff 1 iff (b - a) mod p = x*y.

    For p = 2 this is the CHSH success game; the mod-p box wins it with
    certainty by construction.
    """
    if p < 2:
        raise InvalidBoxError(f"mod-p game needs p >= 2, got {p}")
    shape = BoxShape(2, 2, p, p)
    quarter = Fraction(1, 4)
    dist = ((quarter, quarter), (quarter, quarter))
    payoff = tuple(
        tuple(
            tuple(tuple(ONE if (b - a) % p == x * y else ZERO for b in range(p)) for a in range(p))
            for y in range(2)
        )
        for x in range(2)
    )
    return Game(shape=shape, input_dist=dist, payoff=payoff)


def game_value(box: Box, game: Game) -> Fraction:
    """Expected payoff of the box under the game's input distribution, exact."""
    if box.shape != game.shape:
        raise GameShapeMismatch(f"box shape {box.shape.as_tuple()} vs game shape {game.shape.as_tuple()}")
    total = ZERO
    for x, y in box.shape.input_pairs():
        weight = game.input_dist[x][y]
        if weight == 0:
            continue
        block = box.table[x][y]
        pay = game.payoff[x][y]
        inner = ZERO
        for a in range(box.shape.a_size):
            for b in range(box.shape.b_size):
                if pay[a][b] != 0 and block[a][b] != 0:
                    inner += pay[a][b] * block[a][b]
        total += weight * inner
    return total


def vertex_count(shape: BoxShape) -> int:
    return shape.a_size**shape.x_size * shape.b_size**shape.y_size


def vertex_functions(shape: BoxShape):
    """Yield (alice_outputs, bob_outputs) in lexicographic order.

    ``alice_outputs[x]`` is Alice's deterministic answer to x, likewise for
    Bob; the Alice function is the major index.
    """
    for afunc in product(range(shape.a_size), repeat=shape.x_size):
        for bfunc in product(range(shape.b_size), repeat=shape.y_size):
            yield afunc, bfunc


def deterministic_box(shape: BoxShape, afunc, bfunc) -> Box:
    table = tuple(
        tuple(
            tuple(
                tuple(ONE if (a, b) == (afunc[x], bfunc[y]) else ZERO for b in range(shape.b_size))
                for a in range(shape.a_size)
            )
            for y in range(shape.y_size)
        )
        for x in range(shape.x_size)
    )
    return Box(shape=shape, table=table)


def local_vertices(shape: BoxShape, cap: int = DEFAULT_VERTEX_CAP) -> list[Box]:
    """All deterministic boxes of this shape, lexicographic in (Alice, Bob) functions."""
    count = vertex_count(shape)
    if count > cap:
        raise VertexCapExceeded(f"shape {shape.as_tuple()} has {count} deterministic vertices, cap is {cap}")
    return [deterministic_box(shape, afunc, bfunc) for afunc, bfunc in vertex_functions(shape)]


def best_local_value(shape: BoxShape, game: Game, cap: int = DEFAULT_VERTEX_CAP) -> tuple[Fraction, Box]:
    """Maximum game value over deterministic strategies, with the first maximizer.

    The witness is the lexicographically least maximizing vertex, so results
    are reproducible across runs and worker counts.
    """
    if shape != game.shape:
        raise GameShapeMismatch(f"shape {shape.as_tuple()} vs game shape {game.shape.as_tuple()}")
    count = vertex_count(shape)
    if count > cap:
        raise VertexCapExceeded(f"shape {shape.as_tuple()} has {count} deterministic vertices, cap is {cap}")
    best: Fraction | None = None
    witness: Box | None = None
    for afunc, bfunc in vertex_functions(shape):
        vertex = deterministic_box(shape, afunc, bfunc)
        value = game_value(vertex, game)
        if best is None or value > best:
            best = value
            witness = vertex
    assert best is not None and witness is not None
    return best, witness


@dataclass(frozen=True)
class BellCertificate:
    """A separating functional in success-game form.

    ``achieved > local_bound`` and ``local_bound`` equals the direct maximum
    of the game over all deterministic vertices.
    """

    game: Game
    local_bound: Fraction
    achieved: Fraction


@dataclass(frozen=True)
class LocalityCertificate:
    """Outcome of the membership test: vertex weights, or a Bell functional."""

    local: bool
    # Sparse mixture over local_vertices(shape) indices (local case).
    weights: tuple | None
    bell: BellCertificate | None


def _bell_certificate_from_farkas(box: Box, farkas: tuple, cap: int) -> BellCertificate:
    """Shift and scale a Farkas row functional into success-game form.

    Shifting each (x, y) block by a constant moves every box's value by the
    same amount (blocks sum to one), so separation is preserved; the blocks
    are shifted to have minimum zero and scaled so the top coefficient is
    one.  The local bound of the resulting game is then recomputed directly
    over all deterministic vertices rather than trusted from the dual.
    """
    s = box.shape
    raw = {}
    idx = 0
    for x, y in s.input_pairs():
        for a, b in s.output_pairs():
            raw[(x, y, a, b)] = farkas[idx]
            idx += 1
    shifted = {}
    for x, y in s.input_pairs():
        floor = min(raw[(x, y, a, b)] for a, b in s.output_pairs())
        for a, b in s.output_pairs():
            shifted[(x, y, a, b)] = raw[(x, y, a, b)] - floor
    scale = max(shifted.values())
    if scale == 0:
        raise AssertionError("separating functional is constant on outcome blocks")
    uniform = Fraction(1, s.x_size * s.y_size)
    dist = tuple(tuple(uniform for _ in range(s.y_size)) for _ in range(s.x_size))
    payoff = tuple(
        tuple(
            tuple(tuple(shifted[(x, y, a, b)] / scale for b in range(s.b_size)) for a in range(s.a_size))
            for y in range(s.y_size)
        )
        for x in range(s.x_size)
    )
    game = Game(shape=s, input_dist=dist, payoff=payoff)
    local_bound, _ = best_local_value(s, game, cap)
    achieved = game_value(box, game)
    if achieved <= local_bound:
        raise AssertionError("certificate lost separation during normalization")
    return BellCertificate(game=game, local_bound=local_bound, achieved=achieved)


def is_local(box: Box, cap: int = DEFAULT_VERTEX_CAP) -> LocalityCertificate:
    """Exact membership of the box in the convex hull of deterministic vertices.

    Local boxes come with mixture weights that reproduce the table exactly;
    nonlocal boxes come with a Bell certificate whose bound is beaten.
    """
    vertices = local_vertices(box.shape, cap)
    s = box.shape
    entry_order = [(x, y, a, b) for x, y in s.input_pairs() for a, b in s.output_pairs()]
    columns = [[vertex.table[x][y][a][b] for (x, y, a, b) in entry_order] for vertex in vertices]
    rhs = [box.table[x][y][a][b] for (x, y, a, b) in entry_order]
    result = solve_nonneg_equalities(columns, rhs)
    if result.feasible:
        weights = tuple((j, w) for j, w in enumerate(result.solution) if w != 0)
        return LocalityCertificate(local=True, weights=weights, bell=None)
    bell = _bell_certificate_from_farkas(box, result.certificate, cap)
    return LocalityCertificate(local=False, weights=None, bell=bell)


def mixture_of_vertices(shape: BoxShape, weights, cap: int = DEFAULT_VERTEX_CAP) -> Box:
    """Rebuild the box a sparse vertex mixture describes; weights must sum to 1."""
    vertices = local_vertices(shape, cap)
    table = [
        [[[ZERO for _ in range(shape.b_size)] for _ in range(shape.a_size)] for _ in range(shape.y_size)]
        for _ in range(shape.x_size)
    ]
    for j, w in weights:
        vertex = vertices[j]
        for x, y in shape.input_pairs():
            for a, b in shape.output_pairs():
                table[x][y][a][b] += w * vertex.table[x][y][a][b]
    return make_box(shape, table)


def game_to_jsonable(game: Game) -> dict:
    s = game.shape
    return {
        "format": GAME_FORMAT,
        "shape": list(s.as_tuple()),
        "input_dist": [[format_rational(game.input_dist[x][y]) for y in range(s.y_size)] for x in range(s.x_size)],
        "payoff": [
            [[[format_rational(game.payoff[x][y][a][b]) for b in range(s.b_size)]
              for a in range(s.a_size)]
             for y in range(s.y_size)]
            for x in range(s.x_size)
        ],
    }


def game_from_jsonable(doc) -> Game:
    if not isinstance(doc, dict) or doc.get("format") != GAME_FORMAT:
        raise InvalidBoxError(f"not a game document (format field must be {GAME_FORMAT!r})")
    shape_field = doc.get("shape")
    if not (isinstance(shape_field, list) and len(shape_field) == 4):
        raise InvalidBoxError("game document needs a 4-element shape field")
    shape = BoxShape(*shape_field)
    return make_game(shape, doc.get("input_dist"), doc.get("payoff"))


def write_game(game: Game, path) -> None:
    Path(path).write_text(json.dumps(game_to_jsonable(game), indent=2, sort_keys=True) + "\n")


def read_game(path) -> Game:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidBoxError(f"malformed game file {path}: {exc}") from exc
    return game_from_jsonable(doc)


def certificate_is_sound(box: Box, certificate: LocalityCertificate, cap: int = DEFAULT_VERTEX_CAP) -> bool:
    """Re-verify a certificate against the box it was issued for."""
    if certificate.local:
        total = sum((w for _, w in certificate.weights), ZERO)
        if total != ONE or any(w < 0 for _, w in certificate.weights):
            return False
        return boxes_equal(mixture_of_vertices(box.shape, certificate.weights, cap), box)
    bell = certificate.bell
    if bell is None:
        return False
    bound, _ = best_local_value(box.shape, bell.game, cap)
    return bound == bell.local_bound and game_value(box, bell.game) == bell.achieved and bell.achieved > bound
