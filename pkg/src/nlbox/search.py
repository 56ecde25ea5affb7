"""Exhaustive and pruned searches over deterministic wirings.

Three engines, all exact and all scanning their full space so that results
(including counts) are independent of worker count:

* ``unpruned`` enumerates every (Alice strategy, Bob strategy) pair and
  evaluates the wiring with scaled-integer arithmetic.  It is the simple
  reference engine; practical for one resource.

* ``pruned`` applies to relation-style resources (output pairs tied by a
  bijection, uniform own-side marginals, e.g. any mod-p box) and targets
  whose support forces Bob's output from Alice's output and both inputs.
  Bob's output map is then never enumerated: it is propagated from the
  constraints, and only (Alice strategy, Bob input maps) pairs are checked.
  When Alice's output-map space itself is too large to enumerate, a second
  phase propagates both output maps jointly from per-component seed values.

* ``best-value`` searches (game maximization) reuse the same spaces with a
  per-cell greedy completion of Bob's output map, which is exact because
  cells are independent once everything else is fixed.

``strategies_examined`` counts the engine's own units of work: full
strategy pairs for ``unpruned``, (Alice strategy, Bob input-maps)
propagation checks for ``pruned`` phase 1, and propagation seeds for
phase 2.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .boxes import Box, BoxShape, boxes_equal, is_no_signalling
from .locality import Game, game_value
from .rational import ONE, ZERO
from .wiring import PartyStrategy, Wiring, evaluate_wiring

DEFAULT_SEARCH_BUDGET = 10**9
# Phase 1 materializes all Alice output maps as a numpy array of digit rows.
DEFAULT_ROW_LIMIT = 1_000_000
# Phase 2 materializes joint output-map candidates per input-map pair.
DEFAULT_COMBO_CAP = 10_000
# The unpruned engine materializes one side's strategy list.
SIDE_LIMIT = 1 << 20

FOUND = "found"
EXHAUSTED = "exhausted"


class SearchBudgetExceeded(RuntimeError):
    """The estimated number of checks is above the configured budget."""

    def __init__(self, message: str, estimate: int, budget: int) -> None:
        super().__init__(message)
        self.estimate = estimate
        self.budget = budget


class EngineNotApplicable(ValueError):
    """The requested engine's preconditions do not hold for this instance."""


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a search over deterministic wirings.

    ``best_value`` is the best game value among wirings the engine covered:
    for perfect-simulation searches this is the mass the wiring places on
    the target's support under uniform inputs, so value 1 means the support
    condition holds (probabilities may still differ).  The unpruned engine
    and pruned phase 1 cover the whole space exactly; phase 2 reports the
    best over the candidates it materialized.
    """

    outcome: str
    witness: Wiring | None
    strategies_examined: int
    best_value: Fraction
    best_witness: Wiring | None
    engine: str


def support_game(target: Box) -> Game:
    """Uniform-input game paying 1 exactly on the target's support."""
    s = target.shape
    uniform = Fraction(1, s.x_size * s.y_size)
    dist = tuple(tuple(uniform for _ in range(s.y_size)) for _ in range(s.x_size))
    payoff = tuple(
        tuple(
            tuple(tuple(ONE if target.table[x][y][a][b] > 0 else ZERO for b in range(s.b_size))
                  for a in range(s.a_size))
            for y in range(s.y_size)
        )
        for x in range(s.x_size)
    )
    return Game(shape=s, input_dist=dist, payoff=payoff)


# ---------------------------------------------------------------------------
# Strategy spaces


@dataclass(frozen=True)
class TableSpec:
    """One lookup table: ``rows`` own-input values, ``cols`` history entries,
    values below ``radix``."""

    rows: int
    cols: int
    radix: int

    @property
    def digits(self) -> int:
        return self.rows * self.cols

    @property
    def count(self) -> int:
        return self.radix**self.digits

    def table_at(self, index: int) -> tuple:
        digits = [0] * self.digits
        for pos in range(self.digits - 1, -1, -1):
            index, digits[pos] = divmod(index, self.radix)
        return tuple(tuple(digits[r * self.cols:(r + 1) * self.cols]) for r in range(self.rows))


@dataclass(frozen=True)
class MapsSpace:
    """An ordered stack of tables; indices enumerate it lexicographically,
    first table most significant."""

    specs: tuple

    @property
    def count(self) -> int:
        return math.prod(spec.count for spec in self.specs)

    def tables_at(self, index: int) -> tuple:
        parts: list = []
        for spec in reversed(self.specs):
            index, sub = divmod(index, spec.count)
            parts.append(spec.table_at(sub))
        parts.reverse()
        return tuple(parts)


def party_spaces(target_shape: BoxShape, resources, side: str) -> tuple[MapsSpace, TableSpec]:
    """(input-map space, output-map spec) for one party."""
    if side == "alice":
        final_in = target_shape.x_size
        final_out = target_shape.a_size
        res_in = [r.shape.x_size for r in resources]
        res_out = [r.shape.a_size for r in resources]
    else:
        final_in = target_shape.y_size
        final_out = target_shape.b_size
        res_in = [r.shape.y_size for r in resources]
        res_out = [r.shape.b_size for r in resources]
    specs = []
    for l in range(len(resources)):
        specs.append(TableSpec(rows=final_in, cols=math.prod(res_out[:l]), radix=res_in[l]))
    output_spec = TableSpec(rows=final_in, cols=math.prod(res_out), radix=final_out)
    return MapsSpace(specs=tuple(specs)), output_spec


# ---------------------------------------------------------------------------
# Instance analysis (pruned-engine preconditions)


@dataclass(frozen=True)
class RelationResources:
    """Resources whose output pairs are tied by a per-input bijection.

    For each resource l and inputs (u, v), Bob's output is ``phi[l][u][v][a]``
    when Alice's is a, the map is a bijection, and Alice's outputs are
    uniform over the full alphabet.  Mod-p boxes are the motivating case.
    """

    phi: tuple          # [l][u][v][a] -> b
    out_sizes: tuple    # common output alphabet per resource
    transcripts: int    # product of out_sizes


def relation_resources(resources) -> RelationResources | None:
    """Detect the pruned engine's resource preconditions; None if they fail."""
    phis = []
    sizes = []
    for resource in resources:
        s = resource.shape
        if s.a_size != s.b_size or not is_no_signalling(resource):
            return None
        o = s.a_size
        want = Fraction(1, o)
        maps = []
        for u in range(s.x_size):
            row = []
            for v in range(s.y_size):
                forced = []
                for a in range(o):
                    support = [b for b in range(o) if resource.table[u][v][a][b] > 0]
                    if len(support) != 1:
                        return None
                    if resource.table[u][v][a][support[0]] != want:
                        return None
                    forced.append(support[0])
                if sorted(forced) != list(range(o)):
                    return None
                row.append(tuple(forced))
            maps.append(tuple(row))
        phis.append(tuple(maps))
        sizes.append(o)
    return RelationResources(phi=tuple(phis), out_sizes=tuple(sizes), transcripts=math.prod(sizes))


def target_relation(target: Box):
    """Per-(x, y) map from Alice's output to the only allowed Bob output.

    Returns (phi, inverse) with -1 marking outputs of zero total weight; both
    are None when the target's support is not functional / not injective.
    """
    s = target.shape
    phi = []
    inverse = []
    injective = True
    for x in range(s.x_size):
        prow = []
        irow = []
        for y in range(s.y_size):
            forced = []
            inv = [-1] * s.b_size
            for a in range(s.a_size):
                support = [b for b in range(s.b_size) if target.table[x][y][a][b] > 0]
                if len(support) > 1:
                    return None, None
                if support:
                    forced.append(support[0])
                    if inv[support[0]] != -1:
                        injective = False
                    inv[support[0]] = a
                else:
                    forced.append(-1)
            prow.append(tuple(forced))
            irow.append(tuple(inv))
        phi.append(tuple(prow))
        inverse.append(tuple(irow))
    return tuple(phi), (tuple(inverse) if injective else None)


# ---------------------------------------------------------------------------
# Common instance bundle


@dataclass(frozen=True)
class _Instance:
    kind: str                     # "perfect" or "best"
    target: Box | None
    game: Game | None
    resources: tuple
    target_shape: BoxShape
    alice_inputs: MapsSpace
    alice_output: TableSpec
    bob_inputs: MapsSpace
    bob_output: TableSpec
    relation: RelationResources | None
    target_phi: tuple | None
    target_phi_inv: tuple | None


def _build_instance(kind: str, target: Box | None, game: Game | None, resources) -> _Instance:
    target_shape = target.shape if target is not None else game.shape
    for l, resource in enumerate(resources):
        if not is_no_signalling(resource):
            raise EngineNotApplicable(f"resource {l} signals; searches require no-signalling resources")
    alice_in, alice_out = party_spaces(target_shape, resources, "alice")
    bob_in, bob_out = party_spaces(target_shape, resources, "bob")
    relation = relation_resources(resources)
    phi, phi_inv = (None, None)
    if kind == "perfect":
        phi, phi_inv = target_relation(target)
    return _Instance(
        kind=kind,
        target=target,
        game=game,
        resources=tuple(resources),
        target_shape=target_shape,
        alice_inputs=alice_in,
        alice_output=alice_out,
        bob_inputs=bob_in,
        bob_output=bob_out,
        relation=relation,
        target_phi=phi,
        target_phi_inv=phi_inv,
    )


def _pruned_applicable(inst: _Instance) -> bool:
    if inst.relation is None or inst.target_shape.x_size != 2:
        return False
    if inst.kind == "perfect":
        return inst.target_phi is not None
    return True


# ---------------------------------------------------------------------------
# Forward simulation shared by the pruned phases


def _demand_maps(inst: _Instance, ga_tables, gb_tables):
    """For each Bob output-map cell (y, transcript), the Alice cell whose
    output forces it, one entry per Alice input value.

    Returns ``demands[x][k] = alice cell index``.  Coverage is total because
    each resource ties the two outputs bijectively.
    """
    rel = inst.relation
    shape = inst.target_shape
    P = rel.transcripts
    X, Y = shape.x_size, shape.y_size
    n = len(inst.resources)
    demands = [[-1] * (Y * P) for _ in range(X)]
    out_sizes = rel.out_sizes
    for x in range(X):
        for y in range(Y):
            for za in product(*(range(o) for o in out_sizes)):
                pa = 0
                pb = 0
                for l in range(n):
                    u = ga_tables[l][x][pa]
                    v = gb_tables[l][y][pb]
                    al = za[l]
                    bl = rel.phi[l][u][v][al]
                    pa = pa * out_sizes[l] + al
                    pb = pb * out_sizes[l] + bl
                k = y * P + pb
                if demands[x][k] != -1:
                    raise AssertionError("transcript map lost injectivity; resource detection is broken")
                demands[x][k] = x * P + pa
    return demands


def _alice_strategy(inst: _Instance, ga_tables, fa_digits) -> PartyStrategy:
    P = inst.alice_output.cols
    rows = tuple(tuple(int(fa_digits[x * P + c]) for c in range(P)) for x in range(inst.target_shape.x_size))
    return PartyStrategy(input_maps=ga_tables, output_map=rows)


def _bob_strategy(inst: _Instance, gb_tables, fb_cells) -> PartyStrategy:
    P = inst.bob_output.cols
    rows = tuple(tuple(int(fb_cells[y * P + c]) for c in range(P)) for y in range(inst.target_shape.y_size))
    return PartyStrategy(input_maps=gb_tables, output_map=rows)


def _wiring(inst: _Instance, alice: PartyStrategy, bob: PartyStrategy) -> Wiring:
    return Wiring(resources=inst.resources, alice=alice, bob=bob, target_shape=inst.target_shape)


# ---------------------------------------------------------------------------
# Pruned phase 1: enumerate Alice strategies x Bob input maps


_ROWS_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _all_rows(radix: int, cells: int) -> np.ndarray:
    key = (radix, cells)
    if key not in _ROWS_CACHE:
        arr = np.array(list(product(range(radix), repeat=cells)), dtype=np.int16)
        arr = arr.reshape(radix**cells, cells)
        _ROWS_CACHE[key] = arr
    return _ROWS_CACHE[key]


def _phase1_chunk(inst: _Instance, span: tuple[int, int], combo_cap: int) -> dict:
    rel = inst.relation
    shape = inst.target_shape
    P = rel.transcripts
    Y = shape.y_size
    K = Y * P
    O = shape.a_size
    cells = inst.alice_output.digits
    rows = _all_rows(O, cells)
    R = rows.shape[0]
    GB = inst.bob_inputs.count

    if inst.kind == "perfect":
        phi_np = [[np.array(inst.target_phi[x][y], dtype=np.int16) for y in range(Y)] for x in range(2)]
        full = 2 * K
    else:
        pairmax, pairargmin, weight_den = _game_cell_tables(inst)

    examined = 0
    best_key = None          # (-value, ga, row, gb) minimized
    found_key = None         # (ga, row, gb) minimized, verified
    found_wiring = None
    current_ga = -1
    pending: list[tuple[int, int]] = []

    def flush_pending(ga_idx: int, ga_tables) -> None:
        nonlocal found_key, found_wiring
        if found_key is not None or not pending or inst.kind != "perfect":
            pending.clear()
            return
        pending.sort()
        for row_idx, gb_idx in pending:
            gb_tables = inst.bob_inputs.tables_at(gb_idx)
            demands = _demand_maps(inst, ga_tables, gb_tables)
            fa = rows[row_idx]
            fb = [0] * K
            for k in range(K):
                y = k // P
                fb[k] = inst.target_phi[0][y][fa[demands[0][k]]]
            alice = _alice_strategy(inst, ga_tables, fa)
            bob = _bob_strategy(inst, gb_tables, fb)
            wiring = _wiring(inst, alice, bob)
            if boxes_equal(evaluate_wiring(wiring), inst.target):
                found_key = (ga_idx, row_idx, gb_idx)
                found_wiring = wiring
                break
        pending.clear()

    ga_tables = None
    for t in range(span[0], span[1]):
        ga_idx, gb_idx = divmod(t, GB)
        if ga_idx != current_ga:
            if current_ga >= 0:
                flush_pending(current_ga, ga_tables)
            current_ga = ga_idx
            ga_tables = inst.alice_inputs.tables_at(ga_idx)
        gb_tables = inst.bob_inputs.tables_at(gb_idx)
        demands = _demand_maps(inst, ga_tables, gb_tables)

        score = np.zeros(R, dtype=np.int64)
        if inst.kind == "perfect":
            for k in range(K):
                y = k // P
                t0 = phi_np[0][y][rows[:, demands[0][k]]]
                t1 = phi_np[1][y][rows[:, demands[1][k]]]
                agree = (t0 == t1) & (t0 >= 0)
                score += agree
                score += (t0 >= 0) | (t1 >= 0)
            consistent = np.flatnonzero(score == full)
            if consistent.size:
                pending.extend((int(r), gb_idx) for r in consistent)
        else:
            for k in range(K):
                y = k // P
                f0 = rows[:, demands[0][k]]
                f1 = rows[:, demands[1][k]]
                score += pairmax[y][f0, f1]

        top = int(score.max())
        row_idx = int(score.argmax())
        key = (-top, ga_idx, row_idx, gb_idx)
        if best_key is None or key < best_key:
            best_key = key
        examined += R

    if current_ga >= 0:
        flush_pending(current_ga, ga_tables)

    return {
        "examined": examined,
        "best_key": best_key,
        "found_key": found_key,
        "found_wiring": found_wiring,
    }


def _game_cell_tables(inst: _Instance):
    """Integer tables for the greedy Bob completion under a game.

    ``pairmax[y][a0, a1]`` is the best total scaled payoff a Bob cell at
    input y can contribute when Alice answers a0 to x=0 and a1 to x=1;
    ``pairargmin[y][a0, a1]`` is the least Bob output achieving it.  Scaling
    is by the common denominator of input_dist * payoff.
    """
    game = inst.game
    s = game.shape
    den = 1
    for x in range(s.x_size):
        for y in range(s.y_size):
            for a in range(s.a_size):
                for b in range(s.b_size):
                    v = game.input_dist[x][y] * game.payoff[x][y][a][b]
                    den = den * v.denominator // math.gcd(den, v.denominator)
    w = [
        [[[int(game.input_dist[x][y] * game.payoff[x][y][a][b] * den) for b in range(s.b_size)]
          for a in range(s.a_size)]
         for y in range(s.y_size)]
        for x in range(s.x_size)
    ]
    pairmax = []
    pairargmin = []
    for y in range(s.y_size):
        best = np.zeros((s.a_size, s.a_size), dtype=np.int64)
        argmin = np.zeros((s.a_size, s.a_size), dtype=np.int16)
        for a0 in range(s.a_size):
            for a1 in range(s.a_size):
                totals = [w[0][y][a0][b] + w[1][y][a1][b] for b in range(s.b_size)]
                top = max(totals)
                best[a0, a1] = top
                argmin[a0, a1] = totals.index(top)
        pairmax.append(best)
        pairargmin.append(argmin)
    return pairmax, pairargmin, den


# ---------------------------------------------------------------------------
# Pruned phase 2: propagate both output maps from component seeds


def _phase2_solutions(inst: _Instance, demands, combo_cap: int):
    """All support-consistent joint output maps for fixed input maps.

    Nodes are Alice cells then Bob cells; edges force Bob's value from
    Alice's (and back, the target relation being injective).  Connected
    components are solved independently by trying every value of their
    least node.  Returns (list of (fa, fb) pairs or None if over the cap,
    seeds tried).
    """
    rel = inst.relation
    shape = inst.target_shape
    P = rel.transcripts
    X, Y = 2, shape.y_size
    K = Y * P
    A_CELLS = shape.x_size * P
    phi = inst.target_phi
    phi_inv = inst.target_phi_inv

    edges_by_node: list[list[tuple[int, int, int]]] = [[] for _ in range(A_CELLS + K)]
    for x in range(X):
        for k in range(K):
            i = demands[x][k]
            edges_by_node[i].append((i, k, x))
            edges_by_node[A_CELLS + k].append((i, k, x))

    components: list[list[int]] = []
    seen = [False] * (A_CELLS + K)
    for start in range(A_CELLS + K):
        if seen[start]:
            continue
        comp = []
        stack = [start]
        seen[start] = True
        while stack:
            node = stack.pop()
            comp.append(node)
            for i, k, _x in edges_by_node[node]:
                for other in (i, A_CELLS + k):
                    if not seen[other]:
                        seen[other] = True
                        stack.append(other)
        components.append(sorted(comp))

    seeds_tried = 0

    def propagate(seed_node: int, seed_value: int):
        values: dict[int, int] = {seed_node: seed_value}
        stack = [seed_node]
        while stack:
            node = stack.pop()
            for i, k, x in edges_by_node[node]:
                y = k // P
                fa = values.get(i)
                fb = values.get(A_CELLS + k)
                if fa is not None:
                    forced = phi[x][y][fa]
                    if forced < 0:
                        return None
                    if fb is None:
                        values[A_CELLS + k] = forced
                        stack.append(A_CELLS + k)
                    elif fb != forced:
                        return None
                elif fb is not None:
                    forced = phi_inv[x][y][fb]
                    if forced < 0:
                        return None
                    values[i] = forced
                    stack.append(i)
        return values

    per_component: list[list[dict[int, int]]] = []
    for comp in components:
        seed = comp[0]
        size = shape.a_size if seed < A_CELLS else shape.b_size
        solutions = []
        for value in range(size):
            seeds_tried += 1
            got = propagate(seed, value)
            if got is not None and len(got) == len(comp):
                solutions.append(got)
        if not solutions:
            return [], seeds_tried
        per_component.append(solutions)

    total = math.prod(len(s) for s in per_component)
    if total > combo_cap:
        return None, seeds_tried

    candidates = []
    for combo in product(*per_component):
        merged: dict[int, int] = {}
        for part in combo:
            merged.update(part)
        fa = tuple(merged[i] for i in range(A_CELLS))
        fb = tuple(merged[A_CELLS + k] for k in range(K))
        candidates.append((fa, fb))
    candidates.sort()
    return candidates, seeds_tried


def _phase2_chunk(inst: _Instance, span: tuple[int, int], combo_cap: int) -> dict:
    GB = inst.bob_inputs.count
    examined = 0
    overflow = False
    found_key = None
    found_wiring = None
    best_value_one = False
    best_key = None  # (fa, gb_idx, fb) for value-1 candidates, minimized per first ga

    current_ga = -1
    ga_tables = None
    block: list[tuple[tuple, int, tuple]] = []

    def flush_block(ga_idx: int, tables) -> None:
        nonlocal found_key, found_wiring, best_key, best_value_one
        if not block:
            return
        block.sort()
        if best_key is None:
            best_key = (ga_idx,) + block[0]
            best_value_one = True
        if found_key is None:
            for fa, gb_idx, fb in block:
                gb_tables = inst.bob_inputs.tables_at(gb_idx)
                alice = _alice_strategy(inst, tables, fa)
                bob = _bob_strategy(inst, gb_tables, fb)
                wiring = _wiring(inst, alice, bob)
                if boxes_equal(evaluate_wiring(wiring), inst.target):
                    found_key = (ga_idx, fa, gb_idx, fb)
                    found_wiring = wiring
                    break
        block.clear()

    for t in range(span[0], span[1]):
        ga_idx, gb_idx = divmod(t, GB)
        if ga_idx != current_ga:
            if current_ga >= 0:
                flush_block(current_ga, ga_tables)
            current_ga = ga_idx
            ga_tables = inst.alice_inputs.tables_at(ga_idx)
        gb_tables = inst.bob_inputs.tables_at(gb_idx)
        demands = _demand_maps(inst, ga_tables, gb_tables)
        candidates, seeds = _phase2_solutions(inst, demands, combo_cap)
        examined += seeds
        if candidates is None:
            overflow = True
            continue
        block.extend((fa, gb_idx, fb) for fa, fb in candidates)
    if current_ga >= 0:
        flush_block(current_ga, ga_tables)

    return {
        "examined": examined,
        "overflow": overflow,
        "found_key": found_key,
        "found_wiring": found_wiring,
        "best_key": best_key,
        "best_value_one": best_value_one,
    }


# ---------------------------------------------------------------------------
# Unpruned engine: literal pairs with scaled-integer evaluation


@dataclass(frozen=True)
class _SideBehavior:
    """One strategy's transcript walk per own input: for each own input a
    list of (transcript digits, resource inputs along the way, final out)."""

    walks: tuple
    index: int


def _side_behavior(inst: _Instance, side: str, index: int) -> _SideBehavior:
    if side == "alice":
        space, out_spec = inst.alice_inputs, inst.alice_output
        final_in = inst.target_shape.x_size
        res_out = [r.shape.a_size for r in inst.resources]
    else:
        space, out_spec = inst.bob_inputs, inst.bob_output
        final_in = inst.target_shape.y_size
        res_out = [r.shape.b_size for r in inst.resources]
    g_idx, f_idx = divmod(index, out_spec.count)
    tables = space.tables_at(g_idx)
    out_table = out_spec.table_at(f_idx)
    walks = []
    for own in range(final_in):
        entries = []
        for code, digits in enumerate(product(*(range(o) for o in res_out))):
            prefix = 0
            inputs = []
            for l, d in enumerate(digits):
                inputs.append(tables[l][own][prefix])
                prefix = prefix * res_out[l] + d
            entries.append((digits, tuple(inputs), out_table[own][code]))
        walks.append(tuple(entries))
    return _SideBehavior(walks=tuple(walks), index=index)


def _strategy_from_behavior(inst: _Instance, side: str, behavior: _SideBehavior) -> PartyStrategy:
    space, out_spec = (inst.alice_inputs, inst.alice_output) if side == "alice" else (
        inst.bob_inputs, inst.bob_output)
    g_idx, f_idx = divmod(behavior.index, out_spec.count)
    return PartyStrategy(input_maps=space.tables_at(g_idx), output_map=out_spec.table_at(f_idx))


def _scaled_resources(inst: _Instance):
    tables = []
    scale = 1
    for resource in inst.resources:
        den = 1
        s = resource.shape
        for u in range(s.x_size):
            for v in range(s.y_size):
                for a in range(s.a_size):
                    for b in range(s.b_size):
                        d = resource.table[u][v][a][b].denominator
                        den = den * d // math.gcd(den, d)
        t = [
            [[[int(resource.table[u][v][a][b] * den) for b in range(s.b_size)]
              for a in range(s.a_size)]
             for v in range(s.y_size)]
            for u in range(s.x_size)
        ]
        tables.append(t)
        scale *= den
    return tables, scale


def _unpruned_chunk(inst: _Instance, span: tuple[int, int], combo_cap: int) -> dict:
    shape = inst.target_shape
    X, Y, A, B = shape.as_tuple()
    res_int, scale = _scaled_resources(inst)
    n = len(inst.resources)

    if inst.kind == "perfect":
        target_scaled = [[None] * Y for _ in range(X)]
        exact = True
        for x in range(X):
            for y in range(Y):
                block = []
                for a in range(A):
                    row = []
                    for b in range(B):
                        v = inst.target.table[x][y][a][b] * scale
                        if v.denominator != 1:
                            exact = False
                        row.append(v)
                    block.append(row)
                target_scaled[x][y] = block
        support = [
            [[(a, b) for a in range(A) for b in range(B) if inst.target.table[x][y][a][b] > 0]
             for y in range(Y)]
            for x in range(X)
        ]
        value_den = X * Y * scale
    else:
        den = 1
        for x in range(X):
            for y in range(Y):
                for a in range(A):
                    for b in range(B):
                        v = inst.game.input_dist[x][y] * inst.game.payoff[x][y][a][b]
                        den = den * v.denominator // math.gcd(den, v.denominator)
        cint = [
            [[[int(inst.game.input_dist[x][y] * inst.game.payoff[x][y][a][b] * den)
               for b in range(B)] for a in range(A)]
             for y in range(Y)]
            for x in range(X)
        ]
        value_den = den * scale

    a_total = inst.alice_inputs.count * inst.alice_output.count
    b_total = inst.bob_inputs.count * inst.bob_output.count
    bob_behaviors = [_side_behavior(inst, "bob", i) for i in range(b_total)]

    examined = 0
    best_num = None
    best_key = None
    found_key = None
    found_wiring = None

    t = span[0]
    while t < span[1]:
        a_idx, b_start = divmod(t, b_total)
        alice = _side_behavior(inst, "alice", a_idx)
        b_stop = min(b_total, b_start + (span[1] - t))
        for b_idx in range(b_start, b_stop):
            bob = bob_behaviors[b_idx]
            acc = [[[[0] * B for _ in range(A)] for _ in range(Y)] for _ in range(X)]
            for x in range(X):
                awalk = alice.walks[x]
                for y in range(Y):
                    block = acc[x][y]
                    for za, useq, a in awalk:
                        for zb, vseq, b in bob.walks[y]:
                            w = 1
                            for l in range(n):
                                w *= res_int[l][useq[l]][vseq[l]][za[l]][zb[l]]
                                if not w:
                                    break
                            if w:
                                block[a][b] += w

            if inst.kind == "perfect":
                num = 0
                equal = exact
                for x in range(X):
                    for y in range(Y):
                        block = acc[x][y]
                        for a, b in support[x][y]:
                            num += block[a][b]
                        if equal:
                            tgt = target_scaled[x][y]
                            for a in range(A):
                                for b in range(B):
                                    if block[a][b] != tgt[a][b]:
                                        equal = False
                                        break
                                if not equal:
                                    break
                if equal and found_key is None:
                    found_key = (a_idx, b_idx)
            else:
                num = 0
                for x in range(X):
                    for y in range(Y):
                        block = acc[x][y]
                        cxy = cint[x][y]
                        for a in range(A):
                            for b in range(B):
                                if block[a][b]:
                                    num += cxy[a][b] * block[a][b]

            if best_num is None or num > best_num:
                best_num = num
                best_key = (a_idx, b_idx)
            examined += 1
        t += b_stop - b_start

    if found_key is not None:
        alice = _strategy_from_behavior(inst, "alice", _side_behavior(inst, "alice", found_key[0]))
        bob = _strategy_from_behavior(inst, "bob", bob_behaviors[found_key[1]])
        found_wiring = _wiring(inst, alice, bob)

    return {
        "examined": examined,
        "best_num": best_num,
        "best_den": value_den,
        "best_key": best_key,
        "found_key": found_key,
        "found_wiring": found_wiring,
    }


# ---------------------------------------------------------------------------
# Chunk execution and merging


def _chunk_entry(args):
    name, inst, span, combo_cap = args
    runner = {"phase1": _phase1_chunk, "phase2": _phase2_chunk, "unpruned": _unpruned_chunk}[name]
    return runner(inst, span, combo_cap)


def _run_chunks(name: str, inst: _Instance, total: int, workers: int, combo_cap: int) -> list[dict]:
    if total == 0:
        return []
    workers = max(1, min(workers, total))
    size = -(-total // workers)
    spans = [(lo, min(total, lo + size)) for lo in range(0, total, size)]
    if len(spans) == 1:
        return [_chunk_entry((name, inst, spans[0], combo_cap))]
    with ProcessPoolExecutor(max_workers=len(spans)) as pool:
        return list(pool.map(_chunk_entry, [(name, inst, span, combo_cap) for span in spans]))


# ---------------------------------------------------------------------------
# Engine drivers


def _run_phase1(inst: _Instance, budget: int, workers: int, combo_cap: int) -> SearchResult:
    rows = inst.alice_output.count
    total_pairs = inst.alice_inputs.count * inst.bob_inputs.count
    estimate = total_pairs * rows
    if estimate > budget:
        raise SearchBudgetExceeded(
            f"pruned search needs about {estimate} propagation checks, budget is {budget}",
            estimate, budget,
        )
    results = _run_chunks("phase1", inst, total_pairs, workers, combo_cap)
    examined = sum(r["examined"] for r in results)
    founds = [(r["found_key"], r["found_wiring"]) for r in results if r["found_key"] is not None]
    best_key = min(r["best_key"] for r in results if r["best_key"] is not None)

    best_wiring, best_value = _phase1_best(inst, best_key)
    if founds:
        founds.sort(key=lambda item: item[0])
        return SearchResult(FOUND, founds[0][1], examined, best_value, best_wiring, "pruned")
    return SearchResult(EXHAUSTED, None, examined, best_value, best_wiring, "pruned")


def _phase1_best(inst: _Instance, best_key) -> tuple[Wiring, Fraction]:
    neg_value, ga_idx, row_idx, gb_idx = best_key
    ga_tables = inst.alice_inputs.tables_at(ga_idx)
    gb_tables = inst.bob_inputs.tables_at(gb_idx)
    demands = _demand_maps(inst, ga_tables, gb_tables)
    rel = inst.relation
    P = rel.transcripts
    K = inst.target_shape.y_size * P
    fa = _all_rows(inst.target_shape.a_size, inst.alice_output.digits)[row_idx]
    fb = [0] * K
    if inst.kind == "perfect":
        phi = inst.target_phi
        for k in range(K):
            y = k // P
            t0 = phi[0][y][fa[demands[0][k]]]
            t1 = phi[1][y][fa[demands[1][k]]]
            if t0 == t1 and t0 >= 0:
                fb[k] = t0
            elif t0 >= 0 and t1 >= 0:
                fb[k] = min(t0, t1)
            elif t0 >= 0:
                fb[k] = t0
            elif t1 >= 0:
                fb[k] = t1
        value = Fraction(int(-neg_value), 2 * K)
    else:
        _pairmax, pairargmin, den = _game_cell_tables(inst)
        for k in range(K):
            y = k // P
            fb[k] = int(pairargmin[y][fa[demands[0][k]], fa[demands[1][k]]])
        value = Fraction(int(-neg_value), den * P)
    alice = _alice_strategy(inst, ga_tables, fa)
    bob = _bob_strategy(inst, gb_tables, fb)
    return _wiring(inst, alice, bob), value


def _run_phase2(inst: _Instance, budget: int, workers: int, combo_cap: int) -> SearchResult:
    total_pairs = inst.alice_inputs.count * inst.bob_inputs.count
    nodes = inst.alice_output.digits + inst.bob_output.digits
    estimate = total_pairs * max(inst.target_shape.a_size, inst.target_shape.b_size) * nodes
    if estimate > budget:
        raise SearchBudgetExceeded(
            f"propagation search needs about {estimate} seed checks, budget is {budget}",
            estimate, budget,
        )
    results = _run_chunks("phase2", inst, total_pairs, workers, combo_cap)
    examined = sum(r["examined"] for r in results)
    founds = [(r["found_key"], r["found_wiring"]) for r in results if r["found_key"] is not None]
    overflow = any(r["overflow"] for r in results)
    if founds:
        founds.sort(key=lambda item: item[0])
        wiring = founds[0][1]
        return SearchResult(FOUND, wiring, examined, ONE, wiring, "pruned")
    if overflow:
        raise SearchBudgetExceeded(
            f"support-consistent candidates exceed the per-instance cap {combo_cap}; "
            "an exhausted verdict would be unverified",
            combo_cap + 1, combo_cap,
        )
    best_keys = [r["best_key"] for r in results if r["best_key"] is not None]
    if best_keys:
        ga_idx, fa, gb_idx, fb = min(best_keys)
        alice = _alice_strategy(inst, inst.alice_inputs.tables_at(ga_idx), fa)
        bob = _bob_strategy(inst, inst.bob_inputs.tables_at(gb_idx), fb)
        wiring = _wiring(inst, alice, bob)
        return SearchResult(EXHAUSTED, None, examined, ONE, wiring, "pruned")
    return SearchResult(EXHAUSTED, None, examined, ZERO, None, "pruned")


def _run_unpruned(inst: _Instance, budget: int, workers: int, combo_cap: int) -> SearchResult:
    a_total = inst.alice_inputs.count * inst.alice_output.count
    b_total = inst.bob_inputs.count * inst.bob_output.count
    estimate = a_total * b_total
    if estimate > budget:
        raise SearchBudgetExceeded(
            f"full enumeration needs {estimate} strategy pairs, budget is {budget}",
            estimate, budget,
        )
    if a_total > SIDE_LIMIT or b_total > SIDE_LIMIT:
        raise SearchBudgetExceeded(
            f"one side has more than {SIDE_LIMIT} strategies; use the pruned engine",
            max(a_total, b_total), SIDE_LIMIT,
        )
    results = _run_chunks("unpruned", inst, a_total * b_total, workers, combo_cap)
    examined = sum(r["examined"] for r in results)
    founds = [(r["found_key"], r["found_wiring"]) for r in results if r["found_key"] is not None]
    best = min(
        ((-r["best_num"], r["best_key"], r["best_den"]) for r in results if r["best_key"] is not None),
    )
    best_value = Fraction(-best[0], best[2])
    a_idx, b_idx = best[1]
    best_wiring = _wiring(
        inst,
        _strategy_from_behavior(inst, "alice", _side_behavior(inst, "alice", a_idx)),
        _strategy_from_behavior(inst, "bob", _side_behavior(inst, "bob", b_idx)),
    )
    if founds:
        founds.sort(key=lambda item: item[0])
        return SearchResult(FOUND, founds[0][1], examined, best_value, best_wiring, "unpruned")
    return SearchResult(EXHAUSTED, None, examined, best_value, best_wiring, "unpruned")


def _dispatch(inst: _Instance, engine: str, budget: int, workers: int,
              row_limit: int, combo_cap: int) -> SearchResult:
    if engine not in ("auto", "pruned", "unpruned"):
        raise ValueError(f"unknown engine {engine!r}")
    pruned_ok = _pruned_applicable(inst)
    if engine == "unpruned" or (engine == "auto" and not pruned_ok):
        return _run_unpruned(inst, budget, workers, combo_cap)
    if not pruned_ok:
        raise EngineNotApplicable(
            "pruned engine needs relation-style resources and, for perfect searches, "
            "a target whose support forces Bob's output"
        )
    rows = inst.alice_output.count
    phase1_checks = inst.alice_inputs.count * inst.bob_inputs.count * rows
    if rows <= row_limit and phase1_checks <= budget:
        return _run_phase1(inst, budget, workers, combo_cap)
    if inst.kind == "best":
        raise SearchBudgetExceeded(
            f"pruned maximization needs about {phase1_checks} checks over {rows} output maps, "
            f"budget is {budget}",
            phase1_checks, budget,
        )
    if inst.target_phi_inv is None:
        raise EngineNotApplicable(
            "Alice's output-map space is too large to enumerate and the target relation "
            "is not injective, so joint propagation does not apply"
        )
    return _run_phase2(inst, budget, workers, combo_cap)


def search_perfect(target: Box, resources, *, engine: str = "auto",
                   budget: int = DEFAULT_SEARCH_BUDGET, workers: int = 1,
                   row_limit: int = DEFAULT_ROW_LIMIT,
                   combo_cap: int = DEFAULT_COMBO_CAP) -> SearchResult:
    """Decide whether any deterministic wiring of the resources simulates the
    target exactly.

    ``found`` comes with a witness re-verified by exact evaluation;
    ``exhausted`` means the full deterministic space was covered, which also
    rules out probabilistic protocols: a mixture simulates exactly only if
    every deterministic strategy in its support does.
    """
    inst = _build_instance("perfect", target, None, resources)
    return _dispatch(inst, engine, budget, workers, row_limit, combo_cap)


def best_success(game: Game, resources, *, engine: str = "auto",
                 budget: int = DEFAULT_SEARCH_BUDGET, workers: int = 1,
                 row_limit: int = DEFAULT_ROW_LIMIT,
                 combo_cap: int = DEFAULT_COMBO_CAP) -> SearchResult:
    """Maximize a game's value over deterministic wirings of the resources.

    Deterministic wirings dominate probabilistic ones for any linear figure
    of merit, so the maximum is also the supremum over mixtures.
    """
    inst = _build_instance("best", None, game, resources)
    return _dispatch(inst, engine, budget, workers, row_limit, combo_cap)
