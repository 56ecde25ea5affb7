"""Impossibility checks for simulating mod-p boxes with finite resources.

Two symbolic obstructions complement the explicit searches:

* the dyadic obstruction: a perfect simulator of a mod-p box from N binary
  relation boxes would need marginals that are simultaneously uniform (1/p)
  and dyadic (k/2^N), which forces p to divide 2^N;

* the denominator-prime obstruction: every marginal a wiring can produce is
  an integer-coefficient sum of products of the resources' marginal
  probabilities, so its reduced denominator only contains primes already
  present in those probabilities.  A mod-p box whose p is a fresh prime is
  therefore out of reach of any finite wiring over the given resources.

Both produce ``ObstructionReport`` values whose derivation lists the proof
chain step by step, so a failing step localizes a bug to one inference.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .boxes import ALICE, BOB, Box, MarginalFamily, marginal_family
from .rational import denominator_primes, format_rational, smallest_prime_not_in
from .search import (  # noqa: F401  (re-exported as part of the analysis surface)
    DEFAULT_SEARCH_BUDGET,
    EngineNotApplicable,
    SearchBudgetExceeded,
    SearchResult,
    best_success,
    search_perfect,
    support_game,
)

OBSTRUCTED = "obstructed"
NOT_OBSTRUCTED = "not_obstructed"

# The four marginal equalities a perfect mod-p simulator must satisfy, keyed
# by input pair (x, y); the (1, 1) equality carries the +1 output shift.
CONDITION_KEYS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class ObstructionReport:
    """Machine-checkable impossibility verdict with its derivation trace."""

    kind: str          # "dyadic" or "denominator_prime"
    parameters: tuple  # sorted (name, value) pairs
    verdict: str       # OBSTRUCTED or NOT_OBSTRUCTED
    derivation: tuple  # ordered human-readable steps

    def parameter(self, name: str):
        for key, value in self.parameters:
            if key == name:
                return value
        raise KeyError(name)


@dataclass(frozen=True)
class ResourceProfile:
    """Per-resource, per-party marginal probabilities and their denominator primes."""

    alice_marginals: tuple  # per resource: sorted tuple of Fractions
    bob_marginals: tuple
    primes: frozenset


def marginal_conditions_check(p: int, alice: MarginalFamily, bob: MarginalFamily) -> dict:
    """Evaluate the four marginal equalities of a perfect mod-p simulation.

    For input pair (x, y) the box forces b = a + x*y (mod p), so the two
    parties' marginals must agree up to that shift:

        (0,0): p_A(q|0) = p_B(q|0)      (1,0): p_A(q|1) = p_B(q|0)
        (0,1): p_A(q|0) = p_B(q|1)      (1,1): p_A(q|1) = p_B(q+1|1)

    Returns one verdict per input pair.
    """
    if p < 2:
        raise ValueError(f"modulus must be at least 2, got {p}")
    for family, name in ((alice, "alice"), (bob, "bob")):
        if len(family.dist) != 2:
            raise ValueError(f"{name} family must have inputs 0 and 1, got {len(family.dist)}")
        for row in family.dist:
            if len(row) != p:
                raise ValueError(f"{name} family alphabet is {len(row)}, modulus wants {p}")
    verdicts = {}
    for x, y in CONDITION_KEYS:
        shift = x * y
        verdicts[(x, y)] = all(
            alice.dist[x][q] == bob.dist[y][(q + shift) % p] for q in range(p)
        )
    return verdicts


def dyadic_obstruction(p: int, n: int) -> ObstructionReport:
    """Divisibility obstruction against building a mod-p box from n binary
    relation boxes.

    The derivation replays the argument: the marginal equalities force
    Alice's marginal to be input-independent, then Bob's marginal at input 1
    to be shift-invariant and hence uniform; but a deterministic strategy
    over n uniform bits only produces dyadic marginals, so p must divide
    2^n.
    """
    if p < 2:
        raise ValueError(f"modulus must be at least 2, got {p}")
    if n < 0:
        raise ValueError(f"resource count must be nonnegative, got {n}")
    divides = (p & (p - 1)) == 0 and p.bit_length() - 1 <= n
    steps = [
        "a perfect simulator must satisfy, for every output q mod p: "
        "p_A(q|0)=p_B(q|0), p_A(q|0)=p_B(q|1), p_A(q|1)=p_B(q|0), p_A(q|1)=p_B(q+1|1)",
        "the input pairs (0,0) and (1,0) force p_A(q|0) = p_A(q|1): "
        "Alice's marginal is input-independent",
        "with that, the input pairs (0,1) and (1,1) force p_B(q|1) = p_B(q+1|1) "
        "for every q: Bob's marginal at input 1 is shift-invariant, hence uniform "
        f"with every output at probability 1/{p}",
        f"a deterministic strategy over {n} uniform binary outputs has every marginal "
        f"probability of the form k/2^{n}",
    ]
    if divides:
        steps.append(
            f"p = {p} divides 2^{n}, so uniformity at 1/{p} is not excluded by this "
            "divisibility test: no obstruction"
        )
        verdict = NOT_OBSTRUCTED
    else:
        steps.append(
            f"uniformity needs 1/{p} = k/2^{n}, i.e. p must divide 2^{n}; "
            f"p = {p} does not divide 2^{n}, a contradiction: perfect simulation "
            "is impossible"
        )
        verdict = OBSTRUCTED
    return ObstructionReport(
        kind="dyadic",
        parameters=(("n", n), ("p", p)),
        verdict=verdict,
        derivation=tuple(steps),
    )


def denominator_primes_of(resources) -> ResourceProfile:
    """Collect every single-box marginal probability and its denominator primes.

    Signalling resources are rejected: their one-party marginal is not a
    function of the party's own input.
    """
    alice_all = []
    bob_all = []
    primes: set[int] = set()
    for resource in resources:
        af = marginal_family(resource, ALICE)
        bf = marginal_family(resource, BOB)
        a_values = tuple(sorted(v for row in af.dist for v in row))
        b_values = tuple(sorted(v for row in bf.dist for v in row))
        alice_all.append(a_values)
        bob_all.append(b_values)
        for v in a_values + b_values:
            primes |= denominator_primes(v)
    return ResourceProfile(
        alice_marginals=tuple(alice_all),
        bob_marginals=tuple(bob_all),
        primes=frozenset(primes),
    )


def witness_unsimulable_prime(resources) -> tuple[int, ObstructionReport]:
    """Smallest prime p such that no finite wiring of the resources can
    produce the mod-p box, with the ring-argument derivation."""
    resources = list(resources)
    if not resources:
        profile = ResourceProfile(alice_marginals=(), bob_marginals=(), primes=frozenset())
    else:
        profile = denominator_primes_of(resources)
    witness = smallest_prime_not_in(profile.primes)
    prime_list = ", ".join(str(q) for q in sorted(profile.primes)) or "none"
    steps = (
        f"collect the marginal output probabilities of the {len(resources)} resource "
        "box(es) for both parties",
        f"the primes dividing any of their denominators are: {prime_list}",
        "a deterministic wiring's output marginal is a sum, with integer coefficients, "
        "of products of those probabilities, so its reduced denominator contains no "
        "prime outside that set",
        f"the mod-{witness} box needs every output marginal to equal exactly "
        f"1/{witness}, whose denominator prime {witness} is outside the set",
        f"hence no finite wiring over these resources simulates the mod-{witness} box",
    )
    report = ObstructionReport(
        kind="denominator_prime",
        parameters=(
            ("prime", witness),
            ("profile_primes", tuple(sorted(profile.primes))),
        ),
        verdict=OBSTRUCTED,
        derivation=steps,
    )
    return witness, report


def obstruction_to_jsonable(report: ObstructionReport) -> dict:
    params = {}
    for key, value in report.parameters:
        params[key] = list(value) if isinstance(value, tuple) else value
    return {
        "kind": report.kind,
        "parameters": params,
        "verdict": report.verdict,
        "derivation": list(report.derivation),
    }


def profile_to_jsonable(profile: ResourceProfile) -> dict:
    return {
        "alice_marginals": [[format_rational(v) for v in row] for row in profile.alice_marginals],
        "bob_marginals": [[format_rational(v) for v in row] for row in profile.bob_marginals],
        "primes": sorted(profile.primes),
    }
