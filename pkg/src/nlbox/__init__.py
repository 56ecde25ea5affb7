"""Exact-arithmetic toolkit for bipartite no-signalling boxes.

Everything is computed over arbitrary-precision rationals: the mod-p
nonlocal box family, deterministic wirings of resource boxes, exact
local-polytope membership with certificates, and the two impossibility
obstructions (dyadic and denominator-prime) together with exhaustive
searches that confirm them at desk scale.
"""

from .analysis import (
    NOT_OBSTRUCTED,
    OBSTRUCTED,
    ObstructionReport,
    ResourceProfile,
    denominator_primes_of,
    dyadic_obstruction,
    marginal_conditions_check,
    witness_unsimulable_prime,
)
from .boxes import (
    ALICE,
    BOB,
    Box,
    BoxShape,
    InvalidBoxError,
    MarginalFamily,
    SignallingWitness,
    boxes_equal,
    box_from_jsonable,
    box_to_jsonable,
    is_no_signalling,
    make_box,
    marginal,
    marginal_family,
    modp_nlb,
    read_box,
    sample,
    signalling_witness,
    uniform_noise_box,
    write_box,
)
from .locality import (
    BellCertificate,
    Game,
    GameShapeMismatch,
    LocalityCertificate,
    VertexCapExceeded,
    best_local_value,
    certificate_is_sound,
    chsh_game,
    deterministic_box,
    game_value,
    is_local,
    local_vertices,
    make_game,
    mixture_of_vertices,
    modp_game,
    read_game,
    vertex_count,
    write_game,
)
from .rational import (
    ExactRational,
    arith,
    denominator_primes,
    format_rational,
    parse_rational,
    rat,
)
from .search import (
    DEFAULT_SEARCH_BUDGET,
    EngineNotApplicable,
    SearchBudgetExceeded,
    SearchResult,
    best_success,
    search_perfect,
    support_game,
)
from .wiring import (
    InvalidWiringError,
    PartyStrategy,
    Wiring,
    crt_wiring,
    evaluate_wiring,
    identity_wiring,
    read_wiring,
    validate_wiring,
    wired_marginal,
    wiring_from_jsonable,
    wiring_to_jsonable,
    write_wiring,
)

__version__ = "0.1.0"
