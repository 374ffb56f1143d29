"""Noiseless privacy for deterministic mechanisms.

Uncertain-variable ranges, non-stochastic information measures, quantizer
mechanisms, exact privacy audits and membership-inference games.
"""

from .audit import (
    AuditReport,
    HypothesisReport,
    audit,
    audit_local,
    capacity_check,
    estimation_error_check,
    hypothesis_analysis,
    induced_relation,
    leakage_chain,
    maximal_leakage_check,
)
from .errors import DomainError, InvariantViolation, PreconditionError, SearchLimitError
from .games import (
    GameConfig,
    GameResult,
    ProfilePanel,
    ingest_csv,
    play_game,
    policy_decide,
    synthesize_panel,
)
from .measures import (
    ChannelSpec,
    OverlapPartition,
    PriorSpec,
    differential_entropy0,
    hartley_entropy,
    maximal_leakage,
    maximin_information,
    nonstochastic_information,
    nonstochastic_leakage,
    pentagon_channel,
    symmetrized_leakage,
    zero_error_code_search,
)
from .mechanisms import (
    Compose,
    Constant,
    Identity,
    LinearQuantizer,
    PostProcess,
    apply,
    compose_budget,
    quantize,
    quantizer_levels,
    sensitivity,
    synthesize_quantizer,
)
from .ranges import (
    DatasetSpec,
    FiniteRange,
    IntervalUnion,
    JointRelation,
    QuerySpec,
    conditional_range,
    grid_sample,
    product_range,
    substitute,
)

__version__ = "0.1.0"
