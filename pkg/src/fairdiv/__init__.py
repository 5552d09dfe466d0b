"""Fair division of indivisible goods under subadditive valuations.

Allocations are approximately EFX (complete with factor 1/2 - eps, or
1 - eps with a small unenvied pool) and carry an O(n) guarantee for every
p-mean welfare with p <= 1.  Everything fairness-related is exact rational
arithmetic; brute-force oracles check the guarantees on small instances.
"""
from .engine import (
    EngineConfig,
    EngineResult,
    champion_claim,
    decycle,
    engine_loop,
    envy_graph,
    path_claim,
    run,
    safe_extend,
)
from .errors import (
    CharityOverflow,
    ContractViolation,
    FairDivError,
    InputError,
    InstanceTooSmall,
    InvalidGood,
    InvalidParameter,
    InvalidValue,
    ParseError,
    StepLimitExceeded,
    TooLarge,
)
from .generators import FAMILIES, GeneratorSpec, generate
from .matching import (
    AgentPerfectMatching,
    bottleneck_assignment,
    max_weight_assignment,
    min_weight_perfect_assignment,
)
from .model import (
    AdditiveValuation,
    Allocation,
    BudgetAdditiveValuation,
    CoverageValuation,
    Instance,
    Valuation,
    XOSValuation,
    load_instance,
    save_instance,
)
from .pipeline import RunReport, bench, solve
from .seeding import build_top_goods, build_weights, rank_fix, seed, select_matching
from .verification import (
    BruteForceOracle,
    brute_force_best,
    check_alpha_efx,
    check_contract,
    check_ef1,
    fairness_report,
    welfare_ratio,
)
from .welfare import NEG_INF, p_mean, parse_p, power_sum, weighted_p_mean

__version__ = "0.1.0"
