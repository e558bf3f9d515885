"""Linear-query algorithms for monotone submodular maximization.

Threshold greedy for cardinality and knapsack constraints, the p-set-system
plus multi-knapsack search, classic baselines, lower-bound constructions and
a benchmarking harness.  Every objective is reached through a
:class:`QueryCountingOracle`, so query counts are exact.
"""
from .baselines import (
    brute_force,
    brute_force_cardinality,
    density_greedy,
    double_greedy,
    greedy,
    lazy_greedy,
    stochastic_greedy,
)
from .constraints import (
    AllOf,
    CardinalityConstraint,
    KnapsackConstraint,
    KnapsackInstance,
    MatroidIntersection,
    MultiKnapsackConstraint,
    MultiKnapsackInstance,
    PartitionMatroid,
    SetSystem,
    SystemConstraint,
    Unconstrained,
    UniformMatroid,
    can_add,
    cardinality,
    normalize_knapsack,
    normalize_multi_knapsack,
)
from .errors import *  # noqa: F401,F403
from .hardness import (
    HardCardinalityInstance,
    SIGame,
    find_identifying_matrix,
    hard_instance,
    si_adversary_answer,
    si_solve,
    usm_reduction,
)
from .objectives import (
    CoverageObjective,
    CutObjective,
    FacilityLocationObjective,
    FunctionObjective,
    LogDetObjective,
    ModularObjective,
    SqrtCoverageObjective,
    coverage_objective,
    facility_location_objective,
    log_det_objective,
    modular_objective,
    sqrt_coverage_objective,
    vertex_cover_objective,
)
from .oracle import QueryCountingOracle, SetFunction, Subset, evaluate, marginal
from .result import SolveResult
from .smk import estimate_opt, fast_threshold_greedy, smc_maximize, smk_maximize
from .smks import (
    big_alg_pairs,
    big_alg_singleton,
    preprocess,
    rho_guessing,
    set_extract,
    smks_basic,
    smks_maximize,
    smks_nearly_linear,
)

__version__ = "0.1.0"
