"""gefkit: exact group fairness checkers, solvers and hardness generators
for the allocation of indivisible goods and chores."""

from .core import (
    AdditiveProfile,
    Allocation,
    FormatError,
    GefkitError,
    Instance,
    InvalidAllocationError,
    ItemClass,
    ProfileError,
    Rational,
    SearchBoundExceeded,
    TableProfile,
    TernarySymmetricView,
    additive_instance,
    allocation_from_dict,
    allocation_to_dict,
    bundle_utility,
    chores_of,
    classify_item,
    goods_of,
    instance_from_dict,
    instance_to_dict,
    is_identical_profile,
    is_ternary_symmetric,
    load_allocation,
    load_instance,
    normalize_ternary,
    rational,
    rational_str,
    save_allocation,
    save_instance,
    table_instance,
    ternary_view,
    validate_allocation,
)
from .welfare import (
    DEFAULT_ENUMERATION_BOUND,
    EQUAL,
    GREATER,
    LESS,
    is_pareto_optimal_bruteforce,
    is_pareto_optimal_ternary,
    leximin_compare,
    leximin_optimal_bruteforce,
    leximin_vector,
    nash_optimal_bruteforce,
    nash_welfare,
    pareto_dominates,
    utility_vector,
)
from .fairness import (
    CONCEPTS,
    AgentWitness,
    CheckReport,
    GroupWitness,
    PairWitness,
    TaxonomyError,
    check_concept,
    is_ef,
    is_ef1,
    is_efx,
    is_group_fair,
    is_prop,
    normalize_concept,
    report_to_dict,
    taxonomy_report,
    validate_witness,
    witness_from_dict,
    witness_to_dict,
)
from .algorithms import (
    FlowEdge,
    FlowNetwork,
    InfeasibleNetworkError,
    IntegerFlow,
    NonCanonicalFlowError,
    allocation_to_flow,
    build_nash_flow_network,
    egal_sequential,
    flow_cost,
    flow_to_allocation,
    min_cost_integer_flow,
    ternary_flow,
)
from .hardness import (
    ReductionError,
    ReductionOutput,
    ThreePartitionInstance,
    certify_reduction,
    reduce_to_isgef1_chores,
    reduce_to_isgef1_goods,
    solve_3partition_bruteforce,
)
from .generators import generate_random_instance

__version__ = "0.1.0"
