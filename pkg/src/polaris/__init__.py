"""Opinion dynamics on signed directed graphs: simulation and asymptotic prediction."""

from polaris.dynamics import (
    ContinuousSchedule,
    DiscreteSchedule,
    Trajectory,
    band_statistics,
    simulate_continuous,
    simulate_discrete,
    simulate_lifted,
    step_discrete,
)
from polaris.lift import (
    SignedLaplacian,
    TrustMatrix,
    lift_laplacian,
    lift_stochastic,
    signed_laplacian,
    split_signs,
    tree_canonical_form,
    weights_to_trust_matrix,
)
from polaris.limits import (
    OutcomePrediction,
    classify_switching,
    predict_fixed,
    stationary_left_vector,
    two_block_limit,
)
from polaris.scenario import Scenario, load_scenario
from polaris.signed_graph import (
    BalancePartition,
    NoSpanningTree,
    SignedDigraph,
    check_balance,
    common_bipartition,
    enlarge,
    root_vertex_set,
    scc_decompose,
    union_graphs,
)

__version__ = "0.1.0"
