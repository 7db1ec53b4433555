"""Budgeted treatment allocation on networks with interference.

Pipeline pieces: synthetic-world generation with confounded treatments and
spillover (`dgp`), trainable outcome estimators (`relational`, `tarnet`),
allocation algorithms over any total-effect objective (`allocation`),
ground-truth scoring (`metrics`), and a config-driven harness (`experiment`,
`cli`).
"""

from .allocation import (
    Allocation,
    GaConfig,
    GreedySchedule,
    TteObjective,
    brute_force,
    celf,
    degree_topk,
    genetic,
    greedy,
    ic_mean_spread,
    ic_simulate,
    random_allocation,
    single_discount,
    tte_objective,
    uplift_topk,
)
from .dgp import (
    Dataset,
    DgpInstance,
    DgpParams,
    DgpWeights,
    assign_treatments,
    expected_outcome,
    expected_outcomes,
    exposure,
    itte,
    itte_vector,
    make_dataset,
    mite,
    oracle_outcome_fn,
    sample_factual_outcomes,
    sample_instance,
    sample_weights,
    spillover,
    tte,
)
from .graphs import (
    Graph,
    degree_histogram,
    generate_barabasi_albert,
    generate_watts_strogatz,
    load_edge_list,
    load_features,
    save_edge_list,
    save_features,
    validate_graph,
)
from .gradcheck import gradient_check, tarnet_gradient_check
from .metrics import (
    MethodResult,
    RandomBaseline,
    allocation_similarity,
    liftup,
    random_baseline,
    riseo,
    score_allocation,
    upper_bound,
)
from .relational import (
    RelationalModel,
    RelationalPredictor,
    TrainingConfig,
    outcome_bce,
    predict_itte,
    predict_tte,
    train,
)
from .tarnet import TarnetModel, tarnet_bce, tarnet_ite, train_tarnet

__version__ = "0.1.0"
