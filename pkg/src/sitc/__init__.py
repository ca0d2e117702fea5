"""Side-information assisted sparse tensor completion.

Pipeline: collapse the sparse tensor onto each mode pair with the weight
vectors, estimate per-mode latent distances from BFS neighborhood statistics
on the collapsed data graph, then reconstruct the tensor with a threshold
kernel nearest-neighbor average. Exact brute-force oracles and a synthetic
experiment harness verify the pieces at desk scale.
"""

from ._kernels import USING_NUMBA
from .collapse import CollapsedMatrix, collapse, empirical_density, induced_density
from .distance import (
    BfsForest,
    BipartiteGraph,
    DistanceMatrix,
    ShallowTreeError,
    bfs_neighborhood,
    build_graph,
    choose_depth,
    distance_matrix,
    neighborhood_vector,
    pair_statistic,
)
from .estimator import (
    Estimate,
    EstimatorConfig,
    choose_eta,
    error_metrics,
    estimate,
    infer_kappa,
    kernel,
)
from .experiment import (
    ExperimentConfig,
    default_acceptance_config,
    emit_report,
    run_experiment,
    run_single,
)
from .model import (
    Shape,
    SparseObservations,
    TuckerModel,
    WeightVectors,
    build_general_tucker_model,
    build_orthogonal_cp_model,
    dense_tensor,
    derive_rng,
    evaluate_entry,
    make_family,
    make_weight_vectors,
    make_xor_hard_instance,
    sample_observations,
    split_samples,
)
from .oracle import (
    LambdaHat,
    brute_force_nn,
    exact_expected_collapse,
    exact_hat_lambda,
    exact_latent_distance,
    exact_latent_distance_matrix,
    exact_pair_statistic,
    jacobi_svd,
    usvt_baseline,
)

__version__ = "0.1.0"
