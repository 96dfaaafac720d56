"""privgraph: differentially private synthetic attributed graphs with
fused Gromov-Wasserstein utility guarantees."""

from .space import (
    SpaceConfig,
    Partition,
    AttributeDataset,
    build_grid_partition,
    cell_index,
    cell_indices,
    sample_uniform_in_cell,
    load_points_csv,
)
from .noise import (
    NoiseSpec,
    discrete_laplace,
    bounded_power,
    custom,
    zero_noise,
    noise_from_json,
    pmf,
    sample,
    expected_abs,
    dp_ratio_satisfied,
)
from .measures import (
    SignedMeasure,
    ProbabilityMeasure,
    PrivateMeasureResult,
    true_counts,
    tv_distance,
    tv_project,
    tv_optimum_analytic,
    run_private_measure,
)
from .graphs import (
    Kernel,
    AttributedGraph,
    chung_lu,
    constant_kernel,
    inverse_distance,
    kernel_eval,
    kernel_matrix,
    sample_graph,
    graph_to_json,
    graph_from_json,
    graph_to_dot,
)
from .generator import (
    CoupledGraphs,
    generate_coupled_graphs,
    maximal_coupling_bernoulli,
    sample_common_indicator,
    residual_cell_sampler,
)
from .fgw import (
    FgwParams,
    GraphMeasure,
    graph_to_measure,
    fgw_cost,
    fgw_exact_small,
    fgw_upper_bound,
    matched_plan_cost,
    plan_coupling,
    plan_cost_exact,
    mc_expected_fgw,
    ipm_lower_bound,
    reference_graphs,
    spawn_streams,
    worst_pair_cost,
    wasserstein_uniform_exact,
)
from .bounds import (
    BoundInputs,
    BoundTerms,
    cost_rates,
    expected_fgw_bound,
    expected_fgw_bound_grid,
    stein_constants,
    distribution_bound,
    distribution_bound_grid,
    optimal_params,
    rate_bounds,
    grid_bounds_unrounded,
    bound_table,
    bound_report,
)

__version__ = "0.1.0"
