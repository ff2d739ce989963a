"""QAOA landscape toolkit: matrix-free simulation, saddle construction,
curvature estimates, and the recursive improvement bound for MaxCut."""

from .graphs import (
    CostDiagonal,
    PauliTermSum,
    ProblemGraph,
    approximation_ratio,
    build_cost_diagonal,
    generate_regular_graph,
    hc_squared_decomposition,
)
from .statevector import (
    ParameterVector,
    apply_cost_operator,
    apply_cost_phase,
    apply_mixer,
    energy,
    energy_variance,
    plus_state,
    prepare_qaoa_state,
)
from .derivatives import (
    curvature_decomposition,
    gradient,
    hessian,
    quartic_coefficient,
    scalar_b,
    scalar_b_bar,
)
from .transition_states import (
    TsIndex,
    admissible_indices,
    all_transition_states,
    approx_eigenpair,
    congruence_check,
    construct_ts,
    ostrowski_bounds,
)
from .slices import (
    SliceModel,
    best_ts_bound,
    build_slice_model,
    delta_e_bound,
    epsilon_star,
    exact_slice_energy,
)
from .optimize import (
    OptimizationTrace,
    descend_from_ts,
    fourier_strategy,
    greedy_step,
    minimize,
    run_ts_strategy,
    single_ts_step,
)

__version__ = "0.1.0"
