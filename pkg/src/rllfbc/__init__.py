"""Feedback capacity of the (d,inf)-RLL input-constrained binary erasure
channel: solvers, the zero-error coding scheme, the output-driven graph
bound that certifies tightness, and Reed-Muller constrained subcodes."""

from .capacity import (
    CapacityResult,
    SplitVector,
    binary_entropy,
    d2_equality_threshold,
    linear_lower_bound,
    noncausal_capacity,
    q_inverse,
    rate_R,
    solve_feedback_capacity,
    solve_simplified,
)
from .coding import SimulationReport, analytic_rate, measure_empirical_rate, simulate
from .constraint import (
    ConstraintAutomaton,
    ConstraintSpec,
    build_rll_automaton,
    check_sequence,
    count_sequences,
    noiseless_capacity,
)
from .qgraph import (
    QGraph,
    SQGraph,
    build_q_graph_family,
    build_sq_graph,
    check_bcjr_invariance,
    conditional_mutual_information,
    optimize_upper_bound,
    scheme_induced_policy,
    upper_bound_for,
)
from .rmcodes import (
    BooleanPoly,
    EvalVector,
    RMCode,
    build_0k_subcode,
    build_dinf_subcode,
    choose_rm_degree,
    evaluate,
    rm_generator,
    rm_upper_bound_curve,
    rstar,
)

__version__ = "0.1.0"
