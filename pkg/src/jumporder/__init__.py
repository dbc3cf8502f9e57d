"""Measurement statistics of bipartite quantum systems under both causelike
orderings of the local quantum jumps."""

__version__ = "0.1.0"

from .counterfactual import (
    Scenario,
    conditional_prob,
    counterfactual_prob,
    counterfactual_state,
    joint_prob,
    ordering_gap,
)
from .hardy import HardyParams, build_hardy, closed_form_Lr, closed_form_rL
from .hilbert import (
    BipartiteSpace,
    DensityOperator,
    Factor,
    Ket,
    Operator,
    partial_trace_L,
    partial_trace_R,
    sandwich,
    tensor,
)
from .measurement import (
    MeasurementBasis,
    Outcome,
    check_reciprocity,
    is_symmetric_case,
    nonselective_update,
    outcome_distribution,
    pure_selective,
    selective_update,
)
from .montecarlo import CountTable, RunConfig, empirical_conditional, simulate
from .spacetime import (
    Boost,
    Event,
    OrderTag,
    apply_boost,
    causally_separated,
    find_order_reversing_boost,
    interval,
)
