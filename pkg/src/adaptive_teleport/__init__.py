"""Adaptive multiple teleportation in the KLM linear-optics scheme."""

from .core import (
    FilterResult,
    Outcome,
    OutcomeDistribution,
    QubitState,
    ResourceSpec,
    apply_not,
    filter_to_target,
    geometric_monotone_resource,
    geometric_peak_resource,
    kraus_pair,
    teleport_step,
    uniform_resource,
)
from .strategies import (
    AdaptiveDouble,
    ChainWeights,
    Composite,
    FixedSequence,
    History,
    Identical,
    LastStepAdaptive,
    NotGateDouble,
    Step,
    chain_weights,
    next_resource,
)
from .analytics import (
    ChainSpec,
    exact_chain_success,
    p_adaptive_double,
    p_identical_chain_closed,
    p_last_step_adaptive,
    p_last_step_sym,
)
from .optimizer import OptimizationResult, crossover_M, maximize_over_q, table1

__version__ = "0.1.0"
