"""Simulation of the all-or-nothing public goods game with learning agents on networks."""

from .core import (
    Action,
    PayoffModel,
    contribute_probability,
    decide_action,
    expected_utilities,
    payoff,
    sample_lambda,
    update_belief,
)
from .engine import (
    Outcome,
    RoundOutcome,
    RunResult,
    SimConfig,
    SimState,
    absorption_horizon,
    advance,
    check_convergence,
    corner_epsilon_bound,
    init_state,
    run,
    step,
)
from .graphs import (
    Graph,
    GraphGenerationError,
    GraphMetrics,
    circulant,
    closed_neighborhood,
    compute_metrics,
    connected_random_geometric,
    is_connected,
    load_edge_list,
    random_geometric,
    save_edge_list,
)
from .rng import Stream, derive_seed
from .stats import (
    BatchResult,
    BatchSpec,
    GraphSource,
    belief_metric_scatter,
    catastrophe_ratio,
    log_grid,
    metastability_report,
    outcome_table,
    run_batch,
    tail_probability,
)

__version__ = "0.1.0"
