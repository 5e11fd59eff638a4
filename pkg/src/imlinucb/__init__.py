"""Influence-maximization semi-bandits under the independent cascade model."""

from .agent import AgentState, UcbWeights, agent_init, agent_update, compute_ucb, default_c, run_round
from .cascade import (
    CascadeOutcome,
    SpreadEstimate,
    forest_probs_batch,
    influence_prob_exact,
    influence_probs_exact,
    influence_probs_mc,
    partial_derivative_exact,
    run_cascade,
    sample_realization,
    singleton_spreads_exact,
    spread_exact,
    spread_mc,
)
from .errors import CapacityError, InvalidArgument, LoadError
from .experiment import ExperimentConfig, LogLogFit, RegretLog, fit_loglog, run_experiment, sweep
from .features import FeatureMatrix, edge_features_from_nodes, synth_features, tabular_features
from .graph import Graph, build_topology, constant_weights, load_graph, load_weighted_graph, relevant_edges, save_graph
from .metrics import (
    effective_edge_budget,
    max_observed_relevance,
    metrics_report,
    observation_prob,
    relevance_count,
    worst_case_metrics,
)
from .oracle import OracleSpec, oracle_exact, oracle_greedy, solve

__version__ = "0.1.0"
