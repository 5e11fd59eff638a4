"""Seeded multi-run experiments, scaled-regret logs and power-law fits."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .agent import agent_init, default_c, run_round
from .cascade import empty_realization, run_cascade, spread_exact, spread_mc
from .errors import CapacityError, InvalidArgument, LoadError
from .features import (
    FeatureMatrix,
    edge_features_from_nodes,
    load_node_features,
    synth_features,
    tabular_features,
)
from .graph import TOPOLOGIES, Graph, build_topology, constant_weights, load_weighted_graph
from .metrics import effective_edge_budget, metrics_report
from .oracle import OracleSpec, solve

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

# stream ids for the counter-based RNG; one stream per purpose, run and round
_GRAPH, _WEIGHTS, _FEATURES, _BASELINE, _METRICS, _ROUND = range(6)


def rng_stream(master_seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for ``(master_seed, *keys)``."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, keys)]))


@dataclass
class ExperimentConfig:
    """One experiment. Field names double as config-file keys."""

    topology: str | None = "star"
    graph_file: str | None = None
    L: int = 8
    K: int = 1
    n: int = 1000
    weight_model: str = "constant"  # constant | uniform | file
    omega: float = 0.8
    weight_low: float = 0.0
    weight_high: float = 0.1
    features: str = "tabular"  # tabular | synthetic | node_file
    d: int = 10
    node_feature_file: str | None = None
    sigma: float = 1.0
    c: float | str = "eq4"
    c_budget: str = "edges"  # edges | e_star, edge count in the theoretical radius
    c_scale: float = 1.0  # multiplier on the theoretical radius
    D: float | None = None
    oracle: str = "exact"  # exact | greedy
    oracle_mc_samples: int = 200
    alpha: float | None = None
    gamma: float | None = None
    regret: str = "expected"  # expected | coupled
    runs: int = 1
    seed: int = 0
    mc_samples: int = 10_000
    metrics: bool = True
    output: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.graph_file is None:
            if self.topology not in TOPOLOGIES:
                raise InvalidArgument(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")
            if self.L < 2:
                raise InvalidArgument("L must be >= 2")
        if self.n < 1 or self.runs < 1:
            raise InvalidArgument("n and runs must be >= 1")
        if self.K < 1 or (self.graph_file is None and self.K > self.L):
            raise InvalidArgument("K must satisfy 1 <= K <= L")
        if self.weight_model not in ("constant", "uniform", "file"):
            raise InvalidArgument(f"unknown weight_model {self.weight_model!r}")
        if not 0.0 <= self.omega <= 1.0:
            raise InvalidArgument("omega must lie in [0, 1]")
        if not 0.0 <= self.weight_low <= self.weight_high <= 1.0:
            raise InvalidArgument("need 0 <= weight_low <= weight_high <= 1")
        if self.features not in ("tabular", "synthetic", "node_file"):
            raise InvalidArgument(f"unknown features {self.features!r}")
        if self.features == "node_file" and not self.node_feature_file:
            raise InvalidArgument("features = 'node_file' needs node_feature_file")
        if self.weight_model == "file" and not self.graph_file:
            raise InvalidArgument("weight_model = 'file' needs a graph_file with a probability column")
        if self.sigma <= 0:
            raise InvalidArgument("sigma must be positive")
        if isinstance(self.c, str):
            if self.c != "eq4":
                raise InvalidArgument("c must be a number or 'eq4'")
        elif self.c < 0:
            raise InvalidArgument("c must be nonnegative")
        if self.c_scale < 0:
            raise InvalidArgument("c_scale must be nonnegative")
        if self.c_budget not in ("edges", "e_star"):
            raise InvalidArgument("c_budget must be 'edges' or 'e_star'")
        if self.oracle not in ("exact", "greedy"):
            raise InvalidArgument(f"unknown oracle {self.oracle!r}")
        if self.regret not in ("expected", "coupled"):
            raise InvalidArgument("regret must be 'expected' or 'coupled'")
        if self.mc_samples < 1 or self.oracle_mc_samples < 1:
            raise InvalidArgument("sample counts must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidArgument(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise LoadError("config file not found", str(path)) from None
        except tomllib.TOMLDecodeError as exc:
            raise LoadError(str(exc), str(path)) from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class RegretLog:
    """Per-round records of every run plus run-independent metadata."""

    runs: np.ndarray
    rounds: np.ndarray
    seed_sets: list
    rewards: np.ndarray
    regrets: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def cum_regrets(self) -> np.ndarray:
        out = np.empty_like(self.regrets)
        for r in np.unique(self.runs):
            m = self.runs == r
            out[m] = np.cumsum(self.regrets[m])
        return out

    def final_regrets(self) -> np.ndarray:
        """Cumulative regret after the last round of each run."""
        return np.array([self.regrets[self.runs == r].sum() for r in np.unique(self.runs)])

    def run_seeds(self, run: int) -> list:
        return [s for s, r in zip(self.seed_sets, self.runs) if r == run]

    def to_csv(self) -> str:
        """CSV text; cumulative regret is the running sum of the printed
        per-round values, so it can be recomputed from the file exactly."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["run", "round", "seed_set", "reward", "regret", "cum_regret"])
        cum = 0.0
        prev_run = None
        for run, rnd, seeds, reward, regret in zip(self.runs, self.rounds, self.seed_sets, self.rewards, self.regrets):
            if run != prev_run:
                cum, prev_run = 0.0, run
            printed = f"{regret:.6g}"
            cum += float(printed)
            w.writerow([int(run), int(rnd), "+".join(map(str, seeds)), int(reward), printed, f"{cum:.6g}"])
        return buf.getvalue()

    def write(self, path) -> tuple[Path, Path]:
        """Write ``<path>`` (CSV) and ``<path stem>.json`` (metadata)."""
        csv_path = Path(path)
        json_path = csv_path.with_suffix(".json")
        csv_path.write_text(self.to_csv(), encoding="utf-8")
        json_path.write_text(json.dumps(self.metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return csv_path, json_path


@dataclass
class Instance:
    """Everything a run needs that does not depend on the run index."""

    graph: Graph
    weights: np.ndarray
    features: FeatureMatrix
    oracle: OracleSpec
    c: float
    best_seeds: tuple
    f_star: float
    f_star_exact: bool


def _build_graph(cfg: ExperimentConfig):
    if cfg.graph_file:
        graph, file_w = load_weighted_graph(cfg.graph_file)
        if cfg.K > graph.n_nodes:
            raise InvalidArgument(f"K={cfg.K} exceeds the {graph.n_nodes} nodes in {cfg.graph_file}")
        return graph, file_w
    return build_topology(cfg.topology, cfg.L, rng_stream(cfg.seed, _GRAPH)), None


def _build_weights(cfg, graph, file_w):
    if cfg.weight_model == "constant":
        return constant_weights(graph, cfg.omega)
    if cfg.weight_model == "uniform":
        return rng_stream(cfg.seed, _WEIGHTS).uniform(cfg.weight_low, cfg.weight_high, graph.n_edges)
    if file_w is None:
        raise LoadError("graph file has no probability column", cfg.graph_file)
    return file_w


def _build_features(cfg, graph, weights) -> FeatureMatrix:
    if cfg.features == "tabular":
        return tabular_features(graph, weights)
    if cfg.features == "synthetic":
        return synth_features(weights, cfg.d, rng_stream(cfg.seed, _FEATURES))
    U = load_node_features(cfg.node_feature_file, graph.n_nodes)
    return edge_features_from_nodes(graph, U)


def prepare(cfg: ExperimentConfig) -> Instance:
    """Build graph, weights, features, confidence radius and the baseline
    seed set with its expected spread."""
    graph, file_w = _build_graph(cfg)
    weights = _build_weights(cfg, graph, file_w)
    feats = _build_features(cfg, graph, weights)
    oracle = OracleSpec(cfg.oracle, cfg.oracle_mc_samples, cfg.alpha, cfg.gamma)
    if cfg.c == "eq4":
        D = cfg.D if cfg.D is not None else (feats.D if feats.D is not None else 1.0)
        budget = graph.n_edges if cfg.c_budget == "edges" else effective_edge_budget(graph, cfg.K)
        c = cfg.c_scale * default_c(feats.d, cfg.n, max(budget, 1), graph.n_nodes, cfg.K, D)
    else:
        c = float(cfg.c)
    base_rng = rng_stream(cfg.seed, _BASELINE)
    best = solve(oracle, graph, cfg.K, weights, base_rng)
    try:
        f_star, exact = spread_exact(graph, best, weights), True
    except CapacityError:
        f_star, exact = spread_mc(graph, best, weights, cfg.mc_samples, base_rng).mean, False
    return Instance(graph, weights, feats, oracle, c, best, f_star, exact)


def _run_one(cfg: ExperimentConfig, inst: Instance, run: int):
    state = agent_init(inst.features.d, cfg.sigma, inst.c)
    eta = inst.oracle.eta
    seeds_log, rewards, regrets = [], np.empty(cfg.n, dtype=np.int64), np.empty(cfg.n)
    for t in range(cfg.n):
        rng = rng_stream(cfg.seed, _ROUND, run, t)
        realization = empty_realization(inst.graph)
        _, outcome, seeds = run_round(state, inst.graph, cfg.K, inst.features, inst.oracle, inst.weights, rng, realization)
        if cfg.regret == "coupled":
            # the optimal set is evaluated on the same binary weights
            best = run_cascade(inst.graph, inst.best_seeds, inst.weights, rng, realization).reward
        else:
            best = inst.f_star
        seeds_log.append(seeds)
        rewards[t] = outcome.reward
        regrets[t] = best - outcome.reward / eta
    return seeds_log, rewards, regrets


def run_experiment(cfg: ExperimentConfig, progress=None) -> RegretLog:
    """Run ``cfg.runs`` independent learning runs of ``cfg.n`` rounds each.

    Per-round regret is ``F* - f(S_t, w_t) / eta`` with ``eta = alpha * gamma``.
    ``F*`` is the expected spread of the oracle's seed set on the true
    weights (``regret='expected'``) or, with ``regret='coupled'``, the
    realized spread of that set under the same round's binary weights.
    If ``cfg.output`` is set the CSV and JSON sidecar are written there.
    """
    start = time.perf_counter()
    inst = prepare(cfg)
    runs, rounds, seeds_all, rewards, regrets = [], [], [], [], []
    for run in range(cfg.runs):
        s, rw, rg = _run_one(cfg, inst, run)
        runs.append(np.full(cfg.n, run))
        rounds.append(np.arange(1, cfg.n + 1))
        seeds_all.extend(s)
        rewards.append(rw)
        regrets.append(rg)
        if progress is not None:
            progress(run)
    report = None
    if cfg.metrics:
        try:
            report = metrics_report(inst.graph, cfg.K, inst.weights, rng=rng_stream(cfg.seed, _METRICS))
        except CapacityError as exc:
            report = {"error": str(exc)}
    feats = inst.features
    metadata = {
        "config": cfg.to_dict(),
        "alpha": inst.oracle.alpha,
        "gamma": inst.oracle.gamma,
        "eta": inst.oracle.eta,
        "f_star": inst.f_star,
        "f_star_exact": inst.f_star_exact,
        "best_seeds": list(inst.best_seeds),
        "rho": feats.rho,
        "feature_kind": feats.kind,
        "feature_D": feats.D,
        "feature_rescaled_globally": feats.kind == "node_product",
        "c_used": inst.c,
        "n_nodes": inst.graph.n_nodes,
        "n_edges": inst.graph.n_edges,
        "metrics": report,
        "wall_clock_s": time.perf_counter() - start,
    }
    log = RegretLog(
        np.concatenate(runs),
        np.concatenate(rounds),
        seeds_all,
        np.concatenate(rewards),
        np.concatenate(regrets),
        metadata,
    )
    if cfg.output:
        log.write(cfg.output)
    return log


@dataclass(frozen=True)
class LogLogFit:
    exponent: float
    intercept: float
    r_squared: float

    @property
    def constant(self) -> float:
        return math.exp(self.intercept)


def fit_loglog(points) -> LogLogFit:
    """Least-squares fit of ``log R = p log L + log c`` to ``(L, R)`` pairs."""
    pts = [(float(x), float(y)) for x, y in points]
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise InvalidArgument("log-log fit needs positive L and regret values")
    xs = np.log([x for x, _ in pts])
    ys = np.log([y for _, y in pts])
    if len(set(xs.tolist())) < 2:
        raise InvalidArgument("log-log fit needs at least two distinct L values")
    res = stats.linregress(xs, ys)
    return LogLogFit(float(res.slope), float(res.intercept), float(res.rvalue**2))


def sweep(cfg: ExperimentConfig, sizes, progress=None) -> dict:
    """Repeat ``cfg`` for each ``L`` in ``sizes`` and fit the growth of the
    mean final cumulative regret in ``L``."""
    rows = []
    for L in sizes:
        sub = dataclasses.replace(cfg, L=int(L), output=None)
        log = run_experiment(sub, progress)
        finals = log.final_regrets()
        rows.append({"L": int(L), "mean_regret": float(finals.mean()), "final_regrets": finals.tolist(), "log": log})
    fit = fit_loglog([(r["L"], r["mean_regret"]) for r in rows])
    return {"rows": rows, "fit": fit}
