"""Seeded experiment driver: trials, strategy comparisons, persistence."""
import csv
import dataclasses
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from ._backend import BACKEND
from .acquisition import STRATEGIES, CandidateGrids, context_objective, propose_duel
from .duel_model import BETA_MODES, BetaSchedule, BordaEstimate, DuelObservation
from .env import LINKS, sample_env
from .kernels import FAMILIES, KernelSpec
from .krr import NumericalError
from .policy import LowerEnvelope, absorb_round, extract_policy, regret_profile

log = logging.getLogger(__name__)

_STRATEGY_CODE = {name: i for i, name in enumerate(STRATEGIES)}

TRACE_COLUMNS = ["round", "max_regret", "median_regret", "wall_ms"]
AGGREGATE_COLUMNS = ["strategy", "round", "n_seeds", "max_regret_mean", "max_regret_se",
                     "median_regret_mean", "median_regret_se"]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    # environment
    d_x: int = 1
    d_a: int = 1
    num_features: int = 256
    env_lengthscale: float = 0.3
    link: str = "logistic"
    # model
    kernel: str = "squared-exponential"
    kernel_lengthscale: float = 0.3
    signal_variance: float = 1.0
    jitter: float = 1e-6
    noise_variance: float = 0.25
    B: float = 2.0
    delta: float = 0.05
    beta_mode: str = "constant"
    beta_constant: float = 2.0
    # protocol
    n0: int = 25
    T: int = 500
    grid_contexts: int = 64
    grid_actions: int = 64
    grid_seed: int = 0
    strategies: list = field(default_factory=lambda: list(STRATEGIES))
    seeds: list = field(default_factory=lambda: list(range(10)))
    eval_every: int = 25
    # output
    out: str = "runs"
    workers: int = 1
    record_wall_time: bool = False
    surface_rounds: list = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.d_x < 1 or self.d_a < 1:
            raise ConfigError("d_x and d_a must be at least 1")
        if not 0 <= self.n0 <= self.T:
            raise ConfigError("need 0 <= n0 <= T")
        if self.eval_every < 1:
            raise ConfigError("eval_every must be >= 1")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        bad = [s for s in self.strategies if s not in STRATEGIES]
        if bad or not self.strategies:
            raise ConfigError(f"strategies must be drawn from {STRATEGIES}, got {bad}")
        if self.link not in LINKS:
            raise ConfigError(f"link must be one of {LINKS}")
        if self.beta_mode not in BETA_MODES:
            raise ConfigError(f"beta_mode must be one of {BETA_MODES}")
        if self.kernel not in FAMILIES and self.kernel not in ("se", "matern52"):
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        for name in ("env_lengthscale", "kernel_lengthscale", "signal_variance",
                     "noise_variance", "B"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path):
        try:
            data = yaml.safe_load(Path(path).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a flat key-value mapping")
        return cls.from_dict(data)

    def to_dict(self):
        return dataclasses.asdict(self)

    def digest(self):
        """Hash of everything that affects results (output knobs excluded)."""
        d = self.to_dict()
        for k in ("out", "workers", "seeds", "strategies"):
            d.pop(k)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def kernel_spec(self):
        return KernelSpec.isotropic(self.kernel, self.kernel_lengthscale, self.d_x + self.d_a,
                                    self.signal_variance, self.jitter * self.signal_variance)

    def beta_schedule(self):
        return BetaSchedule(self.B, self.delta, 0.0, self.beta_mode, self.beta_constant,
                            self.d_x + self.d_a)

    def grids(self):
        return CandidateGrids.make(self.d_x, self.d_a, self.grid_contexts, self.grid_actions,
                                   self.grid_seed)

    def env(self, seed):
        return sample_env(self.d_x, self.d_a, self.num_features, self.env_lengthscale,
                          self.link, seed)


@dataclass
class RegretTrace:
    strategy: str
    seed: int
    rows: list = field(default_factory=list)  # (round, max, median, wall_ms)

    def rounds(self):
        return [r[0] for r in self.rows]


@dataclass
class TrialResult:
    trace: RegretTrace
    observations: list
    queried_variances: list
    info_gain: float
    noise_variance: float
    surfaces: dict = field(default_factory=dict)

    def summability_slack(self):
        """``2 Phi / log(1 + 1/eta2) - sum sigma^2``; nonnegative when sigma^2 <= 1."""
        bound = 2.0 / math.log1p(1.0 / self.noise_variance) * self.info_gain
        return bound - float(np.sum(self.queried_variances))


class TrialError(RuntimeError):
    def __init__(self, strategy, seed, round_, cause):
        super().__init__(f"trial {strategy}/seed {seed} failed at round {round_}: {cause}")
        self.strategy, self.seed, self.round, self.cause = strategy, seed, round_, cause


def _rngs(seed, strategy):
    code = _STRATEGY_CODE[strategy]
    return (np.random.default_rng([seed, 0]),  # warm start, shared across strategies
            np.random.default_rng([seed, 1, code]),  # proposals
            np.random.default_rng([seed, 2, code]))  # outcomes


def _surface(model, env, grids, envelope):
    mean, std = model.grid_posterior(grids)
    widths, _ = context_objective(model, grids)
    policy = extract_policy(envelope)
    return {
        "truth": env.borda_grid(grids.contexts, grids.actions),
        "mean": mean.copy(),
        "std": std.copy(),
        "acquisition": widths,
        "regret": regret_profile(policy, env, grids).per_context,
    }


def run_trial(config, strategy, seed, on_round=None):
    """One seeded run of one strategy.

    ``on_round(t, model, envelope)`` is called after every absorb, including
    the one closing the warm start at ``t = n0``.
    """
    env = config.env(seed)
    grids = config.grids()
    model = BordaEstimate(config.kernel_spec(), config.d_x, config.d_a,
                          config.noise_variance, config.beta_schedule())
    model.attach_grid(grids)
    envelope = LowerEnvelope.empty(grids)
    warm_rng, prop_rng, out_rng = _rngs(seed, strategy)
    trace = RegretTrace(strategy, seed)
    surfaces = {}
    start = time.perf_counter()
    t = 0

    def duel(prop, rng, t):
        outcome = env.duel_outcome(prop.context, prop.action, prop.opponent, rng)
        return DuelObservation(tuple(prop.context), tuple(prop.action), tuple(prop.opponent),
                               outcome, t, prop.uniform_opponent)

    def evaluate(t):
        policy = extract_policy(envelope)
        prof = regret_profile(policy, env, grids)
        wall = (time.perf_counter() - start) * 1000.0
        trace.rows.append((t, prof.max_regret, prof.median_regret, wall))

    try:
        for t in range(1, config.n0 + 1):
            prop = propose_duel("borda-uniform", model, grids, warm_rng)
            model.ingest(duel(prop, warm_rng, t))
        t = config.n0
        absorb_round(envelope, model)
        if on_round:
            on_round(t, model, envelope)
        evaluate(t)
        if t in config.surface_rounds:
            surfaces[t] = _surface(model, env, grids, envelope)
        for t in range(config.n0 + 1, config.T + 1):
            prop = propose_duel(strategy, model, grids, prop_rng)
            model.ingest(duel(prop, out_rng, t))
            absorb_round(envelope, model)
            if on_round:
                on_round(t, model, envelope)
            if (t - config.n0) % config.eval_every == 0 or t == config.T:
                evaluate(t)
            if t in config.surface_rounds:
                surfaces[t] = _surface(model, env, grids, envelope)
    except (NumericalError, ValueError, FloatingPointError) as exc:
        raise TrialError(strategy, seed, t, exc) from exc
    return TrialResult(trace, model.observations, model.queried_variances,
                       model.schedule.info_gain, model.noise_variance, surfaces)


# ---------------------------------------------------------------- persistence

def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_trace(out, result, config):
    tr = result.trace
    rows = [(t, mx, md, wall if config.record_wall_time else 0.0)
            for t, mx, md, wall in tr.rows]
    write_csv(Path(out) / f"trace_{tr.strategy}_{tr.seed}.csv", TRACE_COLUMNS, rows)
    write_csv(Path(out) / f"duels_{tr.strategy}_{tr.seed}.csv",
              DuelObservation.header(config.d_x, config.d_a),
              [o.to_row() for o in result.observations])
    if result.surfaces:
        write_surfaces(out, result, config.grids())


def write_surfaces(out, result, grids):
    """Per-round dumps: one joint-grid CSV and one per-context CSV per round."""
    tr = result.trace
    d_x, d_a = grids.contexts.shape[1], grids.actions.shape[1]
    joint_header = (["context_index", "action_index"] + [f"x{i}" for i in range(d_x)]
                    + [f"a{i}" for i in range(d_a)] + ["truth", "mean", "std"])
    ctx_header = (["context_index"] + [f"x{i}" for i in range(d_x)]
                  + ["acquisition", "regret"])
    gx, ga = grids.shape
    for t, surf in sorted(result.surfaces.items()):
        rows = []
        for i in range(gx):
            for j in range(ga):
                rows.append([i, j, *grids.contexts[i], *grids.actions[j], surf["truth"][i, j],
                             surf["mean"][i, j], surf["std"][i, j]])
        write_csv(Path(out) / f"surface_{tr.strategy}_{tr.seed}_{t}.csv", joint_header, rows)
        write_csv(Path(out) / f"surface_contexts_{tr.strategy}_{tr.seed}_{t}.csv", ctx_header,
                  [[i, *grids.contexts[i], surf["acquisition"][i], surf["regret"][i]]
                   for i in range(gx)])


def aggregate(traces):
    """Mean and standard error across seeds, per strategy and round."""
    by_key = {}
    for tr in traces:
        for t, mx, md, _ in tr.rows:
            by_key.setdefault((tr.strategy, t), []).append((mx, md))
    rows = []
    for strategy in STRATEGIES:
        keys = sorted(t for s, t in by_key if s == strategy)
        for t in keys:
            vals = np.asarray(by_key[(strategy, t)])
            n = len(vals)
            mean = vals.mean(axis=0)
            # shifted so that identical seeds give an exact zero
            spread = (vals - vals[0]).std(axis=0, ddof=1) if n > 1 else np.zeros(2)
            se = spread / np.sqrt(n)
            rows.append((strategy, t, n, mean[0], se[0], mean[1], se[1]))
    return rows


def _trial_job(args):
    config, strategy, seed = args
    try:
        return run_trial(config, strategy, seed), None
    except TrialError as exc:
        return None, {"strategy": strategy, "seed": seed, "round": exc.round,
                      "error": str(exc.cause)}


def metadata(config, failures=(), extra=None):
    meta = {
        "library": "borda_ae",
        "version": __version__,
        "backend": BACKEND,
        "config": config.to_dict(),
        "config_digest": config.digest(),
        "failures": list(failures),
        "failure_count": len(failures),
    }
    if extra:
        meta.update(extra)
    return meta


def write_meta(out, meta):
    (Path(out) / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def run_comparison(config, jobs=None):
    """Run every (strategy, seed) trial, write per-trial files and the aggregate.

    Returns ``(aggregate_rows, results, failures)``.
    """
    if len(config.strategies) < 2 or len(config.seeds) < 2:
        raise ConfigError("a comparison needs at least two strategies and two seeds")
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = jobs or [(config, s, seed) for s in config.strategies for seed in config.seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            outcomes = list(pool.map(_trial_job, jobs))
    else:
        outcomes = [_trial_job(j) for j in jobs]
    results, failures = [], []
    for res, err in outcomes:
        if err is not None:
            log.warning("trial failed: %s", err)
            failures.append(err)
            continue
        write_trace(out, res, config)
        results.append(res)
    rows = aggregate([r.trace for r in results])
    write_csv(out / "aggregate.csv", AGGREGATE_COLUMNS, rows)
    write_meta(out, metadata(config, failures))
    return rows, results, failures
