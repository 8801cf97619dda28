"""Sequential palpation trials and repeated-trial benchmarks."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import gp
from .acquisition import (AcquisitionState, StrategyKind, StrategyParams, feasible_mask,
                          score_field, select_index, update_level)
from .domain import (GroundTruthPhantom, MeasurementNoise, Point2, two_incision_phantom,
                     write_grid_csv)
from .energy import EnergyLedger, RobotLayout, accrue
from .errors import ConfigError, RasecError
from .kernels import KernelFamily, KernelSpec
from .metrics import ClassificationReport, classify_field, confusion_report

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InitialPolicy:
    """Where the first measurement(s) go: ``center``, ``fixed`` points or ``random`` k."""

    kind: str = "center"
    points: tuple = ()
    count: int = 1

    def __post_init__(self):
        if self.kind not in ("center", "fixed", "random"):
            raise ConfigError(f"unknown initial policy {self.kind!r}")
        if self.kind == "fixed" and not self.points:
            raise ConfigError("fixed initial policy needs at least one point")
        if self.kind == "random" and self.count < 1:
            raise ConfigError("random initial policy needs count >= 1")

    def indices(self, candidates: np.ndarray, rng: np.random.Generator) -> list[int]:
        if self.kind == "random":
            return [int(i) for i in rng.choice(len(candidates), self.count, replace=False)]
        targets = [(0.0, 0.0)] if self.kind == "center" else list(self.points)
        out = []
        for p in targets:
            d = np.hypot(candidates[:, 0] - p[0], candidates[:, 1] - p[1])
            i = int(np.argmin(d))
            if i not in out:
                out.append(i)
        return out


# Benchmark defaults: two incisions scored on a 0-10 softness scale with 1 %
# measurement noise, SE-OU weights from scripts/calibrate_fusion_kernel.py.
BENCH_LAMBDA = 10.0
BENCH_SIGMA_N = 0.1
BENCH_KERNEL = KernelSpec(family=KernelFamily.SE_OU, sigma_f=1.0, l1=4.0, l2=3.5,
                          alpha=0.75, beta=0.25)


def bench_phantom() -> GroundTruthPhantom:
    return two_incision_phantom(lambda_value=BENCH_LAMBDA, gamma_value=0.0)


@dataclass(frozen=True)
class TrialConfig:
    phantom: GroundTruthPhantom = field(default_factory=bench_phantom)
    noise: MeasurementNoise = field(default_factory=lambda: MeasurementNoise(BENCH_SIGMA_N))
    kernel: KernelSpec = BENCH_KERNEL
    strategy: StrategyParams = field(default_factory=StrategyParams)
    iterations: int = 60
    seed: int = 0
    initial: InitialPolicy = field(default_factory=InitialPolicy)
    sigma_n2: float = BENCH_SIGMA_N**2
    layout: RobotLayout = field(default_factory=RobotLayout)
    threshold: float | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError("iterations must be at least 1")
        if self.sigma_n2 < 0:
            raise ConfigError("sigma_n2 must be non-negative")
        self.layout.check_outside(self.phantom.domain)

    @property
    def decision_threshold(self) -> float:
        return self.phantom.boundary_value if self.threshold is None else self.threshold


@dataclass
class TrialResult:
    points: np.ndarray
    values: np.ndarray
    reports: list[ClassificationReport]
    ledger: EnergyLedger
    final_field: gp.PosteriorField
    warnings: list[str] = field(default_factory=list)

    @property
    def final(self) -> ClassificationReport:
        return self.reports[-1]

    def trajectory(self) -> list[dict]:
        """Per-iteration metrics and cumulative energy, one dict per measurement count."""
        dist = np.concatenate([[0.0], self.ledger.dist_cum()])
        rot = np.concatenate([[0.0], self.ledger.rot_cum()])
        offset = len(dist) - len(self.reports)
        rows = []
        for t, rep in enumerate(self.reports):
            rows.append({
                "iteration": t + offset + 1,
                "precision": rep.precision,
                "recall": rep.recall,
                "f1": rep.f1,
                "dist_cum": float(dist[t + offset]),
                "rot_cum": float(rot[t + offset]),
            })
        return rows

    def to_json(self, phantom_cfg: dict | None = None) -> str:
        payload = {
            "points": self.points.tolist(),
            "values": self.values.tolist(),
            "trajectory": self.trajectory(),
            "energy": [dict(zip(("step", "dist_step", "dist_cum", "rot_step", "rot_cum"), r))
                       for r in self.ledger.rows()],
            "final_mean": self.final_field.mean.tolist(),
            "final_std": self.final_field.std.tolist(),
            "warnings": self.warnings,
        }
        if phantom_cfg is not None:
            payload["phantom"] = phantom_cfg
        return json.dumps(payload)


def model_kernel(kernel: KernelSpec, phantom: GroundTruthPhantom) -> KernelSpec:
    # TP radius: the largest distance any two candidates can have
    if kernel.family is KernelFamily.TP and kernel.R is None:
        return kernel.with_radius(phantom.domain.diameter)
    return kernel


def run_trial(config: TrialConfig, score_dir=None) -> TrialResult:
    """Run one sequential palpation trial.

    The GP is refit on every measurement so far, the classification report
    is recorded, then the strategy picks the next unvisited candidate until
    ``config.iterations`` measurements have been taken. With ``score_dir``
    set, each step's acquisition field is written there as a grid CSV.
    """
    rng = np.random.default_rng(config.seed)
    phantom = config.phantom
    domain = phantom.domain
    X = domain.candidates()
    labels = phantom.grid_labels()
    truth = phantom.grid_values()
    kernel = model_kernel(config.kernel, phantom)
    threshold = config.decision_threshold
    layout = config.layout

    def observe(i):
        return truth[i] + (config.noise.sigma_n * rng.standard_normal()
                           if config.noise.sigma_n > 0 else 0.0)

    ledger = EnergyLedger()
    chosen: list[int] = []
    values: list[float] = []
    for i in config.initial.indices(X, rng)[: config.iterations]:
        if chosen:
            accrue(ledger, layout, X[chosen[-1]], X[i])
        chosen.append(i)
        values.append(observe(i))

    reports: list[ClassificationReport] = []
    state = None
    while True:
        t = len(chosen)
        try:
            model = gp.fit(kernel, X[chosen], values, config.sigma_n2)
        except RasecError as exc:
            raise type(exc)(f"iteration {t}: {exc}") from exc
        post = gp.predict_field(model, domain)
        reports.append(confusion_report(classify_field(post.mean, threshold), labels))
        if t >= config.iterations:
            break
        if state is None:
            state = AcquisitionState.initial(X, layout, post, X[chosen[-1]])
            state.visited[chosen] = True
        state.posterior = post
        state.level = update_level(post, config.strategy.level)
        state.best_observed = float(max(values))
        try:
            i = select_index(config.strategy, state, rng)
            if score_dir is not None and config.strategy.kind is not StrategyKind.RANDOM:
                feasible = feasible_mask(state, config.strategy)
                scores = score_field(config.strategy.kind, state, config.strategy, feasible)
                write_grid_csv(Path(score_dir) / f"scores_{t + 1:03d}.csv", domain,
                               np.where(feasible, scores, np.nan))
        except RasecError as exc:
            raise type(exc)(f"iteration {t + 1}: {exc}") from exc
        accrue(ledger, layout, X[chosen[-1]], X[i])
        chosen.append(i)
        values.append(observe(i))
        state.visited[i] = True
        state.last_point = Point2(*map(float, X[i]))
        state.last_angle = float(state.angles[i])

    return TrialResult(
        points=X[chosen].copy(),
        values=np.array(values),
        reports=reports,
        ledger=ledger,
        final_field=post,
        warnings=list(state.warnings) if state else [],
    )


def trial_seed(master_seed: int, trial_index: int) -> int:
    """Seed for one trial; depends only on the master seed and the trial index."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(trial_index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


METRICS = ("precision", "recall", "f1", "distance", "rotation")


@dataclass
class TrialRecord:
    config: str
    trial: int
    seed: int
    result: TrialResult | None
    error: str | None = None

    def row(self) -> dict:
        r = self.result
        return {
            "config": self.config,
            "trial": self.trial,
            "seed": self.seed,
            "precision": r.final.precision,
            "recall": r.final.recall,
            "f1": r.final.f1,
            "distance": r.ledger.cumulative_distance,
            "rotation": r.ledger.cumulative_rotation,
            "n_points": len(r.points),
        }


@dataclass
class AggregateResult:
    config: str
    n_trials: int
    mean: dict
    std: dict
    error: str | None = None

    def row(self) -> dict:
        out = {"config": self.config, "n_trials": self.n_trials}
        for m in METRICS:
            out[f"{m}_mean"] = self.mean.get(m, float("nan"))
            out[f"{m}_std"] = self.std.get(m, float("nan"))
        return out


def aggregate(name: str, records: list[TrialRecord]) -> AggregateResult:
    failed = [r for r in records if r.error]
    if failed or not records:
        msg = failed[0].error if failed else "no trials"
        return AggregateResult(name, 0, {}, {}, error=msg)
    rows = [r.row() for r in records]
    mean = {m: float(np.mean([row[m] for row in rows])) for m in METRICS}
    std = {m: float(np.std([row[m] for row in rows])) for m in METRICS}
    return AggregateResult(name, len(rows), mean, std)


def _run_one(args):
    name, trial, config = args
    try:
        return TrialRecord(name, trial, config.seed, run_trial(config))
    except RasecError as exc:
        return TrialRecord(name, trial, config.seed, None, f"{name} trial {trial}: {exc}")


def run_benchmark(configs: list[tuple[str, TrialConfig]], repeats: int, master_seed: int = 0,
                  threads: int = 1):
    """Run every named config ``repeats`` times on shared per-trial seeds.

    Trial ``i`` of every config uses the same seed, so configs are compared
    on matched noise draws. Returns ``(aggregates, records)``; a config whose
    trial fails gets an aggregate carrying the error and no metrics.
    """
    if repeats < 1:
        raise ConfigError("repeats must be at least 1")
    jobs = [(name, i, replace(cfg, seed=trial_seed(master_seed, i)))
            for name, cfg in configs for i in range(repeats)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [_run_one(job) for job in jobs]
    aggregates = []
    for name, _ in configs:
        mine = [r for r in records if r.config == name]
        agg = aggregate(name, mine)
        if agg.error:
            log.error("config %s aborted: %s", name, agg.error)
        aggregates.append(agg)
    return aggregates, records


def run_energy_ablation(base: TrialConfig, repeats: int, master_seed: int = 0,
                        weights: float = 0.5, threads: int = 1):
    """Matched-seed comparison of RASEC with and without the energy terms."""
    strat = base.strategy
    arms = [
        ("constrained", replace(base, strategy=replace(strat, k_d=weights, k_beta=weights))),
        ("unconstrained", replace(base, strategy=replace(strat, k_d=0.0, k_beta=0.0))),
    ]
    return run_benchmark(arms, repeats, master_seed, threads)


def mean_trajectory(records: list[TrialRecord]) -> list[dict]:
    """Average per-iteration trajectories over the successful records."""
    trajs = [r.result.trajectory() for r in records if r.result is not None]
    if not trajs:
        return []
    out = []
    for rows in zip(*trajs):
        avg = {"iteration": rows[0]["iteration"]}
        for key in ("precision", "recall", "f1", "dist_cum", "rot_cum"):
            avg[key] = float(np.mean([row[key] for row in rows]))
        out.append(avg)
    return out
