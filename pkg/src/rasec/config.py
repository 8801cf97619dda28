"""Declarative experiment configs (YAML).

An experiment is the cross product of its ``kernels`` and ``strategies``
lists, each pair run ``repeats`` times on the same phantom. Missing keys
fall back to the benchmark defaults in :mod:`rasec.runner`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .acquisition import strategy_from_dict
from .domain import GroundTruthPhantom, MeasurementNoise, Point2, phantom_from_dict
from .energy import RobotLayout
from .errors import ConfigError, RasecError
from .kernels import kernel_from_dict
from .runner import BENCH_KERNEL, InitialPolicy, TrialConfig

TOP_LEVEL_KEYS = {
    "name", "master_seed", "repeats", "iterations", "sigma_n2", "threshold",
    "phantom", "robot", "initial", "kernels", "strategies", "ablation_weight",
}


@dataclass(frozen=True)
class Arm:
    """One kernel/strategy pairing of an experiment."""

    name: str
    kernel_name: str
    strategy_name: str
    config: TrialConfig


@dataclass
class ExperimentConfig:
    name: str
    master_seed: int
    repeats: int
    iterations: int
    phantom: GroundTruthPhantom
    noise: MeasurementNoise
    phantom_cfg: dict
    arms: list[Arm] = field(default_factory=list)
    ablation_weight: float = 0.5
    digest: str = ""

    def named_configs(self) -> list[tuple[str, TrialConfig]]:
        return [(a.name, a.config) for a in self.arms]


def _initial(cfg) -> InitialPolicy:
    cfg = dict(cfg or {})
    policy = cfg.pop("policy", "center")
    points = tuple(tuple(map(float, p)) for p in cfg.pop("points", ()) or ())
    count = int(cfg.pop("count", 1))
    if cfg:
        raise ConfigError(f"unknown initial keys: {sorted(cfg)}")
    return InitialPolicy(policy, points, count)


def _robot(cfg) -> RobotLayout:
    cfg = dict(cfg or {})
    base = cfg.pop("base", (0.0, -50.0))
    fwd = cfg.pop("forward", (0.0, 1.0))
    if cfg:
        raise ConfigError(f"unknown robot keys: {sorted(cfg)}")
    return RobotLayout(Point2(*map(float, base)), Point2(*map(float, fwd)))


def parse_experiment(raw: dict, digest: str = "") -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("experiment config must be a mapping")
    extra = set(raw) - TOP_LEVEL_KEYS
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    try:
        phantom_cfg = dict(raw.get("phantom") or {})
        phantom_cfg.setdefault("lambda", 10.0)
        phantom_cfg.setdefault("sigma_n", 0.1)
        phantom, noise = phantom_from_dict(phantom_cfg)
        iterations = int(raw.get("iterations", 60))
        repeats = int(raw.get("repeats", 10))
        master_seed = int(raw.get("master_seed", 0))
        sigma_n2 = float(raw.get("sigma_n2", noise.sigma_n**2))
        threshold = raw.get("threshold")
        threshold = None if threshold is None else float(threshold)
        layout = _robot(raw.get("robot"))
        initial = _initial(raw.get("initial"))

        kernels = raw.get("kernels") or [{"name": "SE-OU"}]
        strategies = raw.get("strategies") or [{"name": "RASEC"}]
        arms = []
        for kcfg in kernels:
            kname = str(kcfg.get("name", kcfg.get("family", "SE_OU")))
            kcfg = {**_kernel_defaults(kcfg), **kcfg}
            kernel = kernel_from_dict(kcfg)
            for scfg in strategies:
                sname = str(scfg.get("name", scfg.get("kind", "RASEC")))
                strategy = strategy_from_dict(scfg)
                tc = TrialConfig(phantom=phantom, noise=noise, kernel=kernel,
                                 strategy=strategy, iterations=iterations,
                                 initial=initial, sigma_n2=sigma_n2, layout=layout,
                                 threshold=threshold)
                arms.append(Arm(f"{kname}/{sname}", kname, sname, tc))
        names = [a.name for a in arms]
        if len(set(names)) != len(names):
            raise ConfigError("kernel/strategy names must be unique")
        return ExperimentConfig(
            name=str(raw.get("name", "experiment")),
            master_seed=master_seed,
            repeats=repeats,
            iterations=iterations,
            phantom=phantom,
            noise=noise,
            phantom_cfg=phantom_cfg,
            arms=arms,
            ablation_weight=float(raw.get("ablation_weight", 0.5)),
            digest=digest,
        )
    except ConfigError:
        raise
    except RasecError as exc:
        raise ConfigError(str(exc)) from exc
    except (TypeError, ValueError, KeyError, AttributeError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def _kernel_defaults(kcfg: dict) -> dict:
    # unspecified SE-OU weights fall back to the calibrated benchmark values
    fam = str(kcfg.get("family", "SE_OU")).upper().replace("-", "_")
    if fam == "SE_OU":
        return {"alpha": BENCH_KERNEL.alpha, "beta": BENCH_KERNEL.beta}
    return {}


def load_experiment(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(data.decode("utf-8"))
    except (yaml.YAMLError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return parse_experiment(raw, hashlib.sha256(data).hexdigest())


def preset_path(name: str) -> Path:
    return Path(str(resources.files("rasec") / "presets" / f"{name}.yaml"))


def load_preset(name: str) -> ExperimentConfig:
    return load_experiment(preset_path(name))
