"""Acquisition strategies for choosing the next palpation point.

Every strategy scores the candidate grid from the current posterior and the
robot state, then takes the argmax over feasible (unvisited, optionally
step-capped) candidates. Ties go to the lowest candidate index.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .domain import Point2
from .energy import RobotLayout, wrap_abs
from .errors import ConfigError, StrategyError
from .gp import PosteriorField

log = logging.getLogger(__name__)


class StrategyKind(str, enum.Enum):
    RANDOM = "Random"
    UNC = "UNC"
    EI = "EI"
    ILS_UCB = "ILS_UCB"
    LSE = "LSE"
    RASEC = "RASEC"

    @classmethod
    def parse(cls, name: str) -> "StrategyKind":
        if isinstance(name, cls):
            return name
        key = str(name).upper().replace("-", "_")
        for kind in cls:
            if kind.value.upper() == key:
                return kind
        raise ConfigError(f"unknown strategy {name!r}")


@dataclass(frozen=True)
class LevelMode:
    """How the target level h is chosen: adaptive midpoint of the mean range, or fixed."""

    kind: str = "midpoint"
    value: float = 0.0

    @classmethod
    def parse(cls, spec) -> "LevelMode":
        if isinstance(spec, LevelMode):
            return spec
        if spec is None or spec == "midpoint":
            return cls()
        if isinstance(spec, (int, float)):
            return cls("fixed", float(spec))
        if isinstance(spec, str) and spec.startswith("fixed(") and spec.endswith(")"):
            return cls("fixed", float(spec[6:-1]))
        if isinstance(spec, dict) and "fixed" in spec:
            return cls("fixed", float(spec["fixed"]))
        raise ConfigError(f"bad level mode {spec!r}")


@dataclass(frozen=True)
class StrategyParams:
    """Strategy choice and its parameters.

    ``theta``, ``k_d`` and ``k_beta`` weight the RASEC terms (``theta`` is
    also the ILS-UCB trade-off). ``max_step`` (mm) and ``max_rotation``
    (rad) are optional hard per-step caps applied before scoring.
    """

    kind: StrategyKind = StrategyKind.RASEC
    theta: float = 0.5
    k_d: float = 0.5
    k_beta: float = 0.5
    xi: float = 0.0
    kappa: float = 1.96
    level: LevelMode = field(default_factory=LevelMode)
    max_step: float | None = None
    max_rotation: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", StrategyKind.parse(self.kind))
        object.__setattr__(self, "level", LevelMode.parse(self.level))
        if not 0 <= self.theta <= 1:
            raise ConfigError("theta must lie in [0, 1]")
        if self.k_d < 0 or self.k_beta < 0 or self.kappa < 0:
            raise ConfigError("k_d, k_beta and kappa must be non-negative")
        for cap in (self.max_step, self.max_rotation):
            if cap is not None and not cap > 0:
                raise ConfigError("hard caps must be positive")


# RASEC's parameters are a subset of the general strategy parameters.
RasecParams = StrategyParams


@dataclass
class AcquisitionState:
    """Everything a strategy may look at when picking the next point."""

    candidates: np.ndarray
    angles: np.ndarray
    posterior: PosteriorField
    last_point: Point2
    last_angle: float
    level: float
    visited: np.ndarray
    best_observed: float = 0.0
    warnings: list[str] = field(default_factory=list)

    @classmethod
    def initial(cls, candidates, layout: RobotLayout, posterior: PosteriorField,
                last_point, best_observed: float = 0.0) -> "AcquisitionState":
        candidates = np.asarray(candidates, dtype=float)
        last_point = Point2(*map(float, last_point))
        return cls(
            candidates=candidates,
            angles=layout.angles(candidates),
            posterior=posterior,
            last_point=last_point,
            last_angle=float(layout.angles(last_point)[0]),
            level=update_level(posterior),
            visited=np.zeros(len(candidates), dtype=bool),
            best_observed=best_observed,
        )

    def distances(self) -> np.ndarray:
        return np.hypot(self.candidates[:, 0] - self.last_point.x,
                        self.candidates[:, 1] - self.last_point.y)

    def rotations(self) -> np.ndarray:
        return wrap_abs(self.angles - self.last_angle)


def normalize_min_max(values, feasible=None) -> np.ndarray:
    """Rescale ``values`` to [0, 1] using the range over feasible entries.

    A flat range maps every entry to 0. Infeasible entries are transformed
    with the same affine map and may fall outside [0, 1].
    """
    values = np.asarray(values, dtype=float)
    if feasible is None:
        feasible = np.ones(values.shape, dtype=bool)
    if not np.any(feasible):
        raise StrategyError("no feasible candidate to normalise over")
    lo = values[feasible].min()
    hi = values[feasible].max()
    if hi <= lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def update_level(posterior: PosteriorField, mode: LevelMode | None = None) -> float:
    mode = LevelMode.parse(mode)
    if mode.kind == "fixed":
        return mode.value
    return float((posterior.mean.max() + posterior.mean.min()) / 2)


@dataclass(frozen=True)
class RasecTerms:
    exploration: np.ndarray   # normalised posterior std
    level_gap: np.ndarray     # normalised |mean - h|
    distance: np.ndarray      # normalised travel from the last point
    rotation: np.ndarray      # normalised base rotation from the last angle


def rasec_terms(state: AcquisitionState, feasible=None) -> RasecTerms:
    post = state.posterior
    return RasecTerms(
        exploration=normalize_min_max(post.std, feasible),
        level_gap=normalize_min_max(np.abs(post.mean - state.level), feasible),
        distance=normalize_min_max(state.distances(), feasible),
        rotation=normalize_min_max(state.rotations(), feasible),
    )


def rasec_scores(state: AcquisitionState, params: StrategyParams, feasible=None) -> np.ndarray:
    t = rasec_terms(state, feasible)
    return ((1 - params.theta) * t.exploration - params.theta * t.level_gap
            - params.k_d * t.distance - params.k_beta * t.rotation)


def rasec_score(state: AcquisitionState, params: StrategyParams, index: int,
                feasible=None) -> float:
    """RASEC score of the candidate at ``index``."""
    return float(rasec_scores(state, params, feasible)[index])


def expected_improvement(mean, std, best: float, xi: float = 0.0) -> np.ndarray:
    """Expected amount by which the field exceeds ``best + xi``."""
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    gain = mean - best - xi
    out = np.maximum(gain, 0.0)
    pos = std > 0
    z = gain[pos] / std[pos]
    out[pos] = gain[pos] * norm.cdf(z) + std[pos] * norm.pdf(z)
    return out


def feasible_mask(state: AcquisitionState, params: StrategyParams) -> np.ndarray:
    free = ~state.visited
    if not np.any(free):
        raise StrategyError("every candidate has already been visited")
    if params.max_step is None and params.max_rotation is None:
        return free
    capped = free.copy()
    if params.max_step is not None:
        capped &= state.distances() <= params.max_step + 1e-9
    if params.max_rotation is not None:
        capped &= state.rotations() <= params.max_rotation + 1e-12
    if not np.any(capped):
        msg = "hard caps exclude every candidate; caps ignored for this step"
        log.warning(msg)
        state.warnings.append(msg)
        return free
    return capped


def score_field(kind: StrategyKind, state: AcquisitionState, params: StrategyParams,
                feasible: np.ndarray) -> np.ndarray:
    """Raw acquisition values over all candidates (higher is better)."""
    post = state.posterior
    if kind is StrategyKind.UNC:
        return post.std.copy()
    if kind is StrategyKind.EI:
        return expected_improvement(post.mean, post.std, state.best_observed, params.xi)
    if kind is StrategyKind.ILS_UCB:
        return (1 - params.theta) * post.std - params.theta * np.abs(post.mean - state.level)
    if kind is StrategyKind.LSE:
        upper = post.mean + params.kappa * post.std - state.level
        lower = state.level - (post.mean - params.kappa * post.std)
        return np.minimum(upper, lower)
    if kind is StrategyKind.RASEC:
        return rasec_scores(state, params, feasible)
    raise StrategyError(f"{kind} has no score field")


def select_index(params: StrategyParams, state: AcquisitionState,
                 rng: np.random.Generator) -> int:
    feasible = feasible_mask(state, params)
    if params.kind is StrategyKind.RANDOM:
        return int(rng.choice(np.flatnonzero(feasible)))
    scores = score_field(params.kind, state, params, feasible)
    scores = np.where(feasible, scores, -np.inf)
    return int(np.argmax(scores))


def select_next(params: StrategyParams, state: AcquisitionState,
                rng: np.random.Generator) -> Point2:
    """Pick the next contact point; does not mark it visited."""
    i = select_index(params, state, rng)
    return Point2(*map(float, state.candidates[i]))


def strategy_from_dict(cfg: dict) -> StrategyParams:
    cfg = dict(cfg)
    cfg.pop("name", None)
    kind = cfg.pop("kind", "RASEC")
    allowed = {"theta", "k_d", "k_beta", "xi", "kappa", "level", "max_step", "max_rotation"}
    extra = set(cfg) - allowed
    if extra:
        raise ConfigError(f"unknown strategy keys: {sorted(extra)}")
    try:
        for key in ("theta", "k_d", "k_beta", "xi", "kappa"):
            if key in cfg:
                cfg[key] = float(cfg[key])
        for key in ("max_step", "max_rotation"):
            if cfg.get(key) is not None:
                cfg[key] = float(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad strategy parameter: {exc}") from exc
    return StrategyParams(kind=kind, **cfg)

