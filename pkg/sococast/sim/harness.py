"""Simulation harness: learner versus synthetic truth with exact risks.

A run draws a sample path and its conditional laws, searches the offline
comparator, lets the learner play every round through the forecaster's
gradient oracle and finally evaluates the true risks of the played
parameters.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from sococast.core.forecaster import Forecaster
from sococast.core.generator import make_rng
from sococast.core.learner import OnlineLearner
from sococast.forecasters.alpha import grad_bound
from sococast.forecasters.ar import ArForecaster
from sococast.forecasters.arch import ArchForecaster
from sococast.forecasters.joint import JointGaussianForecaster
from sococast.forecasters.mixture import MixtureForecaster
from sococast.geometry.sets import FeasibleSet
from sococast.learners.boa import boa_theorem_bound
from sococast.learners.ons import OnlineNewtonStep, ons_gamma_bound, ons_theorem_bound
from sococast.learners.stack import (
    BoaOnsStack,
    ComparatorLearner,
    ExpertBank,
    ExpertLabel,
    default_max_order,
    make_gamma_grid,
    make_joint_order_prior,
    make_order_prior,
    stack_theorem_bound,
)
from sococast.schema.config import ExperimentConfig, LearnerKind, RegretRecord
from sococast.schema.forecast import (
    ArchConfig,
    ArConfig,
    ConditionalLaw,
    JointConfig,
    MixtureConfig,
    as_law_path,
)
from sococast.schema.pubsub import Event
from sococast.schema.trace import OnsTrace
from sococast.sim.generators import build_generator
from sococast.utils.exceptions import ConfigurationError, ContractError, NumericError
from sococast.utils.pubsub import publish_event

BoundFn = Callable[[int], float]

CERTIFY_RTOL = 1e-6
STEP_TOL = 1e-12


class ComparatorResult(NamedTuple):
    x_star: np.ndarray
    cum_risk: float
    certified: bool


class SeedResult(BaseModel):
    """Everything one seed of an experiment produced.

    Attributes
    ----------
    - `records` (List[`RegretRecord`]): One record per round.
    - `predictions` (np.ndarray): The played parameters, one row per round.
    - `comparator` (np.ndarray): The offline comparator x*.
    - `certified` (bool): Whether no sampled point beat the comparator.
    - `clamp_events` (int): Clamped weights, densities and truth variances.
    - `expert_weights` (Dict, optional): Final aggregation weights by expert name.
    - `trace` (`OnsTrace`, optional): The ONS trace, when recorded.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    seed: int
    records: List[RegretRecord]
    predictions: np.ndarray
    comparator: np.ndarray
    comparator_cum_risk: float
    certified: bool
    clip_events: int
    clamp_events: int
    expert_weights: Optional[Dict[str, float]] = None
    trace: Optional[OnsTrace] = None

    @property
    def terminal_regret(self) -> float:
        return self.records[-1].regret

    @property
    def terminal_bound(self) -> float:
        return self.records[-1].theorem_bound_value

    @property
    def exceeded(self) -> bool:
        """Terminal regret above a finite bound."""
        bound = self.terminal_bound
        return math.isfinite(bound) and self.terminal_regret > bound


def _with_order(cfg, order: int, variance_order: Optional[int] = None):
    if isinstance(cfg, ArConfig):
        return cfg.model_copy(update={"p": order})
    if isinstance(cfg, ArchConfig):
        return cfg.model_copy(update={"q": order})
    if isinstance(cfg, JointConfig):
        q = order if variance_order is None else variance_order
        return cfg.model_copy(update={"p": order, "q": q})
    raise ConfigurationError(f"order grids do not apply to the {cfg.family} family")


def build_forecaster(
    cfg,
    alpha: Optional[float] = None,
    grad_bound_value: Optional[float] = None,
) -> Forecaster:
    """Instantiate the forecaster of a family configuration."""
    if isinstance(cfg, ArConfig):
        return ArForecaster(cfg, alpha, grad_bound_value)
    if isinstance(cfg, ArchConfig):
        return ArchForecaster(cfg, alpha, grad_bound_value)
    if isinstance(cfg, JointConfig):
        return JointGaussianForecaster(cfg, alpha, grad_bound_value)
    if isinstance(cfg, MixtureConfig):
        return MixtureForecaster(cfg, alpha, grad_bound_value)
    raise ConfigurationError(f"unknown forecaster family: {cfg}")


def ambient_forecaster(config: ExperimentConfig) -> Forecaster:
    """The forecaster the learner plays with; order grids use the largest order."""
    cfg = config.forecaster
    if config.learner.kind == LearnerKind.boa_ons and config.learner.order_grid:
        order = config.learner.max_order or default_max_order(config.T)
        cfg = _with_order(cfg, order)
    return build_forecaster(cfg, alpha=config.learner.alpha)


def _nan_outside(bound: BoundFn) -> BoundFn:
    def _bound(t: int) -> float:
        try:
            return bound(t)
        except ContractError:
            return math.nan

    return _bound


def _order_bank(
    config: ExperimentConfig, forecaster: Forecaster, max_order: int
) -> Tuple[ExpertBank, np.ndarray]:
    cfg, spec = config.forecaster, config.learner
    pairs: List[Tuple[int, int]]
    if isinstance(cfg, JointConfig):
        pairs = [(p, q) for p in range(1, max_order + 1) for q in range(1, max_order + 1)]
        prior = make_joint_order_prior(config.T, max_order, max_order)
    else:
        pairs = [(order, order) for order in range(1, max_order + 1)]
        prior = make_order_prior(config.T, max_order)
    experts: List[OnlineLearner] = []
    labels, indices = [], []
    for p, q in pairs:
        expert_cfg = _with_order(cfg, p, q)
        expert_forecaster = build_forecaster(expert_cfg, alpha=forecaster.alpha)
        experts.append(
            OnlineNewtonStep(
                expert_forecaster.feasible_set,
                forecaster.alpha / 2.0,
                grad_bound(expert_cfg),
                refresh_period=spec.refresh_period,
            )
        )
        if isinstance(cfg, JointConfig):
            labels.append(ExpertLabel(name=f"p={p},q={q}", p=p, q=q))
            indices.append(np.concatenate([np.arange(p), max_order + np.arange(q)]))
        elif isinstance(cfg, ArConfig):
            labels.append(ExpertLabel(name=f"p={p}", p=p))
            indices.append(np.arange(p))
        else:
            labels.append(ExpertLabel(name=f"q={q}", q=q))
            indices.append(np.arange(q))
    bank = ExpertBank(
        experts,
        labels,
        forecaster.grad_bound,
        forecaster.diameter,
        indices=indices,
        ambient_dim=forecaster.dim,
    )
    return bank, prior


def build_learner(
    config: ExperimentConfig,
    forecaster: Forecaster,
    x_star: Optional[np.ndarray] = None,
    record_trace: bool = False,
) -> Tuple[OnlineLearner, BoundFn]:
    """The learner of an experiment and its high-probability bound as a function of t.

    Bounds that do not apply to a round (T < 4, alpha below the grid) are NaN.

    Raises
    ------
    - `ConfigurationError`: If the learner does not fit the forecaster.
    """
    spec, delta = config.learner, config.delta
    alpha = forecaster.alpha
    G, D, d = forecaster.grad_bound, forecaster.diameter, forecaster.dim
    K = forecaster.feasible_set

    if spec.kind == LearnerKind.comparator:
        if x_star is None:
            raise ConfigurationError("the comparator learner needs the comparator point")
        return ComparatorLearner(x_star), lambda t: 0.0

    if spec.kind == LearnerKind.ons:
        gamma = spec.gamma if spec.gamma is not None else alpha / 2.0
        learner = OnlineNewtonStep(
            K, gamma, G, refresh_period=spec.refresh_period, record_trace=record_trace
        )
        if spec.gamma is None:
            return learner, lambda t: ons_theorem_bound(alpha, G, D, d, delta, t)
        return learner, _nan_outside(lambda t: ons_gamma_bound(alpha, gamma, G, D, d, delta, t))

    if spec.kind == LearnerKind.boa:
        points = [np.asarray(point, dtype=float) for point in spec.fixed_experts]
        for point in points:
            if point.shape != (d,) or not K.contains(point, tol=1e-9):
                raise ConfigurationError(f"fixed expert {point.tolist()} is not a point of K")
        bank = ExpertBank.from_fixed_points(points, G, D)
        n = len(points)
        learner = BoaOnsStack(bank, record_trace=record_trace)
        return learner, _nan_outside(
            lambda t: boa_theorem_bound(alpha, G, D, 1.0 / n, delta, t, n_experts=n)
        )

    if spec.order_grid:
        max_order = spec.max_order or default_max_order(config.T)
        bank, prior = _order_bank(config, forecaster, max_order)
        learner = BoaOnsStack(bank, prior=prior, record_trace=record_trace)
        prior_min, n = float(prior.min()), len(bank)

        def _order_bound(t: int) -> float:
            return ons_theorem_bound(alpha, G, D, d, delta, t) + boa_theorem_bound(
                alpha, G, D, prior_min, delta, t, n_experts=n
            )

        return learner, _nan_outside(_order_bound)

    grid_size = spec.gamma_grid_size or max(d, 20)
    bank = ExpertBank.from_gamma_grid(
        K, make_gamma_grid(grid_size), G, spec.refresh_period, record_trace
    )
    learner = BoaOnsStack(bank, record_trace=record_trace)
    return learner, _nan_outside(
        lambda t: stack_theorem_bound(alpha, G, D, d, grid_size, delta, t)
    )


def _lipschitz_estimate(
    grad: Callable[[np.ndarray], np.ndarray],
    feasible_set: FeasibleSet,
    rng: np.random.Generator,
    n_pairs: int = 10,
) -> float:
    points = feasible_set.sample(rng, 2 * n_pairs, vertex_prob=0.5)
    ratios = []
    for a, b in zip(points[:n_pairs], points[n_pairs:]):
        step = float(np.linalg.norm(a - b))
        if step > 0.0:
            ratios.append(float(np.linalg.norm(grad(a) - grad(b))) / step)
    L = max(ratios, default=0.0)
    return L if L > 0.0 else 1.0


def _projected_descent(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    feasible_set: FeasibleSet,
    x0: np.ndarray,
    step: float,
    max_iter: int,
) -> Tuple[np.ndarray, float]:
    x = feasible_set.project(x0)
    fx = f(x)
    for _ in range(max_iter):
        g = grad(x)
        while True:
            x_new = feasible_set.project(x - step * g)
            f_new = f(x_new)
            diff = x_new - x
            if f_new <= fx + g @ diff + (diff @ diff) / (2.0 * step) + 1e-12 * abs(fx):
                break
            step /= 2.0
            if step < 1e-300:
                break
        converged = float(np.max(np.abs(diff), initial=0.0)) <= STEP_TOL
        x, fx = x_new, f_new
        if converged:
            break
    return x, fx


def comparator_search(
    laws: Sequence[ConditionalLaw],
    forecaster: Forecaster,
    design: np.ndarray,
    feasible_set: Optional[FeasibleSet] = None,
    seed: int = 0,
    restarts: int = 20,
    max_iter: int = 5000,
    n_certify: int = 1000,
) -> ComparatorResult:
    """Minimize the cumulative risk sum_t KL(P_t, forecast(x)) over the feasible set.

    Projected gradient descent with backtracking, restarted from the centre and
    from sampled points. The result is certified against `n_certify` sampled
    points; when one of them is better by more than a relative 1e-6 a
    `CertificationWarning` is published and the best point found is returned.
    """
    laws = as_law_path(laws)
    feasible_set = feasible_set or forecaster.feasible_set
    rng = make_rng(seed)

    def f(x: np.ndarray) -> float:
        return forecaster.cumulative_risk(x, design, laws)

    def grad(x: np.ndarray) -> np.ndarray:
        return forecaster.cumulative_risk_grad(x, design, laws)

    step = 1.0 / _lipschitz_estimate(grad, feasible_set, rng)
    starts = [feasible_set.center()]
    if restarts > 1:
        starts.extend(feasible_set.sample(rng, restarts - 1, vertex_prob=0.5))
    best_x, best_f = None, math.inf
    for x0 in starts:
        x, fx = _projected_descent(f, grad, feasible_set, x0, step, max_iter)
        if fx < best_f:
            best_x, best_f = x, fx

    certified = True
    if n_certify > 0:
        samples = feasible_set.sample(rng, n_certify, vertex_prob=0.5)
        values = np.array([f(s) for s in samples])
        i = int(np.argmin(values))
        if values[i] < best_f - CERTIFY_RTOL * abs(best_f) - 1e-12:
            certified = False
            publish_event(
                Event.CertificationWarning,
                id(forecaster),
                {"best_sample": float(values[i]), "cum_risk": best_f},
            )
            best_x, best_f = samples[i], float(values[i])
    publish_event(
        Event.ComparatorSearch,
        id(forecaster),
        {"cum_risk": best_f, "certified": certified, "x_star": best_x.tolist()},
    )
    return ComparatorResult(best_x, best_f, certified)


def _clamp_events(learner: OnlineLearner, forecaster: Forecaster, generator) -> int:
    return (
        getattr(learner, "clamp_count", 0)
        + getattr(forecaster, "clamp_count", 0)
        + getattr(generator, "clamp_count", 0)
    )


def simulate(
    config: ExperimentConfig,
    seed: Optional[int] = None,
    record_trace: bool = False,
) -> SeedResult:
    """Run one seed of an experiment.

    Raises
    ------
    - `NumericError`: With the round index attached, if a learner or oracle fails numerically.
    - `ConfigurationError`: If the learner does not fit the forecaster family.
    """
    seed = config.seeds[0] if seed is None else seed
    T = config.T
    publish_event(Event.SeedStart, seed, {"seed": seed})
    forecaster = ambient_forecaster(config)
    generator = build_generator(config.generator, seed)
    samples, laws = generator(T)
    design = forecaster.design(samples)
    comparator = comparator_search(laws, forecaster, design, seed=seed)
    learner, bound = build_learner(config, forecaster, comparator.x_star, record_trace)
    if forecaster.warmup:
        publish_event(Event.WarmUp, seed, {"rounds": forecaster.warmup})

    snapshots = isinstance(learner, BoaOnsStack) and config.learner.weights_snapshot
    predictions = np.empty((T, forecaster.dim))
    clip_events = np.zeros(T, dtype=int)
    clamp_events = np.zeros(T, dtype=int)
    weights: List[Optional[List[float]]] = [None] * T
    for t in range(T):
        try:
            predictions[t] = learner.observe(forecaster.oracle(design[t], samples[t]))
        except NumericError as e:
            if e.round_index is not None:
                raise
            raise e.at_round(t + 1) from e
        clip_events[t] = getattr(learner, "clip_count", 0)
        clamp_events[t] = _clamp_events(learner, forecaster, generator)
        if snapshots:
            weights[t] = learner.weights.tolist()

    inst = forecaster.risks(predictions, design, laws)
    comp = forecaster.risks(forecaster._rows(comparator.x_star, T), design, laws)
    cum, comp_cum = np.cumsum(inst), np.cumsum(comp)
    records = [
        RegretRecord(
            t=t + 1,
            inst_risk=float(inst[t]),
            cum_risk=float(cum[t]),
            comparator_cum_risk=float(comp_cum[t]),
            regret=float(cum[t] - comp_cum[t]),
            theorem_bound_value=float(bound(t + 1)),
            clip_events=int(clip_events[t]),
            clamp_events=int(clamp_events[t]),
            weights_snapshot=weights[t],
        )
        for t in range(T)
    ]
    result = SeedResult(
        seed=seed,
        records=records,
        predictions=predictions,
        comparator=comparator.x_star,
        comparator_cum_risk=comparator.cum_risk,
        certified=comparator.certified,
        clip_events=int(clip_events[-1]),
        clamp_events=int(clamp_events[-1]),
        expert_weights=learner.weights_by_label() if isinstance(learner, BoaOnsStack) else None,
        trace=getattr(learner, "trace", None),
    )
    publish_event(
        Event.SeedEnd,
        seed,
        {
            "seed": seed,
            "regret": result.terminal_regret,
            "bound": result.terminal_bound,
            "clip_events": result.clip_events,
            "clamp_events": result.clamp_events,
        },
    )
    return result


def run_experiment(config: ExperimentConfig, seed: Optional[int] = None) -> List[RegretRecord]:
    """The per-round records of one seed (the first configured seed by default)."""
    return simulate(config, seed).records


def run_seeds(config: ExperimentConfig, workers: int = 1) -> List[SeedResult]:
    """Run every configured seed, `workers` at a time, in seed order."""
    publish_event(
        Event.ExperimentStart,
        id(config),
        {
            "learner": config.learner.kind.value,
            "family": config.forecaster.family,
            "T": config.T,
            "seeds": config.seeds,
        },
    )
    if workers <= 1:
        return [simulate(config, seed) for seed in config.seeds]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda seed: simulate(config, seed), config.seeds))
