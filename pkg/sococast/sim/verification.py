"""Property suites behind `sococast verify`.

Every suite returns a `SuiteResult` whose `worst_margin` is the smallest
slack observed (negative when the property failed).
"""
import math
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from sococast.core.forecaster import Forecaster
from sococast.core.generator import make_rng
from sococast.forecasters.alpha import AlphaSetting, ForecasterConfig, alpha_constant
from sococast.forecasters.mixture import mixture_components
from sococast.geometry.projection import a_norm_objective, a_norm_project
from sococast.geometry.sets import FeasibleSet, L1Ball, Simplex
from sococast.learners.boa import BernsteinOnlineAggregation, boa_theorem_bound
from sococast.learners.ons import OnlineNewtonStep, ons_theorem_bound
from sococast.learners.stack import make_gamma_grid
from sococast.schema.config import (
    ExperimentConfig,
    GaussianIidSpec,
    GeneratorSpec,
    LearnerSpec,
    MixtureTruthSpec,
    WellSpecifiedARCHSpec,
    WellSpecifiedARSpec,
    WellSpecifiedJointSpec,
)
from sococast.schema.forecast import ArchConfig, ArConfig, JointConfig, MixtureConfig
from sococast.schema.pubsub import Event
from sococast.schema.trace import SuiteResult
from sococast.sim.diagnostics import (
    check_h2_empirical,
    check_pathwise_bounds,
    log_fit,
    quantile_check,
)
from sococast.sim.generators import build_generator
from sococast.sim.harness import SeedResult, build_forecaster, run_seeds
from sococast.utils.pubsub import publish_event

FD_STEP = 1e-6
FD_RTOL = 1e-6
GRID_POINTS = 401
GRID_RTOL = 1e-3
H2_BREAK_FACTOR = 10.0
LOG_LOSS_EXP_CONCAVITY = 1.0
RATE_HORIZONS = 4
RATE_R2 = 0.9
ADAPTATION_FACTOR = 3.0
ADAPTATION_MASS = 0.5
MIXTURE_COVERAGE = 0.9


class H2Case(NamedTuple):
    name: str
    cfg: ForecasterConfig
    truth: GeneratorSpec
    alpha: float
    moment: str
    break_alpha: float
    reported: Optional[float] = None


def _suite(name: str, margins: List[float], failures: int, details: List[str]) -> SuiteResult:
    worst = min(margins) if margins else math.inf
    return SuiteResult(suite=name, passed=failures == 0, worst_margin=worst, details="\n".join(details))


def pathwise_ons(n_traces: int = 100, d: int = 5, T: int = 2000, seed: int = 0) -> SuiteResult:
    """The ONS inequality on random gradient sequences with ||g_t|| <= G.

    Odd traces repeat one gradient direction, which drives the iterate to the
    boundary of the set.
    """
    rng = make_rng(seed)
    margins, failures, details = [], 0, []
    feasible_set = L1Ball(n=d)
    for i in range(n_traces):
        G = float(rng.uniform(0.5, 2.0))
        gamma = float(rng.uniform(0.05, 1.0))
        learner = OnlineNewtonStep(feasible_set, gamma, G, record_trace=True)
        direction = rng.standard_normal(d)
        for _ in range(T):
            g = direction if i % 2 else rng.standard_normal(d)
            g = g * (G * rng.uniform() / np.linalg.norm(g))
            learner.step(g)
        report = check_pathwise_bounds(learner.trace, feasible_set=feasible_set, seed=seed + i)
        margins.append(report.worst_slack)
        failures += report.violations
        if report.violations:
            details.append(f"trace {i}: {report.violations} violations")
    details.append(f"{n_traces} traces, d={d}, T={T}, {failures} violations")
    return _suite("pathwise-ons", margins, failures, details)


def _adversarial_losses(rng: np.random.Generator, K: int, T: int, R: float) -> np.ndarray:
    # alternating signs with a leader that changes every block
    signs = np.where(np.arange(T) % 2 == 0, 1.0, -1.0)[:, None]
    pattern = rng.choice([-1.0, 1.0], size=K)
    losses = 0.5 * R * signs * pattern[None, :]
    block = max(T // 10, 1)
    for start in range(0, T, block):
        leader = rng.integers(K)
        losses[start : start + block, leader] = -0.5 * R
    return losses


def pathwise_boa(
    n_random: int = 100, n_adversarial: int = 10, K: int = 8, T: int = 5000, seed: int = 0
) -> SuiteResult:
    """The BOA bound against every expert, T >= 4, for losses in [-R/2, R/2]."""
    rng = make_rng(seed)
    R = 1.0
    margins, failures, details = [], 0, []
    for i in range(n_random + n_adversarial):
        prior = rng.dirichlet(np.ones(K)) if i % 2 else np.full(K, 1.0 / K)
        prior = prior / prior.sum()
        learner = BernsteinOnlineAggregation(prior, R, record_trace=True)
        if i < n_random:
            losses = rng.uniform(-0.5 * R, 0.5 * R, size=(T, K))
        else:
            losses = _adversarial_losses(rng, K, T, R)
        for row in losses:
            learner.step(row)
        report = check_pathwise_bounds(learner.trace)
        margins.append(report.worst_slack)
        failures += report.violations
        if report.violations:
            details.append(f"trace {i}: {report.violations} violations")
    details.append(
        f"{n_random} random and {n_adversarial} adversarial traces, K={K}, T={T}, {failures} violations"
    )
    return _suite("pathwise-boa", margins, failures, details)


def _gradient_cases(T: int) -> List[Tuple[str, Forecaster, np.ndarray, np.ndarray]]:
    mixture = MixtureConfig()
    components = mixture_components(mixture)
    truths = [
        ("ar", ArConfig(), WellSpecifiedARSpec()),
        ("arch", ArchConfig(), WellSpecifiedARCHSpec()),
        ("joint", JointConfig(), WellSpecifiedJointSpec()),
        (
            "mixture",
            mixture,
            MixtureTruthSpec(components=components, cycle=list(range(len(components))), segment=7),
        ),
    ]
    cases = []
    for name, cfg, truth in truths:
        forecaster = build_forecaster(cfg)
        samples, _ = build_generator(truth, 0)(T)
        cases.append((name, forecaster, forecaster.design(samples), samples))
    return cases


def finite_difference_error(
    forecaster: Forecaster, x: np.ndarray, features: np.ndarray, y: float, h: float = FD_STEP
) -> float:
    """||fd - grad||_inf / max(||grad||_inf, 1) with central differences of step h."""
    grad = forecaster(x, features, y).grad
    fd = np.empty_like(grad)
    for k in range(grad.shape[0]):
        e = np.zeros_like(x)
        e[k] = h
        fd[k] = (forecaster(x + e, features, y).loss - forecaster(x - e, features, y).loss) / (2.0 * h)
    return float(np.max(np.abs(fd - grad)) / max(float(np.max(np.abs(grad))), 1.0))


def gradients(n_points: int = 1000, seed: int = 0) -> SuiteResult:
    """Analytic against central finite-difference gradients for the four loss families."""
    rng = make_rng(seed)
    margins, failures, details = [], 0, []
    for name, forecaster, design, samples in _gradient_cases(max(n_points, 10)):
        points = forecaster.feasible_set.sample(rng, n_points, vertex_prob=0.2)
        rounds = rng.integers(0, samples.shape[0], size=n_points)
        errors = [
            finite_difference_error(forecaster, x, design[t], float(samples[t]))
            for x, t in zip(points, rounds)
        ]
        worst = max(errors)
        margins.append(FD_RTOL - worst)
        bad = int(np.sum(np.array(errors) > FD_RTOL))
        failures += bad
        details.append(f"{name}: max relative error {worst:.3e} over {n_points} points")
    return _suite("gradients", margins, failures, details)


def _grid(feasible_set: FeasibleSet) -> np.ndarray:
    if isinstance(feasible_set, L1Ball):
        r = feasible_set.radius
        axis = np.linspace(-r, r, GRID_POINTS)
        X = np.stack(np.meshgrid(axis, axis), axis=-1).reshape(-1, 2)
        return X[np.abs(X).sum(axis=1) <= r + 1e-12]
    axis = np.linspace(0.0, 1.0, GRID_POINTS)
    X = np.stack(np.meshgrid(axis, axis), axis=-1).reshape(-1, 2)
    return X[np.abs(X.sum(axis=1) - 1.0) <= 1e-9]


def projections(n_instances: int = 50, seed: int = 0) -> SuiteResult:
    """a_norm_project against a 401 x 401 grid minimizer in dimension 2."""
    rng = make_rng(seed)
    margins, failures, details = [], 0, []
    for feasible_set in (L1Ball(n=2), Simplex(n=2)):
        grid = _grid(feasible_set)
        for _ in range(n_instances):
            M = rng.standard_normal((2, 2))
            A = M.T @ M + 0.1 * np.eye(2)
            y = 2.0 * rng.standard_normal(2)
            x = a_norm_project(feasible_set, y, A)
            diff = grid - y
            grid_min = float(0.5 * np.min(np.einsum("nk,kl,nl->n", diff, A, diff)))
            value = a_norm_objective(x, y, A)
            allowed = GRID_RTOL * max(grid_min, 1e-12)
            margin = allowed - (value - grid_min)
            margins.append(margin)
            if margin < 0.0 or not feasible_set.contains(x, tol=1e-9):
                failures += 1
                details.append(f"{feasible_set.kind}: y={y.tolist()} gap {value - grid_min:.3e}")
        details.append(f"{feasible_set.kind}: {n_instances} instances")
    return _suite("projections", margins, failures, details)


def h2(n_pairs: int = 100_000, T: int = 2000, seed: int = 0) -> SuiteResult:
    """(H2) holds at the families' alpha and breaks at a much larger alpha.

    The variance alpha comes from strong convexity of the risk, so it is
    checked against the squared risk gradient; the conditional-moment count at
    the same alpha is reported alongside. The mixture alpha sits far below the
    curvature of the clamped log loss, so 10 alpha is reported and the break is
    checked at 10 times the log loss's own constant mu/2.
    """
    margins, failures, details = [], 0, []
    mixture = MixtureConfig()
    components = mixture_components(mixture)
    ar, arch = ArConfig(), ArchConfig()
    ar_alpha = alpha_constant(AlphaSetting.ArMean, sigma2=ar.sigma2, D=ar.D)
    variance_alpha = alpha_constant(AlphaSetting.Variance, c=arch.c)
    mixture_alpha = alpha_constant(AlphaSetting.Mixture, K=len(components), m=mixture.m, M=mixture.M)
    cases: List[H2Case] = [
        H2Case(
            "ar_mean",
            ar,
            WellSpecifiedARSpec(coeffs=[0.0], noise_var=ar.sigma2, D=ar.D),
            ar_alpha,
            "conditional",
            H2_BREAK_FACTOR * ar_alpha,
        ),
        H2Case(
            "variance",
            arch,
            WellSpecifiedARCHSpec(c=arch.c, sigma_bar2=arch.sigma_bar2),
            variance_alpha,
            "risk",
            H2_BREAK_FACTOR * variance_alpha,
            reported=variance_alpha,
        ),
        H2Case(
            "mixture",
            mixture,
            MixtureTruthSpec(components=components, cycle=list(range(len(components))), segment=50),
            mixture_alpha,
            "conditional",
            H2_BREAK_FACTOR * 0.5 * LOG_LOSS_EXP_CONCAVITY,
            reported=H2_BREAK_FACTOR * mixture_alpha,
        ),
    ]
    for i, case in enumerate(cases):
        forecaster = build_forecaster(case.cfg)
        samples, laws = build_generator(case.truth, seed)(T)
        design = forecaster.design(samples)
        n_small = max(n_pairs // 10, 100)
        holds = check_h2_empirical(
            laws, forecaster, None, case.alpha, n_pairs, design, seed=seed + i, moment=case.moment
        )
        breaks = check_h2_empirical(
            laws, forecaster, None, case.break_alpha, n_small, design, seed=seed + i
        )
        margins.append(-holds.worst_margin)
        failures += holds.violations + (breaks.violations == 0)
        details.append(
            f"{case.name}: alpha={case.alpha:.4g} ({case.moment}) {holds.violations} violations;"
            f" alpha={case.break_alpha:.4g} {breaks.violations} violations"
        )
        if case.reported is not None:
            reported = check_h2_empirical(
                laws, forecaster, None, case.reported, n_small, design, seed=seed + i
            )
            details.append(
                f"{case.name}: alpha={case.reported:.4g} (conditional) {reported.violations}"
                f" violations out of {reported.n_pairs}, reported only"
            )
    return _suite("h2", margins, failures, details)


def _coverage(
    name: str, config: ExperimentConfig, margins: List[float], details: List[str]
) -> Tuple[List[SeedResult], int]:
    results = run_seeds(config)
    report = quantile_check(
        [r.terminal_regret for r in results], [r.terminal_bound for r in results], config.delta
    )
    margins.append(report.threshold - report.exceedance)
    details.append(
        f"{name} coverage: exceedance {report.exceedance:.3f} <= {report.threshold:.3f}"
        f" over {len(results)} seeds"
    )
    return results, int(not report.passed)


def median_regret_curve(results: List[SeedResult], horizons: List[int]) -> np.ndarray:
    """Median over seeds of the regret at each horizon."""
    return np.median([[r.records[t - 1].regret for t in horizons] for r in results], axis=0)


def bounds(n_seeds: int = 20, T: int = 2000, seed: int = 0) -> SuiteResult:
    """Bound calculators at reference values, ONS coverage on AR(2) and ARCH(1), and the log T rate."""
    margins, failures, details = [], 0, []
    references = [
        ("ons T=100", ons_theorem_bound(1.0, 1.0, 1.0, 2, 0.05, 100), 128.35, 0.01),
        ("ons T=1", ons_theorem_bound(1.0, 1.0, 1.0, 1, math.exp(-1.0), 1), 41.556, 0.001),
        ("boa T=100", boa_theorem_bound(1.0, 1.0, 1.0, 1.0 / 8.0, 0.05, 100), 52.10, 0.01),
    ]
    for name, value, expected, tol in references:
        margin = tol - abs(value - expected)
        margins.append(margin)
        failures += margin < 0.0
        details.append(f"{name}: {value:.6g} (reference {expected})")

    seeds = list(range(seed, seed + n_seeds))
    learner = LearnerSpec(weights_snapshot=False)
    results, failed = _coverage(
        "ons", ExperimentConfig(learner=learner, T=T, seeds=seeds), margins, details
    )
    failures += failed
    arch = ArchConfig()
    _, failed = _coverage(
        "arch",
        ExperimentConfig(
            learner=learner,
            forecaster=arch,
            generator=WellSpecifiedARCHSpec(c=arch.c, sigma_bar2=arch.sigma_bar2),
            T=T,
            seeds=seeds,
        ),
        margins,
        details,
    )
    failures += failed

    horizons = sorted({max(T // 2**k, 1) for k in range(RATE_HORIZONS)})
    if len(horizons) >= 3:
        a, b, r2 = log_fit(horizons, median_regret_curve(results, horizons))
        margins.append(r2 - RATE_R2)
        failures += r2 < RATE_R2
        details.append(
            f"ons rate: median regret ~ {a:.4g} + {b:.4g} log T, r^2={r2:.3f} at T={horizons}"
        )
    return _suite("bounds", margins, failures, details)


def adaptation(n_seeds: int = 20, T: int = 2000, grid_size: int = 8, seed: int = 0) -> SuiteResult:
    """BOA-ONS over a gamma grid against every single-gamma ONS of the grid, on AR(2).

    The median terminal regret of the stack must stay within a factor of the
    median best single-gamma regret, and the stack's weight must gather on
    the gammas within a factor 4 of alpha/2.
    """
    margins, failures, details = [], 0, []
    seeds = list(range(seed, seed + n_seeds))
    stack = run_seeds(
        ExperimentConfig(
            learner=LearnerSpec(kind="boa_ons", gamma_grid_size=grid_size), T=T, seeds=seeds
        )
    )
    gammas = make_gamma_grid(grid_size)
    singles = np.array(
        [
            [
                r.terminal_regret
                for r in run_seeds(
                    ExperimentConfig(
                        learner=LearnerSpec(gamma=gamma, weights_snapshot=False), T=T, seeds=seeds
                    )
                )
            ]
            for gamma in gammas
        ]
    )
    stack_regret = float(np.median([r.terminal_regret for r in stack]))
    best_regret = float(np.median(singles.min(axis=0)))
    allowed = ADAPTATION_FACTOR * best_regret
    margins.append(allowed - stack_regret)
    failures += stack_regret > allowed
    details.append(
        f"stack regret {stack_regret:.4g} <= {ADAPTATION_FACTOR:g} x best single gamma {best_regret:.4g}"
    )

    half_alpha = build_forecaster(ArConfig()).alpha / 2.0
    near = np.array([half_alpha / 4.0 <= gamma <= 4.0 * half_alpha for gamma in gammas])
    mass = float(
        np.median([np.sum(np.asarray(r.records[-1].weights_snapshot)[near]) for r in stack])
    )
    margins.append(mass - ADAPTATION_MASS)
    failures += mass <= ADAPTATION_MASS
    details.append(f"weight within a factor 4 of alpha/2={half_alpha:g}: {mass:.3f}")
    return _suite("adaptation", margins, failures, details)


def mixture(n_seeds: int = 20, T: int = 10_000, seed: int = 0) -> SuiteResult:
    """ONS over the localized Gaussian mixture when one component is the truth.

    The regret against the best mixture must stay below the ONS bound for
    most seeds.
    """
    cfg = MixtureConfig()
    truth = mixture_components(cfg)[0]
    results = run_seeds(
        ExperimentConfig(
            forecaster=cfg,
            generator=GaussianIidSpec(mean=truth.mean, variance=truth.variance),
            learner=LearnerSpec(weights_snapshot=False),
            T=T,
            seeds=list(range(seed, seed + n_seeds)),
        )
    )
    within = float(np.mean([not r.exceeded for r in results]))
    worst = max(r.terminal_regret - r.terminal_bound for r in results)
    details = [
        f"{cfg.K} components: regret within the ons bound"
        f" for {within:.2f} of {len(results)} seeds (worst excess {worst:.4g})"
    ]
    return _suite("mixture", [within - MIXTURE_COVERAGE], int(within < MIXTURE_COVERAGE), details)


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "pathwise-ons": pathwise_ons,
    "pathwise-boa": pathwise_boa,
    "gradients": gradients,
    "projections": projections,
    "h2": h2,
    "bounds": bounds,
    "adaptation": adaptation,
    "mixture": mixture,
}


def run_suite(name: str, **sizes) -> SuiteResult:
    """Run one suite by name, or every suite with "all".

    Keyword arguments size the suite; with "all" they map suite names to
    keyword dictionaries, e.g. `run_suite("all", h2={"n_pairs": 1000})`.

    Raises
    ------
    - `ValueError`: If the suite is unknown.
    """
    if name != "all" and name not in SUITES:
        raise ValueError(f"suite should be one of {['all', *SUITES]}, got: {name}")
    publish_event(Event.VerifyStart, id(sizes), {"suite": name})
    if name == "all":
        subs = [suite(**sizes.get(key, {})) for key, suite in SUITES.items()]
        result = SuiteResult(
            suite="all",
            passed=all(sub.passed for sub in subs),
            worst_margin=min(sub.worst_margin for sub in subs),
            details="\n".join(f"{sub.suite}: {'passed' if sub.passed else 'FAILED'}" for sub in subs),
            sub_results=subs,
        )
    else:
        result = SUITES[name](**sizes)
    publish_event(
        Event.VerifyEnd,
        id(sizes),
        {
            "suite": result.suite,
            "passed": result.passed,
            "worst_margin": result.worst_margin,
            "details": result.details,
        },
    )
    return result
