"""Checks of the regret inequalities and of (H2) along simulated paths.

Nothing here feeds back into a learner; the functions only read traces,
laws and forecasters and report margins.
"""
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from sococast.core.forecaster import H2_MOMENTS, Forecaster
from sococast.core.generator import make_rng
from sococast.geometry.sets import FeasibleSet
from sococast.schema.forecast import ConditionalLaw, as_law_path
from sococast.schema.pubsub import Event
from sococast.schema.trace import (
    BoaTrace,
    H2Report,
    OnsTrace,
    PathwiseReport,
    QuantileReport,
    SurrogateDecompositionRecord,
)
from sococast.utils.pubsub import publish_event
from sococast.utils.typechecking import check_min_val, check_open_interval, check_positive

PATHWISE_TOL = 1e-9
H2_TOL = 1e-10
QUANTILE_SLACK = 0.05


def check_h2_empirical(
    laws: Sequence[ConditionalLaw],
    forecaster: Forecaster,
    feasible_set: Optional[FeasibleSet],
    alpha: float,
    n_pairs: int,
    design: np.ndarray,
    seed: int = 0,
    moment: str = "conditional",
    vertex_prob: float = 0.5,
    tol: float = H2_TOL,
    batch_size: int = 10000,
) -> H2Report:
    """Count the random (a, b, t) triples at which (H2) fails.

    The margin L_t(a) - L_t(b) + grad L_t(a)^T (b - a) + alpha/2 E_{t-1}[(grad l_t(a)^T (b - a))^2]
    is evaluated for `n_pairs` pairs sampled from the feasible set (vertices
    with probability `vertex_prob`) and rounds t drawn uniformly. A violation
    is a margin above `tol`.

    Parameters
    ----------
    - `design` (np.ndarray): Features of every round, `forecaster.design(samples)`.
    - `moment` (str): "conditional" or "risk", see `Forecaster.h2_margins`.
    """
    check_positive(alpha, "alpha")
    check_min_val(n_pairs, 1, "n_pairs")
    if moment not in H2_MOMENTS:
        raise ValueError(f"moment should be one of {H2_MOMENTS}, got: {moment}")
    laws = as_law_path(laws)
    feasible_set = feasible_set or forecaster.feasible_set
    rng = make_rng(seed)
    violations, worst = 0, -math.inf
    done = 0
    while done < n_pairs:
        n = min(batch_size, n_pairs - done)
        at = feasible_set.sample(rng, n, vertex_prob=vertex_prob)
        other = feasible_set.sample(rng, n, vertex_prob=vertex_prob)
        rounds = rng.integers(0, len(laws), size=n)
        margins = forecaster.h2_margins(at, other, design[rounds], laws[rounds], alpha, moment)
        violations += int(np.sum(margins > tol))
        worst = max(worst, float(np.max(margins)))
        done += n
    return H2Report(
        n_pairs=n_pairs, violations=violations, worst_margin=worst, alpha=alpha, moment=moment
    )


def _comparators(
    comparators: Optional[np.ndarray],
    feasible_set: Optional[FeasibleSet],
    n_comparators: int,
    seed: int,
) -> np.ndarray:
    if comparators is not None:
        return np.atleast_2d(np.asarray(comparators, dtype=float))
    if feasible_set is None:
        raise ValueError("either comparators or feasible_set must be given")
    return feasible_set.sample(make_rng(seed), n_comparators, vertex_prob=0.5)


def ons_pathwise_slacks(trace: OnsTrace, comparator: np.ndarray) -> np.ndarray:
    """Right minus left side of the ONS inequality at every prefix length T.

    sum_t g_t^T (x_t - x) <= gamma/2 sum_t (g_t^T (x_t - x))^2
    + d/(2 gamma) log(1 + T (gamma G D)^2) + 1/(2 gamma).
    """
    X, grads = trace.arrays()
    gamma, GD = trace.gamma, trace.grad_bound * trace.diameter
    r = np.einsum("tk,tk->t", grads, X - comparator)
    T = np.arange(1, X.shape[0] + 1)
    constant = trace.dim / (2.0 * gamma) * np.log1p(T * (gamma * GD) ** 2) + 1.0 / (2.0 * gamma)
    return 0.5 * gamma * np.cumsum(r**2) + constant - np.cumsum(r)


def boa_pathwise_slacks(trace: BoaTrace) -> np.ndarray:
    """Right minus left side of the BOA bound, one column per expert, rows T = 4, 5, ...

    sum_t pi_t^T l_t - sum_t l_{t,i} <= sqrt(log(log T / pi_i) V_i) + R (5 + 2 log(log T / pi_i)).
    """
    W, L = trace.arrays()
    mixed = np.einsum("tk,tk->t", W, L)
    excess = mixed[:, None] - L
    T = np.arange(1, W.shape[0] + 1)[3:, None]
    ratio = np.log(np.log(T) / trace.prior[None, :])
    V = np.cumsum(excess**2, axis=0)[3:]
    bound = np.sqrt(ratio * V) + trace.range_bound * (5.0 + 2.0 * ratio)
    return bound - np.cumsum(excess, axis=0)[3:]


def check_pathwise_bounds(
    trace,
    comparators: Optional[np.ndarray] = None,
    feasible_set: Optional[FeasibleSet] = None,
    n_comparators: int = 10,
    seed: int = 0,
    tol: float = PATHWISE_TOL,
) -> PathwiseReport:
    """Evaluate the deterministic ONS or BOA inequality at every prefix of a trace.

    ONS traces are checked against `comparators` (or `n_comparators` points
    sampled from `feasible_set`); BOA traces against every expert, for T >= 4.
    A violation is a slack below -tol (1 + |left side|).
    """
    if isinstance(trace, OnsTrace):
        kind, slacks, scales = "ons", [], []
        X, grads = trace.arrays()
        for x in _comparators(comparators, feasible_set, n_comparators, seed):
            slacks.append(ons_pathwise_slacks(trace, x))
            scales.append(np.abs(np.cumsum(np.einsum("tk,tk->t", grads, X - x))))
        slack, scale = np.concatenate(slacks), np.concatenate(scales)
    elif isinstance(trace, BoaTrace):
        kind = "boa"
        slack = boa_pathwise_slacks(trace).ravel()
        W, L = trace.arrays()
        excess = np.einsum("tk,tk->t", W, L)[:, None] - L
        scale = np.abs(np.cumsum(excess, axis=0)[3:]).ravel()
    else:
        raise TypeError(f"trace should be an OnsTrace or a BoaTrace, got: {type(trace)}")
    if slack.size == 0:
        return PathwiseReport(kind=kind, checked=0, violations=0, worst_slack=math.inf)
    return PathwiseReport(
        kind=kind,
        checked=int(slack.size),
        violations=int(np.sum(slack < -tol * (1.0 + scale))),
        worst_slack=float(np.min(slack)),
    )


def surrogate_decomposition(
    trace: OnsTrace,
    comparator: np.ndarray,
    lam: float,
    alpha: float,
    forecaster: Forecaster,
    design: np.ndarray,
    laws: Sequence[ConditionalLaw],
    every: int = 1,
) -> List[SurrogateDecompositionRecord]:
    """Split the true-risk regret of an ONS run against a fixed comparator.

    With u_t = x_t - x the terms are the linear term sum g_t^T u_t, the
    quadratic term lam/2 sum (g_t^T u_t)^2 and the conditional term
    (lam - alpha)/2 sum E_{t-1}[(grad l_t(x_t)^T u_t)^2]. `linear - quadratic`
    is the surrogate regret controlled by ONS run with gamma = lam; the
    remaining gap to the regret is a martingale plus the conditional term.
    `expected_bound` is sum grad L_t(x_t)^T u_t - alpha/2 sum E_{t-1}[(grad l_t(x_t)^T u_t)^2],
    which dominates the regret whenever (H2) holds at every round.

    Records are produced every `every` rounds and at the last round; the last
    record is published as a `SurrogateDecomposition` event.
    """
    check_positive(lam, "lam")
    check_positive(alpha, "alpha")
    laws = as_law_path(laws)
    X, grads = trace.arrays()
    T = X.shape[0]
    U = X - comparator
    observed = np.einsum("tk,tk->t", grads, U)
    risk_slope = np.einsum("tk,tk->t", forecaster.risk_grads(X, design[:T], laws[:T]), U)
    second = forecaster.grad_second_moments(X, U, design[:T], laws[:T])
    regret = forecaster.risks(X, design[:T], laws[:T]) - forecaster.risks(
        forecaster._rows(comparator, T), design[:T], laws[:T]
    )
    linear = np.cumsum(observed)
    quadratic = 0.5 * lam * np.cumsum(observed**2)
    conditional = 0.5 * (lam - alpha) * np.cumsum(second)
    expected = np.cumsum(risk_slope) - 0.5 * alpha * np.cumsum(second)
    cum_regret = np.cumsum(regret)
    rounds = sorted(set(range(every - 1, T, every)) | {T - 1})
    records = [
        SurrogateDecompositionRecord(
            t=t + 1,
            regret=float(cum_regret[t]),
            linear=float(linear[t]),
            quadratic=float(quadratic[t]),
            conditional=float(conditional[t]),
            expected_bound=float(expected[t]),
            slack=float(expected[t] - cum_regret[t]),
        )
        for t in rounds
    ]
    publish_event(Event.SurrogateDecomposition, id(trace), records[-1].model_dump())
    return records


def quantile_check(
    terminal_regrets: Sequence[float],
    bounds: Sequence[float],
    delta: float,
    slack: float = QUANTILE_SLACK,
) -> QuantileReport:
    """Fraction of seeds whose terminal regret exceeds its bound, against 2 delta + slack.

    Seeds whose bound is NaN are left out.
    """
    check_open_interval(delta, 0.0, 1.0, "delta")
    regrets = np.asarray(terminal_regrets, dtype=float)
    bounds = np.asarray(bounds, dtype=float)
    finite = np.isfinite(bounds)
    exceedance = float(np.mean(regrets[finite] > bounds[finite])) if np.any(finite) else 0.0
    threshold = 2.0 * delta + slack
    return QuantileReport(exceedance=exceedance, threshold=threshold, passed=exceedance <= threshold)


def log_fit(Ts: Sequence[float], regrets: Sequence[float]) -> Tuple[float, float, float]:
    """Least-squares fit regret = a + b log T; returns (a, b, r^2)."""
    log_T = np.log(np.asarray(Ts, dtype=float))
    y = np.asarray(regrets, dtype=float)
    slope, intercept = np.polyfit(log_T, y, 1)
    ss_res = float(np.sum((y - (intercept + slope * log_T)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return float(intercept), float(slope), r2
