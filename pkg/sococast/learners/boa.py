import math
from typing import Optional

import numpy as np
from scipy.special import softmax

from sococast.core.learner import OnlineLearner
from sococast.schema.pubsub import Event
from sococast.schema.trace import BoaTrace
from sococast.utils.exceptions import ContractError
from sococast.utils.pubsub import publish_event
from sococast.utils.typechecking import check_finite, check_open_interval, check_positive

PRIOR_TOL = 1e-12


class BernsteinOnlineAggregation(OnlineLearner):
    """Bernstein Online Aggregation of K experts with per-expert learning rates.

    The feedback of a round is the vector of expert losses. With m = pi_t^T l_t
    and deviations d = l_t - m, the learner accumulates
    L_i += d_i + eta_i d_i^2 and V_i += d_i^2, sets
    eta_i = min(sqrt(log(1/pi_1,i) / V_i), 1/(2R)) and weights
    pi_{t+1,i} proportional to eta_i pi_1,i exp(-eta_i L_i).

    Attributes
    ----------
    - `prior` (np.ndarray): The initial weights pi_1.
    - `range_bound` (float): R, the bound on |loss|; larger losses are clamped.
    - `weights` (np.ndarray): The current weights pi_t.
    - `cum_loss` (np.ndarray): The adjusted cumulative losses L.
    - `sq_sums` (np.ndarray): The sums of squared deviations V.
    - `eta` (np.ndarray): The current learning rates.
    - `clamp_count` (int): Number of rounds with clamped losses.
    """

    def __init__(
        self, prior: np.ndarray, range_bound: float, record_trace: bool = False
    ) -> None:
        """Constructor for the `BernsteinOnlineAggregation` class.

        Raises
        ------
        - `ContractError`: If the prior has a non-positive entry or does not sum to 1.
        """
        prior = np.asarray(prior, dtype=float)
        if prior.ndim != 1 or prior.shape[0] == 0:
            raise ContractError(f"Var: prior should be a non-empty vector, got: {prior}")
        super().__init__(prior.shape[0], prior.shape[0])
        check_finite(prior, "prior")
        if np.any(prior <= 0.0):
            raise ContractError(f"Var: prior should be strictly positive, got: {prior}")
        if abs(prior.sum() - 1.0) > PRIOR_TOL:
            raise ContractError(f"Var: prior should sum to 1, got: {prior.sum()}")
        check_positive(range_bound, "range_bound")

        self.prior = prior.copy()
        self.log_prior = np.log(prior)
        self.range_bound = range_bound
        self.eta_cap = 1.0 / (2.0 * range_bound)
        self.weights = prior.copy()
        self.cum_loss = np.zeros(self.dim)
        self.sq_sums = np.zeros(self.dim)
        self.eta = np.full(self.dim, self.eta_cap)
        self.clamp_count = 0
        self.trace = (
            BoaTrace(prior=self.prior.copy(), range_bound=range_bound)
            if record_trace
            else None
        )

    @property
    def n_experts(self) -> int:
        return self.dim

    def _predict(self) -> np.ndarray:
        return self.weights

    def _clamp(self, losses: np.ndarray) -> np.ndarray:
        peak = float(np.max(np.abs(losses)))
        if peak <= self.range_bound:
            return losses
        self.clamp_count += 1
        if self.clamp_count == 1:
            publish_event(
                Event.ClampEvent,
                id(self),
                {"what": "expert loss", "t": self.t + 1, "value": peak},
            )
        return np.clip(losses, -self.range_bound, self.range_bound)

    def _step(self, losses: np.ndarray) -> None:
        losses = self._clamp(losses)
        if self.trace is not None:
            self.trace.weights.append(self.weights.copy())
            self.trace.losses.append(losses.copy())

        deviation = losses - self.weights @ losses
        self.cum_loss += deviation + self.eta * deviation**2
        self.sq_sums += deviation**2
        with np.errstate(divide="ignore", invalid="ignore"):
            rate = np.sqrt(-self.log_prior / self.sq_sums)
        self.eta = np.where(
            self.sq_sums > 0.0, np.minimum(rate, self.eta_cap), self.eta_cap
        )
        with np.errstate(divide="ignore"):
            logits = np.log(self.eta) + self.log_prior - self.eta * self.cum_loss
        self.weights = softmax(logits)


def _log_log_ratio(prior_i: float, T: int) -> float:
    return math.log(math.log(T) / prior_i)


def boa_pathwise_bound(sq_sum_i: float, prior_i: float, range_bound: float, T: int) -> float:
    """Deterministic regret bound of BOA against expert i after T >= 4 rounds:

    sqrt(log(log T / pi_i) V_i) + R (5 + 2 log(log T / pi_i)).
    """
    if T < 4:
        raise ContractError(f"Var: T should be at least 4, got: {T}")
    ratio = _log_log_ratio(prior_i, T)
    return math.sqrt(ratio * sq_sum_i) + range_bound * (5.0 + 2.0 * ratio)


def boa_theorem_bound(
    alpha: float,
    G: float,
    D: float,
    prior_min: float,
    delta: float,
    T: int,
    n_experts: Optional[int] = None,
) -> float:
    """High-probability stochastic regret bound of BOA (probability 1 - 2 delta, T >= 4).

    Parameters
    ----------
    - `prior_min` (float): The prior weight of the comparator expert.
    - `n_experts` (int, optional): Number of experts; a single expert may have prior 1.

    Raises
    ------
    - `ContractError`: If T < 4 or the prior weight is out of range.
    """
    check_positive(alpha, "alpha")
    check_open_interval(delta, 0.0, 1.0, "delta")
    if T < 4:
        raise ContractError(f"Var: T should be at least 4, got: {T}")
    if not (n_experts == 1 and prior_min == 1.0):
        check_open_interval(prior_min, 0.0, 1.0, "prior_min")
    GD = G * D
    return (
        2.0 * (2.0 / alpha + GD) * _log_log_ratio(prior_min, T)
        + 5.0 * GD
        + (alpha * GD**2 / 2.0 + 8.0 / alpha) * math.log(1.0 / delta)
    )
