import math
from typing import Optional

import numpy as np
from scipy import linalg

from sococast.core.learner import OnlineLearner
from sococast.geometry.projection import a_norm_project
from sococast.geometry.sets import FeasibleSet
from sococast.schema.pubsub import Event
from sococast.schema.trace import OnsTrace
from sococast.utils.exceptions import ConfigurationError, ContractError, NumericError
from sococast.utils.pubsub import publish_event
from sococast.utils.typechecking import check_open_interval, check_positive


class OnlineNewtonStep(OnlineLearner):
    """Online Newton Step over a convex feasible set.

    Each round the learner receives the gradient g_t at its prediction x_t and
    sets A_t = A_{t-1} + g_t g_t^T, y = x_t - (1/gamma) A_t^{-1} g_t and
    x_{t+1} = argmin_{x in K} ||x - y||_{A_t}. The inverse of A_t is kept up to
    date with the Sherman-Morrison identity and recomputed by a direct solve
    every `refresh_period` rounds.

    Attributes
    ----------
    - `feasible_set` (`FeasibleSet`): The set K.
    - `gamma` (float): The step parameter.
    - `grad_bound` (float): Gradients are rescaled to norm at most G.
    - `x` (np.ndarray): The current iterate.
    - `A` (np.ndarray): A_t = I/(gamma D)^2 + sum of g g^T.
    - `A_inv` (np.ndarray): The maintained inverse of `A`.
    - `clip_count` (int): Number of clipped gradients.
    - `refresh_count` (int): Number of direct inverse refreshes.
    - `trace` (`OnsTrace`, optional): Iterates and gradients, when recorded.
    """

    def __init__(
        self,
        feasible_set: FeasibleSet,
        gamma: float,
        grad_bound: float,
        x1: Optional[np.ndarray] = None,
        refresh_period: int = 1000,
        record_trace: bool = False,
    ) -> None:
        """Constructor for the `OnlineNewtonStep` class.

        Parameters
        ----------
        - `feasible_set` (`FeasibleSet`): The set K.
        - `gamma` (float): The step parameter (alpha/2 for the high-probability bound).
        - `grad_bound` (float): The gradient bound G.
        - `x1` (np.ndarray, optional): The initial prediction. Defaults to the center of K.
        - `refresh_period` (int, optional): Rounds between direct inverse recomputations. Defaults to 1000.
        - `record_trace` (bool, optional): Keep every iterate and gradient. Defaults to False.

        Raises
        ------
        - `ContractError`: If `x1` lies outside K or a parameter is not positive.
        """
        super().__init__(feasible_set.dim, feasible_set.dim)
        check_positive(gamma, "gamma")
        check_positive(grad_bound, "grad_bound")
        check_positive(refresh_period, "refresh_period")
        self.feasible_set = feasible_set
        self.gamma = gamma
        self.grad_bound = grad_bound
        self.refresh_period = refresh_period
        self.diameter = feasible_set.diameter()

        x1 = feasible_set.center() if x1 is None else np.asarray(x1, dtype=float)
        if not feasible_set.contains(x1):
            raise ContractError(f"Var: x1 should lie in the feasible set, got: {x1}")
        self.x = x1.copy()

        scale = (gamma * self.diameter) ** 2
        self.A = np.eye(self.dim) / scale
        self.A_inv = np.eye(self.dim) * scale
        self.clip_count = 0
        self.refresh_count = 0
        self.trace = (
            OnsTrace(gamma=gamma, grad_bound=grad_bound, diameter=self.diameter)
            if record_trace
            else None
        )

    def _predict(self) -> np.ndarray:
        return self.x

    def _clip(self, grad: np.ndarray) -> np.ndarray:
        norm = float(np.linalg.norm(grad))
        if norm <= self.grad_bound:
            return grad
        self.clip_count += 1
        if self.clip_count == 1:
            publish_event(
                Event.ClipEvent,
                id(self),
                {"norm": norm, "bound": self.grad_bound, "t": self.t + 1},
            )
        return grad * (self.grad_bound / norm)

    def _refresh_inverse(self, t: int) -> None:
        drift = float(np.max(np.abs(self.A @ self.A_inv - np.eye(self.dim))))
        self.A_inv = linalg.solve(self.A, np.eye(self.dim), assume_a="pos")
        self.refresh_count += 1
        publish_event(Event.InverseRefresh, id(self), {"t": t, "drift": drift})

    def _step(self, grad: np.ndarray) -> None:
        grad = self._clip(grad)
        if self.trace is not None:
            self.trace.iterates.append(self.x.copy())
            self.trace.grads.append(grad.copy())

        t = self.t + 1
        Ag = self.A_inv @ grad
        self.A += np.outer(grad, grad)
        self.A_inv -= np.outer(Ag, Ag) / (1.0 + grad @ Ag)
        if t % self.refresh_period == 0:
            self._refresh_inverse(t)

        y = self.x - (self.A_inv @ grad) / self.gamma
        try:
            self.x = a_norm_project(self.feasible_set, y, self.A)
        except NumericError as e:
            raise e.at_round(t) from e

    def inverse_drift(self) -> float:
        return float(np.max(np.abs(self.A @ self.A_inv - np.eye(self.dim))))


def ons_pathwise_bound(gamma: float, G: float, D: float, d: int, T: int) -> float:
    """Right-hand side constant of the deterministic ONS inequality

    sum_t g_t^T (x_t - x) - (gamma/2) sum_t (g_t^T (x_t - x))^2
        <= (d / (2 gamma)) log(1 + T (gamma G D)^2) + 1 / (2 gamma).
    """
    return d / (2.0 * gamma) * math.log1p(T * (gamma * G * D) ** 2) + 1.0 / (2.0 * gamma)


def ons_theorem_bound(
    alpha: float, G: float, D: float, d: int, delta: float, T: int
) -> float:
    """High-probability stochastic regret bound of ONS run with gamma = alpha/2.

    Holds with probability 1 - 2 delta.
    """
    check_positive(alpha, "alpha")
    check_positive(G, "G")
    check_positive(D, "D")
    check_positive(d, "d")
    check_positive(T, "T")
    check_open_interval(delta, 0.0, 1.0, "delta")
    GD2 = (G * D) ** 2
    return (1.0 + d * math.log1p(T * alpha**2 * GD2 / 4.0)) / alpha + (
        alpha * GD2 / 3.0 + 40.0 / alpha
    ) * math.log(1.0 / delta)


def ons_gamma_bound(
    alpha: float, gamma: float, G: float, D: float, d: int, delta: float, T: int
) -> float:
    """High-probability stochastic regret bound of ONS for a general gamma < alpha/(e-1).

    Raises
    ------
    - `ConfigurationError`: If gamma is not in (0, alpha/(e-1)).
    """
    check_positive(alpha, "alpha")
    check_open_interval(delta, 0.0, 1.0, "delta")
    if not 0.0 < gamma < alpha / (math.e - 1.0):
        raise ConfigurationError(
            f"Var: gamma should lie in (0, alpha/(e-1)) = (0, {alpha / (math.e - 1.0)}), got: {gamma}"
        )
    GD2 = (G * D) ** 2
    deviation = (alpha + gamma) * GD2 / (2.0 * math.e) + 2.0 * math.e / (
        alpha + (1.0 - math.e) * gamma
    )
    return ons_pathwise_bound(gamma, G, D, d, T) + deviation * math.log(1.0 / delta)
