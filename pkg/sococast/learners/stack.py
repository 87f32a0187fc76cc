"""BOA-ONS: Bernstein aggregation over a bank of online experts.

Every expert predicts in its own feasible set, embedded in a common ambient
space by zero-padding. The aggregate prediction is the weighted average of the
embedded expert predictions. The aggregation layer is fed the centered
linearized losses g^T (x_i - x_hat) where g is the gradient at the aggregate,
and every expert is advanced with the gradient at its own prediction.
"""
import math
from collections import defaultdict
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.special import softmax

from sococast.core.learner import OnlineLearner
from sococast.geometry.sets import FeasibleSet
from sococast.learners.boa import BernsteinOnlineAggregation
from sococast.learners.ons import OnlineNewtonStep
from sococast.schema.pubsub import Event
from sococast.utils.exceptions import ContractError
from sococast.utils.pubsub import publish_event
from sococast.utils.typechecking import (
    check_dim,
    check_min_val,
    check_open_interval,
    check_positive,
)


class ExpertLabel(BaseModel):
    """Metadata of one expert of a bank.

    Attributes
    ----------
    - `name` (str): Unique name of the expert.
    - `gamma` (float, optional): The ONS step parameter of the expert.
    - `p` (int, optional): The mean model order of the expert.
    - `q` (int, optional): The variance model order of the expert.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    gamma: Optional[float] = None
    p: Optional[int] = None
    q: Optional[int] = None


class FixedExpert(OnlineLearner):
    """An expert that always predicts the same point."""

    def __init__(self, point: np.ndarray) -> None:
        point = np.asarray(point, dtype=float)
        super().__init__(point.shape[0], point.shape[0])
        self.point = point.copy()

    def _predict(self) -> np.ndarray:
        return self.point

    def _step(self, feedback: np.ndarray) -> None:
        pass


class ComparatorLearner(FixedExpert):
    """Oracle replay: predicts the offline comparator every round, so its regret is zero."""


class ExpertBank:
    """A list of online experts embedded in a common ambient space.

    Attributes
    ----------
    - `experts` (List[`OnlineLearner`]): The experts.
    - `labels` (List[`ExpertLabel`]): Unique metadata per expert.
    - `indices` (List[np.ndarray]): Ambient coordinates occupied by each expert.
    - `ambient_dim` (int): Dimension of the common prediction space.
    - `grad_bound` (float): G of the ambient problem.
    - `diameter` (float): D of the ambient prediction set.
    """

    def __init__(
        self,
        experts: Sequence[OnlineLearner],
        labels: Sequence[ExpertLabel],
        grad_bound: float,
        diameter: float,
        indices: Optional[Sequence[np.ndarray]] = None,
        ambient_dim: Optional[int] = None,
    ) -> None:
        """Constructor for the `ExpertBank` class.

        Parameters
        ----------
        - `indices` (List[np.ndarray], optional): Defaults to the identity embedding for every expert.
        - `ambient_dim` (int, optional): Defaults to the largest expert dimension.

        Raises
        ------
        - `ContractError`: If the bank is empty, labels are not unique or an embedding does not fit.
        """
        check_min_val(len(experts), 1, "len(experts)")
        if len(labels) != len(experts):
            raise ContractError(
                f"Var: labels should have one entry per expert, got: {len(labels)} for {len(experts)}"
            )
        if len({label.name for label in labels}) != len(labels):
            raise ContractError("Var: expert labels should be unique")
        check_positive(grad_bound, "grad_bound")
        check_positive(diameter, "diameter")
        if ambient_dim is None:
            ambient_dim = max(expert.dim for expert in experts)
        if indices is None:
            indices = [np.arange(expert.dim) for expert in experts]
        for expert, index in zip(experts, indices):
            if len(index) != expert.dim or (len(index) and max(index) >= ambient_dim):
                raise ContractError(
                    f"Var: embedding {list(index)} does not fit an expert of dimension {expert.dim}"
                    f" in ambient dimension {ambient_dim}"
                )
        self.experts = list(experts)
        self.labels = list(labels)
        self.indices = [np.asarray(index, dtype=int) for index in indices]
        self.ambient_dim = ambient_dim
        self.grad_bound = grad_bound
        self.diameter = diameter

    def __len__(self) -> int:
        return len(self.experts)

    def embed(self, i: int, x: np.ndarray) -> np.ndarray:
        z = np.zeros(self.ambient_dim)
        z[self.indices[i]] = x
        return z

    def predictions(self) -> np.ndarray:
        """Embedded expert predictions, one row per expert."""
        return np.array(
            [self.embed(i, expert.predict()) for i, expert in enumerate(self.experts)]
        )

    @classmethod
    def from_gamma_grid(
        cls,
        feasible_set: FeasibleSet,
        gammas: Sequence[float],
        grad_bound: float,
        refresh_period: int = 1000,
        record_trace: bool = False,
    ) -> "ExpertBank":
        """ONS experts on one feasible set, one per step parameter."""
        experts = [
            OnlineNewtonStep(
                feasible_set,
                gamma,
                grad_bound,
                refresh_period=refresh_period,
                record_trace=record_trace,
            )
            for gamma in gammas
        ]
        labels = [ExpertLabel(name=f"ons_gamma={gamma:g}", gamma=gamma) for gamma in gammas]
        return cls(experts, labels, grad_bound, feasible_set.diameter())

    @classmethod
    def from_fixed_points(
        cls, points: Sequence[np.ndarray], grad_bound: float, diameter: float
    ) -> "ExpertBank":
        experts = [FixedExpert(point) for point in points]
        labels = [ExpertLabel(name=f"fixed_{i}") for i in range(len(points))]
        return cls(experts, labels, grad_bound, diameter)


class BoaOnsStack(OnlineLearner):
    """BOA aggregation over an `ExpertBank`.

    Attributes
    ----------
    - `bank` (`ExpertBank`): The experts.
    - `aggregator` (`BernsteinOnlineAggregation`): The weighting layer, with range bound G*D.
    """

    def __init__(
        self,
        bank: ExpertBank,
        prior: Optional[np.ndarray] = None,
        record_trace: bool = False,
    ) -> None:
        """Constructor for the `BoaOnsStack` class.

        Parameters
        ----------
        - `bank` (`ExpertBank`): The experts.
        - `prior` (np.ndarray, optional): Initial weights. Defaults to uniform.
        - `record_trace` (bool, optional): Record the aggregation trace. Defaults to False.
        """
        super().__init__(bank.ambient_dim, bank.ambient_dim)
        if prior is None:
            prior = np.full(len(bank), 1.0 / len(bank))
        self.bank = bank
        self.aggregator = BernsteinOnlineAggregation(
            prior, bank.grad_bound * bank.diameter, record_trace=record_trace
        )
        self._last_surrogates = np.zeros(len(bank))
        self._clip_count = 0

    @property
    def weights(self) -> np.ndarray:
        return self.aggregator.predict()

    @property
    def clip_count(self) -> int:
        experts = sum(getattr(expert, "clip_count", 0) for expert in self.bank.experts)
        return experts + self._clip_count

    @property
    def clamp_count(self) -> int:
        return self.aggregator.clamp_count

    def _predict(self) -> np.ndarray:
        return self.weights @ self.bank.predictions()

    def surrogate_losses(self, grad: np.ndarray) -> np.ndarray:
        """Centered linearized losses g^T (x_i - x_hat) of the experts."""
        predictions = self.bank.predictions()
        aggregate = self.weights @ predictions
        return (predictions - aggregate) @ grad

    def _advance(self, grad: np.ndarray, expert_grads: Sequence[np.ndarray]) -> None:
        norm = float(np.linalg.norm(grad))
        if norm > self.bank.grad_bound:
            self._clip_count += 1
            if self._clip_count == 1:
                publish_event(
                    Event.ClipEvent,
                    id(self),
                    {"norm": norm, "bound": self.bank.grad_bound, "t": self.t + 1},
                )
            grad = grad * (self.bank.grad_bound / norm)
        surrogates = self.surrogate_losses(grad)
        self._last_surrogates = surrogates
        for expert, expert_grad in zip(self.bank.experts, expert_grads):
            expert.step(expert_grad)
        self.aggregator.step(surrogates)

    def _step(self, grad: np.ndarray) -> None:
        # without an oracle every expert receives the gradient at the aggregate
        self._advance(grad, [grad[index] for index in self.bank.indices])

    def observe(self, oracle: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Play one round: query `oracle` at the aggregate and at every expert prediction."""
        x_hat = self.predict()
        grad = np.asarray(oracle(x_hat), dtype=float)
        check_dim(grad, self.dim, "grad")
        expert_grads = []
        for i, expert in enumerate(self.bank.experts):
            ambient = np.asarray(oracle(self.bank.embed(i, expert.predict())), dtype=float)
            expert_grads.append(ambient[self.bank.indices[i]])
        self._advance(grad, expert_grads)
        self.t += 1
        return x_hat

    def weights_by_label(self, key: str = "name") -> Dict[object, float]:
        """Weight mass aggregated by one label field ("name", "gamma", "p" or "q")."""
        if key not in ExpertLabel.model_fields:
            raise ValueError(f"key should be one of {list(ExpertLabel.model_fields)}, got: {key}")
        mass: Dict[object, float] = defaultdict(float)
        for label, weight in zip(self.bank.labels, self.weights):
            mass[getattr(label, key)] += float(weight)
        return dict(mass)


def make_gamma_grid(K: int) -> List[float]:
    """The step parameters (2^-1, ..., 2^-K)."""
    check_min_val(K, 1, "K")
    return [2.0 ** (-i) for i in range(1, K + 1)]


def make_order_prior(T: int, max_order: int) -> np.ndarray:
    """Weights proportional to (T^-1, ..., T^-max_order), computed in log domain.

    Raises
    ------
    - `ContractError`: If T < 2, where the weights would not decrease with the order.
    """
    check_min_val(max_order, 1, "max_order")
    check_min_val(T, 2, "T")
    orders = np.arange(1, max_order + 1)
    return softmax(-orders * math.log(T))


def make_joint_order_prior(T: int, max_p: int, max_q: int) -> np.ndarray:
    """Weights over (p, q) pairs proportional to T^-(p+q), p-major order."""
    check_min_val(max_p, 1, "max_p")
    check_min_val(max_q, 1, "max_q")
    check_min_val(T, 2, "T")
    p, q = np.meshgrid(np.arange(1, max_p + 1), np.arange(1, max_q + 1), indexing="ij")
    return softmax(-(p + q).ravel() * math.log(T))


def default_max_order(T: int) -> int:
    """Largest order of the 1 <= p <= log T grid."""
    check_positive(T, "T")
    return max(math.ceil(math.log(T)), 1)


def stack_theorem_bound(
    alpha: float, G: float, D: float, d: int, K: int, delta: float, T: int
) -> float:
    """High-probability bound of BOA-ONS over the grid (2^-1, ..., 2^-K) (probability 1 - 4 delta).

    Raises
    ------
    - `ContractError`: If T < 4 or alpha < 2^(-K-2).
    """
    check_positive(alpha, "alpha")
    check_open_interval(delta, 0.0, 1.0, "delta")
    if T < 4:
        raise ContractError(f"Var: T should be at least 4, got: {T}")
    if alpha < 2.0 ** (-K - 2):
        raise ContractError(
            f"Var: alpha should be at least 2^-(K+2) = {2.0 ** (-K - 2)}, got: {alpha}"
        )
    a = max(2.0 / alpha, 1.0)
    GD = G * D
    return (
        a * (1.0 + d * math.log1p(T * (alpha * GD) ** 2 / 4.0))
        + 2.0 * (a + GD) * math.log(K * math.log(T))
        + 5.0 * GD
        + (alpha * GD**2 + 44.0 * a) * math.log(1.0 / delta)
    )
