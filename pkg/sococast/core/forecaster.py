from abc import ABC, abstractmethod
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np

from sococast.geometry.sets import FeasibleSet
from sococast.schema.forecast import ConditionalLaw, GaussianForecast, MixtureForecast
from sococast.utils.typechecking import check_dim, check_finite, check_params, check_type

H2_MOMENTS = ("conditional", "risk")


class LossGrad(NamedTuple):
    loss: float
    grad: np.ndarray


class Forecaster(ABC):
    """Abstract class for the loss oracle of a parametric forecaster family.

    A forecaster maps a parameter x of its feasible set and the features of the
    past to a predictive distribution. Learners consume the observable loss of
    that distribution at the realized observation; the simulation harness
    evaluates the true risk (a KL divergence) with the known conditional law.

    Methods
    -------
    - `features` (abstract): Features of a history, as used by one round.
    - `design` (abstract): Features of every round of a sample path, one row per round.
    - `_loss_grad` (abstract): Implement this method to return the observable loss and its gradient.
    - `forecast` (abstract): The predictive distribution at a parameter.
    - `risks`, `risk_grads`, `grad_second_moments` (abstract): Row-wise true risk quantities.
    - `__call__` : Validates the inputs and internally calls the `_loss_grad` method.
    - `oracle` : The per-round gradient oracle consumed by learners.

    Attributes
    ----------
    - `feasible_set` (`FeasibleSet`): The parameter set K.
    - `alpha` (float): The stochastic exp-concavity constant of the risk.
    - `grad_bound` (float): The gradient bound G used for clipping.
    - `warmup` (int): Number of initial rounds with zero-padded features.
    """

    def __init__(
        self,
        feasible_set: FeasibleSet,
        alpha: float,
        grad_bound: float,
        warmup: int = 0,
    ) -> None:
        """Constructor for the `Forecaster` class.

        Raises
        ------
        - `DefinitionError`: If the `_loss_grad` signature is not `(self, x, features, y)`.
        """
        check_params(self._loss_grad, ["self", "x", "features", "y"])
        self.feasible_set = feasible_set
        self.alpha = alpha
        self.grad_bound = grad_bound
        self.warmup = warmup

    @property
    def dim(self) -> int:
        return self.feasible_set.dim

    @property
    def diameter(self) -> float:
        return self.feasible_set.diameter()

    @abstractmethod
    def features(self, history: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def design(self, samples: np.ndarray) -> np.ndarray:
        """Row t holds `features(samples[:t])`."""
        raise NotImplementedError

    @abstractmethod
    def _loss_grad(self, x: np.ndarray, features: np.ndarray, y: float) -> LossGrad:
        """Observable loss at the observation `y` and its gradient in `x`.
        Do not use this method directly. Use `__call__` instead.
        """
        raise NotImplementedError

    @abstractmethod
    def forecast(
        self, x: np.ndarray, features: np.ndarray
    ) -> Union[GaussianForecast, MixtureForecast]:
        raise NotImplementedError

    @abstractmethod
    def risks(
        self, X: np.ndarray, design: np.ndarray, laws: Sequence[ConditionalLaw]
    ) -> np.ndarray:
        """KL(P_t, forecast(X[t], design[t])) for every round t."""
        raise NotImplementedError

    @abstractmethod
    def risk_grads(
        self, X: np.ndarray, design: np.ndarray, laws: Sequence[ConditionalLaw]
    ) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def grad_second_moments(
        self,
        X: np.ndarray,
        U: np.ndarray,
        design: np.ndarray,
        laws: Sequence[ConditionalLaw],
    ) -> np.ndarray:
        """E_{t-1}[(grad loss(X[t])^T U[t])^2] under each law."""
        raise NotImplementedError

    def __call__(self, x: np.ndarray, features: np.ndarray, y: float) -> LossGrad:
        """Evaluate the observable loss and gradient.

        Raises
        ------
        - `ContractError`: If `x` has the wrong dimension or the gradient is not finite.
        - `TypeError`: If `_loss_grad` does not return a (loss, grad) pair.
        """
        try:
            _ = self.feasible_set
        except AttributeError as e:
            raise NotImplementedError(
                "Please call `Forecaster` init method from your subclass init method"
            ) from e
        x = np.asarray(x, dtype=float)
        check_dim(x, self.dim, "x")
        output = self._loss_grad(x, features, y)
        check_type(output, tuple, self._loss_grad, "output")
        loss, grad = float(output[0]), np.asarray(output[1], dtype=float)
        check_dim(grad, self.dim, "grad")
        check_finite(grad, "grad")
        return LossGrad(loss, grad)

    def oracle(self, features: np.ndarray, y: float) -> Callable[[np.ndarray], np.ndarray]:
        def _oracle(x: np.ndarray) -> np.ndarray:
            return self(x, features, y).grad

        return _oracle

    def _rows(self, x: np.ndarray, n: int) -> np.ndarray:
        return np.broadcast_to(np.asarray(x, dtype=float), (n, self.dim))

    def risk(self, x: np.ndarray, features: np.ndarray, law: ConditionalLaw) -> float:
        return float(self.risks(self._rows(x, 1), features[None, :], [law])[0])

    def risk_grad(
        self, x: np.ndarray, features: np.ndarray, law: ConditionalLaw
    ) -> np.ndarray:
        return self.risk_grads(self._rows(x, 1), features[None, :], [law])[0]

    def grad_second_moment(
        self, x: np.ndarray, u: np.ndarray, features: np.ndarray, law: ConditionalLaw
    ) -> float:
        return float(
            self.grad_second_moments(
                self._rows(x, 1), self._rows(u, 1), features[None, :], [law]
            )[0]
        )

    def cumulative_risk(
        self, x: np.ndarray, design: np.ndarray, laws: Sequence[ConditionalLaw]
    ) -> float:
        return float(self.risks(self._rows(x, len(laws)), design, laws).sum())

    def cumulative_risk_grad(
        self, x: np.ndarray, design: np.ndarray, laws: Sequence[ConditionalLaw]
    ) -> np.ndarray:
        return self.risk_grads(self._rows(x, len(laws)), design, laws).sum(axis=0)

    def h2_margins(
        self,
        at: np.ndarray,
        other: np.ndarray,
        design: np.ndarray,
        laws: Sequence[ConditionalLaw],
        alpha: float,
        moment: str = "conditional",
    ) -> np.ndarray:
        """Row-wise (H2) margins, non-positive whenever the inequality holds.

        The margin at the pair (a, b) is
        L(a) - L(b) + grad L(a)^T (b - a) + alpha/2 * M(a, b - a), where M is the
        conditional second moment of the directional loss gradient
        (`moment="conditional"`) or the squared directional risk gradient
        (`moment="risk"`).
        """
        if moment not in H2_MOMENTS:
            raise ValueError(f"moment should be one of {H2_MOMENTS}, got: {moment}")
        direction = other - at
        directional = np.einsum("tk,tk->t", self.risk_grads(at, design, laws), direction)
        if moment == "conditional":
            second = self.grad_second_moments(at, direction, design, laws)
        else:
            second = directional**2
        gap = self.risks(at, design, laws) - self.risks(other, design, laws)
        margins = gap + directional + 0.5 * alpha * second
        margins[np.all(direction == 0.0, axis=1)] = 0.0
        return margins
