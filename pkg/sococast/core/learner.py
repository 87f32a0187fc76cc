from abc import ABC, abstractmethod
from typing import Callable

import numpy as np

from sococast.utils.typechecking import check_dim, check_finite, check_min_val


class OnlineLearner(ABC):
    """Abstract class for online learners playing the protocol predict -> feedback -> step.

    Methods
    -------
    - `_predict` (abstract): Implement this method to return the current prediction.
    - `_step` (abstract): Implement this method to update the state with one round of feedback.
    - `predict` : Internally calls the `_predict` method and returns a copy.
    - `step` : Validates the feedback and internally calls the `_step` method.
    - `observe` : Plays one full round against a loss oracle.

    Attributes
    ----------
    - `dim` (int): Dimension of the predictions.
    - `feedback_dim` (int): Dimension of the feedback vector (gradients or loss vectors).
    - `t` (int): Number of completed rounds.
    """

    def __init__(self, dim: int, feedback_dim: int) -> None:
        """Constructor for the `OnlineLearner` class.

        Parameters
        ----------
        - `dim` (int): Dimension of the predictions.
        - `feedback_dim` (int): Dimension of the feedback vector.
        """
        check_min_val(dim, 1, "dim")
        check_min_val(feedback_dim, 1, "feedback_dim")
        self.dim = dim
        self.feedback_dim = feedback_dim
        self.t = 0

    @abstractmethod
    def _predict(self) -> np.ndarray:
        """Return the current prediction.
        Do not use this method directly. Use `predict` instead.
        """
        raise NotImplementedError

    @abstractmethod
    def _step(self, feedback: np.ndarray) -> None:
        """Update the state with the feedback of the current round.
        Do not use this method directly. Use `step` instead.

        Parameters
        ----------
        - `feedback` (np.ndarray): A validated, finite feedback vector.
        """
        raise NotImplementedError

    def predict(self) -> np.ndarray:
        try:
            _ = self.t
        except AttributeError as e:
            raise NotImplementedError(
                "Please call `OnlineLearner` init method from your subclass init method"
            ) from e
        return np.array(self._predict(), dtype=float, copy=True)

    def step(self, feedback: np.ndarray) -> "OnlineLearner":
        """Play the end of the current round.

        Parameters
        ----------
        - `feedback` (np.ndarray): The gradient (or loss vector) of the round.

        Returns
        -------
        - `self` (`OnlineLearner`): The updated learner.

        Raises
        ------
        - `ContractError`: If `feedback` has the wrong dimension or contains NaN/Inf.
        """
        feedback = np.asarray(feedback, dtype=float)
        check_dim(feedback, self.feedback_dim, "feedback")
        check_finite(feedback, "feedback")
        self._step(feedback)
        self.t += 1
        return self

    def observe(self, oracle: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Predict, query `oracle` at the prediction and step with the answer."""
        x = self.predict()
        feedback = oracle(x)
        self.step(feedback)
        return x
